#include <CLI11.hpp>

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "chicle/cli.hpp"

namespace chicle::cli {
namespace {

struct Raw {
  std::string data;
  std::optional<std::uint64_t> features;
  double lambda = 0.01;
  std::size_t workers = 1;
  std::vector<std::size_t> scale_sizes;
  std::optional<std::size_t> min_workers;
  std::size_t policy_n = 2;
  double policy_d = 1.25;
  std::size_t scale_m = 4;
  double time_limit = 600.0;
  std::optional<double> gap_target;
  std::optional<std::size_t> max_epochs;
  std::uint64_t seed = 42;
  double fraction = 1.0;
  std::string metrics_out;
  std::string mode;
  std::string clock;
  double virtual_cost = 1e-6;
  std::string listen;
  std::string driver;
  bool local_workers = false;
};

void add_training_options(CLI::App* cmd, Raw& raw) {
  cmd->add_option("--data", raw.data, "LIBSVM training file")->required();
  cmd->add_option("--features", raw.features, "Feature dimension override");
  cmd->add_option("--lambda", raw.lambda, "L2 regularization strength")->capture_default_str();
  cmd->add_option("--workers", raw.workers, "Initial worker count K0")->capture_default_str();
  cmd->add_option("--scale-sizes", raw.scale_sizes, "Admissible smaller worker counts, e.g. 4,1")->delimiter(',');
  cmd->add_option("--min-workers", raw.min_workers, "Scale-in floor (default: smallest scale size)");
  cmd->add_option("--policy-n", raw.policy_n, "Short-term slope window N, in epochs")->capture_default_str();
  cmd->add_option("--policy-d", raw.policy_d, "Slope ratio threshold d")->capture_default_str();
  cmd->add_option("--scale-m", raw.scale_m, "Scale-in divisor m")->capture_default_str();
  cmd->add_option("--time-limit", raw.time_limit, "Time limit in seconds")->capture_default_str();
  cmd->add_option("--gap-target", raw.gap_target, "Stop once the duality gap reaches this value");
  cmd->add_option("--max-epochs", raw.max_epochs, "Stop after this many epochs");
  cmd->add_option("--seed", raw.seed, "Coordinate sampling seed")->capture_default_str();
  cmd->add_option("--local-fraction", raw.fraction, "Share of local coordinates visited per epoch")
      ->capture_default_str();
  cmd->add_option("--metrics-out", raw.metrics_out, "Per-epoch CSV output path");
  cmd->add_option("--mode", raw.mode, "sim|distributed")->check(CLI::IsMember({"sim", "distributed"}));
  cmd->add_option("--clock", raw.clock, "wall|virtual")->check(CLI::IsMember({"wall", "virtual"}));
  cmd->add_option("--virtual-cost", raw.virtual_cost, "Virtual seconds per coordinate visit")
      ->capture_default_str();
}

}  // namespace

std::variant<Invocation, UsageError> parse_args(std::span<const std::string> args) {
  CLI::App app{"Elastic CoCoA/SDCA trainer for hinge-loss SVMs", "chicle"};
  app.require_subcommand(1, 1);
  Raw raw;

  auto* train = app.add_subcommand("train", "Drive a distributed run over TCP workers");
  add_training_options(train, raw);
  train->add_option("--listen", raw.listen, "Driver address for worker connections")
      ->default_str("0.0.0.0:7070");
  train->add_flag("--local-workers", raw.local_workers, "Start the workers as threads of this process");

  auto* sim = app.add_subcommand("sim", "Simulate workers in-process");
  add_training_options(sim, raw);

  auto* worker = app.add_subcommand("worker", "Serve a driver");
  worker->add_option("--driver", raw.driver, "Driver address host:port")->required();
  worker->add_option("--listen", raw.listen, "Data-channel address for partition moves")
      ->default_str("0.0.0.0:0");

  std::vector<const char*> argv{"chicle"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    return UsageError{app.help(), true};
  } catch (const CLI::CallForAllHelp&) {
    return UsageError{app.help("", CLI::AppFormatMode::All), true};
  } catch (const CLI::ParseError& e) {
    return UsageError{e.what()};
  }

  Invocation inv;
  if (worker->parsed()) {
    inv.subcommand = Subcommand::worker;
    inv.driver = raw.driver;
    inv.listen = raw.listen.empty() ? "0.0.0.0:0" : raw.listen;
    try {
      parse_address(inv.driver);
      parse_address(inv.listen);
    } catch (const std::invalid_argument& e) {
      return UsageError{e.what()};
    }
    return inv;
  }

  inv.subcommand = train->parsed() ? Subcommand::train : Subcommand::sim;
  if (inv.subcommand == Subcommand::sim && raw.mode == "distributed")
    return UsageError{"sim cannot run in distributed mode; use the train subcommand"};
  const bool sim_mode = inv.subcommand == Subcommand::sim || raw.mode == "sim";
  if (raw.local_workers && sim_mode) return UsageError{"--local-workers requires distributed mode"};
  if (raw.clock == "virtual" && !sim_mode) return UsageError{"--clock virtual requires sim mode"};

  RunConfig& run = inv.run;
  run.mode = sim_mode ? Mode::sim : Mode::distributed;
  run.clock = raw.clock == "virtual" ? ClockKind::virtual_time : ClockKind::wall;
  run.initial_workers = raw.workers;
  run.scale_sizes = raw.scale_sizes;
  run.policy.window = raw.policy_n;
  run.policy.ratio = raw.policy_d;
  run.policy.divisor = raw.scale_m;
  run.policy.min_workers =
      raw.min_workers ? *raw.min_workers
                      : (raw.scale_sizes.empty() ? raw.workers
                                                 : *std::min_element(raw.scale_sizes.begin(), raw.scale_sizes.end()));
  run.train.lambda = raw.lambda;
  run.train.seed = raw.seed;
  run.train.local_epoch_fraction = raw.fraction;
  run.time_limit = raw.time_limit;
  run.gap_target = raw.gap_target;
  run.max_epochs = raw.max_epochs;
  run.virtual_cost_per_coordinate = raw.virtual_cost;
  try {
    run.validate();
    if (!sim_mode) parse_address(raw.listen.empty() ? "0.0.0.0:7070" : raw.listen);
  } catch (const std::invalid_argument& e) {
    return UsageError{e.what()};
  }

  inv.data_path = raw.data;
  inv.features = raw.features;
  inv.metrics_out = raw.metrics_out;
  inv.listen = sim_mode ? "" : (raw.listen.empty() ? "0.0.0.0:7070" : raw.listen);
  inv.local_workers = raw.local_workers;
  return inv;
}

}  // namespace chicle::cli
