#include <fstream>
#include <iostream>
#include <thread>
#include <vector>

#include "chicle/cli.hpp"
#include "chicle/errors.hpp"
#include "chicle/kernels.hpp"

namespace chicle::cli {
namespace {

const char* reason_text(StopReason r) {
  switch (r) {
    case StopReason::gap_target: return "gap target reached";
    case StopReason::time_limit: return "time limit reached";
    case StopReason::max_epochs: return "epoch limit reached";
  }
  return "";
}

void summarize(const RunResult& result, std::ostream& log) {
  const auto& last = result.epochs.back();
  log << "stopped: " << reason_text(result.reason) << " after " << last.record.epoch << " epochs, t="
      << last.record.time << "s, gap=" << last.objectives.gap << ", k=" << last.record.workers << '\n';
  for (const auto& ev : result.scale_events) {
    log << "scale-in " << ev.from << "->" << ev.to << " after epoch " << ev.epoch << ": " << ev.bytes
        << " bytes in " << ev.seconds << "s, gap " << ev.gap_before << " -> " << ev.gap_after << '\n';
  }
}

}  // namespace

RunResult execute(const Invocation& inv, std::ostream& log) {
  if (inv.subcommand == Subcommand::worker) {
    run_worker({inv.driver, inv.listen});
    return {};
  }

  const Dataset data = load_libsvm(inv.data_path, inv.features);
  log << "loaded " << data.size() << " examples, " << data.num_features << " features; kernels: "
      << kernels::name(kernels::active().isa) << '\n';

  std::ofstream metrics_file;
  std::unique_ptr<MetricsWriter> metrics;
  if (!inv.metrics_out.empty()) {
    metrics_file.open(inv.metrics_out);
    if (!metrics_file) throw Error("cannot write metrics to " + inv.metrics_out);
    metrics = std::make_unique<MetricsWriter>(metrics_file);
  }

  RunResult result;
  if (inv.run.mode == Mode::sim) {
    auto driver = make_sim_driver(inv.run, data);
    result = driver->run_to_completion(metrics.get());
  } else {
    PartitionPlan plan = plan_partitions(data.size(), inv.run.initial_workers, inv.run.scale_sizes);
    const auto partitions = build_partitions(data, plan);
    Listener listener(inv.listen);
    log << "waiting for " << inv.run.initial_workers << " workers on port " << listener.port() << '\n';

    std::vector<std::thread> local;
    std::vector<std::exception_ptr> local_errors(inv.local_workers ? inv.run.initial_workers : 0);
    for (std::size_t w = 0; w < local_errors.size(); ++w) {
      local.emplace_back([&, w] {
        try {
          run_worker({"127.0.0.1:" + std::to_string(listener.port()), "127.0.0.1:0"});
        } catch (...) {
          local_errors[w] = std::current_exception();
        }
      });
    }
    try {
      auto cluster = RemoteCluster::start(listener, inv.run.initial_workers, worker_params(inv.run, data),
                                          partitions, plan.assignment);
      Driver driver(inv.run, std::move(plan), data.size(), data.num_features, std::move(cluster));
      result = driver.run_to_completion(metrics.get());
      driver.cluster().shutdown();
    } catch (...) {
      for (auto& t : local) t.detach();
      throw;
    }
    for (auto& t : local) t.join();
    for (const auto& e : local_errors)
      if (e) std::rethrow_exception(e);
  }
  summarize(result, log);
  return result;
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  auto parsed = parse_args(args);
  if (auto* err = std::get_if<UsageError>(&parsed)) {
    if (err->help) {
      std::cout << err->message;
      return kExitOk;
    }
    std::cerr << "chicle: " << err->message << "\nRun with --help for usage.\n";
    return kExitUsage;
  }
  try {
    execute(std::get<Invocation>(parsed), std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "chicle: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace chicle::cli
