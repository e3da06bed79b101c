#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "chicle/errors.hpp"
#include "chicle/runtime.hpp"

namespace chicle {
namespace {

double steady_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

}  // namespace

void RunConfig::validate() const {
  if (initial_workers == 0) throw std::invalid_argument("need at least one worker");
  for (const auto k : scale_sizes) {
    if (k == 0 || k > initial_workers)
      throw std::invalid_argument("scale sizes must lie in [1, " + std::to_string(initial_workers) + "]");
  }
  if (!(time_limit > 0.0)) throw std::invalid_argument("time limit must be positive");
  if (gap_target && !(*gap_target > 0.0)) throw std::invalid_argument("gap target must be positive");
  if (max_epochs && *max_epochs == 0) throw std::invalid_argument("max epochs must be positive");
  if (!(virtual_cost_per_coordinate > 0.0)) throw std::invalid_argument("virtual cost must be positive");
  if (clock == ClockKind::virtual_time && mode != Mode::sim)
    throw std::invalid_argument("the virtual clock is only available in sim mode");
  if (policy.min_workers > initial_workers)
    throw std::invalid_argument("minimum worker count exceeds the initial worker count");
  policy.validate();
  train.validate();
}

std::string scale_event_label(std::size_t from, std::size_t to) {
  return "scalein:" + std::to_string(from) + "→" + std::to_string(to);
}

Driver::Driver(RunConfig cfg, PartitionPlan plan, std::size_t num_examples, std::uint64_t num_features,
               std::unique_ptr<Cluster> cluster)
    : cfg_(std::move(cfg)),
      plan_(std::move(plan)),
      n_(num_examples),
      cluster_(std::move(cluster)),
      assignment_(plan_.assignment),
      workers_(cluster_->workers()),
      v_(num_features) {
  cfg_.validate();
}

double Driver::now() const {
  if (cfg_.clock == ClockKind::virtual_time) return virtual_now_;
  return started_ ? steady_seconds() - wall_start_ : 0.0;
}

void Driver::advance_clock(double virtual_seconds) { virtual_now_ += virtual_seconds; }

Objectives Driver::evaluate() {
  const auto partials = cluster_->evaluate(v_);
  objectives_ = duality_gap(partials, v_, cfg_.train.lambda, n_);
  return objectives_;
}

EpochReport Driver::evaluate_initial() {
  if (!started_) {
    wall_start_ = steady_seconds();
    started_ = true;
  }
  EpochReport r;
  r.objectives = evaluate();
  r.record = {epoch_, now(), r.objectives.gap, workers_};
  return r;
}

EpochReport Driver::run_epoch() {
  if (!started_) {
    wall_start_ = steady_seconds();
    started_ = true;
  }
  ++epoch_;
  const auto updates = cluster_->train(v_, epoch_);
  std::size_t visited = 0;
  for (const auto& u : updates) visited += u.coordinates_visited;
  v_ = aggregate(v_, updates, cfg_.train.gamma);
  EpochReport r;
  r.objectives = evaluate();
  r.coordinates_visited = visited;
  // Perfect scaling, no communication: the epoch costs its coordinate
  // visits spread evenly over the workers.
  advance_clock(static_cast<double>(visited) / static_cast<double>(workers_) * cfg_.virtual_cost_per_coordinate);
  r.record = {epoch_, now(), r.objectives.gap, workers_};
  return r;
}

ScaleEvent Driver::execute_scale_in(std::size_t to_workers) {
  ScaleEvent ev;
  ev.epoch = epoch_;
  ev.from = workers_;
  ev.to = to_workers;
  ev.gap_before = objectives_.gap;
  const double primal_before = objectives_.primal;

  const double t0 = steady_seconds();
  const TransferPlan plan = plan_transfer(assignment_, workers_, to_workers);
  ev.bytes = cluster_->scale_in(plan, to_workers);
  assignment_ = apply_transfer(assignment_, plan);
  workers_ = to_workers;
  ev.gap_after = evaluate().gap;
  ev.seconds = steady_seconds() - t0;

  // Only ownership changed, so the certificate must not move beyond
  // summation-order noise.
  const double tol = 1e-9 * std::abs(ev.gap_before) + 1e-14 * std::max(1.0, std::abs(primal_before));
  if (std::abs(ev.gap_after - ev.gap_before) > tol)
    throw TransferFailure("duality gap changed across scale-in: " + std::to_string(ev.gap_before) + " -> " +
                          std::to_string(ev.gap_after));
  return ev;
}

RunResult Driver::run_to_completion(MetricsWriter* metrics) {
  RunResult result;
  PolicyState policy;

  const auto emit = [&](EpochReport r) {
    if (metrics != nullptr) metrics->write(r);
    result.epochs.push_back(std::move(r));
  };
  const auto reached = [&](const EpochReport& r) { return cfg_.gap_target && r.objectives.gap <= *cfg_.gap_target; };

  EpochReport initial = evaluate_initial();
  policy.reset(initial.record);
  const bool done = reached(initial);
  emit(std::move(initial));
  if (done) {
    result.reason = StopReason::gap_target;
    return result;
  }

  for (;;) {
    if (now() >= cfg_.time_limit) {
      result.reason = StopReason::time_limit;
      break;
    }
    if (cfg_.max_epochs && epoch_ >= *cfg_.max_epochs) {
      result.reason = StopReason::max_epochs;
      break;
    }
    EpochReport r = run_epoch();
    if (reached(r)) {
      emit(std::move(r));
      result.reason = StopReason::gap_target;
      break;
    }
    policy.record(r.record);
    if (cfg_.elastic() && should_scale_in(policy, cfg_.policy)) {
      const std::size_t next = next_workers(workers_, cfg_.policy, plan_.scale_sizes);
      if (next < workers_) {
        const ScaleEvent ev = execute_scale_in(next);
        r.event = scale_event_label(ev.from, ev.to);
        result.scale_events.push_back(ev);
        policy.reset({epoch_, now(), ev.gap_after, workers_});
      }
    }
    emit(std::move(r));
  }
  return result;
}

WorkerParams worker_params(const RunConfig& cfg, const Dataset& data) {
  WorkerParams p;
  p.num_examples = data.size();
  p.num_features = data.num_features;
  p.lambda = cfg.train.lambda;
  p.fraction = cfg.train.local_epoch_fraction;
  p.sigma_prime = cfg.train.sigma_prime;
  p.seed = cfg.train.seed;
  return p;
}

std::unique_ptr<Driver> make_sim_driver(const RunConfig& cfg, const Dataset& data) {
  cfg.validate();
  PartitionPlan plan = plan_partitions(data.size(), cfg.initial_workers, cfg.scale_sizes);
  auto cluster = std::make_unique<SimCluster>(build_partitions(data, plan), plan.assignment,
                                              cfg.initial_workers, worker_params(cfg, data));
  return std::make_unique<Driver>(cfg, std::move(plan), data.size(), data.num_features, std::move(cluster));
}

}  // namespace chicle
