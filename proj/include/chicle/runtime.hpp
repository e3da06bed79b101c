#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chicle/core.hpp"
#include "chicle/ingest.hpp"
#include "chicle/policy.hpp"
#include "chicle/solver.hpp"
#include "chicle/transport.hpp"

namespace chicle {

enum class Mode { distributed, sim };
enum class ClockKind { wall, virtual_time };

struct RunConfig {
  Mode mode = Mode::sim;
  std::size_t initial_workers = 1;
  std::vector<std::size_t> scale_sizes;  // empty: static run
  PolicyConfig policy;
  TrainConfig train;
  double time_limit = 600.0;
  std::optional<double> gap_target;
  std::optional<std::size_t> max_epochs;
  ClockKind clock = ClockKind::wall;
  double virtual_cost_per_coordinate = 1e-6;

  bool elastic() const noexcept { return !scale_sizes.empty(); }
  // Throws std::invalid_argument.
  void validate() const;
};

// Constants every worker needs, shipped in the Hello reply.
struct WorkerParams {
  std::size_t num_examples = 0;  // global n
  std::uint64_t num_features = 0;
  double lambda = 0.01;
  double fraction = 1.0;
  double sigma_prime = 0.0;  // 0: use current worker count
  std::uint64_t seed = 0;
};

// Solver state of one worker: the partitions it owns, kept in id order.
class Worker {
 public:
  Worker(std::uint32_t id, WorkerParams params);

  std::uint32_t id() const noexcept { return id_; }
  const WorkerParams& params() const noexcept { return params_; }

  void add_partition(PartitionBuffer p);
  // Throws std::out_of_range if the partition is not owned here.
  PartitionBuffer take_partition(std::uint32_t partition_id);

  std::span<const PartitionBuffer> partitions() const noexcept { return partitions_; }
  std::size_t num_examples() const noexcept;

  LocalUpdate train(const SharedVector& v, std::uint64_t epoch, std::size_t workers);
  PartialObjectives evaluate(const SharedVector& v) const;

 private:
  std::uint32_t id_;
  WorkerParams params_;
  std::vector<PartitionBuffer> partitions_;
};

// Driver-side handle on the current set of workers [0, K).
class Cluster {
 public:
  virtual ~Cluster() = default;
  virtual std::size_t workers() const = 0;
  virtual std::vector<LocalUpdate> train(const SharedVector& v, std::uint64_t epoch) = 0;
  virtual std::vector<PartialObjectives> evaluate(const SharedVector& v) = 0;
  // Executes the plan wave by wave and retires workers >= to_workers.
  // Returns bytes moved. Throws TransferFailure.
  virtual std::uint64_t scale_in(const TransferPlan& plan, std::size_t to_workers) = 0;
  virtual void shutdown() = 0;
};

// In-process workers run one after another over the same epoch-start v.
// Partition moves still go through the wire image (encode, then decode).
class SimCluster final : public Cluster {
 public:
  SimCluster(std::vector<PartitionBuffer> partitions, std::span<const std::uint32_t> assignment,
             std::size_t workers, const WorkerParams& params);

  std::size_t workers() const override { return workers_.size(); }
  std::vector<LocalUpdate> train(const SharedVector& v, std::uint64_t epoch) override;
  std::vector<PartialObjectives> evaluate(const SharedVector& v) override;
  std::uint64_t scale_in(const TransferPlan& plan, std::size_t to_workers) override;
  void shutdown() override {}

  const Worker& worker(std::size_t i) const { return workers_.at(i); }

 private:
  std::vector<Worker> workers_;
};

// Workers in other processes/threads, driven over TCP.
class RemoteCluster final : public Cluster {
 public:
  struct Peer {
    Connection control;
    std::string data_host;
    std::uint16_t data_port = 0;
  };

  // Accepts `workers` connections, handshakes, and ships each worker its
  // partitions. Worker ids follow accept order.
  static std::unique_ptr<RemoteCluster> start(Listener& listener, std::size_t workers,
                                              const WorkerParams& params,
                                              std::span<const PartitionBuffer> partitions,
                                              std::span<const std::uint32_t> assignment);

  explicit RemoteCluster(std::vector<Peer> peers) : peers_(std::move(peers)) {}
  ~RemoteCluster() override;

  std::size_t workers() const override { return peers_.size(); }
  std::vector<LocalUpdate> train(const SharedVector& v, std::uint64_t epoch) override;
  std::vector<PartialObjectives> evaluate(const SharedVector& v) override;
  std::uint64_t scale_in(const TransferPlan& plan, std::size_t to_workers) override;
  void shutdown() override;

 private:
  std::vector<EpochResult> round(const SharedVector& v, std::uint64_t epoch, std::uint8_t flags);
  Message expect(std::size_t worker, MessageKind kind);

  std::vector<Peer> peers_;
};

struct WorkerOptions {
  std::string driver;                 // host:port
  std::string listen = "0.0.0.0:0";   // data channel for partition moves
  double connect_timeout = 30.0;      // seconds to keep retrying the driver
};

// Worker process main loop; returns when the driver sends Shutdown.
// Throws on connection or protocol failure.
void run_worker(const WorkerOptions& options);

// ---------------------------------------------------------------------------

struct EpochReport {
  EpochRecord record;
  Objectives objectives;
  std::size_t coordinates_visited = 0;  // summed over workers; 0 for epoch 0
  std::string event;  // "" or "scalein:K→K′"
};

struct ScaleEvent {
  std::size_t epoch = 0;
  std::size_t from = 0;
  std::size_t to = 0;
  double seconds = 0.0;
  std::uint64_t bytes = 0;
  double gap_before = 0.0;
  double gap_after = 0.0;
};

std::string scale_event_label(std::size_t from, std::size_t to);

// CSV: epoch,time_s,k,primal,dual,gap,event. One row per epoch, flushed.
class MetricsWriter {
 public:
  explicit MetricsWriter(std::ostream& out);
  void write(const EpochReport& r);

 private:
  std::ostream& out_;
};

inline constexpr const char* kMetricsHeader = "epoch,time_s,k,primal,dual,gap,event";

enum class StopReason { gap_target, time_limit, max_epochs };

struct RunResult {
  std::vector<EpochReport> epochs;
  std::vector<ScaleEvent> scale_events;
  StopReason reason = StopReason::time_limit;
};

class Driver {
 public:
  Driver(RunConfig cfg, PartitionPlan plan, std::size_t num_examples, std::uint64_t num_features,
         std::unique_ptr<Cluster> cluster);

  // Epoch 0: objectives of the initial state, no training.
  EpochReport evaluate_initial();
  // One outer round: local solves, aggregation, gap.
  EpochReport run_epoch();
  // Moves partitions (with their alphas) to the K' lowest-id workers and
  // re-evaluates the gap on the new topology.
  ScaleEvent execute_scale_in(std::size_t to_workers);

  RunResult run_to_completion(MetricsWriter* metrics = nullptr);

  std::size_t workers() const noexcept { return workers_; }
  std::size_t epoch() const noexcept { return epoch_; }
  double now() const;
  const SharedVector& shared_vector() const noexcept { return v_; }
  const Objectives& objectives() const noexcept { return objectives_; }
  std::span<const std::uint32_t> assignment() const noexcept { return assignment_; }
  Cluster& cluster() noexcept { return *cluster_; }
  const RunConfig& config() const noexcept { return cfg_; }

 private:
  Objectives evaluate();
  void advance_clock(double virtual_seconds);

  RunConfig cfg_;
  PartitionPlan plan_;
  std::size_t n_;
  std::unique_ptr<Cluster> cluster_;
  std::vector<std::uint32_t> assignment_;
  std::size_t workers_;
  std::size_t epoch_ = 0;
  SharedVector v_;
  Objectives objectives_;
  double virtual_now_ = 0.0;
  double wall_start_ = 0.0;
  bool started_ = false;
};

// Builds partitions for `data` and a sim cluster around them.
std::unique_ptr<Driver> make_sim_driver(const RunConfig& cfg, const Dataset& data);

WorkerParams worker_params(const RunConfig& cfg, const Dataset& data);

}  // namespace chicle
