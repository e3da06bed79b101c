#include <string>

#include "chicle/errors.hpp"
#include "chicle/runtime.hpp"

namespace chicle {

SimCluster::SimCluster(std::vector<PartitionBuffer> partitions, std::span<const std::uint32_t> assignment,
                       std::size_t workers, const WorkerParams& params) {
  workers_.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) workers_.emplace_back(static_cast<std::uint32_t>(w), params);
  for (auto& p : partitions) {
    const auto owner = assignment[p.id()];
    workers_.at(owner).add_partition(std::move(p));
  }
}

std::vector<LocalUpdate> SimCluster::train(const SharedVector& v, std::uint64_t epoch) {
  std::vector<LocalUpdate> out;
  out.reserve(workers_.size());
  for (auto& w : workers_) out.push_back(w.train(v, epoch, workers_.size()));
  return out;
}

std::vector<PartialObjectives> SimCluster::evaluate(const SharedVector& v) {
  std::vector<PartialObjectives> out;
  out.reserve(workers_.size());
  for (const auto& w : workers_) out.push_back(w.evaluate(v));
  return out;
}

std::uint64_t SimCluster::scale_in(const TransferPlan& plan, std::size_t to_workers) {
  std::uint64_t bytes = 0;
  try {
    for (const auto& wave : plan.waves) {
      for (const auto& pair : wave) {
        for (const auto id : pair.partitions) {
          const auto image = encode_partition(workers_.at(pair.from).take_partition(id));
          bytes += image.size();
          workers_.at(pair.to).add_partition(decode_partition(image));
        }
      }
    }
  } catch (const std::exception& e) {
    throw TransferFailure(std::string("partition move failed: ") + e.what());
  }
  for (std::size_t w = to_workers; w < workers_.size(); ++w) {
    if (!workers_[w].partitions().empty())
      throw TransferFailure("worker " + std::to_string(w) + " still owns partitions after scale-in");
  }
  workers_.erase(workers_.begin() + static_cast<std::ptrdiff_t>(to_workers), workers_.end());
  return bytes;
}

}  // namespace chicle
