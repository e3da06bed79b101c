#include <algorithm>
#include <stdexcept>
#include <string>

#include "chicle/runtime.hpp"

namespace chicle {

Worker::Worker(std::uint32_t id, WorkerParams params) : id_(id), params_(params) {}

void Worker::add_partition(PartitionBuffer p) {
  const auto pos = std::lower_bound(partitions_.begin(), partitions_.end(), p.id(),
                                    [](const PartitionBuffer& a, std::uint32_t id) { return a.id() < id; });
  if (pos != partitions_.end() && pos->id() == p.id())
    throw std::invalid_argument("worker already owns partition " + std::to_string(p.id()));
  partitions_.insert(pos, std::move(p));
}

PartitionBuffer Worker::take_partition(std::uint32_t partition_id) {
  const auto pos = std::find_if(partitions_.begin(), partitions_.end(),
                                [&](const PartitionBuffer& p) { return p.id() == partition_id; });
  if (pos == partitions_.end())
    throw std::out_of_range("worker " + std::to_string(id_) + " does not own partition " +
                            std::to_string(partition_id));
  PartitionBuffer out = std::move(*pos);
  partitions_.erase(pos);
  return out;
}

std::size_t Worker::num_examples() const noexcept {
  std::size_t n = 0;
  for (const auto& p : partitions_) n += p.num_examples();
  return n;
}

LocalUpdate Worker::train(const SharedVector& v, std::uint64_t epoch, std::size_t workers) {
  LocalEpochParams lp;
  lp.lambda = params_.lambda;
  lp.n = params_.num_examples;
  lp.sigma = params_.sigma_prime > 0.0 ? params_.sigma_prime : static_cast<double>(workers);
  lp.fraction = params_.fraction;
  lp.stream_seed = coordinate_stream_seed(params_.seed, epoch, id_);
  return local_epoch(partitions_, v, lp);
}

PartialObjectives Worker::evaluate(const SharedVector& v) const { return partial_objectives(partitions_, v); }

}  // namespace chicle
