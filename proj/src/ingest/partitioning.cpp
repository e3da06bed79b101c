#include <algorithm>
#include <numeric>
#include <string>

#include "chicle/errors.hpp"
#include "chicle/ingest.hpp"

namespace chicle {

bool PartitionPlan::admissible(std::size_t workers) const {
  return workers == initial_workers ||
         std::find(scale_sizes.begin(), scale_sizes.end(), workers) != scale_sizes.end();
}

PartitionPlan plan_partitions(std::size_t num_examples, std::size_t initial_workers,
                              std::span<const std::size_t> scale_sizes) {
  if (initial_workers == 0) throw InvalidPlan("need at least one worker");
  PartitionPlan plan;
  plan.initial_workers = initial_workers;
  std::size_t p = initial_workers;
  for (const std::size_t k : scale_sizes) {
    if (k == 0) throw InvalidPlan("scale sizes must be positive");
    if (k > initial_workers)
      throw InvalidPlan("scale size " + std::to_string(k) + " exceeds initial worker count " +
                        std::to_string(initial_workers));
    p = std::lcm(p, k);
    if (k < initial_workers) plan.scale_sizes.push_back(k);
  }
  std::sort(plan.scale_sizes.begin(), plan.scale_sizes.end(), std::greater<>());
  plan.scale_sizes.erase(std::unique(plan.scale_sizes.begin(), plan.scale_sizes.end()),
                         plan.scale_sizes.end());
  if (num_examples < p)
    throw InvalidPlan(std::to_string(num_examples) + " examples cannot fill " + std::to_string(p) +
                      " partitions");
  plan.num_partitions = p;
  plan.assignment.resize(p);
  const std::size_t per_worker = p / initial_workers;
  for (std::size_t i = 0; i < p; ++i) plan.assignment[i] = static_cast<std::uint32_t>(i / per_worker);
  return plan;
}

std::vector<std::uint32_t> canonical_assignment(const PartitionPlan& plan, std::size_t workers) {
  if (workers == 0 || plan.num_partitions % workers != 0)
    throw InvalidPlan(std::to_string(workers) + " workers do not divide " +
                      std::to_string(plan.num_partitions) + " partitions");
  if (workers > plan.initial_workers) throw InvalidPlan("cannot scale out");
  std::vector<std::uint32_t> out = plan.assignment;
  if (workers == plan.initial_workers) return out;

  const std::size_t quota = plan.num_partitions / workers;
  std::vector<std::size_t> load(workers, 0);
  for (const auto w : out)
    if (w < workers) ++load[w];
  for (std::size_t p = 0; p < out.size(); ++p) {
    if (out[p] < workers) continue;
    std::size_t target = out[p] % workers;
    while (load[target] >= quota) target = (target + 1) % workers;
    out[p] = static_cast<std::uint32_t>(target);
    ++load[target];
  }
  return out;
}

std::vector<PartitionBuffer> build_partitions(const Dataset& data, const PartitionPlan& plan) {
  const std::size_t n = data.size();
  const std::size_t p = plan.num_partitions;
  if (p == 0 || n < p) throw InvalidPlan("plan does not fit dataset");
  const std::size_t base = n / p;
  const std::size_t extra = n % p;

  std::vector<PartitionBuffer> out;
  out.reserve(p);
  std::size_t next = 0;
  for (std::size_t i = 0; i < p; ++i) {
    const std::size_t count = base + (i < extra ? 1 : 0);
    PartitionBuilder builder(static_cast<std::uint32_t>(i), data.num_features);
    for (std::size_t k = 0; k < count; ++k, ++next) {
      const auto& ex = data.examples[next];
      builder.add(ex.label, ex.datapoints);
    }
    out.push_back(builder.build());
  }
  return out;
}

Dataset flatten_partitions(std::span<const PartitionBuffer> partitions) {
  Dataset out;
  for (const auto& part : partitions) {
    out.num_features = std::max(out.num_features, part.num_features());
    for (std::size_t i = 0; i < part.num_examples(); ++i) {
      const auto dps = part.datapoints(i);
      out.examples.push_back({part.label(i), {dps.begin(), dps.end()}});
    }
  }
  return out;
}

}  // namespace chicle
