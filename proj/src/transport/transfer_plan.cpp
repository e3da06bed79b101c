#include <algorithm>
#include <map>
#include <string>

#include "chicle/errors.hpp"
#include "chicle/transport.hpp"

namespace chicle {

TransferPlan plan_transfer(std::span<const std::uint32_t> assignment, std::size_t from_workers,
                           std::size_t to_workers) {
  const std::size_t p = assignment.size();
  if (to_workers == 0 || to_workers >= from_workers)
    throw InvalidTransition("scale-in must go to fewer, and at least one, workers (" +
                            std::to_string(from_workers) + " -> " + std::to_string(to_workers) + ")");
  if (p % to_workers != 0 || p % from_workers != 0)
    throw InvalidTransition(std::to_string(to_workers) + " workers do not divide " + std::to_string(p) +
                            " partitions");

  const std::size_t quota = p / to_workers;
  std::vector<std::size_t> load(to_workers, 0);
  for (const auto w : assignment) {
    if (w >= from_workers) throw InvalidTransition("assignment references an unknown worker");
    if (w < to_workers) ++load[w];
  }

  TransferPlan plan;
  // (sender, receiver) -> partitions, in first-seen order
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<std::uint32_t>> pairs;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pair_order;
  for (std::size_t part = 0; part < p; ++part) {
    const std::uint32_t from = assignment[part];
    if (from < to_workers) continue;
    std::size_t to = from % to_workers;
    while (load[to] >= quota) to = (to + 1) % to_workers;
    ++load[to];
    const auto id = static_cast<std::uint32_t>(part);
    plan.moves.push_back({id, from, static_cast<std::uint32_t>(to)});
    const auto key = std::make_pair(from, static_cast<std::uint32_t>(to));
    auto [it, inserted] = pairs.try_emplace(key);
    if (inserted) pair_order.push_back(key);
    it->second.push_back(id);
  }

  // Greedy edge colouring of the sender/receiver graph: each pair goes into
  // the first wave where neither endpoint is busy.
  std::vector<std::vector<bool>> busy;
  for (const auto& key : pair_order) {
    std::size_t wave = 0;
    for (;; ++wave) {
      if (wave == plan.waves.size()) {
        plan.waves.emplace_back();
        busy.emplace_back(from_workers, false);
      }
      if (!busy[wave][key.first] && !busy[wave][key.second]) break;
    }
    busy[wave][key.first] = busy[wave][key.second] = true;
    plan.waves[wave].push_back({key.first, key.second, pairs[key]});
  }
  for (const auto& w : plan.waves) plan.parallelism = std::max(plan.parallelism, w.size());
  return plan;
}

std::vector<std::uint32_t> apply_transfer(std::span<const std::uint32_t> assignment,
                                          const TransferPlan& plan) {
  std::vector<std::uint32_t> out(assignment.begin(), assignment.end());
  for (const auto& m : plan.moves) out.at(m.partition) = m.to;
  return out;
}

}  // namespace chicle
