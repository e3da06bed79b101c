#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "chicle/core.hpp"

namespace chicle {

struct LabeledExample {
  float label = 1.0f;
  std::vector<Datapoint> datapoints;

  friend bool operator==(const LabeledExample& a, const LabeledExample& b) {
    if (a.label != b.label || a.datapoints.size() != b.datapoints.size()) return false;
    for (std::size_t i = 0; i < a.datapoints.size(); ++i) {
      if (a.datapoints[i].feature != b.datapoints[i].feature ||
          a.datapoints[i].value != b.datapoints[i].value)
        return false;
    }
    return true;
  }
};

struct Dataset {
  std::vector<LabeledExample> examples;
  std::uint64_t num_features = 0;

  std::size_t size() const noexcept { return examples.size(); }
};

// LIBSVM text: "label idx:val idx:val ..." with 1-based, strictly increasing
// indices. Labels 0/1 are mapped to -1/+1. Blank lines and '#' comments are
// skipped. `num_features` widens (never narrows) the feature dimension.
Dataset parse_libsvm(std::istream& in, std::optional<std::uint64_t> num_features = {});
Dataset load_libsvm(const std::filesystem::path& path,
                    std::optional<std::uint64_t> num_features = {});

struct PartitionPlan {
  std::size_t num_partitions = 0;
  std::size_t initial_workers = 0;
  // Distinct worker counts below initial_workers, descending.
  std::vector<std::size_t> scale_sizes;
  // partition id -> worker id under initial_workers.
  std::vector<std::uint32_t> assignment;

  std::size_t partitions_per_worker(std::size_t workers) const { return num_partitions / workers; }
  bool admissible(std::size_t workers) const;
};

// P = lcm(K0, scale sizes). Worker w initially owns [w P/K0, (w+1) P/K0).
// Throws InvalidPlan.
PartitionPlan plan_partitions(std::size_t num_examples, std::size_t initial_workers,
                              std::span<const std::size_t> scale_sizes);

// Layout reached by scaling in from K0 straight to `workers`: survivors keep
// what they had and each leaving worker j hands its partitions to survivor
// j mod workers (spilling to the next survivor with room when workers does
// not divide the current count). For divisor chains this is the same as
// stepping through intermediate sizes. Throws InvalidPlan.
std::vector<std::uint32_t> canonical_assignment(const PartitionPlan& plan, std::size_t workers);

// Contiguous, balanced chunks in file order; the first n mod P partitions get
// one extra example. All alphas start at zero.
std::vector<PartitionBuffer> build_partitions(const Dataset& data, const PartitionPlan& plan);

// Concatenates partitions (in the given order) back into a dataset.
Dataset flatten_partitions(std::span<const PartitionBuffer> partitions);

}  // namespace chicle
