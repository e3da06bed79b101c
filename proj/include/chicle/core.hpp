#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace chicle {

static_assert(std::endian::native == std::endian::little,
              "partition images are stored in host order and must be little-endian");

// One nonzero of the training matrix.
struct Datapoint {
  std::uint32_t feature;
  float value;
};
static_assert(sizeof(Datapoint) == 8);

// Entry of the example table. `dp_offset` is a byte offset from the start of
// the partition's raw block, so the block can be moved or sent as-is.
struct ExampleEntry {
  std::uint64_t size;
  float label;
  std::uint32_t reserved;
  std::uint64_t dp_offset;
};
static_assert(sizeof(ExampleEntry) == 24);

// Wire/in-memory layout of a partition block (all little-endian):
//
//   [0, 64)                      header
//   [64, 64 + 24 n)              example table
//   [.., .. + 8 nnz)             datapoints, runs in example order
//   [.., .. + 8 n)               dual variables (double), one per example
//
// Header fields:
//   0  u32 magic "CHPB"     4  u16 version     6  u16 flags (0)
//   8  u32 partition id    12  u32 reserved (0)
//   16 u64 num examples    24  u64 num features
//   32 u64 example table bytes
//   40 u64 datapoint bytes
//   48 u64 dual bytes
//   56 u64 total bytes (header included)
namespace layout {
inline constexpr std::uint32_t kMagic = 0x42504843;  // "CHPB"
inline constexpr std::uint16_t kVersion = 1;
inline constexpr std::size_t kHeaderBytes = 64;
}  // namespace layout

class PartitionBuffer {
 public:
  PartitionBuffer() = default;

  std::uint32_t id() const noexcept { return id_; }
  std::size_t num_examples() const noexcept { return num_examples_; }
  std::uint64_t num_features() const noexcept { return num_features_; }
  std::size_t nnz() const noexcept { return nnz_; }

  std::span<const ExampleEntry> examples() const noexcept;
  std::span<const Datapoint> datapoints(std::size_t example) const noexcept;
  float label(std::size_t example) const noexcept { return examples()[example].label; }
  double squared_norm(std::size_t example) const noexcept { return sq_norms_[example]; }

  std::span<double> alphas() noexcept;
  std::span<const double> alphas() const noexcept;

  // The whole block, header included. This is also the wire image.
  std::span<const std::byte> bytes() const noexcept { return raw_; }

  friend bool operator==(const PartitionBuffer& a, const PartitionBuffer& b) {
    return a.raw_ == b.raw_;
  }

 private:
  friend class PartitionBuilder;
  friend PartitionBuffer decode_partition(std::span<const std::byte> bytes);

  explicit PartitionBuffer(std::vector<std::byte> raw);

  std::vector<std::byte> raw_;
  std::vector<double> sq_norms_;
  std::uint32_t id_ = 0;
  std::size_t num_examples_ = 0;
  std::uint64_t num_features_ = 0;
  std::size_t nnz_ = 0;
  std::size_t table_offset_ = 0;
  std::size_t dual_offset_ = 0;
};

class PartitionBuilder {
 public:
  PartitionBuilder(std::uint32_t partition_id, std::uint64_t num_features);

  // Throws MalformedBuffer if the example would violate a buffer invariant.
  PartitionBuilder& add(float label, std::span<const Datapoint> datapoints, double alpha = 0.0);

  PartitionBuffer build() const;

 private:
  std::uint32_t id_;
  std::uint64_t num_features_;
  std::vector<float> labels_;
  std::vector<std::uint64_t> sizes_;
  std::vector<Datapoint> datapoints_;
  std::vector<double> alphas_;
};

std::vector<std::byte> encode_partition(const PartitionBuffer& p);

// Validates every invariant; throws MalformedBuffer on any violation.
PartitionBuffer decode_partition(std::span<const std::byte> bytes);

// Dual box for hinge loss: 0 <= alpha * label <= 1.
inline bool in_dual_box(double alpha, float label) noexcept {
  const double b = alpha * static_cast<double>(label);
  return b >= 0.0 && b <= 1.0;
}

struct SharedVector {
  std::vector<double> values;

  SharedVector() = default;
  explicit SharedVector(std::size_t num_features) : values(num_features, 0.0) {}

  std::size_t size() const noexcept { return values.size(); }
  friend bool operator==(const SharedVector&, const SharedVector&) = default;
};

struct TrainConfig {
  double lambda = 0.01;
  double local_epoch_fraction = 1.0;
  // 0 selects the current worker count.
  double sigma_prime = 0.0;
  double gamma = 1.0;
  std::uint64_t seed = 42;

  double effective_sigma(std::size_t workers) const noexcept {
    return sigma_prime > 0.0 ? sigma_prime : static_cast<double>(workers);
  }

  // Throws std::invalid_argument.
  void validate() const;
};

}  // namespace chicle
