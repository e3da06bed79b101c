#include "chicle/core.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

#include "chicle/errors.hpp"

namespace chicle {
namespace {

template <typename T>
T load(std::span<const std::byte> bytes, std::size_t offset) {
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

template <typename T>
void store(std::span<std::byte> bytes, std::size_t offset, T value) {
  std::memcpy(bytes.data() + offset, &value, sizeof(T));
}

[[noreturn]] void malformed(const std::string& what) {
  throw MalformedBuffer("malformed partition: " + what);
}

bool valid_label(float label) { return label == 1.0f || label == -1.0f; }

}  // namespace

PartitionBuffer::PartitionBuffer(std::vector<std::byte> raw) : raw_(std::move(raw)) {
  const std::span<const std::byte> b = raw_;
  id_ = load<std::uint32_t>(b, 8);
  num_examples_ = load<std::uint64_t>(b, 16);
  num_features_ = load<std::uint64_t>(b, 24);
  const auto table_bytes = load<std::uint64_t>(b, 32);
  const auto dp_bytes = load<std::uint64_t>(b, 40);
  table_offset_ = layout::kHeaderBytes;
  dual_offset_ = table_offset_ + table_bytes + dp_bytes;
  nnz_ = dp_bytes / sizeof(Datapoint);

  sq_norms_.resize(num_examples_);
  for (std::size_t i = 0; i < num_examples_; ++i) {
    double s = 0.0;
    for (const Datapoint& dp : datapoints(i)) {
      const double v = dp.value;
      s += v * v;
    }
    sq_norms_[i] = s;
  }
}

std::span<const ExampleEntry> PartitionBuffer::examples() const noexcept {
  if (raw_.empty()) return {};
  return {reinterpret_cast<const ExampleEntry*>(raw_.data() + table_offset_), num_examples_};
}

std::span<const Datapoint> PartitionBuffer::datapoints(std::size_t example) const noexcept {
  const ExampleEntry& e = examples()[example];
  return {reinterpret_cast<const Datapoint*>(raw_.data() + e.dp_offset), e.size};
}

std::span<double> PartitionBuffer::alphas() noexcept {
  if (raw_.empty()) return {};
  return {reinterpret_cast<double*>(raw_.data() + dual_offset_), num_examples_};
}

std::span<const double> PartitionBuffer::alphas() const noexcept {
  if (raw_.empty()) return {};
  return {reinterpret_cast<const double*>(raw_.data() + dual_offset_), num_examples_};
}

PartitionBuilder::PartitionBuilder(std::uint32_t partition_id, std::uint64_t num_features)
    : id_(partition_id), num_features_(num_features) {}

PartitionBuilder& PartitionBuilder::add(float label, std::span<const Datapoint> datapoints,
                                        double alpha) {
  if (!valid_label(label)) malformed("label must be -1 or +1");
  if (!std::isfinite(alpha) || !in_dual_box(alpha, label)) malformed("alpha outside dual box");
  for (const Datapoint& dp : datapoints) {
    if (dp.feature >= num_features_) malformed("feature index out of range");
  }
  labels_.push_back(label);
  sizes_.push_back(datapoints.size());
  datapoints_.insert(datapoints_.end(), datapoints.begin(), datapoints.end());
  alphas_.push_back(alpha);
  return *this;
}

PartitionBuffer PartitionBuilder::build() const {
  const std::size_t n = labels_.size();
  const std::uint64_t table_bytes = n * sizeof(ExampleEntry);
  const std::uint64_t dp_bytes = datapoints_.size() * sizeof(Datapoint);
  const std::uint64_t dual_bytes = n * sizeof(double);
  const std::uint64_t total = layout::kHeaderBytes + table_bytes + dp_bytes + dual_bytes;

  std::vector<std::byte> raw(total);
  const std::span<std::byte> b = raw;
  store<std::uint32_t>(b, 0, layout::kMagic);
  store<std::uint16_t>(b, 4, layout::kVersion);
  store<std::uint16_t>(b, 6, 0);
  store<std::uint32_t>(b, 8, id_);
  store<std::uint32_t>(b, 12, 0);
  store<std::uint64_t>(b, 16, n);
  store<std::uint64_t>(b, 24, num_features_);
  store<std::uint64_t>(b, 32, table_bytes);
  store<std::uint64_t>(b, 40, dp_bytes);
  store<std::uint64_t>(b, 48, dual_bytes);
  store<std::uint64_t>(b, 56, total);

  const std::size_t dp_start = layout::kHeaderBytes + table_bytes;
  std::uint64_t offset = dp_start;
  for (std::size_t i = 0; i < n; ++i) {
    const ExampleEntry e{sizes_[i], labels_[i], 0, offset};
    store(b, layout::kHeaderBytes + i * sizeof(ExampleEntry), e);
    offset += sizes_[i] * sizeof(Datapoint);
  }
  if (dp_bytes > 0) std::memcpy(raw.data() + dp_start, datapoints_.data(), dp_bytes);
  if (dual_bytes > 0) std::memcpy(raw.data() + dp_start + dp_bytes, alphas_.data(), dual_bytes);
  return PartitionBuffer(std::move(raw));
}

std::vector<std::byte> encode_partition(const PartitionBuffer& p) {
  const auto b = p.bytes();
  return {b.begin(), b.end()};
}

PartitionBuffer decode_partition(std::span<const std::byte> bytes) {
  if (bytes.size() < layout::kHeaderBytes) malformed("truncated header");
  if (load<std::uint32_t>(bytes, 0) != layout::kMagic) malformed("bad magic");
  if (load<std::uint16_t>(bytes, 4) != layout::kVersion) malformed("unsupported version");
  if (load<std::uint16_t>(bytes, 6) != 0 || load<std::uint32_t>(bytes, 12) != 0)
    malformed("nonzero reserved header field");

  const auto n = load<std::uint64_t>(bytes, 16);
  const auto num_features = load<std::uint64_t>(bytes, 24);
  const auto table_bytes = load<std::uint64_t>(bytes, 32);
  const auto dp_bytes = load<std::uint64_t>(bytes, 40);
  const auto dual_bytes = load<std::uint64_t>(bytes, 48);
  const auto total = load<std::uint64_t>(bytes, 56);

  // Bound n before multiplying so the region arithmetic cannot overflow.
  if (n > bytes.size() / sizeof(ExampleEntry)) malformed("example count exceeds payload");
  if (table_bytes != n * sizeof(ExampleEntry)) malformed("example table length mismatch");
  if (dual_bytes != n * sizeof(double)) malformed("dual region length mismatch");
  if (dp_bytes % sizeof(Datapoint) != 0) malformed("datapoint region not a whole number of entries");
  if (dp_bytes > bytes.size()) malformed("datapoint region exceeds payload");
  if (total != layout::kHeaderBytes + table_bytes + dp_bytes + dual_bytes)
    malformed("region lengths do not cover the block");
  if (bytes.size() < total) malformed("truncated payload");
  if (bytes.size() > total) malformed("trailing bytes after block");

  const std::size_t dp_start = layout::kHeaderBytes + table_bytes;
  const std::size_t dual_start = dp_start + dp_bytes;
  std::uint64_t expected_offset = dp_start;
  for (std::size_t i = 0; i < n; ++i) {
    const auto e = load<ExampleEntry>(bytes, layout::kHeaderBytes + i * sizeof(ExampleEntry));
    if (e.reserved != 0) malformed("nonzero reserved example field");
    if (!valid_label(e.label)) malformed("label must be -1 or +1");
    if (e.dp_offset != expected_offset) malformed("datapoint runs overlap or leave gaps");
    if (e.size > (dual_start - expected_offset) / sizeof(Datapoint))
      malformed("datapoint run leaves its region");
    for (std::uint64_t k = 0; k < e.size; ++k) {
      const auto dp = load<Datapoint>(bytes, e.dp_offset + k * sizeof(Datapoint));
      if (dp.feature >= num_features) malformed("feature index out of range");
    }
    expected_offset += e.size * sizeof(Datapoint);
    const auto alpha = load<double>(bytes, dual_start + i * sizeof(double));
    if (!std::isfinite(alpha) || !in_dual_box(alpha, e.label)) malformed("alpha outside dual box");
  }
  if (expected_offset != dual_start) malformed("datapoint runs do not cover their region");

  return PartitionBuffer(std::vector<std::byte>(bytes.begin(), bytes.end()));
}

void TrainConfig::validate() const {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (!(local_epoch_fraction > 0.0 && local_epoch_fraction <= 1.0))
    throw std::invalid_argument("local epoch fraction must be in (0, 1]");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must be in (0, 1]");
  if (sigma_prime != 0.0 && !(sigma_prime >= 1.0))
    throw std::invalid_argument("sigma' must be at least 1");
}

}  // namespace chicle
