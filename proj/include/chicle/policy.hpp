#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace chicle {

struct EpochRecord {
  std::size_t epoch = 0;
  double time = 0.0;  // seconds, wall or virtual
  double gap = 0.0;
  std::size_t workers = 0;
};

struct PolicyConfig {
  std::size_t window = 2;  // N: short-term window, in epochs
  double ratio = 1.25;     // d
  std::size_t divisor = 4; // m: K -> K/m
  std::size_t min_workers = 1;

  // Throws std::invalid_argument.
  void validate() const;
};

// Gap records since the last scale-in event.
struct PolicyState {
  std::vector<EpochRecord> history;
  std::size_t last_scale_epoch = 0;

  // Records with a non-positive gap carry no slope information and are
  // dropped. Throws std::invalid_argument if time runs backwards.
  void record(const EpochRecord& r);

  // Starts a new long-term baseline at `r` (the state right after a scale-in).
  void reset(const EpochRecord& r);
};

// Descent rates of log10(gap) per second; positive while the gap shrinks.
struct Slopes {
  double long_term = 0.0;   // S_l: whole history
  double short_term = 0.0;  // S_s: last N epochs
};

// Endpoint slopes. S_s spans the last N epochs, i.e. the last N+1 records.
// Empty if there are fewer than N+1 records or the window has no elapsed time.
std::optional<Slopes> slopes(const PolicyState& state, const PolicyConfig& cfg);

// True iff slopes exist, S_s * d < S_l and the current worker count is above
// the floor. The caller resets the state after acting on it.
bool should_scale_in(const PolicyState& state, const PolicyConfig& cfg);

// K / m rounded up to the nearest admissible size that is smaller than K,
// clamped at the floor. Returns K when no admissible smaller size exists.
std::size_t next_workers(std::size_t workers, const PolicyConfig& cfg,
                         std::span<const std::size_t> admissible_sizes);

}  // namespace chicle
