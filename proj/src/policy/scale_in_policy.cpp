#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "chicle/policy.hpp"

namespace chicle {

void PolicyConfig::validate() const {
  if (window < 2) throw std::invalid_argument("policy window N must be at least 2");
  if (!(ratio > 1.0)) throw std::invalid_argument("policy ratio d must exceed 1");
  if (divisor < 2) throw std::invalid_argument("scale-in divisor m must be at least 2");
  if (min_workers < 1) throw std::invalid_argument("minimum worker count must be at least 1");
}

void PolicyState::record(const EpochRecord& r) {
  if (!(r.gap > 0.0)) return;
  if (!history.empty() && r.time < history.back().time)
    throw std::invalid_argument("epoch records must be non-decreasing in time");
  history.push_back(r);
}

void PolicyState::reset(const EpochRecord& r) {
  history.clear();
  last_scale_epoch = r.epoch;
  record(r);
}

namespace {

std::optional<double> descent_rate(const EpochRecord& first, const EpochRecord& last) {
  const double dt = last.time - first.time;
  if (!(dt > 0.0)) return std::nullopt;
  return (std::log10(first.gap) - std::log10(last.gap)) / dt;
}

}  // namespace

std::optional<Slopes> slopes(const PolicyState& state, const PolicyConfig& cfg) {
  const auto& h = state.history;
  if (h.size() < cfg.window + 1) return std::nullopt;
  const auto long_term = descent_rate(h.front(), h.back());
  const auto short_term = descent_rate(h[h.size() - 1 - cfg.window], h.back());
  if (!long_term || !short_term) return std::nullopt;
  return Slopes{*long_term, *short_term};
}

bool should_scale_in(const PolicyState& state, const PolicyConfig& cfg) {
  if (state.history.empty() || state.history.back().workers <= cfg.min_workers) return false;
  const auto s = slopes(state, cfg);
  return s && s->short_term * cfg.ratio < s->long_term;
}

std::size_t next_workers(std::size_t workers, const PolicyConfig& cfg,
                         std::span<const std::size_t> admissible_sizes) {
  if (workers <= cfg.min_workers) return workers;
  const std::size_t target =
      std::max(cfg.min_workers, (workers + cfg.divisor - 1) / cfg.divisor);
  std::size_t best_above = 0;  // smallest admissible >= target
  std::size_t best_below = 0;  // largest admissible in [floor, target)
  for (const std::size_t k : admissible_sizes) {
    if (k >= workers || k < cfg.min_workers) continue;
    if (k >= target) {
      if (best_above == 0 || k < best_above) best_above = k;
    } else if (k > best_below) {
      best_below = k;
    }
  }
  if (best_above != 0) return best_above;
  if (best_below != 0) return best_below;
  return workers;
}

}  // namespace chicle
