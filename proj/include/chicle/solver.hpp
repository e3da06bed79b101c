#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "chicle/core.hpp"

// Hinge-loss SVM with L2 regularization, solved in the dual.
//
//   primal  P(w) = 1/n sum_i max(0, 1 - y_i <w, x_i>) + lambda/2 |w|^2
//   dual    D(a) = 1/n sum_i a_i y_i - lambda/2 |v(a)|^2
//           v(a) = 1/(lambda n) sum_i a_i x_i,    0 <= a_i y_i <= 1
//
// The served model is w = v, so gap = P(v) - D(a).
namespace chicle {

struct LocalUpdate {
  std::vector<double> delta_v;
  std::size_t coordinates_visited = 0;
};

struct PartialObjectives {
  double hinge_sum = 0.0;
  double dual_linear_sum = 0.0;
};

struct Objectives {
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
};

// Closed-form maximizer of the dual along coordinate i of the sigma-scaled
// local subproblem. `margin` is <v_local, x_i> where v_local already carries
// this worker's in-epoch updates scaled by sigma. Returns the new alpha
// (always inside the dual box); a zero-norm example keeps its alpha.
double sdca_new_alpha(double alpha, float label, double sq_norm, double margin, double lambda,
                      std::size_t n, double sigma) noexcept;

inline double sdca_delta(double alpha, float label, double sq_norm, double margin, double lambda,
                         std::size_t n, double sigma) noexcept {
  return sdca_new_alpha(alpha, label, sq_norm, margin, lambda, n, sigma) - alpha;
}

// Seed of the coordinate-sampling stream for one worker in one outer epoch.
// Depends only on (seed, epoch, worker) so runs replay across topologies.
std::uint64_t coordinate_stream_seed(std::uint64_t seed, std::uint64_t epoch,
                                     std::uint32_t worker) noexcept;

// Uniform random permutation of [0, count) drawn from the given stream.
std::vector<std::size_t> sample_order(std::size_t count, std::uint64_t stream_seed);

struct LocalEpochParams {
  double lambda = 0.01;
  std::size_t n = 0;           // global example count
  double sigma = 1.0;          // subproblem scaling sigma'
  double fraction = 1.0;       // share of local coordinates visited
  std::uint64_t stream_seed = 0;
};

// One pass of SDCA over all partitions a worker owns, treated as a single
// pool of coordinates (partitions in the given order). Alphas are updated in
// place; the returned delta_v = 1/(lambda n) sum_i dalpha_i x_i.
LocalUpdate local_epoch(std::span<PartitionBuffer> partitions, const SharedVector& v,
                        const LocalEpochParams& params);

// v' = v + gamma * sum_k delta_v_k, summed in worker order.
SharedVector aggregate(const SharedVector& v, std::span<const LocalUpdate> updates, double gamma);

PartialObjectives partial_objectives(std::span<const PartitionBuffer> partitions,
                                     const SharedVector& v);

// Throws GapNegative if gap < -1e-9 max(1, |primal|).
Objectives duality_gap(std::span<const PartialObjectives> partials, const SharedVector& v,
                       double lambda, std::size_t n);

inline constexpr double kGapTolerance = 1e-9;

}  // namespace chicle
