#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "chicle/errors.hpp"
#include "chicle/kernels.hpp"
#include "chicle/solver.hpp"

namespace chicle {
namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

double sdca_new_alpha(double alpha, float label, double sq_norm, double margin, double lambda,
                      std::size_t n, double sigma) noexcept {
  if (sq_norm <= 0.0) return alpha;
  const double y = label;
  const double lambda_n = lambda * static_cast<double>(n);
  const double proposed = alpha * y + (1.0 - y * margin) * lambda_n / (sigma * sq_norm);
  return y * std::clamp(proposed, 0.0, 1.0);
}

std::uint64_t coordinate_stream_seed(std::uint64_t seed, std::uint64_t epoch,
                                     std::uint32_t worker) noexcept {
  return splitmix64(splitmix64(seed ^ worker) ^ epoch);
}

std::vector<std::size_t> sample_order(std::size_t count, std::uint64_t stream_seed) {
  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = i;
  std::mt19937_64 rng(stream_seed);
  for (std::size_t i = count; i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(order[i - 1], order[pick(rng)]);
  }
  return order;
}

LocalUpdate local_epoch(std::span<PartitionBuffer> partitions, const SharedVector& v,
                        const LocalEpochParams& params) {
  LocalUpdate out;
  out.delta_v.assign(v.size(), 0.0);

  struct Coordinate {
    std::uint32_t partition;
    std::uint32_t example;
  };
  std::vector<Coordinate> pool;
  for (std::size_t p = 0; p < partitions.size(); ++p) {
    for (std::size_t i = 0; i < partitions[p].num_examples(); ++i)
      pool.push_back({static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(i)});
  }
  if (pool.empty()) return out;

  const auto visits = static_cast<std::size_t>(
      std::ceil(params.fraction * static_cast<double>(pool.size())));
  const auto order = sample_order(pool.size(), params.stream_seed);

  std::vector<double> v_local = v.values;
  const double lambda_n = params.lambda * static_cast<double>(params.n);
  for (std::size_t k = 0; k < std::min(visits, pool.size()); ++k) {
    const Coordinate c = pool[order[k]];
    PartitionBuffer& part = partitions[c.partition];
    const auto x = part.datapoints(c.example);
    double& alpha = part.alphas()[c.example];
    const double margin = kernels::sparse_dot(x, v_local);
    const double updated = sdca_new_alpha(alpha, part.label(c.example), part.squared_norm(c.example),
                                          margin, params.lambda, params.n, params.sigma);
    const double delta = updated - alpha;
    ++out.coordinates_visited;
    if (delta == 0.0) continue;
    alpha = updated;
    const double coef = delta / lambda_n;
    kernels::sparse_axpy(coef, x, out.delta_v);
    kernels::sparse_axpy(params.sigma * coef, x, v_local);
  }
  return out;
}

SharedVector aggregate(const SharedVector& v, std::span<const LocalUpdate> updates, double gamma) {
  SharedVector out = v;
  for (const auto& u : updates) kernels::axpy(gamma, u.delta_v, out.values);
  return out;
}

PartialObjectives partial_objectives(std::span<const PartitionBuffer> partitions,
                                     const SharedVector& v) {
  PartialObjectives out;
  for (const auto& part : partitions) {
    const auto alphas = part.alphas();
    for (std::size_t i = 0; i < part.num_examples(); ++i) {
      const double y = part.label(i);
      out.hinge_sum += std::max(0.0, 1.0 - y * kernels::sparse_dot(part.datapoints(i), v.values));
      out.dual_linear_sum += alphas[i] * y;
    }
  }
  return out;
}

Objectives duality_gap(std::span<const PartialObjectives> partials, const SharedVector& v,
                       double lambda, std::size_t n) {
  double hinge = 0.0;
  double linear = 0.0;
  for (const auto& p : partials) {
    hinge += p.hinge_sum;
    linear += p.dual_linear_sum;
  }
  const double reg = 0.5 * lambda * kernels::squared_norm(v.values);
  const double inv_n = 1.0 / static_cast<double>(n);
  Objectives o;
  o.primal = hinge * inv_n + reg;
  o.dual = linear * inv_n - reg;
  o.gap = o.primal - o.dual;
  if (o.gap < -kGapTolerance * std::max(1.0, std::abs(o.primal)))
    throw GapNegative("negative duality gap " + std::to_string(o.gap));
  return o;
}

}  // namespace chicle
