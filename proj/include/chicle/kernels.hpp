#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include "chicle/core.hpp"

// Numeric inner loops of the solver. Every kernel has a scalar reference
// implementation; vector variants are picked once at startup from the CPU's
// capabilities (override with CHICLE_SIMD=scalar|avx2|neon).
//
// Contract for variants:
//   axpy, sparse_dot  bit-identical to scalar (element-wise ops, same
//                     summation order)
//   dot               may reassociate; agrees with scalar to rounding
namespace chicle::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view name(Isa isa) noexcept;

struct KernelTable {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  double (*sparse_dot)(const Datapoint* dps, std::size_t n, const double* v);
};

bool supported(Isa isa) noexcept;

// Throws std::invalid_argument if the ISA is not available on this CPU/build.
const KernelTable& table(Isa isa);

const KernelTable& active() noexcept;

// Test hook; not thread-safe with concurrent kernel calls.
void select(Isa isa);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
double sparse_dot(const Datapoint* dps, std::size_t n, const double* v);
}  // namespace scalar

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline double squared_norm(std::span<const double> a) { return dot(a, a); }

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active().axpy(a, x.data(), y.data(), x.size());
}

inline double sparse_dot(std::span<const Datapoint> dps, std::span<const double> v) {
  return active().sparse_dot(dps.data(), dps.size(), v.data());
}

// y[f] += a * value for each datapoint. No gather/scatter variant: the
// writes are data dependent and AVX2 has no scatter.
inline void sparse_axpy(double a, std::span<const Datapoint> dps, std::span<double> y) {
  for (const Datapoint& dp : dps) y[dp.feature] += a * static_cast<double>(dp.value);
}

}  // namespace chicle::kernels
