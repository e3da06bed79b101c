#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "chicle/kernels.hpp"

namespace chicle::kernels {

#if defined(CHICLE_HAVE_AVX2)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
double sparse_dot(const Datapoint* dps, std::size_t n, const double* v);
}  // namespace avx2
#endif

#if defined(CHICLE_HAVE_NEON)
namespace neon {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
}  // namespace neon
#endif

namespace {

constexpr KernelTable kScalar{Isa::scalar, scalar::dot, scalar::axpy, scalar::sparse_dot};
#if defined(CHICLE_HAVE_AVX2)
constexpr KernelTable kAvx2{Isa::avx2, avx2::dot, avx2::axpy, avx2::sparse_dot};
#endif
#if defined(CHICLE_HAVE_NEON)
// NEON has no gather; the sparse kernel stays scalar.
constexpr KernelTable kNeon{Isa::neon, neon::dot, neon::axpy, scalar::sparse_dot};
#endif

const KernelTable* detect() {
  const char* forced = std::getenv("CHICLE_SIMD");
  if (forced != nullptr) {
    const std::string f = forced;
    if (f == "scalar") return &kScalar;
    if (f == "avx2" && supported(Isa::avx2)) return &table(Isa::avx2);
    if (f == "neon" && supported(Isa::neon)) return &table(Isa::neon);
  }
  if (supported(Isa::avx2)) return &table(Isa::avx2);
  if (supported(Isa::neon)) return &table(Isa::neon);
  return &kScalar;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> t{detect()};
  return t;
}

}  // namespace

std::string_view name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

bool supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2:
#if defined(CHICLE_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::neon:
#if defined(CHICLE_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!supported(isa)) throw std::invalid_argument("ISA not supported: " + std::string(name(isa)));
  switch (isa) {
#if defined(CHICLE_HAVE_AVX2)
    case Isa::avx2: return kAvx2;
#endif
#if defined(CHICLE_HAVE_NEON)
    case Isa::neon: return kNeon;
#endif
    default: return kScalar;
  }
}

const KernelTable& active() noexcept { return *current().load(std::memory_order_relaxed); }

void select(Isa isa) { current().store(&table(isa), std::memory_order_relaxed); }

}  // namespace chicle::kernels
