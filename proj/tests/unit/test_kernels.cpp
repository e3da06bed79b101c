#include <cmath>
#include <cstring>

#include <sys/mman.h>

#include "chicle/kernels.hpp"
#include "doctest.h"
#include "support/generators.hpp"

using namespace chicle;
using kernels::Isa;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

std::vector<Isa> vector_isas() {
  std::vector<Isa> out;
  for (const Isa isa : {Isa::avx2, Isa::neon})
    if (kernels::supported(isa)) out.push_back(isa);
  return out;
}

}  // namespace

TEST_CASE("scalar kernels on small hand cases") {
  const double a[] = {1, 2, 3};
  const double b[] = {4, -5, 6};
  CHECK(kernels::scalar::dot(a, b, 3) == 12.0);
  double y[] = {1, 1, 1};
  kernels::scalar::axpy(2.0, a, y, 3);
  CHECK(y[0] == 3.0);
  CHECK(y[2] == 7.0);
  const Datapoint dps[] = {{0, 0.5f}, {2, 2.0f}};
  CHECK(kernels::scalar::sparse_dot(dps, 2, b) == 14.0);
  CHECK(kernels::scalar::sparse_dot(dps, 0, b) == 0.0);
}

TEST_CASE("scalar is always available and names are stable") {
  CHECK(kernels::supported(Isa::scalar));
  CHECK(kernels::table(Isa::scalar).isa == Isa::scalar);
  CHECK(kernels::name(Isa::avx2) == "avx2");
}

TEST_CASE("vector kernels match the scalar reference") {
  const auto isas = vector_isas();
  if (isas.empty()) MESSAGE("no vector ISA on this machine; equivalence is vacuous");
  gen::Rng rng(21);
  const auto& ref = kernels::table(Isa::scalar);
  for (const Isa isa : isas) {
    const auto& k = kernels::table(isa);
    for (int t = 0; t < 400; ++t) {
      const std::size_t n = rng.index(0, 67);
      std::vector<double> x(n), y(n);
      for (auto& v : x) v = rng.normal();
      for (auto& v : y) v = rng.normal();
      const double a = rng.normal();

      auto y_ref = y, y_vec = y;
      ref.axpy(a, x.data(), y_ref.data(), n);
      k.axpy(a, x.data(), y_vec.data(), n);
      for (std::size_t i = 0; i < n; ++i) REQUIRE(same_bits(y_ref[i], y_vec[i]));

      const double d_ref = ref.dot(x.data(), y.data(), n);
      const double d_vec = k.dot(x.data(), y.data(), n);
      double mag = 0.0;
      for (std::size_t i = 0; i < n; ++i) mag += std::abs(x[i] * y[i]);
      CHECK(std::abs(d_ref - d_vec) <= 1e-14 * (1.0 + mag));

      const std::uint64_t features = rng.index(1, 90);
      std::vector<double> v(features);
      for (auto& e : v) e = rng.normal();
      const auto row = gen::sparse_row(rng, features, rng.uniform(0.0, 1.0));
      REQUIRE(same_bits(ref.sparse_dot(row.data(), row.size(), v.data()),
                        k.sparse_dot(row.data(), row.size(), v.data())));
    }
  }
}

TEST_CASE("sparse_dot handles feature ids past 2^31") {
  // 16 GiB of lazily backed address space; only the top page is touched.
  const std::uint32_t base = 0x80000000u;
  const std::size_t len = (std::size_t{base} + 8) * sizeof(double);
  void* mem = mmap(nullptr, len, PROT_READ | PROT_WRITE, MAP_PRIVATE | MAP_ANONYMOUS | MAP_NORESERVE, -1, 0);
  if (mem == MAP_FAILED) {
    MESSAGE("cannot reserve address space; skipped");
    return;
  }
  auto* v = static_cast<double*>(mem);
  std::vector<Datapoint> row;
  for (std::uint32_t i = 0; i < 6; ++i) {
    v[base + i] = 0.5 + i;
    row.push_back({base + i, static_cast<float>(i) - 2.5f});
  }
  row.insert(row.begin(), Datapoint{3, 1.5f});
  v[3] = -2.0;
  const double expect = kernels::scalar::sparse_dot(row.data(), row.size(), v);
  CHECK(expect == doctest::Approx(-3.0 + (-2.5 * 0.5 - 1.5 * 1.5 - 0.5 * 2.5 + 0.5 * 3.5 + 1.5 * 4.5 + 2.5 * 5.5)));
  for (const Isa isa : vector_isas()) CHECK(same_bits(kernels::table(isa).sparse_dot(row.data(), row.size(), v), expect));
  munmap(mem, len);
}

TEST_CASE("select switches the active table") {
  const Isa before = kernels::active().isa;
  kernels::select(Isa::scalar);
  CHECK(kernels::active().isa == Isa::scalar);
  kernels::select(before);
  CHECK(kernels::active().isa == before);
  if (!kernels::supported(Isa::neon)) CHECK_THROWS_AS(kernels::select(Isa::neon), std::invalid_argument);
}
