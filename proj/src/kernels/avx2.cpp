// Compiled with -mavx2 only (no -mfma): products and sums must round exactly
// like the scalar reference.
#include <immintrin.h>

#include <cstdint>

#include "chicle/kernels.hpp"

namespace chicle::kernels::avx2 {

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  __m256d acc2 = _mm256_setzero_pd();
  __m256d acc3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
    acc2 = _mm256_add_pd(acc2, _mm256_mul_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8)));
    acc3 = _mm256_add_pd(acc3, _mm256_mul_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12)));
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  const __m256d acc = _mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

// Gathers and multiplies four datapoints at a time, then accumulates the
// products in input order so the result matches the scalar loop exactly.
double sparse_dot(const Datapoint* dps, std::size_t n, const double* v) {
  // Lanes 0,2,4,6 hold feature ids; 1,3,5,7 hold values.
  const __m256i split = _mm256_setr_epi32(0, 2, 4, 6, 1, 3, 5, 7);
  double s = 0.0;
  std::size_t i = 0;
  alignas(32) double prod[4];
  for (; i + 4 <= n; i += 4) {
    const __m256i raw = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(dps + i));
    const __m256i packed = _mm256_permutevar8x32_epi32(raw, split);
    const __m128i idx = _mm256_castsi256_si128(packed);
    const __m128 vals = _mm_castsi128_ps(_mm256_extracti128_si256(packed, 1));
    if (_mm_movemask_ps(_mm_castsi128_ps(idx)) != 0) {
      // Feature id >= 2^31 does not fit the signed gather index.
      for (std::size_t k = i; k < i + 4; ++k) s += static_cast<double>(dps[k].value) * v[dps[k].feature];
      continue;
    }
    const __m256d gathered = _mm256_i32gather_pd(v, idx, 8);
    _mm256_store_pd(prod, _mm256_mul_pd(_mm256_cvtps_pd(vals), gathered));
    s += prod[0];
    s += prod[1];
    s += prod[2];
    s += prod[3];
  }
  for (; i < n; ++i) s += static_cast<double>(dps[i].value) * v[dps[i].feature];
  return s;
}

}  // namespace chicle::kernels::avx2
