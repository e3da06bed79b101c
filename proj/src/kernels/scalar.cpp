#include "chicle/kernels.hpp"

namespace chicle::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double sparse_dot(const Datapoint* dps, std::size_t n, const double* v) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += static_cast<double>(dps[i].value) * v[dps[i].feature];
  return s;
}

}  // namespace chicle::kernels::scalar
