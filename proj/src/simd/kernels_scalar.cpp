#include <cmath>
#include <cstddef>

#include "simd/variants.hpp"

namespace lhv::simd::detail {
namespace {

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double dot3_scalar(const double* x, const double* y, const double* w, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i] * w[i];
  return acc;
}

double abs_diff_sum_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::abs(x[i] - y[i]);
  return acc;
}

void minmax_scalar(const double* x, std::size_t n, double* lo, double* hi) {
  double l = x[0];
  double h = x[0];
  for (std::size_t i = 1; i < n; ++i) {
    l = x[i] < l ? x[i] : l;
    h = x[i] > h ? x[i] : h;
  }
  *lo = l;
  *hi = h;
}

void tridiag_apply_scalar(const double* lower, const double* diag, const double* upper,
                          const double* x, double* y, std::size_t n, bool periodic) {
  if (n == 1) {
    y[0] = diag[0] * x[0];
    return;
  }
  const double left = periodic ? x[n - 1] : 0.0;
  const double right = periodic ? x[0] : 0.0;
  y[0] = lower[0] * left + diag[0] * x[0] + upper[0] * x[1];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    y[i] = lower[i] * x[i - 1] + diag[i] * x[i] + upper[i] * x[i + 1];
  }
  y[n - 1] = lower[n - 1] * x[n - 2] + diag[n - 1] * x[n - 1] + upper[n - 1] * right;
}

void em_step_scalar(double* y, const double* drift, const double* diffusion, const double* noise,
                    double dt, double sqrt_dt, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    y[i] += drift[i] * dt + diffusion[i] * sqrt_dt * noise[i];
  }
}

}  // namespace

const KernelTable scalar_table{
    Isa::scalar,         sum_scalar,           dot_scalar,       dot3_scalar,
    abs_diff_sum_scalar, minmax_scalar,        tridiag_apply_scalar, em_step_scalar,
};

}  // namespace lhv::simd::detail
