// Compiled with -mavx2 -mfma; only reached after the runtime CPU check in
// dispatch.cpp. Elementwise kernels use separate multiply and add in the same
// order as the scalar reference so their results are bit-identical; the
// reductions use four-lane FMA accumulators and differ from scalar by rounding.

#include <immintrin.h>

#include <cmath>
#include <cstddef>

#include "simd/variants.hpp"

namespace lhv::simd::detail {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double sum_avx2(const double* x, std::size_t n) {
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_add_pd(a0, _mm256_loadu_pd(x + i));
    a1 = _mm256_add_pd(a1, _mm256_loadu_pd(x + i + 4));
  }
  double acc = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) acc += x[i];
  return acc;
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
    a1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), a1);
  }
  double acc = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double dot3_avx2(const double* x, const double* y, const double* w, std::size_t n) {
  __m256d a0 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xy = _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    a0 = _mm256_fmadd_pd(xy, _mm256_loadu_pd(w + i), a0);
  }
  double acc = hsum(a0);
  for (; i < n; ++i) acc += x[i] * y[i] * w[i];
  return acc;
}

double abs_diff_sum_avx2(const double* x, const double* y, std::size_t n) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d a0 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    a0 = _mm256_add_pd(a0, _mm256_andnot_pd(sign_mask, d));
  }
  double acc = hsum(a0);
  for (; i < n; ++i) acc += std::abs(x[i] - y[i]);
  return acc;
}

void minmax_avx2(const double* x, std::size_t n, double* lo, double* hi) {
  std::size_t i = 0;
  double l = x[0];
  double h = x[0];
  if (n >= 4) {
    __m256d vl = _mm256_loadu_pd(x);
    __m256d vh = vl;
    for (i = 4; i + 4 <= n; i += 4) {
      const __m256d v = _mm256_loadu_pd(x + i);
      vl = _mm256_min_pd(vl, v);
      vh = _mm256_max_pd(vh, v);
    }
    alignas(32) double bl[4];
    alignas(32) double bh[4];
    _mm256_store_pd(bl, vl);
    _mm256_store_pd(bh, vh);
    l = bl[0];
    h = bh[0];
    for (int k = 1; k < 4; ++k) {
      l = bl[k] < l ? bl[k] : l;
      h = bh[k] > h ? bh[k] : h;
    }
  }
  for (; i < n; ++i) {
    l = x[i] < l ? x[i] : l;
    h = x[i] > h ? x[i] : h;
  }
  *lo = l;
  *hi = h;
}

void tridiag_apply_avx2(const double* lower, const double* diag, const double* upper,
                        const double* x, double* y, std::size_t n, bool periodic) {
  if (n < 3) {
    scalar_table.tridiag_apply(lower, diag, upper, x, y, n, periodic);
    return;
  }
  const double left = periodic ? x[n - 1] : 0.0;
  const double right = periodic ? x[0] : 0.0;
  y[0] = lower[0] * left + diag[0] * x[0] + upper[0] * x[1];
  std::size_t i = 1;
  for (; i + 4 <= n - 1; i += 4) {
    const __m256d l = _mm256_mul_pd(_mm256_loadu_pd(lower + i), _mm256_loadu_pd(x + i - 1));
    const __m256d d = _mm256_mul_pd(_mm256_loadu_pd(diag + i), _mm256_loadu_pd(x + i));
    const __m256d u = _mm256_mul_pd(_mm256_loadu_pd(upper + i), _mm256_loadu_pd(x + i + 1));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_add_pd(l, d), u));
  }
  for (; i + 1 < n; ++i) {
    y[i] = lower[i] * x[i - 1] + diag[i] * x[i] + upper[i] * x[i + 1];
  }
  y[n - 1] = lower[n - 1] * x[n - 2] + diag[n - 1] * x[n - 1] + upper[n - 1] * right;
}

void em_step_avx2(double* y, const double* drift, const double* diffusion, const double* noise,
                  double dt, double sqrt_dt, std::size_t n) {
  const __m256d vdt = _mm256_set1_pd(dt);
  const __m256d vsq = _mm256_set1_pd(sqrt_dt);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_mul_pd(_mm256_loadu_pd(drift + i), vdt);
    const __m256d b = _mm256_mul_pd(_mm256_mul_pd(_mm256_loadu_pd(diffusion + i), vsq),
                                    _mm256_loadu_pd(noise + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_add_pd(a, b)));
  }
  for (; i < n; ++i) {
    y[i] += drift[i] * dt + diffusion[i] * sqrt_dt * noise[i];
  }
}

}  // namespace

const KernelTable avx2_table{
    Isa::avx2,         sum_avx2,    dot_avx2,           dot3_avx2,
    abs_diff_sum_avx2, minmax_avx2, tridiag_apply_avx2, em_step_avx2,
};

}  // namespace lhv::simd::detail
