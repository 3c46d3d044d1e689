#pragma once

// Data-parallel inner loops shared by the solvers and the quadrature code.
//
// Every kernel has a scalar reference implementation and, on x86-64 builds, an
// AVX2+FMA variant. The active table is chosen once at first use from the CPU
// feature bits; the LHV_SIMD environment variable ("scalar" or "avx2") forces a
// variant. Variants agree to rounding (reduction order differs), which the
// equivalence tests pin down.

#include <cstddef>
#include <span>
#include <string_view>
#include <utility>

namespace lhv::simd {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa) noexcept;

struct KernelTable {
  Isa isa;
  double (*sum)(const double* x, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  // sum_i x_i * y_i * w_i
  double (*dot3)(const double* x, const double* y, const double* w, std::size_t n);
  // sum_i |x_i - y_i|
  double (*abs_diff_sum)(const double* x, const double* y, std::size_t n);
  void (*minmax)(const double* x, std::size_t n, double* lo, double* hi);
  // y_i = lower_i x_{i-1} + diag_i x_i + upper_i x_{i+1}; the end rows wrap when
  // periodic, otherwise lower_0 and upper_{n-1} are ignored.
  void (*tridiag_apply)(const double* lower, const double* diag, const double* upper,
                        const double* x, double* y, std::size_t n, bool periodic);
  // y_i += drift_i * dt + diffusion_i * sqrt_dt * noise_i
  void (*em_step)(double* y, const double* drift, const double* diffusion,
                  const double* noise, double dt, double sqrt_dt, std::size_t n);
};

const KernelTable& scalar_kernels() noexcept;
bool isa_available(Isa isa) noexcept;
/// Throws lhv::Error(invalid_argument) when the variant is not built or not
/// supported by this CPU.
const KernelTable& kernels_for(Isa isa);
const KernelTable& active_kernels() noexcept;
Isa active_isa() noexcept;

// Span front ends over the active table.
double sum(std::span<const double> x);
double dot(std::span<const double> x, std::span<const double> y);
double dot3(std::span<const double> x, std::span<const double> y, std::span<const double> w);
double abs_diff_sum(std::span<const double> x, std::span<const double> y);
std::pair<double, double> minmax(std::span<const double> x);
void tridiag_apply(std::span<const double> lower, std::span<const double> diag,
                   std::span<const double> upper, std::span<const double> x, std::span<double> y,
                   bool periodic);
void em_step(std::span<double> y, std::span<const double> drift, std::span<const double> diffusion,
             std::span<const double> noise, double dt);

}  // namespace lhv::simd
