#include <cmath>
#include <cstdlib>
#include <string>

#include "lhv/error.hpp"
#include "simd/variants.hpp"

namespace lhv::simd {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(LHV_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& select() noexcept {
  const char* forced = std::getenv("LHV_SIMD");
  if (forced != nullptr && std::string(forced) == "scalar") return detail::scalar_table;
#ifdef LHV_HAVE_AVX2
  if (cpu_has_avx2()) return detail::avx2_table;
#endif
  return detail::scalar_table;
}

void check_sizes(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw Error(ErrorCode::invalid_argument, std::string(what) + ": length mismatch");
}

}  // namespace

std::string_view to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

const KernelTable& scalar_kernels() noexcept { return detail::scalar_table; }

bool isa_available(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2: return cpu_has_avx2();
  }
  return false;
}

const KernelTable& kernels_for(Isa isa) {
  if (!isa_available(isa)) {
    throw Error(ErrorCode::invalid_argument,
                "kernel variant '" + std::string(to_string(isa)) + "' is not available");
  }
#ifdef LHV_HAVE_AVX2
  if (isa == Isa::avx2) return detail::avx2_table;
#endif
  return detail::scalar_table;
}

const KernelTable& active_kernels() noexcept {
  static const KernelTable& table = select();
  return table;
}

Isa active_isa() noexcept { return active_kernels().isa; }

double sum(std::span<const double> x) { return active_kernels().sum(x.data(), x.size()); }

double dot(std::span<const double> x, std::span<const double> y) {
  check_sizes(x.size(), y.size(), "dot");
  return active_kernels().dot(x.data(), y.data(), x.size());
}

double dot3(std::span<const double> x, std::span<const double> y, std::span<const double> w) {
  check_sizes(x.size(), y.size(), "dot3");
  check_sizes(x.size(), w.size(), "dot3");
  return active_kernels().dot3(x.data(), y.data(), w.data(), x.size());
}

double abs_diff_sum(std::span<const double> x, std::span<const double> y) {
  check_sizes(x.size(), y.size(), "abs_diff_sum");
  return active_kernels().abs_diff_sum(x.data(), y.data(), x.size());
}

std::pair<double, double> minmax(std::span<const double> x) {
  if (x.empty()) throw Error(ErrorCode::invalid_argument, "minmax of an empty range");
  double lo = 0.0;
  double hi = 0.0;
  active_kernels().minmax(x.data(), x.size(), &lo, &hi);
  return {lo, hi};
}

void tridiag_apply(std::span<const double> lower, std::span<const double> diag,
                   std::span<const double> upper, std::span<const double> x, std::span<double> y,
                   bool periodic) {
  const std::size_t n = diag.size();
  check_sizes(lower.size(), n, "tridiag_apply");
  check_sizes(upper.size(), n, "tridiag_apply");
  check_sizes(x.size(), n, "tridiag_apply");
  check_sizes(y.size(), n, "tridiag_apply");
  if (n == 0) return;
  active_kernels().tridiag_apply(lower.data(), diag.data(), upper.data(), x.data(), y.data(), n,
                                 periodic);
}

void em_step(std::span<double> y, std::span<const double> drift, std::span<const double> diffusion,
             std::span<const double> noise, double dt) {
  check_sizes(y.size(), drift.size(), "em_step");
  check_sizes(y.size(), diffusion.size(), "em_step");
  check_sizes(y.size(), noise.size(), "em_step");
  active_kernels().em_step(y.data(), drift.data(), diffusion.data(), noise.data(), dt,
                           std::sqrt(dt), y.size());
}

}  // namespace lhv::simd
