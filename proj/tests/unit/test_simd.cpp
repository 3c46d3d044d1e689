#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "lhv/error.hpp"
#include "lhv/simd/kernels.hpp"

namespace simd = lhv::simd;

namespace {

std::vector<double> random_vector(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

class KernelEquivalence : public ::testing::TestWithParam<std::size_t> {
 protected:
  void SetUp() override {
    if (!simd::isa_available(simd::Isa::avx2)) GTEST_SKIP() << "AVX2 variant not available here";
  }
  const simd::KernelTable& ref = simd::scalar_kernels();
  const simd::KernelTable& vec() const { return simd::kernels_for(simd::Isa::avx2); }
};

// Reductions may reassociate; compare against the magnitude of the summands.
double tolerance(const std::vector<double>& terms) {
  double s = 0.0;
  for (double t : terms) s += std::abs(t);
  return 1e-15 * (s + 1.0) * 8.0;
}

}  // namespace

TEST_P(KernelEquivalence, Sum) {
  const std::size_t n = GetParam();
  const auto x = random_vector(n, 1);
  EXPECT_NEAR(ref.sum(x.data(), n), vec().sum(x.data(), n), tolerance(x));
}

TEST_P(KernelEquivalence, DotAndDot3) {
  const std::size_t n = GetParam();
  const auto x = random_vector(n, 2), y = random_vector(n, 3), w = random_vector(n, 4);
  std::vector<double> terms(n);
  for (std::size_t i = 0; i < n; ++i) terms[i] = x[i] * y[i];
  EXPECT_NEAR(ref.dot(x.data(), y.data(), n), vec().dot(x.data(), y.data(), n), tolerance(terms));
  EXPECT_NEAR(ref.dot3(x.data(), y.data(), w.data(), n), vec().dot3(x.data(), y.data(), w.data(), n),
              tolerance(terms));
}

TEST_P(KernelEquivalence, AbsDiffSumAndMinmax) {
  const std::size_t n = GetParam();
  const auto x = random_vector(n, 5), y = random_vector(n, 6);
  EXPECT_NEAR(ref.abs_diff_sum(x.data(), y.data(), n), vec().abs_diff_sum(x.data(), y.data(), n),
              1e-14 * static_cast<double>(n + 1));
  if (n == 0) return;
  double lo1, hi1, lo2, hi2;
  ref.minmax(x.data(), n, &lo1, &hi1);
  vec().minmax(x.data(), n, &lo2, &hi2);
  EXPECT_EQ(lo1, lo2);
  EXPECT_EQ(hi1, hi2);
}

TEST_P(KernelEquivalence, TridiagApplyIsBitIdentical) {
  const std::size_t n = GetParam();
  if (n < 3) return;
  const auto lo = random_vector(n, 7), d = random_vector(n, 8), up = random_vector(n, 9);
  const auto x = random_vector(n, 10);
  for (bool periodic : {false, true}) {
    std::vector<double> y1(n), y2(n);
    ref.tridiag_apply(lo.data(), d.data(), up.data(), x.data(), y1.data(), n, periodic);
    vec().tridiag_apply(lo.data(), d.data(), up.data(), x.data(), y2.data(), n, periodic);
    EXPECT_EQ(y1, y2) << "periodic=" << periodic;
  }
}

TEST_P(KernelEquivalence, EulerMaruyamaStepIsBitIdentical) {
  const std::size_t n = GetParam();
  auto y1 = random_vector(n, 11);
  auto y2 = y1;
  const auto drift = random_vector(n, 12), diff = random_vector(n, 13), noise = random_vector(n, 14);
  ref.em_step(y1.data(), drift.data(), diff.data(), noise.data(), 1e-3, std::sqrt(1e-3), n);
  vec().em_step(y2.data(), drift.data(), diff.data(), noise.data(), 1e-3, std::sqrt(1e-3), n);
  EXPECT_EQ(y1, y2);
}

// Sizes straddle the 4-wide vector length and its unrolled multiples.
INSTANTIATE_TEST_SUITE_P(Sizes, KernelEquivalence,
                         ::testing::Values(0, 1, 3, 4, 5, 7, 8, 15, 16, 17, 31, 64, 100, 1023, 4096));

TEST(KernelDispatch, ScalarIsAlwaysAvailable) {
  EXPECT_TRUE(simd::isa_available(simd::Isa::scalar));
  EXPECT_EQ(simd::kernels_for(simd::Isa::scalar).isa, simd::Isa::scalar);
  EXPECT_EQ(simd::to_string(simd::Isa::scalar), "scalar");
}

TEST(KernelDispatch, ActiveTableMatchesReportedIsa) {
  EXPECT_EQ(simd::active_kernels().isa, simd::active_isa());
}

TEST(KernelDispatch, SpanFrontEndsCheckSizes) {
  const std::vector<double> a(4, 1.0), b(5, 1.0);
  EXPECT_THROW(simd::dot(a, b), lhv::Error);
  EXPECT_DOUBLE_EQ(simd::dot(a, a), 4.0);
  const auto [lo, hi] = simd::minmax(std::vector<double>{3.0, -2.0, 7.0});
  EXPECT_EQ(lo, -2.0);
  EXPECT_EQ(hi, 7.0);
}
