#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lhv/error.hpp"
#include "lhv/statespace.hpp"

using lhv::ErrorCode;
using lhv::PhysicalVariable;
using lhv::StateSpace;
using lhv::StatisticalState;

namespace {

template <class F>
void expect_error(ErrorCode code, F&& f) {
  try {
    f();
    ADD_FAILURE() << "expected " << lhv::to_string(code);
  } catch (const lhv::Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

}  // namespace

TEST(StateSpace, GridGeometry) {
  const StateSpace s = StateSpace::interval(-1.0, 3.0, 8);
  EXPECT_EQ(s.size(), 8u);
  EXPECT_DOUBLE_EQ(s.cell_width(), 0.5);
  EXPECT_DOUBLE_EQ(s.point(0), -0.75);
  EXPECT_DOUBLE_EQ(s.point(7), 2.75);
  EXPECT_EQ(s.locate(0.1), 2u);

  const StateSpace c = StateSpace::circle(4);
  EXPECT_DOUBLE_EQ(c.cell_width(), std::numbers::pi / 2.0);
  EXPECT_DOUBLE_EQ(c.reduce(-0.5), lhv::two_pi - 0.5);
}

TEST(StateSpace, RejectsBadConstruction) {
  expect_error(ErrorCode::invalid_argument, [] { StateSpace::interval(1.0, 1.0, 8); });
  expect_error(ErrorCode::invalid_argument, [] { StateSpace::interval(0.0, 1.0, 1); });
  expect_error(ErrorCode::invalid_argument, [] { StateSpace::circle(1); });
  expect_error(ErrorCode::invalid_argument, [] { StateSpace::finite({}); });
}

TEST(StateSpace, SignConventionBreaksTiesUpward) {
  EXPECT_EQ(lhv::sgn(0.0), 1.0);
  EXPECT_EQ(lhv::sgn(-0.0), 1.0);
  EXPECT_EQ(lhv::sgn(-1e-300), -1.0);
}

TEST(Average, ConstantOneGivesOne) {
  const StateSpace s = StateSpace::interval(-4.0, 4.0, 200);
  const StatisticalState p = StatisticalState::gaussian(s, 0.3, 0.7);
  EXPECT_NEAR(lhv::average(PhysicalVariable::constant(s, 1.0), p), 1.0, 1e-12);
}

TEST(Average, TrigonometricMomentsOnUniformCircle) {
  const StateSpace c = StateSpace::circle(360);
  const StatisticalState u = StatisticalState::uniform(c);
  const auto cosine = PhysicalVariable::analytic(c, [](double x) { return std::cos(x); });
  const auto cos2 = PhysicalVariable::analytic(c, [](double x) { return std::cos(x) * std::cos(x); });
  EXPECT_NEAR(lhv::average(cosine, u), 0.0, 1e-12);
  EXPECT_NEAR(lhv::average(cos2, u), 0.5, 1e-12);
}

TEST(Average, MismatchedSpacesAreRejected) {
  const StateSpace a = StateSpace::circle(10);
  const StateSpace b = StateSpace::circle(12);
  expect_error(ErrorCode::space_mismatch, [&] {
    lhv::average(PhysicalVariable::constant(a, 1.0), StatisticalState::uniform(b));
  });
}

TEST(Average, NonFiniteVariableIsAnEvaluationError) {
  const StateSpace a = StateSpace::interval(-1.0, 1.0, 10);
  const auto bad = PhysicalVariable::analytic(a, [p3 = a.point(3)](double x) { return 1.0 / (x - p3); });
  expect_error(ErrorCode::evaluation, [&] { lhv::average(bad, StatisticalState::uniform(a)); });
}

TEST(Average, IsLinear) {
  const StateSpace s = StateSpace::interval(-3.0, 3.0, 101);
  const StatisticalState p = StatisticalState::gaussian(s, -0.4, 0.9);
  const auto f = PhysicalVariable::analytic(s, [](double x) { return std::sin(3.0 * x) + x; });
  const auto g = PhysicalVariable::analytic(s, [](double x) { return x * x * x; });
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int k = 0; k < 20; ++k) {
    const double alpha = u(rng), beta = u(rng);
    const auto combo = PhysicalVariable::analytic(
        s, [&](double x) { return alpha * f(x) + beta * g(x); });
    EXPECT_NEAR(lhv::average(combo, p), alpha * lhv::average(f, p) + beta * lhv::average(g, p), 1e-12);
  }
}

TEST(StatisticalState, MassIsOneAfterConstruction) {
  const StateSpace s = StateSpace::interval(-8.0, 8.0, 512);
  EXPECT_NEAR(StatisticalState::gaussian(s, 2.0, 0.25).total_mass(), 1.0, 1e-9);
  EXPECT_NEAR(StatisticalState::uniform(StateSpace::circle(77)).total_mass(), 1.0, 1e-9);
  EXPECT_NEAR(StatisticalState::uniform(StateSpace::finite_labels({"x", "y", "z"})).total_mass(), 1.0,
              1e-12);
}

TEST(StatisticalState, NegativeEntriesAreRejected) {
  const StateSpace s = StateSpace::interval(0.0, 1.0, 4);
  expect_error(ErrorCode::negative_density,
               [&] { StatisticalState::density(s, {1.0, -0.5, 1.0, 1.0}); });
}

TEST(StatisticalState, SolverRoundoffIsClippedButRealNegativityIsNot) {
  const StateSpace s = StateSpace::interval(0.0, 1.0, 4);
  const StatisticalState p = StatisticalState::from_solver(s, {1.0, -1e-13, 1.0, 2.0});
  EXPECT_EQ(p.values()[1], 0.0);
  EXPECT_NEAR(p.total_mass(), 1.0, 1e-12);
  expect_error(ErrorCode::negative_density,
               [&] { StatisticalState::from_solver(s, {1.0, -1e-3, 1.0, 2.0}); });
}

TEST(Normalize, RescalesDensityAndWeights) {
  const StateSpace s = StateSpace::interval(0.0, 1.0, 10);
  const StatisticalState p = lhv::normalize(StatisticalState::density(s, std::vector<double>(10, 2.0)));
  for (double v : p.values()) EXPECT_NEAR(v, 1.0, 1e-12);

  const StateSpace f = StateSpace::finite_labels({"a", "b"});
  const StatisticalState w = lhv::normalize(StatisticalState::weights(f, {1.0, 3.0}));
  EXPECT_NEAR(w.values()[0], 0.25, 1e-15);
  EXPECT_NEAR(w.values()[1], 0.75, 1e-15);
}

TEST(Normalize, ZeroMassIsDegenerate) {
  const StateSpace s = StateSpace::interval(0.0, 1.0, 10);
  expect_error(ErrorCode::degenerate_measure,
               [&] { lhv::normalize(StatisticalState::density(s, std::vector<double>(10, 0.0))); });
}

TEST(Sample, PointMassGivesItsPoint) {
  const StateSpace f = StateSpace::finite({-1.0, 0.5, 2.0});
  const auto e = lhv::sample(StatisticalState::point_mass(f, 0.5), 1000, 3);
  for (double x : e.points) EXPECT_EQ(x, 0.5);
}

TEST(Sample, SameSeedSameEnsemble) {
  const StateSpace c = StateSpace::circle(64);
  const auto a = lhv::sample(StatisticalState::uniform(c), 5000, 99);
  const auto b = lhv::sample(StatisticalState::uniform(c), 5000, 99);
  EXPECT_EQ(a.points, b.points);
  EXPECT_EQ(a.seed, 99u);
}

TEST(Sample, ZeroCountIsAnError) {
  const StateSpace c = StateSpace::circle(64);
  expect_error(ErrorCode::empty_ensemble, [&] { lhv::sample(StatisticalState::uniform(c), 0, 1); });
}

TEST(Sample, CosineMeanOnUniformCircleWithinClt) {
  const StateSpace c = StateSpace::circle(720);
  const auto e = lhv::sample(StatisticalState::uniform(c), 1'000'000, 2024);
  double m = 0.0;
  for (double x : e.points) m += std::cos(x);
  m /= static_cast<double>(e.size());
  EXPECT_LE(std::abs(m), 3.0 * std::numbers::sqrt2 / 2.0 / 1000.0);
}

TEST(Sample, EnsembleAveragesTrackGridAveragesAcrossSeeds) {
  const StateSpace s = StateSpace::interval(-5.0, 5.0, 400);
  const StatisticalState p = StatisticalState::gaussian(s, 0.5, 1.2);
  const auto f = PhysicalVariable::analytic(s, [](double x) { return std::tanh(x); });
  const double grid = lhv::average(f, p);
  const auto f2 = PhysicalVariable::analytic(s, [](double x) { return std::tanh(x) * std::tanh(x); });
  const double sd = std::sqrt(lhv::average(f2, p) - grid * grid);
  const std::size_t count = 10'000;
  int inside = 0;
  for (lhv::Seed seed = 0; seed < 100; ++seed) {
    const StatisticalState e = StatisticalState::ensemble(s, lhv::sample(p, count, seed));
    if (std::abs(lhv::average(f, e) - grid) <= 3.0 * sd / std::sqrt(static_cast<double>(count))) ++inside;
  }
  EXPECT_GE(inside, 99);
}

TEST(PhysicalVariable, CircleEvaluationIsPeriodic) {
  const StateSpace c = StateSpace::circle(90);
  const auto f = PhysicalVariable::analytic(c, [](double x) { return std::sin(x) + 0.1 * x; });
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (int k = 0; k < 200; ++k) {
    const double x = u(rng);
    EXPECT_EQ(f(x), f(x + lhv::two_pi)) << x;
  }
}

TEST(RangeOf, ScaledCosineOnCircle) {
  const StateSpace c = StateSpace::circle(360);
  const auto f = PhysicalVariable::analytic(c, [](double x) { return std::numbers::sqrt2 * std::cos(x); });
  const lhv::ValueRange r = lhv::range_of(f, c);
  EXPECT_NEAR(r.lower, -std::numbers::sqrt2, 1e-3);
  EXPECT_NEAR(r.upper, std::numbers::sqrt2, 1e-3);
  EXPECT_FALSE(r.is_value_set);
}

TEST(RangeOf, ConstantAndTwoValued) {
  const StateSpace c = StateSpace::circle(360);
  const lhv::ValueRange k = lhv::range_of(PhysicalVariable::constant(c, -1.0), c);
  EXPECT_EQ(k.lower, -1.0);
  EXPECT_EQ(k.upper, -1.0);

  const auto sign = PhysicalVariable::analytic(c, [](double x) { return lhv::sgn(std::cos(x)); });
  const lhv::ValueRange s = lhv::range_of(sign, c);
  EXPECT_TRUE(s.is_value_set);
  EXPECT_EQ(s.values, (std::vector<double>{-1.0, 1.0}));
}

TEST(L1Distance, DisjointBumpsAreTwoApart) {
  const StateSpace f = StateSpace::finite_labels({"a", "b"});
  EXPECT_NEAR(lhv::l1_distance(StatisticalState::weights(f, {1.0, 0.0}),
                               StatisticalState::weights(f, {0.0, 1.0})),
              2.0, 1e-15);
}

TEST(KernelDensity, RecoversGaussian) {
  const StateSpace s = StateSpace::interval(-6.0, 6.0, 240);
  const StatisticalState p = StatisticalState::gaussian(s, 0.0, 1.0);
  const StatisticalState kde = lhv::kernel_density(lhv::sample(p, 100'000, 8), s);
  EXPECT_LT(lhv::l1_distance(kde, p), 0.05);
}
