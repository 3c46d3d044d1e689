#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "../oracles/oracles.hpp"
#include "lhv/eprbohm.hpp"
#include "lhv/error.hpp"

namespace epr = lhv::epr;
using epr::Method;
using lhv::ErrorCode;
using lhv::MeasurementSetting;
using lhv::StatisticalState;

namespace {

constexpr double pi = std::numbers::pi;
constexpr double sqrt2 = std::numbers::sqrt2;

template <class F>
void expect_error(ErrorCode code, F&& f) {
  try {
    f();
    ADD_FAILURE() << "expected " << lhv::to_string(code);
  } catch (const lhv::Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

const epr::Model functional = epr::SingletFunctionalModel{};
const epr::Model outcome = epr::SingletOutcomeModel::standard();

double quad(const epr::Model& m, double a, double b) {
  return epr::correlation(m, a, b, Method::quadrature).value;
}

}  // namespace

TEST(Correlation, KnownAngles) {
  for (const epr::Model& m : {functional, outcome}) {
    EXPECT_NEAR(quad(m, 0.0, 0.0), -1.0, 1e-12);
    EXPECT_NEAR(quad(m, 0.0, pi / 2.0), 0.0, 1e-12);
    EXPECT_NEAR(quad(m, 0.0, pi), 1.0, 1e-12);
    EXPECT_NEAR(quad(m, 0.0, pi / 4.0), -std::numbers::sqrt2 / 2.0, 1e-12);
  }
}

TEST(Correlation, RandomPairsMatchSinglet) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 2.0 * pi);
  for (int k = 0; k < 100; ++k) {
    const double a = u(rng), b = u(rng);
    EXPECT_NEAR(quad(functional, a, b), -std::cos(a - b), 1e-9);
    EXPECT_NEAR(quad(outcome, a, b), -std::cos(a - b), 1e-9);
  }
}

TEST(Correlation, FunctionalAgreesWithBruteForceIntegral) {
  for (double a : {0.1, 1.7, 4.0}) {
    const double b = 0.9;
    const double ref = oracle::circle_mean(
        [&](double l) { return sqrt2 * std::cos(l - a) * (-sqrt2 * std::cos(l - b)); }, 200'000);
    EXPECT_NEAR(quad(functional, a, b), ref, 1e-9);
  }
}

TEST(Correlation, RotationInvariant) {
  for (double shift : {0.3, 2.0, -5.0}) {
    EXPECT_NEAR(quad(functional, 0.2 + shift, 1.1 + shift), quad(functional, 0.2, 1.1), 1e-12);
  }
}

TEST(Correlation, FunctionalModelNeedsEnoughCells) {
  expect_error(ErrorCode::invalid_argument,
               [] { epr::correlation(epr::SingletFunctionalModel{100}, 0.0, 1.0, Method::quadrature); });
}

TEST(Correlation, NonFiniteAngleIsRejected) {
  expect_error(ErrorCode::invalid_argument, [] { quad(outcome, std::nan(""), 0.0); });
}

TEST(MonteCarlo, MillionSamplesWithinThreeSigma) {
  for (const epr::Model& m : {functional, outcome}) {
    const auto r = epr::correlation(m, 0.3, 1.4, Method::monte_carlo, epr::MonteCarloOptions{1'000'000, 9, 4});
    ASSERT_TRUE(r.mc_std_error.has_value());
    EXPECT_EQ(r.samples, 1'000'000u);
    EXPECT_EQ(r.seed, 9u);
    EXPECT_LE(std::abs(r.value + std::cos(0.3 - 1.4)), 3.0 * *r.mc_std_error);
  }
}

TEST(MonteCarlo, CoverageAcrossSeeds) {
  int inside = 0;
  for (lhv::Seed seed = 0; seed < 100; ++seed) {
    const auto r = epr::correlation(outcome, 0.0, 1.0, Method::monte_carlo, epr::MonteCarloOptions{100'000, seed});
    if (std::abs(r.value + std::cos(1.0)) <= 3.0 * *r.mc_std_error) ++inside;
  }
  EXPECT_GE(inside, 99);
}

TEST(MonteCarlo, ThreadCountDoesNotChangeTheEstimate) {
  const auto a = epr::correlation(functional, 0.5, 2.0, Method::monte_carlo, epr::MonteCarloOptions{50'000, 3, 1});
  const auto b = epr::correlation(functional, 0.5, 2.0, Method::monte_carlo, epr::MonteCarloOptions{50'000, 3, 6});
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(*a.mc_std_error, *b.mc_std_error);
}

TEST(MonteCarlo, MissingOptionsAreAConfigError) {
  expect_error(ErrorCode::config, [] { epr::correlation(outcome, 0.0, 1.0, Method::monte_carlo); });
  expect_error(ErrorCode::config,
               [] { epr::correlation(outcome, 0.0, 1.0, Method::monte_carlo, epr::MonteCarloOptions{1, 0}); });
}

TEST(Chsh, StandardAnglesReachTsirelson) {
  for (const epr::Model& m : {functional, outcome}) {
    const epr::ChshResult r = epr::chsh(m, epr::ChshAngles::standard(), Method::quadrature);
    EXPECT_NEAR(r.magnitude(), oracle::tsirelson, 1e-6);
    EXPECT_FALSE(r.std_error.has_value());
  }
}

TEST(Chsh, MonteCarloCarriesCombinedError) {
  const epr::ChshResult r =
      epr::chsh(outcome, epr::ChshAngles::standard(), Method::monte_carlo, epr::MonteCarloOptions{200'000, 1, 2});
  ASSERT_TRUE(r.std_error.has_value());
  EXPECT_LE(std::abs(r.magnitude() - oracle::tsirelson), 3.0 * *r.std_error);
  EXPECT_NE(r.terms[0].seed, r.terms[1].seed);
}

TEST(Chsh, RandomQuadruplesRespectTsirelson) {
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> u(0.0, 2.0 * pi);
  for (int k = 0; k < 1000; ++k) {
    const epr::ChshAngles angles{u(rng), u(rng), u(rng), u(rng)};
    EXPECT_LE(epr::chsh(functional, angles, Method::quadrature).magnitude(), oracle::tsirelson + 1e-9);
    EXPECT_LE(epr::chsh(outcome, angles, Method::quadrature).magnitude(), oracle::tsirelson + 1e-9);
  }
}

TEST(Chsh, CustomCorrelationFunction) {
  const epr::ChshResult r = epr::chsh(
      [](double, double, std::size_t) { return epr::CorrelationResult{1.0, Method::quadrature, {}, {}, 0}; },
      epr::ChshAngles::standard());
  EXPECT_EQ(r.s, 2.0);
}

TEST(NoSignaling, StandardPmfDoesNotSignal) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 2.0 * pi);
  for (int k = 0; k < 100; ++k) EXPECT_LE(epr::no_signaling_defect(outcome, u(rng), u(rng), u(rng)), 1e-15);
}

TEST(NoSignaling, FunctionalModelIsUnsupported) {
  expect_error(ErrorCode::unsupported_model, [] { epr::no_signaling_defect(functional, 0.0, 1.0, 2.0); });
}

TEST(NoSignaling, SignalingFixtureIsMeasured) {
  const double eps = 0.01;
  epr::SingletOutcomeModel leaky;
  leaky.rule = [eps](double a, double b) {
    epr::SingletOutcomeModel::Pmf p = epr::SingletOutcomeModel::standard().pmf(a, b);
    // Moves Alice's marginal with Bob's setting; Bob's marginal is untouched.
    p[0] += eps * std::cos(b) / 2.0;
    p[1] += eps * std::cos(b) / 2.0;
    p[2] -= eps * std::cos(b) / 2.0;
    p[3] -= eps * std::cos(b) / 2.0;
    return p;
  };
  EXPECT_NEAR(epr::no_signaling_defect(leaky, 0.3, 0.0, pi), 2.0 * eps, 1e-15);
}

TEST(OutcomeModel, PmfIsAProbabilityWithUniformMarginals) {
  const auto p = epr::SingletOutcomeModel::standard().pmf(0.4, 2.2);
  double total = 0.0;
  for (double x : p) {
    EXPECT_GE(x, 0.0);
    total += x;
  }
  EXPECT_NEAR(total, 1.0, 1e-15);
  EXPECT_NEAR(p[0] + p[1], 0.5, 1e-15);
  EXPECT_NEAR(p[0] + p[2], 0.5, 1e-15);
  const auto space = epr::SingletOutcomeModel::outcome_space();
  EXPECT_EQ(space.labels(), (std::vector<std::string>{"++", "+-", "-+", "--"}));
}

TEST(FunctionalChameleon, RangesDoNotCoincide) {
  const epr::ChameleonPair pair = epr::as_chameleon(epr::SingletFunctionalModel{});
  const MeasurementSetting a = MeasurementSetting::angle("a", 0.7);
  const lhv::RangeReport r = lhv::range_coincidence_report(pair.alice, a);
  EXPECT_NEAR(r.ontic.lower, -sqrt2, 1e-3);
  EXPECT_NEAR(r.ontic.upper, sqrt2, 1e-3);
  EXPECT_TRUE(r.observed.is_value_set);
  EXPECT_EQ(r.observed.values, (std::vector<double>{-1.0, 1.0}));
  EXPECT_FALSE(r.coincide);
  EXPECT_TRUE(lhv::spectral_check(pair.alice, a));
  EXPECT_TRUE(lhv::spectral_check(pair.bob, a));
  EXPECT_TRUE(pair.alice.physical());
}

TEST(FunctionalChameleon, OnticVariablesAreTheModelVariables) {
  const epr::SingletFunctionalModel model;
  const epr::ChameleonPair pair = epr::as_chameleon(model);
  for (double angle : {0.0, 1.3, 5.5}) {
    const auto setting = MeasurementSetting::angle("x", angle);
    const auto alice = lhv::ontic_variable(pair.alice, setting).values();
    const auto bob = lhv::ontic_variable(pair.bob, setting).values();
    const auto ref_a = model.alice_variable(angle).values();
    const auto ref_b = model.bob_variable(angle).values();
    for (std::size_t i = 0; i < alice.size(); ++i) {
      EXPECT_NEAR(alice[i], ref_a[i], 1e-12);
      EXPECT_NEAR(bob[i], ref_b[i], 1e-12);
    }
  }
}

TEST(FunctionalChameleon, AveragesAgreeOnSmoothStates) {
  const epr::SingletFunctionalModel model;
  const epr::ChameleonPair pair = epr::as_chameleon(model);
  const lhv::StateSpace c = model.space();
  std::vector<double> bump(c.size());
  for (std::size_t i = 0; i < bump.size(); ++i) bump[i] = std::exp(0.3 * std::cos(c.point(i) - 1.0));
  for (const StatisticalState& p0 :
       {StatisticalState::uniform(c), lhv::normalize(StatisticalState::density(c, bump))}) {
    for (double angle : {0.0, 0.8, 3.0}) {
      const auto setting = MeasurementSetting::angle("x", angle);
      EXPECT_LE(lhv::average_report(pair.alice, setting, p0).gap, 1e-12);
      EXPECT_LE(lhv::average_report(pair.bob, setting, p0).gap, 1e-12);
    }
  }
}

TEST(FunctionalChameleon, AliceSideIgnoresBobSetting) {
  const epr::ChameleonPair pair = epr::as_chameleon(epr::SingletFunctionalModel{});
  const lhv::BipartiteMeasurement bi(pair.alice, pair.bob);
  const auto a = MeasurementSetting::angle("a", 0.4);
  const lhv::JointGrid g = lhv::JointGrid::outer(pair.alice.dynamics(a).observed,
                                                 lhv::PhysicalVariable::constant(epr::SingletFunctionalModel{}.space(), 1.0));
  const auto ontic = lhv::ontic_variable(pair.alice, a).values();
  for (double b : {0.1, 2.9}) {
    const lhv::JointGrid r = bi.backward(a, MeasurementSetting::angle("b", b), g);
    for (std::size_t i = 0; i < r.alice.size(); ++i) {
      for (std::size_t j = 0; j < r.bob.size(); ++j) EXPECT_NEAR(r.at(i, j), ontic[i], 1e-12);
    }
  }
}

TEST(OutcomeChameleon, PairSettingsAndContextuality) {
  const lhv::ChameleonMeasurement m = epr::as_chameleon(epr::SingletOutcomeModel::standard());
  const MeasurementSetting s = epr::pair_setting(-pi / 4.0, 0.0);
  ASSERT_EQ(s.parameters.size(), 2u);
  EXPECT_NEAR(s.parameters[0], 1.75 * pi, 1e-15);

  const StatisticalState p0 = StatisticalState::uniform(lhv::StateSpace::circle(360));
  const lhv::AverageReport r = lhv::average_report(m, epr::pair_setting(0.2, 1.5), p0);
  EXPECT_NEAR(r.classical, -std::cos(0.2 - 1.5), 1e-12);
  EXPECT_LE(r.gap, 1e-12);
  EXPECT_TRUE(lhv::spectral_check(m, s));
  EXPECT_FALSE(lhv::range_coincidence_report(m, epr::pair_setting(0.2, 1.5)).coincide);
  EXPECT_NEAR(lhv::contextuality_distance(m, epr::pair_setting(0.0, 0.0), epr::pair_setting(0.0, pi / 2.0), p0),
              1.0, 1e-12);
  // A single angle does not identify a setting pair.
  expect_error(ErrorCode::unknown_setting, [&] { m.dynamics(MeasurementSetting::angle("a", 0.0)); });
}
