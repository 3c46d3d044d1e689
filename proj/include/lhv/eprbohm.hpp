#pragma once

// EPR-Bohm correlation models.
//
// SingletFunctionalModel (R1): a shared hidden angle lambda, uniform on the circle, and
// setting-local ontic variables
//     A(lambda, a) =  sqrt2 cos(lambda - a),   B(lambda, b) = -sqrt2 cos(lambda - b).
// Their product averages to exactly -cos(a - b). Each variable ranges over
// [-sqrt2, sqrt2], wider than the +-1 spectrum: the model gives up range
// coincidence between ontic and observed values. as_chameleon() pairs each
// side with a +-1 observed variable and dual dynamics that reconstruct A (or B)
// from it. This is one concrete instantiation with those properties, not a
// transcription of a published construction.
//
// SingletOutcomeModel (R2): +-1 outcomes with the joint pmf
//     P(s, t | a, b) = (1 - s t cos(a - b)) / 4.
// The pmf depends on the setting pair, i.e. it is a contextual final
// distribution p^{(a,b)}_tau. It is not built from per-side kernels over a shared
// lambda (Bell's theorem rules that out for +-1 outcomes); both marginals are
// uniform for every setting pair, so nothing signals.

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <variant>

#include "lhv/chameleon.hpp"
#include "lhv/random.hpp"
#include "lhv/statespace.hpp"

namespace lhv::epr {

struct SingletFunctionalModel {
  /// Trapezoid cells on the hidden circle (at least 360). The rule is exact for
  /// the degree-2 trigonometric products involved.
  std::size_t cells = 360;

  StateSpace space() const { return StateSpace::circle(cells); }
  PhysicalVariable alice_variable(double a) const;
  PhysicalVariable bob_variable(double b) const;
};

struct SingletOutcomeModel {
  /// Entries ordered (+,+), (+,-), (-,+), (-,-).
  using Pmf = std::array<double, 4>;
  using PmfRule = std::function<Pmf(double a, double b)>;

  /// Empty means the standard rule.
  PmfRule rule;

  /// The (1 - s t cos(a - b)) / 4 pmf.
  static SingletOutcomeModel standard();
  Pmf pmf(double a, double b) const;
  /// Finite space labelled "++", "+-", "-+", "--".
  static StateSpace outcome_space();
  static constexpr std::array<double, 4> alice_values{1.0, 1.0, -1.0, -1.0};
  static constexpr std::array<double, 4> bob_values{1.0, -1.0, 1.0, -1.0};
};

using Model = std::variant<SingletFunctionalModel, SingletOutcomeModel>;

enum class Method { quadrature, monte_carlo };

struct MonteCarloOptions {
  std::size_t count = 0;
  Seed seed = 0;
  unsigned threads = 1;
};

struct CorrelationResult {
  double value = 0.0;
  Method method = Method::quadrature;
  /// Monte Carlo only.
  std::optional<double> mc_std_error;
  std::optional<Seed> seed;
  std::size_t samples = 0;
};

/// E(a, b). Monte Carlo requires options with count >= 1 (ErrorCode::config otherwise).
CorrelationResult correlation(const Model& model, double a, double b, Method method,
                              std::optional<MonteCarloOptions> mc = std::nullopt);

struct ChshAngles {
  double a = 0.0;
  double a_prime = 0.0;
  double b = 0.0;
  double b_prime = 0.0;

  /// (0, pi/2; pi/4, 3pi/4)
  static ChshAngles standard();
};

struct ChshResult {
  /// S = E(a,b) + E(a',b) + E(a',b') - E(a,b')
  double s = 0.0;
  std::array<CorrelationResult, 4> terms;
  std::optional<double> std_error;

  double magnitude() const noexcept;
};

using CorrelationFn = std::function<CorrelationResult(double a, double b, std::size_t term)>;

ChshResult chsh(const CorrelationFn& correlate, const ChshAngles& angles);
/// Monte Carlo terms use seeds derived from mc->seed and the term index.
ChshResult chsh(const Model& model, const ChshAngles& angles, Method method,
                std::optional<MonteCarloOptions> mc = std::nullopt);

/// max_s |P_A(s|a,b) - P_A(s|a,b')| plus the mirrored check on Bob's marginal
/// with the roles of the angles swapped. R1 has no outcome pmf:
/// ErrorCode::unsupported_model.
double no_signaling_defect(const Model& model, double a, double b, double b_prime);

/// Singlet prediction -cos(a - b).
double quantum_reference(double a, double b);

struct ChameleonPair {
  ChameleonMeasurement alice;
  ChameleonMeasurement bob;
};

/// Per-side chameleon measurements for R1. Settings are resolved from their
/// angle parameter. Observed variables are +-sgn(cos(lambda - angle)); the
/// backward map projects onto span{1, cos(lambda - angle)} scaled so the
/// observed variable maps to the ontic sqrt2 cos; the forward map is its exact
/// discrete adjoint (defined while the image density stays nonnegative).
ChameleonPair as_chameleon(const SingletFunctionalModel& model);

/// Setting with the two angles (a, b) as parameters.
MeasurementSetting pair_setting(double a, double b);

/// R2 as a chameleon measurement: hidden circle -> outcome space. For setting
/// pair (a, b) the forward map sends any state to its mass times the pmf, the
/// backward map sends g to the constant sum_st g(s,t) P(s,t|a,b); the observed
/// variable is the product s t.
ChameleonMeasurement as_chameleon(const SingletOutcomeModel& model, std::size_t hidden_cells = 360);

}  // namespace lhv::epr
