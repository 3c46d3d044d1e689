#pragma once

// Detection-loophole models: +-1 outcome rules and detection probabilities on a
// shared hidden angle, the detected sub-ensembles they select, and an
// event-by-event coincidence experiment.
//
// Default model: A = sgn cos(l - a) detected with probability |cos(l - a)|,
// B = -sgn cos(l - b) always detected. Conditioning on detection gives exactly
// E(a, b) = -cos(a - b), while the full ensemble only reaches the sawtooth
// -(1 - 2 phi / pi). Undetected events count as singles and are never imputed.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "lhv/eprbohm.hpp"
#include "lhv/random.hpp"
#include "lhv/statespace.hpp"

namespace lhv::sampling {

using epr::ChshAngles;
using epr::ChshResult;
using epr::CorrelationResult;
using epr::Method;
using epr::MonteCarloOptions;

struct DetectionModel {
  /// f(lambda, own setting); outcomes must be +-1.
  using Outcome = std::function<double(double lambda, double setting)>;
  /// eta(lambda, own setting) in [0, 1].
  using Detection = std::function<double(double lambda, double setting)>;
  /// Points in lambda where any of the four functions has a jump or kink.
  using Breakpoints = std::function<std::vector<double>(double a, double b)>;

  Outcome alice_outcome;
  Detection alice_detect;
  Outcome bob_outcome;
  Detection bob_detect;
  /// Optional; quadrature also splits the circle into fixed panels.
  Breakpoints breakpoints;

  static DetectionModel standard();
  /// Same outcomes, eta = 1 on both sides.
  static DetectionModel no_loss();
  /// Same outcomes, eta = 0 on both sides.
  static DetectionModel zero_detection();
};

/// (1 / 2pi) integral over the circle of fn, split at the model breakpoints
/// for (a, b) and integrated piecewise with 30-point Gauss-Legendre.
double circle_average(const DetectionModel& m, double a, double b,
                      const std::function<double(double)>& fn);

struct SubEnsembleState {
  double a;
  double b;
  /// Density over lambda proportional to eta_A eta_B, normalized on the grid.
  StatisticalState state;
};

inline constexpr std::size_t default_restriction_cells = 3600;

/// P restricted to the jointly detected sub-ensemble.
/// ErrorCode::degenerate_subensemble when nothing is ever detected.
SubEnsembleState restricted_state(const DetectionModel& m, double a, double b,
                                  std::size_t cells = default_restriction_cells);

/// L1 distance between two restricted states; zero iff sampling is fair for
/// this pair of setting pairs (up to grid resolution).
double fair_sampling_defect(const DetectionModel& m, std::pair<double, double> first,
                            std::pair<double, double> second,
                            std::size_t cells = default_restriction_cells);

/// E(a, b | both detected). Monte Carlo runs the coincidence experiment with
/// mc->count emitted pairs.
CorrelationResult postselected_correlation(const DetectionModel& m, double a, double b,
                                           Method method = Method::quadrature,
                                           std::optional<MonteCarloOptions> mc = std::nullopt);

/// E(a, b) over all emitted pairs using pre-detection outcomes.
CorrelationResult full_ensemble_correlation(const DetectionModel& m, double a, double b,
                                            Method method = Method::quadrature,
                                            std::optional<MonteCarloOptions> mc = std::nullopt);

enum class Side { alice, bob, coincidence };

double detection_rate(const DetectionModel& m, double a, double b, Side side);

struct CorrelationEstimate {
  double value = 0.0;
  /// Binomial error sqrt((1 - E^2) / N) over N coincidences.
  double std_error = 0.0;
  std::uint64_t coincidences = 0;
};

struct CoincidenceCounts {
  double a = 0.0;
  double b = 0.0;
  /// Coincidences n(s, t) in (++, +-, -+, --) order.
  std::array<std::uint64_t, 4> counts{};
  /// Alice detected, Bob not.
  std::uint64_t alice_singles = 0;
  /// Bob detected, Alice not.
  std::uint64_t bob_singles = 0;
  /// Neither side detected.
  std::uint64_t undetected = 0;
  std::uint64_t emitted = 0;
  Seed seed = 0;

  std::uint64_t coincidences() const noexcept;
  /// Empty when no coincidence was recorded (the estimator is undefined).
  std::optional<CorrelationEstimate> correlation() const;
};

/// Setting pair k uses the stream derive_seed(seed, k); each stream is cut
/// into fixed chunks, so the counts do not depend on `threads`.
std::vector<CoincidenceCounts> run_loophole_experiment(
    const DetectionModel& m, const std::vector<std::pair<double, double>>& settings,
    std::size_t pairs_per_setting, Seed seed, unsigned threads = 1);

ChshResult postselected_chsh(const DetectionModel& m, const ChshAngles& angles,
                             Method method = Method::quadrature,
                             std::optional<MonteCarloOptions> mc = std::nullopt);
ChshResult full_ensemble_chsh(const DetectionModel& m, const ChshAngles& angles,
                              Method method = Method::quadrature,
                              std::optional<MonteCarloOptions> mc = std::nullopt);

}  // namespace lhv::sampling
