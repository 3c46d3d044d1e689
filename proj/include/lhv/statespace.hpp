#pragma once

// State spaces, statistical states (probability measures) on them, physical
// variables (real functions on them), and the average <f>_p that couples the two.

#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lhv/random.hpp"

namespace lhv {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// sgn with the tie broken upward: sgn(0) = +1.
inline double sgn(double x) noexcept { return x >= 0.0 ? 1.0 : -1.0; }

/// Reduces an angle to [0, 2pi).
double reduce_angle(double x) noexcept;

enum class SpaceKind { interval, circle, finite };

/// A one-dimensional state space. Gridded kinds (interval, circle) are split
/// into `size()` equal cells and every grid quantity lives at cell centers;
/// finite spaces are an ordered list of labelled points with real coordinates.
class StateSpace {
 public:
  static StateSpace interval(double lower, double upper, std::size_t cells);
  static StateSpace circle(std::size_t cells);
  /// Coordinates default to 0, 1, 2, ... when only labels matter.
  static StateSpace finite(std::vector<double> points, std::vector<std::string> labels = {});
  static StateSpace finite_labels(std::vector<std::string> labels);

  SpaceKind kind() const noexcept { return kind_; }
  bool gridded() const noexcept { return kind_ != SpaceKind::finite; }
  std::size_t size() const noexcept;
  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }
  /// h; zero for finite spaces.
  double cell_width() const noexcept { return width_; }
  /// Quadrature weight of node i (h on grids, 1 on finite spaces).
  double node_weight() const noexcept { return gridded() ? width_ : 1.0; }
  /// Cell center (gridded) or point coordinate (finite).
  double point(std::size_t i) const noexcept;
  std::vector<double> points() const;
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  /// Circle coordinates are taken mod 2pi; other kinds are returned unchanged.
  double reduce(double x) const noexcept;
  bool contains(double x) const noexcept;
  /// Cell index holding x (gridded) or index of the point equal to x (finite).
  std::size_t locate(double x) const;

  std::string describe() const;

  bool operator==(const StateSpace& other) const = default;

 private:
  StateSpace() = default;

  SpaceKind kind_ = SpaceKind::interval;
  double lower_ = 0.0;
  double upper_ = 1.0;
  double width_ = 0.0;
  std::size_t cells_ = 0;
  std::vector<double> points_;
  std::vector<std::string> labels_;
};

/// A real-valued function on a state space, either an analytic rule or per-node
/// samples. Sampled variables are linearly interpolated between cell centers.
class PhysicalVariable {
 public:
  using Rule = std::function<double(double)>;

  static PhysicalVariable analytic(StateSpace space, Rule rule, std::string name = {});
  static PhysicalVariable sampled(StateSpace space, std::vector<double> values,
                                  std::string name = {});
  static PhysicalVariable constant(StateSpace space, double value);

  const StateSpace& space() const noexcept { return space_; }
  bool is_analytic() const noexcept { return static_cast<bool>(rule_); }
  const std::string& name() const noexcept { return name_; }

  double operator()(double x) const;
  /// Values at every node; throws ErrorCode::evaluation on a non-finite value.
  std::vector<double> values() const;
  /// Values at the nodes of another space (analytic rules only, or the same space).
  std::vector<double> values_on(const StateSpace& support) const;

  PhysicalVariable renamed(std::string name) const;

 private:
  PhysicalVariable(StateSpace space, Rule rule, std::vector<double> samples, std::string name);

  StateSpace space_;
  Rule rule_;
  std::vector<double> samples_;
  std::string name_;
};

struct ParticleEnsemble {
  std::vector<double> points;
  /// Empty means equal weights.
  std::vector<double> weights;
  Seed seed = 0;

  std::size_t size() const noexcept { return points.size(); }
  double weight(std::size_t i) const noexcept {
    return weights.empty() ? 1.0 / static_cast<double>(points.size()) : weights[i];
  }
};

/// A finite measure on a state space: a grid density, weights on a finite
/// space, or a particle ensemble. Operations that need a probability measure
/// check is_normalized().
class StatisticalState {
 public:
  enum class Representation { density, weights, ensemble };

  static StatisticalState density(StateSpace space, std::vector<double> values);
  static StatisticalState weights(StateSpace space, std::vector<double> values);
  static StatisticalState ensemble(StateSpace space, ParticleEnsemble particles);
  /// Accepts solver output: entries in [-tolerance, 0) are round-off and are
  /// clipped to zero before renormalizing; anything more negative is an error.
  static StatisticalState from_solver(StateSpace space, std::vector<double> values,
                                      double tolerance = 1e-9);

  static StatisticalState uniform(const StateSpace& space);
  /// Normal density sampled at cell centers and renormalized on the grid.
  static StatisticalState gaussian(const StateSpace& space, double mean, double variance);
  static StatisticalState point_mass(const StateSpace& space, double at);

  const StateSpace& space() const noexcept { return space_; }
  Representation representation() const noexcept { return representation_; }
  /// Density values (per unit length) or point weights.
  std::span<const double> values() const noexcept { return values_; }
  const ParticleEnsemble& particles() const noexcept { return particles_; }

  double total_mass() const;
  bool is_normalized(double tolerance = 1e-9) const;
  double mean() const;
  double variance() const;

 private:
  StatisticalState(StateSpace space, Representation rep, std::vector<double> values,
                   ParticleEnsemble particles);

  StateSpace space_;
  Representation representation_;
  std::vector<double> values_;
  ParticleEnsemble particles_;
};

/// <f>_p: cell-center sum on grids (the trapezoid rule on the circle),
/// weighted sum on finite spaces and ensembles.
double average(const PhysicalVariable& f, const StatisticalState& p);

StatisticalState normalize(const StatisticalState& p);

/// Inverse-CDF sampler over a state (cell, then uniform inside the cell).
class Sampler {
 public:
  explicit Sampler(const StatisticalState& p);
  double draw(Rng& rng) const;

 private:
  StateSpace space_;
  std::vector<double> cdf_;
  std::vector<double> nodes_;
  bool cellwise_ = false;
};

ParticleEnsemble sample(const StatisticalState& p, std::size_t count, Seed seed);

/// Grid estimate of the range of a variable: the hull [lower, upper] and the
/// distinct sampled values. On finite spaces the value set is exact.
struct ValueRange {
  double lower = 0.0;
  double upper = 0.0;
  std::vector<double> values;
  /// True when the values read as a set rather than a sampled continuum.
  bool is_value_set = false;

  std::string describe() const;
};

ValueRange range_of(const PhysicalVariable& f, const StateSpace& support);
double hausdorff_distance(const ValueRange& x, const ValueRange& y);

/// L1 distance between two densities (or weight vectors) on the same space.
double l1_distance(const StatisticalState& p, const StatisticalState& q);

/// Gaussian KDE of an ensemble onto a grid (linear binning + discrete
/// convolution). bandwidth <= 0 selects Silverman's rule.
StatisticalState kernel_density(const ParticleEnsemble& particles, const StateSpace& grid,
                                double bandwidth = 0.0);

}  // namespace lhv
