#pragma once

// Adaptive ("chameleon") measurement models. Each measurement setting owns its
// own pair of dynamics: a forward map V^a on statistical states and a backward
// map U^a on physical variables, over a measurement of duration tau - t0.
// The observed variable g = f^a_tau is what the device reports; the ontic
// variable f^a_t0 = U^a(g) is reconstructed from it and never observed.
//
// The maps are opaque (no Markov or diffusion structure assumed). The only
// coupling between them is conjugation, <U g>_p0 = <g>_{V p0}, which is
// checked by verify_conjugation and by average_report rather than enforced.

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lhv/kolmogorov.hpp"
#include "lhv/statespace.hpp"

namespace lhv {

struct MeasurementSetting {
  std::string label;
  /// For EPR settings: one angle in radians, kept reduced to [0, 2pi).
  std::vector<double> parameters;

  static MeasurementSetting named(std::string label);
  static MeasurementSetting angle(std::string label, double radians);
  /// parameters[0]; ErrorCode::unknown_setting when absent.
  double angle_value() const;
};

using ForwardMap = std::function<StatisticalState(const StatisticalState&)>;
using BackwardMap = std::function<PhysicalVariable(const PhysicalVariable&)>;

struct SettingDynamics {
  ForwardMap forward;
  BackwardMap backward;
  double duration = 0.0;
  /// g = f^a_tau, on the output space of `forward`.
  PhysicalVariable observed;
};

class ChameleonMeasurement {
 public:
  using Resolver = std::function<std::optional<SettingDynamics>(const MeasurementSetting&)>;

  explicit ChameleonMeasurement(std::string name);

  /// Registers a discrete setting (looked up by label).
  ChameleonMeasurement& add(const MeasurementSetting& setting, SettingDynamics dynamics);
  /// Parametric family: consulted for labels not registered with add().
  ChameleonMeasurement& with_resolver(Resolver resolver);
  ChameleonMeasurement& with_spectrum(std::vector<double> spectrum);
  /// Physical models must report spectral values only.
  ChameleonMeasurement& mark_physical(bool physical = true);

  SettingDynamics dynamics(const MeasurementSetting& setting) const;
  const std::string& name() const noexcept { return name_; }
  const std::optional<std::vector<double>>& spectrum() const noexcept { return spectrum_; }
  bool physical() const noexcept { return physical_; }
  std::vector<MeasurementSetting> registered_settings() const;

 private:
  std::string name_;
  std::map<std::string, std::pair<MeasurementSetting, SettingDynamics>> settings_;
  Resolver resolver_;
  std::optional<std::vector<double>> spectrum_;
  bool physical_ = false;
};

// Dynamics constructors.
SettingDynamics identity_dynamics(PhysicalVariable observed, double duration = 1.0);
/// V = forward_evolve, U = backward_evolve for one diffusion.
SettingDynamics diffusion_dynamics(DiffusionSpec spec, TimeWindow window, SolverConfig cfg,
                                   PhysicalVariable observed);
/// As diffusion_dynamics with U the exact discrete adjoint of V (W = -L^T).
SettingDynamics exact_adjoint_dynamics(DiffusionSpec spec, TimeWindow window, SolverConfig cfg,
                                       PhysicalVariable observed);
/// V from one diffusion, U from another. Deliberately broken; negative control.
SettingDynamics mismatched_dynamics(DiffusionSpec forward_spec, DiffusionSpec backward_spec,
                                    TimeWindow window, SolverConfig cfg, PhysicalVariable observed);

PhysicalVariable ontic_variable(const ChameleonMeasurement& m, const MeasurementSetting& s);
StatisticalState evolved_state(const ChameleonMeasurement& m, const MeasurementSetting& s,
                               const StatisticalState& p0);
double classical_average(const ChameleonMeasurement& m, const MeasurementSetting& s,
                         const StatisticalState& p0);
double observational_average(const ChameleonMeasurement& m, const MeasurementSetting& s,
                             const StatisticalState& p0);

struct AverageReport {
  double classical = 0.0;
  double observational = 0.0;
  double gap = 0.0;
  MeasurementSetting setting;
};

AverageReport average_report(const ChameleonMeasurement& m, const MeasurementSetting& s,
                             const StatisticalState& p0);

struct RangeReport {
  ValueRange ontic;
  ValueRange observed;
  double hausdorff = 0.0;
  bool coincide = false;
};

/// Ranges coincide when their sampled value sets are within 1e-6 in Hausdorff distance.
RangeReport range_coincidence_report(const ChameleonMeasurement& m, const MeasurementSetting& s);

/// True iff every observed value lies within 1e-9 of the declared spectrum.
bool spectral_check(const ChameleonMeasurement& m, const MeasurementSetting& s);

/// L1 distance between the evolved states of two settings (probabilistic
/// contextuality witness; zero when the final distribution ignores the setting).
double contextuality_distance(const ChameleonMeasurement& m, const MeasurementSetting& s1,
                              const MeasurementSetting& s2, const StatisticalState& p0);

struct ConjugationCheck {
  double max_gap = 0.0;
  bool passed = false;
};

ConjugationCheck verify_conjugation(const ChameleonMeasurement& m, const MeasurementSetting& s,
                                    const StatisticalState& p0,
                                    std::span<const PhysicalVariable> family, double tolerance);

// ---------------------------------------------------------------------------
// Two-party models on a product space Lambda_A x Lambda_B.

/// Grid function on a product of two spaces, row-major (alice index major).
struct JointGrid {
  StateSpace alice;
  StateSpace bob;
  std::vector<double> values;

  double at(std::size_t i, std::size_t j) const { return values[i * bob.size() + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * bob.size() + j]; }

  static JointGrid outer(const PhysicalVariable& a, const PhysicalVariable& b);
  /// Product density p_A(x) p_B(y).
  static JointGrid outer(const StatisticalState& a, const StatisticalState& b);
};

/// Each side's dynamics reads only its own setting. Joint maps act fiber by
/// fiber: U_A^a along alice fibers, then U_B^b along bob fibers, i.e.
/// (U_A^a tensor U_B^b), which is exact for linear side maps.
class BipartiteMeasurement {
 public:
  BipartiteMeasurement(ChameleonMeasurement alice, ChameleonMeasurement bob);

  const ChameleonMeasurement& alice() const noexcept { return alice_; }
  const ChameleonMeasurement& bob() const noexcept { return bob_; }

  JointGrid backward(const MeasurementSetting& a, const MeasurementSetting& b,
                     const JointGrid& variable) const;
  JointGrid forward(const MeasurementSetting& a, const MeasurementSetting& b,
                    const JointGrid& density) const;
  /// Product of the two observed variables.
  JointGrid observed(const MeasurementSetting& a, const MeasurementSetting& b) const;

 private:
  ChameleonMeasurement alice_;
  ChameleonMeasurement bob_;
};

/// Sum over the product grid of variable * density * node weights.
double joint_average(const JointGrid& variable, const JointGrid& density);

}  // namespace lhv
