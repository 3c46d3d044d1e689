#include "lhv/chameleon.hpp"

#include <algorithm>
#include <cmath>

#include "lhv/error.hpp"
#include "lhv/simd/kernels.hpp"

namespace lhv {

MeasurementSetting MeasurementSetting::named(std::string label) {
  if (label.empty()) throw Error(ErrorCode::invalid_argument, "setting label must be nonempty");
  return MeasurementSetting{std::move(label), {}};
}

MeasurementSetting MeasurementSetting::angle(std::string label, double radians) {
  if (!std::isfinite(radians)) throw Error(ErrorCode::invalid_argument, "setting angle must be finite");
  MeasurementSetting s = named(std::move(label));
  s.parameters.push_back(reduce_angle(radians));
  return s;
}

double MeasurementSetting::angle_value() const {
  if (parameters.empty()) {
    throw Error(ErrorCode::unknown_setting, "setting '" + label + "' carries no angle");
  }
  return parameters.front();
}

ChameleonMeasurement::ChameleonMeasurement(std::string name) : name_(std::move(name)) {}

ChameleonMeasurement& ChameleonMeasurement::add(const MeasurementSetting& setting,
                                                SettingDynamics dynamics) {
  if (setting.label.empty()) throw Error(ErrorCode::invalid_argument, "setting label must be nonempty");
  if (!dynamics.forward || !dynamics.backward) {
    throw Error(ErrorCode::invalid_argument, "setting dynamics need both maps");
  }
  if (!(dynamics.duration > 0.0)) throw Error(ErrorCode::invalid_argument, "duration must be positive");
  settings_.insert_or_assign(setting.label, std::make_pair(setting, std::move(dynamics)));
  return *this;
}

ChameleonMeasurement& ChameleonMeasurement::with_resolver(Resolver resolver) {
  resolver_ = std::move(resolver);
  return *this;
}

ChameleonMeasurement& ChameleonMeasurement::with_spectrum(std::vector<double> spectrum) {
  std::sort(spectrum.begin(), spectrum.end());
  spectrum_ = std::move(spectrum);
  return *this;
}

ChameleonMeasurement& ChameleonMeasurement::mark_physical(bool physical) {
  physical_ = physical;
  return *this;
}

SettingDynamics ChameleonMeasurement::dynamics(const MeasurementSetting& setting) const {
  if (const auto it = settings_.find(setting.label); it != settings_.end()) return it->second.second;
  if (resolver_) {
    if (auto d = resolver_(setting)) return *std::move(d);
  }
  throw Error(ErrorCode::unknown_setting,
              "measurement '" + name_ + "' has no dynamics for setting '" + setting.label + "'");
}

std::vector<MeasurementSetting> ChameleonMeasurement::registered_settings() const {
  std::vector<MeasurementSetting> out;
  out.reserve(settings_.size());
  for (const auto& [label, entry] : settings_) out.push_back(entry.first);
  return out;
}

SettingDynamics identity_dynamics(PhysicalVariable observed, double duration) {
  return SettingDynamics{[](const StatisticalState& p) { return p; },
                         [](const PhysicalVariable& g) { return g; }, duration,
                         std::move(observed)};
}

SettingDynamics diffusion_dynamics(DiffusionSpec spec, TimeWindow window, SolverConfig cfg,
                                   PhysicalVariable observed) {
  return mismatched_dynamics(spec, spec, window, cfg, std::move(observed));
}

SettingDynamics exact_adjoint_dynamics(DiffusionSpec spec, TimeWindow window, SolverConfig cfg,
                                       PhysicalVariable observed) {
  cfg.adjoint = AdjointForm::transpose;
  return diffusion_dynamics(std::move(spec), window, cfg, std::move(observed));
}

SettingDynamics mismatched_dynamics(DiffusionSpec forward_spec, DiffusionSpec backward_spec,
                                    TimeWindow window, SolverConfig cfg, PhysicalVariable observed) {
  ForwardMap forward = [spec = std::move(forward_spec), window, cfg](const StatisticalState& p) {
    return forward_evolve(spec, p, window, cfg);
  };
  BackwardMap backward = [spec = std::move(backward_spec), window, cfg](const PhysicalVariable& g) {
    return backward_evolve(spec, g, window, cfg);
  };
  return SettingDynamics{std::move(forward), std::move(backward), window.duration(),
                         std::move(observed)};
}

PhysicalVariable ontic_variable(const ChameleonMeasurement& m, const MeasurementSetting& s) {
  const SettingDynamics d = m.dynamics(s);
  return d.backward(d.observed);
}

StatisticalState evolved_state(const ChameleonMeasurement& m, const MeasurementSetting& s,
                               const StatisticalState& p0) {
  if (!p0.is_normalized()) throw Error(ErrorCode::invalid_argument, "initial state is not normalized");
  StatisticalState p = m.dynamics(s).forward(p0);
  if (!p.is_normalized(1e-6)) {
    throw Error(ErrorCode::degenerate_measure,
                "evolved state of '" + m.name() + "' has mass " + std::to_string(p.total_mass()));
  }
  return p;
}

double classical_average(const ChameleonMeasurement& m, const MeasurementSetting& s,
                         const StatisticalState& p0) {
  return average(ontic_variable(m, s), p0);
}

double observational_average(const ChameleonMeasurement& m, const MeasurementSetting& s,
                             const StatisticalState& p0) {
  return average(m.dynamics(s).observed, evolved_state(m, s, p0));
}

AverageReport average_report(const ChameleonMeasurement& m, const MeasurementSetting& s,
                             const StatisticalState& p0) {
  AverageReport r;
  r.classical = classical_average(m, s, p0);
  r.observational = observational_average(m, s, p0);
  r.gap = std::abs(r.classical - r.observational);
  r.setting = s;
  return r;
}

RangeReport range_coincidence_report(const ChameleonMeasurement& m, const MeasurementSetting& s) {
  const SettingDynamics d = m.dynamics(s);
  const PhysicalVariable ontic = d.backward(d.observed);
  RangeReport r;
  r.ontic = range_of(ontic, ontic.space());
  r.observed = range_of(d.observed, d.observed.space());
  r.hausdorff = hausdorff_distance(r.ontic, r.observed);
  r.coincide = r.hausdorff <= 1e-6;
  return r;
}

bool spectral_check(const ChameleonMeasurement& m, const MeasurementSetting& s) {
  if (!m.spectrum() || m.spectrum()->empty()) {
    throw Error(ErrorCode::missing_spectrum, "measurement '" + m.name() + "' declares no spectrum");
  }
  const std::vector<double>& spectrum = *m.spectrum();
  const std::vector<double> values = m.dynamics(s).observed.values();
  return std::all_of(values.begin(), values.end(), [&](double v) {
    return std::any_of(spectrum.begin(), spectrum.end(),
                       [v](double e) { return std::abs(v - e) <= 1e-9; });
  });
}

double contextuality_distance(const ChameleonMeasurement& m, const MeasurementSetting& s1,
                              const MeasurementSetting& s2, const StatisticalState& p0) {
  return l1_distance(evolved_state(m, s1, p0), evolved_state(m, s2, p0));
}

ConjugationCheck verify_conjugation(const ChameleonMeasurement& m, const MeasurementSetting& s,
                                    const StatisticalState& p0,
                                    std::span<const PhysicalVariable> family, double tolerance) {
  const SettingDynamics d = m.dynamics(s);
  const StatisticalState evolved = d.forward(p0);
  ConjugationCheck check;
  for (const PhysicalVariable& g : family) {
    const double gap = std::abs(average(d.backward(g), p0) - average(g, evolved));
    check.max_gap = std::max(check.max_gap, gap);
  }
  check.passed = check.max_gap <= tolerance;
  return check;
}

// ---------------------------------------------------------------------------
// Bipartite

namespace {

std::vector<double> node_values(const StatisticalState& p) {
  if (p.representation() == StatisticalState::Representation::ensemble) {
    throw Error(ErrorCode::unsupported_representation, "joint grids need densities or weights");
  }
  return {p.values().begin(), p.values().end()};
}

StatisticalState state_from(const StateSpace& space, std::vector<double> values) {
  return space.gridded() ? StatisticalState::density(space, std::move(values))
                         : StatisticalState::weights(space, std::move(values));
}

// Applies a linear variable map to every fiber along one axis of a joint grid.
// axis 0: fibers run over the alice index (bob index fixed).
JointGrid map_variable_fibers(const JointGrid& in, int axis, const BackwardMap& map) {
  const StateSpace& fiber_space = axis == 0 ? in.alice : in.bob;
  const std::size_t fibers = axis == 0 ? in.bob.size() : in.alice.size();
  JointGrid out{in.alice, in.bob, {}};
  std::vector<std::vector<double>> mapped(fibers);
  for (std::size_t f = 0; f < fibers; ++f) {
    std::vector<double> v(fiber_space.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = axis == 0 ? in.at(k, f) : in.at(f, k);
    const PhysicalVariable result = map(PhysicalVariable::sampled(fiber_space, std::move(v)));
    (axis == 0 ? out.alice : out.bob) = result.space();
    mapped[f] = result.values();
  }
  out.values.assign(out.alice.size() * out.bob.size(), 0.0);
  for (std::size_t f = 0; f < fibers; ++f) {
    for (std::size_t k = 0; k < mapped[f].size(); ++k) {
      (axis == 0 ? out.at(k, f) : out.at(f, k)) = mapped[f][k];
    }
  }
  return out;
}

JointGrid map_state_fibers(const JointGrid& in, int axis, const ForwardMap& map) {
  const StateSpace& fiber_space = axis == 0 ? in.alice : in.bob;
  const std::size_t fibers = axis == 0 ? in.bob.size() : in.alice.size();
  JointGrid out{in.alice, in.bob, {}};
  std::vector<std::vector<double>> mapped(fibers);
  std::vector<double> masses(fibers, 0.0);
  bool any = false;
  for (std::size_t f = 0; f < fibers; ++f) {
    std::vector<double> v(fiber_space.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = axis == 0 ? in.at(k, f) : in.at(f, k);
    const StatisticalState fiber = state_from(fiber_space, std::move(v));
    masses[f] = fiber.total_mass();
    if (!(masses[f] > 0.0)) continue;
    // Side maps act on probability measures; scale back by the fiber mass.
    const StatisticalState result = map(normalize(fiber));
    (axis == 0 ? out.alice : out.bob) = result.space();
    mapped[f] = node_values(result);
    any = true;
  }
  if (!any) throw Error(ErrorCode::degenerate_measure, "joint density has no mass");
  const std::size_t len = (axis == 0 ? out.alice : out.bob).size();
  out.values.assign(out.alice.size() * out.bob.size(), 0.0);
  for (std::size_t f = 0; f < fibers; ++f) {
    if (mapped[f].empty()) continue;
    for (std::size_t k = 0; k < len; ++k) {
      (axis == 0 ? out.at(k, f) : out.at(f, k)) = masses[f] * mapped[f][k];
    }
  }
  return out;
}

}  // namespace

JointGrid JointGrid::outer(const PhysicalVariable& a, const PhysicalVariable& b) {
  const std::vector<double> va = a.values();
  const std::vector<double> vb = b.values();
  JointGrid g{a.space(), b.space(), std::vector<double>(va.size() * vb.size())};
  for (std::size_t i = 0; i < va.size(); ++i) {
    for (std::size_t j = 0; j < vb.size(); ++j) g.at(i, j) = va[i] * vb[j];
  }
  return g;
}

JointGrid JointGrid::outer(const StatisticalState& a, const StatisticalState& b) {
  const std::vector<double> va = node_values(a);
  const std::vector<double> vb = node_values(b);
  JointGrid g{a.space(), b.space(), std::vector<double>(va.size() * vb.size())};
  for (std::size_t i = 0; i < va.size(); ++i) {
    for (std::size_t j = 0; j < vb.size(); ++j) g.at(i, j) = va[i] * vb[j];
  }
  return g;
}

BipartiteMeasurement::BipartiteMeasurement(ChameleonMeasurement alice, ChameleonMeasurement bob)
    : alice_(std::move(alice)), bob_(std::move(bob)) {}

JointGrid BipartiteMeasurement::backward(const MeasurementSetting& a, const MeasurementSetting& b,
                                         const JointGrid& variable) const {
  const JointGrid half = map_variable_fibers(variable, 0, alice_.dynamics(a).backward);
  return map_variable_fibers(half, 1, bob_.dynamics(b).backward);
}

JointGrid BipartiteMeasurement::forward(const MeasurementSetting& a, const MeasurementSetting& b,
                                        const JointGrid& density) const {
  const JointGrid half = map_state_fibers(density, 0, alice_.dynamics(a).forward);
  return map_state_fibers(half, 1, bob_.dynamics(b).forward);
}

JointGrid BipartiteMeasurement::observed(const MeasurementSetting& a,
                                         const MeasurementSetting& b) const {
  return JointGrid::outer(alice_.dynamics(a).observed, bob_.dynamics(b).observed);
}

double joint_average(const JointGrid& variable, const JointGrid& density) {
  if (!(variable.alice == density.alice) || !(variable.bob == density.bob)) {
    throw Error(ErrorCode::space_mismatch, "joint variable and density on different spaces");
  }
  return simd::dot(variable.values, density.values) * variable.alice.node_weight() *
         variable.bob.node_weight();
}

}  // namespace lhv
