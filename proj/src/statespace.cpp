#include "lhv/statespace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lhv/error.hpp"
#include "lhv/simd/kernels.hpp"

namespace lhv {

double reduce_angle(double x) noexcept {
  double r = std::fmod(x, two_pi);
  if (r < 0.0) r += two_pi;
  return r >= two_pi ? 0.0 : r;
}

// ---------------------------------------------------------------------------
// StateSpace

StateSpace StateSpace::interval(double lower, double upper, std::size_t cells) {
  if (!std::isfinite(lower) || !std::isfinite(upper) || !(lower < upper)) {
    throw Error(ErrorCode::invalid_argument, "interval bounds must be finite with lower < upper");
  }
  if (cells < 2) throw Error(ErrorCode::invalid_argument, "gridded spaces need at least 2 cells");
  StateSpace s;
  s.kind_ = SpaceKind::interval;
  s.lower_ = lower;
  s.upper_ = upper;
  s.cells_ = cells;
  s.width_ = (upper - lower) / static_cast<double>(cells);
  return s;
}

StateSpace StateSpace::circle(std::size_t cells) {
  if (cells < 2) throw Error(ErrorCode::invalid_argument, "gridded spaces need at least 2 cells");
  StateSpace s;
  s.kind_ = SpaceKind::circle;
  s.lower_ = 0.0;
  s.upper_ = two_pi;
  s.cells_ = cells;
  s.width_ = two_pi / static_cast<double>(cells);
  return s;
}

StateSpace StateSpace::finite(std::vector<double> points, std::vector<std::string> labels) {
  if (points.empty()) throw Error(ErrorCode::invalid_argument, "finite space needs a point");
  if (!labels.empty() && labels.size() != points.size()) {
    throw Error(ErrorCode::invalid_argument, "finite space: one label per point");
  }
  for (double x : points) {
    if (!std::isfinite(x)) throw Error(ErrorCode::invalid_argument, "finite space: non-finite point");
  }
  StateSpace s;
  s.kind_ = SpaceKind::finite;
  s.lower_ = *std::min_element(points.begin(), points.end());
  s.upper_ = *std::max_element(points.begin(), points.end());
  s.points_ = std::move(points);
  s.labels_ = std::move(labels);
  return s;
}

StateSpace StateSpace::finite_labels(std::vector<std::string> labels) {
  std::vector<double> points(labels.size());
  for (std::size_t i = 0; i < points.size(); ++i) points[i] = static_cast<double>(i);
  return finite(std::move(points), std::move(labels));
}

std::size_t StateSpace::size() const noexcept { return gridded() ? cells_ : points_.size(); }

double StateSpace::point(std::size_t i) const noexcept {
  if (!gridded()) return points_[i];
  return lower_ + (static_cast<double>(i) + 0.5) * width_;
}

std::vector<double> StateSpace::points() const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = point(i);
  return out;
}

double StateSpace::reduce(double x) const noexcept {
  return kind_ == SpaceKind::circle ? reduce_angle(x) : x;
}

bool StateSpace::contains(double x) const noexcept {
  switch (kind_) {
    case SpaceKind::interval: return x >= lower_ && x <= upper_;
    case SpaceKind::circle: return std::isfinite(x);
    case SpaceKind::finite: return std::find(points_.begin(), points_.end(), x) != points_.end();
  }
  return false;
}

std::size_t StateSpace::locate(double x) const {
  if (kind_ == SpaceKind::finite) {
    const auto it = std::find(points_.begin(), points_.end(), x);
    if (it == points_.end()) throw Error(ErrorCode::invalid_argument, "point not in finite space");
    return static_cast<std::size_t>(it - points_.begin());
  }
  const double t = std::floor((reduce(x) - lower_) / width_);
  if (t < 0.0) return 0;
  return std::min(cells_ - 1, static_cast<std::size_t>(t));
}

std::string StateSpace::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case SpaceKind::interval: os << "interval[" << lower_ << ", " << upper_ << "] n=" << cells_; break;
    case SpaceKind::circle: os << "circle n=" << cells_; break;
    case SpaceKind::finite: os << "finite(" << points_.size() << " points)"; break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// PhysicalVariable

PhysicalVariable::PhysicalVariable(StateSpace space, Rule rule, std::vector<double> samples,
                                   std::string name)
    : space_(std::move(space)), rule_(std::move(rule)), samples_(std::move(samples)),
      name_(std::move(name)) {}

PhysicalVariable PhysicalVariable::analytic(StateSpace space, Rule rule, std::string name) {
  if (!rule) throw Error(ErrorCode::invalid_argument, "analytic variable needs a rule");
  return PhysicalVariable(std::move(space), std::move(rule), {}, std::move(name));
}

PhysicalVariable PhysicalVariable::sampled(StateSpace space, std::vector<double> values,
                                           std::string name) {
  if (values.size() != space.size()) {
    throw Error(ErrorCode::invalid_argument, "sampled variable: one value per node");
  }
  return PhysicalVariable(std::move(space), nullptr, std::move(values), std::move(name));
}

PhysicalVariable PhysicalVariable::constant(StateSpace space, double value) {
  return analytic(std::move(space), [value](double) { return value; }, "const");
}

PhysicalVariable PhysicalVariable::renamed(std::string name) const {
  PhysicalVariable copy = *this;
  copy.name_ = std::move(name);
  return copy;
}

double PhysicalVariable::operator()(double x) const {
  if (rule_) return rule_(space_.reduce(x));
  if (!space_.gridded()) return samples_[space_.locate(x)];

  const std::size_t n = samples_.size();
  const double t = (space_.reduce(x) - space_.lower()) / space_.cell_width() - 0.5;
  const double base = std::floor(t);
  const double frac = t - base;
  if (space_.kind() == SpaceKind::circle) {
    const auto nn = static_cast<long long>(n);
    const long long i0 = ((static_cast<long long>(base) % nn) + nn) % nn;
    const long long i1 = (i0 + 1) % nn;
    return (1.0 - frac) * samples_[static_cast<std::size_t>(i0)] +
           frac * samples_[static_cast<std::size_t>(i1)];
  }
  if (base < 0.0) return samples_.front();
  const auto i0 = static_cast<std::size_t>(base);
  if (i0 + 1 >= n) return samples_.back();
  return (1.0 - frac) * samples_[i0] + frac * samples_[i0 + 1];
}

namespace {

void require_finite(std::span<const double> values, const std::string& name) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::evaluation,
                  "variable '" + (name.empty() ? std::string("<anonymous>") : name) +
                      "' is not finite on the grid");
    }
  }
}

}  // namespace

std::vector<double> PhysicalVariable::values() const {
  std::vector<double> out;
  if (rule_) {
    out.resize(space_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = rule_(space_.reduce(space_.point(i)));
  } else {
    out = samples_;
  }
  require_finite(out, name_);
  return out;
}

std::vector<double> PhysicalVariable::values_on(const StateSpace& support) const {
  if (support == space_) return values();
  if (!rule_ && !(support.gridded() && space_.gridded())) {
    throw Error(ErrorCode::space_mismatch, "sampled variable evaluated on a different space");
  }
  std::vector<double> out(support.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*this)(support.point(i));
  require_finite(out, name_);
  return out;
}

// ---------------------------------------------------------------------------
// StatisticalState

StatisticalState::StatisticalState(StateSpace space, Representation rep, std::vector<double> values,
                                   ParticleEnsemble particles)
    : space_(std::move(space)), representation_(rep), values_(std::move(values)),
      particles_(std::move(particles)) {}

namespace {

void require_nonnegative(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::invalid_argument, "non-finite measure entry");
    if (v < 0.0) throw Error(ErrorCode::negative_density, "measure entries must be nonnegative");
  }
}

}  // namespace

StatisticalState StatisticalState::density(StateSpace space, std::vector<double> values) {
  if (!space.gridded()) {
    throw Error(ErrorCode::unsupported_representation, "densities live on gridded spaces");
  }
  if (values.size() != space.size()) {
    throw Error(ErrorCode::invalid_argument, "density: one value per cell");
  }
  require_nonnegative(values);
  return StatisticalState(std::move(space), Representation::density, std::move(values), {});
}

StatisticalState StatisticalState::weights(StateSpace space, std::vector<double> values) {
  if (space.gridded()) {
    throw Error(ErrorCode::unsupported_representation, "point weights live on finite spaces");
  }
  if (values.size() != space.size()) {
    throw Error(ErrorCode::invalid_argument, "weights: one value per point");
  }
  require_nonnegative(values);
  return StatisticalState(std::move(space), Representation::weights, std::move(values), {});
}

StatisticalState StatisticalState::ensemble(StateSpace space, ParticleEnsemble particles) {
  if (particles.points.empty()) throw Error(ErrorCode::empty_ensemble, "ensemble has no points");
  if (!particles.weights.empty()) {
    if (particles.weights.size() != particles.points.size()) {
      throw Error(ErrorCode::invalid_argument, "ensemble: one weight per point");
    }
    require_nonnegative(particles.weights);
  }
  for (double& x : particles.points) {
    x = space.reduce(x);
    if (!space.contains(x)) throw Error(ErrorCode::invalid_argument, "ensemble point outside space");
  }
  return StatisticalState(std::move(space), Representation::ensemble, {}, std::move(particles));
}

StatisticalState StatisticalState::from_solver(StateSpace space, std::vector<double> values,
                                               double tolerance) {
  for (double& v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::coefficient, "solver produced a non-finite density");
    if (v < 0.0) {
      if (v < -tolerance) {
        std::ostringstream msg;
        msg << "solver density " << v << " below round-off tolerance " << tolerance;
        throw Error(ErrorCode::negative_density, msg.str());
      }
      v = 0.0;
    }
  }
  return normalize(density(std::move(space), std::move(values)));
}

StatisticalState StatisticalState::uniform(const StateSpace& space) {
  if (!space.gridded()) {
    return weights(space, std::vector<double>(space.size(), 1.0 / static_cast<double>(space.size())));
  }
  return density(space, std::vector<double>(space.size(), 1.0 / (space.upper() - space.lower())));
}

StatisticalState StatisticalState::gaussian(const StateSpace& space, double mean, double variance) {
  if (!space.gridded()) throw Error(ErrorCode::unsupported_representation, "gaussian needs a grid");
  if (!(variance > 0.0)) throw Error(ErrorCode::invalid_argument, "gaussian variance must be positive");
  std::vector<double> v(space.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = space.point(i) - mean;
    v[i] = std::exp(-0.5 * d * d / variance);
  }
  return normalize(density(space, std::move(v)));
}

StatisticalState StatisticalState::point_mass(const StateSpace& space, double at) {
  if (!space.gridded()) {
    std::vector<double> w(space.size(), 0.0);
    w[space.locate(at)] = 1.0;
    return weights(space, std::move(w));
  }
  return ensemble(space, ParticleEnsemble{{at}, {}, 0});
}

double StatisticalState::total_mass() const {
  switch (representation_) {
    case Representation::density: return simd::sum(values_) * space_.cell_width();
    case Representation::weights: return simd::sum(values_);
    case Representation::ensemble:
      return particles_.weights.empty() ? 1.0 : simd::sum(particles_.weights);
  }
  return 0.0;
}

bool StatisticalState::is_normalized(double tolerance) const {
  return std::abs(total_mass() - 1.0) <= tolerance;
}

double StatisticalState::mean() const {
  return average(PhysicalVariable::analytic(space_, [](double x) { return x; }), *this) /
         total_mass();
}

double StatisticalState::variance() const {
  const double m = mean();
  return average(PhysicalVariable::analytic(space_, [m](double x) { return (x - m) * (x - m); }),
                 *this) /
         total_mass();
}

// ---------------------------------------------------------------------------
// Operations

double average(const PhysicalVariable& f, const StatisticalState& p) {
  if (!(f.space() == p.space())) {
    throw Error(ErrorCode::space_mismatch,
                "variable on " + f.space().describe() + ", state on " + p.space().describe());
  }
  switch (p.representation()) {
    case StatisticalState::Representation::density: {
      const std::vector<double> fv = f.values();
      return simd::dot(fv, p.values()) * p.space().cell_width();
    }
    case StatisticalState::Representation::weights: {
      const std::vector<double> fv = f.values();
      return simd::dot(fv, p.values());
    }
    case StatisticalState::Representation::ensemble: {
      const ParticleEnsemble& e = p.particles();
      std::vector<double> fv(e.size());
      for (std::size_t i = 0; i < fv.size(); ++i) {
        fv[i] = f(e.points[i]);
        if (!std::isfinite(fv[i])) throw Error(ErrorCode::evaluation, "variable not finite on ensemble");
      }
      if (e.weights.empty()) return simd::sum(fv) / static_cast<double>(fv.size());
      return simd::dot(fv, e.weights);
    }
  }
  return 0.0;
}

StatisticalState normalize(const StatisticalState& p) {
  const double mass = p.total_mass();
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw Error(ErrorCode::degenerate_measure, "total mass must be positive to normalize");
  }
  switch (p.representation()) {
    case StatisticalState::Representation::density:
    case StatisticalState::Representation::weights: {
      std::vector<double> v(p.values().begin(), p.values().end());
      for (double& x : v) x /= mass;
      return p.representation() == StatisticalState::Representation::density
                 ? StatisticalState::density(p.space(), std::move(v))
                 : StatisticalState::weights(p.space(), std::move(v));
    }
    case StatisticalState::Representation::ensemble: {
      ParticleEnsemble e = p.particles();
      for (double& w : e.weights) w /= mass;
      return StatisticalState::ensemble(p.space(), std::move(e));
    }
  }
  return p;
}

Sampler::Sampler(const StatisticalState& p) : space_(p.space()) {
  std::span<const double> mass;
  std::vector<double> ensemble_weights;
  switch (p.representation()) {
    case StatisticalState::Representation::density:
      mass = p.values();
      cellwise_ = true;
      break;
    case StatisticalState::Representation::weights:
      mass = p.values();
      nodes_ = space_.points();
      break;
    case StatisticalState::Representation::ensemble: {
      const ParticleEnsemble& e = p.particles();
      ensemble_weights.resize(e.size());
      for (std::size_t i = 0; i < e.size(); ++i) ensemble_weights[i] = e.weight(i);
      mass = ensemble_weights;
      nodes_ = e.points;
      break;
    }
  }
  cdf_.resize(mass.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) cdf_[i] = (acc += mass[i]);
  if (!(acc > 0.0)) throw Error(ErrorCode::degenerate_measure, "cannot sample a zero measure");
  for (double& c : cdf_) c /= acc;
  cdf_.back() = 1.0;
}

double Sampler::draw(Rng& rng) const {
  const double u = rng.uniform();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  // upper_bound lands on the first cell with cdf > u, never a zero-mass cell.
  const auto idx = static_cast<std::size_t>(std::min(it, cdf_.end() - 1) - cdf_.begin());
  if (!cellwise_) return nodes_[idx];
  const double x = space_.lower() + (static_cast<double>(idx) + rng.uniform()) * space_.cell_width();
  return space_.reduce(x);
}

ParticleEnsemble sample(const StatisticalState& p, std::size_t count, Seed seed) {
  if (count == 0) throw Error(ErrorCode::empty_ensemble, "sample count must be positive");
  const Sampler sampler(p);
  Rng rng(seed);
  ParticleEnsemble out;
  out.seed = seed;
  out.points.resize(count);
  for (double& x : out.points) x = sampler.draw(rng);
  return out;
}

std::string ValueRange::describe() const {
  std::ostringstream os;
  os.precision(12);
  if (is_value_set) {
    os << '{';
    for (std::size_t i = 0; i < values.size(); ++i) os << (i ? ", " : "") << values[i];
    os << '}';
  } else {
    os << '[' << lower << ", " << upper << ']';
  }
  return os.str();
}

ValueRange range_of(const PhysicalVariable& f, const StateSpace& support) {
  std::vector<double> v = f.values_on(support);
  ValueRange r;
  std::tie(r.lower, r.upper) = simd::minmax(v);
  std::sort(v.begin(), v.end());
  const auto last = std::unique(v.begin(), v.end(), [](double a, double b) {
    return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a));
  });
  v.erase(last, v.end());
  r.values = std::move(v);
  r.is_value_set = !support.gridded() ||
                   r.values.size() <= std::max<std::size_t>(2, support.size() / 8);
  return r;
}

namespace {

double directed_hausdorff(const std::vector<double>& from, const std::vector<double>& to) {
  double worst = 0.0;
  for (double x : from) {
    auto it = std::lower_bound(to.begin(), to.end(), x);
    double best = std::numeric_limits<double>::infinity();
    if (it != to.end()) best = std::min(best, std::abs(*it - x));
    if (it != to.begin()) best = std::min(best, std::abs(*(it - 1) - x));
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

double hausdorff_distance(const ValueRange& x, const ValueRange& y) {
  if (x.values.empty() || y.values.empty()) {
    throw Error(ErrorCode::invalid_argument, "hausdorff distance of an empty range");
  }
  return std::max(directed_hausdorff(x.values, y.values), directed_hausdorff(y.values, x.values));
}

double l1_distance(const StatisticalState& p, const StatisticalState& q) {
  if (!(p.space() == q.space())) throw Error(ErrorCode::space_mismatch, "l1 distance across spaces");
  if (p.representation() == StatisticalState::Representation::ensemble ||
      q.representation() != p.representation()) {
    throw Error(ErrorCode::unsupported_representation, "l1 distance needs densities or weights");
  }
  return simd::abs_diff_sum(p.values(), q.values()) * p.space().node_weight();
}

StatisticalState kernel_density(const ParticleEnsemble& particles, const StateSpace& grid,
                                double bandwidth) {
  if (!grid.gridded()) throw Error(ErrorCode::unsupported_representation, "KDE needs a grid");
  if (particles.points.empty()) throw Error(ErrorCode::empty_ensemble, "KDE of an empty ensemble");

  const std::size_t n = grid.size();
  const double h = grid.cell_width();
  const bool periodic = grid.kind() == SpaceKind::circle;

  double wsum = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
  std::vector<double> hist(n, 0.0);
  for (std::size_t k = 0; k < particles.size(); ++k) {
    const double w = particles.weight(k);
    const double x = grid.reduce(particles.points[k]);
    wsum += w;
    m1 += w * x;
    m2 += w * x * x;
    // Linear binning onto the two nearest cell centers.
    const double t = (x - grid.lower()) / h - 0.5;
    const double base = std::floor(t);
    const double frac = t - base;
    auto put = [&](long long i, double mass) {
      const auto nn = static_cast<long long>(n);
      if (periodic) {
        i = ((i % nn) + nn) % nn;
      } else {
        i = std::clamp<long long>(i, 0, nn - 1);
      }
      hist[static_cast<std::size_t>(i)] += mass;
    };
    put(static_cast<long long>(base), w * (1.0 - frac));
    put(static_cast<long long>(base) + 1, w * frac);
  }

  if (bandwidth <= 0.0) {
    const double mean = m1 / wsum;
    const double sd = std::sqrt(std::max(0.0, m2 / wsum - mean * mean));
    bandwidth = 1.06 * sd * std::pow(static_cast<double>(particles.size()), -0.2);
    bandwidth = std::max(bandwidth, h);
  }

  const auto reach = static_cast<long long>(std::ceil(5.0 * bandwidth / h));
  std::vector<double> kernel(static_cast<std::size_t>(2 * reach + 1));
  for (long long j = -reach; j <= reach; ++j) {
    const double d = static_cast<double>(j) * h / bandwidth;
    kernel[static_cast<std::size_t>(j + reach)] = std::exp(-0.5 * d * d);
  }

  std::vector<double> dens(n, 0.0);
  const auto nn = static_cast<long long>(n);
  for (long long i = 0; i < nn; ++i) {
    if (hist[static_cast<std::size_t>(i)] == 0.0) continue;
    for (long long j = -reach; j <= reach; ++j) {
      long long target = i + j;
      if (periodic) {
        target = ((target % nn) + nn) % nn;
      } else if (target < 0 || target >= nn) {
        continue;
      }
      dens[static_cast<std::size_t>(target)] +=
          hist[static_cast<std::size_t>(i)] * kernel[static_cast<std::size_t>(j + reach)];
    }
  }
  return normalize(StatisticalState::density(grid, std::move(dens)));
}

}  // namespace lhv
