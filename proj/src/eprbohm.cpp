#include "lhv/eprbohm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <type_traits>

#include "lhv/error.hpp"
#include "lhv/simd/kernels.hpp"

namespace lhv::epr {
namespace {

constexpr double sqrt2 = std::numbers::sqrt2;

void require_finite(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b)) {
    throw Error(ErrorCode::invalid_argument, "measurement angles must be finite");
  }
}

void require_grid(const SingletFunctionalModel& m) {
  if (m.cells < 360) {
    throw Error(ErrorCode::invalid_argument,
                "functional model needs at least 360 cells, got " + std::to_string(m.cells));
  }
}

const MonteCarloOptions& require_mc(const std::optional<MonteCarloOptions>& mc) {
  if (!mc) throw Error(ErrorCode::config, "monte carlo correlation needs a sample count and seed");
  if (mc->count < 2) throw Error(ErrorCode::config, "monte carlo sample count must be at least 2");
  return *mc;
}

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
};

// Chunked, seed-split sampling of a per-draw statistic; chunk results are
// merged in chunk order so the estimate does not depend on the thread count.
template <class Draw>
CorrelationResult monte_carlo(const MonteCarloOptions& mc, Draw draw) {
  std::vector<Moments> parts(chunk_count(mc.count, default_chunk_size));
  for_each_chunk(mc.count, default_chunk_size, mc.threads,
                 [&](std::size_t chunk, std::size_t begin, std::size_t end) {
                   Rng rng(derive_seed(mc.seed, chunk));
                   Moments m;
                   for (std::size_t i = begin; i < end; ++i) {
                     const double x = draw(rng);
                     m.sum += x;
                     m.sum_sq += x * x;
                   }
                   parts[chunk] = m;
                 });
  Moments total;
  for (const Moments& m : parts) {
    total.sum += m.sum;
    total.sum_sq += m.sum_sq;
  }
  const double n = static_cast<double>(mc.count);
  const double mean = total.sum / n;
  const double var = std::max(0.0, (total.sum_sq - n * mean * mean) / (n - 1.0));
  CorrelationResult r;
  r.value = mean;
  r.method = Method::monte_carlo;
  r.mc_std_error = std::sqrt(var / n);
  r.seed = mc.seed;
  r.samples = mc.count;
  return r;
}

CorrelationResult functional_correlation(const SingletFunctionalModel& m, double a, double b,
                                         Method method, const std::optional<MonteCarloOptions>& mc) {
  require_grid(m);
  if (method == Method::monte_carlo) {
    return monte_carlo(require_mc(mc), [a, b](Rng& rng) {
      const double lambda = two_pi * rng.uniform();
      return sqrt2 * std::cos(lambda - a) * (-sqrt2 * std::cos(lambda - b));
    });
  }
  const std::vector<double> va = m.alice_variable(a).values();
  const std::vector<double> vb = m.bob_variable(b).values();
  CorrelationResult r;
  r.value = simd::dot(va, vb) / static_cast<double>(m.cells);
  r.samples = m.cells;
  return r;
}

CorrelationResult outcome_correlation(const SingletOutcomeModel& m, double a, double b,
                                      Method method, const std::optional<MonteCarloOptions>& mc) {
  const SingletOutcomeModel::Pmf p = m.pmf(a, b);
  std::array<double, 4> product{};
  for (std::size_t k = 0; k < 4; ++k) {
    product[k] = SingletOutcomeModel::alice_values[k] * SingletOutcomeModel::bob_values[k];
  }
  if (method == Method::monte_carlo) {
    const double total = p[0] + p[1] + p[2] + p[3];
    const std::array<double, 3> cdf{p[0] / total, (p[0] + p[1]) / total,
                                    (p[0] + p[1] + p[2]) / total};
    return monte_carlo(require_mc(mc), [cdf, product](Rng& rng) {
      const double u = rng.uniform();
      std::size_t k = 0;
      while (k < 3 && u >= cdf[k]) ++k;
      return product[k];
    });
  }
  CorrelationResult r;
  for (std::size_t k = 0; k < 4; ++k) r.value += product[k] * p[k];
  r.samples = 4;
  return r;
}

// Alice's marginal P_A(+ | a, b) of a pmf in (++, +-, -+, --) order; Bob's is
// the mirror image.
double alice_plus(const SingletOutcomeModel::Pmf& p) { return p[0] + p[1]; }
double alice_minus(const SingletOutcomeModel::Pmf& p) { return p[2] + p[3]; }
double bob_plus(const SingletOutcomeModel::Pmf& p) { return p[0] + p[2]; }
double bob_minus(const SingletOutcomeModel::Pmf& p) { return p[1] + p[3]; }

// Backward map onto span{1, cos(lambda - theta)}, scaled by kappa, and its
// adjoint on densities over the same circle grid.
SettingDynamics projection_dynamics(const StateSpace& space, double theta, double side_sign) {
  const std::size_t n = space.size();
  const double h = space.cell_width();
  std::vector<double> cosines(n);
  for (std::size_t j = 0; j < n; ++j) cosines[j] = std::cos(space.point(j) - theta);

  std::vector<double> observed(n);
  for (std::size_t j = 0; j < n; ++j) observed[j] = side_sign * sgn(cosines[j]);

  const double inv_n = 1.0 / static_cast<double>(n);
  // proj(g) = (2/n) sum g_j cos_j; chosen so that proj(observed) * kappa = side_sign * sqrt2.
  auto project = [cosines, inv_n](std::span<const double> g) {
    return 2.0 * inv_n * simd::dot(g, cosines);
  };
  const double kappa = side_sign * sqrt2 / project(observed);

  BackwardMap backward = [space, theta, kappa, project, inv_n](const PhysicalVariable& g) {
    if (!(g.space() == space)) throw Error(ErrorCode::space_mismatch, "variable not on the hidden grid");
    const std::vector<double> v = g.values();
    const double mean = simd::sum(v) * inv_n;
    const double coefficient = kappa * project(v);
    return PhysicalVariable::analytic(
        space, [mean, coefficient, theta](double x) { return mean + coefficient * std::cos(x - theta); },
        "ontic");
  };
  ForwardMap forward = [space, cosines, kappa, h, inv_n](const StatisticalState& p) {
    if (!(p.space() == space) || p.representation() != StatisticalState::Representation::density) {
      throw Error(ErrorCode::space_mismatch, "state must be a density on the hidden grid");
    }
    const double mass = p.total_mass();
    const double c = simd::dot(p.values(), cosines) * h;
    std::vector<double> out(cosines.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
      out[j] = (mass + 2.0 * kappa * c * cosines[j]) * inv_n / h;
      if (out[j] < 0.0) {
        throw Error(ErrorCode::negative_density,
                    "projection dynamics leave the nonnegative cone for this state");
      }
    }
    return StatisticalState::density(space, std::move(out));
  };
  return SettingDynamics{
      std::move(forward), std::move(backward), 1.0,
      PhysicalVariable::sampled(space, observed, side_sign > 0 ? "alice observed" : "bob observed")};
}

}  // namespace

PhysicalVariable SingletFunctionalModel::alice_variable(double a) const {
  return PhysicalVariable::analytic(
      space(), [a](double lambda) { return sqrt2 * std::cos(lambda - a); }, "A");
}

PhysicalVariable SingletFunctionalModel::bob_variable(double b) const {
  return PhysicalVariable::analytic(
      space(), [b](double lambda) { return -sqrt2 * std::cos(lambda - b); }, "B");
}

SingletOutcomeModel SingletOutcomeModel::standard() { return SingletOutcomeModel{}; }

SingletOutcomeModel::Pmf SingletOutcomeModel::pmf(double a, double b) const {
  if (rule) return rule(a, b);
  const double c = std::cos(a - b);
  return {(1.0 - c) / 4.0, (1.0 + c) / 4.0, (1.0 + c) / 4.0, (1.0 - c) / 4.0};
}

StateSpace SingletOutcomeModel::outcome_space() {
  return StateSpace::finite({0.0, 1.0, 2.0, 3.0}, {"++", "+-", "-+", "--"});
}

CorrelationResult correlation(const Model& model, double a, double b, Method method,
                              std::optional<MonteCarloOptions> mc) {
  require_finite(a, b);
  return std::visit(
      [&](const auto& m) -> CorrelationResult {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, SingletFunctionalModel>) {
          return functional_correlation(m, a, b, method, mc);
        } else {
          return outcome_correlation(m, a, b, method, mc);
        }
      },
      model);
}

ChshAngles ChshAngles::standard() {
  using std::numbers::pi;
  return ChshAngles{0.0, pi / 2.0, pi / 4.0, 3.0 * pi / 4.0};
}

double ChshResult::magnitude() const noexcept { return std::abs(s); }

ChshResult chsh(const CorrelationFn& correlate, const ChshAngles& angles) {
  for (double x : {angles.a, angles.a_prime, angles.b, angles.b_prime}) {
    if (!std::isfinite(x)) throw Error(ErrorCode::invalid_argument, "CHSH angles must be finite");
  }
  ChshResult r;
  r.terms[0] = correlate(angles.a, angles.b, 0);
  r.terms[1] = correlate(angles.a_prime, angles.b, 1);
  r.terms[2] = correlate(angles.a_prime, angles.b_prime, 2);
  r.terms[3] = correlate(angles.a, angles.b_prime, 3);
  r.s = r.terms[0].value + r.terms[1].value + r.terms[2].value - r.terms[3].value;
  double var = 0.0;
  bool sampled = false;
  for (const CorrelationResult& t : r.terms) {
    if (t.mc_std_error) {
      var += *t.mc_std_error * *t.mc_std_error;
      sampled = true;
    }
  }
  if (sampled) r.std_error = std::sqrt(var);
  return r;
}

ChshResult chsh(const Model& model, const ChshAngles& angles, Method method,
                std::optional<MonteCarloOptions> mc) {
  if (method == Method::monte_carlo) require_mc(mc);
  return chsh(
      [&](double a, double b, std::size_t term) {
        std::optional<MonteCarloOptions> local = mc;
        if (local) local->seed = derive_seed(mc->seed, term);
        return correlation(model, a, b, method, local);
      },
      angles);
}

double no_signaling_defect(const Model& model, double a, double b, double b_prime) {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(b_prime)) {
    throw Error(ErrorCode::invalid_argument, "measurement angles must be finite");
  }
  const auto* m = std::get_if<SingletOutcomeModel>(&model);
  if (m == nullptr) {
    throw Error(ErrorCode::unsupported_model,
                "no-signaling check needs an outcome pmf; the functional model has none");
  }
  // Alice at a while Bob switches b -> b'.
  const SingletOutcomeModel::Pmf p = m->pmf(a, b);
  const SingletOutcomeModel::Pmf q = m->pmf(a, b_prime);
  const double alice = std::max(std::abs(alice_plus(p) - alice_plus(q)),
                                std::abs(alice_minus(p) - alice_minus(q)));
  // Bob at a while Alice switches b -> b'.
  const SingletOutcomeModel::Pmf r = m->pmf(b, a);
  const SingletOutcomeModel::Pmf s = m->pmf(b_prime, a);
  const double bob = std::max(std::abs(bob_plus(r) - bob_plus(s)),
                              std::abs(bob_minus(r) - bob_minus(s)));
  return alice + bob;
}

double quantum_reference(double a, double b) { return -std::cos(a - b); }

ChameleonPair as_chameleon(const SingletFunctionalModel& model) {
  require_grid(model);
  const StateSpace space = model.space();
  auto resolver = [space](double side_sign) {
    return [space, side_sign](const MeasurementSetting& s) -> std::optional<SettingDynamics> {
      if (s.parameters.size() != 1) return std::nullopt;
      return projection_dynamics(space, s.angle_value(), side_sign);
    };
  };
  ChameleonPair pair{ChameleonMeasurement("R1 alice"), ChameleonMeasurement("R1 bob")};
  pair.alice.with_resolver(resolver(1.0)).with_spectrum({-1.0, 1.0}).mark_physical();
  pair.bob.with_resolver(resolver(-1.0)).with_spectrum({-1.0, 1.0}).mark_physical();
  return pair;
}

MeasurementSetting pair_setting(double a, double b) {
  require_finite(a, b);
  MeasurementSetting s = MeasurementSetting::named("a=" + std::to_string(a) + ",b=" + std::to_string(b));
  s.parameters = {reduce_angle(a), reduce_angle(b)};
  return s;
}

ChameleonMeasurement as_chameleon(const SingletOutcomeModel& model, std::size_t hidden_cells) {
  const StateSpace hidden = StateSpace::circle(hidden_cells);
  const StateSpace outcomes = SingletOutcomeModel::outcome_space();
  std::vector<double> products(4);
  for (std::size_t k = 0; k < 4; ++k) {
    products[k] = SingletOutcomeModel::alice_values[k] * SingletOutcomeModel::bob_values[k];
  }
  const PhysicalVariable observed = PhysicalVariable::sampled(outcomes, products, "s*t");

  ChameleonMeasurement m("R2 outcome pmf");
  m.with_resolver([model, hidden, outcomes, observed](
                      const MeasurementSetting& s) -> std::optional<SettingDynamics> {
     if (s.parameters.size() != 2) return std::nullopt;
     const SingletOutcomeModel::Pmf pmf = model.pmf(s.parameters[0], s.parameters[1]);
     ForwardMap forward = [pmf, hidden, outcomes](const StatisticalState& p) {
       if (!(p.space() == hidden)) throw Error(ErrorCode::space_mismatch, "state not on the hidden circle");
       const double mass = p.total_mass();
       return StatisticalState::weights(outcomes, {mass * pmf[0], mass * pmf[1], mass * pmf[2],
                                                   mass * pmf[3]});
     };
     BackwardMap backward = [pmf, hidden, outcomes](const PhysicalVariable& g) {
       if (!(g.space() == outcomes)) throw Error(ErrorCode::space_mismatch, "variable not on the outcome space");
       const std::vector<double> v = g.values();
       double c = 0.0;
       for (std::size_t k = 0; k < 4; ++k) c += v[k] * pmf[k];
       return PhysicalVariable::constant(hidden, c);
     };
     return SettingDynamics{std::move(forward), std::move(backward), 1.0, observed};
   })
      .with_spectrum({-1.0, 1.0})
      .mark_physical();
  return m;
}

}  // namespace lhv::epr
