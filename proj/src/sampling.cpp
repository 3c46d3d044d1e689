#include "lhv/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

#include "lhv/error.hpp"

namespace lhv::sampling {
namespace {

using std::numbers::pi;

constexpr std::size_t fixed_panels = 32;

void require_finite(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b)) {
    throw Error(ErrorCode::invalid_argument, "measurement angles must be finite");
  }
}

std::vector<double> default_breakpoints(double a, double b) {
  return {a - pi / 2.0, a + pi / 2.0, b - pi / 2.0, b + pi / 2.0};
}

DetectionModel with_detection(double eta) {
  DetectionModel m = DetectionModel::standard();
  m.alice_detect = [eta](double, double) { return eta; };
  m.bob_detect = [eta](double, double) { return eta; };
  return m;
}

// Pre-detection view of a model: same outcome rules, every event detected.
DetectionModel no_loss_view(DetectionModel m) {
  m.alice_detect = [](double, double) { return 1.0; };
  m.bob_detect = [](double, double) { return 1.0; };
  return m;
}

std::vector<double> panel_edges(const DetectionModel& m, double a, double b) {
  std::vector<double> edges;
  edges.reserve(fixed_panels + 8);
  for (std::size_t k = 0; k <= fixed_panels; ++k) {
    edges.push_back(two_pi * static_cast<double>(k) / static_cast<double>(fixed_panels));
  }
  if (m.breakpoints) {
    for (double x : m.breakpoints(a, b)) edges.push_back(reduce_angle(x));
  }
  std::sort(edges.begin(), edges.end());
  std::vector<double> out;
  for (double x : edges) {
    if (out.empty() || x - out.back() > 1e-14) out.push_back(x);
  }
  return out;
}

struct DetectionCounts {
  std::array<std::uint64_t, 4> counts{};
  std::uint64_t alice_singles = 0;
  std::uint64_t bob_singles = 0;
  std::uint64_t undetected = 0;
};

std::size_t outcome_index(double s, double t) { return (s > 0.0 ? 0 : 2) + (t > 0.0 ? 0 : 1); }

CoincidenceCounts run_setting(const DetectionModel& m, double a, double b, std::size_t pairs,
                              Seed seed, unsigned threads) {
  std::vector<DetectionCounts> parts(chunk_count(pairs, default_chunk_size));
  for_each_chunk(pairs, default_chunk_size, threads,
                 [&](std::size_t chunk, std::size_t begin, std::size_t end) {
                   Rng rng(derive_seed(seed, chunk));
                   DetectionCounts c;
                   for (std::size_t i = begin; i < end; ++i) {
                     const double lambda = two_pi * rng.uniform();
                     const double s = m.alice_outcome(lambda, a);
                     const double t = m.bob_outcome(lambda, b);
                     // Both draws happen every event so streams stay aligned across models.
                     const bool alice = rng.bernoulli(m.alice_detect(lambda, a));
                     const bool bob = rng.bernoulli(m.bob_detect(lambda, b));
                     if (alice && bob) {
                       ++c.counts[outcome_index(s, t)];
                     } else if (alice) {
                       ++c.alice_singles;
                     } else if (bob) {
                       ++c.bob_singles;
                     } else {
                       ++c.undetected;
                     }
                   }
                   parts[chunk] = c;
                 });
  CoincidenceCounts out;
  out.a = a;
  out.b = b;
  out.emitted = pairs;
  out.seed = seed;
  for (const DetectionCounts& c : parts) {
    for (std::size_t k = 0; k < 4; ++k) out.counts[k] += c.counts[k];
    out.alice_singles += c.alice_singles;
    out.bob_singles += c.bob_singles;
    out.undetected += c.undetected;
  }
  return out;
}

const MonteCarloOptions& require_mc(const std::optional<MonteCarloOptions>& mc) {
  if (!mc) throw Error(ErrorCode::config, "monte carlo correlation needs a sample count and seed");
  if (mc->count < 2) throw Error(ErrorCode::config, "monte carlo sample count must be at least 2");
  return *mc;
}

}  // namespace

DetectionModel DetectionModel::standard() {
  DetectionModel m;
  m.alice_outcome = [](double lambda, double a) { return sgn(std::cos(lambda - a)); };
  m.alice_detect = [](double lambda, double a) { return std::abs(std::cos(lambda - a)); };
  m.bob_outcome = [](double lambda, double b) { return -sgn(std::cos(lambda - b)); };
  m.bob_detect = [](double, double) { return 1.0; };
  m.breakpoints = default_breakpoints;
  return m;
}

DetectionModel DetectionModel::no_loss() { return with_detection(1.0); }

DetectionModel DetectionModel::zero_detection() { return with_detection(0.0); }

double circle_average(const DetectionModel& m, double a, double b,
                      const std::function<double(double)>& fn) {
  using boost::math::quadrature::gauss;
  const std::vector<double> edges = panel_edges(m, a, b);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    total += gauss<double, 30>::integrate(fn, edges[k], edges[k + 1]);
  }
  return total / two_pi;
}

SubEnsembleState restricted_state(const DetectionModel& m, double a, double b, std::size_t cells) {
  require_finite(a, b);
  const StateSpace space = StateSpace::circle(cells);
  std::vector<double> rho(cells);
  double mass = 0.0;
  for (std::size_t j = 0; j < cells; ++j) {
    const double lambda = space.point(j);
    rho[j] = m.alice_detect(lambda, a) * m.bob_detect(lambda, b);
    if (!(rho[j] >= 0.0 && rho[j] <= 1.0)) {
      throw Error(ErrorCode::invalid_argument, "detection probabilities must lie in [0, 1]");
    }
    mass += rho[j];
  }
  if (!(mass > 0.0)) {
    throw Error(ErrorCode::degenerate_subensemble,
                "no jointly detected events at settings (" + std::to_string(a) + ", " +
                    std::to_string(b) + ")");
  }
  mass *= space.cell_width();
  for (double& x : rho) x /= mass;
  return SubEnsembleState{a, b, StatisticalState::density(space, std::move(rho))};
}

double fair_sampling_defect(const DetectionModel& m, std::pair<double, double> first,
                            std::pair<double, double> second, std::size_t cells) {
  const SubEnsembleState p = restricted_state(m, first.first, first.second, cells);
  const SubEnsembleState q = restricted_state(m, second.first, second.second, cells);
  return l1_distance(p.state, q.state);
}

CorrelationResult postselected_correlation(const DetectionModel& m, double a, double b,
                                           Method method, std::optional<MonteCarloOptions> mc) {
  require_finite(a, b);
  if (method == Method::monte_carlo) {
    const MonteCarloOptions& opts = require_mc(mc);
    const CoincidenceCounts counts = run_setting(m, a, b, opts.count, opts.seed, opts.threads);
    const std::optional<CorrelationEstimate> e = counts.correlation();
    if (!e) {
      throw Error(ErrorCode::degenerate_subensemble, "no coincidences among " +
                                                         std::to_string(opts.count) + " pairs");
    }
    CorrelationResult r;
    r.value = e->value;
    r.method = Method::monte_carlo;
    r.mc_std_error = e->std_error;
    r.seed = opts.seed;
    r.samples = e->coincidences;
    return r;
  }
  const double denominator = circle_average(
      m, a, b, [&](double l) { return m.alice_detect(l, a) * m.bob_detect(l, b); });
  if (!(denominator > 0.0)) {
    throw Error(ErrorCode::degenerate_subensemble, "jointly detected sub-ensemble has measure zero");
  }
  const double numerator = circle_average(m, a, b, [&](double l) {
    return m.alice_outcome(l, a) * m.bob_outcome(l, b) * m.alice_detect(l, a) * m.bob_detect(l, b);
  });
  CorrelationResult r;
  r.value = numerator / denominator;
  return r;
}

CorrelationResult full_ensemble_correlation(const DetectionModel& m, double a, double b,
                                            Method method, std::optional<MonteCarloOptions> mc) {
  require_finite(a, b);
  if (method == Method::monte_carlo) {
    const MonteCarloOptions& opts = require_mc(mc);
    const CoincidenceCounts counts = run_setting(no_loss_view(m), a, b, opts.count, opts.seed,
                                                 opts.threads);
    const CorrelationEstimate e = *counts.correlation();
    CorrelationResult r;
    r.value = e.value;
    r.method = Method::monte_carlo;
    r.mc_std_error = e.std_error;
    r.seed = opts.seed;
    r.samples = opts.count;
    return r;
  }
  CorrelationResult r;
  r.value = circle_average(m, a, b, [&](double l) { return m.alice_outcome(l, a) * m.bob_outcome(l, b); });
  return r;
}

double detection_rate(const DetectionModel& m, double a, double b, Side side) {
  require_finite(a, b);
  switch (side) {
    case Side::alice:
      return circle_average(m, a, b, [&](double l) { return m.alice_detect(l, a); });
    case Side::bob:
      return circle_average(m, a, b, [&](double l) { return m.bob_detect(l, b); });
    case Side::coincidence:
      return circle_average(m, a, b, [&](double l) { return m.alice_detect(l, a) * m.bob_detect(l, b); });
  }
  return 0.0;
}

std::uint64_t CoincidenceCounts::coincidences() const noexcept {
  return counts[0] + counts[1] + counts[2] + counts[3];
}

std::optional<CorrelationEstimate> CoincidenceCounts::correlation() const {
  const std::uint64_t n = coincidences();
  if (n == 0) return std::nullopt;
  const double same = static_cast<double>(counts[0] + counts[3]);
  const double differ = static_cast<double>(counts[1] + counts[2]);
  CorrelationEstimate e;
  e.coincidences = n;
  e.value = (same - differ) / static_cast<double>(n);
  e.std_error = std::sqrt(std::max(0.0, 1.0 - e.value * e.value) / static_cast<double>(n));
  return e;
}

std::vector<CoincidenceCounts> run_loophole_experiment(
    const DetectionModel& m, const std::vector<std::pair<double, double>>& settings,
    std::size_t pairs_per_setting, Seed seed, unsigned threads) {
  if (pairs_per_setting == 0) {
    throw Error(ErrorCode::config, "pairs per setting must be at least 1");
  }
  std::vector<CoincidenceCounts> out;
  out.reserve(settings.size());
  for (std::size_t k = 0; k < settings.size(); ++k) {
    const auto [a, b] = settings[k];
    require_finite(a, b);
    out.push_back(run_setting(m, a, b, pairs_per_setting, derive_seed(seed, k), threads));
  }
  return out;
}

ChshResult postselected_chsh(const DetectionModel& m, const ChshAngles& angles, Method method,
                             std::optional<MonteCarloOptions> mc) {
  if (method == Method::monte_carlo) require_mc(mc);
  return epr::chsh(
      [&](double a, double b, std::size_t term) {
        std::optional<MonteCarloOptions> local = mc;
        if (local) local->seed = derive_seed(mc->seed, term);
        return postselected_correlation(m, a, b, method, local);
      },
      angles);
}

ChshResult full_ensemble_chsh(const DetectionModel& m, const ChshAngles& angles, Method method,
                              std::optional<MonteCarloOptions> mc) {
  if (method == Method::monte_carlo) require_mc(mc);
  return epr::chsh(
      [&](double a, double b, std::size_t term) {
        std::optional<MonteCarloOptions> local = mc;
        if (local) local->seed = derive_seed(mc->seed, term);
        return full_ensemble_correlation(m, a, b, method, local);
      },
      angles);
}

}  // namespace lhv::sampling
