#include "lhv/cli/scenarios.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>

#include "lhv/chameleon.hpp"
#include "lhv/eprbohm.hpp"
#include "lhv/error.hpp"
#include "lhv/kolmogorov.hpp"
#include "lhv/sampling.hpp"
#include "lhv/simd/kernels.hpp"

#ifndef LHV_VERSION
#define LHV_VERSION "0.0.0"
#endif

namespace lhv::cli {
namespace {

using nlohmann::json;

const Cell blank = std::string();

// Ornstein-Uhlenbeck setup shared by the diffusion scenarios.
struct OuSetup {
  double theta;
  double sigma;
  double m0;
  double v0;
  double horizon;
  DiffusionSpec spec;
  SolverConfig solver;

  explicit OuSetup(const ScenarioConfig& cfg)
      : theta(cfg.real("theta")),
        sigma(cfg.real("sigma")),
        m0(cfg.real("initial_mean")),
        v0(cfg.real("initial_variance")),
        horizon(cfg.real("horizon")),
        spec(DiffusionSpec::ornstein_uhlenbeck(theta, 0.0, sigma)) {
    solver.dt = cfg.real("dt");
    solver.scheme = cfg.text("scheme") == "explicit-euler" ? Scheme::explicit_euler
                                                           : Scheme::crank_nicolson;
  }

  StateSpace space(const ScenarioConfig& cfg, std::size_t cells) const {
    return StateSpace::interval(cfg.real("lower"), cfg.real("upper"), cells);
  }
  TimeWindow window() const { return TimeWindow(0.0, horizon); }
  double exact_mean() const { return m0 * std::exp(-theta * horizon); }
  double exact_variance() const {
    const double stationary = sigma * sigma / (2.0 * theta);
    return stationary + (v0 - stationary) * std::exp(-2.0 * theta * horizon);
  }
};

json solver_provenance(const SolverConfig& s) {
  return {{"dt", s.dt},
          {"scheme", s.scheme == Scheme::crank_nicolson ? "crank-nicolson" : "explicit-euler"},
          {"negativity_tolerance", s.negativity_tolerance},
          {"sigma_floor", s.sigma_floor}};
}

ScenarioResult ou_oracle(const ScenarioConfig& cfg, unsigned threads) {
  const OuSetup ou(cfg);
  const StateSpace space = ou.space(cfg, cfg.count("cells"));
  const StatisticalState p0 = StatisticalState::gaussian(space, ou.m0, ou.v0);
  const StatisticalState p = forward_evolve(ou.spec, p0, ou.window(), ou.solver);

  const PhysicalVariable g = PhysicalVariable::analytic(space, [](double y) { return y; }, "y");
  const std::vector<double> u = backward_evolve(ou.spec, g, ou.window(), ou.solver).values();
  const double decay = std::exp(-ou.theta * ou.horizon);
  double backward_error = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    backward_error = std::max(backward_error, std::abs(u[i] - space.point(i) * decay));
  }

  Table t{"ou-oracle",
          {{"quantity", "-"}, {"method", "-"}, {"unit", "-"}, {"value", "unit"},
           {"reference", "unit"}, {"abs_error", "unit"}},
          {}};
  auto row = [&](std::string q, std::string method, std::string unit, double value, double ref) {
    t.add_row({std::move(q), std::move(method), std::move(unit), value, ref, std::abs(value - ref)});
  };
  row("mean", "forward-pde", "state", p.mean(), ou.exact_mean());
  row("variance", "forward-pde", "state^2", p.variance(), ou.exact_variance());
  row("backward_max_error", "backward-pde", "state", backward_error, 0.0);

  json prov = {{"solver", solver_provenance(ou.solver)},
               {"cells", cfg.count("cells")},
               {"reference", "closed-form OU moments"}};
  if (const std::uint64_t paths = cfg.count("paths"); paths > 0) {
    const ParticleEnsemble e = simulate_paths(ou.spec, p0, ou.window(), paths, cfg.real("path_dt"),
                                              *cfg.seed, threads);
    double mean = 0.0;
    for (double x : e.points) mean += x;
    mean /= static_cast<double>(e.size());
    double var = 0.0;
    for (double x : e.points) var += (x - mean) * (x - mean);
    var /= static_cast<double>(e.size() - (e.size() > 1 ? 1 : 0));
    row("mean", "euler-maruyama", "state", mean, ou.exact_mean());
    row("variance", "euler-maruyama", "state^2", var, ou.exact_variance());
    row("kde_l1_vs_pde", "euler-maruyama", "1", l1_distance(kernel_density(e, space), p), 0.0);
    prov["paths"] = paths;
    prov["path_dt"] = cfg.real("path_dt");
  }
  return {{std::move(t)}, std::move(prov)};
}

ScenarioResult conjugation(const ScenarioConfig& cfg, unsigned) {
  OuSetup ou(cfg);
  ou.solver.adjoint = cfg.text("adjoint") == "transpose" ? AdjointForm::transpose : AdjointForm::direct;
  Table t{"conjugation",
          {{"cells", "count"}, {"g", "-"}, {"classical", "g units"}, {"observational", "g units"},
           {"defect", "g units"}},
          {}};
  const std::vector<std::pair<std::string, std::function<double(double)>>> family = {
      {"y", [](double y) { return y; }},
      {"y^2", [](double y) { return y * y; }},
      {"cos(y)", [](double y) { return std::cos(y); }},
  };
  for (std::uint64_t n : cfg.counts("cells_list")) {
    const StateSpace space = ou.space(cfg, n);
    const StatisticalState p0 = StatisticalState::gaussian(space, ou.m0, ou.v0);
    for (const auto& [name, fn] : family) {
      const ConjugationSides sides =
          conjugation_sides(ou.spec, p0, PhysicalVariable::analytic(space, fn, name), ou.window(), ou.solver);
      t.add_row({static_cast<std::int64_t>(n), name, sides.classical, sides.observational, sides.defect()});
    }
  }
  json prov = {{"solver", solver_provenance(ou.solver)},
               {"adjoint", cfg.text("adjoint")},
               {"tolerance", 1e-3}};
  return {{std::move(t)}, std::move(prov)};
}

ScenarioResult chameleon_averages(const ScenarioConfig& cfg, unsigned) {
  const OuSetup ou(cfg);
  const StateSpace space = ou.space(cfg, cfg.count("cells"));
  const StatisticalState p0 = StatisticalState::gaussian(space, ou.m0, ou.v0);
  const PhysicalVariable y = PhysicalVariable::analytic(space, [](double x) { return x; }, "y");
  const double a = cfg.real("a");
  const double b = cfg.real("b");

  Table t{"chameleon-averages",
          {{"model", "-"}, {"role", "-"}, {"setting", "-"}, {"classical", "1"},
           {"observational", "1"}, {"gap", "1"}},
          {}};
  auto report = [&](const std::string& model, const std::string& role, const ChameleonMeasurement& m,
                    const MeasurementSetting& s, const StatisticalState& initial) {
    const AverageReport r = average_report(m, s, initial);
    t.add_row({model, role, s.label, r.classical, r.observational, r.gap});
  };

  const MeasurementSetting ou_setting = MeasurementSetting::named("y");
  ChameleonMeasurement diffusion("ou-diffusion");
  diffusion.add(ou_setting, diffusion_dynamics(ou.spec, ou.window(), ou.solver, y));
  report("ou-diffusion", "dual-pair", diffusion, ou_setting, p0);

  ChameleonMeasurement adjoint("ou-exact-adjoint");
  adjoint.add(ou_setting, exact_adjoint_dynamics(ou.spec, ou.window(), ou.solver, y));
  report("ou-exact-adjoint", "dual-pair", adjoint, ou_setting, p0);

  const epr::SingletFunctionalModel functional{cfg.count("hidden_cells")};
  const epr::ChameleonPair sides = epr::as_chameleon(functional);
  const StatisticalState hidden = StatisticalState::uniform(functional.space());
  report("functional-alice", "dual-pair", sides.alice, MeasurementSetting::angle("a", a), hidden);
  report("functional-bob", "dual-pair", sides.bob, MeasurementSetting::angle("b", b), hidden);

  const ChameleonMeasurement outcome =
      epr::as_chameleon(epr::SingletOutcomeModel::standard(), cfg.count("hidden_cells"));
  report("outcome-pmf", "dual-pair", outcome, epr::pair_setting(a, b), hidden);

  ChameleonMeasurement mismatched("mismatched");
  mismatched.add(ou_setting, mismatched_dynamics(ou.spec, DiffusionSpec::constant(0.0, ou.sigma),
                                                 ou.window(), ou.solver, y));
  report("mismatched", "negative-control", mismatched, ou_setting, p0);

  json prov = {{"solver", solver_provenance(ou.solver)},
               {"gap_tolerance_dual_pairs", 1e-3},
               {"gap_floor_negative_control", 0.1}};
  return {{std::move(t)}, std::move(prov)};
}

epr::Model epr_model(const ScenarioConfig& cfg) {
  if (cfg.text("model") == "outcome") return epr::SingletOutcomeModel::standard();
  return epr::SingletFunctionalModel{cfg.count("cells")};
}

epr::Method epr_method(const ScenarioConfig& cfg) {
  return cfg.text("method") == "monte-carlo" ? epr::Method::monte_carlo : epr::Method::quadrature;
}

Cell optional_cell(const std::optional<double>& x) { return x ? Cell{*x} : blank; }

ScenarioResult epr_correlation(const ScenarioConfig& cfg, unsigned threads) {
  const epr::Model model = epr_model(cfg);
  const epr::Method method = epr_method(cfg);
  const double a = cfg.real("a");
  const double b0 = cfg.real("b");
  const std::uint64_t points = cfg.count("points");
  Table t{"epr-correlation",
          {{"model", "-"}, {"method", "-"}, {"a", "rad"}, {"b", "rad"}, {"value", "1"},
           {"reference", "1"}, {"abs_error", "1"}, {"std_error", "1"}, {"samples", "count"}},
          {}};
  for (std::uint64_t k = 0; k < points; ++k) {
    const double b = b0 + two_pi * static_cast<double>(k) / static_cast<double>(points);
    std::optional<epr::MonteCarloOptions> mc;
    if (method == epr::Method::monte_carlo) {
      mc = epr::MonteCarloOptions{cfg.count("samples"), derive_seed(*cfg.seed, k), threads};
    }
    const epr::CorrelationResult r = epr::correlation(model, a, b, method, mc);
    const double ref = epr::quantum_reference(a, b);
    t.add_row({cfg.text("model"), cfg.text("method"), a, b, r.value, ref, std::abs(r.value - ref),
               optional_cell(r.mc_std_error), static_cast<std::int64_t>(r.samples)});
  }
  json prov = {{"method", cfg.text("method")},
               {"reference", "-cos(a - b)"},
               {"quadrature_tolerance", 1e-9}};
  if (method == epr::Method::monte_carlo) prov["acceptance"] = "|value - reference| <= 3 std_error";
  return {{std::move(t)}, std::move(prov)};
}

ScenarioResult epr_chsh(const ScenarioConfig& cfg, unsigned threads) {
  const epr::ChshAngles angles{cfg.real("a"), cfg.real("a_prime"), cfg.real("b"), cfg.real("b_prime")};
  const epr::Method method = epr_method(cfg);
  std::optional<epr::MonteCarloOptions> mc;
  if (method == epr::Method::monte_carlo) {
    mc = epr::MonteCarloOptions{cfg.count("samples"), *cfg.seed, threads};
  }
  const epr::ChshResult r = epr::chsh(epr_model(cfg), angles, method, mc);
  const epr::ChshResult q = epr::chsh(
      [](double a, double b, std::size_t) { epr::CorrelationResult r;
        r.value = epr::quantum_reference(a, b);
        return r;
      },
      angles);
  Table t{"epr-chsh",
          {{"model", "-"}, {"method", "-"}, {"E_ab", "1"}, {"E_a'b", "1"}, {"E_a'b'", "1"},
           {"E_ab'", "1"}, {"S", "1"}, {"abs_S", "1"}, {"reference_S", "1"}, {"std_error", "1"}},
          {}};
  t.add_row({cfg.text("model"), cfg.text("method"), r.terms[0].value, r.terms[1].value,
             r.terms[2].value, r.terms[3].value, r.s, r.magnitude(), q.s, optional_cell(r.std_error)});
  json prov = {{"method", cfg.text("method")},
               {"combination", "S = E(a,b) + E(a',b) + E(a',b') - E(a,b')"},
               {"quadrature_tolerance", 1e-6}};
  return {{std::move(t)}, std::move(prov)};
}

sampling::DetectionModel detection_model(const std::string& name) {
  if (name == "no-loss") return sampling::DetectionModel::no_loss();
  if (name == "zero-detection") return sampling::DetectionModel::zero_detection();
  return sampling::DetectionModel::standard();
}

std::optional<double> try_value(const std::function<epr::CorrelationResult()>& fn) {
  try {
    return fn().value;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::degenerate_subensemble) return std::nullopt;
    throw;
  }
}

ScenarioResult loophole(const ScenarioConfig& cfg, unsigned threads) {
  const sampling::DetectionModel m = detection_model(cfg.text("model"));
  const double a = cfg.real("a"), a2 = cfg.real("a_prime"), b = cfg.real("b"), b2 = cfg.real("b_prime");
  const std::vector<std::pair<double, double>> settings = {{a, b}, {a2, b}, {a2, b2}, {a, b2}};
  const std::vector<sampling::CoincidenceCounts> runs =
      sampling::run_loophole_experiment(m, settings, cfg.count("pairs"), *cfg.seed, threads);

  Table counts{"counts",
               {{"a", "rad"}, {"b", "rad"}, {"n_pp", "count"}, {"n_pm", "count"}, {"n_mp", "count"},
                {"n_mm", "count"}, {"alice_singles", "count"}, {"bob_singles", "count"},
                {"undetected", "count"}, {"emitted", "count"}, {"coincidence_rate", "1"},
                {"E_hat", "1"}, {"std_error", "1"}, {"E_postselected", "1"}, {"E_full", "1"}},
               {}};
  std::array<std::optional<sampling::CorrelationEstimate>, 4> estimates;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const sampling::CoincidenceCounts& c = runs[k];
    estimates[k] = c.correlation();
    const auto post = try_value([&] { return sampling::postselected_correlation(m, c.a, c.b); });
    const double full = sampling::full_ensemble_correlation(m, c.a, c.b).value;
    auto n = [](std::uint64_t x) { return Cell{static_cast<std::int64_t>(x)}; };
    counts.add_row({c.a, c.b, n(c.counts[0]), n(c.counts[1]), n(c.counts[2]), n(c.counts[3]),
                    n(c.alice_singles), n(c.bob_singles), n(c.undetected), n(c.emitted),
                    static_cast<double>(c.coincidences()) / static_cast<double>(c.emitted),
                    estimates[k] ? Cell{estimates[k]->value} : blank,
                    estimates[k] ? Cell{estimates[k]->std_error} : blank, optional_cell(post), full});
  }

  Table chsh{"chsh",
             {{"estimator", "-"}, {"S", "1"}, {"std_error", "1"}},
             {}};
  const bool all = std::all_of(estimates.begin(), estimates.end(), [](const auto& e) { return e.has_value(); });
  if (all) {
    const double s = estimates[0]->value + estimates[1]->value + estimates[2]->value - estimates[3]->value;
    double var = 0.0;
    for (const auto& e : estimates) var += e->std_error * e->std_error;
    chsh.add_row({std::string("event-by-event"), s, std::sqrt(var)});
  } else {
    chsh.add_row({std::string("event-by-event"), blank, blank});
  }
  const epr::ChshAngles angles{a, a2, b, b2};
  try {
    chsh.add_row({std::string("postselected-quadrature"), sampling::postselected_chsh(m, angles).s, blank});
  } catch (const Error& e) {
    if (e.code() != ErrorCode::degenerate_subensemble) throw;
    chsh.add_row({std::string("postselected-quadrature"), blank, blank});
  }
  chsh.add_row({std::string("full-ensemble-quadrature"), sampling::full_ensemble_chsh(m, angles).s, blank});

  json prov = {{"model", cfg.text("model")},
               {"pairs_per_setting", cfg.count("pairs")},
               {"estimator", "E_hat = sum s t n(s,t) / sum n(s,t); std_error = sqrt((1 - E_hat^2) / N)"},
               {"quadrature", "30-point Gauss-Legendre between outcome/detection breakpoints"}};
  return {{std::move(counts), std::move(chsh)}, std::move(prov)};
}

ScenarioResult fair_sampling(const ScenarioConfig& cfg, unsigned) {
  const sampling::DetectionModel m = detection_model(cfg.text("model"));
  const double a = cfg.real("a"), b = cfg.real("b"), c = cfg.real("c"), d = cfg.real("d");
  const std::size_t cells = cfg.count("cells");
  Table t{"fair-sampling",
          {{"a", "rad"}, {"b", "rad"}, {"c", "rad"}, {"d", "rad"}, {"defect_l1", "1"},
           {"coincidence_rate_ab", "1"}, {"coincidence_rate_cd", "1"}, {"E_postselected_ab", "1"},
           {"E_postselected_cd", "1"}},
          {}};
  t.add_row({a, b, c, d, sampling::fair_sampling_defect(m, {a, b}, {c, d}, cells),
             sampling::detection_rate(m, a, b, sampling::Side::coincidence),
             sampling::detection_rate(m, c, d, sampling::Side::coincidence),
             sampling::postselected_correlation(m, a, b).value,
             sampling::postselected_correlation(m, c, d).value});
  json prov = {{"model", cfg.text("model")},
               {"cells", cells},
               {"metric", "L1 distance between restricted densities on the grid"}};
  return {{std::move(t)}, std::move(prov)};
}

using Runner = ScenarioResult (*)(const ScenarioConfig&, unsigned);

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> table = {
      {"ou-oracle", ou_oracle},          {"conjugation", conjugation},
      {"chameleon-averages", chameleon_averages}, {"epr-correlation", epr_correlation},
      {"epr-chsh", epr_chsh},            {"loophole", loophole},
      {"fair-sampling", fair_sampling},
  };
  return table;
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& cfg, unsigned threads) {
  const auto it = runners().find(cfg.scenario);
  if (it == runners().end()) throw Error(ErrorCode::config, "unknown scenario '" + cfg.scenario + "'");
  return it->second(cfg, std::max(1u, threads));
}

RunReport execute(const ScenarioConfig& cfg, unsigned threads) {
  const auto start = std::chrono::steady_clock::now();
  ScenarioResult result = run_scenario(cfg, threads);
  const auto stop = std::chrono::steady_clock::now();

  RunReport report;
  report.duration_seconds = std::chrono::duration<double>(stop - start).count();
  const std::filesystem::path dir = cfg.output_dir;

  const bool single = result.tables.size() == 1;
  if (cfg.format == OutputFormat::csv) {
    for (const Table& t : result.tables) {
      const std::filesystem::path path =
          dir / (single ? cfg.scenario + ".csv" : cfg.scenario + "-" + t.name + ".csv");
      write_file(path, to_csv(t));
      report.files.push_back(path);
    }
  } else {
    json doc;
    doc["scenario"] = cfg.scenario;
    doc["version"] = LHV_VERSION;
    doc["seed"] = cfg.seed ? json(*cfg.seed) : json(nullptr);
    // The output section is left out so the document does not depend on where it is written.
    for (const auto& [section, body] : echo(cfg)) {
      if (section == "output") continue;
      for (const auto& [key, value] : body) doc["config"][section][key] = value;
    }
    doc["tables"] = json::array();
    for (const Table& t : result.tables) doc["tables"].push_back(to_json(t));
    const std::filesystem::path path = dir / (cfg.scenario + ".json");
    write_file(path, doc.dump(2) + "\n");
    report.files.push_back(path);
  }

  Manifest m;
  m.config = cfg;
  m.version = LHV_VERSION;
  m.threads = std::max(1u, threads);
  m.duration_seconds = report.duration_seconds;
  m.kernel_isa = std::string(simd::to_string(simd::active_isa()));
  m.provenance = std::move(result.provenance);
  for (const auto& f : report.files) m.files.push_back(f.filename().string());
  report.manifest = dir / (cfg.scenario + ".manifest.json");
  write_file(report.manifest, to_json(m).dump(2) + "\n");
  return report;
}

std::vector<CheckLine> self_check() {
  std::vector<CheckLine> lines;
  auto add = [&](std::string name, bool ok, std::string detail) {
    lines.push_back({std::move(name), ok, std::move(detail)});
  };
  auto fmt = [](double x) { return format_real(x); };

  const DiffusionSpec ou = DiffusionSpec::ornstein_uhlenbeck(1.0, 0.0, std::numbers::sqrt2);
  const TimeWindow window(0.0, 1.0);
  const double mean_ref = 2.0 * std::exp(-1.0);
  const double var_ref = 1.0 + (0.25 - 1.0) * std::exp(-2.0);
  {
    const StateSpace space = StateSpace::interval(-8.0, 8.0, 512);
    const StatisticalState p = forward_evolve(ou, StatisticalState::gaussian(space, 2.0, 0.25), window);
    const double em = std::abs(p.mean() - mean_ref);
    const double ev = std::abs(p.variance() - var_ref);
    add("ou forward moments", em <= 1e-3 && ev <= 1e-3,
        "mean error " + fmt(em) + ", variance error " + fmt(ev));
  }
  {
    double worst = 0.0;
    const StateSpace space = StateSpace::interval(-8.0, 8.0, 512);
    const StatisticalState p0 = StatisticalState::gaussian(space, 2.0, 0.25);
    for (const auto& fn : std::vector<std::function<double(double)>>{
             [](double y) { return y; }, [](double y) { return y * y; },
             [](double y) { return std::cos(y); }}) {
      worst = std::max(worst, conjugation_defect(ou, p0, PhysicalVariable::analytic(space, fn), window));
    }
    add("conjugation defect", worst <= 1e-3, "max defect at n=512: " + fmt(worst));
  }
  const double tsirelson = 2.0 * std::numbers::sqrt2;
  const epr::ChshAngles angles = epr::ChshAngles::standard();
  for (const auto& [name, model] : std::vector<std::pair<std::string, epr::Model>>{
           {"chsh functional model", epr::SingletFunctionalModel{}},
           {"chsh outcome model", epr::SingletOutcomeModel::standard()}}) {
    const double s = epr::chsh(model, angles, epr::Method::quadrature).magnitude();
    add(name, std::abs(s - tsirelson) <= 1e-6, "|S| = " + fmt(s));
  }
  {
    const sampling::DetectionModel m = sampling::DetectionModel::standard();
    const double post = sampling::postselected_chsh(m, angles).magnitude();
    const double full = sampling::full_ensemble_chsh(m, angles).magnitude();
    add("chsh postselected", std::abs(post - tsirelson) <= 1e-6, "|S| = " + fmt(post));
    add("chsh full ensemble", std::abs(full - 2.0) <= 1e-9, "|S| = " + fmt(full));
  }
  return lines;
}

}  // namespace lhv::cli
