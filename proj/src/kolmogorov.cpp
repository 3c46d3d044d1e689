#include "lhv/kolmogorov.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "lhv/error.hpp"
#include "lhv/simd/kernels.hpp"

namespace lhv {

DiffusionSpec DiffusionSpec::ornstein_uhlenbeck(double theta, double mean, double sigma) {
  DiffusionSpec s;
  s.drift = [theta, mean](double, double y) { return -theta * (y - mean); };
  s.diffusion = [sigma](double, double) { return sigma; };
  s.time_homogeneous = true;
  s.name = "ornstein-uhlenbeck";
  return s;
}

DiffusionSpec DiffusionSpec::constant(double drift, double sigma) {
  DiffusionSpec s;
  s.drift = [drift](double, double) { return drift; };
  s.diffusion = [sigma](double, double) { return sigma; };
  s.time_homogeneous = true;
  s.name = "constant";
  return s;
}

DiffusionSpec DiffusionSpec::frozen() {
  DiffusionSpec s = constant(0.0, 0.0);
  s.name = "frozen";
  return s;
}

TimeWindow::TimeWindow(double t0, double tau) : t0_(t0), tau_(tau) {
  if (!std::isfinite(t0) || !std::isfinite(tau) || !(tau > t0)) {
    throw Error(ErrorCode::config, "time window needs finite t0 < tau");
  }
}

Boundary resolve_boundary(const StateSpace& space, const SolverConfig& cfg) {
  if (!space.gridded()) {
    throw Error(ErrorCode::unsupported_representation, "diffusion solvers need a gridded space");
  }
  if (cfg.boundary) return *cfg.boundary;
  return space.kind() == SpaceKind::circle ? Boundary::periodic : Boundary::no_flux;
}

namespace {

double drift_at(const DiffusionSpec& spec, double t, double y) {
  const double a = spec.drift(t, y);
  if (!std::isfinite(a)) throw Error(ErrorCode::coefficient, "drift is not finite");
  return a;
}

double sigma_at(const DiffusionSpec& spec, double t, double y, double floor) {
  const double s = spec.diffusion(t, y);
  if (!std::isfinite(s)) throw Error(ErrorCode::coefficient, "diffusion is not finite");
  if (s < 0.0) throw Error(ErrorCode::coefficient, "diffusion must be nonnegative");
  return std::max(s, floor);
}

void require_grid(std::size_t n) {
  if (n < 3) throw Error(ErrorCode::invalid_argument, "diffusion solvers need at least 3 cells");
}

TridiagonalMatrix direct_adjoint(const DiffusionSpec& spec, const StateSpace& space, double t,
                                 const SolverConfig& cfg) {
  const bool periodic = resolve_boundary(space, cfg) == Boundary::periodic;
  const std::size_t n = space.size();
  require_grid(n);
  const double h = space.cell_width();
  TridiagonalMatrix w(n, periodic);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = space.point(i);
    const double a = drift_at(spec, t, y);
    const double s = sigma_at(spec, t, y, cfg.sigma_floor);
    const double d = s * s;
    w.lower[i] = -0.5 * d / (h * h) + a / (2.0 * h);
    w.diag[i] = d / (h * h);
    w.upper[i] = -0.5 * d / (h * h) - a / (2.0 * h);
  }
  if (!periodic) {
    // Ghosts f_{-1} = 2 f_0 - f_1 and f_n = 2 f_{n-1} - f_{n-2}.
    w.diag[0] += 2.0 * w.lower[0];
    w.upper[0] -= w.lower[0];
    w.lower[0] = 0.0;
    w.diag[n - 1] += 2.0 * w.upper[n - 1];
    w.lower[n - 1] -= w.upper[n - 1];
    w.upper[n - 1] = 0.0;
  }
  return w;
}

double max_sigma_squared(const DiffusionSpec& spec, const StateSpace& space, double t,
                         double floor) {
  double m = 0.0;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const double s = sigma_at(spec, t, space.point(i), floor);
    m = std::max(m, s * s);
  }
  return m;
}

std::size_t step_count(double duration, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::config, "dt must be positive");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(duration / dt - 1e-9)));
}

// One time step of dx/dt = G x: Crank-Nicolson solves
// (I - dt/2 G) x' = (I + dt/2 G) x, explicit Euler takes x' = (I + dt G) x.
class Propagator {
 public:
  Propagator(const TridiagonalMatrix& g, double dt, Scheme scheme) {
    if (scheme == Scheme::crank_nicolson) {
      rhs_ = g.shifted_identity(0.5 * dt);
      solver_ = std::make_unique<TridiagonalSolver>(g.shifted_identity(-0.5 * dt));
    } else {
      rhs_ = g.shifted_identity(dt);
    }
  }

  void advance(std::vector<double>& x, std::vector<double>& scratch) const {
    rhs_.apply(x, scratch);
    if (solver_) solver_->solve(scratch);
    x.swap(scratch);
  }

 private:
  TridiagonalMatrix rhs_;
  std::unique_ptr<TridiagonalSolver> solver_;
};

void check_cfl(const DiffusionSpec& spec, const StateSpace& space, double t, double dt,
               const SolverConfig& cfg) {
  if (cfg.scheme != Scheme::explicit_euler) return;
  const double h = space.cell_width();
  const double limit = h * h / max_sigma_squared(spec, space, t, cfg.sigma_floor);
  if (dt > limit) {
    throw Error(ErrorCode::stability, "explicit Euler step " + std::to_string(dt) +
                                          " exceeds h^2/max(sigma^2) = " + std::to_string(limit));
  }
}

// Integrates dx/dt = G(t) x over `steps` steps of size `step`. `generator_at(t)`
// builds G; `time_of(k)` gives the coefficient time for step k.
template <typename Build, typename TimeOf>
void integrate(std::vector<double>& x, std::size_t steps, double step, Scheme scheme,
               bool homogeneous, Build&& generator_at, TimeOf&& time_of) {
  std::vector<double> scratch(x.size());
  std::unique_ptr<Propagator> prop;
  for (std::size_t k = 0; k < steps; ++k) {
    if (!prop || !homogeneous) prop = std::make_unique<Propagator>(generator_at(time_of(k)), step, scheme);
    prop->advance(x, scratch);
  }
}

}  // namespace

TridiagonalMatrix assemble_generator(const DiffusionSpec& spec, const StateSpace& space, double t,
                                     const SolverConfig& cfg) {
  const bool periodic = resolve_boundary(space, cfg) == Boundary::periodic;
  const std::size_t n = space.size();
  require_grid(n);
  const double h = space.cell_width();

  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = sigma_at(spec, t, space.point(i), cfg.sigma_floor);
    d[i] = s * s;
  }

  TridiagonalMatrix l(n, periodic);
  // Face f sits between cell f and cell f+1 (mod n when periodic).
  const std::size_t faces = periodic ? n : n - 1;
  for (std::size_t f = 0; f < faces; ++f) {
    const std::size_t left = f;
    const std::size_t right = (f + 1) % n;
    const double a = drift_at(spec, t, space.lower() + static_cast<double>(f + 1) * space.cell_width());
    // Flux F = cl * p_left + cr * p_right.
    const double cl = 0.5 * a + 0.5 * d[left] / h;
    const double cr = 0.5 * a - 0.5 * d[right] / h;
    // Row `left` loses F/h, row `right` gains F/h.
    l.diag[left] -= cl / h;
    l.upper[left] -= cr / h;
    l.lower[right] += cl / h;
    l.diag[right] += cr / h;
  }
  return l;
}

TridiagonalMatrix assemble_adjoint(const DiffusionSpec& spec, const StateSpace& space, double t,
                                   const SolverConfig& cfg) {
  if (cfg.adjoint == AdjointForm::direct) return direct_adjoint(spec, space, t, cfg);
  TridiagonalMatrix w = assemble_generator(spec, space, t, cfg).transposed();
  for (std::size_t i = 0; i < w.size(); ++i) {
    w.lower[i] = -w.lower[i];
    w.diag[i] = -w.diag[i];
    w.upper[i] = -w.upper[i];
  }
  return w;
}

PhysicalVariable generator_apply(const DiffusionSpec& spec, const StatisticalState& p, double t,
                                 const SolverConfig& cfg) {
  if (p.representation() != StatisticalState::Representation::density) {
    throw Error(ErrorCode::unsupported_representation, "generator needs a grid density");
  }
  const TridiagonalMatrix l = assemble_generator(spec, p.space(), t, cfg);
  return PhysicalVariable::sampled(p.space(), l.apply(p.values()), "L(p)");
}

PhysicalVariable adjoint_apply(const DiffusionSpec& spec, const PhysicalVariable& f, double t,
                               const SolverConfig& cfg) {
  if (!f.space().gridded()) {
    throw Error(ErrorCode::unsupported_representation, "adjoint operator needs a gridded space");
  }
  const TridiagonalMatrix w = assemble_adjoint(spec, f.space(), t, cfg);
  return PhysicalVariable::sampled(f.space(), w.apply(f.values()), "W(f)");
}

StatisticalState forward_evolve(const DiffusionSpec& spec, const StatisticalState& p0,
                                const TimeWindow& window, const SolverConfig& cfg) {
  if (p0.representation() != StatisticalState::Representation::density) {
    throw Error(ErrorCode::unsupported_representation, "forward solver needs a grid density");
  }
  if (!p0.is_normalized()) throw Error(ErrorCode::invalid_argument, "initial state is not normalized");

  const StateSpace& space = p0.space();
  const std::size_t steps = step_count(window.duration(), cfg.dt);
  const double step = window.duration() / static_cast<double>(steps);
  const bool cn = cfg.scheme == Scheme::crank_nicolson;

  std::vector<double> p(p0.values().begin(), p0.values().end());
  integrate(
      p, steps, step, cfg.scheme, spec.time_homogeneous,
      [&](double t) {
        check_cfl(spec, space, t, step, cfg);
        return assemble_generator(spec, space, t, cfg);
      },
      [&](std::size_t k) { return window.t0() + (static_cast<double>(k) + (cn ? 0.5 : 0.0)) * step; });

  const double mass = simd::sum(p) * space.cell_width();
  if (!(std::abs(mass - 1.0) <= 1e-6)) {
    throw Error(ErrorCode::stability, "forward solve lost mass: " + std::to_string(mass));
  }
  return StatisticalState::from_solver(space, std::move(p), cfg.negativity_tolerance);
}

PhysicalVariable backward_evolve(const DiffusionSpec& spec, const PhysicalVariable& g,
                                 const TimeWindow& window, const SolverConfig& cfg) {
  const StateSpace& space = g.space();
  resolve_boundary(space, cfg);
  const std::size_t steps = step_count(window.duration(), cfg.dt);
  const double step = window.duration() / static_cast<double>(steps);
  const bool cn = cfg.scheme == Scheme::crank_nicolson;

  // In reversed time r = tau - s the backward equation reads df/dr = -W f.
  std::vector<double> f = g.values();
  integrate(
      f, steps, step, cfg.scheme, spec.time_homogeneous,
      [&](double t) {
        check_cfl(spec, space, t, step, cfg);
        TridiagonalMatrix w = assemble_adjoint(spec, space, t, cfg);
        for (std::size_t i = 0; i < w.size(); ++i) {
          w.lower[i] = -w.lower[i];
          w.diag[i] = -w.diag[i];
          w.upper[i] = -w.upper[i];
        }
        return w;
      },
      [&](std::size_t k) { return window.tau() - (static_cast<double>(k) + (cn ? 0.5 : 0.0)) * step; });

  for (double v : f) {
    if (!std::isfinite(v)) throw Error(ErrorCode::stability, "backward solve diverged");
  }
  return PhysicalVariable::sampled(space, std::move(f), g.name().empty() ? "U(g)" : "U(" + g.name() + ")");
}

ParticleEnsemble simulate_paths(const DiffusionSpec& spec, const StatisticalState& p0,
                                const TimeWindow& window, std::size_t path_count, double dt,
                                Seed seed, unsigned threads) {
  if (path_count == 0) throw Error(ErrorCode::empty_ensemble, "path count must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::config, "dt must be positive");
  const StateSpace& space = p0.space();
  if (!space.gridded()) {
    throw Error(ErrorCode::unsupported_representation, "paths need an interval or circle");
  }

  const Sampler sampler(p0);
  const std::size_t steps = step_count(window.duration(), dt);
  const double step = window.duration() / static_cast<double>(steps);
  const bool periodic = space.kind() == SpaceKind::circle;
  const double lo = space.lower();
  const double hi = space.upper();

  ParticleEnsemble out;
  out.seed = seed;
  out.points.resize(path_count);

  for_each_chunk(path_count, default_chunk_size, threads,
                 [&](std::size_t chunk, std::size_t begin, std::size_t end) {
    Rng rng(derive_seed(seed, chunk));
    const std::size_t m = end - begin;
    std::span<double> y(out.points.data() + begin, m);
    for (double& v : y) v = sampler.draw(rng);

    std::vector<double> drift(m);
    std::vector<double> diffusion(m);
    std::vector<double> noise(m);
    for (std::size_t k = 0; k < steps; ++k) {
      const double t = window.t0() + static_cast<double>(k) * step;
      for (std::size_t i = 0; i < m; ++i) {
        drift[i] = drift_at(spec, t, y[i]);
        diffusion[i] = sigma_at(spec, t, y[i], 0.0);
        noise[i] = rng.normal();
      }
      simd::em_step(y, drift, diffusion, noise, step);
      for (double& v : y) {
        if (periodic) {
          v = reduce_angle(v);
          continue;
        }
        // Fold back until inside; a single reflection suffices unless a step
        // crosses the whole domain.
        while (v < lo || v > hi) v = v < lo ? 2.0 * lo - v : 2.0 * hi - v;
      }
    }
  });
  return out;
}

double ConjugationSides::defect() const noexcept { return std::abs(classical - observational); }

ConjugationSides conjugation_sides(const DiffusionSpec& spec, const StatisticalState& p0,
                                   const PhysicalVariable& g, const TimeWindow& window,
                                   const SolverConfig& cfg) {
  if (!(p0.space() == g.space())) {
    throw Error(ErrorCode::space_mismatch, "state and variable must share a state space");
  }
  ConjugationSides sides{};
  sides.classical = average(backward_evolve(spec, g, window, cfg), p0);
  sides.observational = average(g, forward_evolve(spec, p0, window, cfg));
  return sides;
}

double conjugation_defect(const DiffusionSpec& spec, const StatisticalState& p0,
                          const PhysicalVariable& g, const TimeWindow& window,
                          const SolverConfig& cfg) {
  return conjugation_sides(spec, p0, g, window, cfg).defect();
}

}  // namespace lhv
