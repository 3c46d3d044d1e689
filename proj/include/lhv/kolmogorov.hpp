#pragma once

// Forward (Fokker-Planck) evolution of statistical states, backward evolution of
// physical variables, and the conjugation check tying them together.
//
//   forward generator   L p = 1/2 d^2/dy^2 [sigma^2 p] - d/dy [a p]
//   backward operator   W f = -1/2 sigma^2 f'' - a f'
//   dp/dt = L p  with p(t0) = p0;     df/ds = W f  with f(tau) = g
//   conjugation         <U_{t0,tau} g>_{p0} = <g>_{V_{t0,tau} p0}
//
// Spatial discretization on the cell-centered grid:
//  * L is written in flux form. Face fluxes
//      F_{i+1/2} = a(y_{i+1/2}) (p_i + p_{i+1}) / 2 - (D_{i+1} p_{i+1} - D_i p_i) / (2h),
//    D = sigma^2, give L p_i = -(F_{i+1/2} - F_{i-1/2}) / h. No-flux walls drop
//    the outer faces, so mass is conserved to rounding.
//  * W is discretized directly with central differences at cell centers. In
//    the interior it differs from -L^T by O(h^2) (the drift is sampled at
//    faces for L, at centers for W), so the conjugation defect is a genuine
//    second-order discretization check rather than an algebraic identity.
//    Interval ends use linear-extrapolation ghosts: the interval is a
//    truncation of the real line and W imposes no wall there.
//  * AdjointForm::transpose uses W = -L^T instead, which makes the discrete
//    pair conjugate to rounding (and inherits the reflecting walls).

#include <cstddef>
#include <functional>
#include <optional>
#include <string>

#include "lhv/random.hpp"
#include "lhv/statespace.hpp"
#include "lhv/tridiagonal.hpp"

namespace lhv {

struct DiffusionSpec {
  using Coefficient = std::function<double(double t, double y)>;

  Coefficient drift;      // a(t, y), state units per time
  Coefficient diffusion;  // sigma(t, y) >= 0, state units per sqrt(time)
  /// Lets the solvers assemble their operators once.
  bool time_homogeneous = false;
  std::string name;

  /// dy = -theta (y - mean) dt + sigma dW
  static DiffusionSpec ornstein_uhlenbeck(double theta, double mean, double sigma);
  static DiffusionSpec constant(double drift, double sigma);
  /// a = 0, sigma = 0; the solvers floor sigma.
  static DiffusionSpec frozen();
};

enum class Scheme { crank_nicolson, explicit_euler };
enum class Boundary { no_flux, periodic };
enum class AdjointForm { direct, transpose };

struct SolverConfig {
  /// Largest time step; the window is split into equal steps no longer than this.
  double dt = 1e-3;
  Scheme scheme = Scheme::crank_nicolson;
  /// Defaults: no_flux on intervals, periodic on the circle.
  std::optional<Boundary> boundary;
  double sigma_floor = 1e-8;
  AdjointForm adjoint = AdjointForm::direct;
  /// Densities above -tolerance are round-off and get clipped.
  double negativity_tolerance = 1e-9;
};

class TimeWindow {
 public:
  TimeWindow(double t0, double tau);

  double t0() const noexcept { return t0_; }
  double tau() const noexcept { return tau_; }
  double duration() const noexcept { return tau_ - t0_; }

 private:
  double t0_;
  double tau_;
};

Boundary resolve_boundary(const StateSpace& space, const SolverConfig& cfg);

/// Matrix of L at time t on the grid of `space`.
TridiagonalMatrix assemble_generator(const DiffusionSpec& spec, const StateSpace& space, double t,
                                     const SolverConfig& cfg = {});
/// Matrix of W at time t (direct or transposed form per cfg.adjoint).
TridiagonalMatrix assemble_adjoint(const DiffusionSpec& spec, const StateSpace& space, double t,
                                   const SolverConfig& cfg = {});

/// L(p)(t, .) as a grid function on p's space.
PhysicalVariable generator_apply(const DiffusionSpec& spec, const StatisticalState& p, double t,
                                 const SolverConfig& cfg = {});
/// W(f)(t, .) as a grid function on f's space.
PhysicalVariable adjoint_apply(const DiffusionSpec& spec, const PhysicalVariable& f, double t,
                               const SolverConfig& cfg = {});

/// V_{t0,tau}(p0).
StatisticalState forward_evolve(const DiffusionSpec& spec, const StatisticalState& p0,
                                const TimeWindow& window, const SolverConfig& cfg = {});
/// U_{t0,tau}(g), integrated from the final condition at tau back to t0.
PhysicalVariable backward_evolve(const DiffusionSpec& spec, const PhysicalVariable& g,
                                 const TimeWindow& window, const SolverConfig& cfg = {});

/// Euler-Maruyama ensemble at tau started from samples of p0. Intervals
/// reflect at the walls; the circle wraps. Work is cut into fixed chunks with
/// derived seeds so the result does not depend on `threads`.
ParticleEnsemble simulate_paths(const DiffusionSpec& spec, const StatisticalState& p0,
                                const TimeWindow& window, std::size_t path_count, double dt,
                                Seed seed, unsigned threads = 1);

struct ConjugationSides {
  double classical;      // <U g>_{p0}
  double observational;  // <g>_{V p0}
  double defect() const noexcept;
};

ConjugationSides conjugation_sides(const DiffusionSpec& spec, const StatisticalState& p0,
                                   const PhysicalVariable& g, const TimeWindow& window,
                                   const SolverConfig& cfg = {});
double conjugation_defect(const DiffusionSpec& spec, const StatisticalState& p0,
                          const PhysicalVariable& g, const TimeWindow& window,
                          const SolverConfig& cfg = {});

}  // namespace lhv
