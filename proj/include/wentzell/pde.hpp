#ifndef WENTZELL_PDE_HPP
#define WENTZELL_PDE_HPP

#include <cmath>
#include <vector>

#include "wentzell/core.hpp"
#include "wentzell/linalg.hpp"

namespace wentzell {

// Method-of-lines discretization of
//
//   u_t = u_xx              on (0,1),
//   u(0,t) = f(t)           (Dirichlet control, imposed strongly)
//   a u_t(1,t) = b u(1,t) - d u_x(1,t)   (dynamic form at the boundary node)
//
// Interior nodes use the centered second difference; the boundary flux
// u_x(1) uses a one-sided backward formula (three-point second order by
// default, the two-point first-order closure as an alternative). Time
// stepping is the theta-scheme with Crank-Nicolson default.

enum class TimeScheme { CrankNicolson, ImplicitEuler };
enum class BoundaryStencil { ThreePoint, TwoPoint };

struct PdeOptions {
  TimeScheme scheme = TimeScheme::CrankNicolson;
  BoundaryStencil stencil = BoundaryStencil::ThreePoint;

  double theta() const {
    return scheme == TimeScheme::CrankNicolson ? 0.5 : 1.0;
  }
};

struct Trajectory {
  std::vector<double> times;   // uniform, 0..T
  std::vector<State> states;   // one per time
  std::vector<double> flux0;   // d_x trace at x = 0 per time

  const State& terminal() const { return states.back(); }
  const State& initial() const { return states.front(); }
};

namespace detail {

/// Second-order one-sided flux trace at x = 0.
inline double flux_at_zero(const State& u) {
  const double dx = u.grid.dx();
  return (-3.0 * u.values[0] + 4.0 * u.values[1] - u.values[2]) / (2.0 * dx);
}

struct BoundaryRow {
  double self, prev, prev2;  // du_N/dt = self*u_N + prev*u_{N-1} + prev2*u_{N-2}
};

inline BoundaryRow boundary_row(const WentzellParams& p, double dx,
                                BoundaryStencil stencil) {
  const double b_a = p.b() / p.a();
  const double d_a = p.d() / p.a();
  if (stencil == BoundaryStencil::ThreePoint)
    return {b_a - 1.5 * d_a / dx, 2.0 * d_a / dx, -0.5 * d_a / dx};
  return {b_a - d_a / dx, d_a / dx, 0.0};
}

struct EvolveOutput {
  std::vector<double> times;
  State terminal;
  std::vector<double> flux0;   // when record_flux
  std::vector<State> states;   // when store_states

  EvolveOutput(Grid g) : terminal(g) {}
};

/// theta-scheme evolution with the Dirichlet value at node 0 prescribed per
/// time level. dirichlet.size() determines the number of steps.
inline EvolveOutput evolve(const State& init,
                           const std::vector<double>& dirichlet, double T,
                           const WentzellParams& params,
                           const PdeOptions& opts, bool store_states,
                           bool record_flux) {
  const Grid grid = init.grid;
  const int N = grid.n_x;
  const int n_t = static_cast<int>(dirichlet.size()) - 1;
  if (n_t < 1) throw ShapeMismatch("evolve: need at least one time step");
  const double dt = T / n_t;
  const double dx = grid.dx();
  const double c = 1.0 / (dx * dx);
  const double th = opts.theta();
  const auto br = boundary_row(params, dx, opts.stencil);

  // Implicit matrix I - theta dt L on unknowns u_1..u_N.
  const int m = N;
  std::vector<double> sub(m - 1, -th * dt * c), diag(m - 1, 1.0 + 2.0 * th * dt * c),
      sup(m - 1, -th * dt * c);
  TridiagBoundarySystem system(std::move(sub), std::move(diag), std::move(sup),
                               -th * dt * br.prev2, -th * dt * br.prev,
                               1.0 - th * dt * br.self);

  EvolveOutput out(grid);
  out.times.resize(n_t + 1);
  for (int i = 0; i <= n_t; ++i) out.times[i] = T * i / n_t;

  State u = init;
  u.values[0] = dirichlet[0];
  if (store_states) {
    out.states.reserve(n_t + 1);
    out.states.push_back(u);
  }
  if (record_flux) {
    out.flux0.resize(n_t + 1);
    out.flux0[0] = flux_at_zero(u);
  }

  std::vector<double> lu(m), rhs(m);
  for (int step = 0; step < n_t; ++step) {
    // Explicit part (I + (1-theta) dt L) u^m, with u_0 = g_m in place.
    for (int j = 1; j < N; ++j)
      lu[j - 1] = c * (u.values[j - 1] - 2.0 * u.values[j] + u.values[j + 1]);
    lu[m - 1] = br.self * u.values[N] + br.prev * u.values[N - 1] +
                br.prev2 * u.values[N - 2];
    for (int i = 0; i < m; ++i)
      rhs[i] = u.values[i + 1] + (1.0 - th) * dt * lu[i];
    // Implicit coupling of the prescribed node 0.
    rhs[0] += th * dt * c * dirichlet[step + 1];

    system.solve(rhs);
    for (int i = 0; i < m; ++i) u.values[i + 1] = rhs[i];
    u.values[0] = dirichlet[step + 1];

    if (store_states) out.states.push_back(u);
    if (record_flux) out.flux0[step + 1] = flux_at_zero(u);
  }
  out.terminal = u;
  return out;
}

}  // namespace detail

/// Controlled forward problem; the control is linearly interpolated onto the
/// n_t + 1 uniform time levels of the run.
inline Trajectory solve_forward(const State& u0, const Control& f,
                                const WentzellParams& params, int n_t,
                                const PdeOptions& opts = {}) {
  const double T = f.horizon();
  std::vector<double> g(n_t + 1);
  for (int i = 0; i <= n_t; ++i) g[i] = f.eval(T * i / n_t);
  auto run = detail::evolve(u0, g, T, params, opts, true, true);
  return Trajectory{std::move(run.times), std::move(run.states),
                    std::move(run.flux0)};
}

/// Terminal state only (no trajectory storage); control given directly as
/// samples on the run's time levels.
inline State forward_terminal(const State& u0,
                              const std::vector<double>& control_samples,
                              double T, const WentzellParams& params,
                              const PdeOptions& opts = {}) {
  return detail::evolve(u0, control_samples, T, params, opts, false, false)
      .terminal;
}

/// Backward adjoint problem
///   phi_t + phi_xx = 0,  phi(0,t) = 0,
///   a phi_xx(1,t) - b phi(1,t) + d phi_x(1,t) = 0,  phi(.,T) = VT.
/// In reversed time s = T - t this is the forward problem with zero control,
/// so it reuses the same stepper; outputs are stored in forward-t order with
/// the flux trace phi_x(0,t) populated.
inline Trajectory solve_adjoint(const State& vt, const WentzellParams& params,
                                int n_t, double T,
                                const PdeOptions& opts = {}) {
  std::vector<double> g(n_t + 1, 0.0);
  auto run = detail::evolve(vt, g, T, params, opts, true, true);
  Trajectory traj;
  traj.times = run.times;
  traj.states.reserve(n_t + 1);
  traj.flux0.resize(n_t + 1);
  for (int i = n_t; i >= 0; --i) {
    traj.states.push_back(std::move(run.states[i]));
    traj.flux0[n_t - i] = run.flux0[i];
  }
  return traj;
}

/// Adjoint boundary flux phi_x(0, t_i) only, in forward-t order.
inline std::vector<double> adjoint_flux(const State& vt,
                                        const WentzellParams& params, int n_t,
                                        double T, const PdeOptions& opts = {}) {
  std::vector<double> g(n_t + 1, 0.0);
  auto run = detail::evolve(vt, g, T, params, opts, false, true);
  std::vector<double> flux(n_t + 1);
  for (int i = 0; i <= n_t; ++i) flux[i] = run.flux0[n_t - i];
  return flux;
}

/// Resolvent-type elliptic problem: given a state Psi, returns
/// G = (alpha - A)^{-1} Psi, i.e. solves
///
///   g_xx - alpha g = -psi            on (0,1),  g(0) = 0,
///   (a alpha - b) g(1) + d g_x(1) = a psi(1)
///
/// (the Wentzell condition reduced through the equation). Discretized by the
/// centered stencil plus the one-sided boundary derivative.
inline State solve_elliptic(const State& rhs, double alpha,
                            const WentzellParams& params,
                            const PdeOptions& opts = {}) {
  const Grid grid = rhs.grid;
  const int N = grid.n_x;
  const double dx = grid.dx();
  const double c = 1.0 / (dx * dx);

  std::vector<double> sub(N - 1, -c), diag(N - 1, 2.0 * c + alpha),
      sup(N - 1, -c);
  const double ab_d = (params.a() * alpha - params.b()) / params.d();
  double c0, c1, c2;
  if (opts.stencil == BoundaryStencil::ThreePoint) {
    c0 = ab_d + 1.5 / dx;
    c1 = -2.0 / dx;
    c2 = 0.5 / dx;
  } else {
    c0 = ab_d + 1.0 / dx;
    c1 = -1.0 / dx;
    c2 = 0.0;
  }
  TridiagBoundarySystem system(std::move(sub), std::move(diag), std::move(sup),
                               c2, c1, c0);

  std::vector<double> b(N);
  for (int j = 1; j < N; ++j) b[j - 1] = rhs.values[j];
  b[N - 1] = params.weight() * rhs.boundary();
  system.solve(b);

  State g(grid);
  for (int j = 1; j <= N; ++j) g.values[j] = b[j - 1];
  return g;
}

/// Applies (alpha - A_h) with the same stencil solve_elliptic inverts, so
/// apply_elliptic_operator(solve_elliptic(u, ...), ...) == u to solver
/// roundoff. Input is taken with u(0) = 0 semantics.
inline State apply_elliptic_operator(const State& g, double alpha,
                                     const WentzellParams& params,
                                     const PdeOptions& opts = {}) {
  const Grid grid = g.grid;
  const int N = grid.n_x;
  const double dx = grid.dx();
  const double c = 1.0 / (dx * dx);
  State out(grid);
  for (int j = 1; j < N; ++j)
    out.values[j] = -c * g.values[j - 1] + (2.0 * c + alpha) * g.values[j] -
                    c * g.values[j + 1];
  const double ab_d = (params.a() * alpha - params.b()) / params.d();
  double row;
  if (opts.stencil == BoundaryStencil::ThreePoint)
    row = (ab_d + 1.5 / dx) * g.values[N] - (2.0 / dx) * g.values[N - 1] +
          (0.5 / dx) * g.values[N - 2];
  else
    row = (ab_d + 1.0 / dx) * g.values[N] - (1.0 / dx) * g.values[N - 1];
  out.values[N] = row / params.weight();
  return out;
}

/// Quadratic form ((alpha - A)^{-1} U, U)_H realizing the squared dual norm.
/// Positive definite only when alpha exceeds -lambda_0; the customary
/// alpha = -1 choice in the critical regime makes it indefinite.
inline double hminus1_quadratic_form(const State& u, double alpha,
                                     const WentzellParams& params,
                                     const PdeOptions& opts = {}) {
  return inner_H(solve_elliptic(u, alpha, params, opts), u, params);
}

inline double norm_Hminus1(const State& u, double alpha,
                           const WentzellParams& params,
                           const PdeOptions& opts = {}) {
  return std::sqrt(hminus1_quadratic_form(u, alpha, params, opts));
}

/// Absolute defect of the duality identity
///   (U(T), Phi_T)_H - (U(0), Phi(0))_H = int_0^T phi_x(0,t) f(t) dt,
/// the time integral by trapezoid on the run's levels.
inline double duality_check(const State& u0, const Control& f, const State& vt,
                            const WentzellParams& params, int n_t,
                            const PdeOptions& opts = {}) {
  const double T = f.horizon();
  const Trajectory u = solve_forward(u0, f, params, n_t, opts);
  const Trajectory phi = solve_adjoint(vt, params, n_t, T, opts);
  const double lhs = inner_H(u.terminal(), vt, params) -
                     inner_H(u.initial(), phi.initial(), params);
  const double dt = T / n_t;
  double rhs = 0.5 * (phi.flux0.front() * f.eval(0.0) +
                      phi.flux0.back() * f.eval(T));
  for (int i = 1; i < n_t; ++i) rhs += phi.flux0[i] * f.eval(u.times[i]);
  rhs *= dt;
  return std::fabs(lhs - rhs);
}

}  // namespace wentzell

#endif  // WENTZELL_PDE_HPP
