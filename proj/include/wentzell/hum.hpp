#ifndef WENTZELL_HUM_HPP
#define WENTZELL_HUM_HPP

#include <cmath>
#include <cstdio>
#include <optional>
#include <vector>

#include "wentzell/core.hpp"
#include "wentzell/pde.hpp"
#include "wentzell/spectral.hpp"

namespace wentzell {

// Penalized HUM: minimize
//   J_eps(f) = 1/2 int_0^T f^2 dt + 1/(2 eps) ||U_f(., T)||^2
// over boundary controls f, the terminal term realized through the elliptic
// solve (alpha - A)^{-1}. The minimizer is found by conjugate gradient on
// the adjoint terminal datum V; each iteration costs one adjoint solve, one
// forward solve and one elliptic solve.

/// Inner product for the CG scalars rho_k, gamma_k and the residual norms.
///
/// Energy is ((alpha_pd - A) u, w)_H = alpha_pd (u,w)_H + int u_x w_x dx
/// - (b/d) u(1) w(1), the form in which the preconditioned HUM operator is
/// self-adjoint; alpha_pd is the run's alpha shifted to keep the form
/// positive definite when alpha <= -lambda_0. WeightedH is the literal H
/// product applied to derivative pairs, int g_x w_x dx + (a/d) g_x(1) w_x(1);
/// L2 drops the boundary term. Both alternatives lose the operator symmetry
/// and stall the iteration (kept for comparison).
enum class CgInner { Energy, WeightedH, L2 };

inline const char* to_string(CgInner k) {
  switch (k) {
    case CgInner::Energy: return "energy";
    case CgInner::WeightedH: return "weighted_h";
    case CgInner::L2: return "l2";
  }
  return "?";
}

struct HumConfig {
  double eps = 1e-3;
  double alpha = 0.0;
  double tol = 1e-3;
  int max_iter = 5000;
  int n_x = 200;
  int n_t = 2000;
  double T = 1.0;
  CgInner inner = CgInner::Energy;
  PdeOptions pde{};
  int progress_every = 0;  // 0 = quiet

  Grid grid() const { return Grid(n_x); }

  /// Throws ConfigError on invalid settings; alpha must stay away from the
  /// spectrum -lambda_n so the elliptic solves are uniquely solvable.
  void validate(const WentzellParams& params) const {
    if (!(eps > 0.0)) throw ConfigError("HumConfig: eps must be > 0");
    if (!(tol > 0.0 && tol < 1.0))
      throw ConfigError("HumConfig: tol must lie in (0,1)");
    if (max_iter < 0) throw ConfigError("HumConfig: max_iter < 0");
    if (n_x < 4 || n_t < 1 || !(T > 0.0))
      throw ConfigError("HumConfig: bad discretization sizes");
    const int n_check =
        static_cast<int>(std::sqrt(std::max(1.0, -alpha + 2.0)) / M_PI) + 2;
    for (const auto& pair : eigenpairs(params, n_check))
      if (std::fabs(alpha + pair.lambda_d()) <= 1e-10)
        throw ConfigError("HumConfig: alpha collides with -lambda_n");
  }
};

enum class HumStop { Converged, MaxIter, Breakdown };

inline const char* to_string(HumStop s) {
  switch (s) {
    case HumStop::Converged: return "converged";
    case HumStop::MaxIter: return "max_iter";
    case HumStop::Breakdown: return "breakdown";
  }
  return "?";
}

struct HumResult {
  Control control;
  State v_final;
  std::vector<double> residuals;  // ||g^k|| / ||g^0||, residuals[0] = 1
  std::vector<double> energy;     // CG energy 1/2 (A0 v^k, v^k) - (beta, v^k)
  std::vector<double> rhos, gammas, denominators;
  double terminal_norm_H = 0.0;
  double terminal_norm_Hminus1 = 0.0;
  double hminus1_alpha = 0.0;  // shift actually used for the H^{-1} diagnostic
  double j_eps = 0.0;
  int iterations = 0;
  HumStop stop = HumStop::Converged;

  HumResult(Grid g) : v_final(g) {}
};

namespace detail {

/// Nodal derivative: centered in the interior, second-order one-sided at the
/// endpoints.
inline std::vector<double> state_derivative(const State& g) {
  const int n = g.grid.n_x;
  const double dx = g.grid.dx();
  std::vector<double> d(n + 1);
  d[0] = (-3.0 * g.values[0] + 4.0 * g.values[1] - g.values[2]) / (2.0 * dx);
  for (int j = 1; j < n; ++j)
    d[j] = (g.values[j + 1] - g.values[j - 1]) / (2.0 * dx);
  d[n] =
      (3.0 * g.values[n] - 4.0 * g.values[n - 1] + g.values[n - 2]) / (2.0 * dx);
  return d;
}

/// Trapezoid int g_x w_x dx; `boundary_weight` adds c * g_x(1) w_x(1).
inline double derivative_l2(const State& g, const State& w,
                            double boundary_weight) {
  const auto gx = state_derivative(g);
  const auto wx = state_derivative(w);
  const int n = g.grid.n_x;
  double acc = 0.5 * (gx[0] * wx[0] + gx[n] * wx[n]);
  for (int j = 1; j < n; ++j) acc += gx[j] * wx[j];
  return acc * g.grid.dx() + boundary_weight * gx[n] * wx[n];
}

struct CgMetric {
  CgInner kind;
  double alpha_pd;  // shift for the Energy form
  const WentzellParams* params;

  double operator()(const State& g, const State& w) const {
    switch (kind) {
      case CgInner::WeightedH:
        return derivative_l2(g, w, params->weight());
      case CgInner::L2:
        return derivative_l2(g, w, 0.0);
      case CgInner::Energy:
        return derivative_l2(g, w, 0.0) -
               params->b_over_d() * g.values.back() * w.values.back() +
               alpha_pd * inner_H(g, w, *params);
    }
    return 0.0;
  }
};

}  // namespace detail

/// J_eps(f) with the dual-norm term evaluated through the elliptic solve.
/// Well-defined for any admissible alpha; it is a squared norm only when
/// alpha exceeds -lambda_0.
inline double j_eps(const Control& f, const State& u0, const HumConfig& cfg,
                    const WentzellParams& params) {
  if (u0.grid.n_x != cfg.n_x) throw ShapeMismatch("j_eps: grid mismatch");
  std::vector<double> samples(cfg.n_t + 1);
  for (int i = 0; i <= cfg.n_t; ++i)
    samples[i] = f.eval(cfg.T * i / cfg.n_t);
  const State terminal =
      forward_terminal(u0, samples, cfg.T, params, cfg.pde);
  const double control_energy = f.l2_norm();
  return 0.5 * control_energy * control_energy +
         0.5 / cfg.eps *
             hminus1_quadratic_form(terminal, cfg.alpha, params, cfg.pde);
}

/// L2 gradient of J_eps at f: the sampled function t -> f(t) + p_x(0,t),
/// where p solves the adjoint problem with terminal datum
/// h = (alpha - A)^{-1} (eps^{-1} U_f(., T)).
inline Control gradient_residual(const Control& f, const State& u0,
                                 const HumConfig& cfg,
                                 const WentzellParams& params) {
  if (u0.grid.n_x != cfg.n_x)
    throw ShapeMismatch("gradient_residual: grid mismatch");
  if (f.intervals() != cfg.n_t || std::fabs(f.horizon() - cfg.T) > 1e-12)
    throw ShapeMismatch("gradient_residual: control sampling mismatch");
  const State terminal =
      forward_terminal(u0, f.samples, cfg.T, params, cfg.pde);
  const State h =
      solve_elliptic((1.0 / cfg.eps) * terminal, cfg.alpha, params, cfg.pde);
  const auto flux = adjoint_flux(h, params, cfg.n_t, cfg.T, cfg.pde);
  std::vector<double> grad(cfg.n_t + 1);
  for (int i = 0; i <= cfg.n_t; ++i) grad[i] = f.samples[i] + flux[i];
  return Control(f.times, std::move(grad));
}

/// Conjugate gradient iteration for the penalized HUM optimality system
///   [eps (alpha - A) + Gamma] V = 0
/// preconditioned by (alpha - A)^{-1}. One iteration: adjoint solve from the
/// search direction, forward solve driven by f = -p_x(0,.), elliptic update
///   g_xx - alpha g = eps (w_xx - alpha w) + y(T, x)
/// realized in its exact discrete form g = eps w - (alpha - A_h)^{-1} y(T)
/// (same stencil on both sides). The initial residual carries the initial
/// datum U0; operator applications to search directions use the
/// zero-initial-datum forward solve, which keeps g^k equal to the true
/// residual at v^k.
///
/// Alongside the residual ratios the iteration records the CG energy
/// 1/2 (A0 v, v) - (beta, v); its decrease is the monotone convergence
/// certificate (plain CG residual norms oscillate).
inline HumResult hum_cg(const State& u0, const HumConfig& cfg,
                        const WentzellParams& params,
                        std::optional<State> v0 = std::nullopt) {
  cfg.validate(params);
  if (u0.grid.n_x != cfg.n_x) throw ShapeMismatch("hum_cg: grid mismatch");
  const Grid grid = cfg.grid();
  const State zero = State::zero(grid);

  const double lambda_min = eigenpairs(params, 0).front().lambda_d();
  const double alpha_pd =
      (cfg.alpha + lambda_min > 1e-10) ? cfg.alpha : (-lambda_min + 1.0);
  const detail::CgMetric inner{cfg.inner, alpha_pd, &params};

  const auto flux_from = [&](const State& v) {
    return adjoint_flux(v, params, cfg.n_t, cfg.T, cfg.pde);
  };
  const auto control_samples = [&](const std::vector<double>& flux) {
    std::vector<double> s(flux.size());
    for (std::size_t i = 0; i < flux.size(); ++i) s[i] = -flux[i];
    return s;
  };
  const auto residual_at = [&](const State& v, const State& init) {
    const State yT = forward_terminal(init, control_samples(flux_from(v)),
                                      cfg.T, params, cfg.pde);
    return cfg.eps * v - solve_elliptic(yT, cfg.alpha, params, cfg.pde);
  };

  HumResult result(grid);
  result.hminus1_alpha = alpha_pd;
  State v = v0.value_or(zero);
  State g = residual_at(v, u0);
  // Affine part of the residual, needed for the energy trace.
  const State g_affine = v0 ? residual_at(zero, u0) : g;
  const auto cg_energy = [&](const State& vk, const State& gk) {
    const State bg = apply_elliptic_operator(gk + g_affine, cfg.alpha, params,
                                             cfg.pde);
    return 0.5 * inner_H(bg, vk, params);
  };

  double gg = inner(g, g);
  const double g0_norm = std::sqrt(std::fabs(gg));
  result.residuals.push_back(1.0);
  result.energy.push_back(cg_energy(v, g));

  std::vector<double> times(cfg.n_t + 1);
  for (int i = 0; i <= cfg.n_t; ++i) times[i] = cfg.T * i / cfg.n_t;

  if (!(g0_norm > 1e-300)) {
    result.stop = HumStop::Converged;
    result.iterations = 0;
  } else {
    State w = g;
    State v_best = v;
    double best_res = 1.0;
    result.stop = HumStop::MaxIter;
    for (int k = 1; k <= cfg.max_iter; ++k) {
      const State gbar = residual_at(w, zero);
      const double den = inner(gbar, w);
      result.denominators.push_back(den);
      if (std::fabs(den) < 1e-300) {
        result.stop = HumStop::Breakdown;
        result.iterations = k - 1;
        break;
      }
      const double rho = gg / den;
      result.rhos.push_back(rho);
      v -= rho * w;
      g -= rho * gbar;
      const double gg_next = inner(g, g);
      const double res = std::sqrt(std::fabs(gg_next)) / g0_norm;
      result.residuals.push_back(res);
      result.energy.push_back(cg_energy(v, g));
      if (res < best_res) {
        best_res = res;
        v_best = v;
      }
      if (cfg.progress_every > 0 && k % cfg.progress_every == 0)
        std::fprintf(stderr, "hum_cg: iter %d residual %.3e\n", k, res);
      result.iterations = k;
      if (res <= cfg.tol) {
        result.stop = HumStop::Converged;
        v_best = v;
        break;
      }
      const double gamma = gg_next / gg;
      result.gammas.push_back(gamma);
      w = g + gamma * w;
      gg = gg_next;
    }
    if (result.stop != HumStop::Converged) v = v_best;
  }

  // Recover the control from the final adjoint datum and attach diagnostics.
  result.v_final = v;
  result.control = Control(times, control_samples(flux_from(v)));
  const State terminal =
      forward_terminal(u0, result.control.samples, cfg.T, params, cfg.pde);
  result.terminal_norm_H = norm_H(terminal, params);
  result.terminal_norm_Hminus1 =
      norm_Hminus1(terminal, alpha_pd, params, cfg.pde);
  const double fnorm = result.control.l2_norm();
  result.j_eps =
      0.5 * fnorm * fnorm +
      0.5 / cfg.eps *
          hminus1_quadratic_form(terminal, cfg.alpha, params, cfg.pde);
  return result;
}

}  // namespace wentzell

#endif  // WENTZELL_HUM_HPP
