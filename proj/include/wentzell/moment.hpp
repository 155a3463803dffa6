#ifndef WENTZELL_MOMENT_HPP
#define WENTZELL_MOMENT_HPP

#include <cmath>
#include <vector>

#include "wentzell/core.hpp"
#include "wentzell/linalg.hpp"
#include "wentzell/pde.hpp"
#include "wentzell/quadrature.hpp"
#include "wentzell/spectral.hpp"

namespace wentzell {

// Moment-method control synthesis. The null-controllability condition
// reduces to the moment equations
//
//   int_0^T theta(t) e^{-lambda_n t} dt = -eta_n e^{-lambda_n T} ||Y_n||_H / y_n'(0)
//
// for theta(t) = f(T - t), solved on a truncated family of exponentials via
// numerically constructed biorthogonal elements. Families containing a
// nonpositive eigenvalue are handled by the spectral shift
// theta(t) = e^{-shift t} theta~(t), which makes every effective exponent
// strictly positive.

struct ExpFamily {
  std::vector<double> lambdas;  // effective exponents after shift, increasing
  double T_horizon = 1.0;
  double shift = 0.0;

  int size() const { return static_cast<int>(lambdas.size()); }

  /// Original (unshifted) exponent of mode n.
  double raw_lambda(int n) const { return lambdas[n] - shift; }

  /// Applies the shift rule: shift = -lambda_0 + 1 when lambda_0 <= 0.
  static ExpFamily from_eigenvalues(const std::vector<double>& raw, double T) {
    if (raw.empty()) throw ConfigError("ExpFamily: empty eigenvalue list");
    if (!(T > 0.0)) throw ConfigError("ExpFamily: T must be positive");
    ExpFamily fam;
    fam.T_horizon = T;
    fam.shift = (raw.front() <= 0.0) ? (-raw.front() + 1.0) : 0.0;
    fam.lambdas.reserve(raw.size());
    for (double lam : raw) fam.lambdas.push_back(lam + fam.shift);
    for (std::size_t i = 0; i < fam.lambdas.size(); ++i) {
      if (!(fam.lambdas[i] > 0.0))
        throw ConfigError("ExpFamily: effective exponent not positive");
      if (i > 0 && !(fam.lambdas[i] > fam.lambdas[i - 1]))
        throw ConfigError("ExpFamily: exponents must increase strictly");
    }
    return fam;
  }

  static ExpFamily from_pairs(const std::vector<Eigenpair>& pairs, double T) {
    std::vector<double> raw;
    raw.reserve(pairs.size());
    for (const auto& p : pairs) raw.push_back(p.lambda_d());
    return from_eigenvalues(raw, T);
  }
};

/// Gram matrix of the exponential family in L2(0,T), in closed form:
///   G_mn = (1 - e^{-(lambda_m + lambda_n) T}) / (lambda_m + lambda_n).
inline std::vector<double> gram_matrix(const ExpFamily& fam) {
  const int n = fam.size();
  std::vector<double> g(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      const double s = fam.lambdas[i] + fam.lambdas[j];
      const double v = (1.0 - std::exp(-s * fam.T_horizon)) / s;
      g[i * n + j] = v;
      g[j * n + i] = v;
    }
  return g;
}

/// Theta_n(t) = sum_m coeffs[m] e^{-lambda_m t} with
/// int_0^T e^{-lambda_m t} Theta_n dt = delta_nm for the family's
/// (effective) exponents.
struct BiorthogonalElement {
  int index = 0;
  std::vector<double> coeffs;
  double l2_norm = 0.0;
  double residual_inf = 0.0;   // ||G c - e_n||_inf
  double gram_condition = 0.0;

  double eval(double t, const ExpFamily& fam) const {
    double acc = 0.0;
    for (std::size_t m = 0; m < coeffs.size(); ++m)
      acc += coeffs[m] * std::exp(-fam.lambdas[m] * t);
    return acc;
  }
};

namespace detail {

inline double residual_inf_norm(const std::vector<double>& g, int n,
                                const std::vector<double>& c,
                                const std::vector<double>& b) {
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    long double s = -static_cast<long double>(b[i]);
    for (int k = 0; k < n; ++k)
      s += static_cast<long double>(g[i * n + k]) * c[k];
    worst = std::max(worst, static_cast<double>(fabsl(s)));
  }
  return worst;
}

}  // namespace detail

/// Biorthogonal element by solving G c = e_n (Cholesky with refined
/// residual). Throws IllConditioned when the truncation outruns double
/// precision (condition estimate above 1e14, or the achievable residual
/// exceeds 1e-10).
inline BiorthogonalElement biorthogonal(const ExpFamily& fam, int n) {
  const int size = fam.size();
  if (n < 0 || n >= size) throw IndexMismatch("biorthogonal: index out of range");
  const auto g = gram_matrix(fam);
  const double cond = condition_1norm(g, size);
  if (!(cond < 1e14))
    throw IllConditioned("biorthogonal: Gram condition exceeds 1e14");
  std::vector<double> e(size, 0.0);
  e[n] = 1.0;
  BiorthogonalElement out;
  out.index = n;
  out.coeffs = solve_spd_refined(g, size, e);
  out.gram_condition = cond;
  out.residual_inf = detail::residual_inf_norm(g, size, out.coeffs, e);
  if (!(out.residual_inf <= 1e-10))
    throw IllConditioned("biorthogonal: residual above 1e-10");
  long double sq = 0.0L;
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j)
      sq += static_cast<long double>(out.coeffs[i]) * g[i * size + j] *
            out.coeffs[j];
  out.l2_norm = static_cast<double>(sqrtl(std::max(sq, 0.0L)));
  return out;
}

struct MomentResult {
  Control control;
  std::vector<double> residuals;  // quadrature defect of each moment equation
  int n_modes = 0;
  double gram_condition = 0.0;
  double shift = 0.0;
  std::vector<double> rhs;            // moment right-hand sides
  std::vector<double> theta_coeffs;   // theta~(t) = sum q_m e^{-lambda~_m t}
};

/// Assembles the truncated control series of the moment method:
///   theta(t) = e^{-shift t} sum_m q_m e^{-lambda~_m t},   f(t) = theta(T-t),
/// where q solves the Gram system against the moment right-hand sides
///   rhs_n = -eta_n e^{-lambda_n T} ||Y_n||_H / y_n'(0),
/// eta_n from the spectral expansion of U0. The per-mode residuals are
/// re-checked by adaptive quadrature on the final theta.
inline MomentResult moment_control(const State& u0, const ExpFamily& fam,
                                   const std::vector<Eigenpair>& pairs,
                                   const WentzellParams& params,
                                   int n_samples) {
  const int n = fam.size();
  if (static_cast<int>(pairs.size()) != n)
    throw IndexMismatch("moment_control: family/eigenpair count mismatch");
  for (int i = 0; i < n; ++i) {
    const double lam = pairs[i].lambda_d();
    if (std::fabs(fam.raw_lambda(i) - lam) > 1e-8 * (1.0 + std::fabs(lam)))
      throw IndexMismatch("moment_control: family/eigenpair exponent mismatch");
  }
  if (n_samples < 1) throw ConfigError("moment_control: n_samples < 1");
  const double T = fam.T_horizon;

  const auto coeffs = expand(u0, pairs, params, T);
  MomentResult out;
  out.n_modes = n;
  out.shift = fam.shift;
  out.rhs.resize(n);
  for (int i = 0; i < n; ++i) {
    const double eta = coeffs.coeffs[i].second;
    const auto& pair = pairs[i];
    out.rhs[i] = -eta * std::exp(-pair.lambda_d() * T) * pair.norm_h /
                 pair.flux_factor();
  }

  const auto g = gram_matrix(fam);
  out.gram_condition = condition_1norm(g, n);
  if (!(out.gram_condition < 1e14))
    throw IllConditioned("moment_control: Gram condition exceeds 1e14");
  out.theta_coeffs = solve_spd_refined(g, n, out.rhs);

  // theta evaluated exactly as an exponential sum; f(t) = theta(T - t).
  const auto theta = [&](double t) {
    double acc = 0.0;
    for (int m = 0; m < n; ++m)
      acc += out.theta_coeffs[m] * std::exp(-(fam.lambdas[m] + fam.shift) * t);
    return acc;
  };
  std::vector<double> times(n_samples + 1), samples(n_samples + 1);
  for (int i = 0; i <= n_samples; ++i) {
    times[i] = T * i / n_samples;
    samples[i] = theta(T - times[i]);
  }
  out.control = Control(std::move(times), std::move(samples));

  out.residuals.resize(n);
  for (int i = 0; i < n; ++i) {
    const double lam = fam.raw_lambda(i);
    const double integral = integrate(
        [&](double t) { return theta(t) * std::exp(-lam * t); }, 0.0, T,
        1e-12);
    out.residuals[i] = std::fabs(integral - out.rhs[i]);
  }
  return out;
}

/// Discrete witnesses |(U(T), Z_n)_H| that the controlled forward run
/// annihilates each targeted mode.
inline std::vector<double> verify_null_modes(const Control& f, const State& u0,
                                             const std::vector<Eigenpair>& pairs,
                                             const WentzellParams& params,
                                             int n_x, int n_t,
                                             const PdeOptions& opts = {}) {
  if (u0.grid.n_x != n_x)
    throw ShapeMismatch("verify_null_modes: initial datum grid mismatch");
  const Trajectory traj = solve_forward(u0, f, params, n_t, opts);
  std::vector<double> witness;
  witness.reserve(pairs.size());
  for (const auto& pair : pairs) {
    const State z = sample_mode(pair, u0.grid);
    witness.push_back(std::fabs(inner_H(traj.terminal(), z, params)));
  }
  return witness;
}

}  // namespace wentzell

#endif  // WENTZELL_MOMENT_HPP
