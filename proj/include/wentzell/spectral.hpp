#ifndef WENTZELL_SPECTRAL_HPP
#define WENTZELL_SPECTRAL_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "wentzell/core.hpp"

namespace wentzell {

// Sturm-Liouville problem with the eigenvalue in the boundary condition:
//
//   y'' + lambda y = 0,  y(0) = 0,  (a lambda + b) y(1) = d y'(1).
//
// Positive eigenvalues lambda = mu^2 come from the simple positive roots of
//   ((a/d) mu^2 + b/d) sin(mu) = mu cos(mu),
// with eigenfunctions sin(mu x). Depending on b/d there is additionally one
// nonpositive eigenvalue: a hyperbolic mode e^{mu x} - e^{-mu x} with
// lambda = -mu^2 when b/d > 1, or the linear mode y = x with lambda = 0 when
// b/d = 1.
//
// Root finding and residual evaluation run in long double: near the n-th
// root the characteristic function has slope ~ (a/d) mu_n^2, so double
// rounding of mu alone already costs ~1e-10 in residual by n = 50.

enum class EigenKind { Trig, Hyperbolic, Linear };

inline const char* to_string(EigenKind k) {
  switch (k) {
    case EigenKind::Trig: return "trig";
    case EigenKind::Hyperbolic: return "hyperbolic";
    case EigenKind::Linear: return "linear";
  }
  return "?";
}

struct Eigenpair {
  int n = 0;                // global index (0 = nonpositive mode if present)
  long double mu = 0.0L;    // root parameter (0 for the linear mode)
  long double lambda = 0.0L;
  EigenKind kind = EigenKind::Trig;
  double norm_h = 0.0;      // ||Y_n||_H

  double lambda_d() const { return static_cast<double>(lambda); }
  double mu_d() const { return static_cast<double>(mu); }

  /// Unnormalized eigenfunction y_n(x).
  double eval(double x) const {
    switch (kind) {
      case EigenKind::Trig:
        return std::sin(static_cast<double>(mu) * x);
      case EigenKind::Hyperbolic:
        return std::exp(static_cast<double>(mu) * x) -
               std::exp(-static_cast<double>(mu) * x);
      case EigenKind::Linear:
        return x;
    }
    return 0.0;
  }

  /// Normalized eigenfunction z_n(x) = y_n(x) / ||Y_n||_H.
  double eval_normalized(double x) const { return eval(x) / norm_h; }

  /// y_n'(0): mu for sin(mu x), 2 mu for the hyperbolic mode, 1 for x.
  /// This is the boundary-flux factor entering the moment right-hand sides.
  double flux_factor() const {
    switch (kind) {
      case EigenKind::Trig: return static_cast<double>(mu);
      case EigenKind::Hyperbolic: return 2.0 * static_cast<double>(mu);
      case EigenKind::Linear: return 1.0;
    }
    return 0.0;
  }
};

/// h(mu) = ((a/d) mu^2 + b/d) sin(mu) - mu cos(mu), evaluated as written.
inline long double characteristic_residual(long double mu,
                                           const WentzellParams& params) {
  const long double ad = static_cast<long double>(params.a()) / params.d();
  const long double bd = static_cast<long double>(params.b()) / params.d();
  return (ad * mu * mu + bd) * sinl(mu) - mu * cosl(mu);
}

/// Characteristic function of the negative branch (lambda = -mu^2):
/// (b/d - (a/d) mu^2) sinh(mu) - mu cosh(mu).
inline long double hyperbolic_residual(long double mu,
                                       const WentzellParams& params) {
  const long double ad = static_cast<long double>(params.a()) / params.d();
  const long double bd = static_cast<long double>(params.b()) / params.d();
  return (bd - ad * mu * mu) * sinhl(mu) - mu * coshl(mu);
}

namespace detail {

inline long double characteristic_derivative(long double mu,
                                             const WentzellParams& params) {
  const long double ad = static_cast<long double>(params.a()) / params.d();
  const long double bd = static_cast<long double>(params.b()) / params.d();
  return 2.0L * ad * mu * sinl(mu) + (ad * mu * mu + bd - 1.0L) * cosl(mu) +
         mu * sinl(mu);
}

inline long double hyperbolic_derivative(long double mu,
                                         const WentzellParams& params) {
  const long double ad = static_cast<long double>(params.a()) / params.d();
  const long double bd = static_cast<long double>(params.b()) / params.d();
  return -2.0L * ad * mu * sinhl(mu) +
         (bd - ad * mu * mu - 1.0L) * coshl(mu) - mu * sinhl(mu);
}

/// Bisection to width 1e-10, then a few Newton polish steps.
template <typename F, typename DF>
long double refine_root(const F& f, const DF& df, long double lo,
                        long double hi) {
  long double flo = f(lo);
  long double fhi = f(hi);
  if (flo == 0.0L) return lo;
  if (fhi == 0.0L) return hi;
  if ((flo > 0) == (fhi > 0))
    throw BracketFailure("root bracket has no sign change");
  while (hi - lo > 1e-10L) {
    const long double mid = 0.5L * (lo + hi);
    const long double fm = f(mid);
    if (fm == 0.0L) {
      lo = hi = mid;
      break;
    }
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  long double mu = 0.5L * (lo + hi);
  for (int it = 0; it < 5; ++it) {
    const long double fv = f(mu);
    const long double dv = df(mu);
    if (dv == 0.0L) break;
    const long double step = fv / dv;
    long double next = mu - step;
    if (next <= lo || next >= hi) next = 0.5L * (lo + hi);  // stay bracketed
    if (next == mu) break;
    mu = next;
    if (fabsl(step) < 1e-18L * (1.0L + fabsl(mu))) break;
  }
  return mu;
}

constexpr long double kPiL = 3.141592653589793238462643383279502884L;

}  // namespace detail

/// Closed-form ||Y_n||_H; the integral part admits elementary antiderivatives
/// for every branch, the boundary term is (a/d) y_n(1)^2.
inline double eigen_norm_H(long double mu, EigenKind kind,
                           const WentzellParams& params) {
  const long double w = static_cast<long double>(params.a()) / params.d();
  long double sq = 0.0L;
  switch (kind) {
    case EigenKind::Trig:
      sq = 0.5L - sinl(2.0L * mu) / (4.0L * mu) + w * sinl(mu) * sinl(mu);
      break;
    case EigenKind::Hyperbolic:
      sq = sinhl(2.0L * mu) / mu - 2.0L +
           4.0L * w * sinhl(mu) * sinhl(mu);
      break;
    case EigenKind::Linear:
      sq = 1.0L / 3.0L + w;
      break;
  }
  return static_cast<double>(sqrtl(sq));
}

inline double norm_H(const Eigenpair& pair, const WentzellParams& params) {
  return eigen_norm_H(pair.mu, pair.kind, params);
}

inline double eigenfunction_eval(const Eigenpair& pair, double x) {
  return pair.eval(x);
}

/// All Trig eigenpairs with global index up to n_max. The Trig branch
/// starts at n = 0 in the subcritical regime and at n = 1 otherwise
/// (index 0 being the hyperbolic/linear mode).
inline std::vector<Eigenpair> positive_eigenvalues(
    const WentzellParams& params, int n_max) {
  using detail::kPiL;
  if (n_max < 0) throw ConfigError("positive_eigenvalues: n_max < 0");
  const Regime regime = params.regime();
  const int n_lo = (regime == Regime::SubCritical) ? 0 : 1;
  const bool wide = params.b_over_d() < 0.0;  // pi n < mu_n < pi (n+1)

  const auto f = [&](long double m) {
    return characteristic_residual(m, params);
  };
  const auto df = [&](long double m) {
    return detail::characteristic_derivative(m, params);
  };

  std::vector<Eigenpair> out;
  out.reserve(std::max(0, n_max - n_lo + 1));
  for (int n = n_lo; n <= n_max; ++n) {
    long double lo = kPiL * n;
    long double hi = wide ? kPiL * (n + 1) : kPiL * n + kPiL / 2.0L;
    if (n == 0) lo = 1e-30L;  // h(0) = 0 is not the sought root
    const long double mu = detail::refine_root(f, df, lo, hi);
    Eigenpair pair;
    pair.n = n;
    pair.mu = mu;
    pair.lambda = mu * mu;
    pair.kind = EigenKind::Trig;
    pair.norm_h = eigen_norm_H(mu, EigenKind::Trig, params);
    out.push_back(pair);
  }
  return out;
}

/// The single nonpositive eigenvalue: hyperbolic mode when b/d > 1, the
/// linear zero mode when b/d = 1, none in the subcritical regime.
inline std::optional<Eigenpair> nonpositive_eigenvalue(
    const WentzellParams& params) {
  switch (params.regime()) {
    case Regime::SubCritical:
      return std::nullopt;
    case Regime::Critical: {
      Eigenpair pair;
      pair.n = 0;
      pair.mu = 0.0L;
      pair.lambda = 0.0L;
      pair.kind = EigenKind::Linear;
      pair.norm_h = eigen_norm_H(0.0L, EigenKind::Linear, params);
      return pair;
    }
    case Regime::SuperCritical: {
      const auto f = [&](long double m) {
        return hyperbolic_residual(m, params);
      };
      const auto df = [&](long double m) {
        return detail::hyperbolic_derivative(m, params);
      };
      // Positive near 0 (slope b/d - 1 > 0), negative for large mu; double
      // the upper end until the sign flips.
      long double hi = 1.0L;
      int guard = 0;
      while (f(hi) > 0.0L) {
        hi *= 2.0L;
        if (++guard > 60)
          throw BracketFailure("hyperbolic root: no sign change found");
      }
      const long double mu = detail::refine_root(f, df, 1e-30L, hi);
      Eigenpair pair;
      pair.n = 0;
      pair.mu = mu;
      pair.lambda = -mu * mu;
      pair.kind = EigenKind::Hyperbolic;
      pair.norm_h = eigen_norm_H(mu, EigenKind::Hyperbolic, params);
      return pair;
    }
  }
  return std::nullopt;
}

/// Complete spectrum up to global index n_max, smallest eigenvalue first.
inline std::vector<Eigenpair> eigenpairs(const WentzellParams& params,
                                         int n_max) {
  std::vector<Eigenpair> out;
  if (auto low = nonpositive_eigenvalue(params)) out.push_back(*low);
  auto trig = positive_eigenvalues(params, n_max);
  out.insert(out.end(), trig.begin(), trig.end());
  return out;
}

/// Two-term root asymptote pi n + d/(a pi n).
inline long double mu_asymptote(int n, const WentzellParams& params) {
  const long double da = static_cast<long double>(params.d()) / params.a();
  return detail::kPiL * n + da / (detail::kPiL * n);
}

// ---------------------------------------------------------------------------
// Expansions in the orthonormal basis Z_n = Y_n / ||Y_n||_H
// ---------------------------------------------------------------------------

struct SpectralCoeffs {
  WentzellParams params;
  double T_horizon = 1.0;
  std::vector<std::pair<int, double>> coeffs;  // (n, eta_n), sorted by n
};

enum class Direction { Forward, AdjointBackward };

/// Samples Z_n on a grid (boundary component included).
inline State sample_mode(const Eigenpair& pair, Grid grid) {
  State z(grid);
  for (int j = 0; j <= grid.n_x; ++j)
    z.values[j] = pair.eval_normalized(grid.node(j));
  return z;
}

namespace detail {

/// Composite Simpson weights on n+1 uniform nodes; odd interval counts get a
/// Simpson 3/8 tail.
inline std::vector<double> simpson_weights(int n, double dx) {
  std::vector<double> w(n + 1, 0.0);
  int even_end = (n % 2 == 0) ? n : n - 3;
  for (int j = 0; j + 2 <= even_end; j += 2) {
    w[j] += dx / 3.0;
    w[j + 1] += 4.0 * dx / 3.0;
    w[j + 2] += dx / 3.0;
  }
  if (n % 2 != 0) {
    const double c = 3.0 * dx / 8.0;
    w[n - 3] += c;
    w[n - 2] += 3.0 * c;
    w[n - 1] += 3.0 * c;
    w[n] += c;
  }
  return w;
}

}  // namespace detail

/// eta_n = (U0, Z_n)_H by composite Simpson on the state grid plus the
/// boundary term. Requires at least 8 grid points per wavelength of the
/// highest requested mode.
inline SpectralCoeffs expand(const State& u0,
                             const std::vector<Eigenpair>& pairs,
                             const WentzellParams& params,
                             double T_horizon = 1.0) {
  const Grid grid = u0.grid;
  long double mu_max = 0.0L;
  for (const auto& p : pairs) mu_max = std::max(mu_max, fabsl(p.mu));
  if (mu_max > 0.0L) {
    const double points_per_wavelength =
        2.0 * M_PI / (static_cast<double>(mu_max) * grid.dx());
    if (points_per_wavelength < 8.0)
      throw GridTooCoarse("expand: fewer than 8 points per wavelength");
  }
  const auto w = detail::simpson_weights(grid.n_x, grid.dx());
  SpectralCoeffs out{params, T_horizon, {}};
  out.coeffs.reserve(pairs.size());
  for (const auto& pair : pairs) {
    double eta = 0.0;
    for (int j = 0; j <= grid.n_x; ++j)
      eta += w[j] * u0.values[j] * pair.eval_normalized(grid.node(j));
    eta += params.weight() * u0.boundary() * pair.eval_normalized(1.0);
    out.coeffs.emplace_back(pair.n, eta);
  }
  return out;
}

/// Series solution sampled on a grid:
///   Forward:          sum eta_n e^{-lambda_n t} Z_n   (free decay of U0)
///   AdjointBackward:  sum beta_n e^{-lambda_n (T-t)} Z_n
inline State spectral_solution(const SpectralCoeffs& coeffs,
                               const std::vector<Eigenpair>& pairs,
                               Grid grid, double t, Direction direction) {
  if (t < 0.0 || t > coeffs.T_horizon + 1e-12)
    throw ConfigError("spectral_solution: t outside [0, T]");
  State u(grid);
  for (const auto& [n, eta] : coeffs.coeffs) {
    const Eigenpair* pair = nullptr;
    for (const auto& p : pairs)
      if (p.n == n) {
        pair = &p;
        break;
      }
    if (pair == nullptr)
      throw IndexMismatch("spectral_solution: coefficient without eigenpair");
    const double s =
        (direction == Direction::Forward) ? t : (coeffs.T_horizon - t);
    const double factor = eta * std::exp(-pair->lambda_d() * s);
    for (int j = 0; j <= grid.n_x; ++j)
      u.values[j] += factor * pair->eval_normalized(grid.node(j));
  }
  return u;
}

}  // namespace wentzell

#endif  // WENTZELL_SPECTRAL_HPP
