#ifndef WENTZELL_QUADRATURE_HPP
#define WENTZELL_QUADRATURE_HPP

#include <cmath>
#include <cstdlib>

namespace wentzell {

namespace detail {

// Gauss-Kronrod 7-15 nodes/weights (QUADPACK dqk15).
inline constexpr double kGk15Nodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};
inline constexpr double kGk15Weights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr double kGauss7Weights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

template <typename F>
void gk15(const F& f, double a, double b, double& kronrod, double& err,
          double& resabs) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double resk = kGk15Weights[7] * fc;
  double resg = kGauss7Weights[3] * fc;
  double absk = kGk15Weights[7] * std::fabs(fc);
  for (int i = 0; i < 7; ++i) {
    const double x = h * kGk15Nodes[i];
    const double f1 = f(c - x);
    const double f2 = f(c + x);
    resk += kGk15Weights[i] * (f1 + f2);
    absk += kGk15Weights[i] * (std::fabs(f1) + std::fabs(f2));
    if (i % 2 == 1) resg += kGauss7Weights[i / 2] * (f1 + f2);
  }
  kronrod = resk * h;
  err = std::fabs((resk - resg) * h);
  resabs = absk * std::fabs(h);
}

template <typename F>
double adapt(const F& f, double a, double b, double tol, int depth) {
  double val, err, resabs;
  gk15(f, a, b, val, err, resabs);
  // stop at the local tolerance, the rounding floor of the panel, or the
  // depth cap; large cancelling integrands otherwise subdivide forever
  if (err <= tol || err <= 5e-15 * resabs || depth >= 30) return val;
  const double c = 0.5 * (a + b);
  return adapt(f, a, c, 0.5 * tol, depth + 1) +
         adapt(f, c, b, 0.5 * tol, depth + 1);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod integration of f over [a,b] to absolute
/// tolerance abs_tol. Used as the verification-grade quadrature for norms,
/// orthogonality and moment residual checks.
template <typename F>
double integrate(const F& f, double a, double b, double abs_tol = 1e-12) {
  if (a == b) return 0.0;
  return detail::adapt(f, a, b, abs_tol, 0);
}

}  // namespace wentzell

#endif  // WENTZELL_QUADRATURE_HPP
