#ifndef WENTZELL_CORE_HPP
#define WENTZELL_CORE_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace wentzell {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BracketFailure final : SolverError {
  using SolverError::SolverError;
};
struct ShapeMismatch final : SolverError {
  using SolverError::SolverError;
};
struct SingularSystem final : SolverError {
  using SolverError::SolverError;
};
struct IllConditioned final : SolverError {
  using SolverError::SolverError;
};
struct IndexMismatch final : SolverError {
  using SolverError::SolverError;
};
struct GridTooCoarse final : SolverError {
  using SolverError::SolverError;
};
struct CgBreakdown final : SolverError {
  using SolverError::SolverError;
};

/// Bad user-facing configuration (CLI exit code 3).
struct ConfigError final : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Boundary parameters
// ---------------------------------------------------------------------------

enum class Regime { SubCritical, Critical, SuperCritical };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::SubCritical: return "subcritical";
    case Regime::Critical: return "critical";
    case Regime::SuperCritical: return "supercritical";
  }
  return "?";
}

/// Coefficients (a, b, d) of the boundary condition
///   a u_xx(1,t) + d u_x(1,t) - b u(1,t) = 0,
/// with a*d > 0. The ratio b/d selects the spectral regime.
class WentzellParams {
 public:
  WentzellParams(double a, double b, double d) : a_(a), b_(b), d_(d) {
    if (!(std::isfinite(a) && std::isfinite(b) && std::isfinite(d)))
      throw ConfigError("WentzellParams: coefficients must be finite");
    if (!(a * d > 0.0))
      throw ConfigError("WentzellParams: requires a*d > 0");
  }

  double a() const { return a_; }
  double b() const { return b_; }
  double d() const { return d_; }

  /// Weight a/d of the boundary term in the H inner product (positive).
  double weight() const { return a_ / d_; }
  double b_over_d() const { return b_ / d_; }

  /// The critical regime b/d = 1 changes the eigenstructure discontinuously,
  /// so it is detected exactly on b == d, with a tolerance fallback for
  /// ratios computed from non-representable inputs.
  Regime regime() const {
    if (b_ == d_ || std::fabs(b_ / d_ - 1.0) <= 1e-14) return Regime::Critical;
    return (b_ / d_ > 1.0) ? Regime::SuperCritical : Regime::SubCritical;
  }

 private:
  double a_, b_, d_;
};

// ---------------------------------------------------------------------------
// Grid / State / Control
// ---------------------------------------------------------------------------

/// Uniform grid x_j = j/n_x on [0,1].
struct Grid {
  int n_x = 0;

  explicit Grid(int n) : n_x(n) {
    if (n_x < 4) throw ConfigError("Grid: n_x must be >= 4");
  }

  double dx() const { return 1.0 / n_x; }
  double node(int j) const { return static_cast<double>(j) / n_x; }
  int size() const { return n_x + 1; }

  bool operator==(const Grid& o) const { return n_x == o.n_x; }
  bool operator!=(const Grid& o) const { return n_x != o.n_x; }
};

/// Grid samples of (u, u1) in H = L2(0,1) (+) R. The boundary value
/// u1 = u(1) is values[n_x] by the trace identification.
struct State {
  Grid grid;
  std::vector<double> values;  // size n_x + 1

  explicit State(Grid g) : grid(g), values(g.size(), 0.0) {}
  State(Grid g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (static_cast<int>(values.size()) != grid.size())
      throw ShapeMismatch("State: values size does not match grid");
  }

  static State zero(Grid g) { return State(g); }

  double boundary() const { return values.back(); }
  double& boundary() { return values.back(); }

  State& operator+=(const State& o) {
    require_same_grid(o);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    return *this;
  }
  State& operator-=(const State& o) {
    require_same_grid(o);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
    return *this;
  }
  State& operator*=(double c) {
    for (double& v : values) v *= c;
    return *this;
  }

  void require_same_grid(const State& o) const {
    if (grid != o.grid) throw ShapeMismatch("State: grid mismatch");
  }
};

inline State operator+(State p, const State& q) { return p += q; }
inline State operator-(State p, const State& q) { return p -= q; }
inline State operator*(double c, State p) { return p *= c; }

/// Uniformly sampled boundary control f(t) on [0,T].
struct Control {
  std::vector<double> times;
  std::vector<double> samples;

  Control() = default;
  Control(std::vector<double> t, std::vector<double> f)
      : times(std::move(t)), samples(std::move(f)) {
    if (times.size() != samples.size() || times.size() < 2)
      throw ShapeMismatch("Control: times/samples size mismatch");
    const double T = times.back();
    if (!(T > 0.0) || times.front() != 0.0)
      throw ShapeMismatch("Control: times must run from 0 to T > 0");
    const double dt = T / intervals();
    for (std::size_t i = 0; i < times.size(); ++i)
      if (std::fabs(times[i] - i * dt) > 1e-9 * T)
        throw ShapeMismatch("Control: nonuniform time sampling");
  }

  static Control zero(double T, int n_t) { return constant(0.0, T, n_t); }

  static Control constant(double value, double T, int n_t) {
    std::vector<double> t(n_t + 1), f(n_t + 1, value);
    for (int i = 0; i <= n_t; ++i) t[i] = T * i / n_t;
    return Control(std::move(t), std::move(f));
  }

  template <typename F>
  static Control sample(F&& fn, double T, int n_t) {
    std::vector<double> t(n_t + 1), f(n_t + 1);
    for (int i = 0; i <= n_t; ++i) {
      t[i] = T * i / n_t;
      f[i] = fn(t[i]);
    }
    return Control(std::move(t), std::move(f));
  }

  double horizon() const { return times.back(); }
  int intervals() const { return static_cast<int>(times.size()) - 1; }

  /// Linear interpolation between samples.
  double eval(double t) const {
    const double T = horizon();
    if (t <= times.front()) return samples.front();
    if (t >= T) return samples.back();
    const double dt = T / intervals();
    const int i = std::min(static_cast<int>(t / dt), intervals() - 1);
    const double w = (t - times[i]) / dt;
    return (1.0 - w) * samples[i] + w * samples[i + 1];
  }

  /// L2(0,T) norm by composite trapezoid.
  double l2_norm() const {
    const double dt = horizon() / intervals();
    double acc = 0.5 * (samples.front() * samples.front() +
                        samples.back() * samples.back());
    for (std::size_t i = 1; i + 1 < samples.size(); ++i)
      acc += samples[i] * samples[i];
    return std::sqrt(acc * dt);
  }
};

/// Trapezoid L2(0,T) inner product of two equally sampled signals.
inline double inner_l2(const Control& f, const Control& g) {
  if (f.times.size() != g.times.size() || f.horizon() != g.horizon())
    throw ShapeMismatch("inner_l2: sampling mismatch");
  const double dt = f.horizon() / f.intervals();
  double acc = 0.5 * (f.samples.front() * g.samples.front() +
                      f.samples.back() * g.samples.back());
  for (std::size_t i = 1; i + 1 < f.samples.size(); ++i)
    acc += f.samples[i] * g.samples[i];
  return acc * dt;
}

// ---------------------------------------------------------------------------
// Weighted inner product on H = L2(0,1) (+) R
// ---------------------------------------------------------------------------

/// ((u,u1),(v,v1))_H = int_0^1 u v dx + (a/d) u1 v1, the integral by
/// composite trapezoid on the shared grid.
inline double inner_H(const State& p, const State& q,
                      const WentzellParams& params) {
  p.require_same_grid(q);
  const int n = p.grid.n_x;
  const double dx = p.grid.dx();
  double acc = 0.5 * (p.values[0] * q.values[0] + p.values[n] * q.values[n]);
  for (int j = 1; j < n; ++j) acc += p.values[j] * q.values[j];
  return acc * dx + params.weight() * p.values[n] * q.values[n];
}

inline double norm_H(const State& p, const WentzellParams& params) {
  return std::sqrt(inner_H(p, p, params));
}

}  // namespace wentzell

#endif  // WENTZELL_CORE_HPP
