#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "wentzell/core.hpp"
#include "wentzell/quadrature.hpp"
#include "wentzell/spectral.hpp"

using namespace wentzell;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Independent root oracle: plain bisection on the characteristic function,
// no Newton polish, double precision.
double bisect_characteristic(double lo, double hi, const WentzellParams& p) {
  auto h = [&](double mu) {
    return (p.a() / p.d() * mu * mu + p.b() / p.d()) * std::sin(mu) -
           mu * std::cos(mu);
  };
  double flo = h(lo);
  REQUIRE(flo * h(hi) < 0.0);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (h(mid) * flo > 0) {
      lo = mid;
      flo = h(mid);
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double quadrature_norm_H(const Eigenpair& pair, const WentzellParams& p) {
  const double integral = integrate(
      [&](double x) { return pair.eval(x) * pair.eval(x); }, 0.0, 1.0, 1e-13);
  const double y1 = pair.eval(1.0);
  return std::sqrt(integral + p.weight() * y1 * y1);
}

}  // namespace

TEST_CASE("parameter validation and regime detection") {
  CHECK_THROWS_AS(WentzellParams(1.0, 1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(WentzellParams(1.0, 1.0, -3.0), ConfigError);
  CHECK_THROWS_AS(WentzellParams(0.0, 1.0, 1.0), ConfigError);

  CHECK(WentzellParams(1, 1, 3).regime() == Regime::SubCritical);
  CHECK(WentzellParams(1, -2, 1).regime() == Regime::SubCritical);
  CHECK(WentzellParams(1, 1, 1).regime() == Regime::Critical);
  CHECK(WentzellParams(1, 3, 1).regime() == Regime::SuperCritical);
  CHECK(WentzellParams(-1, -1, -3).regime() == Regime::SubCritical);
  CHECK(WentzellParams(2, 2 * (1.0 + 5e-15), 2).regime() == Regime::Critical);
}

TEST_CASE("characteristic residual evaluates the exact formula") {
  const WentzellParams p(1, 1, 3);
  CHECK_THAT((double)characteristic_residual(0.0L, p), WithinAbs(0.0, 1e-300));
  // at mu = pi the sine term vanishes and -mu cos(mu) = pi
  CHECK_THAT((double)characteristic_residual((long double)M_PI, p),
             WithinRel(M_PI, 1e-14));

  const auto pairs = positive_eigenvalues(p, 1);
  CHECK(std::fabs((double)characteristic_residual(pairs[1].mu, p)) < 1e-12);
}

TEST_CASE("trig roots match an independent bisection oracle") {
  const WentzellParams p(1, 1, 3);
  const auto pairs = positive_eigenvalues(p, 0);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].n == 0);
  CHECK(pairs[0].mu > 0.0L);
  CHECK(pairs[0].mu < (long double)M_PI / 2);
  CHECK(std::fabs((double)characteristic_residual(pairs[0].mu, p)) <= 1e-12);

  const double oracle = bisect_characteristic(1e-8, M_PI / 2, p);
  CHECK_THAT(pairs[0].mu_d(), WithinAbs(oracle, 1e-10));
}

TEST_CASE("trig roots sit inside the theoretical brackets") {
  SECTION("critical preset, n = 1..3") {
    const WentzellParams p(1, 1, 1);
    const auto pairs = positive_eigenvalues(p, 3);
    REQUIRE(pairs.size() == 3);  // trig branch starts at n = 1
    for (const auto& e : pairs) {
      CHECK(e.mu > (long double)M_PI * e.n);
      CHECK(e.mu < (long double)M_PI * e.n + M_PI / 2);
    }
  }
  SECTION("all presets, n <= 50") {
    for (const auto& p : {WentzellParams(1, 1, 3), WentzellParams(1, 1, 1),
                          WentzellParams(1, 3, 1)}) {
      const auto pairs = positive_eigenvalues(p, 50);
      long double prev = -1e30L;
      for (const auto& e : pairs) {
        CHECK(e.mu > (long double)M_PI * e.n);
        CHECK(e.mu < (long double)M_PI * e.n + M_PI / 2);
        CHECK(std::fabs((double)characteristic_residual(e.mu, p)) <= 1e-12);
        CHECK(e.lambda > prev);
        prev = e.lambda;
      }
    }
  }
  SECTION("negative b/d widens the bracket to (pi n, pi n + pi)") {
    const WentzellParams p(1, -2, 1);
    const auto pairs = positive_eigenvalues(p, 10);
    for (const auto& e : pairs) {
      CHECK(e.mu > (long double)M_PI * e.n);
      CHECK(e.mu < (long double)M_PI * (e.n + 1));
      CHECK(std::fabs((double)characteristic_residual(e.mu, p)) <= 1e-12);
    }
  }
  SECTION("scaling (a,b,d) -> (-a,-b,-d) leaves the roots unchanged") {
    const auto lhs = positive_eigenvalues(WentzellParams(1, 1, 3), 5);
    const auto rhs = positive_eigenvalues(WentzellParams(-1, -1, -3), 5);
    for (std::size_t i = 0; i < lhs.size(); ++i)
      CHECK_THAT(lhs[i].mu_d(), WithinRel(rhs[i].mu_d(), 1e-15));
  }
}

TEST_CASE("two-term asymptote pi n + d/(a pi n)") {
  const WentzellParams p(1, 1, 3);
  const auto pairs = positive_eigenvalues(p, 100);
  const double predicted = 100.0 * M_PI + 3.0 / (100.0 * M_PI);
  CHECK_THAT(pairs[100].mu_d(), WithinAbs(predicted, 1e-4));

  // n^3-scaled defect stays bounded (no growth trend)
  double head = 0.0, tail = 0.0;
  for (const auto& e : positive_eigenvalues(p, 60)) {
    if (e.n < 8) continue;
    const double defect =
        std::fabs((double)(e.mu - mu_asymptote(e.n, p))) * e.n * e.n * e.n;
    if (e.n <= 30)
      head = std::max(head, defect);
    else
      tail = std::max(tail, defect);
  }
  CHECK(tail <= 1.25 * head);
}

TEST_CASE("nonpositive eigenvalue per regime") {
  SECTION("subcritical: none") {
    CHECK_FALSE(nonpositive_eigenvalue(WentzellParams(1, 1, 3)).has_value());
  }
  SECTION("critical: linear zero mode") {
    const auto mode = nonpositive_eigenvalue(WentzellParams(1, 1, 1));
    REQUIRE(mode.has_value());
    CHECK(mode->kind == EigenKind::Linear);
    CHECK(mode->lambda == 0.0L);
    CHECK(mode->n == 0);
  }
  SECTION("supercritical: hyperbolic mode with negative eigenvalue") {
    const WentzellParams p(1, 3, 1);
    const auto mode = nonpositive_eigenvalue(p);
    REQUIRE(mode.has_value());
    CHECK(mode->kind == EigenKind::Hyperbolic);
    CHECK(mode->lambda < 0.0L);
    const long double mu = mode->mu;
    const long double resid =
        (3.0L - mu * mu) * sinhl(mu) - mu * coshl(mu);
    CHECK(std::fabs((double)resid) <= 1e-12);
  }
}

TEST_CASE("eigenfunction evaluation") {
  Eigenpair trig;
  trig.kind = EigenKind::Trig;
  trig.mu = (long double)M_PI / 2;
  CHECK_THAT(trig.eval(1.0), WithinRel(1.0, 1e-15));
  CHECK(trig.eval(0.0) == 0.0);

  Eigenpair linear;
  linear.kind = EigenKind::Linear;
  CHECK(linear.eval(0.7) == 0.7);
  CHECK(linear.eval(0.0) == 0.0);

  const auto hyp = nonpositive_eigenvalue(WentzellParams(1, 3, 1));
  CHECK(hyp->eval(0.0) == 0.0);
  CHECK(eigenfunction_eval(*hyp, 0.5) ==
        std::exp(hyp->mu_d() * 0.5) - std::exp(-hyp->mu_d() * 0.5));
}

TEST_CASE("closed-form H-norms agree with adaptive quadrature") {
  SECTION("linear mode, a=b=d=1") {
    const WentzellParams p(1, 1, 1);
    const auto mode = nonpositive_eigenvalue(p);
    CHECK_THAT(mode->norm_h, WithinRel(std::sqrt(4.0 / 3.0), 1e-15));
  }
  SECTION("trig mode") {
    const WentzellParams p(1, 1, 3);
    const auto pairs = positive_eigenvalues(p, 1);
    CHECK_THAT(pairs[1].norm_h, WithinAbs(quadrature_norm_H(pairs[1], p), 1e-10));
  }
  SECTION("hyperbolic mode") {
    const WentzellParams p(1, 3, 1);
    const auto mode = nonpositive_eigenvalue(p);
    CHECK_THAT(mode->norm_h, WithinAbs(quadrature_norm_H(*mode, p), 1e-10));
  }
}

TEST_CASE("orthonormality of Z_n across branches") {
  for (const auto& p : {WentzellParams(1, 1, 3), WentzellParams(1, 1, 1),
                        WentzellParams(1, 3, 1)}) {
    const auto pairs = eigenpairs(p, 8);
    for (std::size_t i = 0; i < pairs.size(); ++i)
      for (std::size_t j = i; j < pairs.size(); ++j) {
        const double integral = integrate(
            [&](double x) {
              return pairs[i].eval_normalized(x) * pairs[j].eval_normalized(x);
            },
            0.0, 1.0, 1e-12);
        const double ip = integral + p.weight() *
                                         pairs[i].eval_normalized(1.0) *
                                         pairs[j].eval_normalized(1.0);
        CHECK_THAT(ip, WithinAbs(i == j ? 1.0 : 0.0, 1e-8));
      }
  }
}

TEST_CASE("expansion coefficients") {
  const WentzellParams p(1, 1, 3);
  const Grid grid(400);
  const auto pairs = eigenpairs(p, 10);

  SECTION("zero datum has zero coefficients") {
    const auto coeffs = expand(State::zero(grid), pairs, p);
    for (const auto& [n, eta] : coeffs.coeffs) CHECK(eta == 0.0);
  }
  SECTION("a sampled mode expands to a Kronecker delta") {
    const State z2 = sample_mode(pairs[2], grid);
    const auto coeffs = expand(z2, pairs, p);
    for (const auto& [n, eta] : coeffs.coeffs)
      CHECK_THAT(eta, WithinAbs(n == 2 ? 1.0 : 0.0, 1e-6));
  }
  SECTION("re-summing reproduces the paper datum in H-norm") {
    State u0(grid);
    for (int j = 0; j < grid.n_x; ++j)
      u0.values[j] = std::sqrt(2.0) * std::sin(M_PI * grid.node(j));
    const auto coeffs = expand(u0, pairs, p);
    const State back = spectral_solution(coeffs, pairs, grid, 0.0,
                                         Direction::Forward);
    CHECK(norm_H(back - u0, p) / norm_H(u0, p) <= 1e-3);
  }
  SECTION("under-resolved grids are rejected") {
    const auto many = eigenpairs(p, 20);
    CHECK_THROWS_AS(expand(State::zero(Grid(16)), many, p), GridTooCoarse);
  }
}

TEST_CASE("series solution") {
  const WentzellParams p(1, 1, 3);
  const Grid grid(400);
  const auto pairs = eigenpairs(p, 3);

  SECTION("single decayed mode") {
    const State zk = sample_mode(pairs[1], grid);
    auto coeffs = expand(zk, pairs, p, 1.0);
    const State uT = spectral_solution(coeffs, pairs, grid, 1.0,
                                       Direction::Forward);
    const double factor = std::exp(-pairs[1].lambda_d());
    for (int j = 0; j <= grid.n_x; j += 37)
      CHECK_THAT(uT.values[j], WithinAbs(factor * zk.values[j], 1e-9));
  }
  SECTION("backward series at t = T reproduces the terminal expansion") {
    const State phiT = sample_mode(pairs[0], grid);
    auto coeffs = expand(phiT, pairs, p, 1.0);
    const State at_T = spectral_solution(coeffs, pairs, grid, 1.0,
                                         Direction::AdjointBackward);
    CHECK(norm_H(at_T - phiT, p) <= 1e-6);
  }
  SECTION("semigroup property: evolve, re-expand, evolve") {
    State u0(grid);
    for (int j = 0; j <= grid.n_x; ++j)
      u0.values[j] = 0.8 * pairs[0].eval_normalized(grid.node(j)) -
                     0.4 * pairs[1].eval_normalized(grid.node(j));
    const double t1 = 0.3, t2 = 0.45;
    auto coeffs = expand(u0, pairs, p, 1.0);
    const State mid = spectral_solution(coeffs, pairs, grid, t1,
                                        Direction::Forward);
    auto coeffs_mid = expand(mid, pairs, p, 1.0);
    const State two_step = spectral_solution(coeffs_mid, pairs, grid, t2,
                                             Direction::Forward);
    const State one_step = spectral_solution(coeffs, pairs, grid, t1 + t2,
                                             Direction::Forward);
    CHECK(norm_H(two_step - one_step, p) <= 1e-10);
  }
}
