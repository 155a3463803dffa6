#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "wentzell/core.hpp"
#include "wentzell/pde.hpp"
#include "wentzell/spectral.hpp"

using namespace wentzell;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

State sine_datum(Grid grid) {
  State u0(grid);
  for (int j = 0; j < grid.n_x; ++j)
    u0.values[j] = std::sqrt(2.0) * std::sin(M_PI * grid.node(j));
  return u0;
}

}  // namespace

TEST_CASE("zero data stay zero") {
  const WentzellParams p(1, 1, 3);
  const Grid grid(50);
  const Trajectory traj =
      solve_forward(State::zero(grid), Control::zero(1.0, 100), p, 100);
  for (const auto& s : traj.states)
    for (double v : s.values) CHECK(v == 0.0);

  const Trajectory adj = solve_adjoint(State::zero(grid), p, 100, 1.0);
  for (double f : adj.flux0) CHECK(f == 0.0);
}

TEST_CASE("uncontrolled forward run matches the spectral series") {
  const WentzellParams p(1, 1, 3);
  const Grid grid(200);
  const State u0 = sine_datum(grid);
  const auto pairs = eigenpairs(p, 12);
  const auto coeffs = expand(u0, pairs, p, 1.0);
  const State exact =
      spectral_solution(coeffs, pairs, grid, 1.0, Direction::Forward);
  const Trajectory traj =
      solve_forward(u0, Control::zero(1.0, 2000), p, 2000);
  const double rel = norm_H(traj.terminal() - exact, p) / norm_H(exact, p);
  CHECK(rel <= 1e-2);
}

TEST_CASE("single-mode H-norm decays by e^{-lambda T}") {
  const WentzellParams p(1, 1, 3);
  const Grid grid(200);
  const auto pairs = eigenpairs(p, 2);
  const State z0 = sample_mode(pairs[0], grid);
  const Trajectory traj = solve_forward(z0, Control::zero(1.0, 2000), p, 2000);
  const double observed = norm_H(traj.terminal(), p) / norm_H(z0, p);
  CHECK_THAT(observed, WithinRel(std::exp(-pairs[0].lambda_d()), 1e-2));
}

TEST_CASE("adjoint run reproduces the backward series for the slow mode") {
  const WentzellParams p(1, 1, 3);
  const Grid grid(200);
  const auto pairs = eigenpairs(p, 2);
  const State z0 = sample_mode(pairs[0], grid);
  const Trajectory traj = solve_adjoint(z0, p, 2000, 1.0);

  SECTION("state at t = 0") {
    const double factor = std::exp(-pairs[0].lambda_d());
    State exact = z0;
    exact *= factor;
    const double rel =
        norm_H(traj.initial() - exact, p) / norm_H(exact, p);
    CHECK(rel <= 1e-2);
  }
  SECTION("boundary flux trace") {
    const double amp = pairs[0].mu_d() / pairs[0].norm_h;  // z_0'(0)
    for (int i = 0; i <= 2000; i += 25) {
      const double t = traj.times[i];
      const double exact = amp * std::exp(-pairs[0].lambda_d() * (1.0 - t));
      CHECK_THAT(traj.flux0[i], WithinRel(exact, 2e-2));
    }
  }
}

TEST_CASE("elliptic resolvent solve") {
  const WentzellParams p(1, 1, 3);

  SECTION("zero right-hand side") {
    const State g = solve_elliptic(State::zero(Grid(64)), 0.0, p);
    for (double v : g.values) CHECK(v == 0.0);
  }
  SECTION("eigenfunction identity (alpha - A)^{-1} (lambda+alpha) z = z") {
    const Grid grid(200);
    const auto pairs = eigenpairs(p, 2);
    for (int n : {0, 1}) {
      State rhs = sample_mode(pairs[n], grid);
      rhs *= pairs[n].lambda_d();
      const State g = solve_elliptic(rhs, 0.0, p);
      const State z = sample_mode(pairs[n], grid);
      CHECK(norm_H(g - z, p) / norm_H(z, p) <= 1e-2);
    }
  }
  SECTION("back-substitution residual") {
    const Grid grid(16);
    State rhs(grid);
    for (int j = 0; j <= grid.n_x; ++j)
      rhs.values[j] = std::sin(2.7 * grid.node(j)) + 0.3;
    const State g = solve_elliptic(rhs, 0.0, p);
    const State back = apply_elliptic_operator(g, 0.0, p);
    for (int j = 1; j <= grid.n_x; ++j)
      CHECK_THAT(back.values[j], WithinAbs(rhs.values[j], 1e-12));
  }
  SECTION("two-point boundary closure variant") {
    PdeOptions opts;
    opts.stencil = BoundaryStencil::TwoPoint;
    const Grid grid(400);
    const auto pairs = eigenpairs(p, 1);
    State rhs = sample_mode(pairs[0], grid);
    rhs *= pairs[0].lambda_d();
    const State g = solve_elliptic(rhs, 0.0, p, opts);
    const State z = sample_mode(pairs[0], grid);
    CHECK(norm_H(g - z, p) / norm_H(z, p) <= 2e-2);  // first-order closure
  }
}

TEST_CASE("weighted inner product") {
  const WentzellParams p(1, 1, 3);
  const Grid grid(400);
  const auto pairs = eigenpairs(p, 3);

  CHECK(inner_H(State::zero(grid), State::zero(grid), p) == 0.0);

  const State z0 = sample_mode(pairs[0], grid);
  const State z1 = sample_mode(pairs[1], grid);
  CHECK_THAT(inner_H(z0, z0, p), WithinAbs(1.0, 1e-4));
  CHECK_THAT(inner_H(z0, z1, p), WithinAbs(0.0, 1e-4));

  CHECK_THROWS_AS(inner_H(z0, State::zero(Grid(100)), p), ShapeMismatch);
}

TEST_CASE("dual norm via the elliptic solve") {
  const WentzellParams p(1, 1, 3);
  const Grid grid(400);
  const auto pairs = eigenpairs(p, 2);

  CHECK(norm_Hminus1(State::zero(grid), 0.0, p) == 0.0);

  for (int n : {0, 1}) {
    const State z = sample_mode(pairs[n], grid);
    const double expected = 1.0 / std::sqrt(pairs[n].lambda_d());
    CHECK_THAT(norm_Hminus1(z, 0.0, p), WithinRel(expected, 2e-2));
  }

  const State z0 = sample_mode(pairs[0], grid);
  State scaled = z0;
  scaled *= -3.5;
  CHECK_THAT(norm_Hminus1(scaled, 0.0, p),
             WithinRel(3.5 * norm_Hminus1(z0, 0.0, p), 1e-12));
}

TEST_CASE("duality identity") {
  const WentzellParams p(1, 1, 3);
  const Grid grid(200);
  const auto pairs = eigenpairs(p, 2);

  SECTION("zero adjoint datum gives zero defect") {
    const Control f = Control::sample(
        [](double t) { return std::sin(3.0 * t); }, 1.0, 2000);
    const double defect =
        duality_check(State::zero(grid), f, State::zero(grid), p, 2000);
    CHECK(defect <= 1e-13);
  }
  SECTION("free decay of a single mode") {
    const State z0 = sample_mode(pairs[0], grid);
    const double defect =
        duality_check(z0, Control::zero(1.0, 2000), z0, p, 2000);
    CHECK(defect <= 1e-3);
  }
  SECTION("ramp control against the first excited mode") {
    const State u0 = sine_datum(grid);
    const State z1 = sample_mode(pairs[1], grid);
    const Control ramp = Control::sample([](double t) { return t; }, 1.0, 2000);
    const double defect = duality_check(u0, ramp, z1, p, 2000);
    CHECK(defect <= 1e-3);

    // defect shrinks under joint refinement
    const Grid coarse(50);
    const State u0c = sine_datum(coarse);
    const State z1c = sample_mode(pairs[1], coarse);
    const Control rampc = Control::sample([](double t) { return t; }, 1.0, 500);
    const double defect_coarse = duality_check(u0c, rampc, z1c, p, 500);
    CHECK(defect <= std::max(0.6 * defect_coarse, 1e-7));
  }
}

TEST_CASE("discrete maximum principle (implicit Euler, b <= 0)") {
  const WentzellParams p(1.0, -1.0, 1.0);
  std::mt19937_64 rng(20240817);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const Grid grid(64);
  for (auto stencil : {BoundaryStencil::TwoPoint, BoundaryStencil::ThreePoint}) {
    PdeOptions opts;
    opts.scheme = TimeScheme::ImplicitEuler;
    opts.stencil = stencil;
    for (int trial = 0; trial < 5; ++trial) {
      State u0(grid);
      for (double& v : u0.values) v = uni(rng);
      const Trajectory traj =
          solve_forward(u0, Control::zero(0.5, 128), p, 128, opts);
      for (const auto& s : traj.states)
        for (double v : s.values) CHECK(v >= -1e-12);
    }
  }
}

TEST_CASE("H-norm is nonincreasing for free decay when b/d < 1") {
  const WentzellParams p(1, 1, 3);
  const Grid grid(100);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  State u0(grid);
  for (double& v : u0.values) v = uni(rng);
  const Trajectory traj = solve_forward(u0, Control::zero(1.0, 200), p, 200);
  double prev = norm_H(traj.states.front(), p);
  for (const auto& s : traj.states) {
    const double cur = norm_H(s, p);
    CHECK(cur <= prev + 1e-12);
    prev = cur;
  }
}

TEST_CASE("spatial convergence is second order") {
  const WentzellParams p(1, 1, 3);
  std::vector<double> errs, hs;
  for (int n_x : {50, 100, 200}) {
    const Grid grid(n_x);
    const State u0 = sine_datum(grid);
    const auto pairs = eigenpairs(p, 10);
    const auto coeffs = expand(u0, pairs, p, 1.0);
    const State exact =
        spectral_solution(coeffs, pairs, grid, 1.0, Direction::Forward);
    const State numeric = forward_terminal(
        u0, std::vector<double>(10 * n_x + 1, 0.0), 1.0, p);
    errs.push_back(norm_H(numeric - exact, p) / norm_H(exact, p));
    hs.push_back(1.0 / n_x);
  }
  const double slope01 = std::log(errs[1] / errs[0]) / std::log(hs[1] / hs[0]);
  const double slope12 = std::log(errs[2] / errs[1]) / std::log(hs[2] / hs[1]);
  CHECK_THAT(slope01, WithinAbs(2.0, 0.3));
  CHECK_THAT(slope12, WithinAbs(2.0, 0.3));
}
