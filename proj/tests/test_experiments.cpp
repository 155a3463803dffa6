#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "wentzell/experiments.hpp"

using namespace wentzell;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::filesystem::path test_dir(const std::string& leaf) {
  const auto dir = std::filesystem::temp_directory_path() / "wentzell_tests" / leaf;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

CaseConfig quick_config(CaseId id, const std::string& out) {
  CaseConfig cfg = CaseConfig::preset(id);
  cfg.apply_reproduce_paper();
  cfg.n_modes = 4;
  cfg.out_dir = out;
  cfg.progress_every = 0;
  return cfg;
}

}  // namespace

TEST_CASE("presets pin the published parameter tuples") {
  const CaseConfig sub = CaseConfig::preset(CaseId::SubCritical);
  CHECK(sub.a == 1.0);
  CHECK(sub.b == 1.0);
  CHECK(sub.d == 3.0);
  CHECK(sub.alpha == 0.0);

  const CaseConfig crit = CaseConfig::preset(CaseId::Critical);
  CHECK(crit.a == 1.0);
  CHECK(crit.b == 1.0);
  CHECK(crit.d == 1.0);
  CHECK(crit.alpha == -1.0);

  const CaseConfig super = CaseConfig::preset(CaseId::SuperCritical);
  CHECK(super.a == 1.0);
  CHECK(super.b == 3.0);
  CHECK(super.d == 1.0);
  CHECK(super.alpha == 0.0);

  CaseConfig repro = sub;
  repro.apply_reproduce_paper();
  CHECK(repro.n_x == 25);
  CHECK(repro.T == 1.0);
  CHECK(repro.eps == 1e-3);
  CHECK(repro.max_iter == 7);
}

TEST_CASE("default initial datum is sqrt(2) sin(pi x) with zero trace") {
  const Grid grid(50);
  const State u0 = default_initial_datum(grid);
  CHECK(u0.boundary() == 0.0);
  CHECK_THAT(u0.values[25], WithinRel(std::sqrt(2.0), 1e-12));
  CHECK_THAT(norm_H(u0, WentzellParams(1, 1, 3)), WithinAbs(1.0, 1e-3));
}

TEST_CASE("run_case writes a complete, parseable report") {
  const auto dir = test_dir("run_case");
  CaseConfig cfg = quick_config(CaseId::SubCritical, dir.string());
  const RunReport report = run_case(cfg);

  for (const auto& file : report.files) {
    INFO(file);
    CHECK(std::filesystem::exists(file));
  }

  const auto j = nlohmann::json::parse(slurp((dir / "report.json").string()));
  CHECK(j["schema_version"] == "1");
  CHECK(j["config"]["nx"] == 25);
  CHECK(j["hum"]["iterations"] == 7);
  CHECK(j["moment"]["max_moment_residual"].get<double>() <= 1e-8);
  CHECK(j.contains("compare"));

  SECTION("identical configs produce byte-identical CSV outputs") {
    const auto dir2 = test_dir("run_case_repeat");
    CaseConfig cfg2 = cfg;
    cfg2.out_dir = dir2.string();
    run_case(cfg2);
    for (const auto* name :
         {"uncontrolled.csv", "hum_control.csv", "hum_residuals.csv",
          "moment_control.csv", "eigenpairs.csv"})
      CHECK(slurp((dir / name).string()) == slurp((dir2 / name).string()));
  }
}

TEST_CASE("all three presets run end to end at reproduction settings") {
  for (auto id : {CaseId::SubCritical, CaseId::Critical, CaseId::SuperCritical}) {
    const auto dir = test_dir(std::string("preset_") + to_string(id));
    CaseConfig cfg = quick_config(id, dir.string());
    const RunReport report = run_case(cfg);
    INFO(to_string(id));
    CHECK(report.has_hum);
    CHECK(report.has_moment);
    CHECK(report.hum_iterations == 7);
    CHECK(report.moment_max_residual <= 1e-8);
    const bool expect_shift = cfg.params().b_over_d() >= 1.0;
    CHECK((report.moment_shift > 0.0) == expect_shift);
    for (const auto& file : report.files) CHECK(std::filesystem::exists(file));
  }
}

TEST_CASE("floating-point CSV fields round-trip") {
  const double values[] = {M_PI, 1.0 / 3.0, -2.2250738585072014e-308,
                           6.02214076e23};
  for (double v : values) CHECK(std::stod(fmt17(v)) == v);
}

TEST_CASE("compare_controls") {
  SECTION("zero datum makes both controls vanish") {
    const auto dir = test_dir("compare_zero");
    CaseConfig cfg = quick_config(CaseId::SubCritical, dir.string());
    const CompareReport cmp =
        compare_controls(cfg, State::zero(Grid(cfg.n_x)));
    CHECK(cmp.control_l2_distance == 0.0);
    CHECK(cmp.hum_terminal_H == 0.0);
    CHECK(cmp.moment_terminal_H == 0.0);
  }

  SECTION("both methods reduce the terminal norm on the subcritical preset") {
    const auto dir = test_dir("compare_sub");
    CaseConfig cfg = CaseConfig::preset(CaseId::SubCritical);
    cfg.out_dir = dir.string();
    cfg.n_x = 200;
    cfg.n_t = 2000;
    cfg.tol = 1e-3;
    cfg.n_modes = 10;
    cfg.progress_every = 0;
    const RunReport report = run_case(cfg);
    REQUIRE(report.has_compare);
    CHECK(report.hum_terminal_H <= 0.2 * report.uncontrolled_oracle_H);
    CHECK(report.moment_terminal_H <= 0.2 * report.uncontrolled_oracle_H);
    // both leave the targeted low modes near zero
    for (int n = 0; n < 4; ++n) {
      CHECK(std::fabs(report.compare.hum_mode_coeffs[n]) <= 1e-2);
      CHECK(std::fabs(report.compare.moment_mode_coeffs[n]) <= 1e-2);
    }
    CHECK(report.compare.control_l2_distance <
          report.hum_control_l2 + report.moment_control_l2);
  }
}

TEST_CASE("convergence study") {
  CaseConfig cfg = CaseConfig::preset(CaseId::SubCritical);
  cfg.n_t = 100;

  SECTION("single level yields one row and no fit") {
    const ConvergenceTable table = convergence_study(cfg, {64});
    REQUIRE(table.rows.size() == 1);
    CHECK(std::isnan(table.fitted_order));
  }
  SECTION("levels must increase") {
    CHECK_THROWS_AS(convergence_study(cfg, {100, 50}), ConfigError);
  }
  SECTION("fitted spatial order is 2") {
    const ConvergenceTable table = convergence_study(cfg, {50, 100, 200});
    CHECK_THAT(table.fitted_order, WithinAbs(2.0, 0.3));
  }
}

TEST_CASE("critical zero mode is invariant in the uncontrolled run") {
  const WentzellParams p(1, 1, 1);
  const Grid grid(100);
  const State u0 = default_initial_datum(grid);
  const auto mode0 = *nonpositive_eigenvalue(p);
  REQUIRE(mode0.kind == EigenKind::Linear);
  const State z0 = sample_mode(mode0, grid);
  const Trajectory traj = solve_forward(u0, Control::zero(1.0, 400), p, 400);
  const double at0 = inner_H(traj.initial(), z0, p);
  const double atT = inner_H(traj.terminal(), z0, p);
  CHECK_THAT(atT, WithinAbs(at0, 1e-3));
}

TEST_CASE("invalid configurations are rejected") {
  CaseConfig cfg = CaseConfig::preset(CaseId::SubCritical);
  cfg.n_modes = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = CaseConfig::preset(CaseId::SubCritical);
  cfg.n_x = 16;  // cannot resolve six modes
  cfg.n_t = 32;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  cfg = CaseConfig::preset(CaseId::Critical);
  cfg.alpha = 0.0;  // eigenvalue collision
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
