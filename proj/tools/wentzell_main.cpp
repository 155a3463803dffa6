// Command-line driver: eigenvalue tables, single-case control runs,
// HUM-vs-moment comparison and grid-convergence studies.
//
// Exit codes: 0 success, 2 solver failure, 3 invalid configuration.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wentzell/wentzell.hpp"

namespace {

using namespace wentzell;

CaseId parse_case(const std::string& s) {
  if (s == "sub") return CaseId::SubCritical;
  if (s == "crit") return CaseId::Critical;
  if (s == "super") return CaseId::SuperCritical;
  if (s == "custom") return CaseId::Custom;
  throw ConfigError("unknown case: " + s + " (want sub|crit|super|custom)");
}

Method parse_method(const std::string& s) {
  if (s == "hum") return Method::Hum;
  if (s == "moment") return Method::Moment;
  if (s == "both") return Method::Both;
  throw ConfigError("unknown method: " + s + " (want hum|moment|both)");
}

struct CliOptions {
  std::string case_name = "sub";
  std::string config_file;
  double a = 0, b = 0, d = 0;
  int nx = 0, nt = 0;
  double T = 0, eps = 0, alpha = 0, tol = 0;
  int max_iter = 0, modes = 0;
  std::string method = "both";
  std::string out_dir;
  bool reproduce_paper = false;

  // option pointers, to detect which flags were actually given
  std::map<std::string, CLI::Option*> opts;

  void add_to(CLI::App* cmd, bool with_solver_flags) {
    opts["case"] = cmd->add_option("--case", case_name,
                                   "preset: sub|crit|super|custom");
    opts["config"] =
        cmd->add_option("--config", config_file, "JSON config file");
    opts["a"] = cmd->add_option("--a", a, "boundary coefficient a");
    opts["b"] = cmd->add_option("--b", b, "boundary coefficient b");
    opts["d"] = cmd->add_option("--d", d, "boundary coefficient d");
    opts["nx"] = cmd->add_option("--nx", nx, "spatial intervals");
    opts["out"] = cmd->add_option("--out", out_dir, "output directory");
    if (!with_solver_flags) return;
    opts["nt"] = cmd->add_option("--nt", nt, "time steps");
    opts["T"] = cmd->add_option("--T", T, "time horizon");
    opts["eps"] = cmd->add_option("--eps", eps, "HUM penalization");
    opts["alpha"] = cmd->add_option("--alpha", alpha, "resolvent shift");
    opts["tol"] = cmd->add_option("--tol", tol, "CG stopping tolerance");
    opts["max-iter"] =
        cmd->add_option("--max-iter", max_iter, "CG iteration cap");
    opts["modes"] = cmd->add_option("--modes", modes, "moment modes");
    opts["method"] =
        cmd->add_option("--method", method, "hum|moment|both");
    opts["reproduce-paper"] = cmd->add_flag(
        "--reproduce-paper", reproduce_paper,
        "pin N_x=25, T=1, eps=1e-3, 7 CG iterations, zero initial guess");
  }

  bool given(const std::string& key) const {
    auto it = opts.find(key);
    return it != opts.end() && it->second != nullptr && it->second->count() > 0;
  }

  /// preset -> JSON file -> explicit flags, later layers override earlier.
  CaseConfig build() const {
    CaseConfig cfg = CaseConfig::preset(
        parse_case(given("case") ? case_name : default_case_name()));
    if (!config_file.empty()) apply_json(cfg);
    if (given("case")) cfg.case_id = parse_case(case_name);
    if (given("a")) cfg.a = a;
    if (given("b")) cfg.b = b;
    if (given("d")) cfg.d = d;
    if (given("nx")) cfg.n_x = nx;
    if (given("nt")) cfg.n_t = nt;
    if (given("T")) cfg.T = T;
    if (given("eps")) cfg.eps = eps;
    if (given("alpha")) cfg.alpha = alpha;
    if (given("tol")) cfg.tol = tol;
    if (given("max-iter")) cfg.max_iter = max_iter;
    if (given("modes")) cfg.n_modes = modes;
    if (given("method")) cfg.method = parse_method(method);
    if (given("out")) cfg.out_dir = out_dir;
    if (reproduce_paper) cfg.apply_reproduce_paper();
    return cfg;
  }

  std::string default_case_name() const {
    if (config_file.empty()) return case_name;
    nlohmann::json j = load_json(config_file);
    return j.value("case", case_name);
  }

  static nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("bad JSON config: ") + e.what());
    }
    return j;
  }

  void apply_json(CaseConfig& cfg) const {
    const nlohmann::json j = load_json(config_file);
    if (j.contains("case")) cfg.case_id = parse_case(j["case"]);
    cfg.a = j.value("a", cfg.a);
    cfg.b = j.value("b", cfg.b);
    cfg.d = j.value("d", cfg.d);
    cfg.n_x = j.value("nx", cfg.n_x);
    cfg.n_t = j.value("nt", cfg.n_t);
    cfg.T = j.value("T", cfg.T);
    cfg.eps = j.value("eps", cfg.eps);
    cfg.alpha = j.value("alpha", cfg.alpha);
    cfg.tol = j.value("tol", cfg.tol);
    cfg.max_iter = j.value("max_iter", cfg.max_iter);
    cfg.n_modes = j.value("modes", cfg.n_modes);
    if (j.contains("method")) cfg.method = parse_method(j["method"]);
    cfg.out_dir = j.value("out", cfg.out_dir);
    if (j.value("reproduce_paper", false)) cfg.apply_reproduce_paper();
  }
};

int cmd_spectrum(const CliOptions& cli, int n_modes) {
  CaseConfig cfg = cli.build();
  const WentzellParams params = cfg.params();
  const auto pairs = eigenpairs(params, n_modes);
  std::printf("# case=%s a=%g b=%g d=%g regime=%s\n", to_string(cfg.case_id),
              params.a(), params.b(), params.d(),
              to_string(params.regime()));
  std::printf("%4s %-11s %-24s %-24s %s\n", "n", "kind", "mu", "lambda",
              "norm_H");
  for (const auto& p : pairs)
    std::printf("%4d %-11s %-24.16Lg %-24.16Lg %.16g\n", p.n,
                to_string(p.kind), p.mu, p.lambda, p.norm_h);
  if (!cfg.out_dir.empty() && cli.given("out")) {
    const std::string path = cfg.out_dir + "/eigenpairs.csv";
    write_eigenpairs_csv(path, pairs);
    std::printf("# wrote %s\n", path.c_str());
  }
  return 0;
}

void print_report(const RunReport& r) {
  std::printf("case=%s regime=%s out=%s\n", to_string(r.config.case_id),
              to_string(r.config.params().regime()), r.config.out_dir.c_str());
  std::printf("uncontrolled terminal: |U(T)|_H=%.6g (oracle %.6g)\n",
              r.uncontrolled_terminal_H, r.uncontrolled_oracle_H);
  if (r.has_hum)
    std::printf(
        "hum: stop=%s iters=%d residual=%.3e |U(T)|_H=%.6g "
        "|f|_L2=%.6g min f=%.6g [%.0f ms]\n",
        r.hum_stop.c_str(), r.hum_iterations, r.hum_final_residual,
        r.hum_terminal_H, r.hum_control_l2, r.hum_control_min, r.ms_hum);
  if (r.has_moment)
    std::printf(
        "moment: modes=%d cond=%.3e shift=%.3g max residual=%.3e "
        "|U(T)|_H=%.6g |f|_L2=%.6g min f=%.6g [%.0f ms]\n",
        r.config.n_modes, r.moment_gram_condition, r.moment_shift,
        r.moment_max_residual, r.moment_terminal_H, r.moment_control_l2,
        r.moment_control_min, r.ms_moment);
  if (r.has_compare)
    std::printf("compare: |f_hum - f_moment|_L2 = %.6g\n",
                r.compare.control_l2_distance);
  std::printf("report: %s\n", r.files.back().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Boundary null controls for the 1D heat equation with a Wentzell "
      "boundary condition"};
  app.require_subcommand(1);

  CliOptions spectrum_cli, run_cli, compare_cli, converge_cli;
  int spectrum_modes = 20;
  std::vector<int> levels{50, 100, 200, 400};

  auto* spectrum = app.add_subcommand("spectrum", "eigenvalue table");
  spectrum_cli.add_to(spectrum, false);
  spectrum->add_option("--modes", spectrum_modes, "highest mode index");

  auto* run = app.add_subcommand("run", "run one case end to end");
  run_cli.add_to(run, true);

  auto* compare = app.add_subcommand(
      "compare", "run both methods and cross-validate the controls");
  compare_cli.add_to(compare, true);

  auto* converge =
      app.add_subcommand("converge", "grid-convergence study vs the series");
  converge_cli.add_to(converge, true);
  converge->add_option("--levels", levels, "grid levels")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  }

  try {
    if (spectrum->parsed()) return cmd_spectrum(spectrum_cli, spectrum_modes);
    if (run->parsed()) {
      print_report(run_case(run_cli.build()));
      return 0;
    }
    if (compare->parsed()) {
      CaseConfig cfg = compare_cli.build();
      cfg.method = Method::Both;
      print_report(run_case(cfg));
      return 0;
    }
    if (converge->parsed()) {
      CaseConfig cfg = converge_cli.build();
      const ConvergenceTable table = convergence_study(cfg, levels);
      std::printf("%8s %8s %s\n", "n_x", "n_t", "error_H");
      for (const auto& row : table.rows)
        std::printf("%8d %8d %.6e\n", row.n_x, row.n_t, row.error_H);
      if (table.rows.size() >= 2)
        std::printf("fitted spatial order: %.3f\n", table.fitted_order);
      if (!cfg.out_dir.empty() && converge_cli.given("out")) {
        write_convergence_csv(cfg.out_dir + "/convergence.csv", table);
        std::printf("# wrote %s/convergence.csv\n", cfg.out_dir.c_str());
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "invalid config: %s\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid config: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return 2;
  }
  return 3;
}
