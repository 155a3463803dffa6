#ifndef WENTZELL_EXPERIMENTS_HPP
#define WENTZELL_EXPERIMENTS_HPP

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "wentzell/core.hpp"
#include "wentzell/hum.hpp"
#include "wentzell/io.hpp"
#include "wentzell/moment.hpp"
#include "wentzell/pde.hpp"
#include "wentzell/spectral.hpp"

#include <json.hpp>

namespace wentzell {

enum class CaseId { SubCritical, Critical, SuperCritical, Custom };
enum class Method { Hum, Moment, Both };

inline const char* to_string(CaseId c) {
  switch (c) {
    case CaseId::SubCritical: return "sub";
    case CaseId::Critical: return "crit";
    case CaseId::SuperCritical: return "super";
    case CaseId::Custom: return "custom";
  }
  return "?";
}

inline const char* to_string(Method m) {
  switch (m) {
    case Method::Hum: return "hum";
    case Method::Moment: return "moment";
    case Method::Both: return "both";
  }
  return "?";
}

struct CaseConfig {
  CaseId case_id = CaseId::SubCritical;
  double a = 1.0, b = 1.0, d = 3.0;
  int n_x = 200;
  int n_t = 2000;
  double T = 1.0;
  double eps = 1e-3;
  double alpha = 0.0;
  double tol = 1e-3;
  int max_iter = 5000;
  int n_modes = 6;
  std::string out_dir = "out";
  Method method = Method::Both;
  bool reproduce_paper = false;
  CgInner inner = CgInner::Energy;
  PdeOptions pde{};
  int progress_every = 50;

  WentzellParams params() const { return WentzellParams(a, b, d); }

  /// The three parameter sets of the numerical experiments, with the alpha
  /// choice that keeps the elliptic systems uniquely solvable.
  static CaseConfig preset(CaseId id) {
    CaseConfig cfg;
    cfg.case_id = id;
    switch (id) {
      case CaseId::SubCritical:
        cfg.a = 1.0; cfg.b = 1.0; cfg.d = 3.0; cfg.alpha = 0.0;
        break;
      case CaseId::Critical:
        cfg.a = 1.0; cfg.b = 1.0; cfg.d = 1.0; cfg.alpha = -1.0;
        break;
      case CaseId::SuperCritical:
        cfg.a = 1.0; cfg.b = 3.0; cfg.d = 1.0; cfg.alpha = 0.0;
        break;
      case CaseId::Custom:
        break;
    }
    return cfg;
  }

  /// Reproduction settings: the coarse mesh and fixed iteration count used
  /// for the published plots (N_x = 25, T = 1, eps = 1e-3, 7 CG iterations,
  /// zero initial guess).
  void apply_reproduce_paper() {
    reproduce_paper = true;
    n_x = 25;
    n_t = 50;  // dt <= dx
    T = 1.0;
    eps = 1e-3;
    max_iter = 7;
    tol = 1e-15;  // iteration count is the binding stop
  }

  HumConfig hum_config() const {
    HumConfig h;
    h.eps = eps;
    h.alpha = alpha;
    h.tol = tol;
    h.max_iter = max_iter;
    h.n_x = n_x;
    h.n_t = n_t;
    h.T = T;
    h.inner = inner;
    h.pde = pde;
    h.progress_every = progress_every;
    return h;
  }

  void validate() const {
    params();  // checks ad > 0
    if (n_x < 4 || n_t < 1) throw ConfigError("CaseConfig: bad grid sizes");
    if (!(T > 0.0)) throw ConfigError("CaseConfig: T must be positive");
    if (n_modes < 1 || n_modes > 12)
      throw ConfigError("CaseConfig: n_modes must lie in [1, 12]");
    if (out_dir.empty()) throw ConfigError("CaseConfig: out_dir empty");
    hum_config().validate(params());
    const auto controlled = eigenpairs(params(), n_modes - 1);
    if (2.0 * M_PI * n_x / controlled.back().mu_d() < 8.0)
      throw ConfigError("CaseConfig: grid cannot resolve the requested modes");
  }
};

inline nlohmann::json config_to_json(const CaseConfig& cfg) {
  return nlohmann::json{
      {"case", to_string(cfg.case_id)},
      {"a", cfg.a},
      {"b", cfg.b},
      {"d", cfg.d},
      {"nx", cfg.n_x},
      {"nt", cfg.n_t},
      {"T", cfg.T},
      {"eps", cfg.eps},
      {"alpha", cfg.alpha},
      {"tol", cfg.tol},
      {"max_iter", cfg.max_iter},
      {"modes", cfg.n_modes},
      {"method", to_string(cfg.method)},
      {"out", cfg.out_dir},
      {"reproduce_paper", cfg.reproduce_paper},
  };
}

/// u0(x) = sqrt(2) sin(pi x) with boundary value u_{0,1} = 0.
inline State default_initial_datum(Grid grid) {
  State u0(grid);
  for (int j = 0; j < grid.n_x; ++j)
    u0.values[j] = std::sqrt(2.0) * std::sin(M_PI * grid.node(j));
  u0.values[grid.n_x] = 0.0;
  return u0;
}

/// Free-decay terminal H-norm from the spectral series (orthonormal basis,
/// so the norm is the l2 norm of the decayed coefficients).
inline double uncontrolled_terminal_norm_oracle(
    const State& u0, const std::vector<Eigenpair>& pairs,
    const WentzellParams& params, double T) {
  const auto coeffs = expand(u0, pairs, params, T);
  double acc = 0.0;
  for (std::size_t i = 0; i < coeffs.coeffs.size(); ++i) {
    const double decayed =
        coeffs.coeffs[i].second * std::exp(-pairs[i].lambda_d() * T);
    acc += decayed * decayed;
  }
  return std::sqrt(acc);
}

struct CompareReport {
  double control_l2_distance = 0.0;
  double hum_terminal_H = 0.0;
  double moment_terminal_H = 0.0;
  std::vector<double> hum_mode_coeffs;     // (U_hum(T), Z_n)_H
  std::vector<double> moment_mode_coeffs;  // (U_mom(T), Z_n)_H
};

struct RunReport {
  CaseConfig config;
  double uncontrolled_terminal_H = 0.0;
  double uncontrolled_terminal_Hminus1 = 0.0;
  double uncontrolled_oracle_H = 0.0;
  double hminus1_alpha = 0.0;

  bool has_hum = false;
  int hum_iterations = 0;
  double hum_final_residual = 0.0;
  std::string hum_stop;
  double hum_terminal_H = 0.0;
  double hum_terminal_Hminus1 = 0.0;
  double hum_j_eps = 0.0;
  double hum_control_l2 = 0.0;
  double hum_control_min = 0.0;

  bool has_moment = false;
  double moment_gram_condition = 0.0;
  double moment_shift = 0.0;
  double moment_max_residual = 0.0;
  double moment_terminal_H = 0.0;
  double moment_control_l2 = 0.0;
  double moment_control_min = 0.0;
  std::vector<double> moment_null_witnesses;

  bool has_compare = false;
  CompareReport compare;

  // solver failures are recorded here and the run continues with partial
  // outputs; empty strings mean success
  std::string hum_error, moment_error;

  double ms_uncontrolled = 0.0, ms_hum = 0.0, ms_moment = 0.0;
  std::vector<std::string> files;

  bool ok() const { return hum_error.empty() && moment_error.empty(); }
  nlohmann::json to_json() const;
};

namespace detail {

inline double control_min(const Control& f) {
  double m = f.samples.front();
  for (double v : f.samples) m = std::min(m, v);
  return m;
}

inline double control_l2_distance(const Control& f, const Control& g) {
  if (f.times.size() != g.times.size())
    throw ShapeMismatch("control_l2_distance: sampling mismatch");
  std::vector<double> diff(f.samples.size());
  for (std::size_t i = 0; i < diff.size(); ++i)
    diff[i] = f.samples[i] - g.samples[i];
  return Control(f.times, std::move(diff)).l2_norm();
}

inline std::vector<double> terminal_mode_coeffs(
    const State& terminal, const std::vector<Eigenpair>& pairs,
    const WentzellParams& params) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& pair : pairs)
    out.push_back(inner_H(terminal, sample_mode(pair, terminal.grid), params));
  return out;
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

/// Full pipeline for one case: uncontrolled run, HUM and/or moment controls,
/// controlled runs, CSV outputs and the JSON report.
inline RunReport run_case(const CaseConfig& cfg,
                          std::optional<State> u0_override = std::nullopt) {
  cfg.validate();
  const WentzellParams params = cfg.params();
  const Grid grid(cfg.n_x);
  const State u0 = u0_override.value_or(default_initial_datum(grid));
  const std::string dir = cfg.out_dir + "/";

  RunReport report;
  report.config = cfg;

  const auto pairs = eigenpairs(params, cfg.n_modes - 1);
  // spectral oracle over every mode the grid resolves (8 points/wavelength)
  auto oracle_pairs = eigenpairs(params, std::max(cfg.n_modes + 4, 12));
  while (!oracle_pairs.empty() &&
         2.0 * M_PI * cfg.n_x / oracle_pairs.back().mu_d() < 8.0)
    oracle_pairs.pop_back();
  const double lambda_min = pairs.front().lambda_d();
  report.hminus1_alpha =
      (cfg.alpha + lambda_min > 1e-10) ? cfg.alpha : (-lambda_min + 1.0);
  write_eigenpairs_csv(dir + "eigenpairs.csv", oracle_pairs);
  report.files.push_back(dir + "eigenpairs.csv");

  {
    detail::Stopwatch sw;
    const Trajectory free_run =
        solve_forward(u0, Control::zero(cfg.T, cfg.n_t), params, cfg.n_t, cfg.pde);
    report.ms_uncontrolled = sw.ms();
    report.uncontrolled_terminal_H = norm_H(free_run.terminal(), params);
    report.uncontrolled_terminal_Hminus1 = norm_Hminus1(
        free_run.terminal(), report.hminus1_alpha, params, cfg.pde);
    report.uncontrolled_oracle_H =
        uncontrolled_terminal_norm_oracle(u0, oracle_pairs, params, cfg.T);
    write_trajectory_csv(dir + "uncontrolled.csv", free_run);
    report.files.push_back(dir + "uncontrolled.csv");
  }

  std::optional<Control> hum_control, moment_control_fn;

  if (cfg.method == Method::Hum || cfg.method == Method::Both) try {
    detail::Stopwatch sw;
    const HumResult hum = hum_cg(u0, cfg.hum_config(), params);
    report.ms_hum = sw.ms();
    report.has_hum = true;
    report.hum_iterations = hum.iterations;
    report.hum_final_residual = hum.residuals.back();
    report.hum_stop = to_string(hum.stop);
    report.hum_terminal_H = hum.terminal_norm_H;
    report.hum_terminal_Hminus1 = hum.terminal_norm_Hminus1;
    report.hum_j_eps = hum.j_eps;
    report.hum_control_l2 = hum.control.l2_norm();
    report.hum_control_min = detail::control_min(hum.control);
    write_control_csv(dir + "hum_control.csv", hum.control);
    write_residuals_csv(dir + "hum_residuals.csv", hum.residuals);
    const Trajectory controlled =
        solve_forward(u0, hum.control, params, cfg.n_t, cfg.pde);
    write_trajectory_csv(dir + "hum_controlled.csv", controlled);
    write_state_json(dir + "hum_terminal.json", controlled.terminal(), cfg.T);
    {
      auto out = open_out(dir + "hum_result.json");
      out << nlohmann::json{{"schema_version", "1"},
                            {"config", config_to_json(cfg)},
                            {"iterations", hum.iterations},
                            {"stop", to_string(hum.stop)},
                            {"residuals", hum.residuals},
                            {"cg_energy", hum.energy},
                            {"terminal_norm_H", hum.terminal_norm_H},
                            {"terminal_norm_Hminus1", hum.terminal_norm_Hminus1},
                            {"hminus1_alpha", hum.hminus1_alpha},
                            {"j_eps", hum.j_eps}}
                   .dump(2)
            << '\n';
    }
    report.files.push_back(dir + "hum_control.csv");
    report.files.push_back(dir + "hum_residuals.csv");
    report.files.push_back(dir + "hum_controlled.csv");
    report.files.push_back(dir + "hum_terminal.json");
    report.files.push_back(dir + "hum_result.json");
    hum_control = hum.control;
  } catch (const SolverError& e) {
    report.hum_error = e.what();
  }

  if (cfg.method == Method::Moment || cfg.method == Method::Both) try {
    detail::Stopwatch sw;
    const auto fam = ExpFamily::from_pairs(pairs, cfg.T);
    const MomentResult mom =
        moment_control(u0, fam, pairs, params, cfg.n_t);
    report.ms_moment = sw.ms();
    report.has_moment = true;
    report.moment_gram_condition = mom.gram_condition;
    report.moment_shift = mom.shift;
    report.moment_max_residual = 0.0;
    for (double r : mom.residuals)
      report.moment_max_residual = std::max(report.moment_max_residual, r);
    report.moment_control_l2 = mom.control.l2_norm();
    report.moment_control_min = detail::control_min(mom.control);
    write_control_csv(dir + "moment_control.csv", mom.control);
    const Trajectory controlled =
        solve_forward(u0, mom.control, params, cfg.n_t, cfg.pde);
    report.moment_terminal_H = norm_H(controlled.terminal(), params);
    report.moment_null_witnesses =
        verify_null_modes(mom.control, u0, pairs, params, cfg.n_x, cfg.n_t,
                          cfg.pde);
    write_trajectory_csv(dir + "moment_controlled.csv", controlled);
    write_state_json(dir + "moment_terminal.json", controlled.terminal(),
                     cfg.T);
    {
      auto out = open_out(dir + "moment_result.json");
      out << nlohmann::json{{"schema_version", "1"},
                            {"config", config_to_json(cfg)},
                            {"modes", mom.n_modes},
                            {"shift", mom.shift},
                            {"gram_condition", mom.gram_condition},
                            {"rhs", mom.rhs},
                            {"residuals", mom.residuals},
                            {"null_mode_witnesses",
                             report.moment_null_witnesses},
                            {"terminal_norm_H", report.moment_terminal_H}}
                   .dump(2)
            << '\n';
    }
    report.files.push_back(dir + "moment_control.csv");
    report.files.push_back(dir + "moment_controlled.csv");
    report.files.push_back(dir + "moment_terminal.json");
    report.files.push_back(dir + "moment_result.json");
    moment_control_fn = mom.control;
  }

  if (hum_control && moment_control_fn) {
    report.has_compare = true;
    report.compare.control_l2_distance =
        detail::control_l2_distance(*hum_control, *moment_control_fn);
    const State hum_terminal = forward_terminal(
        u0, hum_control->samples, cfg.T, params, cfg.pde);
    const State mom_terminal = forward_terminal(
        u0, moment_control_fn->samples, cfg.T, params, cfg.pde);
    report.compare.hum_terminal_H = norm_H(hum_terminal, params);
    report.compare.moment_terminal_H = norm_H(mom_terminal, params);
    report.compare.hum_mode_coeffs =
        detail::terminal_mode_coeffs(hum_terminal, pairs, params);
    report.compare.moment_mode_coeffs =
        detail::terminal_mode_coeffs(mom_terminal, pairs, params);
  }

  const std::string report_path = dir + "report.json";
  {
    auto out = open_out(report_path);
    out << report.to_json().dump(2) << '\n';
  }
  report.files.push_back(report_path);
  return report;
}

/// Cross-validation fragment: runs both methods and compares controls.
inline CompareReport compare_controls(CaseConfig cfg,
                                      std::optional<State> u0 = std::nullopt) {
  cfg.method = Method::Both;
  return run_case(cfg, std::move(u0)).compare;
}

// ---------------------------------------------------------------------------
// Convergence study
// ---------------------------------------------------------------------------

struct ConvergenceRow {
  int n_x = 0;
  int n_t = 0;
  double error_H = 0.0;  // terminal H-error of solve_forward vs the series
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  double fitted_order = std::numeric_limits<double>::quiet_NaN();
};

/// Uncontrolled forward runs against the spectral oracle at t = T on a
/// sequence of grids, with a log-log least-squares slope when there are at
/// least two levels. n_t scales with n_x to keep dt <= dx.
inline ConvergenceTable convergence_study(const CaseConfig& cfg,
                                          const std::vector<int>& levels) {
  const WentzellParams params = cfg.params();
  ConvergenceTable table;
  for (std::size_t i = 1; i < levels.size(); ++i)
    if (levels[i] <= levels[i - 1])
      throw ConfigError("convergence_study: levels must increase");
  for (int n_x : levels) {
    const Grid grid(n_x);
    const State u0 = default_initial_datum(grid);
    const int n_t = std::max(10 * n_x, cfg.n_t);
    // series oracle over the modes this level resolves; the dropped tail is
    // exponentially negligible at t = T
    auto pairs = eigenpairs(params, 16);
    while (!pairs.empty() && 2.0 * M_PI * n_x / pairs.back().mu_d() < 8.0)
      pairs.pop_back();
    const auto coeffs = expand(u0, pairs, params, cfg.T);
    const State exact =
        spectral_solution(coeffs, pairs, grid, cfg.T, Direction::Forward);
    const State numeric = forward_terminal(
        u0, std::vector<double>(n_t + 1, 0.0), cfg.T, params, cfg.pde);
    const double err =
        norm_H(numeric - exact, params) / std::max(norm_H(exact, params), 1e-300);
    table.rows.push_back({n_x, n_t, err});
  }
  if (table.rows.size() >= 2) {
    // least-squares slope of log(err) against log(dx)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = static_cast<int>(table.rows.size());
    for (const auto& row : table.rows) {
      const double x = std::log(1.0 / row.n_x);
      const double y = std::log(row.error_H);
      sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    table.fitted_order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return table;
}

inline void write_convergence_csv(const std::string& path,
                                  const ConvergenceTable& table) {
  auto out = open_out(path);
  out << "n_x,n_t,error_H\n";
  for (const auto& row : table.rows)
    out << row.n_x << ',' << row.n_t << ',' << fmt17(row.error_H) << '\n';
}

inline nlohmann::json RunReport::to_json() const {
  nlohmann::json j{
      {"schema_version", "1"},
      {"config", config_to_json(config)},
      {"uncontrolled",
       {{"terminal_norm_H", uncontrolled_terminal_H},
        {"terminal_norm_Hminus1", uncontrolled_terminal_Hminus1},
        {"oracle_terminal_norm_H", uncontrolled_oracle_H},
        {"hminus1_alpha", hminus1_alpha}}},
      {"timings_ms",
       {{"uncontrolled", ms_uncontrolled},
        {"hum", ms_hum},
        {"moment", ms_moment}}},
      {"files", files},
  };
  if (has_hum)
    j["hum"] = {{"iterations", hum_iterations},
                {"final_residual", hum_final_residual},
                {"stop", hum_stop},
                {"terminal_norm_H", hum_terminal_H},
                {"terminal_norm_Hminus1", hum_terminal_Hminus1},
                {"j_eps", hum_j_eps},
                {"control_l2", hum_control_l2},
                {"control_min", hum_control_min}};
  if (has_moment)
    j["moment"] = {{"gram_condition", moment_gram_condition},
                   {"shift", moment_shift},
                   {"max_moment_residual", moment_max_residual},
                   {"terminal_norm_H", moment_terminal_H},
                   {"control_l2", moment_control_l2},
                   {"control_min", moment_control_min},
                   {"null_mode_witnesses", moment_null_witnesses}};
  if (has_compare)
    j["compare"] = {{"control_l2_distance", compare.control_l2_distance},
                    {"hum_terminal_norm_H", compare.hum_terminal_H},
                    {"moment_terminal_norm_H", compare.moment_terminal_H},
                    {"hum_mode_coeffs", compare.hum_mode_coeffs},
                    {"moment_mode_coeffs", compare.moment_mode_coeffs}};
  return j;
}

}  // namespace wentzell

#endif  // WENTZELL_EXPERIMENTS_HPP
