#ifndef WENTZELL_IO_HPP
#define WENTZELL_IO_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wentzell/core.hpp"
#include "wentzell/pde.hpp"
#include "wentzell/spectral.hpp"

namespace wentzell {

/// 17 significant digits: enough for bit-faithful double round-trips.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string fmt21(long double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.21Lg", v);
  return buf;
}

inline void ensure_parent_dir(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

inline std::ofstream open_out(const std::string& path) {
  ensure_parent_dir(path);
  std::ofstream out(path);
  if (!out) throw SolverError("cannot open output file: " + path);
  return out;
}

inline void write_control_csv(const std::string& path, const Control& f) {
  auto out = open_out(path);
  out << "t,f\n";
  for (std::size_t i = 0; i < f.times.size(); ++i)
    out << fmt17(f.times[i]) << ',' << fmt17(f.samples[i]) << '\n';
}

/// Long format: one row per (t, x) sample.
inline void write_trajectory_csv(const std::string& path,
                                 const Trajectory& traj) {
  auto out = open_out(path);
  out << "t,x,u\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const State& s = traj.states[i];
    for (int j = 0; j <= s.grid.n_x; ++j)
      out << fmt17(traj.times[i]) << ',' << fmt17(s.grid.node(j)) << ','
          << fmt17(s.values[j]) << '\n';
  }
}

inline void write_state_csv(const std::string& path, const State& s) {
  auto out = open_out(path);
  out << "x,u\n";
  for (int j = 0; j <= s.grid.n_x; ++j)
    out << fmt17(s.grid.node(j)) << ',' << fmt17(s.values[j]) << '\n';
}

inline void write_eigenpairs_csv(const std::string& path,
                                 const std::vector<Eigenpair>& pairs) {
  auto out = open_out(path);
  out << "n,kind,mu,lambda,norm_H\n";
  for (const auto& p : pairs)
    out << p.n << ',' << to_string(p.kind) << ',' << fmt21(p.mu) << ','
        << fmt21(p.lambda) << ',' << fmt17(p.norm_h) << '\n';
}

inline void write_residuals_csv(const std::string& path,
                                const std::vector<double>& residuals) {
  auto out = open_out(path);
  out << "iter,residual\n";
  for (std::size_t k = 0; k < residuals.size(); ++k)
    out << k << ',' << fmt17(residuals[k]) << '\n';
}

/// Single-state JSON snapshot; nlohmann emits shortest round-trip doubles.
inline nlohmann::json state_to_json(const State& s, double t) {
  std::vector<double> x(s.grid.size());
  for (int j = 0; j <= s.grid.n_x; ++j) x[j] = s.grid.node(j);
  return nlohmann::json{{"schema_version", "1"},
                        {"t", t},
                        {"nx", s.grid.n_x},
                        {"x", x},
                        {"u", s.values},
                        {"u1", s.boundary()}};
}

inline void write_state_json(const std::string& path, const State& s,
                             double t) {
  auto out = open_out(path);
  out << state_to_json(s, t).dump(2) << '\n';
}

/// Trajectory as an array of state snapshots, optionally subsampled in time
/// (stride > 1 keeps every stride-th level plus the final one).
inline void write_trajectory_json(const std::string& path,
                                  const Trajectory& traj, int stride = 1) {
  if (stride < 1) throw ConfigError("write_trajectory_json: stride < 1");
  nlohmann::json snapshots = nlohmann::json::array();
  for (std::size_t i = 0; i < traj.times.size(); i += stride)
    snapshots.push_back(state_to_json(traj.states[i], traj.times[i]));
  if ((traj.times.size() - 1) % stride != 0)
    snapshots.push_back(
        state_to_json(traj.states.back(), traj.times.back()));
  auto out = open_out(path);
  out << nlohmann::json{{"schema_version", "1"}, {"snapshots", snapshots}}
             .dump(2)
      << '\n';
}

}  // namespace wentzell

#endif  // WENTZELL_IO_HPP
