#pragma once

// Library entry points behind the `run` and `compare` subcommands.

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgbp/config.hpp"
#include "sgbp/io.hpp"
#include "sgbp/simulate.hpp"
#include "sgbp/version.hpp"

namespace sgbp {

struct RunSummary {
  fs::path dir;
  State final_state;
  std::vector<MomentSet> moments;
  Timings timings;
  std::vector<std::string> files;
};

/// Runs `config` and writes every output plus manifest.json into `dir`.
/// On a numerical failure a diagnostic snapshot and a failure manifest are
/// written before the NumericalError propagates.
inline RunSummary run_to_directory(const SimulationConfig& config, const fs::path& dir, std::ostream* log = nullptr) {
  fs::create_directories(dir);
  RunSummary out;
  out.dir = dir;
  const Simulation sim(config);
  const PhaseGrid& grid = sim.grid();

  write_file(dir / "scaling_audit.txt", sim.scaling().audit);
  write_file(dir / "config.toml", dump_config(config));
  out.files = {"scaling_audit.txt", "config.toml", "moments.csv", "statistics.csv"};

  std::ofstream moments(dir / "moments.csv", std::ios::binary);
  std::ofstream stats(dir / "statistics.csv", std::ios::binary);
  if (!moments || !stats) throw UsageError("cannot write outputs in '" + dir.string() + "'");
  moments << kMomentsHeader << "\n";
  stats << kStatisticsHeader << "\n";

  const nlohmann::json snapshot_meta = {{"mode", to_string(config.mode)}, {"basis", to_string(config.basis)}};
  int snapshot_count = 0;
  auto observe = [&](const State& s, int index, bool final) {
    MomentSet m = extract_moments(s, grid);
    moments << moments_rows(m);
    moments.flush();
    out.moments.push_back(std::move(m));
    const bool periodic = config.snapshot_every > 0 && index % config.snapshot_every == 0;
    if (final || periodic) {
      stats << statistics_rows(s.time, grid, phase_statistics(s.field, grid, sim.basis()));
      stats.flush();
      char stem[32];
      std::snprintf(stem, sizeof stem, "snapshot_%04d", snapshot_count++);
      for (auto& f : write_snapshot(dir, stem, s.time, grid, s.field, snapshot_meta)) out.files.push_back(f);
    }
    if (log)
      *log << "t = " << s.time << " ps, step " << s.step << ", mass " << sim.mass(s.field, 0) << std::endl;
  };

  auto manifest = [&](const std::string& status, const std::string& message) {
    moments.close();
    stats.close();
    nlohmann::json files = nlohmann::json::array();
    for (const auto& f : out.files)
      if (fs::exists(dir / f)) files.push_back(file_entry(dir, f));
    nlohmann::json j;
    j["version"] = kVersion;
    j["status"] = status;
    if (!message.empty()) j["message"] = message;
    j["config"] = config_values(config);
    j["scaling_audit_fnv1a64"] = hex64(fnv1a(sim.scaling().audit));
    j["scaling"] = {{"A", sim.scaling().A},     {"B", sim.scaling().B},     {"n_q", sim.scaling().n_q},
                    {"c_v", sim.scaling().c_v}, {"c_E", sim.scaling().c_E}, {"c_P", sim.scaling().c_P},
                    {"K", sim.scaling().optical_rate}, {"K0", sim.scaling().acoustic_rate}};
    j["timings_seconds"] = {{"setup", out.timings.setup},
                            {"stepping", out.timings.stepping},
                            {"output", out.timings.output}};
    j["steps"] = out.final_state.step;
    j["files"] = files;
    write_file(dir / "manifest.json", j.dump(2) + "\n");
  };

  auto on_failure = [&](const State& s, const NumericalError& e) {
    out.final_state = s;
    for (auto& f : write_snapshot(dir, "failure_snapshot", s.time, grid, s.field,
                                  {{"error", e.what()}, {"step", s.step}}))
      out.files.push_back(f);
    manifest("numerical_failure", e.what());
  };

  out.final_state = sim.run(observe, on_failure, &out.timings);
  manifest("ok", "");
  return out;
}

/// Loads both moments.csv files, writes compare.csv and summary.txt into `out_dir`.
inline ComparisonReport compare_run_directories(const fs::path& a, const fs::path& b, const fs::path& out_dir,
                                                double tolerance = kCompareTolerance) {
  for (const fs::path& d : {a, b})
    if (!fs::is_directory(d)) throw UsageError("run directory '" + d.string() + "' does not exist");
  const auto ma = read_moments_csv(a / "moments.csv");
  const auto mb = read_moments_csv(b / "moments.csv");
  const ComparisonReport rep = compare_runs(ma, mb, tolerance);
  fs::create_directories(out_dir);

  std::string csv = "x";
  for (const auto& n : moment_names()) csv += ",diff_" + n;
  csv += "\n";
  for (std::size_t i = 0; i < rep.x.size(); ++i) {
    csv += fmt(rep.x[i]);
    for (const auto& n : moment_names()) csv += "," + fmt(rep.final_difference.at(n)[i]);
    csv += "\n";
  }
  write_file(out_dir / "compare.csv", csv);

  std::ostringstream s;
  s << "run_a = " << a.string() << "\nrun_b = " << b.string() << "\nfinal_time = " << rep.final_time
    << "\ntolerance = " << rep.tolerance << "\n\n"
    << "moment relative max_abs_difference mean_abs_reference relative_all_times flagged\n";
  for (const auto& m : rep.moments)
    s << m.name << " " << fmt(m.relative) << " " << fmt(m.max_abs_difference) << " " << fmt(m.mean_abs_reference) << " "
      << fmt(m.relative_all_times) << " " << (m.flagged ? "yes" : "no") << "\n";
  std::string flagged;
  for (const auto& m : rep.moments)
    if (m.flagged) flagged += (flagged.empty() ? "" : " ") + m.name;
  s << "\ndiffering_moments = " << (flagged.empty() ? "none" : flagged) << "\n";
  write_file(out_dir / "summary.txt", s.str());
  return rep;
}

}  // namespace sgbp
