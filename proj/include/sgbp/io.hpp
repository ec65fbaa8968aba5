#pragma once

// Run-directory file formats.
//   moments.csv      time,i,x,density,momentum,energy,velocity,efield,potential
//   statistics.csv   time,i,k,m,x,r,mu,alpha0,alpha1,mean,variance,stddev
//   snapshot_NNNN.csv  component,i,k,m,T,X,R,M  (+ snapshot_NNNN.json with edges)
//   manifest.json    config echo, version, scaling digest, timings, file checksums

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgbp/error.hpp"
#include "sgbp/simulate.hpp"

namespace sgbp {

namespace fs = std::filesystem;

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw UsageError("cannot read '" + p.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw UsageError("cannot write '" + p.string() + "'");
  f << content;
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline constexpr const char* kMomentsHeader = "time,i,x,density,momentum,energy,velocity,efield,potential";
inline constexpr const char* kStatisticsHeader = "time,i,k,m,x,r,mu,alpha0,alpha1,mean,variance,stddev";
inline constexpr const char* kSnapshotHeader = "component,i,k,m,T,X,R,M";

inline std::string moments_rows(const MomentSet& m) {
  std::string out;
  for (std::size_t i = 0; i < m.x.size(); ++i) {
    out += fmt(m.time) + "," + std::to_string(i) + "," + fmt(m.x[i]) + "," + fmt(m.density[i]) + "," +
           fmt(m.momentum[i]) + "," + fmt(m.energy[i]) + "," + fmt(m.velocity[i]) + "," + fmt(m.efield[i]) + "," +
           fmt(m.potential[i]) + "\n";
  }
  return out;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

/// Parses moments.csv back into one MomentSet per output time.
inline std::vector<MomentSet> read_moments_csv(const fs::path& p) {
  if (!fs::exists(p)) throw UsageError("missing file '" + p.string() + "'");
  std::istringstream in(read_file(p));
  std::string line;
  if (!std::getline(in, line) || line != kMomentsHeader) throw UsageError("'" + p.string() + "': unexpected header");
  std::vector<MomentSet> out;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 9) throw UsageError("'" + p.string() + "' row " + std::to_string(row) + ": expected 9 fields");
    double v[9];
    for (int j = 0; j < 9; ++j) {
      try {
        v[j] = std::stod(f[j]);
      } catch (const std::exception&) {
        throw UsageError("'" + p.string() + "' row " + std::to_string(row) + ": bad number '" + f[j] + "'");
      }
    }
    if (out.empty() || out.back().time != v[0]) {
      out.emplace_back();
      out.back().time = v[0];
    }
    MomentSet& m = out.back();
    m.x.push_back(v[2]);
    m.density.push_back(v[3]);
    m.momentum.push_back(v[4]);
    m.energy.push_back(v[5]);
    m.velocity.push_back(v[6]);
    m.efield.push_back(v[7]);
    m.potential.push_back(v[8]);
    m.empty_cell.push_back(v[3] > 0.0 ? 0 : 1);
  }
  return out;
}

inline std::string statistics_rows(double time, const PhaseGrid& grid, const PhaseStatistics& st) {
  std::string out;
  for (int i = 0; i < grid.nx(); ++i)
    for (int k = 0; k < grid.nr(); ++k)
      for (int m = 0; m < grid.nmu(); ++m) {
        const std::size_t n = grid.index(i, k, m);
        out += fmt(time) + "," + std::to_string(i) + "," + std::to_string(k) + "," + std::to_string(m) + "," +
               fmt(grid.center(kAxisX, i)) + "," + fmt(grid.center(kAxisR, k)) + "," + fmt(grid.center(kAxisMu, m)) +
               "," + fmt(st.alpha0[n]) + "," + fmt(st.alpha1[n]) + "," + fmt(st.mean[n]) + "," +
               fmt(st.variance[n]) + "," + fmt(st.stddev[n]) + "\n";
      }
  return out;
}

struct Snapshot {
  double time = 0.0;
  PhaseGrid grid{1, 1, 1, 1.0};
  DofField field{grid};
};

/// Writes `<stem>.csv` and `<stem>.json`; returns both file names.
inline std::vector<std::string> write_snapshot(const fs::path& dir, const std::string& stem, double time,
                                               const PhaseGrid& grid, const DofField& field,
                                               const nlohmann::json& extra = nlohmann::json::object()) {
  std::string csv = std::string(kSnapshotHeader) + "\n";
  for (int c = 0; c < kChaosDim; ++c)
    for (int i = 0; i < grid.nx(); ++i)
      for (int k = 0; k < grid.nr(); ++k)
        for (int m = 0; m < grid.nmu(); ++m) {
          const std::size_t n = grid.index(i, k, m);
          csv += std::to_string(c) + "," + std::to_string(i) + "," + std::to_string(k) + "," + std::to_string(m) + "," +
                 fmt(field(c, kT, n)) + "," + fmt(field(c, kX, n)) + "," + fmt(field(c, kR, n)) + "," +
                 fmt(field(c, kM, n)) + "\n";
        }
  nlohmann::json side = extra;
  side["time"] = time;
  side["components"] = kChaosDim;
  side["x_edges"] = grid.edges(kAxisX);
  side["r_edges"] = grid.edges(kAxisR);
  side["mu_edges"] = grid.edges(kAxisMu);
  side["basis_functions"] = "Phi = T + X xi_x + R xi_r + M xi_mu on each cell, xi in [-1, 1]";
  write_file(dir / (stem + ".csv"), csv);
  write_file(dir / (stem + ".json"), side.dump(2) + "\n");
  return {stem + ".csv", stem + ".json"};
}

inline Snapshot read_snapshot(const fs::path& dir, const std::string& stem) {
  const fs::path jp = dir / (stem + ".json"), cp = dir / (stem + ".csv");
  if (!fs::exists(jp)) throw UsageError("missing file '" + jp.string() + "'");
  if (!fs::exists(cp)) throw UsageError("missing file '" + cp.string() + "'");
  const auto side = nlohmann::json::parse(read_file(jp));
  Snapshot s;
  s.time = side.at("time").get<double>();
  s.grid = PhaseGrid(side.at("x_edges").get<std::vector<double>>(), side.at("r_edges").get<std::vector<double>>(),
                     side.at("mu_edges").get<std::vector<double>>());
  s.field = DofField(s.grid);
  std::istringstream in(read_file(cp));
  std::string line;
  std::getline(in, line);
  if (line != kSnapshotHeader) throw UsageError("'" + cp.string() + "': unexpected header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 8) throw UsageError("'" + cp.string() + "': expected 8 fields");
    const std::size_t n = s.grid.index(std::stoi(f[1]), std::stoi(f[2]), std::stoi(f[3]));
    const int c = std::stoi(f[0]);
    s.field(c, kT, n) = std::stod(f[4]);
    s.field(c, kX, n) = std::stod(f[5]);
    s.field(c, kR, n) = std::stod(f[6]);
    s.field(c, kM, n) = std::stod(f[7]);
  }
  return s;
}

/// Listing entry for the manifest.
inline nlohmann::json file_entry(const fs::path& dir, const std::string& name) {
  const std::string bytes = read_file(dir / name);
  return {{"name", name}, {"bytes", bytes.size()}, {"fnv1a64", hex64(fnv1a(bytes))}};
}

}  // namespace sgbp
