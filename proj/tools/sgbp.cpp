// Command-line front end. Exit codes: 0 ok, 1 numerical failure, 2 usage or configuration error.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sgbp/sgbp.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNumerical = 1;
constexpr int kExitUsage = 2;

sgbp::SimulationConfig effective_config(const std::string& path, const std::vector<std::string>& sets) {
  sgbp::ConfigMap map;
  if (!path.empty()) map = sgbp::load_config_file(path);
  std::string overrides;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw sgbp::UsageError("--set expects key=value, got '" + s + "'");
    overrides += s + "\n";
  }
  for (auto& [k, v] : sgbp::parse_config_text(overrides, "--set")) map[k] = v;
  return sgbp::apply_config(map, {}, path.empty() ? "<defaults>" : path);
}

nlohmann::json matrix_json(const sgbp::ChaosMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i) {
    nlohmann::json r = nlohmann::json::array();
    for (int j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(r);
  }
  return rows;
}

nlohmann::json kernels_json(const sgbp::SimulationConfig& cfg) {
  const sgbp::ScalingContext s = sgbp::build_scaling(cfg.constants, cfg.scaling);
  const sgbp::GpcBasis basis(cfg.basis, cfg.basis_quadrature);
  const sgbp::KernelMatrices k = sgbp::build_kernels(s, basis);
  nlohmann::json j;
  j["version"] = sgbp::kVersion;
  j["basis"] = sgbp::to_string(cfg.basis);
  j["constants"] = {{"beta", s.beta}, {"A", s.A}, {"N", s.N}, {"B", s.B}, {"n_q", s.n_q},
                    {"K", s.optical_rate}, {"K0", s.acoustic_rate}};
  j["gram"] = matrix_json(k.gram);
  j["c_minus"] = matrix_json(k.c_minus);
  j["c_minus_polylog"] = matrix_json(sgbp::rescale_from_paper_basis(sgbp::compute_c_minus_analytic(s), basis));
  j["c_plus"] = matrix_json(k.c_plus);
  j["recombination_split"] = matrix_json(k.recomb_split);
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic Galerkin DG solver for the Boltzmann-Poisson system with a random lattice temperature"};
  app.require_subcommand(1);
  app.set_version_flag("--version", sgbp::kVersion);

  std::string config_path, out_dir, mode;
  std::vector<std::string> sets;
  double final_time = -1.0;
  int threads = 0;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "run a simulation and write a run directory");
  run->add_option("-c,--config", config_path, "configuration file")->required();
  run->add_option("-o,--out", out_dir, "run directory")->required();
  run->add_option("--mode", mode, "stochastic_recombination | no_recombination (overrides the config)");
  run->add_option("--final-time", final_time, "final time in ps (overrides the config)");
  run->add_option("--threads", threads, "worker count (recorded in the manifest)");
  run->add_option("--set", sets, "override a config key, e.g. --set grid.nx=20");
  run->add_flag("-q,--quiet", quiet, "no progress log");

  int kN = 30;
  std::string kbasis = "paper_unnormalized", kout, kconfig;
  auto* kernels = app.add_subcommand("kernels", "print the chaos kernel matrices and constants as JSON");
  kernels->add_option("--N", kN, "random interval divisor (|z| <= beta / N)");
  kernels->add_option("--basis", kbasis, "paper_unnormalized | orthonormal");
  kernels->add_option("--config", kconfig, "take physical constants from this configuration");
  kernels->add_option("-o,--out", kout, "write JSON here instead of stdout");

  std::string run_a, run_b, cmp_out;
  double tolerance = sgbp::kCompareTolerance;
  auto* compare = app.add_subcommand("compare", "compare the moments of two run directories");
  compare->add_option("run_a", run_a, "reference run directory")->required();
  compare->add_option("run_b", run_b, "other run directory")->required();
  compare->add_option("-o,--out", cmp_out, "report directory (default: <run_a>/compare)");
  compare->add_option("--tolerance", tolerance, "relative difference above which a moment is flagged");

  std::string dump_path;
  std::vector<std::string> dump_sets;
  auto* dump = app.add_subcommand("dump-config", "print the effective configuration with documentation");
  dump->add_option("-c,--config", dump_path, "configuration file (default: built-in defaults)");
  dump->add_option("--set", dump_sets, "override a config key");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) {
      if (!mode.empty()) sets.push_back("run.mode=" + mode);
      if (final_time > 0.0) sets.push_back("run.final_time_ps=" + sgbp::fmt(final_time));
      if (threads > 0) sets.push_back("run.threads=" + std::to_string(threads));
      const sgbp::SimulationConfig cfg = effective_config(config_path, sets);
      const auto summary = sgbp::run_to_directory(cfg, out_dir, quiet ? nullptr : &std::cerr);
      if (!quiet)
        std::cerr << "wrote " << summary.files.size() + 1 << " files to " << out_dir << " ("
                  << summary.final_state.step << " steps)\n";
    } else if (*kernels) {
      sgbp::SimulationConfig cfg = kconfig.empty() ? sgbp::SimulationConfig{} : sgbp::load_simulation_config(kconfig);
      cfg.scaling.N = kN;
      cfg.basis = sgbp::parse_normalization(kbasis);
      const std::string text = kernels_json(cfg).dump(2) + "\n";
      if (kout.empty())
        std::cout << text;
      else
        sgbp::write_file(kout, text);
    } else if (*compare) {
      const std::string dest = cmp_out.empty() ? (sgbp::fs::path(run_a) / "compare").string() : cmp_out;
      const auto rep = sgbp::compare_run_directories(run_a, run_b, dest, tolerance);
      std::cout << sgbp::read_file(sgbp::fs::path(dest) / "summary.txt");
      (void)rep;
    } else if (*dump) {
      std::cout << sgbp::dump_config(effective_config(dump_path, dump_sets));
    }
  } catch (const sgbp::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const sgbp::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const sgbp::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const sgbp::DomainError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}
