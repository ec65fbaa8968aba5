#pragma once

// Time integration of the stochastic Galerkin Boltzmann-Poisson system.
// Each Heun stage recomputes density -> Poisson -> field -> transport and
// collision residual, so the field always matches the stage state.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "sgbp/collision.hpp"
#include "sgbp/device.hpp"
#include "sgbp/error.hpp"
#include "sgbp/gpc_basis.hpp"
#include "sgbp/gpc_kernels.hpp"
#include "sgbp/phase_grid.hpp"
#include "sgbp/poisson.hpp"
#include "sgbp/scaling.hpp"
#include "sgbp/transport.hpp"

namespace sgbp {

enum class InitialCondition { maxwellian, discrete_equilibrium };

inline InitialCondition parse_initial_condition(std::string_view s) {
  if (s == "maxwellian") return InitialCondition::maxwellian;
  if (s == "discrete_equilibrium") return InitialCondition::discrete_equilibrium;
  throw ConfigError("unknown initial condition '" + std::string(s) + "'");
}
inline std::string to_string(InitialCondition ic) {
  return ic == InitialCondition::maxwellian ? "maxwellian" : "discrete_equilibrium";
}

struct SimulationConfig {
  RecombinationMode mode = RecombinationMode::stochastic_recombination;
  double final_time = 10.0;       // ps
  double output_interval = 1.0;   // ps; moments are recorded at multiples of this
  int snapshot_every = 0;         // write a phase-space snapshot every n-th output; 0 = final only
  double cfl = 0.3;
  int nx = 50;
  int nr = 24;
  int nmu = 12;
  int threads = 1;

  PhysicalConstants constants;
  ScalingOverrides scaling;
  DiodeGeometry diode;
  bool uniform_doping = false;    // single doping level n_plus everywhere

  BasisNormalization basis = BasisNormalization::orthonormal;
  int basis_quadrature = 64;
  int shell_nodes = 8;
  CollisionForm collision_form = CollisionForm::full;
  LossWeighting loss_weighting = LossWeighting::conservative;
  InitialCondition initial = InitialCondition::maxwellian;

  // test switches
  bool collisions = true;
  bool self_consistent_field = true;
  XBoundary x_boundary = XBoundary::charge_neutral;

  void validate() const {
    if (!(final_time > 0.0) || !std::isfinite(final_time)) throw ConfigError("final_time must be positive");
    if (!(cfl > 0.0 && cfl < 1.0)) throw ConfigError("cfl must lie in (0, 1)");
    if (!(output_interval > 0.0)) throw ConfigError("output_interval must be positive");
    if (nx < 1 || nr < 1 || nmu < 1) throw ConfigError("grid sizes must be positive");
    if (snapshot_every < 0) throw ConfigError("snapshot_every must be >= 0");
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (shell_nodes < 1) throw ConfigError("shell_nodes must be >= 1");
  }
};

/// Cell-center moments of gPC component 0 along x at one time.
struct MomentSet {
  double time = 0.0;
  std::vector<double> x;
  std::vector<double> density;
  std::vector<double> momentum;  // 2pi int sqrt(r) mu Phi_0, velocity in units of hbar k*/m*
  std::vector<double> energy;    // mean energy per electron, units of kB T_L
  std::vector<double> velocity;  // momentum / density
  std::vector<double> efield;
  std::vector<double> potential;
  std::vector<int> empty_cell;   // 1 where density <= 0 (energy and velocity reported as 0)
};

/// Pointwise statistics at (x, r, mu) cell centers, alpha = Phi / (sqrt(r)/2).
struct PhaseStatistics {
  std::vector<double> alpha0, alpha1, mean, variance, stddev;
};

struct State {
  double time = 0.0;
  long step = 0;
  DofField field;
  DensityProfile density;
  FieldProfile potential;
};

struct StepDiagnostics {
  double dt = 0.0;
  std::array<double, kChaosDim> mass_before{};
  std::array<double, kChaosDim> mass_after{};
  std::array<double, kChaosDim> boundary_inflow{};  // integrated net inflow over the step
};

struct Timings {
  double setup = 0.0;
  double stepping = 0.0;
  double output = 0.0;
};

class Simulation {
 public:
  explicit Simulation(SimulationConfig config)
      : config_(std::move(config)),
        scaling_(build_scaling(config_.constants, config_.scaling)),
        basis_(config_.basis, config_.basis_quadrature),
        kernels_(build_kernels(scaling_, basis_)),
        weights_(collision_weights(kernels_, config_.mode, config_.loss_weighting)),
        grid_(config_.nx, config_.nr, config_.nmu, scaling_.r_max),
        device_(make_device()),
        couplings_(build_shell_couplings(grid_, scaling_, config_.shell_nodes)),
        transport_(grid_, scaling_.c_v, config_.self_consistent_field ? scaling_.c_E : 0.0),
        boundary_(make_boundary()) {
    config_.validate();
  }

  const SimulationConfig& config() const { return config_; }
  const ScalingContext& scaling() const { return scaling_; }
  const GpcBasis& basis() const { return basis_; }
  const KernelMatrices& kernels() const { return kernels_; }
  const CollisionWeights& weights() const { return weights_; }
  const PhaseGrid& grid() const { return grid_; }
  const DeviceProfile& device() const { return device_; }
  const ShellCouplings& couplings() const { return couplings_; }
  const TransportOperator& transport() const { return transport_; }
  const BoundarySpec& boundary() const { return boundary_; }

  /// Component 0 = projection of C N_D(x) e^{-r} sqrt(r)/2 with C fixed per
  /// x-cell so that the P1 density equals the P1 projection of N_D; component 1 = 0.
  DofField initial_condition() const {
    const PhaseGrid slab({0.0, 1.0}, grid_.edges(kAxisR), grid_.edges(kAxisMu));
    std::vector<double> t(grid_.nr() * grid_.nmu()), r(t.size());
    double slab_density = 0.0;
    if (config_.initial == InitialCondition::maxwellian) {
      DofField g(slab);
      l2_project([](double, double rr, double) { return std::exp(-rr) * 0.5 * std::sqrt(rr); }, slab, g, 0,
                 CellQuadrature(1, 16, 1));
      for (int k = 0; k < grid_.nr(); ++k)
        for (int m = 0; m < grid_.nmu(); ++m) {
          const std::size_t n = slab.index(0, k, m);
          t[n] = g(0, kT, n);
          r[n] = g(0, kR, n);
        }
      slab_density = 2.0 * std::numbers::pi * integrate(g, slab, 0);
    }
    DofField f(grid_);
    std::optional<EquilibriumProfile> eq;
    if (config_.initial == InitialCondition::discrete_equilibrium) eq = discrete_equilibrium(grid_, couplings_, weights_);
    for (int i = 0; i < grid_.nx(); ++i) {
      const double a = grid_.lower(kAxisX, i), b = grid_.upper(kAxisX, i);
      const double nd_mean = device_.average_doping(a, b);
      // first moment of N_D on the cell, exact for piecewise constants
      const double nd_slope = 3.0 * doping_first_moment(a, b);
      for (int k = 0; k < grid_.nr(); ++k)
        for (int m = 0; m < grid_.nmu(); ++m) {
          const std::size_t n = grid_.index(i, k, m);
          const std::size_t s = slab.index(0, k, m);
          if (eq) {
            for (int c = 0; c < kChaosDim; ++c) {
              f(c, kT, n) = nd_mean * eq->T[k](c);
              f(c, kX, n) = nd_slope * eq->T[k](c);
              f(c, kR, n) = nd_mean * eq->R[k](c);
            }
          } else {
            f(0, kT, n) = nd_mean * t[s] / slab_density;
            f(0, kX, n) = nd_slope * t[s] / slab_density;
            f(0, kR, n) = nd_mean * r[s] / slab_density;
          }
        }
    }
    return f;
  }

  State initial_state() const {
    State s;
    s.field = initial_condition();
    refresh(s);
    return s;
  }

  /// Recomputes density and potential for the current field.
  void refresh(State& s) const {
    s.density = compute_density(s.field, grid_);
    s.potential = solve_field(s.density);
  }

  FieldProfile solve_field(const DensityProfile& rho) const {
    if (!config_.self_consistent_field) {
      const DeviceProfile flat = DeviceProfile::uniform(1.0, device_.relative_permittivity(), 0.0);
      DensityProfile ones{std::vector<double>(grid_.nx(), 1.0), std::vector<double>(grid_.nx(), 0.0)};
      return solve_poisson(ones, grid_, flat, scaling_.c_P);  // V = E = 0
    }
    return solve_poisson(rho, grid_, device_, scaling_.c_P);
  }

  /// Full right-hand side dPhi/dt. Returns the field profile used.
  FieldProfile residual(const DofField& in, DofField& out, BoundaryFluxes* fluxes = nullptr) const {
    const DensityProfile rho = compute_density(in, grid_);
    FieldProfile fp = solve_field(rho);
    const NodalField ef = config_.self_consistent_field ? transport_.sample(fp) : transport_.constant(0.0);
    const GhostScaling ghost = apply_boundary(rho, boundary_);
    transport_.apply(in, out, ef, boundary_, ghost, fluxes);
    if (config_.collisions)
      apply_collision(in, out, grid_, couplings_, weights_, 0, grid_.nx(), config_.collision_form);
    return fp;
  }

  /// 1 / (max over cells of (|a1|/dx + |a4|/dr + |a5|/dmu) / cfl + nu), using
  /// cell maxima of |mu|, sqrt(r), 1 - mu^2, the cell average of r^{-1/2} and
  /// the largest collision loss rate nu.
  double stable_dt(const FieldProfile& fp) const {
    const NodalField ef = config_.self_consistent_field ? transport_.sample(fp) : transport_.constant(0.0);
    const double cv = scaling_.c_v;
    const double cE = config_.self_consistent_field ? scaling_.c_E : 0.0;
    double worst = 0.0;
    for (int i = 0; i < grid_.nx(); ++i) {
      double emax = 0.0;
      for (double e : ef.values[i]) emax = std::max(emax, std::abs(e));
      emax = std::max(emax, std::abs(fp.cell_efield()[i]));
      for (int k = 0; k < grid_.nr(); ++k) {
        const double rt = std::sqrt(grid_.upper(kAxisR, k));
        const double a = grid_.lower(kAxisR, k), b = grid_.upper(kAxisR, k);
        const double inv_root_avg = 2.0 * (std::sqrt(b) - std::sqrt(a)) / (b - a);
        for (int m = 0; m < grid_.nmu(); ++m) {
          const double lo = grid_.lower(kAxisMu, m), hi = grid_.upper(kAxisMu, m);
          const double mu_abs = std::max(std::abs(lo), std::abs(hi));
          const double sin2 = (lo <= 0.0 && hi >= 0.0) ? 1.0 : 1.0 - std::min(lo * lo, hi * hi);
          const double rate = cv * rt * mu_abs / grid_.width(kAxisX, i) +
                              2.0 * cE * rt * mu_abs * emax / grid_.width(kAxisR, k) +
                              cE * sin2 * inv_root_avg * emax / grid_.width(kAxisMu, m);
          worst = std::max(worst, rate);
        }
      }
    }
    // rates add: transport alone may use the full CFL budget, collisions alone
    // stay at nu dt <= 1, half of the real-axis limit of Heun
    const double inverse = worst / config_.cfl + collision_frequency();
    return inverse > 0.0 ? 1.0 / inverse : config_.output_interval;
  }

  /// Largest loss rate of the collision operator over the energy grid.
  double collision_frequency() const {
    if (!config_.collisions) return 0.0;
    const ShellWeights w = weights_.full();
    auto norm = [](const ChaosMatrix& m) { return m.cwiseAbs().rowwise().sum().maxCoeff(); };
    const double r = grid_.r_max(), A = scaling_.A;
    const double root_down = r > A ? std::sqrt(r - A) : 0.0;
    return 2.0 * std::numbers::pi *
           (norm(w.elastic) * std::sqrt(r) + norm(w.absorption_loss) * std::sqrt(r + A) + norm(w.emission_loss) * root_down);
  }

  /// One Heun step of size dt. Throws NumericalError on a non-finite state.
  StepDiagnostics step(State& s, double dt) const {
    StepDiagnostics d;
    d.dt = dt;
    for (int c = 0; c < kChaosDim; ++c) d.mass_before[c] = mass(s.field, c);
    DofField k1(grid_), k2(grid_);
    BoundaryFluxes f1, f2;
    residual(s.field, k1, &f1);
    DofField stage = s.field;
    stage.axpy(dt, k1);
    if (!stage.all_finite()) throw NumericalError("non-finite state in Heun predictor at t = " + std::to_string(s.time));
    residual(stage, k2, &f2);
    s.field.axpy(0.5 * dt, k1);
    s.field.axpy(0.5 * dt, k2);
    s.time += dt;
    ++s.step;
    if (!s.field.all_finite())
      throw NumericalError("non-finite state after step " + std::to_string(s.step) + " at t = " + std::to_string(s.time));
    refresh(s);
    for (int c = 0; c < kChaosDim; ++c) {
      d.mass_after[c] = mass(s.field, c);
      d.boundary_inflow[c] = 0.5 * dt * (f1.net_inflow(c) + f2.net_inflow(c));
    }
    return d;
  }

  /// 2pi int Phi_c over the domain.
  double mass(const DofField& f, int component) const {
    return 2.0 * std::numbers::pi * integrate(f, grid_, component);
  }

  using Observer = std::function<void(const State&, int output_index, bool final)>;
  using FailureHook = std::function<void(const State&, const NumericalError&)>;

  /// Integrates to final_time, calling `observe` at t = 0 and every output interval.
  State run(const Observer& observe = {}, const FailureHook& on_failure = {}, Timings* timings = nullptr) const {
    using clock = std::chrono::steady_clock;
    auto t0 = clock::now();
    State s = initial_state();
    double output_time = 0.0;
    if (timings) timings->setup += std::chrono::duration<double>(clock::now() - t0).count();
    int index = 0;
    auto emit = [&](bool final) {
      auto tw = clock::now();
      if (observe) observe(s, index, final);
      ++index;
      if (timings) timings->output += std::chrono::duration<double>(clock::now() - tw).count();
    };
    emit(false);
    const double eps = 1e-12 * config_.final_time;
    while (s.time < config_.final_time - eps) {
      const double next_output = std::min(config_.final_time, output_time + config_.output_interval);
      auto ts = clock::now();
      try {
        while (s.time < next_output - eps) {
          const double dt = std::min(stable_dt(s.potential), next_output - s.time);
          const State backup = s;
          try {
            step(s, dt);
          } catch (const NumericalError& e) {
            if (on_failure) on_failure(backup, e);
            throw;
          }
        }
      } catch (...) {
        if (timings) timings->stepping += std::chrono::duration<double>(clock::now() - ts).count();
        throw;
      }
      if (timings) timings->stepping += std::chrono::duration<double>(clock::now() - ts).count();
      s.time = next_output;  // remove roundoff accumulated in the clock
      output_time = next_output;
      emit(output_time >= config_.final_time - eps);
    }
    return s;
  }

 private:
  DeviceProfile make_device() const {
    if (config_.uniform_doping)
      return DeviceProfile::uniform(config_.diode.n_plus / scaling_.density_scale, scaling_.relative_permittivity,
                                    config_.diode.bias / scaling_.potential_scale);
    return make_diode(config_.diode, scaling_);
  }
  BoundarySpec make_boundary() const {
    BoundarySpec b = BoundarySpec::from_device(device_);
    b.x = config_.x_boundary;
    return b;
  }
  double doping_first_moment(double a, double b) const {
    // (1/(b-a)) int_a^b N_D(x) xi(x) dx with xi = (x - c)/h
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    std::vector<double> cuts{a};
    for (double j : device_.junctions())
      if (j > a && j < b) cuts.push_back(j);
    cuts.push_back(b);
    double acc = 0.0;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
      const double lo = cuts[s], hi = cuts[s + 1];
      const double nd = device_.doping(0.5 * (lo + hi));
      acc += nd * ((hi - c) * (hi - c) - (lo - c) * (lo - c)) / (2.0 * h);
    }
    return acc / (b - a);
  }

  SimulationConfig config_;
  ScalingContext scaling_;
  GpcBasis basis_;
  KernelMatrices kernels_;
  CollisionWeights weights_;
  PhaseGrid grid_;
  DeviceProfile device_;
  ShellCouplings couplings_;
  TransportOperator transport_;
  BoundarySpec boundary_;
};

/// Moments at x-cell centers from component 0 and the latest Poisson solve.
inline MomentSet extract_moments(const State& s, const PhaseGrid& grid) {
  MomentSet out;
  out.time = s.time;
  const int nx = grid.nx();
  const double two_pi = 2.0 * std::numbers::pi;
  for (int i = 0; i < nx; ++i) {
    const double x = grid.center(kAxisX, i);
    double rho = 0.0, mom = 0.0, en = 0.0;
    for (int k = 0; k < grid.nr(); ++k) {
      const double a = grid.lower(kAxisR, k), b = grid.upper(kAxisR, k);
      const double c = grid.center(kAxisR, k), h = 0.5 * grid.width(kAxisR, k);
      const double r_half0 = 2.0 / 3.0 * (std::pow(b, 1.5) - std::pow(a, 1.5));
      const double r_half1 = (0.4 * (std::pow(b, 2.5) - std::pow(a, 2.5)) - c * r_half0) / h;
      const double r1_0 = 0.5 * (b * b - a * a);
      const double r1_1 = ((b * b * b - a * a * a) / 3.0 - c * r1_0) / h;
      for (int m = 0; m < grid.nmu(); ++m) {
        const std::size_t n = grid.index(i, k, m);
        const double lo = grid.lower(kAxisMu, m), hi = grid.upper(kAxisMu, m);
        const double dmu = hi - lo, hm = 0.5 * dmu, cm = 0.5 * (lo + hi);
        const double mu0 = 0.5 * (hi * hi - lo * lo);
        const double mu1 = ((hi * hi * hi - lo * lo * lo) / 3.0 - cm * mu0) / hm;
        const double T = s.field(0, kT, n), R = s.field(0, kR, n), M = s.field(0, kM, n);
        rho += T * grid.width(kAxisR, k) * dmu;
        mom += (T * r_half0 + R * r_half1) * mu0 + M * r_half0 * mu1;
        en += (T * r1_0 + R * r1_1) * dmu;
      }
    }
    rho *= two_pi;
    mom *= two_pi;
    en *= two_pi;
    out.x.push_back(x);
    out.density.push_back(rho);
    out.momentum.push_back(mom);
    const bool empty = !(rho > 0.0);
    out.empty_cell.push_back(empty ? 1 : 0);
    out.energy.push_back(empty ? 0.0 : en / rho);
    out.velocity.push_back(empty ? 0.0 : mom / rho);
    out.efield.push_back(s.potential.efield(x));
    out.potential.push_back(s.potential.potential(x));
  }
  return out;
}

inline PhaseStatistics phase_statistics(const DofField& field, const PhaseGrid& grid, const GpcBasis& basis) {
  PhaseStatistics st;
  const std::size_t n_cells = grid.cell_count();
  st.alpha0.resize(n_cells);
  st.alpha1.resize(n_cells);
  st.mean.resize(n_cells);
  st.variance.resize(n_cells);
  st.stddev.resize(n_cells);
  for (int i = 0; i < grid.nx(); ++i)
    for (int k = 0; k < grid.nr(); ++k) {
      const double jac = 0.5 * std::sqrt(grid.center(kAxisR, k));
      for (int m = 0; m < grid.nmu(); ++m) {
        const std::size_t n = grid.index(i, k, m);
        ChaosVector a;
        for (int c = 0; c < kChaosDim; ++c) a(c) = field(c, kT, n) / jac;
        const ChaosStatistics cs = statistics(a, basis);
        st.alpha0[n] = a(0);
        st.alpha1[n] = a(1);
        st.mean[n] = cs.mean;
        st.variance[n] = cs.variance;
        st.stddev[n] = cs.stddev;
      }
    }
  return st;
}

// ---------------------------------------------------------------------------
// Run comparison

inline const std::vector<std::string>& moment_names() {
  static const std::vector<std::string> names{"density", "momentum", "energy", "velocity", "efield", "potential"};
  return names;
}

inline const std::vector<double>& moment_column(const MomentSet& m, const std::string& name) {
  if (name == "density") return m.density;
  if (name == "momentum") return m.momentum;
  if (name == "energy") return m.energy;
  if (name == "velocity") return m.velocity;
  if (name == "efield") return m.efield;
  if (name == "potential") return m.potential;
  throw UsageError("unknown moment '" + name + "'");
}

struct MomentDifference {
  std::string name;
  double max_abs_difference = 0.0;  // at the final time
  double mean_abs_reference = 0.0;
  double relative = 0.0;            // max |a - b| / mean |a|
  double relative_all_times = 0.0;  // worst over output times
  bool flagged = false;
};

struct ComparisonReport {
  double tolerance = 0.0;
  double final_time = 0.0;
  std::vector<double> x;
  std::map<std::string, std::vector<double>> final_difference;  // a - b per x at the final time
  std::vector<MomentDifference> moments;

  const MomentDifference& get(const std::string& name) const {
    for (const auto& m : moments)
      if (m.name == name) return m;
    throw UsageError("no moment '" + name + "' in report");
  }
};

/// Default flag tolerance: relative differences above this are reported as differing.
inline constexpr double kCompareTolerance = 1e-3;

inline ComparisonReport compare_runs(const std::vector<MomentSet>& a, const std::vector<MomentSet>& b,
                                     double tolerance = kCompareTolerance) {
  if (a.empty() || b.empty()) throw UsageError("compare: empty moment series");
  if (a.size() != b.size()) throw UsageError("compare: runs have different numbers of output times");
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (std::abs(a[t].time - b[t].time) > 1e-9 * std::max(1.0, std::abs(a[t].time)))
      throw UsageError("compare: output times differ");
    if (a[t].x.size() != b[t].x.size()) throw UsageError("compare: grids differ");
    for (std::size_t i = 0; i < a[t].x.size(); ++i)
      if (std::abs(a[t].x[i] - b[t].x[i]) > 1e-12) throw UsageError("compare: grids differ");
  }
  ComparisonReport rep;
  rep.tolerance = tolerance;
  rep.final_time = a.back().time;
  rep.x = a.back().x;
  auto rel = [](const std::vector<double>& u, const std::vector<double>& v, double* max_diff, double* mean_ref) {
    double md = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      md = std::max(md, std::abs(u[i] - v[i]));
      ref += std::abs(u[i]);
    }
    ref /= static_cast<double>(u.size());
    if (max_diff) *max_diff = md;
    if (mean_ref) *mean_ref = ref;
    if (md == 0.0) return 0.0;
    return ref > 0.0 ? md / ref : std::numeric_limits<double>::infinity();
  };
  for (const std::string& name : moment_names()) {
    MomentDifference d;
    d.name = name;
    const auto& fa = moment_column(a.back(), name);
    const auto& fb = moment_column(b.back(), name);
    d.relative = rel(fa, fb, &d.max_abs_difference, &d.mean_abs_reference);
    for (std::size_t t = 0; t < a.size(); ++t)
      d.relative_all_times =
          std::max(d.relative_all_times, rel(moment_column(a[t], name), moment_column(b[t], name), nullptr, nullptr));
    d.flagged = d.relative > tolerance;
    std::vector<double> diff(fa.size());
    for (std::size_t i = 0; i < fa.size(); ++i) diff[i] = fa[i] - fb[i];
    rep.final_difference[name] = std::move(diff);
    rep.moments.push_back(d);
  }
  return rep;
}

/// max_x |M - mean M| / |mean M|
inline double current_flatness(const MomentSet& m) {
  double mean = 0.0;
  for (double v : m.momentum) mean += v;
  mean /= static_cast<double>(m.momentum.size());
  double dev = 0.0;
  for (double v : m.momentum) dev = std::max(dev, std::abs(v - mean));
  return mean != 0.0 ? dev / std::abs(mean) : std::numeric_limits<double>::infinity();
}

}  // namespace sgbp
