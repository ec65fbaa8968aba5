// Acceptance report: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>

#include "sgbp/sgbp.hpp"
#include "manufactured.hpp"

using namespace sgbp;

namespace {

int failures = 0;

void report(const char* name, bool ok, const std::string& detail) {
  std::printf("%s  %-34s %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string format(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double max_entry_diff(const ChaosMatrix& a, const ChaosMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

ChaosMatrix mat(double a, double b, double c, double d) {
  ChaosMatrix m;
  m << a, b, c, d;
  return m;
}

void kernel_constants() {
  const ScalingContext s = build_scaling(PhysicalConstants{});
  const double dA = std::abs(s.A - 2.4372169626), dB = std::abs(s.B - 0.08124056542),
               dn = std::abs(s.n_q - 0.09577484271);
  report("kernel constants", std::max({dA, dB, dn}) <= 1e-9,
         format("A=%.12f B=%.12f n_q=%.12f max|err|=%.1e (tol 1e-9)", s.A, s.B, s.n_q, std::max({dA, dB, dn})));
}

void c_minus_matrix() {
  const ScalingContext s = build_scaling(PhysicalConstants{});
  const GpcBasis paper(BasisNormalization::paper_unnormalized);
  const ChaosMatrix quad = compute_c_minus(s, paper), poly = compute_c_minus_analytic(s);
  const ChaosMatrix ref = mat(0.0959125, -0.00284506, -0.00284506, 0.03200755);
  const double eq = max_entry_diff(quad, ref), ep = max_entry_diff(poly, ref), ab = max_entry_diff(quad, poly);
  report("C- matrix (paper basis, N=30)", eq <= 5e-6 && ep <= 5e-6 && ab <= 1e-8,
         format("quadrature err=%.1e polylog err=%.1e (tol 5e-6) routes differ %.1e (tol 1e-8)", eq, ep, ab));
}

void recombination_split() {
  const ScalingContext s = build_scaling(PhysicalConstants{});
  const KernelMatrices k = build_kernels(s, GpcBasis(BasisNormalization::paper_unnormalized));
  const ChaosMatrix ref = mat(0.00013765729, -0.00284506, -0.00284506, -0.06376729271);
  const double es = max_entry_diff(k.recomb_split, ref);
  const double ep = max_entry_diff(k.c_plus, k.c_minus + ChaosMatrix::Identity());
  report("recombination split, C+ = C- + I", es <= 5e-6 && ep <= 1e-14,
         format("split err=%.1e (tol 5e-6) |C+ - C- - I|=%.1e (tol 1e-14)", es, ep));
}

void conservation_suite() {
  // collision operator on the default grid, applied to a random field
  const SimulationConfig defaults;
  const Simulation sim(defaults);
  const PhaseGrid& g = sim.grid();
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DofField f(g);
  for (int c = 0; c < kChaosDim; ++c)
    for (int t = 0; t < kCoefCount; ++t)
      for (double& v : f.coef(c, Coef(t))) v = u(rng);
  const DofField rate = apply_collision(f, g, sim.couplings(), sim.weights());
  double worst_collision = 0.0;
  for (int c = 0; c < kChaosDim; ++c) {
    double gross = 0.0;  // sum of |cell contributions|, the scale of the cancellation
    for (std::size_t n = 0; n < g.cell_count(); ++n) gross += std::abs(rate(c, kT, n));
    gross *= g.volume(0, 0, 0);
    worst_collision = std::max(worst_collision, std::abs(integrate(rate, g, c)) / gross);
  }

  // zero-bias uniform equilibrium over 100 steps
  SimulationConfig eqc;
  eqc.uniform_doping = true;
  eqc.diode.bias = 0.0;
  eqc.initial = InitialCondition::discrete_equilibrium;
  const Simulation eq(eqc);
  State s = eq.initial_state();
  const DofField start = s.field;
  for (int n = 0; n < 100; ++n) eq.step(s, eq.stable_dt(s.potential));
  DofField d = s.field;
  d.axpy(-1.0, start);
  const double drift = std::max(d.max_abs(0), d.max_abs(1)) / start.max_abs(0);

  // boundary accounting on the biased diode
  State b = sim.initial_state();
  double worst_balance = 0.0;
  for (int n = 0; n < 100; ++n) {
    const StepDiagnostics st = sim.step(b, sim.stable_dt(b.potential));
    for (int c = 0; c < kChaosDim; ++c)
      worst_balance = std::max(worst_balance, std::abs(st.mass_after[c] - st.mass_before[c] - st.boundary_inflow[c]) /
                                                  st.mass_before[0]);
  }
  report("conservation suite",
         worst_collision <= 1e-11 && drift <= 1e-8 && worst_balance <= 1e-10,
         format("collision %.1e (tol 1e-11) equilibrium drift %.1e (tol 1e-8) boundary balance %.1e (tol 1e-10)",
                worst_collision, drift, worst_balance));
}

void poisson() {
  const double bias = 0.5;
  // Laplace case on the default diode grid
  const Simulation sim{SimulationConfig{}};
  const PhaseGrid& g = sim.grid();
  DensityProfile rho{std::vector<double>(g.nx()), std::vector<double>(g.nx(), 0.0)};
  for (int i = 0; i < g.nx(); ++i) rho.mean[i] = sim.device().average_doping(g.lower(kAxisX, i), g.upper(kAxisX, i));
  const FieldProfile lap = solve_poisson(rho, g, sim.device(), sim.scaling().c_P);
  double e_lap = std::max(std::abs(lap.potential(0.0)), std::abs(lap.potential(1.0) - bias));
  for (int j = 0; j <= 1000; ++j) e_lap = std::max(e_lap, std::abs(lap.potential(j / 1000.0) - bias * j / 1000.0));

  // V'' = k sin(pi x) with V(0) = 0, V(1) = bias, fine P1 source
  const double k = 3.0;
  const int n = 1 << 17;
  const PhaseGrid fine(n, 1, 1, 1.0);
  DensityProfile src{std::vector<double>(n), std::vector<double>(n)};
  for (int i = 0; i < n; ++i) {
    const double a = fine.lower(kAxisX, i), h = fine.width(kAxisX, i), c = a + 0.5 * h, w = std::numbers::pi * h / 2;
    // exact Legendre coefficients of 1 + sin(pi x) on the cell
    src.mean[i] = 1.0 + std::sin(std::numbers::pi * c) * std::sin(w) / w;
    src.slope[i] = 3.0 * std::cos(std::numbers::pi * c) * (std::sin(w) - w * std::cos(w)) / (w * w);
  }
  const FieldProfile sol = solve_poisson(src, fine, DeviceProfile::uniform(1.0, 1.0, bias), k);
  double e_sin = 0.0;
  for (int j = 0; j <= 1000; ++j) {
    const double x = j / 1000.0;
    e_sin = std::max(e_sin, std::abs(sol.potential(x) - (-k * std::sin(std::numbers::pi * x) /
                                                          (std::numbers::pi * std::numbers::pi) + bias * x)));
  }
  report("Poisson", e_lap <= 1e-12 && e_sin <= 1e-10,
         format("Laplace max|V - V0 x|=%.1e (tol 1e-12) sin source max err=%.1e (tol 1e-10)", e_lap, e_sin));
}

void transport_order() {
  const auto e1 = manufactured::l2_errors(8), e2 = manufactured::l2_errors(16), e3 = manufactured::l2_errors(32);
  const double p1 = std::log2(e1.mean / e2.mean), p2 = std::log2(e2.mean / e3.mean);
  const double q1 = std::log2(e1.full / e2.full), q2 = std::log2(e2.full / e3.full);
  report("transport order", std::min(p1, p2) >= 1.8,
         format("cell-average L2 orders %.2f %.2f (tol >= 1.8); full P1 field orders %.2f %.2f", p1, p2, q1, q2));
}

void phonon_evaluators() {
  const ScalingContext s = build_scaling(PhysicalConstants{});
  const GpcBasis paper(BasisNormalization::paper_unnormalized);
  const double A = s.A, h = 1.0 / s.N, nq = s.n_q;

  bool closed_zero = true;
  for (double gap : {0.5, -1.0, 1.9, 3.0, -3.5}) {
    const auto a = eval_phonon_energy_b_full(gap, s, paper);
    const auto b = eval_phonon_energy_b_distderiv(gap, s, paper);
    closed_zero = closed_zero && a.b_matrix == ChaosMatrix::Zero() && b.b_matrix == ChaosMatrix::Zero() &&
                  b.boundary_emission == ChaosMatrix::Zero() && b.boundary_absorption == ChaosMatrix::Zero();
  }

  // shell points and interior points against scalar Bose factors
  double e_point = 0.0;
  for (double frac : {0.0, 0.37, -0.81}) {
    const double z = frac * h, w = frac;
    const double em = 0.5 / (1.0 - std::exp(-(A + z))), ab = 0.5 / (std::exp(A + z) - 1.0);
    const ChaosMatrix m = mat(1.0, w, w, w * w);
    e_point = std::max(e_point, max_entry_diff(eval_phonon_energy_b_full(A + z, s, paper).b_matrix, em * m));
    e_point = std::max(e_point, max_entry_diff(eval_phonon_energy_b_full(-A - z, s, paper).b_matrix, ab * m));
  }

  // delta-shell weights against a Gauss quadrature of int Psi_i Psi_j pi(z) z dz
  const QuadratureRule q = gauss_legendre(12);
  ChaosMatrix moment = ChaosMatrix::Zero();
  for (std::size_t j = 0; j < q.size(); ++j) {
    const double w = q.nodes[j], z = h * w, weight = q.weights[j] * 0.5;  // pi(w) = 1/2 on [-1, 1]
    const double psi[2] = {1.0, w};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) moment(a, b) += weight * psi[a] * psi[b] * z;
  }
  const ChaosMatrix id = ChaosMatrix::Identity();
  const auto shells = eval_phonon_energy_b_distderiv(0.0, s, paper).shells;
  double e_shell = shells.size() == 3 ? 0.0 : 1.0;
  if (shells.size() == 3) {
    e_shell = std::max(e_shell, max_entry_diff(shells[0].weight, id));
    e_shell = std::max(e_shell, max_entry_diff(shells[1].weight, (nq + 1.0) * id - nq * (nq + 1.0) * moment));
    e_shell = std::max(e_shell, max_entry_diff(shells[2].weight, nq * id - nq * (nq + 1.0) * moment));
  }
  report("phonon-energy kernel evaluators", closed_zero && e_point <= 1e-6 && e_shell <= 1e-10,
         format("closed gates zero: %s, point values err=%.1e (tol 1e-6), shell weights err=%.1e (tol 1e-10)",
                closed_zero ? "yes" : "no", e_point, e_shell));
}

RunSummary full_run(RecombinationMode mode, const std::filesystem::path& dir) {
  SimulationConfig c;
  c.mode = mode;
  std::printf("....  running the default diode (%s, %g ps) into %s\n", to_string(mode).c_str(), c.final_time,
              dir.string().c_str());
  std::fflush(stdout);
  return run_to_directory(c, dir);
}

void paper_scale(const RunSummary& rc, const RunSummary& nr) {
  // no-recombination benchmark
  const PhaseStatistics st = phase_statistics(nr.final_state.field, Simulation(SimulationConfig{}).grid(),
                                              GpcBasis(BasisNormalization::orthonormal));
  double vmax = 0.0;
  for (double v : st.variance) vmax = std::max(vmax, std::abs(v));
  const double a1 = nr.final_state.field.max_abs(1);
  report("no-recombination benchmark", a1 == 0.0 && vmax == 0.0,
         format("max|alpha1|=%g max Var=%g over the 10 ps run (must be exactly 0)", a1, vmax));

  const MomentSet& a = rc.moments.back();
  const MomentSet& b = nr.moments.back();
  const double flat = std::max(current_flatness(a), current_flatness(b));
  const ComparisonReport rep = compare_runs(rc.moments, nr.moments);
  const double dn = rep.get("density").relative, de = rep.get("energy").relative;
  const double dm = rep.get("momentum").relative;
  const bool ok_a = flat <= 0.05, ok_b = std::max(dn, de) <= 1e-2, ok_c = dm > 0.0 && dm >= 1e-3 && dm <= 1e-1;
  report("paper-scale (a) flat current", ok_a, format("max_x |M - <M>|/|<M>| = %.2e (tol 5e-2)", flat));
  report("paper-scale (b) density, energy", ok_b,
         format("relative differences density %.2e energy %.2e (tol 1e-2)", dn, de));
  report("paper-scale (c) momentum gap", ok_c,
         format("max|dM|/mean|M| = %.2e (bracket [1e-3, 1e-1]); efield %.2e", dm, rep.get("efield").relative));
}

}  // namespace

int main(int argc, char** argv) {
  const bool quick = argc > 1 && std::string(argv[1]) == "--skip-runs";
  kernel_constants();
  c_minus_matrix();
  recombination_split();
  conservation_suite();
  poisson();
  transport_order();
  phonon_evaluators();
  if (!quick) {
    const std::filesystem::path root = std::filesystem::current_path() / "acceptance_runs";
    const RunSummary rc = full_run(RecombinationMode::stochastic_recombination, root / "recombination");
    const RunSummary nr = full_run(RecombinationMode::no_recombination, root / "no_recombination");
    compare_run_directories(root / "recombination", root / "no_recombination", root / "compare");
    paper_scale(rc, nr);
  }
  std::printf("%s: %d criteria failed\n", failures == 0 ? "ACCEPTED" : "NOT ACCEPTED", failures);
  return failures == 0 ? 0 : 1;
}
