#pragma once

#include <cmath>
#include <vector>

#include "sgbp/gpc_basis.hpp"
#include "sgbp/polylog.hpp"
#include "sgbp/scaling.hpp"

namespace sgbp {

/// Galerkin-projected inelastic weights for a random lattice temperature.
///   C-_ij = <Psi_i Psi_j pi n_q(A (1 + w/N))>,  C+ = C- + gram.
/// With the published (unnormalized) pair gram = diag(1, 1/3), so the
/// identity in C+ = C- + I refers to the orthonormal form; both are kept.
struct KernelMatrices {
  ChaosMatrix c_minus = ChaosMatrix::Zero();
  ChaosMatrix c_plus = ChaosMatrix::Zero();
  ChaosMatrix recomb_split = ChaosMatrix::Zero();
  ChaosMatrix gram = ChaosMatrix::Identity();
  BasisNormalization normalization = BasisNormalization::orthonormal;
  double n_q = 0.0;
  double optical_rate = 0.0;   // dimensionless K
  double acoustic_rate = 0.0;  // dimensionless K0
};

inline ChaosMatrix compute_c_minus(const ScalingContext& scaling, const GpcBasis& basis,
                                   const QuadratureRule& quad) {
  if (!(scaling.N > 1.0))
    throw DomainError("compute_c_minus: N must exceed 1 so the temperature stays positive on the support");
  ChaosMatrix c;
  for (int i = 0; i < kChaosDim; ++i)
    for (int j = 0; j <= i; ++j) {
      c(i, j) = quad.integrate([&](double w) {
        return basis(i, w) * basis(j, w) * RandomModel::density(w) / std::expm1(scaling.A * (1.0 + w / scaling.N));
      });
      c(j, i) = c(i, j);
    }
  return c;
}

inline ChaosMatrix compute_c_minus(const ScalingContext& scaling, const GpcBasis& basis) {
  return compute_c_minus(scaling, basis, basis.quadrature());
}

namespace detail {

// d^j/da^j of 1/(e^a - 1) as a polynomial in n = 1/(e^a - 1); n' = -n(n+1).
inline double occupation_derivative(int order, double n) {
  std::vector<double> poly{0.0, 1.0};  // n
  for (int j = 0; j < order; ++j) {
    std::vector<double> next(poly.size() + 1, 0.0);
    for (std::size_t p = 1; p < poly.size(); ++p) {
      const double d = poly[p] * static_cast<double>(p);  // coefficient of n^{p-1}
      next[p] -= d;                                      // * (-n)
      next[p + 1] -= d;                                  // * (-n^2)
    }
    poly = std::move(next);
  }
  double v = 0.0;
  for (std::size_t p = poly.size(); p-- > 0;) v = v * n + poly[p];
  return v;
}

// integral over [-1, 1] of x^m / (exp(A + Bx) - 1) by Taylor expansion in B.
inline double small_b_moment(int m, double A, double B) {
  const double n = 1.0 / std::expm1(A);
  double sum = 0.0;
  double factor = 1.0;  // B^j / j!
  for (int j = 0; j <= 8; ++j) {
    const int p = m + j;
    if (p % 2 == 0) sum += occupation_derivative(j, n) * factor * 2.0 / (p + 1);
    factor *= B / (j + 1);
  }
  return sum;
}

}  // namespace detail

/// Closed-form C- for the unnormalized pair (1, w), from the antiderivatives
///   int dx/(e^{A+Bx}-1)     = log(1-e^{A+Bx})/B - x
///   int x dx/(e^{A+Bx}-1)   = Li2(e^{A+Bx})/B^2 + x log(1-e^{A+Bx})/B - x^2/2
///   int x^2 dx/(e^{A+Bx}-1) = -2Li3/B^3 + 2x Li2/B^2 + x^2 log(1-e^{A+Bx})/B - x^3/3
/// evaluated through their real parts. Small B falls back to a Taylor series.
inline ChaosMatrix compute_c_minus_analytic(const ScalingContext& scaling) {
  const double A = scaling.A;
  const double B = scaling.B;
  ChaosMatrix c;
  if (B < 2e-2) {  // closed form cancels as B^-3 below this
    c(0, 0) = 0.5 * detail::small_b_moment(0, A, B);
    c(0, 1) = c(1, 0) = 0.5 * detail::small_b_moment(1, A, B);
    c(1, 1) = 0.5 * detail::small_b_moment(2, A, B);
    return c;
  }
  auto f0 = [&](double x) {
    const double e = std::exp(A + B * x);
    return polylog::log_one_minus(e) / B - x;
  };
  auto f1 = [&](double x) {
    const double e = std::exp(A + B * x);
    return polylog::li2(e) / (B * B) + x * polylog::log_one_minus(e) / B - x * x / 2.0;
  };
  auto f2 = [&](double x) {
    const double e = std::exp(A + B * x);
    return -2.0 * polylog::li3(e) / (B * B * B) + 2.0 * x * polylog::li2(e) / (B * B) +
           x * x * polylog::log_one_minus(e) / B - x * x * x / 3.0;
  };
  c(0, 0) = 0.5 * (f0(1.0) - f0(-1.0));
  c(0, 1) = c(1, 0) = 0.5 * (f1(1.0) - f1(-1.0));
  c(1, 1) = 0.5 * (f2(1.0) - f2(-1.0));
  return c;
}

/// Re-expresses a matrix given in the (1, w) pair in the target normalization.
inline ChaosMatrix rescale_from_paper_basis(const ChaosMatrix& paper, const GpcBasis& basis) {
  ChaosMatrix d = ChaosMatrix::Zero();
  d(0, 0) = 1.0;
  for (int k = 1; k < kChaosDim; ++k) d(k, k) = basis.linear_term(k);
  return d * paper * d;
}

inline ChaosMatrix split_recombination(const KernelMatrices& kernels) {
  return kernels.c_minus - kernels.n_q * ChaosMatrix::Identity();
}

inline KernelMatrices build_kernels(const ScalingContext& scaling, const GpcBasis& basis) {
  KernelMatrices k;
  k.gram = basis.gram();
  k.normalization = basis.normalization();
  k.n_q = scaling.n_q;
  k.optical_rate = scaling.optical_rate;
  k.acoustic_rate = scaling.acoustic_rate;
  k.c_minus = compute_c_minus(scaling, basis);
  k.c_plus = k.c_minus + ChaosMatrix::Identity();
  k.recomb_split = split_recombination(k);
  return k;
}

// ---------------------------------------------------------------------------
// Random phonon energy: pointwise kernel evaluators. Energies are in units of
// kB T_L; `gap` is the partner energy minus the current one (eps' - eps).
// The random shift z of the phonon energy is uniform on [-h, h].

enum class PhononKernelVariant { characteristic_function, distributional_derivative };

/// Symbolic delta shell: location in gap and its matrix weight (per unit K, K0).
struct DeltaShell {
  double location = 0.0;
  ChaosMatrix weight = ChaosMatrix::Zero();
};

struct PhononEnergyKernelSample {
  double gap = 0.0;
  PhononKernelVariant variant = PhononKernelVariant::characteristic_function;
  /// Regular (non-delta) part of B per unit K, without the 1/M(p) factor.
  ChaosMatrix b_matrix = ChaosMatrix::Zero();
  /// Distributional variant: -d/dz[Psi_i Psi_j pi z] chi at the emission and
  /// absorption points, before the (n_q+1) and n_q factors.
  ChaosMatrix boundary_emission = ChaosMatrix::Zero();
  ChaosMatrix boundary_absorption = ChaosMatrix::Zero();
  bool emission_gate_open = false;
  bool absorption_gate_open = false;
  /// True when gap is 0: the K0 delta term (times identity) applies there.
  bool elastic_shell = false;
  /// Delta shells of the kernel (distributional variant), independent of gap.
  std::vector<DeltaShell> shells;
};

struct PhononEnergyWindow {
  double half_width = 0.0;  // h, in units of kB T_L

  static PhononEnergyWindow from_scaling(const ScalingContext& s) { return {1.0 / s.N}; }
  bool contains(double z) const { return z >= -half_width && z <= half_width; }
};

inline PhononEnergyKernelSample eval_phonon_energy_b_full(double gap, const ScalingContext& scaling,
                                                          const GpcBasis& basis,
                                                          PhononEnergyWindow window) {
  if (!std::isfinite(gap)) throw DomainError("eval_phonon_energy_b_full: gap must be finite");
  PhononEnergyKernelSample s;
  s.gap = gap;
  s.variant = PhononKernelVariant::characteristic_function;
  s.elastic_shell = gap == 0.0;
  const double A = scaling.A;
  const double h = window.half_width;
  const double z_em = gap - A;
  const double z_ab = -gap - A;
  s.emission_gate_open = window.contains(z_em);
  s.absorption_gate_open = window.contains(z_ab);
  auto outer = [&](double z) {
    const double w = z / h;
    ChaosMatrix m;
    for (int i = 0; i < kChaosDim; ++i)
      for (int j = 0; j < kChaosDim; ++j) m(i, j) = RandomModel::density(w) * basis(i, w) * basis(j, w);
    return m;
  };
  if (s.emission_gate_open) s.b_matrix += outer(z_em) / (-std::expm1(-(A + z_em)));
  if (s.absorption_gate_open) s.b_matrix += outer(z_ab) / std::expm1(A + z_ab);
  return s;
}

inline PhononEnergyKernelSample eval_phonon_energy_b_full(double gap, const ScalingContext& scaling,
                                                          const GpcBasis& basis) {
  return eval_phonon_energy_b_full(gap, scaling, basis, PhononEnergyWindow::from_scaling(scaling));
}

/// Matrix of int Psi_i Psi_j pi z dz over [-h, h], pi = 1/(2h).
inline ChaosMatrix phonon_shell_moment(const GpcBasis& basis, PhononEnergyWindow window) {
  const double h = window.half_width;
  ChaosMatrix m;
  for (int i = 0; i < kChaosDim; ++i)
    for (int j = 0; j < kChaosDim; ++j)
      m(i, j) = h * basis.quadrature().integrate([&](double w) {
        return basis(i, w) * basis(j, w) * w * RandomModel::density(w);
      });
  return m;
}

inline PhononEnergyKernelSample eval_phonon_energy_b_distderiv(double gap, const ScalingContext& scaling,
                                                               const GpcBasis& basis,
                                                               PhononEnergyWindow window) {
  if (!std::isfinite(gap)) throw DomainError("eval_phonon_energy_b_distderiv: gap must be finite");
  PhononEnergyKernelSample s;
  s.gap = gap;
  s.variant = PhononKernelVariant::distributional_derivative;
  s.elastic_shell = gap == 0.0;
  const double A = scaling.A;
  const double h = window.half_width;
  const double nq = scaling.n_q;

  // d/dz [Psi_i(z/h) Psi_j(z/h) z / (2h)], with Psi_k(w) = a_k + b_k w.
  auto derivative = [&](double z) {
    ChaosMatrix d;
    for (int i = 0; i < kChaosDim; ++i)
      for (int j = 0; j < kChaosDim; ++j) {
        const double a0 = basis.constant_term(i) * basis.constant_term(j);
        const double a1 = (basis.constant_term(i) * basis.linear_term(j) + basis.linear_term(i) * basis.constant_term(j)) / h;
        const double a2 = basis.linear_term(i) * basis.linear_term(j) / (h * h);
        // (a0 + a1 z + a2 z^2) z / (2h)
        d(i, j) = (a0 + 2.0 * a1 * z + 3.0 * a2 * z * z) / (2.0 * h);
      }
    return d;
  };

  const double z_em = gap - A;
  const double z_ab = -gap - A;
  s.emission_gate_open = window.contains(z_em);
  s.absorption_gate_open = window.contains(z_ab);
  if (s.emission_gate_open) s.boundary_emission = -derivative(z_em);
  if (s.absorption_gate_open) s.boundary_absorption = -derivative(z_ab);
  s.b_matrix = (nq + 1.0) * s.boundary_emission + nq * s.boundary_absorption;

  const ChaosMatrix moment = phonon_shell_moment(basis, window);
  const ChaosMatrix id = ChaosMatrix::Identity();
  const ChaosMatrix correction = -nq * (nq + 1.0) * moment;
  s.shells.push_back({0.0, id});                             // K0 elastic (per unit K0)
  s.shells.push_back({A, (nq + 1.0) * id + correction});     // partner above: emission into eps
  s.shells.push_back({-A, nq * id + correction});            // partner below: absorption into eps
  return s;
}

inline PhononEnergyKernelSample eval_phonon_energy_b_distderiv(double gap, const ScalingContext& scaling,
                                                               const GpcBasis& basis) {
  return eval_phonon_energy_b_distderiv(gap, scaling, basis, PhononEnergyWindow::from_scaling(scaling));
}

}  // namespace sgbp
