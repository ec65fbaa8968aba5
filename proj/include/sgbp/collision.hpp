#pragma once

// Stochastic Galerkin electron-phonon collision operator on the (r, mu) P1
// space. Energies are r = eps / (kB T_L); the three Fermi golden rule shells
// sit at r' = r (acoustic, K0) and r' = r -+ A (optical emission/absorption, K).
//
// In transformed variables Phi = (sqrt(r)/2) alpha the operator reads
//   C(Phi)(r, mu) = 2pi sqrt(r)/2 sum_s W_s G(r'_s) - Phi(r, mu) 4pi sum_s W_s sqrt(r'_s)/2,
// with G(r) = int Phi(r, mu') dmu' and W_s the chaos weight of shell s. The
// delta in r' is integrated out exactly; gain and loss of a transfer share one
// quadrature node so the discrete operator conserves each chaos component.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sgbp/error.hpp"
#include "sgbp/gpc_kernels.hpp"
#include "sgbp/phase_grid.hpp"
#include "sgbp/quadrature.hpp"
#include "sgbp/scaling.hpp"

namespace sgbp {

enum class RecombinationMode { stochastic_recombination, no_recombination };

inline RecombinationMode parse_recombination_mode(std::string_view s) {
  if (s == "stochastic_recombination" || s == "recombination") return RecombinationMode::stochastic_recombination;
  if (s == "no_recombination") return RecombinationMode::no_recombination;
  throw ConfigError("unknown mode '" + std::string(s) + "'");
}

inline std::string to_string(RecombinationMode m) {
  return m == RecombinationMode::no_recombination ? "no_recombination" : "stochastic_recombination";
}

/// How the loss term of an inelastic transfer is weighted.
///  conservative: loss uses the gain weight of the same transfer, so every
///    chaos component is conserved exactly.
///  maxwellian_ratio: loss weight = partner gain weight times M(p')/M(p) =
///    e^{-+A}, the literal B(p,p')[M(p) alpha' - M(p') alpha]/M(p) form. It
///    agrees with `conservative` for deterministic weights but does not
///    conserve mass once C+ differs from e^A C-.
enum class LossWeighting { conservative, maxwellian_ratio };

inline LossWeighting parse_loss_weighting(std::string_view s) {
  if (s == "conservative") return LossWeighting::conservative;
  if (s == "maxwellian_ratio") return LossWeighting::maxwellian_ratio;
  throw ConfigError("unknown loss weighting '" + std::string(s) + "'");
}
inline std::string to_string(LossWeighting w) {
  return w == LossWeighting::conservative ? "conservative" : "maxwellian_ratio";
}

/// Chaos weights acting on coefficient vectors, already multiplied by the rate
/// constants and by gram^{-1} (so they act on coefficients, not moments).
struct ShellWeights {
  ChaosMatrix elastic = ChaosMatrix::Zero();          // r' = r
  ChaosMatrix emission = ChaosMatrix::Zero();         // gain at r from r + A
  ChaosMatrix absorption = ChaosMatrix::Zero();       // gain at r + A from r
  ChaosMatrix emission_loss = ChaosMatrix::Zero();    // loss at r + A towards r
  ChaosMatrix absorption_loss = ChaosMatrix::Zero();  // loss at r towards r + A
};

/// Deterministic per-component operator plus the recombination correction
/// K (gram^{-1} C- - n_q I), which enters both inelastic shells.
struct CollisionWeights {
  ShellWeights deterministic;
  ShellWeights correction;

  ShellWeights full() const {
    return {deterministic.elastic + correction.elastic, deterministic.emission + correction.emission,
            deterministic.absorption + correction.absorption, deterministic.emission_loss + correction.emission_loss,
            deterministic.absorption_loss + correction.absorption_loss};
  }
};

/// `phonon_ratio` is e^A = (n_q + 1) / n_q, the Maxwellian ratio across one shell.
inline CollisionWeights collision_weights(const KernelMatrices& kernels, RecombinationMode mode,
                                          LossWeighting loss = LossWeighting::conservative) {
  const ChaosMatrix id = ChaosMatrix::Identity();
  const double nq = kernels.n_q;
  CollisionWeights w;
  w.deterministic.elastic = kernels.acoustic_rate * id;
  w.deterministic.emission = kernels.optical_rate * (nq + 1.0) * id;
  w.deterministic.absorption = kernels.optical_rate * nq * id;
  w.deterministic.emission_loss = w.deterministic.emission;
  w.deterministic.absorption_loss = w.deterministic.absorption;
  if (mode == RecombinationMode::stochastic_recombination) {
    const ChaosMatrix corr = kernels.gram.inverse() * kernels.c_minus - nq * id;
    w.correction.emission = kernels.optical_rate * corr;
    w.correction.absorption = kernels.optical_rate * corr;
    if (loss == LossWeighting::conservative) {
      w.correction.emission_loss = w.correction.emission;
      w.correction.absorption_loss = w.correction.absorption;
    } else {
      const double ratio = (nq + 1.0) / nq;
      w.correction.emission_loss = ratio * w.correction.absorption;
      w.correction.absorption_loss = w.correction.emission / ratio;
    }
  }
  return w;
}

/// Aggregated quadrature data for transfers between r-cells `lo` and `hi`
/// (r_hi = r_lo + shift). down[a][b] = sum omega_lo xi_lo^a xi_hi^b feeds
/// cell lo from hi; up[a][b] = sum omega_hi xi_hi^a xi_lo^b feeds hi from lo.
struct ShellPair {
  int lo = 0;
  int hi = 0;
  std::array<std::array<double, 2>, 2> down{};
  std::array<std::array<double, 2>, 2> up{};
};

struct ShellCoupling {
  double shift = 0.0;  // 0 for the elastic shell, A for the optical pair
  std::vector<ShellPair> pairs;
  /// loss_down[k][j] = sum over nodes with r_hi in k of 2 omega_lo xi_hi^j
  std::vector<std::array<double, 3>> loss_down;
  /// loss_up[k][j] = sum over nodes with r_lo in k of 2 omega_hi xi_lo^j
  std::vector<std::array<double, 3>> loss_up;
};

struct ShellCouplings {
  ShellCoupling elastic;
  ShellCoupling optical;
};

namespace detail {

inline ShellCoupling build_shell(const PhaseGrid& grid, double shift, int nodes_per_segment) {
  const auto& e = grid.edges(kAxisR);
  const double top = grid.r_max() - shift;
  ShellCoupling s;
  s.shift = shift;
  s.loss_down.assign(grid.nr(), {0.0, 0.0, 0.0});
  s.loss_up.assign(grid.nr(), {0.0, 0.0, 0.0});
  if (top <= 0.0) return s;

  std::vector<double> breaks;
  for (double v : e) {
    if (v >= 0.0 && v <= top) breaks.push_back(v);
    if (v - shift >= 0.0 && v - shift <= top) breaks.push_back(v - shift);
  }
  breaks.push_back(0.0);
  breaks.push_back(top);
  std::sort(breaks.begin(), breaks.end());
  std::vector<double> cuts;
  for (double v : breaks)
    if (cuts.empty() || v - cuts.back() > 1e-13 * std::max(1.0, grid.r_max())) cuts.push_back(v);
  cuts.back() = top;

  const QuadratureRule rule = gauss_legendre(nodes_per_segment);
  const double two_pi = 2.0 * std::numbers::pi;
  std::map<std::pair<int, int>, ShellPair> pairs;
  for (std::size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
    const double a = cuts[seg], b = cuts[seg + 1];
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    const int k_lo = grid.locate(kAxisR, mid);
    const int k_hi = grid.locate(kAxisR, std::min(mid + shift, grid.r_max()));
    ShellPair& p = pairs[{k_lo, k_hi}];
    p.lo = k_lo;
    p.hi = k_hi;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double r_lo = mid + half * rule.nodes[q];
      const double r_hi = r_lo + shift;
      const double w = half * rule.weights[q];
      const double om_lo = w * two_pi * 0.5 * std::sqrt(r_lo);
      const double om_hi = w * two_pi * 0.5 * std::sqrt(r_hi);
      const double xl = grid.local(kAxisR, k_lo, r_lo);
      const double xh = grid.local(kAxisR, k_hi, r_hi);
      const double pl[2] = {1.0, xl};
      const double ph[2] = {1.0, xh};
      for (int u = 0; u < 2; ++u)
        for (int v = 0; v < 2; ++v) {
          p.down[u][v] += om_lo * pl[u] * ph[v];
          p.up[u][v] += om_hi * ph[u] * pl[v];
        }
      s.loss_down[k_hi][0] += 2.0 * om_lo;
      s.loss_down[k_hi][1] += 2.0 * om_lo * xh;
      s.loss_down[k_hi][2] += 2.0 * om_lo * xh * xh;
      s.loss_up[k_lo][0] += 2.0 * om_hi;
      s.loss_up[k_lo][1] += 2.0 * om_hi * xl;
      s.loss_up[k_lo][2] += 2.0 * om_hi * xl * xl;
    }
  }
  for (auto& [key, p] : pairs) s.pairs.push_back(p);
  return s;
}

}  // namespace detail

/// Quadrature tables for the elastic shell and the +-A optical pair.
/// Partners outside [0, r_max] contribute nothing, to gain and loss alike.
inline ShellCouplings build_shell_couplings(const PhaseGrid& grid, const ScalingContext& scaling,
                                            int nodes_per_segment = 8) {
  if (!(grid.r_max() > scaling.A))
    throw ConfigError("collision: r_max must exceed the phonon energy A");
  ShellCouplings c;
  c.elastic = detail::build_shell(grid, 0.0, nodes_per_segment);
  c.optical = detail::build_shell(grid, scaling.A, nodes_per_segment);
  return c;
}

namespace detail {

// Adds the collision rate of `in` to `out` for one set of shell weights.
inline void accumulate_collision(const DofField& in, DofField& out, const PhaseGrid& grid,
                                 const ShellCouplings& couplings, const ShellWeights& w, int i_begin,
                                 int i_end) {
  const int nr = grid.nr(), nmu = grid.nmu();
  const bool has_elastic = !w.elastic.isZero(0.0);
  std::vector<ChaosVector> angT(nr), angR(nr), angX(nr), gT(nr), gR(nr), gX(nr);
  std::vector<std::array<ChaosMatrix, 3>> loss(nr);
  for (int k = 0; k < nr; ++k)
    for (int j = 0; j < 3; ++j) {
      loss[k][j] =
          couplings.optical.loss_down[k][j] * w.emission_loss + couplings.optical.loss_up[k][j] * w.absorption_loss;
      if (has_elastic) loss[k][j] += couplings.elastic.loss_down[k][j] * w.elastic;
    }

  for (int i = i_begin; i < i_end; ++i) {
    for (int k = 0; k < nr; ++k) {
      angT[k].setZero();
      angR[k].setZero();
      angX[k].setZero();
      for (int m = 0; m < nmu; ++m) {
        const std::size_t n = grid.index(i, k, m);
        const double dmu = grid.width(kAxisMu, m);
        for (int c = 0; c < kChaosDim; ++c) {
          angT[k](c) += dmu * in(c, kT, n);
          angR[k](c) += dmu * in(c, kR, n);
          angX[k](c) += dmu * in(c, kX, n);
        }
      }
      gT[k].setZero();
      gR[k].setZero();
      gX[k].setZero();
    }
    auto transfer = [&](const ShellCoupling& shell, const ChaosMatrix& down, const ChaosMatrix& up, bool with_up) {
      for (const ShellPair& p : shell.pairs) {
        gT[p.lo] += down * (p.down[0][0] * angT[p.hi] + p.down[0][1] * angR[p.hi]);
        gR[p.lo] += down * (p.down[1][0] * angT[p.hi] + p.down[1][1] * angR[p.hi]);
        gX[p.lo] += down * (p.down[0][0] * angX[p.hi]);
        if (!with_up) continue;
        gT[p.hi] += up * (p.up[0][0] * angT[p.lo] + p.up[0][1] * angR[p.lo]);
        gR[p.hi] += up * (p.up[1][0] * angT[p.lo] + p.up[1][1] * angR[p.lo]);
        gX[p.hi] += up * (p.up[0][0] * angX[p.lo]);
      }
    };
    transfer(couplings.optical, w.emission, w.absorption, true);
    if (has_elastic) transfer(couplings.elastic, w.elastic, w.elastic, false);

    for (int k = 0; k < nr; ++k) {
      const double inv_dr = 1.0 / grid.width(kAxisR, k);
      for (int m = 0; m < nmu; ++m) {
        const std::size_t n = grid.index(i, k, m);
        ChaosVector T, X, R, M;
        for (int c = 0; c < kChaosDim; ++c) {
          T(c) = in(c, kT, n);
          X(c) = in(c, kX, n);
          R(c) = in(c, kR, n);
          M(c) = in(c, kM, n);
        }
        const ChaosVector rT = (gT[k] - loss[k][0] * T - loss[k][1] * R) * inv_dr;
        const ChaosVector rR = 3.0 * (gR[k] - loss[k][1] * T - loss[k][2] * R) * inv_dr;
        const ChaosVector rM = -(loss[k][0] * M) * inv_dr;
        const ChaosVector rX = (gX[k] - loss[k][0] * X) * inv_dr;
        for (int c = 0; c < kChaosDim; ++c) {
          out(c, kT, n) += rT(c);
          out(c, kR, n) += rR(c);
          out(c, kM, n) += rM(c);
          out(c, kX, n) += rX(c);
        }
      }
    }
  }
}

}  // namespace detail

enum class CollisionForm { full, split };

/// Adds dPhi/dt from collisions for x-cells [i_begin, i_end) to `out`.
inline void apply_collision(const DofField& in, DofField& out, const PhaseGrid& grid, const ShellCouplings& couplings,
                            const CollisionWeights& weights, int i_begin, int i_end,
                            CollisionForm form = CollisionForm::full) {
  if (form == CollisionForm::full) {
    detail::accumulate_collision(in, out, grid, couplings, weights.full(), i_begin, i_end);
  } else {
    detail::accumulate_collision(in, out, grid, couplings, weights.deterministic, i_begin, i_end);
    const ShellWeights& c = weights.correction;
    if (!c.emission.isZero(0.0) || !c.absorption.isZero(0.0) || !c.emission_loss.isZero(0.0) ||
        !c.absorption_loss.isZero(0.0))
      detail::accumulate_collision(in, out, grid, couplings, weights.correction, i_begin, i_end);
  }
}

inline DofField apply_collision(const DofField& in, const PhaseGrid& grid, const ShellCouplings& couplings,
                                const CollisionWeights& weights, CollisionForm form = CollisionForm::full) {
  DofField out(grid);
  apply_collision(in, out, grid, couplings, weights, 0, grid.nx(), form);
  return out;
}

/// Continuous operator at one point for an arbitrary Phi(component, r, mu),
/// with the mu' integral done by Gauss quadrature. Used as a reference.
template <class PhiFn>
ChaosVector collision_pointwise(PhiFn&& phi, double r, double mu, double r_max, double A, const ShellWeights& w,
                                int mu_nodes = 16) {
  const QuadratureRule rule = gauss_legendre(mu_nodes);
  auto angular = [&](double rr) {
    ChaosVector g = ChaosVector::Zero();
    for (std::size_t q = 0; q < rule.size(); ++q) g += rule.weights[q] * phi(rr, rule.nodes[q]);
    return g;
  };
  const double two_pi = 2.0 * std::numbers::pi;
  const double half_root = 0.5 * std::sqrt(r);
  ChaosVector gain = w.elastic * angular(r);
  ChaosMatrix loss_rate = w.elastic * half_root;
  if (r + A <= r_max) {
    gain += w.emission * angular(r + A);
    loss_rate += w.absorption_loss * (0.5 * std::sqrt(r + A));
  }
  if (r - A >= 0.0) {
    gain += w.absorption * angular(r - A);
    loss_rate += w.emission_loss * (0.5 * std::sqrt(r - A));
  }
  return two_pi * half_root * gain - 2.0 * two_pi * (loss_rate * phi(r, mu));
}

/// Null vector of the discrete collision operator among isotropic fields,
/// normalised to unit density 2pi int Phi_0 dr dmu = 1 and zero density in the
/// higher chaos modes. Returns per r-cell (T, R) coefficients per component.
struct EquilibriumProfile {
  std::vector<ChaosVector> T;
  std::vector<ChaosVector> R;
};

inline EquilibriumProfile discrete_equilibrium(const PhaseGrid& grid, const ShellCouplings& couplings,
                                               const CollisionWeights& weights) {
  const PhaseGrid slab({0.0, 1.0}, grid.edges(kAxisR), grid.edges(kAxisMu));
  const int nr = grid.nr();
  const int n = 2 * nr * kChaosDim;
  auto unknown = [&](int c, int k, int kind) { return (c * nr + k) * 2 + kind; };
  Eigen::MatrixXd L(n, n);
  for (int col = 0; col < n; ++col) {
    DofField basis_field(slab);
    const int c = col / (2 * nr);
    const int k = (col / 2) % nr;
    const Coef kind = (col % 2 == 0) ? kT : kR;
    for (int m = 0; m < slab.nmu(); ++m) basis_field(c, kind, slab.index(0, k, m)) = 1.0;
    const DofField rate = apply_collision(basis_field, slab, couplings, weights);
    for (int c2 = 0; c2 < kChaosDim; ++c2)
      for (int k2 = 0; k2 < nr; ++k2) {
        L(unknown(c2, k2, 0), col) = rate(c2, kT, slab.index(0, k2, 0));
        L(unknown(c2, k2, 1), col) = rate(c2, kR, slab.index(0, k2, 0));
      }
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  const double two_pi = 2.0 * std::numbers::pi;
  for (int c = 0; c < kChaosDim; ++c) {
    const int row = unknown(c, 0, 0);
    L.row(row).setZero();
    for (int k = 0; k < nr; ++k) L(row, unknown(c, k, 0)) = two_pi * 2.0 * grid.width(kAxisR, k);
    rhs(row) = c == 0 ? 1.0 : 0.0;
  }
  const Eigen::VectorXd sol = L.fullPivLu().solve(rhs);
  EquilibriumProfile eq;
  eq.T.assign(nr, ChaosVector::Zero());
  eq.R.assign(nr, ChaosVector::Zero());
  for (int c = 0; c < kChaosDim; ++c)
    for (int k = 0; k < nr; ++k) {
      eq.T[k](c) = sol(unknown(c, k, 0));
      eq.R[k](c) = sol(unknown(c, k, 1));
    }
  return eq;
}

}  // namespace sgbp
