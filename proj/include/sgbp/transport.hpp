#pragma once

// Upwind P1 DG discretisation of
//   dPhi/dt + d/dx(a1 Phi) + d/dr(a4 Phi) + d/dmu(a5 Phi)
// on the (x, r, mu) grid with azimuthal symmetry and a field E(x) along x.
// Every coefficient factorises into (function of x) * (function of r) *
// (function of mu), so all cell and face integrals reduce to 1D moments:
// r and mu moments are exact, x moments of E use 3-point Gauss.

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "sgbp/device.hpp"
#include "sgbp/error.hpp"
#include "sgbp/gpc_basis.hpp"
#include "sgbp/phase_grid.hpp"
#include "sgbp/poisson.hpp"
#include "sgbp/quadrature.hpp"

namespace sgbp {

/// Pointwise transport coefficients in (x, y, z; r, mu, phi) coordinates.
struct TransportCoefficients {
  double c_v = 0.0;
  double c_E = 0.0;

  double a1(double r, double mu) const { return c_v * std::sqrt(r) * mu; }
  double a2(double r, double mu, double phi) const {
    return c_v * std::sqrt(r) * std::sqrt(1.0 - mu * mu) * std::cos(phi);
  }
  double a3(double r, double mu, double phi) const {
    return c_v * std::sqrt(r) * std::sqrt(1.0 - mu * mu) * std::sin(phi);
  }
  /// Field along x only.
  double a4(double r, double mu, double e) const { return -2.0 * c_E * std::sqrt(r) * mu * e; }
  double a5(double r, double mu, double e) const {
    if (r == 0.0) throw DomainError("a5 is singular at r = 0");
    return -c_E * (1.0 - mu * mu) / std::sqrt(r) * e;
  }
  /// General field (Ex, Ey, Ez).
  double a4(double r, double mu, double phi, const std::array<double, 3>& e) const {
    const double s = std::sqrt(1.0 - mu * mu);
    return -2.0 * c_E * std::sqrt(r) * (mu * e[0] + s * std::cos(phi) * e[1] + s * std::sin(phi) * e[2]);
  }
  double a5(double r, double mu, double phi, const std::array<double, 3>& e) const {
    if (r == 0.0) throw DomainError("a5 is singular at r = 0");
    const double s = std::sqrt(1.0 - mu * mu);
    return -c_E * s / std::sqrt(r) * (s * e[0] - mu * std::cos(phi) * e[1] - mu * std::sin(phi) * e[2]);
  }
  double a6(double r, double mu, double phi, const std::array<double, 3>& e) const {
    const double s = std::sqrt(1.0 - mu * mu);
    if (r == 0.0 || s == 0.0) throw DomainError("a6 is singular at r = 0 and mu = +-1");
    return -c_E / (std::sqrt(r) * s) * (-std::sin(phi) * e[1] + std::cos(phi) * e[2]);
  }
};

/// Upwind numerical flux of a * Phi across a face.
inline double upwind_flux(double a, double left, double right) { return a >= 0.0 ? a * left : a * right; }

enum class XBoundary { charge_neutral, periodic };

struct BoundarySpec {
  XBoundary x = XBoundary::charge_neutral;
  double doping_left = 1.0;   // contact densities (dimensionless)
  double doping_right = 1.0;

  static BoundarySpec from_device(const DeviceProfile& d) {
    return {XBoundary::charge_neutral, d.doping(0.0), d.doping(1.0)};
  }
};

/// Inflow ghost = factor * interior trace, chosen so the ghost density matches
/// the contact doping. The same factor multiplies every chaos component.
struct GhostScaling {
  double left = 1.0;
  double right = 1.0;
};

inline GhostScaling apply_boundary(const DensityProfile& rho, const BoundarySpec& spec) {
  if (spec.x == XBoundary::periodic) return {};
  const double rl = rho.mean.front() - rho.slope.front();
  const double rr = rho.mean.back() + rho.slope.back();
  if (!(rl > 0.0) || !std::isfinite(rl))
    throw NumericalError("boundary: non-positive density " + std::to_string(rl) + " at x = 0");
  if (!(rr > 0.0) || !std::isfinite(rr))
    throw NumericalError("boundary: non-positive density " + std::to_string(rr) + " at x = 1");
  return {spec.doping_left / rl, spec.doping_right / rr};
}

/// Mass fluxes (2pi included) through the domain boundary during one residual
/// evaluation, positive in the direction of the outward normal except `left`,
/// which is positive into the domain. d(mass)/dt = left - right - top.
struct BoundaryFluxes {
  std::array<double, kChaosDim> left{};
  std::array<double, kChaosDim> right{};
  std::array<double, kChaosDim> top{};

  double net_inflow(int c) const { return left[c] - right[c] - top[c]; }
};

/// Field E sampled at the 3 Gauss nodes of each x-cell.
struct NodalField {
  std::vector<std::array<double, 3>> values;
};

/// Grid-dependent moment tables.
class TransportOperator {
 public:
  static constexpr int kXNodes = 3;

  TransportOperator(const PhaseGrid& grid, double c_v, double c_E) : grid_(grid), coef_{c_v, c_E} {
    const QuadratureRule g = gauss_legendre(kXNodes);
    for (int q = 0; q < kXNodes; ++q) {
      xnode_[q] = g.nodes[q];
      xweight_[q] = g.weights[q];
    }
    const int nr = grid.nr(), nmu = grid.nmu();
    Pr_.resize(nr);
    Qr_.resize(nr);
    for (int k = 0; k < nr; ++k) {
      for (int j = 0; j < 3; ++j) {
        Pr_[k][j] = r_moment(k, j, 0.5);
        Qr_[k][j] = r_moment(k, j, -0.5);
      }
    }
    U1p_.resize(nmu);
    U1m_.resize(nmu);
    U2_.resize(nmu);
    for (int m = 0; m < nmu; ++m)
      for (int j = 0; j < 3; ++j) {
        U1p_[m][j] = mu_moment(m, j, true, 0.0, 1.0);
        U1m_[m][j] = mu_moment(m, j, true, -1.0, 0.0);
        U2_[m][j] = mu_moment(m, j, false, -1.0, 1.0);
      }
  }

  const PhaseGrid& grid() const { return grid_; }
  const TransportCoefficients& coefficients() const { return coef_; }
  double x_node(int q) const { return xnode_[q]; }

  NodalField sample(const FieldProfile& f) const {
    NodalField n;
    n.values.resize(grid_.nx());
    for (int i = 0; i < grid_.nx(); ++i)
      for (int q = 0; q < kXNodes; ++q) n.values[i][q] = f.efield(grid_.global(kAxisX, i, xnode_[q]));
    return n;
  }
  NodalField constant(double e) const {
    NodalField n;
    n.values.assign(grid_.nx(), {e, e, e});
    return n;
  }

  /// Overwrites `out` with the transport rate dPhi/dt (mass matrix applied).
  /// `fluxes`, when given, receives the boundary mass fluxes.
  void apply(const DofField& in, DofField& out, const NodalField& efield, const BoundarySpec& spec,
             const GhostScaling& ghost, BoundaryFluxes* fluxes = nullptr) const {
    out.fill(0.0);
    BoundaryFluxes bf;
    volume_terms(in, out, efield);
    x_faces(in, out, spec, ghost, bf);
    r_faces(in, out, efield, bf);
    mu_faces(in, out, efield);
    apply_inverse_mass(out);
    if (fluxes) *fluxes = bf;
  }

  DofField apply(const DofField& in, const NodalField& efield, const BoundarySpec& spec, const GhostScaling& ghost,
                 BoundaryFluxes* fluxes = nullptr) const {
    DofField out(grid_);
    apply(in, out, efield, spec, ghost, fluxes);
    return out;
  }

 private:
  // int_{r cell} r^p xi^j dr, exact: expand xi = (r - c)/h in powers of r.
  double r_moment(int k, int j, double p) const {
    const double a = grid_.lower(kAxisR, k), b = grid_.upper(kAxisR, k);
    const double c = grid_.center(kAxisR, k), h = 0.5 * grid_.width(kAxisR, k);
    auto prim = [&](double e) {  // int_a^b r^e dr
      return (std::pow(b, e + 1.0) - std::pow(a, e + 1.0)) / (e + 1.0);
    };
    switch (j) {
      case 0: return prim(p);
      case 1: return (prim(p + 1.0) - c * prim(p)) / h;
      default: return (prim(p + 2.0) - 2.0 * c * prim(p + 1.0) + c * c * prim(p)) / (h * h);
    }
  }
  // int over mu cell intersected with [lo, hi] of w(mu) xi^j, w = mu or 1 - mu^2.
  // The integrand is a polynomial of degree <= 4, so 3-point Gauss is exact.
  double mu_moment(int m, int j, bool linear_weight, double lo, double hi) const {
    const double a = std::max(grid_.lower(kAxisMu, m), lo), b = std::min(grid_.upper(kAxisMu, m), hi);
    if (b <= a) return 0.0;
    const QuadratureRule g = gauss_legendre(3);
    double acc = 0.0;
    for (std::size_t q = 0; q < g.size(); ++q) {
      const double mu = 0.5 * (a + b) + 0.5 * (b - a) * g.nodes[q];
      const double xi = grid_.local(kAxisMu, m, mu);
      const double w = linear_weight ? mu : 1.0 - mu * mu;
      acc += 0.5 * (b - a) * g.weights[q] * w * std::pow(xi, j);
    }
    return acc;
  }

  void volume_terms(const DofField& in, DofField& out, const NodalField& ef) const {
    const int nx = grid_.nx(), nr = grid_.nr(), nmu = grid_.nmu();
    const double cv = coef_.c_v, cE = coef_.c_E;
    for (int i = 0; i < nx; ++i) {
      const double hx = 0.5 * grid_.width(kAxisX, i);
      double ex0 = 0.0, ex1 = 0.0;
      for (int q = 0; q < kXNodes; ++q) {
        ex0 += hx * xweight_[q] * ef.values[i][q];
        ex1 += hx * xweight_[q] * ef.values[i][q] * xnode_[q];
      }
      for (int k = 0; k < nr; ++k) {
        const auto& P = Pr_[k];
        const auto& Q = Qr_[k];
        const double dr = grid_.width(kAxisR, k);
        for (int m = 0; m < nmu; ++m) {
          const double u10 = U1p_[m][0] + U1m_[m][0], u11 = U1p_[m][1] + U1m_[m][1];
          const auto& U2 = U2_[m];
          const double dmu = grid_.width(kAxisMu, m);
          const std::size_t n = grid_.index(i, k, m);
          for (int c = 0; c < kChaosDim; ++c) {
            const double T = in(c, kT, n), X = in(c, kX, n), R = in(c, kR, n), M = in(c, kM, n);
            const double sp = T * P[0] * u10 + R * P[1] * u10 + M * P[0] * u11;
            out(c, kX, n) += 2.0 * cv * sp;
            if (cE != 0.0) {
              out(c, kR, n) += (2.0 / dr) * (-2.0 * cE) * (ex0 * sp + ex1 * X * P[0] * u10);
              const double sq = T * Q[0] * U2[0] + R * Q[1] * U2[0] + M * Q[0] * U2[1];
              out(c, kM, n) += (2.0 / dmu) * (-cE) * (ex0 * sq + ex1 * X * Q[0] * U2[0]);
            }
          }
        }
      }
    }
  }

  // x-faces: a1 = c_v sqrt(r) mu, upwind side fixed by the sign of mu.
  void x_faces(const DofField& in, DofField& out, const BoundarySpec& spec, const GhostScaling& ghost,
               BoundaryFluxes& bf) const {
    const int nx = grid_.nx(), nr = grid_.nr(), nmu = grid_.nmu();
    const bool periodic = spec.x == XBoundary::periodic;
    const double cv = coef_.c_v;
    const double two_pi = 2.0 * std::numbers::pi;
    // face f sits at the left edge of cell f; f = nx is the right boundary
    for (int f = 0; f <= nx; ++f) {
      if (periodic && f == nx) break;
      const int L = f > 0 ? f - 1 : (periodic ? nx - 1 : -1);
      const int Rc = f < nx ? f : -1;
      for (int k = 0; k < nr; ++k) {
        const auto& P = Pr_[k];
        for (int m = 0; m < nmu; ++m) {
          const auto& Up = U1p_[m];
          const auto& Um = U1m_[m];
          const std::size_t nL = L >= 0 ? grid_.index(L, k, m) : 0;
          const std::size_t nR = Rc >= 0 ? grid_.index(Rc, k, m) : 0;
          for (int c = 0; c < kChaosDim; ++c) {
            // traces (T + X xi_x, R, M) from each side; ghosts rescale the interior trace
            double tl, rl, ml, tr, rr, mr;
            if (L >= 0) {
              tl = in(c, kT, nL) + in(c, kX, nL);
              rl = in(c, kR, nL);
              ml = in(c, kM, nL);
            } else {
              tl = ghost.left * (in(c, kT, nR) - in(c, kX, nR));
              rl = ghost.left * in(c, kR, nR);
              ml = ghost.left * in(c, kM, nR);
            }
            if (Rc >= 0) {
              tr = in(c, kT, nR) - in(c, kX, nR);
              rr = in(c, kR, nR);
              mr = in(c, kM, nR);
            } else {
              tr = ghost.right * (in(c, kT, nL) + in(c, kX, nL));
              rr = ghost.right * in(c, kR, nL);
              mr = ghost.right * in(c, kM, nL);
            }
            const double F0 = cv * (tl * P[0] * Up[0] + rl * P[1] * Up[0] + ml * P[0] * Up[1] + tr * P[0] * Um[0] +
                                    rr * P[1] * Um[0] + mr * P[0] * Um[1]);
            const double Fr = cv * (tl * P[1] * Up[0] + rl * P[2] * Up[0] + ml * P[1] * Up[1] + tr * P[1] * Um[0] +
                                    rr * P[2] * Um[0] + mr * P[1] * Um[1]);
            const double Fm = cv * (tl * P[0] * Up[1] + rl * P[1] * Up[1] + ml * P[0] * Up[2] + tr * P[0] * Um[1] +
                                    rr * P[1] * Um[1] + mr * P[0] * Um[2]);
            if (L >= 0) {
              out(c, kT, nL) -= F0;
              out(c, kX, nL) -= F0;
              out(c, kR, nL) -= Fr;
              out(c, kM, nL) -= Fm;
            } else {
              bf.left[c] += two_pi * F0;
            }
            if (Rc >= 0) {
              out(c, kT, nR) += F0;
              out(c, kX, nR) -= F0;
              out(c, kR, nR) += Fr;
              out(c, kM, nR) += Fm;
            } else {
              bf.right[c] += two_pi * F0;
            }
          }
        }
      }
    }
  }

  // r-faces: a4 = -2 c_E sqrt(r_f) mu E(x); upwinding per x node and mu sign.
  // The face r = 0 carries no flux (sqrt(0) = 0) and is skipped.
  void r_faces(const DofField& in, DofField& out, const NodalField& ef, BoundaryFluxes& bf) const {
    if (coef_.c_E == 0.0) return;
    const int nx = grid_.nx(), nr = grid_.nr(), nmu = grid_.nmu();
    const double two_pi = 2.0 * std::numbers::pi;
    for (int i = 0; i < nx; ++i) {
      const double hx = 0.5 * grid_.width(kAxisX, i);
      for (int f = 1; f <= nr; ++f) {
        const int lo = f - 1;
        const bool top = f == nr;
        const double speed = -2.0 * coef_.c_E * std::sqrt(grid_.lower(kAxisR, lo) + grid_.width(kAxisR, lo));
        for (int m = 0; m < nmu; ++m) {
          const std::size_t nl = grid_.index(i, lo, m);
          const std::size_t nu = top ? 0 : grid_.index(i, f, m);
          for (int c = 0; c < kChaosDim; ++c) {
            double F0 = 0.0, Fx = 0.0, Fm = 0.0;
            for (int q = 0; q < kXNodes; ++q) {
              const double wq = hx * xweight_[q];
              const double e = ef.values[i][q];
              const double xq = xnode_[q];
              const double a = speed * e;  // a4 = a * mu
              for (int s = 0; s < 2; ++s) {
                const auto& U = s == 0 ? U1p_[m] : U1m_[m];
                if (U[0] == 0.0 && U[1] == 0.0 && U[2] == 0.0) continue;
                const double sign_mu = s == 0 ? 1.0 : -1.0;
                const bool from_lower = a * sign_mu >= 0.0;
                double t, mm;
                if (from_lower) {
                  t = in(c, kT, nl) + in(c, kX, nl) * xq + in(c, kR, nl);
                  mm = in(c, kM, nl);
                } else if (top) {
                  continue;  // cutoff ghost is zero
                } else {
                  t = in(c, kT, nu) + in(c, kX, nu) * xq - in(c, kR, nu);
                  mm = in(c, kM, nu);
                }
                const double f0 = a * (t * U[0] + mm * U[1]);
                const double fm = a * (t * U[1] + mm * U[2]);
                F0 += wq * f0;
                Fx += wq * f0 * xq;
                Fm += wq * fm;
              }
            }
            out(c, kT, nl) -= F0;
            out(c, kR, nl) -= F0;
            out(c, kX, nl) -= Fx;
            out(c, kM, nl) -= Fm;
            if (top) {
              bf.top[c] += two_pi * F0;
            } else {
              out(c, kT, nu) += F0;
              out(c, kR, nu) -= F0;
              out(c, kX, nu) += Fx;
              out(c, kM, nu) += Fm;
            }
          }
        }
      }
    }
  }

  // mu-faces: a5 = -c_E (1 - mu_f^2) E(x) / sqrt(r); faces mu = +-1 are skipped.
  void mu_faces(const DofField& in, DofField& out, const NodalField& ef) const {
    if (coef_.c_E == 0.0) return;
    const int nx = grid_.nx(), nr = grid_.nr(), nmu = grid_.nmu();
    for (int i = 0; i < nx; ++i) {
      const double hx = 0.5 * grid_.width(kAxisX, i);
      for (int f = 1; f < nmu; ++f) {
        const int lo = f - 1;
        const double muf = grid_.lower(kAxisMu, f);
        const double speed = -coef_.c_E * (1.0 - muf * muf);
        for (int k = 0; k < nr; ++k) {
          const auto& Q = Qr_[k];
          const std::size_t nl = grid_.index(i, k, lo);
          const std::size_t nu = grid_.index(i, k, f);
          for (int c = 0; c < kChaosDim; ++c) {
            double F0 = 0.0, Fx = 0.0, Fr = 0.0;
            for (int q = 0; q < kXNodes; ++q) {
              const double wq = hx * xweight_[q];
              const double a = speed * ef.values[i][q];
              const double xq = xnode_[q];
              double t, r;
              if (a >= 0.0) {
                t = in(c, kT, nl) + in(c, kX, nl) * xq + in(c, kM, nl);
                r = in(c, kR, nl);
              } else {
                t = in(c, kT, nu) + in(c, kX, nu) * xq - in(c, kM, nu);
                r = in(c, kR, nu);
              }
              const double f0 = a * (t * Q[0] + r * Q[1]);
              F0 += wq * f0;
              Fx += wq * f0 * xq;
              Fr += wq * a * (t * Q[1] + r * Q[2]);
            }
            out(c, kT, nl) -= F0;
            out(c, kM, nl) -= F0;
            out(c, kX, nl) -= Fx;
            out(c, kR, nl) -= Fr;
            out(c, kT, nu) += F0;
            out(c, kM, nu) -= F0;
            out(c, kX, nu) += Fx;
            out(c, kR, nu) += Fr;
          }
        }
      }
    }
  }

  void apply_inverse_mass(DofField& out) const {
    const int nx = grid_.nx(), nr = grid_.nr(), nmu = grid_.nmu();
    for (int i = 0; i < nx; ++i)
      for (int k = 0; k < nr; ++k)
        for (int m = 0; m < nmu; ++m) {
          const std::size_t n = grid_.index(i, k, m);
          const double inv = 1.0 / grid_.volume(i, k, m);
          for (int c = 0; c < kChaosDim; ++c) {
            out(c, kT, n) *= inv;
            out(c, kX, n) *= 3.0 * inv;
            out(c, kR, n) *= 3.0 * inv;
            out(c, kM, n) *= 3.0 * inv;
          }
        }
  }

  PhaseGrid grid_;
  TransportCoefficients coef_;
  std::array<double, kXNodes> xnode_{};
  std::array<double, kXNodes> xweight_{};
  std::vector<std::array<double, 3>> Pr_, Qr_;
  std::vector<std::array<double, 3>> U1p_, U1m_, U2_;
};

}  // namespace sgbp
