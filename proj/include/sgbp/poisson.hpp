#pragma once

// 1D Poisson solve eps_r V'' = c_P (rho - N_D), V(0) = 0, V(1) = V0, E = -V'.
// rho is piecewise linear per x-cell and N_D piecewise constant, so the double
// integral is a piecewise cubic that is evaluated in closed form.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "sgbp/device.hpp"
#include "sgbp/error.hpp"
#include "sgbp/phase_grid.hpp"
#include "sgbp/quadrature.hpp"

namespace sgbp {

/// Charge density of gPC component 0, P1 in x: rho(x) = mean[i] + slope[i] xi.
struct DensityProfile {
  std::vector<double> mean;
  std::vector<double> slope;

  double at(const PhaseGrid& grid, double x) const {
    const int i = grid.locate(kAxisX, x);
    return mean[i] + slope[i] * grid.local(kAxisX, i, x);
  }
};

/// rho = 2pi int Phi_0 dr dmu (the azimuthal integral folded in here).
inline DensityProfile compute_density(const DofField& field, const PhaseGrid& grid, int component = 0) {
  DensityProfile d;
  d.mean.assign(grid.nx(), 0.0);
  d.slope.assign(grid.nx(), 0.0);
  const double two_pi = 2.0 * std::numbers::pi;
  const auto& T = field.coef(component, kT);
  const auto& X = field.coef(component, kX);
  for (int i = 0; i < grid.nx(); ++i) {
    double t = 0.0, s = 0.0;
    for (int k = 0; k < grid.nr(); ++k)
      for (int m = 0; m < grid.nmu(); ++m) {
        const std::size_t n = grid.index(i, k, m);
        const double a = grid.width(kAxisR, k) * grid.width(kAxisMu, m);
        t += T[n] * a;
        s += X[n] * a;
      }
    d.mean[i] = two_pi * t;
    d.slope[i] = two_pi * s;
  }
  return d;
}

/// Potential and field from one Poisson solve.
class FieldProfile {
 public:
  struct Segment {
    double a, b;     // [a, b]
    double s0, s1;   // source s(x) = s0 + s1 (x - a), s = c_P/eps_r (rho - N_D)
    double S1a;      // int_0^a s
    double S2a;      // int_0^a S1
  };

  FieldProfile() = default;
  FieldProfile(std::vector<Segment> segments, double slope_constant, std::vector<double> node_x, double bias)
      : segments_(std::move(segments)), D_(slope_constant) {
    node_potential_.reserve(node_x.size());
    for (double x : node_x) node_potential_.push_back(potential(x));
    // Dirichlet data is imposed exactly rather than through roundoff.
    node_potential_.front() = 0.0;
    node_potential_.back() = bias;
    for (std::size_t i = 0; i + 1 < node_x.size(); ++i)
      cell_efield_.push_back(-(node_potential_[i + 1] - node_potential_[i]) / (node_x[i + 1] - node_x[i]));
  }

  double potential(double x) const {
    const Segment& g = find(x);
    const double h = x - g.a;
    return g.S2a + g.S1a * h + g.s0 * h * h / 2.0 + g.s1 * h * h * h / 6.0 + D_ * x;
  }
  double efield(double x) const {
    const Segment& g = find(x);
    const double h = x - g.a;
    return -(g.S1a + g.s0 * h + g.s1 * h * h / 2.0 + D_);
  }
  /// V'' = c_P / eps_r (rho - N_D)
  double source(double x) const {
    const Segment& g = find(x);
    return g.s0 + g.s1 * (x - g.a);
  }

  /// Values at the x-edges of the grid.
  const std::vector<double>& node_potential() const { return node_potential_; }
  /// Exact cell averages of E.
  const std::vector<double>& cell_efield() const { return cell_efield_; }
  const std::vector<Segment>& segments() const { return segments_; }

 private:
  const Segment& find(double x) const {
    if (segments_.empty()) throw DomainError("poisson: empty field profile");
    auto it = std::upper_bound(segments_.begin(), segments_.end(), x,
                               [](double v, const Segment& s) { return v < s.a; });
    if (it == segments_.begin()) return segments_.front();
    return *(it - 1);
  }

  std::vector<Segment> segments_;
  double D_ = 0.0;
  std::vector<double> node_potential_;
  std::vector<double> cell_efield_;
};

inline FieldProfile solve_poisson(const DensityProfile& rho, const PhaseGrid& grid, const DeviceProfile& device,
                                  double c_P) {
  const auto& ex = grid.edges(kAxisX);
  if (rho.mean.size() != static_cast<std::size_t>(grid.nx()) || rho.slope.size() != rho.mean.size())
    throw DomainError("poisson: density does not match the grid");
  std::vector<double> cuts(ex.begin(), ex.end());
  for (double j : device.junctions()) cuts.push_back(j);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const double coef = c_P / device.relative_permittivity();
  std::vector<FieldProfile::Segment> segs;
  double S1 = 0.0, S2 = 0.0;
  for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
    const double a = cuts[j], b = cuts[j + 1];
    const double mid = 0.5 * (a + b);
    const int i = grid.locate(kAxisX, mid);
    const double half = 0.5 * grid.width(kAxisX, i);
    const double slope = rho.slope[i] / half;
    const double rho_a = rho.mean[i] + rho.slope[i] * grid.local(kAxisX, i, a);
    FieldProfile::Segment g{a, b, coef * (rho_a - device.doping(mid)), coef * slope, S1, S2};
    segs.push_back(g);
    const double h = b - a;
    S2 += S1 * h + g.s0 * h * h / 2.0 + g.s1 * h * h * h / 6.0;
    S1 += g.s0 * h + g.s1 * h * h / 2.0;
  }
  const double D = device.bias() - S2;
  return FieldProfile(std::move(segs), D, ex, device.bias());
}

}  // namespace sgbp
