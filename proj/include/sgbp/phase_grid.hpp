#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "sgbp/error.hpp"
#include "sgbp/gpc_basis.hpp"
#include "sgbp/quadrature.hpp"

namespace sgbp {

enum Axis { kAxisX = 0, kAxisR = 1, kAxisMu = 2 };

/// Tensor-product Cartesian grid over x in [0,1], r in [0,r_max], mu in [-1,1].
class PhaseGrid {
 public:
  PhaseGrid() = default;

  PhaseGrid(int nx, int nr, int nmu, double r_max)
      : PhaseGrid(uniform_edges(nx, 0.0, 1.0), uniform_edges(nr, 0.0, r_max), uniform_edges(nmu, -1.0, 1.0)) {}

  PhaseGrid(std::vector<double> x_edges, std::vector<double> r_edges, std::vector<double> mu_edges)
      : edges_{std::move(x_edges), std::move(r_edges), std::move(mu_edges)} {
    static constexpr const char* names[] = {"x", "r", "mu"};
    for (int a = 0; a < 3; ++a) {
      const auto& e = edges_[a];
      if (e.size() < 2) throw ConfigError(std::string("grid: need at least one ") + names[a] + " cell");
      for (std::size_t j = 1; j < e.size(); ++j)
        if (!(e[j] > e[j - 1])) throw ConfigError(std::string("grid: ") + names[a] + " edges must increase strictly");
    }
    if (edges_[kAxisX].front() != 0.0 || edges_[kAxisX].back() != 1.0)
      throw ConfigError("grid: x edges must span [0, 1] exactly");
    if (edges_[kAxisR].front() != 0.0) throw ConfigError("grid: r edges must start at 0");
    if (edges_[kAxisMu].front() != -1.0 || edges_[kAxisMu].back() != 1.0)
      throw ConfigError("grid: mu edges must span [-1, 1] exactly");
  }

  static std::vector<double> uniform_edges(int n, double lo, double hi) {
    if (n < 1) throw ConfigError("grid: cell counts must be positive");
    std::vector<double> e(n + 1);
    for (int j = 0; j <= n; ++j) e[j] = lo + (hi - lo) * j / n;
    e.front() = lo;
    e.back() = hi;
    return e;
  }

  int nx() const { return static_cast<int>(edges_[kAxisX].size()) - 1; }
  int nr() const { return static_cast<int>(edges_[kAxisR].size()) - 1; }
  int nmu() const { return static_cast<int>(edges_[kAxisMu].size()) - 1; }
  int count(Axis a) const { return static_cast<int>(edges_[a].size()) - 1; }
  std::size_t cell_count() const { return static_cast<std::size_t>(nx()) * nr() * nmu(); }
  double r_max() const { return edges_[kAxisR].back(); }

  const std::vector<double>& edges(Axis a) const { return edges_[a]; }
  double lower(Axis a, int j) const { return edges_[a][j]; }
  double upper(Axis a, int j) const { return edges_[a][j + 1]; }
  double width(Axis a, int j) const { return edges_[a][j + 1] - edges_[a][j]; }
  double center(Axis a, int j) const { return 0.5 * (edges_[a][j] + edges_[a][j + 1]); }
  /// Scaled local coordinate in [-1, 1].
  double local(Axis a, int j, double v) const { return (v - center(a, j)) / (0.5 * width(a, j)); }
  double global(Axis a, int j, double xi) const { return center(a, j) + 0.5 * width(a, j) * xi; }

  std::size_t index(int i, int k, int m) const {
    return (static_cast<std::size_t>(i) * nr() + k) * nmu() + m;
  }
  double volume(int i, int k, int m) const { return width(kAxisX, i) * width(kAxisR, k) * width(kAxisMu, m); }

  /// Cell containing v; points on an interior edge belong to the upper cell.
  int locate(Axis a, double v) const {
    const auto& e = edges_[a];
    if (!(v >= e.front() && v <= e.back())) throw DomainError("grid: point outside the domain");
    if (v == e.back()) return count(a) - 1;
    const auto it = std::upper_bound(e.begin(), e.end(), v);
    return static_cast<int>(it - e.begin()) - 1;
  }

  bool same_shape(const PhaseGrid& other) const { return edges_ == other.edges_; }

 private:
  std::array<std::vector<double>, 3> edges_;
};

/// P1 coefficient kinds: Phi = T + X xi_x + R xi_r + M xi_mu on each cell.
enum Coef { kT = 0, kX = 1, kR = 2, kM = 3 };
inline constexpr int kCoefCount = 4;

/// Struct-of-arrays storage: one contiguous array per (chaos component, coefficient kind).
class DofField {
 public:
  DofField() = default;
  explicit DofField(const PhaseGrid& grid) : cells_(grid.cell_count()) {
    for (auto& comp : data_)
      for (auto& arr : comp) arr.assign(cells_, 0.0);
  }

  std::size_t cell_count() const { return cells_; }
  std::vector<double>& coef(int component, Coef kind) { return data_[component][kind]; }
  const std::vector<double>& coef(int component, Coef kind) const { return data_[component][kind]; }
  double& operator()(int component, Coef kind, std::size_t cell) { return data_[component][kind][cell]; }
  double operator()(int component, Coef kind, std::size_t cell) const { return data_[component][kind][cell]; }

  void fill(double v) {
    for (auto& comp : data_)
      for (auto& arr : comp) std::fill(arr.begin(), arr.end(), v);
  }

  /// this += a * other
  void axpy(double a, const DofField& other) {
    for (int c = 0; c < kChaosDim; ++c)
      for (int t = 0; t < kCoefCount; ++t) {
        auto& dst = data_[c][t];
        const auto& src = other.data_[c][t];
        for (std::size_t n = 0; n < cells_; ++n) dst[n] += a * src[n];
      }
  }

  void scale(double a) {
    for (auto& comp : data_)
      for (auto& arr : comp)
        for (double& v : arr) v *= a;
  }

  bool all_finite() const {
    for (const auto& comp : data_)
      for (const auto& arr : comp)
        for (double v : arr)
          if (!std::isfinite(v)) return false;
    return true;
  }

  double max_abs(int component) const {
    double m = 0.0;
    for (const auto& arr : data_[component])
      for (double v : arr) m = std::max(m, std::abs(v));
    return m;
  }

  bool operator==(const DofField& other) const = default;

 private:
  std::size_t cells_ = 0;
  std::array<std::array<std::vector<double>, kCoefCount>, kChaosDim> data_;
};

/// Tensor Gauss rule on the reference cell [-1,1]^3 (reference weights sum to 8).
struct CellQuadrature {
  QuadratureRule x, r, mu;

  explicit CellQuadrature(int nx = 2, int nr = 2, int nmu = 2)
      : x(gauss_legendre(nx)), r(gauss_legendre(nr)), mu(gauss_legendre(nmu)) {}
};

inline double evaluate_cell(const DofField& field, int component, std::size_t cell, double xi_x, double xi_r,
                            double xi_mu) {
  return field(component, kT, cell) + field(component, kX, cell) * xi_x + field(component, kR, cell) * xi_r +
         field(component, kM, cell) * xi_mu;
}

inline double evaluate(const DofField& field, const PhaseGrid& grid, int component, double x, double r,
                       double mu) {
  const int i = grid.locate(kAxisX, x);
  const int k = grid.locate(kAxisR, r);
  const int m = grid.locate(kAxisMu, mu);
  return evaluate_cell(field, component, grid.index(i, k, m), grid.local(kAxisX, i, x), grid.local(kAxisR, k, r),
                       grid.local(kAxisMu, m, mu));
}

/// Cellwise L2 projection of f(x, r, mu) onto P1 for one chaos component.
/// The Legendre P1 basis is orthogonal on each cell, so the mass matrix is diag(1, 1/3, 1/3, 1/3).
template <class F>
void l2_project(F&& f, const PhaseGrid& grid, DofField& field, int component, const CellQuadrature& quad = CellQuadrature(3, 3, 3)) {
  for (int i = 0; i < grid.nx(); ++i)
    for (int k = 0; k < grid.nr(); ++k)
      for (int m = 0; m < grid.nmu(); ++m) {
        double s0 = 0.0, sx = 0.0, sr = 0.0, sm = 0.0;
        for (std::size_t a = 0; a < quad.x.size(); ++a)
          for (std::size_t b = 0; b < quad.r.size(); ++b)
            for (std::size_t c = 0; c < quad.mu.size(); ++c) {
              const double xa = quad.x.nodes[a], rb = quad.r.nodes[b], mc = quad.mu.nodes[c];
              const double w = quad.x.weights[a] * quad.r.weights[b] * quad.mu.weights[c];
              const double v = f(grid.global(kAxisX, i, xa), grid.global(kAxisR, k, rb), grid.global(kAxisMu, m, mc));
              s0 += w * v;
              sx += w * v * xa;
              sr += w * v * rb;
              sm += w * v * mc;
            }
        const std::size_t n = grid.index(i, k, m);
        field(component, kT, n) = s0 / 8.0;
        field(component, kX, n) = 3.0 * sx / 8.0;
        field(component, kR, n) = 3.0 * sr / 8.0;
        field(component, kM, n) = 3.0 * sm / 8.0;
      }
}

template <class F>
DofField l2_project(F&& f, const PhaseGrid& grid, int component = 0) {
  DofField field(grid);
  l2_project(std::forward<F>(f), grid, field, component);
  return field;
}

/// Integral of one component over the whole (x, r, mu) domain (no azimuthal factor).
inline double integrate(const DofField& field, const PhaseGrid& grid, int component) {
  double sum = 0.0;
  for (int i = 0; i < grid.nx(); ++i)
    for (int k = 0; k < grid.nr(); ++k)
      for (int m = 0; m < grid.nmu(); ++m) sum += field(component, kT, grid.index(i, k, m)) * grid.volume(i, k, m);
  return sum;
}

}  // namespace sgbp
