#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "sgbp/error.hpp"
#include "sgbp/quadrature.hpp"

namespace sgbp {

/// Number of chaos modes (first-order Legendre chaos in one random variable).
inline constexpr int kChaosDim = 2;

using ChaosVector = Eigen::Matrix<double, kChaosDim, 1>;
using ChaosMatrix = Eigen::Matrix<double, kChaosDim, kChaosDim>;

/// Uniform random variable on the reference interval [-1, 1] with density 1/2.
/// The physical perturbation of beta is z = beta * w / N.
struct RandomModel {
  double N = 30.0;

  static constexpr double density(double w) { return (w >= -1.0 && w <= 1.0) ? 0.5 : 0.0; }
  double to_physical(double w, double beta) const { return beta * w / N; }
  double to_reference(double z, double beta) const { return N * z / beta; }
};

enum class BasisNormalization { paper_unnormalized, orthonormal };

inline BasisNormalization parse_normalization(std::string_view s) {
  if (s == "paper_unnormalized" || s == "paper") return BasisNormalization::paper_unnormalized;
  if (s == "orthonormal") return BasisNormalization::orthonormal;
  throw ConfigError("unknown basis normalization '" + std::string(s) + "'");
}

inline std::string to_string(BasisNormalization n) {
  return n == BasisNormalization::orthonormal ? "orthonormal" : "paper_unnormalized";
}

/// Legendre chaos {1, s*w}: s = 1 reproduces the published pair, s = sqrt(3)
/// makes the pair orthonormal in L2(pi).
class GpcBasis {
 public:
  explicit GpcBasis(BasisNormalization normalization = BasisNormalization::orthonormal, int quad_nodes = 64)
      : normalization_(normalization), quad_(gauss_legendre(quad_nodes)) {
    slope_ = normalization == BasisNormalization::orthonormal ? std::sqrt(3.0) : 1.0;
    gram_.setZero();
    for (int i = 0; i < kChaosDim; ++i)
      for (int j = 0; j < kChaosDim; ++j)
        gram_(i, j) = quad_.integrate([&](double w) { return (*this)(i, w) * (*this)(j, w) * RandomModel::density(w); });
  }

  double operator()(int k, double w) const { return k == 0 ? 1.0 : slope_ * w; }
  /// Coefficients (c0, c1) with Psi_k(w) = c0 + c1 w.
  double constant_term(int k) const { return k == 0 ? 1.0 : 0.0; }
  double linear_term(int k) const { return k == 0 ? 0.0 : slope_; }

  BasisNormalization normalization() const { return normalization_; }
  const ChaosMatrix& gram() const { return gram_; }
  const QuadratureRule& quadrature() const { return quad_; }
  int order() const { return kChaosDim; }

 private:
  BasisNormalization normalization_;
  QuadratureRule quad_;
  double slope_ = 1.0;
  ChaosMatrix gram_;
};

/// L2(pi) projection onto span{Psi}: gram^{-1} <f, Psi_i pi>.
template <class F>
ChaosVector project(F&& f, const GpcBasis& basis, const QuadratureRule& quad) {
  ChaosVector rhs;
  for (int i = 0; i < kChaosDim; ++i)
    rhs(i) = quad.integrate([&](double w) { return f(w) * basis(i, w) * RandomModel::density(w); });
  const auto llt = basis.gram().llt();
  if (llt.info() != Eigen::Success) throw std::logic_error("project: gram matrix is not positive definite");
  return llt.solve(rhs);
}

template <class F>
ChaosVector project(F&& f, const GpcBasis& basis) {
  return project(std::forward<F>(f), basis, basis.quadrature());
}

inline double reconstruct(const ChaosVector& coeffs, const GpcBasis& basis, double w) {
  double v = 0.0;
  for (int k = 0; k < kChaosDim; ++k) v += coeffs(k) * basis(k, w);
  return v;
}

struct ChaosStatistics {
  double mean = 0.0;
  double variance = 0.0;
  double stddev = 0.0;
};

/// Mean is the zeroth coefficient; variance sums the higher modes weighted by <Psi_k^2 pi>.
inline ChaosStatistics statistics(const ChaosVector& coeffs, const GpcBasis& basis) {
  ChaosStatistics s;
  s.mean = coeffs(0);
  for (int k = 1; k < kChaosDim; ++k) s.variance += coeffs(k) * coeffs(k) * basis.gram()(k, k);
  s.stddev = std::sqrt(s.variance);
  return s;
}

}  // namespace sgbp
