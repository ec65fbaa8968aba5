#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "sgbp/poisson.hpp"
#include "sgbp/quadrature.hpp"

using namespace sgbp;

namespace {

constexpr double kPi = std::numbers::pi;

DensityProfile constant_density(const PhaseGrid& g, double v) {
  return {std::vector<double>(g.nx(), v), std::vector<double>(g.nx(), 0.0)};
}

DensityProfile project_density(const PhaseGrid& g, const std::function<double(double)>& f) {
  const QuadratureRule q = gauss_legendre(6);
  DensityProfile d{std::vector<double>(g.nx()), std::vector<double>(g.nx())};
  for (int i = 0; i < g.nx(); ++i) {
    double m = 0.0, s = 0.0;
    for (std::size_t a = 0; a < q.size(); ++a) {
      const double v = f(g.global(kAxisX, i, q.nodes[a]));
      m += 0.5 * q.weights[a] * v;
      s += 1.5 * q.weights[a] * v * q.nodes[a];
    }
    d.mean[i] = m;
    d.slope[i] = s;
  }
  return d;
}

}  // namespace

TEST(Poisson, ChargeNeutralGivesLinearPotential) {
  const PhaseGrid g(10, 2, 2, 1.0);
  const DeviceProfile dev = DeviceProfile::uniform(0.7, 11.7, 0.5);
  const FieldProfile f = solve_poisson(constant_density(g, 0.7), g, dev, 1.8e6);
  for (double x : {0.0, 0.13, 0.5, 0.99, 1.0}) {
    EXPECT_NEAR(f.potential(x), 0.5 * x, 1e-12);
    EXPECT_NEAR(f.efield(x), -0.5, 1e-12);
  }
  for (double e : f.cell_efield()) EXPECT_NEAR(e, -0.5, 1e-12);
  EXPECT_EQ(f.node_potential().front(), 0.0);
  EXPECT_EQ(f.node_potential().back(), 0.5);
}

TEST(Poisson, ZeroBiasZeroChargeGivesZeroField) {
  const PhaseGrid g(4, 1, 1, 1.0);
  const FieldProfile f = solve_poisson(constant_density(g, 2.0), g, DeviceProfile::uniform(2.0, 1.0, 0.0), 5.0);
  for (double x : {0.1, 0.6}) EXPECT_EQ(f.efield(x), 0.0);
}

TEST(Poisson, LinearDensityIsSolvedExactly) {
  // V'' = k (a - N + b x), V(0) = 0, V(1) = bias
  const PhaseGrid g({0.0, 0.2, 0.45, 0.8, 1.0}, {0.0, 1.0}, {-1.0, 1.0});
  const double a = 1.3, b = -0.4, N = 1.0, eps = 2.0, cP = 3.0, bias = 0.25, k = cP / eps;
  const DeviceProfile dev = DeviceProfile::uniform(N, eps, bias);
  const FieldProfile f = solve_poisson(project_density(g, [&](double x) { return a + b * x; }), g, dev, cP);
  const double D = bias - k * ((a - N) / 2.0 + b / 6.0);
  for (double x : {0.0, 0.1, 0.2, 0.33, 0.7, 0.95, 1.0}) {
    EXPECT_NEAR(f.potential(x), k * ((a - N) * x * x / 2.0 + b * x * x * x / 6.0) + D * x, 1e-13);
    EXPECT_NEAR(f.efield(x), -(k * ((a - N) * x + b * x * x / 2.0) + D), 1e-13);
    EXPECT_NEAR(f.source(x), k * (a - N + b * x), 1e-13);
  }
}

TEST(Poisson, SinusoidalSourceConvergesQuadratically) {
  // V'' = k sin(pi x): V = -k sin(pi x) / pi^2 + bias x
  const double k = 2.0, bias = 0.3;
  auto exact = [&](double x) { return -k * std::sin(kPi * x) / (kPi * kPi) + bias * x; };
  double prev = 0.0;
  for (int n : {8, 16, 32, 64}) {
    const PhaseGrid g(n, 1, 1, 1.0);
    const DeviceProfile dev = DeviceProfile::uniform(1.0, 1.0, bias);
    const FieldProfile f = solve_poisson(project_density(g, [](double x) { return 1.0 + std::sin(kPi * x); }), g, dev, k);
    double err = 0.0;
    for (int j = 0; j <= 200; ++j) err = std::max(err, std::abs(f.potential(j / 200.0) - exact(j / 200.0)));
    if (prev > 0.0) EXPECT_GT(std::log2(prev / err), 1.9) << n;
    prev = err;
  }
  EXPECT_LT(prev, 1e-4);
}

TEST(Poisson, OdeResidualAndRegularity) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  const PhaseGrid g(9, 1, 1, 1.0);
  DensityProfile rho{std::vector<double>(9), std::vector<double>(9)};
  for (int i = 0; i < 9; ++i) {
    rho.mean[i] = u(rng);
    rho.slope[i] = 0.3 * (u(rng) - 1.0);
  }
  const DeviceProfile dev({0.3, 0.7}, {2.0, 0.5, 2.0}, 11.7, 0.5);
  const double cP = 40.0;
  const FieldProfile f = solve_poisson(rho, g, dev, cP);
  // second difference of V reproduces the source away from cuts
  const double h = 1e-4;
  for (double x : {0.05, 0.17, 0.4, 0.62, 0.81, 0.93}) {
    const double d2 = (f.potential(x + h) - 2.0 * f.potential(x) + f.potential(x - h)) / (h * h);
    const double s = cP / 11.7 * (rho.at(g, x) - dev.doping(x));
    EXPECT_NEAR(d2, s, 1e-5 * std::max(1.0, std::abs(s)));
    EXPECT_NEAR(f.source(x), s, 1e-12);
    EXPECT_NEAR(-(f.potential(x + h) - f.potential(x - h)) / (2 * h), f.efield(x), 1e-6);
  }
  // E is continuous across cell edges and junctions
  for (double x : {1.0 / 9, 4.0 / 9, 0.3, 0.7}) EXPECT_NEAR(f.efield(x - 1e-12), f.efield(x + 1e-12), 1e-9);
  EXPECT_NEAR(f.potential(0.0), 0.0, 1e-14);
  EXPECT_NEAR(f.potential(1.0), 0.5, 1e-12);
}

TEST(Poisson, CellFieldIsTheExactAverage) {
  const PhaseGrid g(5, 1, 1, 1.0);
  const DeviceProfile dev({0.3, 0.7}, {1.0, 0.2, 1.0}, 11.7, 0.5);
  const FieldProfile f = solve_poisson(constant_density(g, 0.8), g, dev, 100.0);
  const QuadratureRule q = gauss_legendre(8);
  for (int i = 0; i < g.nx(); ++i) {
    // split at the junctions where E'' jumps
    double avg = 0.0;
    const double a = g.lower(kAxisX, i), b = g.upper(kAxisX, i);
    std::vector<double> cuts{a};
    for (double j : {0.3, 0.7})
      if (j > a && j < b) cuts.push_back(j);
    cuts.push_back(b);
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s)
      avg += q.integrate([&](double x) { return f.efield(x); }, cuts[s], cuts[s + 1]);
    EXPECT_NEAR(f.cell_efield()[i], avg / (b - a), 1e-10);
  }
}

TEST(Poisson, RejectsMismatchedDensity) {
  const PhaseGrid g(4, 1, 1, 1.0);
  EXPECT_THROW(solve_poisson(constant_density(PhaseGrid(3, 1, 1, 1.0), 1.0), g, DeviceProfile::uniform(1, 1, 0), 1.0),
               DomainError);
}

TEST(Density, ConstantAndSlope) {
  const PhaseGrid g(3, 4, 2, 5.0);
  DofField f(g);
  std::fill(f.coef(0, kT).begin(), f.coef(0, kT).end(), 1.0);
  std::fill(f.coef(0, kX).begin(), f.coef(0, kX).end(), 0.25);
  const DensityProfile d = compute_density(f, g);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(d.mean[i], 2.0 * kPi * 5.0 * 2.0, 1e-12);
    EXPECT_NEAR(d.slope[i], 0.25 * 2.0 * kPi * 5.0 * 2.0, 1e-12);
  }
  EXPECT_NEAR(d.at(g, 1.0), 1.25 * 20.0 * kPi, 1e-12);
  // r and mu slopes integrate to zero
  DofField h(g);
  std::fill(h.coef(0, kR).begin(), h.coef(0, kR).end(), 3.0);
  std::fill(h.coef(0, kM).begin(), h.coef(0, kM).end(), -2.0);
  EXPECT_EQ(compute_density(h, g).mean[0], 0.0);
}

TEST(Density, MatchesMidpointIntegration) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const PhaseGrid g(4, 5, 3, 7.0);
  DofField f(g);
  for (int c = 0; c < kChaosDim; ++c)
    for (int t = 0; t < kCoefCount; ++t)
      for (double& v : f.coef(c, Coef(t))) v = u(rng);
  const DensityProfile d = compute_density(f, g, 1);
  for (double x : {0.05, 0.3, 0.61, 0.9}) {
    double s = 0.0;
    const int n = 240;  // sub-intervals aligned with every cell edge
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const double r = 7.0 * (a + 0.5) / n, mu = -1.0 + 2.0 * (b + 0.5) / n;
        s += evaluate(f, g, 1, x, r, mu) * (7.0 / n) * (2.0 / n);
      }
    EXPECT_NEAR(d.at(g, x), 2.0 * kPi * s, 1e-10);
  }
}
