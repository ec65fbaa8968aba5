#include <cmath>

#include <gtest/gtest.h>

#include "sgbp/phase_grid.hpp"

using namespace sgbp;

TEST(PhaseGrid, UniformShape) {
  const PhaseGrid g(5, 4, 3, 20.0);
  EXPECT_EQ(g.nx(), 5);
  EXPECT_EQ(g.nr(), 4);
  EXPECT_EQ(g.nmu(), 3);
  EXPECT_EQ(g.cell_count(), 60u);
  EXPECT_EQ(g.r_max(), 20.0);
  EXPECT_DOUBLE_EQ(g.width(kAxisR, 2), 5.0);
  EXPECT_NEAR(g.center(kAxisMu, 1), 0.0, 1e-15);
  EXPECT_EQ(g.edges(kAxisX).front(), 0.0);
  EXPECT_EQ(g.edges(kAxisX).back(), 1.0);
}

TEST(PhaseGrid, VolumesSumToDomain) {
  const PhaseGrid g(7, 5, 4, 12.5);
  double v = 0.0;
  for (int i = 0; i < g.nx(); ++i)
    for (int k = 0; k < g.nr(); ++k)
      for (int m = 0; m < g.nmu(); ++m) v += g.volume(i, k, m);
  EXPECT_NEAR(v, 1.0 * 12.5 * 2.0, 1e-12);
}

TEST(PhaseGrid, IndexIsBijective) {
  const PhaseGrid g(3, 4, 5, 1.0);
  std::vector<int> seen(g.cell_count(), 0);
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 4; ++k)
      for (int m = 0; m < 5; ++m) ++seen.at(g.index(i, k, m));
  for (int s : seen) EXPECT_EQ(s, 1);
}

TEST(PhaseGrid, LocalGlobalRoundTrip) {
  const PhaseGrid g(4, 4, 4, 8.0);
  for (double xi : {-1.0, -0.3, 0.0, 0.9, 1.0}) EXPECT_NEAR(g.local(kAxisR, 2, g.global(kAxisR, 2, xi)), xi, 1e-14);
  EXPECT_DOUBLE_EQ(g.global(kAxisX, 1, -1.0), 0.25);
  EXPECT_DOUBLE_EQ(g.global(kAxisX, 1, 1.0), 0.5);
}

TEST(PhaseGrid, Locate) {
  const PhaseGrid g(4, 2, 2, 2.0);
  EXPECT_EQ(g.locate(kAxisX, 0.0), 0);
  EXPECT_EQ(g.locate(kAxisX, 0.25), 1);  // edges belong to the right cell
  EXPECT_EQ(g.locate(kAxisX, 1.0), 3);
  EXPECT_EQ(g.locate(kAxisMu, -0.1), 0);
  EXPECT_THROW(g.locate(kAxisR, 2.5), DomainError);
  EXPECT_THROW(g.locate(kAxisR, -1e-12), DomainError);
}

TEST(PhaseGrid, NonUniformEdges) {
  const PhaseGrid g({0.0, 0.3, 0.7, 1.0}, {0.0, 1.0, 4.0}, {-1.0, 1.0});
  EXPECT_DOUBLE_EQ(g.width(kAxisX, 1), 0.4);
  EXPECT_EQ(g.locate(kAxisX, 0.5), 1);
  EXPECT_TRUE(g.same_shape(PhaseGrid({0.0, 0.3, 0.7, 1.0}, {0.0, 1.0, 4.0}, {-1.0, 1.0})));
  EXPECT_FALSE(g.same_shape(PhaseGrid(3, 2, 1, 4.0)));
}

TEST(PhaseGrid, RejectsBadEdges) {
  EXPECT_THROW(PhaseGrid(0, 2, 2, 1.0), ConfigError);
  EXPECT_THROW(PhaseGrid({0.0, 0.5, 0.5, 1.0}, {0.0, 1.0}, {-1.0, 1.0}), ConfigError);
  EXPECT_THROW(PhaseGrid({0.1, 1.0}, {0.0, 1.0}, {-1.0, 1.0}), ConfigError);
  EXPECT_THROW(PhaseGrid({0.0, 1.0}, {0.5, 1.0}, {-1.0, 1.0}), ConfigError);
  EXPECT_THROW(PhaseGrid({0.0, 1.0}, {0.0, 1.0}, {-1.0, 0.9}), ConfigError);
  EXPECT_THROW(PhaseGrid({0.0, 1.0}, {0.0, 1.0}, {-1.0}), ConfigError);
}

TEST(DofField, ArithmeticAndEquality) {
  const PhaseGrid g(2, 2, 2, 1.0);
  DofField a(g), b(g);
  a.fill(1.0);
  b.fill(2.0);
  a.axpy(0.5, b);
  EXPECT_EQ(a(1, kR, 3), 2.0);
  a.scale(-2.0);
  EXPECT_EQ(a.max_abs(0), 4.0);
  EXPECT_TRUE(a.all_finite());
  DofField c = a;
  EXPECT_TRUE(c == a);
  c(0, kM, 7) = NAN;
  EXPECT_FALSE(c.all_finite());
  EXPECT_FALSE(c == a);
}

TEST(Projection, ReproducesTrilinearWithoutCrossTerms) {
  const PhaseGrid g(3, 4, 2, 6.0);
  auto f = [](double x, double r, double mu) { return 2.0 - 3.0 * x + 0.5 * r + 4.0 * mu; };
  const DofField p = l2_project(f, g);
  for (double x : {0.01, 0.4, 0.93})
    for (double r : {0.2, 3.3, 5.9})
      for (double mu : {-0.8, 0.1, 0.99}) EXPECT_NEAR(evaluate(p, g, 0, x, r, mu), f(x, r, mu), 1e-12);
  EXPECT_EQ(p.max_abs(1), 0.0);
}

TEST(Projection, CellAverageMatchesExactIntegral) {
  const PhaseGrid g(2, 3, 2, 3.0);
  auto f = [](double x, double r, double mu) { return x * x * r * std::exp(mu); };
  const DofField p = l2_project(f, g);
  // int_0^1 x^2 int_0^3 r int_-1^1 e^mu = (1/3)(9/2)(e - 1/e)
  EXPECT_NEAR(integrate(p, g, 0), (1.0 / 3.0) * 4.5 * (std::exp(1.0) - std::exp(-1.0)), 1e-5);
}

TEST(Projection, SlopesAreL2Optimal) {
  // on a single cell the P1 slope of x^2 over [0,1] is the Legendre coefficient 1/2 (in xi units)
  const PhaseGrid g(1, 1, 1, 1.0);
  const DofField p = l2_project([](double x, double, double) { return x * x; }, g);
  EXPECT_NEAR(p(0, kT, 0), 1.0 / 3.0, 1e-14);
  EXPECT_NEAR(p(0, kX, 0), 0.5, 1e-14);
  EXPECT_NEAR(p(0, kR, 0), 0.0, 1e-14);
}

TEST(Projection, IntoSecondComponent) {
  const PhaseGrid g(2, 2, 2, 1.0);
  DofField f(g);
  l2_project([](double, double r, double) { return r; }, g, f, 1);
  EXPECT_EQ(f.max_abs(0), 0.0);
  EXPECT_NEAR(integrate(f, g, 1), 1.0, 1e-14);  // 1 * (1/2) * 2
}
