#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "../support/random_states.hpp"
#include "hbd/errors.hpp"
#include "hbd/foliation.hpp"

namespace hbd {
namespace {

ValidityBox box1(double lo, double hi) {
  ValidityBox b;
  b.lo = {lo, lo, lo};
  b.hi = {hi, hi, hi};
  return b;
}

TEST(Label, Examples) {
  const Foliation flat = Foliation::flat_time(SpinMode::D31);
  EXPECT_EQ(flat.label({{3.5, 1, 0, 0}}), 3.5);

  const Foliation cn = Foliation::constant_normal({{1, 0, 0, 0}}, SpinMode::D31);
  EXPECT_EQ(cn.label({{3.5, 1, 2, 3}}), 3.5);

  const double a = 0.4, b = 1.3;
  const Foliation g = Foliation::graph_leaf(TanhProfile{a, b}, SpinMode::D11, box1(-3, 3));
  EXPECT_NEAR(g.label({{a * std::tanh(b) + 2.0, 1.0, 0, 0}}), 2.0, 1e-15);
}

TEST(Normal, Examples) {
  EXPECT_EQ(Foliation::flat_time(SpinMode::D31).normal({{0.3, 1, 2, 3}}), (FourVector{{1, 0, 0, 0}}));
  const Foliation constant = Foliation::graph_leaf(TanhProfile{0.0, 1.0}, SpinMode::D11, box1(-3, 3));
  EXPECT_EQ(constant.normal({{0.3, 1, 0, 0}}), (FourVector{{1, 0, 0, 0}}));

  // h(x) = 0.6 x has slope 0.6 everywhere; sin with tiny b approximates that at 0.
  // Use tanh at the origin where h' = a b exactly.
  const Foliation g = Foliation::graph_leaf(TanhProfile{0.3, 2.0}, SpinMode::D11, box1(-3, 3));
  const FourVector n = g.normal({{0.0, 0.0, 0, 0}});
  EXPECT_NEAR(n[0], 1.25, 1e-15);
  EXPECT_NEAR(n[1], 0.75, 1e-15);
  EXPECT_NEAR(g.area_element(0.0, {0.0, 0, 0}), 0.8, 1e-15);
}

TEST(Normal, UnitFutureOnRandomPoints) {
  CounterRng rng(20, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const SpinMode m = testing::random_spin_mode(rng);
    const Foliation f = testing::random_curved_foliation(rng, m);
    const FourVector x{{testing::uniform(rng, -2, 2), testing::uniform(rng, -5, 5),
                        m == SpinMode::D31 ? testing::uniform(rng, -5, 5) : 0.0,
                        m == SpinMode::D31 ? testing::uniform(rng, -5, 5) : 0.0}};
    const FourVector n = f.normal(x);
    EXPECT_NEAR(minkowski_square(n), 1.0, 1e-12);
    EXPECT_GT(n[0], 0.0);
  }
}

TEST(Normal, NonTimelikeGradientThrows) {
  const Foliation g = Foliation::graph_leaf(TanhProfile{1.2, 1.0}, SpinMode::D11, box1(-3, 3));
  EXPECT_THROW(g.normal({{0, 0, 0, 0}}), ValidityBreach);
  EXPECT_THROW(g.area_element(0.0, {0.0, 0, 0}), ValidityBreach);
}

TEST(LeafPoint, Examples) {
  const Foliation flat = Foliation::flat_time(SpinMode::D31);
  EXPECT_EQ(flat.leaf_point(0.0, {1, 2, 3}), (FourVector{{0, 1, 2, 3}}));

  const double eta = 0.7;
  const Foliation cn = Foliation::constant_normal({{std::cosh(eta), std::sinh(eta), 0, 0}}, SpinMode::D31);
  const FourVector n{{std::cosh(eta), std::sinh(eta), 0, 0}};
  for (const ChartPoint xi : {ChartPoint{1, 2, 3}, ChartPoint{-4, 0.5, 0}, ChartPoint{0, 0, 0}}) {
    EXPECT_NEAR(minkowski_dot(n, cn.leaf_point(0.0, xi)), 0.0, 1e-13);
  }
}

TEST(LeafPoint, LabelRoundTripOnRandomFoliations) {
  CounterRng rng(21, 0);
  for (int trial = 0; trial < 300; ++trial) {
    const SpinMode m = testing::random_spin_mode(rng);
    Foliation f = testing::random_curved_foliation(rng, m);
    if (trial % 3 == 0) f = f.relabeled(testing::uniform(rng, 0.2, 3.0), testing::uniform(rng, -2, 2));
    const double s = testing::uniform(rng, -3, 3);
    ChartPoint xi{testing::uniform(rng, -5, 5), testing::uniform(rng, -5, 5), testing::uniform(rng, -5, 5)};
    if (m == SpinMode::D11) xi[1] = xi[2] = 0.0;
    const FourVector x = f.leaf_point(s, xi);
    EXPECT_NEAR(f.label(x), s, 1e-12);
    const ChartPoint back = f.chart_coordinates(x);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(back[i], xi[i], 1e-12);
  }
}

TEST(LeafPoint, ConstantNormalAlongTimeMatchesFlatTime) {
  const Foliation flat = Foliation::flat_time(SpinMode::D31);
  const Foliation cn = Foliation::constant_normal({{1, 0, 0, 0}}, SpinMode::D31);
  CounterRng rng(22, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const FourVector x{{testing::uniform(rng, -3, 3), testing::uniform(rng, -3, 3), testing::uniform(rng, -3, 3),
                        testing::uniform(rng, -3, 3)}};
    const double s = x[0];
    const ChartPoint xi{x[1], x[2], x[3]};
    EXPECT_NEAR(cn.label(x), flat.label(x), 1e-15);
    for (int mu = 0; mu < 4; ++mu) {
      EXPECT_NEAR(cn.normal(x)[mu], flat.normal(x)[mu], 1e-15);
      EXPECT_NEAR(cn.leaf_point(s, xi)[mu], flat.leaf_point(s, xi)[mu], 1e-15);
    }
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(cn.chart_coordinates(x)[i], flat.chart_coordinates(x)[i], 1e-15);
  }
}

TEST(AreaElement, Examples) {
  EXPECT_EQ(Foliation::flat_time(SpinMode::D11).area_element(0.3, {1, 0, 0}), 1.0);
  const Foliation flat_graph = Foliation::graph_leaf(SinGaussProfile{0.3, 1.0, 2.0}, SpinMode::D11, box1(-3, 3));
  // h' vanishes where b x = pi/2 only approximately; use the far tail instead.
  EXPECT_NEAR(flat_graph.area_element(0.0, {40.0, 0, 0}), 1.0, 1e-15);
}

TEST(Relabel, SameLeavesNewLabels) {
  const Foliation g = Foliation::graph_leaf(TanhProfile{0.5, 1.0}, SpinMode::D11, box1(-3, 3));
  const Foliation r = g.relabeled(2.0, 1.0);
  const FourVector x{{0.7, 0.4, 0, 0}};
  EXPECT_NEAR(r.label(x), 2.0 * g.label(x) + 1.0, 1e-15);
  for (int mu = 0; mu < 4; ++mu) EXPECT_NEAR(r.normal(x)[mu], g.normal(x)[mu], 1e-15);
  const FourVector p = g.leaf_point(0.3, {1.1, 0, 0});
  const FourVector q = r.leaf_point(2.0 * 0.3 + 1.0, {1.1, 0, 0});
  for (int mu = 0; mu < 4; ++mu) EXPECT_NEAR(p[mu], q[mu], 1e-15);
  EXPECT_THROW(g.relabeled(0.0, 1.0), InvalidArgument);
  EXPECT_THROW(g.relabeled(-1.0, 1.0), InvalidArgument);
}

TEST(ValidityScan, Examples) {
  EXPECT_EQ(Foliation::flat_time(SpinMode::D11, box1(-3, 3)).validity_scan(11).min_margin, 1.0);

  const Foliation half = Foliation::graph_leaf(TanhProfile{0.25, 2.0}, SpinMode::D11, box1(-3, 3));
  const ValidityReport r = half.validity_scan(101);
  EXPECT_TRUE(r.passed);
  EXPECT_NEAR(r.min_margin, 0.75, 1e-15);
  EXPECT_NEAR(r.worst_point[0], 0.0, 1e-15);

  const Foliation steep = Foliation::graph_leaf(TanhProfile{1.2, 1.0}, SpinMode::D11, box1(-3, 3));
  EXPECT_FALSE(steep.validity_scan(101).passed);
  EXPECT_THROW(half.validity_scan(0), InvalidArgument);
}

TEST(Periodic, WrapAndBoxRules) {
  ValidityBox b = box1(0, 8);
  b.period = 8.0;
  const Foliation f =
      Foliation::graph_leaf(SinGaussProfile{0.5, 2.0 * std::numbers::pi * 2.0 / 8.0}, SpinMode::D11, b);
  EXPECT_NEAR(f.wrap({9.5, 0, 0})[0], 1.5, 1e-15);
  EXPECT_NEAR(f.wrap({-0.5, 0, 0})[0], 7.5, 1e-15);
  EXPECT_EQ(f.wrap({8.0, 0, 0})[0], 0.0);
  EXPECT_TRUE(f.in_validity_region({100.0, 0, 0}));

  // Non-commensurate wavenumber, envelope, and tilt are rejected.
  EXPECT_THROW(Foliation::graph_leaf(SinGaussProfile{0.5, 1.0}, SpinMode::D11, b), InvalidArgument);
  EXPECT_THROW(Foliation::graph_leaf(SinGaussProfile{0.5, 2.0 * std::numbers::pi / 8.0, 3.0}, SpinMode::D11, b),
               InvalidArgument);
  EXPECT_THROW(Foliation::constant_normal({{1.2, 0.5, 0, 0}}, SpinMode::D11, b), InvalidArgument);
  ValidityBox wrong = box1(0, 7);
  wrong.period = 8.0;
  EXPECT_THROW(Foliation::flat_time(SpinMode::D11, wrong), InvalidArgument);
}

TEST(ValidityRegion, BoxMembership) {
  const Foliation f = Foliation::flat_time(SpinMode::D11, box1(-1, 1));
  EXPECT_TRUE(f.in_validity_region({0.5, 0, 0}));
  EXPECT_FALSE(f.in_validity_region({1.5, 0, 0}));
  // Unused axes in D11 are ignored.
  EXPECT_TRUE(f.in_validity_region({0.5, 10, 10}));
}

TEST(ConstantNormal, RejectsBadNormals) {
  EXPECT_THROW(Foliation::constant_normal({{0.5, 1.0, 0, 0}}, SpinMode::D31), InvalidArgument);
  EXPECT_THROW(Foliation::constant_normal({{-1.0, 0, 0, 0}}, SpinMode::D31), InvalidArgument);
  EXPECT_THROW(Foliation::constant_normal({{2.0, 0, 1.0, 0}}, SpinMode::D11), InvalidArgument);
}

TEST(Frobenius, ConstantFieldIsZero) {
  const CovectorField v = [](const FourVector&) { return FourVector{{1.0, 0.3, -0.2, 0.7}}; };
  EXPECT_EQ(frobenius_residual(v, {{0.1, 0.2, 0.3, 0.4}}, 1e-3), 0.0);
}

TEST(Frobenius, TwistedFieldMatchesSymbolicValue) {
  // V = (1, 0, c x3, 0): dV has only d_3 V_2 = c, so (V ^ dV)_{023} = V_0 (d_2 V_3 - d_3 V_2) = -c.
  for (double c : {0.5, -1.3, 2.0}) {
    for (double h : {1e-2, 1e-3}) {
      EXPECT_NEAR(frobenius_residual(twisted_field(c), {{0.3, -1.0, 2.0, 0.7}}, h), std::abs(c), 1e-9);
    }
  }
}

TEST(Frobenius, GradientFieldsAreIntegrable) {
  CounterRng rng(23, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const SpinMode m = testing::random_spin_mode(rng);
    const Foliation f = testing::random_curved_foliation(rng, m);
    const FourVector x{{testing::uniform(rng, -2, 2), testing::uniform(rng, -4, 4), testing::uniform(rng, -4, 4),
                        testing::uniform(rng, -4, 4)}};
    EXPECT_LT(frobenius_residual(gradient_covector_field(f), x, 1e-3), 1e-8);
  }
  EXPECT_THROW(frobenius_residual(twisted_field(1.0), {}, 0.0), InvalidArgument);
}

TEST(Profiles, SlopeMatchesFiniteDifference) {
  const std::vector<HeightProfile> profiles{TanhProfile{0.4, 1.7}, SinGaussProfile{0.3, 1.1, 2.5},
                                            SinGaussProfile{0.2, 0.9}};
  const double h = 1e-5;
  for (const auto& p : profiles) {
    for (double x : {-2.0, -0.3, 0.0, 0.8, 3.1}) {
      const double fd = (profile_height(p, x + h) - profile_height(p, x - h)) / (2.0 * h);
      EXPECT_NEAR(profile_slope(p, x), fd, 1e-9);
    }
  }
}

}  // namespace
}  // namespace hbd
