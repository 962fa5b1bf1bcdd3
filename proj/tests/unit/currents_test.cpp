#include <gtest/gtest.h>

#include <cmath>
#include <unsupported/Eigen/KroneckerProduct>

#include "../support/random_states.hpp"
#include "hbd/currents.hpp"
#include "hbd/errors.hpp"

namespace hbd {
namespace {

std::vector<FourVector> random_points(CounterRng& rng, int n) {
  std::vector<FourVector> x;
  for (int k = 0; k < n; ++k) {
    x.push_back({{testing::uniform(rng, -2, 2), testing::uniform(rng, -3, 3), testing::uniform(rng, -3, 3),
                  testing::uniform(rng, -3, 3)}});
  }
  return x;
}

FourVector random_normal(CounterRng& rng, SpinMode m) {
  FourVector u{{1.0, testing::uniform(rng, -0.8, 0.8), 0.0, 0.0}};
  if (m == SpinMode::D31) {
    u[2] = testing::uniform(rng, -0.3, 0.3);
    u[3] = testing::uniform(rng, -0.3, 0.3);
  }
  return (1.0 / std::sqrt(minkowski_square(u))) * u;
}

// Dense oracle: psi-bar [prod_{l != k} g_l.n_l] g_k^mu psi with explicit lifted matrices.
FourVector dense_current(const MultiSpinor& psi, int k, std::span<const FourVector> normals) {
  const int n = psi.particles;
  CMatrix left = CMatrix::Identity(psi.entries.size(), psi.entries.size());
  for (int l = 0; l < n; ++l) {
    if (l != k) left = left * slash(normals[static_cast<std::size_t>(l)], l, n, psi.mode).matrix;
  }
  const CRowVector bar = dirac_adjoint(psi);
  FourVector j;
  for (int mu = 0; mu < spacetime_dims(psi.mode); ++mu) {
    const CMatrix g = lift_to_particle(gamma(mu, psi.mode), k, n).matrix;
    j[static_cast<std::size_t>(mu)] = (bar * left * g * psi.entries)(0).real();
  }
  return j;
}

double dense_density(const MultiSpinor& psi, std::span<const FourVector> normals) {
  CMatrix op = CMatrix::Identity(psi.entries.size(), psi.entries.size());
  for (int l = 0; l < psi.particles; ++l) {
    op = op * slash(normals[static_cast<std::size_t>(l)], l, psi.particles, psi.mode).matrix;
  }
  return (dirac_adjoint(psi) * op * psi.entries)(0).real();
}

TEST(Currents, RestModeGivesUnitTimeCurrent) {
  for (SpinMode m : {SpinMode::D31, SpinMode::D11}) {
    const auto mode = make_mode({0, 0, 0}, 1.0, EnergySign::Positive, 0, m);
    const NParticleWavefunction psi(1, 1.0, m, {WaveTerm{{1, 0}, {mode}}});
    const std::vector<FourVector> x{FourVector{{0.4, 1.0, -2.0, 0.3}}};
    const std::vector<FourVector> n{FourVector{{1, 0, 0, 0}}};
    const FourVector j = current_jk(psi, 0, x, n);
    EXPECT_NEAR(j[0], 1.0, 1e-14);
    for (int i = 1; i < 4; ++i) EXPECT_NEAR(j[i], 0.0, 1e-14);
  }
}

TEST(Currents, MatrixFreeMatchesDenseOracle) {
  CounterRng rng(30, 0);
  for (int trial = 0; trial < 60; ++trial) {
    const SpinMode m = trial % 2 == 0 ? SpinMode::D31 : SpinMode::D11;
    const int n = 1 + trial % 3;
    const NParticleWavefunction psi = testing::random_entangled(rng, n, m);
    const auto x = random_points(rng, n);
    std::vector<FourVector> normals;
    for (int k = 0; k < n; ++k) normals.push_back(random_normal(rng, m));
    const MultiSpinor value = psi.evaluate(x);
    const CurrentEvaluation cur = evaluate_currents(psi, x, normals);
    const double tol = 1e-13 * (1.0 + cur.scale);
    for (int k = 0; k < n; ++k) {
      const FourVector expected = dense_current(value, k, normals);
      for (int mu = 0; mu < 4; ++mu) EXPECT_NEAR(cur.currents[static_cast<std::size_t>(k)][mu], expected[mu], tol);
    }
    EXPECT_NEAR(cur.density, dense_density(value, normals), tol);
    EXPECT_NEAR(density_rho(psi, x, normals), cur.density, tol);
  }
}

TEST(Currents, ProductStateFactorizes) {
  CounterRng rng(31, 0);
  for (SpinMode m : {SpinMode::D31, SpinMode::D11}) {
    const auto a = testing::random_mode(rng, 1.0, m), b = testing::random_mode(rng, 1.0, m);
    const NParticleWavefunction psi(2, 1.0, m, {WaveTerm{{0.6, 0.2}, {a, b}}});
    const auto x = random_points(rng, 2);
    const std::vector<FourVector> flat(2, FourVector{{1, 0, 0, 0}});
    const CVector psi1 = Complex{0.6, 0.2} * a.value_at(x[0]);
    const CVector psi2 = b.value_at(x[1]);
    const FourVector j1 = current_jk(psi, 0, x, flat);
    const CRowVector bar1 = psi1.adjoint() * gamma(0, m).matrix;
    for (int mu = 0; mu < spacetime_dims(m); ++mu) {
      const double expected = (bar1 * gamma(mu, m).matrix * psi1)(0).real() * psi2.squaredNorm();
      EXPECT_NEAR(j1[static_cast<std::size_t>(mu)], expected, 1e-13);
    }
  }
}

TEST(Currents, FlatNormalsReduceToFlatFrameCurrent) {
  CounterRng rng(32, 0);
  for (int trial = 0; trial < 40; ++trial) {
    const SpinMode m = trial % 2 == 0 ? SpinMode::D31 : SpinMode::D11;
    const int n = 1 + trial % 3;
    const NParticleWavefunction psi = testing::random_entangled(rng, n, m);
    const auto x = random_points(rng, n);
    const std::vector<FourVector> flat(static_cast<std::size_t>(n), FourVector{{1, 0, 0, 0}});
    const MultiSpinor v = psi.evaluate(x);
    const CurrentEvaluation cur = evaluate_currents(psi, x, flat);
    EXPECT_NEAR(cur.density, v.norm_squared(), 1e-12 * (1.0 + v.norm_squared()));
    for (int k = 0; k < n; ++k) {
      const auto& j = cur.currents[static_cast<std::size_t>(k)];
      EXPECT_NEAR(j[0], v.norm_squared(), 1e-12 * (1.0 + v.norm_squared()));
      for (int i = 1; i < spacetime_dims(m); ++i) {
        const CMatrix alpha = gamma(0, m).matrix * gamma(i, m).matrix;
        const CMatrix lifted = lift_to_particle(SpinOperator(alpha, 1, m), k, n).matrix;
        const double expected = (v.entries.adjoint() * lifted * v.entries)(0).real();
        EXPECT_NEAR(j[static_cast<std::size_t>(i)], expected, 1e-12 * (1.0 + v.norm_squared()));
      }
    }
  }
}

TEST(Currents, KIndependenceOnCurvedNormals) {
  CounterRng rng(33, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const SpinMode m = testing::random_spin_mode(rng);
    const int n = 2 + trial % 2;
    const NParticleWavefunction psi = testing::random_entangled(rng, n, m);
    const Foliation f = testing::random_curved_foliation(rng, m);
    const auto x = random_points(rng, n);
    std::vector<FourVector> normals;
    for (const auto& p : x) normals.push_back(f.normal(p));
    const CurrentEvaluation cur = evaluate_currents(psi, x, normals);
    for (int k = 0; k < n; ++k) {
      const double jn = minkowski_dot(cur.currents[static_cast<std::size_t>(k)], normals[static_cast<std::size_t>(k)]);
      EXPECT_NEAR(jn, cur.density, 1e-10 * cur.scale);
    }
  }
}

TEST(Currents, PositivityAndCausality) {
  CounterRng rng(34, 0);
  for (int trial = 0; trial < 300; ++trial) {
    const SpinMode m = testing::random_spin_mode(rng);
    const int n = 1 + trial % 3;
    const NParticleWavefunction psi = testing::random_entangled(rng, n, m);
    const auto x = random_points(rng, n);
    std::vector<FourVector> normals;
    for (int k = 0; k < n; ++k) normals.push_back(random_normal(rng, m));
    const CurrentEvaluation cur = evaluate_currents(psi, x, normals);
    EXPECT_GE(cur.density, -1e-12 * cur.scale);
    if (cur.density > 1e-8 * cur.scale) {
      for (const auto& j : cur.currents) {
        EXPECT_GT(j[0], 0.0);
        EXPECT_GE(minkowski_square(j), -1e-10 * cur.scale * cur.scale);
      }
    }
  }
}

TEST(Currents, ZeroWavefunction) {
  const auto a = make_mode({0.3, 0, 0}, 1.0, EnergySign::Positive, 0, SpinMode::D11);
  const NParticleWavefunction psi(2, 1.0, SpinMode::D11, {WaveTerm{{0, 0}, {a, a}}});
  const std::vector<FourVector> x(2), n(2, FourVector{{1, 0, 0, 0}});
  EXPECT_EQ(density_rho(psi, x, n), 0.0);
  EXPECT_EQ(divergence_residual(psi, 1, x, n, 1e-3), 0.0);
}

TEST(Currents, TupleLengthsValidated) {
  const auto a = make_mode({0.3, 0, 0}, 1.0, EnergySign::Positive, 0, SpinMode::D11);
  const NParticleWavefunction psi(2, 1.0, SpinMode::D11, {WaveTerm{{1, 0}, {a, a}}});
  const std::vector<FourVector> x(2), n1(1, FourVector{{1, 0, 0, 0}});
  EXPECT_THROW(density_rho(psi, x, n1), InvalidArgument);
  const std::vector<FourVector> n2(2, FourVector{{1, 0, 0, 0}});
  EXPECT_THROW(current_jk(psi, 2, x, n2), InvalidArgument);
}

TEST(Divergence, SinglePlaneWaveVanishes) {
  CounterRng rng(35, 0);
  for (SpinMode m : {SpinMode::D31, SpinMode::D11}) {
    const auto mode = testing::random_mode(rng, 1.0, m);
    const NParticleWavefunction psi(1, 1.0, m, {WaveTerm{{1, 0}, {mode}}});
    const auto x = random_points(rng, 1);
    const std::vector<FourVector> n{random_normal(rng, m)};
    EXPECT_LT(divergence_residual(psi, 0, x, n, 1e-3), 1e-8);
  }
}

TEST(Divergence, RichardsonRatioNearFour) {
  CounterRng rng(36, 0);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const SpinMode m = testing::random_spin_mode(rng);
    const int n = 1 + trial % 3;
    const NParticleWavefunction psi = testing::random_entangled(rng, n, m);
    const auto x = random_points(rng, n);
    std::vector<FourVector> normals;
    for (int k = 0; k < n; ++k) normals.push_back(random_normal(rng, m));
    const double r1 = divergence_residual(psi, trial % n, x, normals, 0.05);
    const double r2 = divergence_residual(psi, trial % n, x, normals, 0.025);
    if (r1 < 1e-11) continue;
    ++checked;
    EXPECT_NEAR(r1 / r2, 4.0, 0.8) << "trial " << trial;
  }
  EXPECT_GT(checked, 20);
}

}  // namespace
}  // namespace hbd
