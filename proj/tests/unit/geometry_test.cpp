#include <gtest/gtest.h>

#include <unsupported/Eigen/KroneckerProduct>

#include "../support/random_states.hpp"
#include "hbd/errors.hpp"
#include "hbd/geometry.hpp"

namespace hbd {
namespace {

const Complex I{0.0, 1.0};

CMatrix dense(std::initializer_list<std::initializer_list<Complex>> rows) {
  CMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (const auto& v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

CVector random_vector(CounterRng& rng, Eigen::Index n) {
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = {rng.uniform() - 0.5, rng.uniform() - 0.5};
  return v;
}

TEST(MinkowskiDot, ExamplesByExpansion) {
  EXPECT_EQ(minkowski_dot({{1, 0, 0, 0}}, {{1, 0, 0, 0}}), 1.0);
  EXPECT_EQ(minkowski_dot({{1, 0, 0, 0}}, {{0, 1, 0, 0}}), 0.0);
  EXPECT_EQ(minkowski_dot({{2, 1, 0, 0}}, {{3, 1, 0, 0}}), 5.0);
  EXPECT_EQ(minkowski_square({{2, 1, 1, 1}}), 1.0);
}

TEST(Gamma, D31MatchesDiracTable) {
  const CMatrix g0 = dense({{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, -1, 0}, {0, 0, 0, -1}});
  const CMatrix g1 = dense({{0, 0, 0, 1}, {0, 0, 1, 0}, {0, -1, 0, 0}, {-1, 0, 0, 0}});
  const CMatrix g2 = dense({{0, 0, 0, -I}, {0, 0, I, 0}, {0, I, 0, 0}, {-I, 0, 0, 0}});
  const CMatrix g3 = dense({{0, 0, 1, 0}, {0, 0, 0, -1}, {-1, 0, 0, 0}, {0, 1, 0, 0}});
  EXPECT_EQ(gamma(0, SpinMode::D31).matrix, g0);
  EXPECT_EQ(gamma(1, SpinMode::D31).matrix, g1);
  EXPECT_EQ(gamma(2, SpinMode::D31).matrix, g2);
  EXPECT_EQ(gamma(3, SpinMode::D31).matrix, g3);
}

TEST(Gamma, D11MatchesTable) {
  EXPECT_EQ(gamma(0, SpinMode::D11).matrix, dense({{1, 0}, {0, -1}}));
  EXPECT_EQ(gamma(1, SpinMode::D11).matrix, dense({{0, I}, {I, 0}}));
}

TEST(Gamma, InvalidIndexThrows) {
  EXPECT_THROW(gamma(2, SpinMode::D11), InvalidArgument);
  EXPECT_THROW(gamma(4, SpinMode::D31), InvalidArgument);
  EXPECT_THROW(gamma(-1, SpinMode::D31), InvalidArgument);
}

TEST(Gamma, CliffordExamples) {
  for (SpinMode m : {SpinMode::D31, SpinMode::D11}) {
    const CMatrix g0 = gamma(0, m).matrix, g1 = gamma(1, m).matrix;
    const auto d = static_cast<Eigen::Index>(spinor_dim(m));
    EXPECT_EQ(max_abs(g0 * g1 + g1 * g0), 0.0);
    EXPECT_EQ(g0 * g0, CMatrix::Identity(d, d));
    EXPECT_EQ(g1 * g1, CMatrix(-CMatrix::Identity(d, d)));
  }
}

TEST(Gamma, FullCliffordAndHermiticity) {
  for (SpinMode m : {SpinMode::D31, SpinMode::D11}) {
    const auto d = static_cast<Eigen::Index>(spinor_dim(m));
    for (int mu = 0; mu < spacetime_dims(m); ++mu) {
      for (int nu = 0; nu < spacetime_dims(m); ++nu) {
        const CMatrix a = gamma(mu, m).matrix, b = gamma(nu, m).matrix;
        const double eta = mu != nu ? 0.0 : (mu == 0 ? 1.0 : -1.0);
        EXPECT_LT(max_abs(a * b + b * a - 2.0 * eta * CMatrix::Identity(d, d)), 1e-12);
      }
      const CMatrix g = gamma(mu, m).matrix;
      EXPECT_EQ(g.adjoint(), mu == 0 ? g : CMatrix(-g));
    }
  }
}

TEST(Lift, SingleParticleIsIdentityLift) {
  const SpinOperator g1 = gamma(1, SpinMode::D31);
  EXPECT_EQ(lift_to_particle(g1, 0, 1).matrix, g1.matrix);
}

TEST(Lift, MatchesEigenKronecker) {
  for (SpinMode m : {SpinMode::D31, SpinMode::D11}) {
    const auto d = static_cast<Eigen::Index>(spinor_dim(m));
    const CMatrix id = CMatrix::Identity(d, d);
    const CMatrix op = gamma(1, m).matrix;
    for (int n = 1; n <= 3; ++n) {
      for (int k = 0; k < n; ++k) {
        CMatrix expected = k == 0 ? op : id;
        for (int slot = 1; slot < n; ++slot) {
          const CMatrix next = Eigen::kroneckerProduct(expected, slot == k ? op : id).eval();
          expected = next;
        }
        EXPECT_EQ(lift_to_particle(gamma(1, m), k, n).matrix, expected) << "n=" << n << " k=" << k;
      }
    }
  }
}

TEST(Lift, HandExpansionD11) {
  // e_0 (x) e_1 in the 2x2 space is entry 1; gamma^0 e_1 = -e_1.
  CVector e(4);
  e << 0, 1, 0, 0;
  const CVector out = lift_to_particle(gamma(0, SpinMode::D11), 1, 2).matrix * e;
  CVector expected(4);
  expected << 0, -1, 0, 0;
  EXPECT_EQ(out, expected);
}

TEST(Lift, DistinctSlotsCommute) {
  for (SpinMode m : {SpinMode::D31, SpinMode::D11}) {
    for (int mu = 0; mu < spacetime_dims(m); ++mu) {
      for (int nu = 0; nu < spacetime_dims(m); ++nu) {
        const CMatrix a = lift_to_particle(gamma(mu, m), 0, 2).matrix;
        const CMatrix b = lift_to_particle(gamma(nu, m), 1, 2).matrix;
        EXPECT_LT(max_abs(a * b - b * a), 1e-12);
      }
    }
  }
}

TEST(Lift, OutOfRangeThrows) {
  EXPECT_THROW(lift_to_particle(gamma(0, SpinMode::D11), 2, 2), InvalidArgument);
  EXPECT_THROW(lift_to_particle(gamma(0, SpinMode::D11), -1, 2), InvalidArgument);
}

TEST(ApplyOnParticle, AgreesWithDenseLiftBitwise) {
  CounterRng rng(1, 0);
  for (SpinMode m : {SpinMode::D31, SpinMode::D11}) {
    for (int n = 1; n <= 3; ++n) {
      const CVector psi = random_vector(rng, static_cast<Eigen::Index>(spin_space_dim(m, n)));
      for (int k = 0; k < n; ++k) {
        const CMatrix op = slash_single({{1.3, 0.2, -0.4, 0.1}}, standard_gammas(m));
        const CVector dense_out = lift_to_particle(SpinOperator(op, 1, m), k, n).matrix * psi;
        const CVector free_out = apply_on_particle(op, k, n, psi);
        EXPECT_LT((dense_out - free_out).cwiseAbs().maxCoeff(), 1e-15);
      }
    }
  }
}

TEST(Slash, Examples) {
  EXPECT_EQ(slash({{1, 0, 0, 0}}, 0, 1, SpinMode::D31).matrix, gamma(0, SpinMode::D31).matrix);
  // Lowering the index: (0,1,0,0) contracts to -gamma^1.
  EXPECT_EQ(slash({{0, 1, 0, 0}}, 0, 1, SpinMode::D31).matrix, CMatrix(-gamma(1, SpinMode::D31).matrix));
  const FourVector v{{1.7, 0.3, -0.8, 0.5}};
  const CMatrix s = slash(v, 0, 1, SpinMode::D31).matrix;
  EXPECT_LT(max_abs(s * s - minkowski_square(v) * CMatrix::Identity(4, 4)), 1e-12);
}

TEST(DiracAdjoint, Examples) {
  const MultiSpinor rest(CVector::Unit(4, 0), 1, SpinMode::D31);
  EXPECT_EQ(dirac_adjoint(rest), CRowVector::Unit(4, 0));
  EXPECT_EQ(dirac_adjoint(MultiSpinor::zero(2, SpinMode::D11)), CRowVector::Zero(4));

  CounterRng rng(2, 0);
  for (int n = 1; n <= 3; ++n) {
    const MultiSpinor psi(random_vector(rng, static_cast<Eigen::Index>(spin_space_dim(SpinMode::D31, n))), n,
                          SpinMode::D31);
    CMatrix gamma0_all = CMatrix::Identity(psi.entries.size(), psi.entries.size());
    for (int k = 0; k < n; ++k) gamma0_all = gamma0_all * lift_to_particle(gamma(0, SpinMode::D31), k, n).matrix;
    const Complex bilinear = (dirac_adjoint(psi) * gamma0_all * psi.entries)(0);
    EXPECT_NEAR(bilinear.real(), psi.norm_squared(), 1e-12);
    EXPECT_NEAR(bilinear.imag(), 0.0, 1e-12);
  }
}

TEST(Positivity, Gamma0SlashProductIsPositiveSemidefinite) {
  CounterRng rng(3, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const SpinMode m = trial % 2 == 0 ? SpinMode::D31 : SpinMode::D11;
    const int n = 1 + trial % 3;
    const auto dim = static_cast<Eigen::Index>(spin_space_dim(m, n));
    CMatrix op = CMatrix::Identity(dim, dim);
    for (int k = 0; k < n; ++k) {
      // Random future unit timelike normal.
      FourVector u{{0.0, testing::uniform(rng, -0.9, 0.9), 0.0, 0.0}};
      if (m == SpinMode::D31) {
        u[2] = testing::uniform(rng, -0.3, 0.3);
        u[3] = testing::uniform(rng, -0.3, 0.3);
      }
      u[0] = 1.0;
      const FourVector nrm = (1.0 / std::sqrt(minkowski_square(u))) * u;
      const CMatrix single = gamma(0, m).matrix * slash_single(nrm, standard_gammas(m));
      op = op * lift_to_particle(SpinOperator(single, 1, m), k, n).matrix;
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(op);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10);
  }
}

TEST(MultiSpinor, LengthIsValidated) {
  EXPECT_THROW(MultiSpinor(CVector::Zero(3), 1, SpinMode::D31), InvalidArgument);
  EXPECT_NO_THROW(MultiSpinor(CVector::Zero(16), 2, SpinMode::D31));
  EXPECT_EQ(spin_space_dim(SpinMode::D11, 3), 8u);
  EXPECT_EQ(spin_space_dim(SpinMode::D31, 2), 16u);
}

TEST(SpinOperator, ProductAndApplication) {
  const SpinOperator a = lift_to_particle(gamma(0, SpinMode::D11), 0, 2);
  const SpinOperator b = lift_to_particle(gamma(1, SpinMode::D11), 1, 2);
  EXPECT_EQ((a * b).matrix, a.matrix * b.matrix);
  const MultiSpinor psi(CVector::Unit(4, 2), 2, SpinMode::D11);
  EXPECT_EQ((a * psi).entries, a.matrix * psi.entries);
  EXPECT_EQ(SpinOperator::identity(2, SpinMode::D31).matrix, CMatrix::Identity(16, 16));
}

}  // namespace
}  // namespace hbd
