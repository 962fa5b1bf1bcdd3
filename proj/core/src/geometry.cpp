#include "hbd/geometry.hpp"

#include <string>

#include "hbd/errors.hpp"

namespace hbd {

namespace {

constexpr Complex I{0.0, 1.0};

void check_mu(int mu, SpinMode mode) {
  if (mu < 0 || mu >= spacetime_dims(mode)) {
    throw InvalidArgument("gamma index " + std::to_string(mu) + " out of range for " +
                          (mode == SpinMode::D31 ? "D31" : "D11"));
  }
}

}  // namespace

std::size_t spin_space_dim(SpinMode mode, int particles) {
  std::size_t dim = 1;
  for (int k = 0; k < particles; ++k) dim *= static_cast<std::size_t>(spinor_dim(mode));
  return dim;
}

MultiSpinor::MultiSpinor(CVector v, int n, SpinMode m) : entries(std::move(v)), particles(n), mode(m) {
  if (n < 1 || static_cast<std::size_t>(entries.size()) != spin_space_dim(m, n)) {
    throw InvalidArgument("MultiSpinor length does not match (spinor dim)^N");
  }
}

MultiSpinor MultiSpinor::zero(int n, SpinMode m) {
  return MultiSpinor(CVector::Zero(static_cast<Eigen::Index>(spin_space_dim(m, n))), n, m);
}

SpinOperator::SpinOperator(CMatrix m, int n, SpinMode md) : matrix(std::move(m)), particles(n), mode(md) {
  const auto dim = static_cast<Eigen::Index>(spin_space_dim(md, n));
  if (n < 1 || matrix.rows() != dim || matrix.cols() != dim) {
    throw InvalidArgument("SpinOperator dimension does not match spin space");
  }
}

SpinOperator SpinOperator::identity(int n, SpinMode m) {
  const auto dim = static_cast<Eigen::Index>(spin_space_dim(m, n));
  return SpinOperator(CMatrix::Identity(dim, dim), n, m);
}

SpinOperator SpinOperator::operator*(const SpinOperator& other) const {
  if (other.particles != particles || other.mode != mode) {
    throw InvalidArgument("SpinOperator product across different spin spaces");
  }
  return SpinOperator(matrix * other.matrix, particles, mode);
}

MultiSpinor SpinOperator::operator*(const MultiSpinor& psi) const {
  if (psi.particles != particles || psi.mode != mode) {
    throw InvalidArgument("SpinOperator applied to spinor of a different spin space");
  }
  return MultiSpinor(matrix * psi.entries, particles, mode);
}

GammaSet GammaSet::standard(SpinMode mode) {
  GammaSet set;
  set.mode = mode;
  if (mode == SpinMode::D31) {
    for (auto& m : set.g) m = CMatrix::Zero(4, 4);
    set.g[0].diagonal() << 1.0, 1.0, -1.0, -1.0;

    CMatrix sx(2, 2), sy(2, 2), sz(2, 2);
    sx << 0.0, 1.0, 1.0, 0.0;
    sy << 0.0, -I, I, 0.0;
    sz << 1.0, 0.0, 0.0, -1.0;
    const std::array<CMatrix, 3> pauli{sx, sy, sz};
    for (std::size_t i = 0; i < 3; ++i) {
      set.g[i + 1].block(0, 2, 2, 2) = pauli[i];
      set.g[i + 1].block(2, 0, 2, 2) = -pauli[i];
    }
  } else {
    for (auto& m : set.g) m = CMatrix::Zero(2, 2);
    set.g[0] << 1.0, 0.0, 0.0, -1.0;
    set.g[1] << 0.0, I, I, 0.0;
  }
  return set;
}

const GammaSet& standard_gammas(SpinMode mode) {
  static const GammaSet d31 = GammaSet::standard(SpinMode::D31);
  static const GammaSet d11 = GammaSet::standard(SpinMode::D11);
  return mode == SpinMode::D31 ? d31 : d11;
}

SpinOperator gamma(int mu, SpinMode mode) {
  check_mu(mu, mode);
  return SpinOperator(standard_gammas(mode)[mu], 1, mode);
}

SpinOperator lift_to_particle(const SpinOperator& op, int k, int particles) {
  if (op.particles != 1) throw InvalidArgument("lift_to_particle expects a single-particle operator");
  if (k < 0 || k >= particles) {
    throw InvalidArgument("particle index " + std::to_string(k) + " out of range");
  }
  const auto d = static_cast<Eigen::Index>(spinor_dim(op.mode));
  CMatrix result = CMatrix::Identity(1, 1);
  for (int slot = 0; slot < particles; ++slot) {
    const CMatrix factor = slot == k ? op.matrix : CMatrix::Identity(d, d);
    CMatrix next(result.rows() * d, result.cols() * d);
    for (Eigen::Index i = 0; i < result.rows(); ++i) {
      for (Eigen::Index j = 0; j < result.cols(); ++j) {
        next.block(i * d, j * d, d, d) = result(i, j) * factor;
      }
    }
    result = std::move(next);
  }
  return SpinOperator(std::move(result), particles, op.mode);
}

CMatrix slash_single(const FourVector& v, const GammaSet& gammas) {
  CMatrix m = v[0] * gammas[0];
  for (int i = 1; i < spacetime_dims(gammas.mode); ++i) m -= v[static_cast<std::size_t>(i)] * gammas[i];
  return m;
}

SpinOperator slash(const FourVector& v, int k, int particles, SpinMode mode) {
  return lift_to_particle(SpinOperator(slash_single(v, standard_gammas(mode)), 1, mode), k, particles);
}

CRowVector dirac_adjoint(const MultiSpinor& psi) {
  const CMatrix& g0 = standard_gammas(psi.mode)[0];
  CVector v = psi.entries;
  for (int k = 0; k < psi.particles; ++k) v = apply_on_particle(g0, k, psi.particles, v);
  // (Gamma0 psi)^dagger = psi^dagger Gamma0 since Gamma0 is Hermitian.
  return v.adjoint();
}

void apply_on_particle(const CMatrix& op, int k, int particles, std::span<const Complex> in,
                       std::span<Complex> out) {
  const auto d = static_cast<std::size_t>(op.rows());
  // Index layout: i = outer * (d * inner_size) + a * inner_size + inner.
  std::size_t inner = 1;
  for (int slot = k + 1; slot < particles; ++slot) inner *= d;
  const std::size_t outer = in.size() / (d * inner);
  for (std::size_t o = 0; o < outer; ++o) {
    const std::size_t base = o * d * inner;
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t r = 0; r < inner; ++r) {
        Complex acc{0.0, 0.0};
        for (std::size_t b = 0; b < d; ++b) {
          acc += op(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) * in[base + b * inner + r];
        }
        out[base + a * inner + r] = acc;
      }
    }
  }
}

CVector apply_on_particle(const CMatrix& op, int k, int particles, const CVector& in) {
  CVector out(in.size());
  apply_on_particle(op, k, particles, std::span<const Complex>(in.data(), static_cast<std::size_t>(in.size())),
                    std::span<Complex>(out.data(), static_cast<std::size_t>(out.size())));
  return out;
}

}  // namespace hbd
