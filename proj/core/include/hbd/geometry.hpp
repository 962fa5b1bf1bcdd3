#pragma once

// Minkowski four-vectors and the Dirac gamma-matrix algebra on N-particle
// spin space. Natural units, metric signature (+,-,-,-).

#include <array>
#include <complex>
#include <cstddef>
#include <span>

#include <Eigen/Dense>

namespace hbd {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using CRowVector = Eigen::RowVectorXcd;

// D31: 3+1 dimensions with 4-component spinors.
// D11: 1+1 dimensions with 2-component spinors; components 2 and 3 of every
// four-vector stay zero.
enum class SpinMode { D31, D11 };

constexpr int spinor_dim(SpinMode mode) noexcept { return mode == SpinMode::D31 ? 4 : 2; }
constexpr int spatial_dims(SpinMode mode) noexcept { return mode == SpinMode::D31 ? 3 : 1; }
constexpr int spacetime_dims(SpinMode mode) noexcept { return spatial_dims(mode) + 1; }

// (spinor dim)^N
std::size_t spin_space_dim(SpinMode mode, int particles);

struct FourVector {
  std::array<double, 4> c{};

  constexpr double& operator[](std::size_t mu) { return c[mu]; }
  constexpr double operator[](std::size_t mu) const { return c[mu]; }

  friend constexpr FourVector operator+(FourVector a, const FourVector& b) {
    for (std::size_t i = 0; i < 4; ++i) a.c[i] += b.c[i];
    return a;
  }
  friend constexpr FourVector operator-(FourVector a, const FourVector& b) {
    for (std::size_t i = 0; i < 4; ++i) a.c[i] -= b.c[i];
    return a;
  }
  friend constexpr FourVector operator*(double k, FourVector a) {
    for (auto& x : a.c) x *= k;
    return a;
  }
  friend constexpr FourVector operator*(FourVector a, double k) { return k * a; }
  friend constexpr bool operator==(const FourVector&, const FourVector&) = default;
};

constexpr double minkowski_dot(const FourVector& a, const FourVector& b) noexcept {
  return a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3];
}

// Minkowski norm squared, a.a
constexpr double minkowski_square(const FourVector& a) noexcept { return minkowski_dot(a, a); }

// A vector in the N-particle spin space. Particle 0 is the most significant
// Kronecker factor.
struct MultiSpinor {
  CVector entries;
  int particles = 1;
  SpinMode mode = SpinMode::D31;

  MultiSpinor() = default;
  MultiSpinor(CVector v, int n, SpinMode m);
  static MultiSpinor zero(int n, SpinMode m);

  double norm_squared() const { return entries.squaredNorm(); }
};

// A square operator on the N-particle spin space, stored densely.
struct SpinOperator {
  CMatrix matrix;
  int particles = 1;
  SpinMode mode = SpinMode::D31;

  SpinOperator() = default;
  SpinOperator(CMatrix m, int n, SpinMode md);
  static SpinOperator identity(int n, SpinMode m);

  SpinOperator operator*(const SpinOperator& other) const;
  MultiSpinor operator*(const MultiSpinor& psi) const;
};

// The four single-particle gamma matrices of one representation. In D11 only
// entries 0 and 1 are meaningful; entries 2 and 3 are zero matrices.
//
// Standard representations:
//   D31 Dirac:  g0 = diag(1,1,-1,-1), gi = [[0, sigma_i], [-sigma_i, 0]]
//   D11:        g0 = diag(1,-1),      g1 = [[0, i], [i, 0]]
struct GammaSet {
  SpinMode mode = SpinMode::D31;
  std::array<CMatrix, 4> g;

  static GammaSet standard(SpinMode mode);
  const CMatrix& operator[](int mu) const { return g[static_cast<std::size_t>(mu)]; }
};

// Returns the cached standard representation.
const GammaSet& standard_gammas(SpinMode mode);

// Single-particle gamma^mu. Throws InvalidArgument for mu outside the mode.
SpinOperator gamma(int mu, SpinMode mode);

// I (x) ... (x) op (x) ... (x) I with op in slot k (0-based).
SpinOperator lift_to_particle(const SpinOperator& op, int k, int particles);

// gamma_k . v = v^0 gamma_k^0 - sum_i v^i gamma_k^i
SpinOperator slash(const FourVector& v, int k, int particles, SpinMode mode);

// The single-particle matrix gamma . v (no lifting).
CMatrix slash_single(const FourVector& v, const GammaSet& gammas);

// psi-bar = psi^dagger gamma_1^0 ... gamma_N^0
CRowVector dirac_adjoint(const MultiSpinor& psi);

// Matrix-free application of a single-particle operator to slot k of an
// N-particle spinor. Agrees with lift_to_particle(op, k, N) * psi.
void apply_on_particle(const CMatrix& op, int k, int particles, std::span<const Complex> in,
                       std::span<Complex> out);
CVector apply_on_particle(const CMatrix& op, int k, int particles, const CVector& in);

}  // namespace hbd
