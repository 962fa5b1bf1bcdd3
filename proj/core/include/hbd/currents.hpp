#pragma once

// The currents j_k = psibar (g_1.n_1) ... g_k ... (g_N.n_N) psi and the
// density rho = psibar (g_1.n_1) ... (g_N.n_N) psi.

#include <span>
#include <vector>

#include "hbd/geometry.hpp"
#include "hbd/wavefunction.hpp"

namespace hbd {

struct CurrentEvaluation {
  std::vector<FourVector> currents;  // j_1 ... j_N
  double density = 0.0;              // rho, computed directly
  double scale = 0.0;                // |psi|^2 times the normal magnitudes; reference for tolerances
};

// Currents from a spinor value already evaluated at the point tuple. Throws
// InternalConsistencyError when a bilinear has an imaginary part above
// 1e-10 * scale.
CurrentEvaluation currents_from_value(const MultiSpinor& value, std::span<const FourVector> normals);

// rho alone, skipping the currents.
double density_from_value(const MultiSpinor& value, std::span<const FourVector> normals);

CurrentEvaluation evaluate_currents(const NParticleWavefunction& psi, std::span<const FourVector> points,
                                    std::span<const FourVector> normals);

FourVector current_jk(const NParticleWavefunction& psi, int k, std::span<const FourVector> points,
                      std::span<const FourVector> normals);

double density_rho(const NParticleWavefunction& psi, std::span<const FourVector> points,
                   std::span<const FourVector> normals);

// Central-difference d_mu j_k^mu in the coordinates of x_k, every other point
// and all normals held fixed.
double divergence_residual(const NParticleWavefunction& psi, int k, std::span<const FourVector> points,
                           std::span<const FourVector> normals, double h);

}  // namespace hbd
