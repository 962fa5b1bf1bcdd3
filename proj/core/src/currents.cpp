#include "hbd/currents.hpp"

#include <cmath>
#include <sstream>

#include "hbd/errors.hpp"

namespace hbd {

namespace {

double real_part_checked(Complex z, double scale, const char* what) {
  if (std::abs(z.imag()) > 1e-10 * scale) {
    std::ostringstream msg;
    msg << what << " has imaginary part " << z.imag() << " (scale " << scale << ")";
    throw InternalConsistencyError(msg.str());
  }
  return z.real();
}

double normal_magnitude(const FourVector& n) {
  return std::abs(n[0]) + std::sqrt(n[1] * n[1] + n[2] * n[2] + n[3] * n[3]);
}

}  // namespace

CurrentEvaluation currents_from_value(const MultiSpinor& value, std::span<const FourVector> normals) {
  const int n = value.particles;
  if (static_cast<int>(normals.size()) != n) throw InvalidArgument("normal tuple length must equal N");
  const GammaSet& g = standard_gammas(value.mode);
  const int dims = spacetime_dims(value.mode);

  std::vector<CMatrix> slashes;
  slashes.reserve(normals.size());
  double scale = value.norm_squared();
  for (const auto& nl : normals) {
    slashes.push_back(slash_single(nl, g));
    scale *= normal_magnitude(nl);
  }

  // chi = Gamma0 psi, so psibar A psi = chi^dagger A psi.
  CVector chi = value.entries;
  for (int k = 0; k < n; ++k) chi = apply_on_particle(g[0], k, n, chi);

  CurrentEvaluation out;
  out.scale = scale;
  out.currents.resize(normals.size());
  for (int k = 0; k < n; ++k) {
    CVector phi = value.entries;
    for (int l = 0; l < n; ++l) {
      if (l != k) phi = apply_on_particle(slashes[static_cast<std::size_t>(l)], l, n, phi);
    }
    FourVector j;
    for (int mu = 0; mu < dims; ++mu) {
      const Complex z = chi.dot(apply_on_particle(g[mu], k, n, phi));
      j[static_cast<std::size_t>(mu)] = real_part_checked(z, scale, "current component");
    }
    out.currents[static_cast<std::size_t>(k)] = j;
  }

  CVector all = value.entries;
  for (int l = 0; l < n; ++l) all = apply_on_particle(slashes[static_cast<std::size_t>(l)], l, n, all);
  out.density = real_part_checked(chi.dot(all), scale, "density");
  return out;
}

double density_from_value(const MultiSpinor& value, std::span<const FourVector> normals) {
  const int n = value.particles;
  if (static_cast<int>(normals.size()) != n) throw InvalidArgument("normal tuple length must equal N");
  const GammaSet& g = standard_gammas(value.mode);
  double scale = value.norm_squared();
  CVector chi = value.entries;
  CVector all = value.entries;
  for (int k = 0; k < n; ++k) {
    const auto& nk = normals[static_cast<std::size_t>(k)];
    scale *= normal_magnitude(nk);
    chi = apply_on_particle(g[0], k, n, chi);
    all = apply_on_particle(slash_single(nk, g), k, n, all);
  }
  return real_part_checked(chi.dot(all), scale, "density");
}

CurrentEvaluation evaluate_currents(const NParticleWavefunction& psi, std::span<const FourVector> points,
                                    std::span<const FourVector> normals) {
  return currents_from_value(psi.evaluate(points), normals);
}

FourVector current_jk(const NParticleWavefunction& psi, int k, std::span<const FourVector> points,
                      std::span<const FourVector> normals) {
  if (k < 0 || k >= psi.particles()) throw InvalidArgument("particle index out of range");
  return evaluate_currents(psi, points, normals).currents[static_cast<std::size_t>(k)];
}

double density_rho(const NParticleWavefunction& psi, std::span<const FourVector> points,
                   std::span<const FourVector> normals) {
  return evaluate_currents(psi, points, normals).density;
}

double divergence_residual(const NParticleWavefunction& psi, int k, std::span<const FourVector> points,
                           std::span<const FourVector> normals, double h) {
  if (!(h > 0.0)) throw InvalidArgument("finite-difference step must be positive");
  if (k < 0 || k >= psi.particles()) throw InvalidArgument("particle index out of range");
  const auto ku = static_cast<std::size_t>(k);
  std::vector<FourVector> pts(points.begin(), points.end());
  double div = 0.0;
  for (int mu = 0; mu < spacetime_dims(psi.mode()); ++mu) {
    const auto m = static_cast<std::size_t>(mu);
    pts[ku][m] = points[ku][m] + h;
    const double plus = current_jk(psi, k, pts, normals)[m];
    pts[ku][m] = points[ku][m] - h;
    const double minus = current_jk(psi, k, pts, normals)[m];
    pts[ku][m] = points[ku][m];
    div += (plus - minus) / (2.0 * h);
  }
  return std::abs(div);
}

}  // namespace hbd
