#include "hbd/wavefunction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hbd/errors.hpp"

namespace hbd {

namespace {

bool same_mode(const PlaneWaveMode& a, const PlaneWaveMode& b) {
  return a.momentum == b.momentum && a.sign == b.sign && a.spin == b.spin;
}

// Single-particle Hamiltonian alpha.p + beta m.
CMatrix hamiltonian(const SpatialVector& p, double m, const GammaSet& g) {
  const CMatrix& g0 = g[0];
  CMatrix h = m * g0;
  for (int i = 1; i < spacetime_dims(g.mode); ++i) {
    h += p[static_cast<std::size_t>(i - 1)] * (g0 * g[i]);
  }
  return h;
}

}  // namespace

Complex PlaneWaveMode::phase_at(const FourVector& x) const {
  const double phi = minkowski_dot(four_momentum, x);
  return {std::cos(phi), -std::sin(phi)};
}

CVector PlaneWaveMode::value_at(const FourVector& x) const { return amplitude * phase_at(x); }

PlaneWaveMode make_mode(const SpatialVector& momentum, double mass, EnergySign sign, int spin,
                        SpinMode mode) {
  if (mass < 0.0) throw InvalidArgument("mode mass must be non-negative");
  const int d = spinor_dim(mode);
  const int spins = d / 2;
  if (spin < 0 || spin >= spins) {
    throw InvalidArgument("spin label " + std::to_string(spin) + " out of range");
  }
  SpatialVector p = momentum;
  if (mode == SpinMode::D11) p[1] = p[2] = 0.0;
  const double p2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
  if (mass == 0.0 && p2 == 0.0) throw InvalidArgument("mode with m = 0 and p = 0");

  PlaneWaveMode out;
  out.momentum = p;
  out.mass = mass;
  out.sign = sign;
  out.spin = spin;
  out.mode = mode;
  out.energy = std::sqrt(mass * mass + p2);
  const double e_signed = sign == EnergySign::Positive ? out.energy : -out.energy;
  out.four_momentum = FourVector{{e_signed, p[0], p[1], p[2]}};

  const GammaSet& g = standard_gammas(mode);
  const CMatrix h = hamiltonian(p, mass, g);
  // Projector onto the H = e_signed eigenspace: (E +- H) / 2E.
  const CMatrix projector =
      (out.energy * CMatrix::Identity(d, d) + (sign == EnergySign::Positive ? h : CMatrix(-h))) /
      (2.0 * out.energy);
  CVector seed = CVector::Zero(d);
  seed(sign == EnergySign::Positive ? spin : spins + spin) = 1.0;
  CVector w = projector * seed;
  const double norm = w.norm();
  if (!(norm > 1e-12)) throw InternalConsistencyError("zero-norm mode spinor");
  out.amplitude = w / norm;
  return out;
}

NParticleWavefunction::NParticleWavefunction(int particles, double mass, SpinMode mode,
                                             std::vector<WaveTerm> terms)
    : particles_(particles), mass_(mass), mode_(mode), terms_(std::move(terms)) {
  if (particles_ < 1) throw InvalidArgument("wavefunction needs at least one particle");
  if (terms_.empty()) throw InvalidArgument("wavefunction needs at least one term");
  for (const auto& t : terms_) {
    if (static_cast<int>(t.modes.size()) != particles_) {
      throw InvalidArgument("every term must carry exactly N modes");
    }
    for (const auto& m : t.modes) {
      if (m.mode != mode_) throw InvalidArgument("mode dimension does not match wavefunction");
      if (m.mass != mass_) throw InvalidArgument("all modes must share the wavefunction mass");
    }
  }
  spin_dim_ = spin_space_dim(mode_, particles_);
  index_modes();
}

void NParticleWavefunction::index_modes() {
  distinct_.assign(static_cast<std::size_t>(particles_), {});
  term_index_.assign(terms_.size(), std::vector<std::size_t>(static_cast<std::size_t>(particles_)));
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    for (std::size_t k = 0; k < static_cast<std::size_t>(particles_); ++k) {
      auto& slot = distinct_[k];
      const auto& m = terms_[t].modes[k];
      std::size_t idx = 0;
      while (idx < slot.size() && !same_mode(slot[idx], m)) ++idx;
      if (idx == slot.size()) slot.push_back(m);
      term_index_[t][k] = idx;
    }
  }
  std::vector<std::size_t> order(terms_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return term_index_[a] < term_index_[b]; });

  const auto last = static_cast<std::ptrdiff_t>(particles_ - 1);
  groups_.clear();
  tail_coefficient_.clear();
  tail_index_.clear();
  for (std::size_t t : order) {
    const auto& idx = term_index_[t];
    if (groups_.empty() ||
        !std::equal(idx.begin(), idx.begin() + last, term_index_[groups_.back().term].begin())) {
      groups_.push_back({t, tail_index_.size(), tail_index_.size()});
    }
    tail_coefficient_.push_back(terms_[t].coefficient);
    tail_index_.push_back(idx.back());
    groups_.back().end = tail_index_.size();
  }
}

bool NParticleWavefunction::has_nonzero_coefficient() const {
  for (const auto& t : terms_) {
    if (t.coefficient != Complex{0.0, 0.0}) return true;
  }
  return false;
}

MultiSpinor NParticleWavefunction::evaluate(std::span<const FourVector> points) const {
  CVector out(static_cast<Eigen::Index>(spin_dim_));
  evaluate_into(points, std::span<Complex>(out.data(), spin_dim_));
  return MultiSpinor(std::move(out), particles_, mode_);
}

void NParticleWavefunction::evaluate_into(std::span<const FourVector> points, std::span<Complex> out) const {
  if (static_cast<int>(points.size()) != particles_) {
    throw InvalidArgument("point tuple length must equal particle count");
  }
  if (out.size() != spin_dim_) throw InvalidArgument("output buffer has wrong length");
  const std::size_t d = static_cast<std::size_t>(spinor_dim(mode_));
  const std::size_t n = static_cast<std::size_t>(particles_);

  // Per-slot mode values w exp(-i p.x), flattened as [mode][component].
  std::vector<std::size_t> offset(n + 1, 0);
  for (std::size_t k = 0; k < n; ++k) offset[k + 1] = offset[k] + distinct_[k].size() * d;
  std::vector<Complex> values(offset[n]);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& slot = distinct_[k];
    for (std::size_t i = 0; i < slot.size(); ++i) {
      const Complex ph = slot[i].phase_at(points[k]);
      for (std::size_t a = 0; a < d; ++a) {
        values[offset[k] + i * d + a] = slot[i].amplitude(static_cast<Eigen::Index>(a)) * ph;
      }
    }
  }
  auto value = [&](std::size_t k, std::size_t i) { return &values[offset[k] + i * d]; };

  // Terms are visited grouped by their leading n-1 mode indices; each group
  // contracts its last slot first and is then expanded once.
  std::fill(out.begin(), out.end(), Complex{0.0, 0.0});
  std::vector<Complex> prod(spin_dim_), next(spin_dim_);
  const std::size_t last = n - 1;
  Complex tail[4];
  for (const auto& grp : groups_) {
    std::fill(tail, tail + d, Complex{0.0, 0.0});
    for (std::size_t e = grp.begin; e < grp.end; ++e) {
      const Complex c = tail_coefficient_[e];
      const Complex* v = value(last, tail_index_[e]);
      for (std::size_t a = 0; a < d; ++a) tail[a] += c * v[a];
    }

    std::size_t len = 1;
    prod[0] = Complex{1.0, 0.0};
    const auto& lead = term_index_[grp.term];
    for (std::size_t k = 0; k < last; ++k) {
      const Complex* v = value(k, lead[k]);
      for (std::size_t i = 0; i < len; ++i) {
        for (std::size_t a = 0; a < d; ++a) next[i * d + a] = prod[i] * v[a];
      }
      len *= d;
      std::swap(prod, next);
    }
    for (std::size_t i = 0; i < len; ++i) {
      for (std::size_t a = 0; a < d; ++a) out[i * d + a] += prod[i] * tail[a];
    }
  }
}

NParticleWavefunction NParticleWavefunction::scaled(Complex factor) const {
  auto terms = terms_;
  for (auto& t : terms) t.coefficient *= factor;
  return NParticleWavefunction(particles_, mass_, mode_, std::move(terms));
}

NParticleWavefunction operator+(const NParticleWavefunction& a, const NParticleWavefunction& b) {
  if (a.particles_ != b.particles_ || a.mode_ != b.mode_ || a.mass_ != b.mass_) {
    throw InvalidArgument("cannot add wavefunctions of different shape");
  }
  auto terms = a.terms_;
  terms.insert(terms.end(), b.terms_.begin(), b.terms_.end());
  return NParticleWavefunction(a.particles_, a.mass_, a.mode_, std::move(terms));
}

double dirac_residual(const NParticleWavefunction& psi, int k, std::span<const FourVector> x, double h) {
  if (!(h > 0.0)) throw InvalidArgument("finite-difference step must be positive");
  if (k < 0 || k >= psi.particles()) throw InvalidArgument("particle index out of range");
  const SpinMode mode = psi.mode();
  const GammaSet& g = standard_gammas(mode);
  std::vector<FourVector> pts(x.begin(), x.end());
  const auto ku = static_cast<std::size_t>(k);

  // gamma_k^mu d_mu psi
  CVector dslash = CVector::Zero(static_cast<Eigen::Index>(psi.spin_dim()));
  for (int mu = 0; mu < spacetime_dims(mode); ++mu) {
    const auto m = static_cast<std::size_t>(mu);
    pts[ku][m] = x[ku][m] + h;
    const CVector plus = psi.evaluate(pts).entries;
    pts[ku][m] = x[ku][m] - h;
    const CVector minus = psi.evaluate(pts).entries;
    pts[ku][m] = x[ku][m];
    const CVector deriv = (plus - minus) / (2.0 * h);
    dslash += apply_on_particle(g[mu], k, psi.particles(), deriv);
  }
  const CVector center = psi.evaluate(pts).entries;
  const CVector residual = Complex{0.0, 1.0} * dslash - psi.mass() * center;
  return residual.norm();
}

}  // namespace hbd
