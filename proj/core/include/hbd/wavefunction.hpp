#pragma once

// Free multi-time N-particle Dirac wave functions built from finite sums of
// tensor products of plane-wave modes. Every such function solves the N
// single-particle Dirac equations exactly, so it can be evaluated at any tuple
// of spacetime points (including points at different coordinate times).

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "hbd/geometry.hpp"

namespace hbd {

using SpatialVector = std::array<double, 3>;

enum class EnergySign { Positive, Negative };

struct PlaneWaveMode {
  SpatialVector momentum{};
  double mass = 0.0;
  EnergySign sign = EnergySign::Positive;
  int spin = 0;  // 0..1 in D31, always 0 in D11
  SpinMode mode = SpinMode::D31;

  double energy = 0.0;       // +sqrt(m^2 + |p|^2)
  FourVector four_momentum;  // (+-E, p)
  CVector amplitude;         // unit-norm spinor, (gamma.p4 - m) w = 0

  // Single-particle value w exp(-i p4.x).
  CVector value_at(const FourVector& x) const;
  Complex phase_at(const FourVector& x) const;
};

// Builds the mode by projecting a canonical basis spinor onto the
// requested energy eigenspace of H = alpha.p + beta m. Positive energy
// projects e_spin, negative energy projects e_{d/2 + spin}.
PlaneWaveMode make_mode(const SpatialVector& momentum, double mass, EnergySign sign, int spin,
                        SpinMode mode);

struct WaveTerm {
  Complex coefficient{1.0, 0.0};
  std::vector<PlaneWaveMode> modes;  // one per particle
};

class NParticleWavefunction {
 public:
  NParticleWavefunction(int particles, double mass, SpinMode mode, std::vector<WaveTerm> terms);

  int particles() const noexcept { return particles_; }
  double mass() const noexcept { return mass_; }
  SpinMode mode() const noexcept { return mode_; }
  const std::vector<WaveTerm>& terms() const noexcept { return terms_; }
  std::size_t spin_dim() const noexcept { return spin_dim_; }

  // True if some coefficient is nonzero.
  bool has_nonzero_coefficient() const;

  MultiSpinor evaluate(std::span<const FourVector> points) const;

  // Writes psi(points) into out (length spin_dim()).
  void evaluate_into(std::span<const FourVector> points, std::span<Complex> out) const;

  NParticleWavefunction scaled(Complex factor) const;
  friend NParticleWavefunction operator+(const NParticleWavefunction& a, const NParticleWavefunction& b);

 private:
  void index_modes();

  int particles_;
  double mass_;
  SpinMode mode_;
  std::vector<WaveTerm> terms_;
  std::size_t spin_dim_ = 1;

  // Distinct modes per particle slot and, per term, the index into them.
  std::vector<std::vector<PlaneWaveMode>> distinct_;
  std::vector<std::vector<std::size_t>> term_index_;
  // Terms sorted by index tuple and grouped by their leading N-1 indices.
  struct Group {
    std::size_t term;        // a representative term of the group
    std::size_t begin, end;  // range in the tail arrays
  };
  std::vector<Group> groups_;
  std::vector<Complex> tail_coefficient_;
  std::vector<std::size_t> tail_index_;
};

// Test oracle: || (i gamma_k . d_k - m) psi || at x with central differences
// of step h in the coordinates of x_k.
double dirac_residual(const NParticleWavefunction& psi, int k, std::span<const FourVector> x, double h);

}  // namespace hbd
