#pragma once

// Quantum-equilibrium machinery: the leaf density rho x area element,
// rejection sampling from it, ensemble propagation, leaf-crossing extraction
// and the binned equivariance test.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hbd/dynamics.hpp"
#include "hbd/foliation.hpp"
#include "hbd/wavefunction.hpp"

namespace hbd {

// Chart box used for every particle. A periodic box wraps coordinates and
// skips the boundary-weight check.
struct SamplingBox {
  ChartPoint lo{-1.0, -1.0, -1.0};
  ChartPoint hi{1.0, 1.0, 1.0};
  bool periodic = false;
};

// Equilibrium uses the true leaf normals. FlatNormals replaces every normal by
// (1,0,0,0) and serves as the negative control.
enum class DensityModel { Equilibrium, FlatNormals };

class LeafDensity {
 public:
  LeafDensity(NParticleWavefunction psi, Foliation foliation, double s, SamplingBox box,
              int quadrature_order = 64, DensityModel model = DensityModel::Equilibrium);

  const NParticleWavefunction& wavefunction() const noexcept { return psi_; }
  const Foliation& foliation() const noexcept { return foliation_; }
  double s() const noexcept { return s_; }
  const SamplingBox& box() const noexcept { return box_; }
  DensityModel model() const noexcept { return model_; }
  int quadrature_order() const noexcept { return order_; }

  int chart_dims() const noexcept { return spatial_dims(psi_.mode()); }
  int joint_dims() const noexcept { return chart_dims() * psi_.particles(); }

  // Unnormalized weight rho(points, normals) * prod_k area(xi_k) at joint chart
  // coordinates (particle-major, chart_dims() per particle).
  double weight(std::span<const double> joint) const;

  std::vector<ChartPoint> split(std::span<const double> joint) const;

  // Z: tensor Gauss-Legendre integral of weight() over the box.
  double normalization() const;

  // Integral of weight() over the joint sub-box [lo, hi] with a tensor
  // Gauss-Legendre rule of orders[a] points on joint axis a.
  double integrate(std::span<const double> lo, std::span<const double> hi, std::span<const int> orders) const;

  double axis_lo(int joint_axis) const;
  double axis_hi(int joint_axis) const;

 private:
  NParticleWavefunction psi_;
  Foliation foliation_;
  double s_;
  SamplingBox box_;
  int order_;
  DensityModel model_;
};

struct SamplingOptions {
  int envelope_grid = 0;  // points per joint axis for the envelope scan; 0 picks a default
  double envelope_factor = 1.1;
  int workers = 1;
  std::uint64_t max_attempts = 10'000'000;  // per draw
};

struct SamplingStats {
  double envelope = 0.0;
  int restarts = 0;
  std::uint64_t proposals = 0;
};

// M independent rejection-sampled configurations on the density's leaf.
// Throws BoundaryLeak if a non-periodic box has boundary weight above 1e-6 of
// the maximum. A weight above the envelope triggers a rescan and restart.
std::vector<NConfiguration> sample_leaf(const LeafDensity& density, std::size_t count, std::uint64_t seed,
                                        const SamplingOptions& options = {}, SamplingStats* stats = nullptr);

std::vector<TrajectoryBundle> propagate(const NParticleWavefunction& psi, const Foliation& f,
                                        std::span<const NConfiguration> initial, double s_end,
                                        const IntegratorSettings& settings, int workers = 1);

struct CrossingSample {
  std::size_t trajectory = 0;
  double s = 0.0;
  std::vector<ChartPoint> chart;  // one per particle, wrapped when periodic
};

struct CrossingSet {
  std::vector<CrossingSample> samples;
  std::size_t excluded = 0;  // trajectories halted before s_target
};

// Leaf crossings at s_target, linearly interpolated in s between bracketing
// grid configurations.
CrossingSet crossings(std::span<const TrajectoryBundle> bundles, const Foliation& f, double s_target);

// Treats each configuration as a crossing of its own leaf.
CrossingSet crossings_from_configurations(std::span<const NConfiguration> configs, const Foliation& f);

struct EquivarianceThresholds {
  double tv = 0.05;
  double ks_coefficient = 1.63;  // KS threshold is ks_coefficient / sqrt(M)
};

struct EquivarianceReport {
  std::size_t samples = 0;
  std::size_t excluded = 0;
  std::size_t outside = 0;  // samples outside a non-periodic box
  int bins_per_axis = 0;
  int dims = 0;
  std::vector<double> lo, hi;          // per joint axis
  std::vector<std::uint64_t> counts;   // row-major over joint bins, axis 0 slowest
  std::vector<double> masses;          // theoretical bin probabilities
  double tv = 0.0;
  double tv_threshold = 0.0;
  double expected_tv_noise = 0.0;      // mean TV of exact multinomial sampling
  std::vector<double> ks;              // per joint axis
  double ks_threshold = 0.0;
  bool passed = false;
};

struct EquivarianceOptions {
  int bins_per_axis = 20;
  int bin_quadrature_order = 6;
  int cdf_panels = 200;
  int cdf_panel_order = 4;
  EquivarianceThresholds thresholds;
};

// Default bins per axis, about M^(1 / (2 + dims)).
int default_bins(std::size_t samples, int dims);

EquivarianceReport equivariance_test(const CrossingSet& samples, const LeafDensity& density,
                                     const EquivarianceOptions& options = {});

// Flat-frame continuity residual d rho/dt + sum_k div_k J_k with rho = psi^dagger psi
// and J_k = psi^dagger alpha_k psi, by central differences, at each position tuple.
std::vector<double> flat_continuity_residual(const NParticleWavefunction& psi, double t,
                                             std::span<const std::vector<SpatialVector>> grid, double h_t,
                                             double h_x);

}  // namespace hbd
