#pragma once

// Guiding-equation integration in the leaf-label parametrization,
//
//   dX_k/ds = j_k / (df(X_k) . j_k),
//
// with every j_k built from the normals at the N current leaf intersection
// points, plus an independent integrator for the flat-frame law
// dQ_k/dt = psi^dagger alpha_k psi / psi^dagger psi.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hbd/foliation.hpp"
#include "hbd/wavefunction.hpp"

namespace hbd {

// N points, all on the leaf with label s.
struct NConfiguration {
  double s = 0.0;
  std::vector<FourVector> points;
};

enum class EventKind { NodeProximity, ValidityBreach };

std::string_view to_string(EventKind kind);
EventKind event_kind_from_string(std::string_view name);

struct TrajectoryEvent {
  double s = 0.0;
  EventKind kind = EventKind::NodeProximity;
  std::string detail;
};

struct IntegratorSettings {
  double step = 0.01;
  // Integration halts where rho <= node_threshold.
  double node_threshold = 0.0;
  // Record every output_stride-th step (the final configuration is always kept).
  int output_stride = 1;
};

struct TrajectoryBundle {
  std::vector<NConfiguration> configurations;  // increasing s
  double step = 0.0;                           // step actually used
  std::optional<TrajectoryEvent> halt;

  bool halted() const noexcept { return halt.has_value(); }
  double s_begin() const { return configurations.front().s; }
  double s_end() const { return configurations.back().s; }
};

// Sync tolerance for |label(X_k) - s|.
inline constexpr double kSyncTolerance = 1e-9;

NConfiguration make_configuration(const Foliation& f, double s, std::span<const ChartPoint> chart);

// Throws InvalidArgument if some point is off the leaf by more than kSyncTolerance.
void check_configuration(const Foliation& f, const NConfiguration& config);

// dX_k/ds for every particle. Throws NodeProximity when rho <= node_threshold
// and ValidityBreach when a normal is undefined.
std::vector<FourVector> hbd_velocity(const NParticleWavefunction& psi, const Foliation& f,
                                     const NConfiguration& config, double node_threshold);

// One classical RK4 step of size ds followed by a single Newton correction of
// each point back onto the target leaf along its guiding direction.
NConfiguration rk4_step(const NParticleWavefunction& psi, const Foliation& f, const NConfiguration& config,
                        double ds, double node_threshold);

// Fixed-step RK4 from initial.s to s_end. The step is shrunk so an integer
// number of steps lands on s_end exactly. Node and validity problems halt the
// integration and are recorded in TrajectoryBundle::halt.
TrajectoryBundle integrate(const NParticleWavefunction& psi, const Foliation& f, const NConfiguration& initial,
                           double s_end, const IntegratorSettings& settings);

// Flat-frame velocities psi^dagger alpha_k psi / psi^dagger psi at common time t.
std::vector<SpatialVector> bd_flat_velocity(const NParticleWavefunction& psi, double t,
                                            std::span<const SpatialVector> positions, double node_threshold);

// One RK4 step of size dt for the flat-frame law, from positions q at time t.
std::vector<SpatialVector> bd_flat_step(const NParticleWavefunction& psi, double t, std::span<const SpatialVector> q,
                                        double dt, double node_threshold);

struct FlatTrajectory {
  std::vector<double> times;
  std::vector<std::vector<SpatialVector>> positions;
};

FlatTrajectory bd_flat_integrate(const NParticleWavefunction& psi, double t0,
                                 std::span<const SpatialVector> initial, double t_end,
                                 const IntegratorSettings& settings);

}  // namespace hbd
