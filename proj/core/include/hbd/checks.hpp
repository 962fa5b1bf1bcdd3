#pragma once

// Invariant suites. Each check returns its largest residual next to the
// threshold it was judged against; run_checks bundles them for a scenario.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hbd/currents.hpp"
#include "hbd/dynamics.hpp"
#include "hbd/ensemble.hpp"
#include "hbd/output.hpp"
#include "hbd/random.hpp"
#include "hbd/scenario.hpp"

namespace hbd {

inline constexpr const char* kChecksSchema = "hbd-checks/1";

struct CheckResult {
  std::string name;
  bool passed = false;
  double max_residual = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct CheckReport {
  std::vector<CheckResult> results;
  bool passed() const;
};

// {g^mu, g^nu} = 2 eta^{mu nu} I, g^0 hermitian, g^i anti-hermitian.
CheckResult clifford_check(const GammaSet& gammas, double tolerance = 1e-12);

// Uniform chart tuple in the box on leaf s, converted to spacetime points.
NConfiguration random_configuration(const Foliation& f, double s, const SamplingBox& box, int particles,
                                    CounterRng& rng);

// (max_k - min_k) / max_k |j_k . n_k|.
double k_spread(const CurrentEvaluation& cur, std::span<const FourVector> normals);

struct DrawSettings {
  double s_lo = 0.0;
  double s_hi = 1.0;
  SamplingBox box;
  std::size_t draws = 1000;
  std::uint64_t seed = 1;
};

CheckResult k_independence_check(const NParticleWavefunction& psi, const Foliation& f, const DrawSettings& d,
                                 double tolerance = 1e-10);

// rho >= -1e-12 scale everywhere and j_k future causal wherever rho > 1e-8 scale.
CheckResult positivity_check(const NParticleWavefunction& psi, const Foliation& f, const DrawSettings& d);

// Divergence residual ratio r(h) / r(h/2) at each draw must sit in 4 +- 20%.
// Draws whose residual at h is below floor * scale count as converged.
CheckResult divergence_check(const NParticleWavefunction& psi, const Foliation& f, const DrawSettings& d, double h,
                             double floor = 1e-11);

// Frobenius residual of df at the given points, step h.
CheckResult frobenius_check(const Foliation& f, std::span<const FourVector> points, double h, double threshold);

// The twisted control field must have a residual near |c| (bounded away from zero).
CheckResult frobenius_control_check(double c, std::span<const FourVector> points, double h);

// Spatial distance between each point of a single-particle path and the
// flat-frame path of `single` through the path's first point, the latter
// advanced to the same coordinate time with a partial RK4 step.
double flat_path_deviation(const NParticleWavefunction& single, std::span<const FourVector> path,
                           const IntegratorSettings& settings);

// HBD with a flat-time foliation against the flat-frame integrator from the
// same positions at time t0.
CheckResult flat_reduction_check(const NParticleWavefunction& psi, double t0, double t1,
                                 std::span<const std::vector<SpatialVector>> starts,
                                 const IntegratorSettings& settings, double tolerance);

// psi = factors[0] x ... x factors[N-1] integrated under f from each start
// tuple; every particle path must follow its own flat-frame path.
CheckResult foliation_independence_check(std::span<const NParticleWavefunction> factors, const Foliation& f,
                                         double s0, double s1, std::span<const std::vector<ChartPoint>> starts,
                                         const IntegratorSettings& settings, double tolerance);

// Tensor product of single-particle wavefunctions.
NParticleWavefunction product_state(std::span<const NParticleWavefunction> factors);

// Single-particle superposition sum_t c_t w_t(slot k) drawn from psi's terms.
NParticleWavefunction slot_superposition(const NParticleWavefunction& psi, int k);

CheckReport run_checks(const Scenario& scenario, const GammaSet& gammas);

nlohmann::json checks_to_json(const CheckReport& report, const Provenance& prov);
CheckReport checks_from_json(const nlohmann::json& doc);

}  // namespace hbd
