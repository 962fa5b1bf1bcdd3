#pragma once

// End-to-end runs behind the CLI subcommands.

#include <vector>

#include "hbd/ensemble.hpp"
#include "hbd/scenario.hpp"

namespace hbd {

struct SimulationRun {
  std::vector<NConfiguration> initial;
  std::vector<TrajectoryBundle> bundles;
};

// Integrates the scenario's initial points, or M configurations sampled from
// rho on the initial leaf when none are given.
SimulationRun run_simulation(const Scenario& scenario, int workers = 1);

struct EquilibriumRun {
  SamplingStats sampling;
  std::vector<TrajectoryBundle> bundles;
  CrossingSet crossings;
  EquivarianceReport report;
  DensityModel model = DensityModel::Equilibrium;
};

// Samples M configurations from rho on leaf s0, propagates them to s1 and
// compares the crossings with the density on s1. With negative_control set
// (argument or scenario) the reference density uses flat normals.
EquilibriumRun run_equilibrium(const Scenario& scenario, int workers = 1, bool negative_control = false);

const char* to_string(DensityModel model);

}  // namespace hbd
