#include "hbd/pipeline.hpp"

namespace hbd {

const char* to_string(DensityModel model) {
  return model == DensityModel::Equilibrium ? "equilibrium" : "flat_normals";
}

namespace {

std::vector<NConfiguration> sample_initial(const Scenario& sc, int workers, SamplingStats* stats) {
  SamplingOptions opts;
  opts.workers = workers;
  return sample_leaf(leaf_density(sc, sc.integration.s0), sc.ensemble.count, sc.ensemble.seed, opts, stats);
}

}  // namespace

SimulationRun run_simulation(const Scenario& sc, int workers) {
  SimulationRun run;
  run.initial = initial_configurations(sc);
  if (run.initial.empty()) run.initial = sample_initial(sc, workers, nullptr);
  run.bundles = propagate(sc.wavefunction, sc.foliation, run.initial, sc.integration.s1, integrator_settings(sc),
                          workers);
  return run;
}

EquilibriumRun run_equilibrium(const Scenario& sc, int workers, bool negative_control) {
  EquilibriumRun run;
  const auto initial = sample_initial(sc, workers, &run.sampling);
  run.bundles = propagate(sc.wavefunction, sc.foliation, initial, sc.integration.s1, integrator_settings(sc), workers);
  run.crossings = crossings(run.bundles, sc.foliation, sc.integration.s1);
  run.model = negative_control || sc.ensemble.negative_control ? DensityModel::FlatNormals : DensityModel::Equilibrium;

  EquivarianceOptions opts;
  opts.bins_per_axis = sc.ensemble.bins;
  opts.bin_quadrature_order = sc.ensemble.bin_quadrature_order;
  opts.thresholds.tv = sc.ensemble.tv_threshold;
  opts.thresholds.ks_coefficient = sc.ensemble.ks_coefficient;
  run.report = equivariance_test(run.crossings, leaf_density(sc, sc.integration.s1, run.model), opts);
  return run;
}

}  // namespace hbd
