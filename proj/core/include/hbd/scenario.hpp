#pragma once

// Scenario files: one JSON document describing the wavefunction, foliation,
// integration and ensemble settings of a run. Schema tag "hbd-scenario/1".
//
// {
//   "schema": "hbd-scenario/1",
//   "name": "...",
//   "mode": "D11" | "D31",
//   "mass": 1.0,
//   "particles": 2,
//   "wavefunction": { "terms": [ TERM, ... ] },
//   "foliation": {
//     "kind": "flat_time" | "constant_normal" | "graph_leaf",
//     "normal": [n0, n1, n2, n3],                       // constant_normal
//     "profile": { "family": "tanh", "amplitude": a, "rate": b }
//              | { "family": "sin_gauss", "amplitude": a, "wavenumber": b,
//                  "width": w | null },                 // graph_leaf
//     "box": { "lo": [...], "hi": [...] }, "period": L (optional),
//     "relabel": { "scale": 1, "offset": 0 } (optional),
//     "scan_resolution": 201
//   },
//   "integration": { "s0", "s1", "step", "node_threshold_factor", "tolerance",
//                    "output_stride", "initial_points": [[xi_1, ..., xi_N], ...] },
//   "ensemble": { "M", "seed", "box": {"lo", "hi", "periodic"}, "bins",
//                 "quadrature_order", "bin_quadrature_order", "tv_threshold",
//                 "ks_coefficient", "negative_control" },
//   "output": { "directory": "..." }
// }
//
// A TERM is either explicit,
//   { "coefficient": [re, im], "modes": [MODE, ...] }            (one MODE per particle)
// or a product of single-particle superpositions that is expanded on load,
//   { "coefficient": [re, im], "factors": [[{"amplitude": [re, im], "mode": MODE}, ...], ...] }
// with MODE = { "p": [px, ...], "sign": "+" | "-", "spin": 0 }.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hbd/dynamics.hpp"
#include "hbd/ensemble.hpp"
#include "hbd/foliation.hpp"
#include "hbd/wavefunction.hpp"

namespace hbd {

inline constexpr const char* kScenarioSchema = "hbd-scenario/1";

struct IntegrationBlock {
  double s0 = 0.0;
  double s1 = 1.0;
  double step = 0.01;
  double node_threshold_factor = 1e-10;
  double tolerance = 1e-8;
  int output_stride = 1;
  std::vector<std::vector<ChartPoint>> initial_points;
};

struct EnsembleBlock {
  std::size_t count = 1000;
  std::uint64_t seed = 1;
  SamplingBox box;
  int bins = 20;
  int quadrature_order = 64;
  int bin_quadrature_order = 6;
  double tv_threshold = 0.05;
  double ks_coefficient = 1.63;
  bool negative_control = false;
};

struct Scenario {
  std::string name;
  SpinMode mode = SpinMode::D11;
  double mass = 1.0;
  int particles = 1;
  NParticleWavefunction wavefunction;
  Foliation foliation;
  int scan_resolution = 201;
  IntegrationBlock integration;
  EnsembleBlock ensemble;
  std::string output_directory = "out";
  std::string hash;  // FNV-1a 64 of the canonical JSON text, hex
};

// Parses and fully validates; throws ValidationError (kind "validity_breach"
// for a foliation that fails its scan).
Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario(const std::filesystem::path& path);

std::string scenario_hash(const nlohmann::json& doc);

// Absolute node threshold: factor times the largest rho found on a grid over
// the ensemble box on the initial leaf.
double node_threshold(const Scenario& scenario);

IntegratorSettings integrator_settings(const Scenario& scenario);

LeafDensity leaf_density(const Scenario& scenario, double s, DensityModel model = DensityModel::Equilibrium);

// The user-specified initial configurations, placed on the initial leaf.
std::vector<NConfiguration> initial_configurations(const Scenario& scenario);

}  // namespace hbd
