#include "hbd/checks.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hbd/errors.hpp"

namespace hbd {

using nlohmann::json;

bool CheckReport::passed() const {
  return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
}

namespace {

std::string describe(double value, const char* label) {
  std::ostringstream msg;
  msg << label << ' ' << value;
  return msg.str();
}

ValidityBox unbounded_box() {
  ValidityBox b;
  b.lo = {-1e9, -1e9, -1e9};
  b.hi = {1e9, 1e9, 1e9};
  return b;
}

double spatial_distance(const FourVector& x, const SpatialVector& q) {
  const double a = x[1] - q[0], b = x[2] - q[1], c = x[3] - q[2];
  return std::sqrt(a * a + b * b + c * c);
}

double max_frequency(const NParticleWavefunction& psi) {
  double w = 0.0;
  for (const auto& t : psi.terms()) {
    for (const auto& m : t.modes) w = std::max(w, m.energy);
  }
  return w;
}

}  // namespace

CheckResult clifford_check(const GammaSet& g, double tolerance) {
  const int dims = spacetime_dims(g.mode);
  const auto d = static_cast<Eigen::Index>(spinor_dim(g.mode));
  const CMatrix id = CMatrix::Identity(d, d);
  double worst = 0.0;
  for (int mu = 0; mu < dims; ++mu) {
    if (g[mu].rows() != d || g[mu].cols() != d) {
      return {"clifford", false, INFINITY, tolerance, "gamma matrix has the wrong shape"};
    }
    for (int nu = 0; nu < dims; ++nu) {
      const double eta = mu != nu ? 0.0 : (mu == 0 ? 1.0 : -1.0);
      const CMatrix anti = g[mu] * g[nu] + g[nu] * g[mu] - 2.0 * eta * id;
      worst = std::max(worst, anti.cwiseAbs().maxCoeff());
    }
    // g^0 hermitian, g^i anti-hermitian.
    const CMatrix herm = mu == 0 ? CMatrix(g[mu] - g[mu].adjoint()) : CMatrix(g[mu] + g[mu].adjoint());
    worst = std::max(worst, herm.cwiseAbs().maxCoeff());
  }
  CheckResult r{"clifford", worst <= tolerance, worst, tolerance, ""};
  r.detail = std::string(g.mode == SpinMode::D31 ? "D31" : "D11") + " representation";
  return r;
}

NConfiguration random_configuration(const Foliation& f, double s, const SamplingBox& box, int particles,
                                    CounterRng& rng) {
  const int dims = spatial_dims(f.mode());
  std::vector<ChartPoint> chart(static_cast<std::size_t>(particles), ChartPoint{0.0, 0.0, 0.0});
  for (auto& xi : chart) {
    for (int a = 0; a < dims; ++a) {
      const auto i = static_cast<std::size_t>(a);
      xi[i] = box.lo[i] + rng.uniform() * (box.hi[i] - box.lo[i]);
    }
  }
  return make_configuration(f, s, chart);
}

double k_spread(const CurrentEvaluation& cur, std::span<const FourVector> normals) {
  double lo = INFINITY, hi = -INFINITY, mag = 0.0;
  for (std::size_t k = 0; k < normals.size(); ++k) {
    const double v = minkowski_dot(cur.currents[k], normals[k]);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    mag = std::max(mag, std::abs(v));
  }
  return mag > 0.0 ? (hi - lo) / mag : 0.0;
}

namespace {

template <class Visit>
void for_each_draw(const NParticleWavefunction& psi, const Foliation& f, const DrawSettings& d, Visit&& visit) {
  for (std::size_t i = 0; i < d.draws; ++i) {
    CounterRng rng(d.seed, i);
    const double s = d.s_lo + rng.uniform() * (d.s_hi - d.s_lo);
    const NConfiguration c = random_configuration(f, s, d.box, psi.particles(), rng);
    std::vector<FourVector> normals;
    for (const auto& x : c.points) normals.push_back(f.normal(x));
    visit(c, normals);
  }
}

}  // namespace

CheckResult k_independence_check(const NParticleWavefunction& psi, const Foliation& f, const DrawSettings& d,
                                 double tolerance) {
  double worst = 0.0;
  for_each_draw(psi, f, d, [&](const NConfiguration& c, const std::vector<FourVector>& normals) {
    worst = std::max(worst, k_spread(evaluate_currents(psi, c.points, normals), normals));
  });
  return {"k_independence", worst < tolerance, worst, tolerance, std::to_string(d.draws) + " draws"};
}

CheckResult positivity_check(const NParticleWavefunction& psi, const Foliation& f, const DrawSettings& d) {
  double worst_rho = 0.0;     // most negative rho / scale
  double worst_causal = 0.0;  // most negative j.j / scale^2 or j^0 / scale
  std::size_t tested = 0;
  for_each_draw(psi, f, d, [&](const NConfiguration& c, const std::vector<FourVector>& normals) {
    const CurrentEvaluation cur = evaluate_currents(psi, c.points, normals);
    if (cur.scale == 0.0) return;
    worst_rho = std::max(worst_rho, -cur.density / cur.scale);
    if (cur.density <= 1e-8 * cur.scale) return;
    ++tested;
    for (const auto& j : cur.currents) {
      worst_causal = std::max(worst_causal, -minkowski_square(j) / (cur.scale * cur.scale));
      worst_causal = std::max(worst_causal, -j[0] / cur.scale);
    }
  });
  const double threshold = 1e-12;
  CheckResult r{"positivity", worst_rho <= threshold && worst_causal <= threshold, std::max(worst_rho, worst_causal),
                threshold, ""};
  r.detail = describe(worst_rho, "worst -rho/scale") + ", " + describe(worst_causal, "worst causal defect") + ", " +
             std::to_string(tested) + " current tests";
  return r;
}

CheckResult divergence_check(const NParticleWavefunction& psi, const Foliation& f, const DrawSettings& d, double h,
                             double floor) {
  double worst = 0.0;  // largest |ratio / 4 - 1|
  double lo = INFINITY, hi = 0.0;
  std::size_t converged = 0, measured = 0;
  for_each_draw(psi, f, d, [&](const NConfiguration& c, const std::vector<FourVector>& normals) {
    const double scale = evaluate_currents(psi, c.points, normals).scale;
    for (int k = 0; k < psi.particles(); ++k) {
      const double r1 = divergence_residual(psi, k, c.points, normals, h);
      const double r2 = divergence_residual(psi, k, c.points, normals, h / 2.0);
      if (r1 <= floor * scale) {
        ++converged;
        continue;
      }
      ++measured;
      const double ratio = r1 / r2;
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
      worst = std::max(worst, std::abs(ratio / 4.0 - 1.0));
    }
  });
  std::ostringstream msg;
  msg << measured << " ratios in [" << (measured ? lo : 0.0) << ", " << hi << "], " << converged
      << " below the residual floor";
  return {"divergence", worst <= 0.2, worst, 0.2, msg.str()};
}

CheckResult frobenius_check(const Foliation& f, std::span<const FourVector> points, double h, double threshold) {
  const CovectorField v = gradient_covector_field(f);
  double worst = 0.0;
  for (const auto& x : points) worst = std::max(worst, frobenius_residual(v, x, h));
  return {"frobenius", worst <= threshold, worst, threshold, std::to_string(points.size()) + " points"};
}

CheckResult frobenius_control_check(double c, std::span<const FourVector> points, double h) {
  const CovectorField v = twisted_field(c);
  double least = INFINITY;
  for (const auto& x : points) least = std::min(least, frobenius_residual(v, x, h));
  // Passes when the residual stays bounded away from zero.
  const double bound = 0.5 * std::abs(c);
  return {"frobenius_control", least >= bound && bound > 0.0, least, bound, "smallest residual of the twisted field"};
}

double flat_path_deviation(const NParticleWavefunction& single, std::span<const FourVector> path,
                           const IntegratorSettings& settings) {
  if (single.particles() != 1) throw InvalidArgument("flat_path_deviation needs a single-particle state");
  if (path.empty()) return 0.0;
  double t_end = path.front()[0];
  for (const auto& x : path) t_end = std::max(t_end, x[0]);
  IntegratorSettings s = settings;
  s.output_stride = 1;
  const std::vector<SpatialVector> start{{path.front()[1], path.front()[2], path.front()[3]}};
  const FlatTrajectory ref = bd_flat_integrate(single, path.front()[0], start, t_end, s);

  double worst = 0.0;
  for (const auto& x : path) {
    auto it = std::upper_bound(ref.times.begin(), ref.times.end(), x[0]);
    if (it != ref.times.begin()) --it;
    const auto i = static_cast<std::size_t>(it - ref.times.begin());
    const double dt = x[0] - ref.times[i];
    SpatialVector q = ref.positions[i][0];
    if (dt != 0.0) q = bd_flat_step(single, ref.times[i], ref.positions[i], dt, settings.node_threshold)[0];
    worst = std::max(worst, spatial_distance(x, q));
  }
  return worst;
}

CheckResult flat_reduction_check(const NParticleWavefunction& psi, double t0, double t1,
                                 std::span<const std::vector<SpatialVector>> starts,
                                 const IntegratorSettings& settings, double tolerance) {
  const Foliation flat = Foliation::flat_time(psi.mode(), unbounded_box());
  double worst = 0.0;
  for (const auto& q0 : starts) {
    std::vector<ChartPoint> chart(q0.begin(), q0.end());
    const TrajectoryBundle hbd = integrate(psi, flat, make_configuration(flat, t0, chart), t1, settings);
    if (hbd.halted()) return {"flat_reduction", false, INFINITY, 10.0 * tolerance, hbd.halt->detail};
    const FlatTrajectory bd = bd_flat_integrate(psi, t0, q0, t1, settings);
    if (bd.times.size() != hbd.configurations.size()) {
      throw InternalConsistencyError("flat and curved integrators produced different grids");
    }
    for (std::size_t i = 0; i < bd.times.size(); ++i) {
      for (std::size_t k = 0; k < q0.size(); ++k) {
        worst = std::max(worst, spatial_distance(hbd.configurations[i].points[k], bd.positions[i][k]));
        worst = std::max(worst, std::abs(hbd.configurations[i].points[k][0] - bd.times[i]));
      }
    }
  }
  return {"flat_reduction", worst < 10.0 * tolerance, worst, 10.0 * tolerance,
          std::to_string(starts.size()) + " start tuples"};
}

NParticleWavefunction product_state(std::span<const NParticleWavefunction> factors) {
  if (factors.empty()) throw InvalidArgument("product of no factors");
  std::vector<WaveTerm> terms{WaveTerm{{1.0, 0.0}, {}}};
  for (const auto& phi : factors) {
    if (phi.particles() != 1) throw InvalidArgument("product factors must be single-particle states");
    std::vector<WaveTerm> next;
    for (const auto& prev : terms) {
      for (const auto& t : phi.terms()) {
        WaveTerm w = prev;
        w.coefficient *= t.coefficient;
        w.modes.push_back(t.modes.front());
        next.push_back(std::move(w));
      }
    }
    terms = std::move(next);
  }
  return {static_cast<int>(factors.size()), factors.front().mass(), factors.front().mode(), std::move(terms)};
}

NParticleWavefunction slot_superposition(const NParticleWavefunction& psi, int k) {
  if (k < 0 || k >= psi.particles()) throw InvalidArgument("particle index out of range");
  std::vector<WaveTerm> terms;
  for (const auto& t : psi.terms()) terms.push_back(WaveTerm{t.coefficient, {t.modes[static_cast<std::size_t>(k)]}});
  return {1, psi.mass(), psi.mode(), std::move(terms)};
}

CheckResult foliation_independence_check(std::span<const NParticleWavefunction> factors, const Foliation& f,
                                         double s0, double s1, std::span<const std::vector<ChartPoint>> starts,
                                         const IntegratorSettings& settings, double tolerance) {
  const NParticleWavefunction psi = product_state(factors);
  // Same order of accuracy on both sides: tolerance for each integrator.
  const double threshold = 10.0 * (2.0 * tolerance);
  double worst = 0.0;
  for (const auto& chart : starts) {
    const TrajectoryBundle b = integrate(psi, f, make_configuration(f, s0, chart), s1, settings);
    if (b.halted()) return {"foliation_independence", false, INFINITY, threshold, b.halt->detail};
    for (std::size_t k = 0; k < factors.size(); ++k) {
      std::vector<FourVector> path;
      for (const auto& c : b.configurations) path.push_back(c.points[k]);
      worst = std::max(worst, flat_path_deviation(factors[k], path, settings));
    }
  }
  return {"foliation_independence", worst < threshold, worst, threshold,
          std::to_string(starts.size()) + " start tuples, " + std::to_string(factors.size()) + " factor(s)"};
}

CheckReport run_checks(const Scenario& sc, const GammaSet& gammas) {
  CheckReport report;
  const NParticleWavefunction& psi = sc.wavefunction;
  const Foliation& f = sc.foliation;
  const int dims = spatial_dims(sc.mode);

  report.results.push_back(clifford_check(gammas));
  if (gammas.mode != sc.mode) report.results.push_back(clifford_check(standard_gammas(sc.mode)));

  DrawSettings d;
  d.s_lo = sc.integration.s0;
  d.s_hi = sc.integration.s1;
  d.box = sc.ensemble.box;
  d.seed = sc.ensemble.seed;
  d.draws = 1000;
  report.results.push_back(k_independence_check(psi, f, d));
  report.results.push_back(positivity_check(psi, f, d));

  d.draws = 50;
  const double omega = std::max(max_frequency(psi), 1e-3);
  report.results.push_back(divergence_check(psi, f, d, 0.05 / omega));

  std::vector<FourVector> frob_points;
  for (std::size_t i = 0; i < 50; ++i) {
    CounterRng rng(sc.ensemble.seed ^ 0xf00dULL, i);
    const double s = d.s_lo + rng.uniform() * (d.s_hi - d.s_lo);
    frob_points.push_back(random_configuration(f, s, d.box, 1, rng).points.front());
  }
  report.results.push_back(frobenius_check(f, frob_points, 1e-3, 1e-8));
  report.results.push_back(frobenius_control_check(0.5, frob_points, 1e-3));

  // Start tuples: the scenario's own, or a spread across the box.
  std::vector<std::vector<ChartPoint>> starts = sc.integration.initial_points;
  if (starts.empty()) {
    for (int i = 1; i <= 3; ++i) {
      std::vector<ChartPoint> tuple;
      for (int k = 0; k < sc.particles; ++k) {
        ChartPoint xi{0.0, 0.0, 0.0};
        for (int a = 0; a < dims; ++a) {
          const auto ax = static_cast<std::size_t>(a);
          const double u = (i + 0.37 * k) / 4.0;
          xi[ax] = d.box.lo[ax] + (u - std::floor(u)) * (d.box.hi[ax] - d.box.lo[ax]);
        }
        tuple.push_back(xi);
      }
      starts.push_back(std::move(tuple));
    }
  }

  IntegratorSettings settings = integrator_settings(sc);
  settings.output_stride = 1;
  std::vector<std::vector<SpatialVector>> flat_starts;
  for (const auto& tuple : starts) flat_starts.emplace_back(tuple.begin(), tuple.end());
  report.results.push_back(
      flat_reduction_check(psi, sc.integration.s0, sc.integration.s1, flat_starts, settings, sc.integration.tolerance));

  std::vector<NParticleWavefunction> factors;
  for (int k = 0; k < sc.particles; ++k) factors.push_back(slot_superposition(psi, k));
  const Foliation curved = f.kind() == FoliationKind::GraphLeaf
                               ? f
                               : Foliation::graph_leaf(TanhProfile{0.3, 1.0}, sc.mode, unbounded_box());
  IntegratorSettings product_settings = settings;
  product_settings.node_threshold = 0.0;
  report.results.push_back(foliation_independence_check(factors, curved, sc.integration.s0, sc.integration.s1,
                                                        starts, product_settings, sc.integration.tolerance));
  return report;
}

json checks_to_json(const CheckReport& report, const Provenance& prov) {
  json doc;
  doc["schema"] = kChecksSchema;
  doc["scenario_hash"] = prov.scenario_hash;
  doc["seed"] = prov.seed;
  doc["passed"] = report.passed();
  json list = json::array();
  for (const auto& r : report.results) {
    list.push_back({{"name", r.name},
                    {"passed", r.passed},
                    {"max_residual", std::isfinite(r.max_residual) ? json(r.max_residual) : json(nullptr)},
                    {"threshold", r.threshold},
                    {"detail", r.detail}});
  }
  doc["checks"] = list;
  return doc;
}

CheckReport checks_from_json(const json& doc) {
  if (!doc.is_object() || doc.value("schema", "") != kChecksSchema) throw ValidationError("not a checks report");
  CheckReport report;
  try {
    for (const auto& item : doc.at("checks")) {
      CheckResult r;
      r.name = item.at("name").get<std::string>();
      r.passed = item.at("passed").get<bool>();
      r.max_residual = item.at("max_residual").is_null() ? INFINITY : item.at("max_residual").get<double>();
      r.threshold = item.at("threshold").get<double>();
      r.detail = item.at("detail").get<std::string>();
      report.results.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed checks report: ") + e.what());
  }
  return report;
}

}  // namespace hbd
