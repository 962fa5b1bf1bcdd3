#include "hbd/dynamics.hpp"

#include <cmath>
#include <sstream>

#include "hbd/currents.hpp"
#include "hbd/errors.hpp"

namespace hbd {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::NodeProximity:
      return "node_proximity";
    case EventKind::ValidityBreach:
      return "validity_breach";
  }
  return "unknown";
}

EventKind event_kind_from_string(std::string_view name) {
  if (name == "node_proximity") return EventKind::NodeProximity;
  if (name == "validity_breach") return EventKind::ValidityBreach;
  throw InvalidArgument("unknown event kind '" + std::string(name) + "'");
}

NConfiguration make_configuration(const Foliation& f, double s, std::span<const ChartPoint> chart) {
  NConfiguration c;
  c.s = s;
  c.points.reserve(chart.size());
  for (const auto& xi : chart) c.points.push_back(f.leaf_point(s, xi));
  return c;
}

void check_configuration(const Foliation& f, const NConfiguration& config) {
  for (std::size_t k = 0; k < config.points.size(); ++k) {
    const double off = std::abs(f.label(config.points[k]) - config.s);
    if (off > kSyncTolerance) {
      std::ostringstream msg;
      msg << "point " << k << " is off leaf s = " << config.s << " by " << off;
      throw InvalidArgument(msg.str());
    }
  }
}

std::vector<FourVector> hbd_velocity(const NParticleWavefunction& psi, const Foliation& f,
                                     const NConfiguration& config, double node_threshold) {
  if (static_cast<int>(config.points.size()) != psi.particles()) {
    throw InvalidArgument("configuration size must equal particle count");
  }
  std::vector<FourVector> normals;
  normals.reserve(config.points.size());
  for (const auto& x : config.points) normals.push_back(f.normal(x));

  const CurrentEvaluation cur = evaluate_currents(psi, config.points, normals);
  if (!(cur.density > node_threshold)) {
    std::ostringstream msg;
    msg << "rho = " << cur.density << " at s = " << config.s << " is below node threshold " << node_threshold;
    throw NodeProximity(msg.str(), config.s);
  }
  std::vector<FourVector> v(config.points.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    const FourVector& j = cur.currents[k];
    const double denom = minkowski_dot(f.gradient(config.points[k]), j);
    if (!(denom > 0.0)) {
      throw NodeProximity("degenerate guiding denominator", config.s);
    }
    v[k] = (1.0 / denom) * j;
  }
  return v;
}

NConfiguration rk4_step(const NParticleWavefunction& psi, const Foliation& f, const NConfiguration& config,
                        double ds, double node_threshold) {
  const std::size_t n = config.points.size();
  auto shifted = [&](const std::vector<FourVector>& dir, double frac) {
    NConfiguration c;
    c.s = config.s + frac * ds;
    c.points.resize(n);
    for (std::size_t k = 0; k < n; ++k) c.points[k] = config.points[k] + (frac * ds) * dir[k];
    return c;
  };

  const auto k1 = hbd_velocity(psi, f, config, node_threshold);
  const auto k2 = hbd_velocity(psi, f, shifted(k1, 0.5), node_threshold);
  const auto k3 = hbd_velocity(psi, f, shifted(k2, 0.5), node_threshold);
  const auto k4 = hbd_velocity(psi, f, shifted(k3, 1.0), node_threshold);

  NConfiguration next;
  next.s = config.s + ds;
  next.points.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    next.points[k] = config.points[k] + (ds / 6.0) * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
    // One Newton iteration for label(X + lambda v) = s along the last-stage direction.
    const double miss = next.s - f.label(next.points[k]);
    const double slope = minkowski_dot(f.gradient(next.points[k]), k4[k]);
    if (slope > 0.0) next.points[k] = next.points[k] + (miss / slope) * k4[k];
  }
  return next;
}

TrajectoryBundle integrate(const NParticleWavefunction& psi, const Foliation& f, const NConfiguration& initial,
                           double s_end, const IntegratorSettings& settings) {
  if (!(settings.step > 0.0)) throw InvalidArgument("integration step must be positive");
  if (settings.output_stride < 1) throw InvalidArgument("output stride must be at least 1");
  if (!(s_end >= initial.s)) throw InvalidArgument("backward integration is not supported");
  check_configuration(f, initial);

  const double span = s_end - initial.s;
  const auto steps = static_cast<long>(std::ceil(span / settings.step - 1e-9));
  TrajectoryBundle bundle;
  bundle.step = steps > 0 ? span / static_cast<double>(steps) : settings.step;
  bundle.configurations.push_back(initial);

  NConfiguration current = initial;
  for (long i = 1; i <= steps; ++i) {
    const double target = initial.s + static_cast<double>(i) * bundle.step;
    try {
      NConfiguration next = rk4_step(psi, f, current, target - current.s, settings.node_threshold);
      next.s = target;
      for (const auto& x : next.points) {
        if (!f.in_validity_region(f.chart_coordinates(x))) {
          throw ValidityBreach("trajectory left the validity region");
        }
      }
      current = std::move(next);
    } catch (const NodeProximity& e) {
      bundle.halt = TrajectoryEvent{e.s(), EventKind::NodeProximity, e.what()};
    } catch (const ValidityBreach& e) {
      bundle.halt = TrajectoryEvent{current.s, EventKind::ValidityBreach, e.what()};
    }
    if (bundle.halt) {
      if (bundle.configurations.back().s != current.s) bundle.configurations.push_back(current);
      return bundle;
    }
    if (i % settings.output_stride == 0 || i == steps) bundle.configurations.push_back(current);
  }
  return bundle;
}

namespace {

// Dense alpha_k^i = gamma_k^0 gamma_k^i, lifted to N-particle spin space.
std::vector<std::vector<CMatrix>> flat_alphas(SpinMode mode, int particles) {
  std::vector<std::vector<CMatrix>> alphas(static_cast<std::size_t>(particles));
  const GammaSet& g = standard_gammas(mode);
  for (int k = 0; k < particles; ++k) {
    for (int i = 1; i < spacetime_dims(mode); ++i) {
      const SpinOperator single(g[0] * g[i], 1, mode);
      alphas[static_cast<std::size_t>(k)].push_back(lift_to_particle(single, k, particles).matrix);
    }
  }
  return alphas;
}

std::vector<SpatialVector> flat_velocity(const NParticleWavefunction& psi,
                                         const std::vector<std::vector<CMatrix>>& alphas, double t,
                                         std::span<const SpatialVector> q, double node_threshold) {
  std::vector<FourVector> pts;
  pts.reserve(q.size());
  for (const auto& p : q) pts.push_back(FourVector{{t, p[0], p[1], p[2]}});
  const CVector value = psi.evaluate(pts).entries;
  const double rho = value.squaredNorm();
  if (!(rho > node_threshold)) throw NodeProximity("psi^dagger psi below node threshold", t);
  std::vector<SpatialVector> v(q.size());
  for (std::size_t k = 0; k < q.size(); ++k) {
    for (std::size_t i = 0; i < alphas[k].size(); ++i) {
      v[k][i] = value.dot(alphas[k][i] * value).real() / rho;
    }
  }
  return v;
}

std::vector<SpatialVector> flat_rk4(const NParticleWavefunction& psi, const std::vector<std::vector<CMatrix>>& alphas,
                                    double t, std::vector<SpatialVector> q, double h, double node_threshold) {
  const std::size_t n = q.size();
  auto moved = [&](const std::vector<SpatialVector>& dir, double frac) {
    std::vector<SpatialVector> r = q;
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < 3; ++i) r[k][i] += frac * h * dir[k][i];
    }
    return r;
  };
  const auto k1 = flat_velocity(psi, alphas, t, q, node_threshold);
  const auto k2 = flat_velocity(psi, alphas, t + 0.5 * h, moved(k1, 0.5), node_threshold);
  const auto k3 = flat_velocity(psi, alphas, t + 0.5 * h, moved(k2, 0.5), node_threshold);
  const auto k4 = flat_velocity(psi, alphas, t + h, moved(k3, 1.0), node_threshold);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < 3; ++i) {
      q[k][i] += h / 6.0 * (k1[k][i] + 2.0 * k2[k][i] + 2.0 * k3[k][i] + k4[k][i]);
    }
  }
  return q;
}

}  // namespace

std::vector<SpatialVector> bd_flat_step(const NParticleWavefunction& psi, double t, std::span<const SpatialVector> q,
                                        double dt, double node_threshold) {
  if (static_cast<int>(q.size()) != psi.particles()) {
    throw InvalidArgument("position tuple length must equal particle count");
  }
  return flat_rk4(psi, flat_alphas(psi.mode(), psi.particles()), t, {q.begin(), q.end()}, dt, node_threshold);
}

std::vector<SpatialVector> bd_flat_velocity(const NParticleWavefunction& psi, double t,
                                            std::span<const SpatialVector> positions, double node_threshold) {
  if (static_cast<int>(positions.size()) != psi.particles()) {
    throw InvalidArgument("position tuple length must equal particle count");
  }
  return flat_velocity(psi, flat_alphas(psi.mode(), psi.particles()), t, positions, node_threshold);
}

FlatTrajectory bd_flat_integrate(const NParticleWavefunction& psi, double t0,
                                 std::span<const SpatialVector> initial, double t_end,
                                 const IntegratorSettings& settings) {
  if (!(settings.step > 0.0)) throw InvalidArgument("integration step must be positive");
  if (static_cast<int>(initial.size()) != psi.particles()) {
    throw InvalidArgument("position tuple length must equal particle count");
  }
  const auto alphas = flat_alphas(psi.mode(), psi.particles());
  const double span = t_end - t0;
  const auto steps = static_cast<long>(std::ceil(span / settings.step - 1e-9));
  const double h = steps > 0 ? span / static_cast<double>(steps) : settings.step;

  FlatTrajectory out;
  std::vector<SpatialVector> q(initial.begin(), initial.end());
  out.times.push_back(t0);
  out.positions.push_back(q);

  for (long s = 1; s <= steps; ++s) {
    q = flat_rk4(psi, alphas, t0 + static_cast<double>(s - 1) * h, q, h, settings.node_threshold);
    if (s % settings.output_stride == 0 || s == steps) {
      out.times.push_back(t0 + static_cast<double>(s) * h);
      out.positions.push_back(q);
    }
  }
  return out;
}

}  // namespace hbd
