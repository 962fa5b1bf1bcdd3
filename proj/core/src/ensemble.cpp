#include "hbd/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hbd/currents.hpp"
#include "hbd/errors.hpp"
#include "hbd/parallel.hpp"
#include "hbd/quadrature.hpp"
#include "hbd/random.hpp"

namespace hbd {

namespace {

const FourVector kRestNormal{{1.0, 0.0, 0.0, 0.0}};

// Visits every point of an n_0 x n_1 x ... grid; idx holds the current index tuple.
template <class Visit>
void for_each_grid_point(std::span<const int> counts, Visit&& visit) {
  const std::size_t dims = counts.size();
  std::vector<int> idx(dims, 0);
  for (int c : counts) {
    if (c < 1) return;
  }
  while (true) {
    visit(std::span<const int>(idx));
    std::size_t a = dims;
    while (a > 0) {
      --a;
      if (++idx[a] < counts[a]) break;
      idx[a] = 0;
      if (a == 0) return;
    }
    if (dims == 0) return;
  }
}

}  // namespace

LeafDensity::LeafDensity(NParticleWavefunction psi, Foliation foliation, double s, SamplingBox box,
                         int quadrature_order, DensityModel model)
    : psi_(std::move(psi)),
      foliation_(std::move(foliation)),
      s_(s),
      box_(box),
      order_(quadrature_order),
      model_(model) {
  if (foliation_.mode() != psi_.mode()) throw InvalidArgument("foliation and wavefunction modes differ");
  if (order_ < 1) throw InvalidArgument("quadrature order must be positive");
  for (int a = 0; a < chart_dims(); ++a) {
    const auto i = static_cast<std::size_t>(a);
    if (!(box_.hi[i] > box_.lo[i])) throw InvalidArgument("sampling box must have hi > lo");
  }
}

double LeafDensity::axis_lo(int joint_axis) const {
  return box_.lo[static_cast<std::size_t>(joint_axis % chart_dims())];
}

double LeafDensity::axis_hi(int joint_axis) const {
  return box_.hi[static_cast<std::size_t>(joint_axis % chart_dims())];
}

std::vector<ChartPoint> LeafDensity::split(std::span<const double> joint) const {
  const int d = chart_dims();
  if (static_cast<int>(joint.size()) != joint_dims()) throw InvalidArgument("joint coordinate length mismatch");
  std::vector<ChartPoint> out(static_cast<std::size_t>(psi_.particles()), ChartPoint{0.0, 0.0, 0.0});
  for (int k = 0; k < psi_.particles(); ++k) {
    for (int a = 0; a < d; ++a) {
      out[static_cast<std::size_t>(k)][static_cast<std::size_t>(a)] = joint[static_cast<std::size_t>(k * d + a)];
    }
  }
  return out;
}

double LeafDensity::weight(std::span<const double> joint) const {
  const auto chart = split(joint);
  const std::size_t n = chart.size();
  std::vector<FourVector> points(n), normals(n);
  double area = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    points[k] = foliation_.leaf_point(s_, chart[k]);
    normals[k] = model_ == DensityModel::Equilibrium ? foliation_.normal(points[k]) : kRestNormal;
    area *= foliation_.area_element(s_, chart[k]);
  }
  const double rho = density_from_value(psi_.evaluate(points), normals);
  return std::max(0.0, rho) * area;
}

double LeafDensity::integrate(std::span<const double> lo, std::span<const double> hi,
                              std::span<const int> orders) const {
  const auto dims = static_cast<std::size_t>(joint_dims());
  if (lo.size() != dims || hi.size() != dims || orders.size() != dims) {
    throw InvalidArgument("integration bounds must match the joint dimension");
  }
  std::vector<QuadratureRule> rules;
  rules.reserve(dims);
  for (std::size_t a = 0; a < dims; ++a) rules.push_back(gauss_legendre(orders[a], lo[a], hi[a]));

  double total = 0.0;
  std::vector<double> x(dims);
  for_each_grid_point(orders, [&](std::span<const int> idx) {
    double w = 1.0;
    for (std::size_t a = 0; a < dims; ++a) {
      const auto i = static_cast<std::size_t>(idx[a]);
      x[a] = rules[a].nodes[i];
      w *= rules[a].weights[i];
    }
    total += w * weight(x);
  });
  return total;
}

double LeafDensity::normalization() const {
  const auto dims = static_cast<std::size_t>(joint_dims());
  std::vector<double> lo(dims), hi(dims);
  for (std::size_t a = 0; a < dims; ++a) {
    lo[a] = axis_lo(static_cast<int>(a));
    hi[a] = axis_hi(static_cast<int>(a));
  }
  const std::vector<int> orders(dims, order_);
  return integrate(lo, hi, orders);
}

std::vector<NConfiguration> sample_leaf(const LeafDensity& density, std::size_t count, std::uint64_t seed,
                                        const SamplingOptions& options, SamplingStats* stats) {
  if (count < 1) throw InvalidArgument("sample count must be at least 1");
  const int dims = density.joint_dims();
  const auto ud = static_cast<std::size_t>(dims);
  std::vector<double> lo(ud), width(ud);
  for (int a = 0; a < dims; ++a) {
    lo[static_cast<std::size_t>(a)] = density.axis_lo(a);
    width[static_cast<std::size_t>(a)] = density.axis_hi(a) - density.axis_lo(a);
  }

  int grid = options.envelope_grid;
  if (grid <= 0) {
    grid = static_cast<int>(std::floor(std::pow(2.0e4, 1.0 / dims)));
    grid = std::clamp(grid, 8, 256);
  }
  double grid_max = 0.0;
  double boundary_max = 0.0;
  {
    const std::vector<int> counts(ud, grid);
    std::vector<double> x(ud);
    for_each_grid_point(std::span<const int>(counts), [&](std::span<const int> idx) {
      bool boundary = false;
      for (std::size_t a = 0; a < ud; ++a) {
        x[a] = lo[a] + width[a] * idx[a] / (grid - 1);
        boundary = boundary || idx[a] == 0 || idx[a] == grid - 1;
      }
      const double w = density.weight(x);
      grid_max = std::max(grid_max, w);
      if (boundary) boundary_max = std::max(boundary_max, w);
    });
  }
  if (!(grid_max > 0.0)) throw ValidationError("density vanishes on the sampling grid");
  if (!density.box().periodic && boundary_max >= 1e-6 * grid_max) {
    std::ostringstream msg;
    msg << "boundary weight " << boundary_max << " exceeds 1e-6 of the maximum " << grid_max;
    throw BoundaryLeak(msg.str());
  }

  double envelope = options.envelope_factor * grid_max;
  std::vector<NConfiguration> out(count);
  std::vector<double> breach(count);
  std::vector<std::uint64_t> proposals(count);
  const Foliation& f = density.foliation();

  for (int pass = 0; pass < 8; ++pass) {
    std::fill(breach.begin(), breach.end(), 0.0);
    parallel_for(count, options.workers, [&](std::size_t i) {
      CounterRng rng(seed, i);
      std::vector<double> x(ud);
      for (std::uint64_t attempt = 0; attempt < options.max_attempts; ++attempt) {
        for (std::size_t a = 0; a < ud; ++a) x[a] = lo[a] + width[a] * rng.uniform();
        const double w = density.weight(x);
        const double u = rng.uniform();
        if (w > envelope) {
          breach[i] = w;
          proposals[i] = attempt + 1;
          return;
        }
        if (u * envelope < w) {
          out[i] = make_configuration(f, density.s(), density.split(x));
          proposals[i] = attempt + 1;
          return;
        }
      }
      throw ValidationError("rejection sampler exhausted its attempt budget");
    });
    const double worst = *std::max_element(breach.begin(), breach.end());
    if (!(worst > 0.0)) {
      if (stats != nullptr) {
        stats->envelope = envelope;
        stats->restarts = pass;
        stats->proposals = 0;
        for (auto p : proposals) stats->proposals += p;
      }
      return out;
    }
    envelope = options.envelope_factor * worst;
  }
  throw EnvelopeBreach("rejection envelope kept being exceeded after repeated rescans");
}

std::vector<TrajectoryBundle> propagate(const NParticleWavefunction& psi, const Foliation& f,
                                        std::span<const NConfiguration> initial, double s_end,
                                        const IntegratorSettings& settings, int workers) {
  std::vector<TrajectoryBundle> out(initial.size());
  parallel_for(initial.size(), workers,
               [&](std::size_t i) { out[i] = integrate(psi, f, initial[i], s_end, settings); });
  return out;
}

CrossingSet crossings(std::span<const TrajectoryBundle> bundles, const Foliation& f, double s_target) {
  constexpr double eps = 1e-12;
  CrossingSet set;
  set.samples.reserve(bundles.size());
  for (std::size_t t = 0; t < bundles.size(); ++t) {
    const auto& b = bundles[t];
    if (b.configurations.empty()) throw InvalidArgument("empty trajectory bundle");
    if (s_target < b.s_begin() - eps) throw InvalidArgument("s_target precedes the start of a trajectory");
    if (s_target > b.s_end() + eps) {
      if (!b.halted()) throw InvalidArgument("s_target lies beyond an unhalted trajectory");
      ++set.excluded;
      continue;
    }
    const auto& cfgs = b.configurations;
    auto upper = std::lower_bound(cfgs.begin(), cfgs.end(), s_target,
                                  [](const NConfiguration& c, double s) { return c.s < s; });
    if (upper == cfgs.end()) upper = std::prev(cfgs.end());
    CrossingSample sample;
    sample.trajectory = t;
    sample.s = s_target;
    const std::size_t n = upper->points.size();
    sample.chart.resize(n);
    if (std::abs(upper->s - s_target) <= eps || upper == cfgs.begin()) {
      for (std::size_t k = 0; k < n; ++k) sample.chart[k] = f.wrap(f.chart_coordinates(upper->points[k]));
    } else {
      const auto lower = std::prev(upper);
      const double w = (s_target - lower->s) / (upper->s - lower->s);
      for (std::size_t k = 0; k < n; ++k) {
        const ChartPoint a = f.chart_coordinates(lower->points[k]);
        const ChartPoint c = f.chart_coordinates(upper->points[k]);
        ChartPoint xi;
        for (std::size_t i = 0; i < 3; ++i) xi[i] = a[i] + w * (c[i] - a[i]);
        sample.chart[k] = f.wrap(xi);
      }
    }
    set.samples.push_back(std::move(sample));
  }
  return set;
}

CrossingSet crossings_from_configurations(std::span<const NConfiguration> configs, const Foliation& f) {
  CrossingSet set;
  set.samples.reserve(configs.size());
  for (std::size_t t = 0; t < configs.size(); ++t) {
    CrossingSample sample;
    sample.trajectory = t;
    sample.s = configs[t].s;
    for (const auto& x : configs[t].points) sample.chart.push_back(f.wrap(f.chart_coordinates(x)));
    set.samples.push_back(std::move(sample));
  }
  return set;
}

int default_bins(std::size_t samples, int dims) {
  const double b = std::pow(static_cast<double>(samples), 1.0 / (2.0 + dims));
  return std::max(2, static_cast<int>(std::lround(b)));
}

EquivarianceReport equivariance_test(const CrossingSet& set, const LeafDensity& density,
                                     const EquivarianceOptions& options) {
  const int dims = density.joint_dims();
  const auto ud = static_cast<std::size_t>(dims);
  const int bins = options.bins_per_axis > 0 ? options.bins_per_axis : default_bins(set.samples.size(), dims);
  const int cd = density.chart_dims();

  EquivarianceReport report;
  report.samples = set.samples.size();
  report.excluded = set.excluded;
  report.bins_per_axis = bins;
  report.dims = dims;
  report.tv_threshold = options.thresholds.tv;
  for (int a = 0; a < dims; ++a) {
    report.lo.push_back(density.axis_lo(a));
    report.hi.push_back(density.axis_hi(a));
  }
  if (set.samples.empty()) throw InvalidArgument("equivariance test needs at least one sample");
  const double m = static_cast<double>(set.samples.size());
  report.ks_threshold = options.thresholds.ks_coefficient / std::sqrt(m);

  std::size_t total_bins = 1;
  for (int a = 0; a < dims; ++a) total_bins *= static_cast<std::size_t>(bins);

  // Joint coordinates of every sample.
  std::vector<std::vector<double>> joint(set.samples.size(), std::vector<double>(ud));
  for (std::size_t i = 0; i < set.samples.size(); ++i) {
    const auto& chart = set.samples[i].chart;
    if (static_cast<int>(chart.size()) * cd != dims) throw InvalidArgument("crossing sample has wrong arity");
    for (int a = 0; a < dims; ++a) {
      joint[i][static_cast<std::size_t>(a)] =
          chart[static_cast<std::size_t>(a / cd)][static_cast<std::size_t>(a % cd)];
    }
  }

  // Empirical histogram.
  report.counts.assign(total_bins, 0);
  for (const auto& x : joint) {
    std::size_t flat = 0;
    bool inside = true;
    for (std::size_t a = 0; a < ud; ++a) {
      const double u = (x[a] - report.lo[a]) / (report.hi[a] - report.lo[a]);
      if (u < 0.0 || u > 1.0) {
        inside = false;
        break;
      }
      const int b = std::min(bins - 1, static_cast<int>(u * bins));
      flat = flat * static_cast<std::size_t>(bins) + static_cast<std::size_t>(b);
    }
    if (inside) {
      ++report.counts[flat];
    } else {
      ++report.outside;
    }
  }

  // Theoretical bin masses.
  report.masses.assign(total_bins, 0.0);
  {
    const std::vector<int> counts(ud, bins);
    const std::vector<int> orders(ud, options.bin_quadrature_order);
    std::vector<double> blo(ud), bhi(ud);
    std::size_t flat = 0;
    for_each_grid_point(std::span<const int>(counts), [&](std::span<const int> idx) {
      for (std::size_t a = 0; a < ud; ++a) {
        const double w = (report.hi[a] - report.lo[a]) / bins;
        blo[a] = report.lo[a] + w * idx[a];
        bhi[a] = blo[a] + w;
      }
      report.masses[flat++] = density.integrate(blo, bhi, orders);
    });
    double total = 0.0;
    for (double v : report.masses) total += v;
    if (!(total > 0.0)) throw ValidationError("theoretical density has zero mass in the box");
    for (double& v : report.masses) v /= total;
  }

  double tv = static_cast<double>(report.outside) / m;
  double noise = 0.0;
  for (std::size_t b = 0; b < total_bins; ++b) {
    const double p = report.masses[b];
    tv += std::abs(static_cast<double>(report.counts[b]) / m - p);
    noise += std::sqrt(2.0 * p * (1.0 - p) / (std::numbers::pi * m));
  }
  report.tv = 0.5 * tv;
  report.expected_tv_noise = 0.5 * noise;

  // Per-axis KS against the marginal CDF, tabulated on panel edges.
  const int panels = std::max(1, options.cdf_panels);
  report.ks.resize(ud);
  for (std::size_t axis = 0; axis < ud; ++axis) {
    std::vector<double> plo(report.lo), phi(report.hi);
    std::vector<int> orders(ud, density.quadrature_order());
    orders[axis] = options.cdf_panel_order;
    const double pw = (report.hi[axis] - report.lo[axis]) / panels;
    std::vector<double> cdf(static_cast<std::size_t>(panels) + 1, 0.0);
    for (int p = 0; p < panels; ++p) {
      plo[axis] = report.lo[axis] + pw * p;
      phi[axis] = plo[axis] + pw;
      cdf[static_cast<std::size_t>(p) + 1] = cdf[static_cast<std::size_t>(p)] + density.integrate(plo, phi, orders);
    }
    const double total = cdf.back();
    for (double& c : cdf) c /= total;
    auto marginal_cdf = [&](double x) {
      const double u = (x - report.lo[axis]) / pw;
      if (u <= 0.0) return 0.0;
      if (u >= panels) return 1.0;
      const auto p = static_cast<std::size_t>(u);
      const double frac = u - static_cast<double>(p);
      return cdf[p] + frac * (cdf[p + 1] - cdf[p]);
    };
    std::vector<double> values;
    values.reserve(joint.size());
    for (const auto& x : joint) values.push_back(x[axis]);
    std::sort(values.begin(), values.end());
    double d = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double fx = marginal_cdf(values[i]);
      d = std::max({d, (static_cast<double>(i) + 1.0) / m - fx, fx - static_cast<double>(i) / m});
    }
    report.ks[axis] = d;
  }

  report.passed = report.tv < report.tv_threshold;
  for (double k : report.ks) report.passed = report.passed && k < report.ks_threshold;
  return report;
}

std::vector<double> flat_continuity_residual(const NParticleWavefunction& psi, double t,
                                             std::span<const std::vector<SpatialVector>> grid, double h_t,
                                             double h_x) {
  if (!(h_t > 0.0) || !(h_x > 0.0)) throw InvalidArgument("finite-difference steps must be positive");
  const int n = psi.particles();
  const SpinMode mode = psi.mode();
  const GammaSet& g = standard_gammas(mode);
  std::vector<CMatrix> alpha;
  for (int i = 1; i < spacetime_dims(mode); ++i) alpha.push_back(g[0] * g[i]);

  auto eval = [&](double time, const std::vector<SpatialVector>& q) {
    std::vector<FourVector> pts;
    for (const auto& p : q) pts.push_back(FourVector{{time, p[0], p[1], p[2]}});
    return psi.evaluate(pts).entries;
  };

  std::vector<double> out;
  out.reserve(grid.size());
  for (const auto& q : grid) {
    if (static_cast<int>(q.size()) != n) throw InvalidArgument("grid tuple length must equal N");
    const double drho = (eval(t + h_t, q).squaredNorm() - eval(t - h_t, q).squaredNorm()) / (2.0 * h_t);
    double div = 0.0;
    for (int k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < alpha.size(); ++i) {
        auto qp = q, qm = q;
        qp[static_cast<std::size_t>(k)][i] += h_x;
        qm[static_cast<std::size_t>(k)][i] -= h_x;
        const CVector vp = eval(t, qp), vm = eval(t, qm);
        const double jp = vp.dot(apply_on_particle(alpha[i], k, n, vp)).real();
        const double jm = vm.dot(apply_on_particle(alpha[i], k, n, vm)).real();
        div += (jp - jm) / (2.0 * h_x);
      }
    }
    out.push_back(drho + div);
  }
  return out;
}

}  // namespace hbd
