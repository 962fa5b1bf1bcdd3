#include "hbd/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hbd/currents.hpp"
#include "hbd/errors.hpp"

namespace hbd {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& what) { throw ValidationError(what); }

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) fail(where + ": missing '" + key + "'");
  return obj.at(key);
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where + ": expected a number");
  return v.get<double>();
}

template <class T>
T value_or(const json& obj, const char* key, T fallback) {
  if (!obj.is_object() || !obj.contains(key) || obj.at(key).is_null()) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(std::string("field '") + key + "': " + e.what());
  }
}

Complex complex_value(const json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (!v.is_array() || v.size() != 2) fail(where + ": expected [re, im]");
  return {number(v[0], where), number(v[1], where)};
}

ChartPoint chart_point(const json& v, int dims, const std::string& where) {
  ChartPoint p{0.0, 0.0, 0.0};
  if (v.is_number() && dims == 1) {
    p[0] = v.get<double>();
    return p;
  }
  if (!v.is_array() || static_cast<int>(v.size()) != dims) {
    fail(where + ": expected " + std::to_string(dims) + " chart coordinate(s)");
  }
  for (int i = 0; i < dims; ++i) p[static_cast<std::size_t>(i)] = number(v[static_cast<std::size_t>(i)], where);
  return p;
}

PlaneWaveMode parse_mode(const json& v, double mass, SpinMode mode, const std::string& where) {
  const json& p = require(v, "p", where);
  SpatialVector momentum{0.0, 0.0, 0.0};
  const int dims = spatial_dims(mode);
  if (p.is_number() && dims == 1) {
    momentum[0] = p.get<double>();
  } else {
    if (!p.is_array() || static_cast<int>(p.size()) != dims) fail(where + ": momentum has wrong length");
    for (int i = 0; i < dims; ++i) momentum[static_cast<std::size_t>(i)] = number(p[static_cast<std::size_t>(i)], where);
  }
  const std::string sign = value_or<std::string>(v, "sign", "+");
  if (sign != "+" && sign != "-") fail(where + ": sign must be '+' or '-'");
  const int spin = value_or<int>(v, "spin", 0);
  try {
    return make_mode(momentum, mass, sign == "+" ? EnergySign::Positive : EnergySign::Negative, spin, mode);
  } catch (const InvalidArgument& e) {
    fail(where + ": " + e.what());
  }
}

std::vector<WaveTerm> parse_terms(const json& wf, int particles, double mass, SpinMode mode) {
  const json& terms = require(wf, "terms", "wavefunction");
  if (!terms.is_array() || terms.empty()) fail("wavefunction: 'terms' must be a nonempty array");
  std::vector<WaveTerm> out;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const std::string where = "wavefunction.terms[" + std::to_string(t) + "]";
    const json& term = terms[t];
    const Complex c = term.contains("coefficient") ? complex_value(term.at("coefficient"), where) : Complex{1.0, 0.0};
    if (term.contains("modes")) {
      const json& modes = term.at("modes");
      if (!modes.is_array() || static_cast<int>(modes.size()) != particles) {
        fail(where + ": needs exactly one mode per particle");
      }
      WaveTerm w;
      w.coefficient = c;
      for (const auto& m : modes) w.modes.push_back(parse_mode(m, mass, mode, where));
      out.push_back(std::move(w));
    } else if (term.contains("factors")) {
      const json& factors = term.at("factors");
      if (!factors.is_array() || static_cast<int>(factors.size()) != particles) {
        fail(where + ": needs exactly one factor per particle");
      }
      // Expand the product of superpositions into explicit terms.
      std::vector<WaveTerm> partial{WaveTerm{c, {}}};
      for (const auto& factor : factors) {
        if (!factor.is_array() || factor.empty()) fail(where + ": each factor must be a nonempty array");
        std::vector<WaveTerm> next;
        for (const auto& prev : partial) {
          for (const auto& entry : factor) {
            WaveTerm w = prev;
            w.coefficient *= entry.contains("amplitude") ? complex_value(entry.at("amplitude"), where)
                                                         : Complex{1.0, 0.0};
            w.modes.push_back(parse_mode(require(entry, "mode", where), mass, mode, where));
            next.push_back(std::move(w));
          }
        }
        partial = std::move(next);
      }
      out.insert(out.end(), partial.begin(), partial.end());
    } else {
      fail(where + ": needs 'modes' or 'factors'");
    }
  }
  return out;
}

Foliation parse_foliation(const json& fb, SpinMode mode) {
  const std::string kind = require(fb, "kind", "foliation").get<std::string>();
  const int dims = spatial_dims(mode);
  ValidityBox box;
  if (fb.contains("box")) {
    box.lo = chart_point(require(fb.at("box"), "lo", "foliation.box"), dims, "foliation.box.lo");
    box.hi = chart_point(require(fb.at("box"), "hi", "foliation.box"), dims, "foliation.box.hi");
  }
  if (fb.contains("period") && !fb.at("period").is_null()) box.period = number(fb.at("period"), "foliation.period");

  Foliation f = Foliation::flat_time(mode, ValidityBox{});
  try {
    if (kind == "flat_time") {
      f = Foliation::flat_time(mode, box);
    } else if (kind == "constant_normal") {
      const json& n = require(fb, "normal", "foliation");
      if (!n.is_array() || n.size() != 4) fail("foliation.normal: expected 4 components");
      FourVector v;
      for (std::size_t i = 0; i < 4; ++i) v[i] = number(n[i], "foliation.normal");
      f = Foliation::constant_normal(v, mode, box);
    } else if (kind == "graph_leaf") {
      const json& p = require(fb, "profile", "foliation");
      const std::string family = require(p, "family", "foliation.profile").get<std::string>();
      if (family == "tanh") {
        f = Foliation::graph_leaf(TanhProfile{number(require(p, "amplitude", "profile"), "amplitude"),
                                              number(require(p, "rate", "profile"), "rate")},
                                  mode, box);
      } else if (family == "sin_gauss") {
        SinGaussProfile sg;
        sg.amplitude = number(require(p, "amplitude", "profile"), "amplitude");
        sg.wavenumber = number(require(p, "wavenumber", "profile"), "wavenumber");
        if (p.contains("width") && !p.at("width").is_null()) sg.width = number(p.at("width"), "width");
        f = Foliation::graph_leaf(sg, mode, box);
      } else {
        fail("foliation.profile: unknown family '" + family + "'");
      }
    } else {
      fail("foliation: unknown kind '" + kind + "'");
    }
  } catch (const InvalidArgument& e) {
    fail(std::string("foliation: ") + e.what());
  }
  if (fb.contains("relabel")) {
    const json& r = fb.at("relabel");
    const double scale = value_or<double>(r, "scale", 1.0);
    if (!(scale > 0.0)) fail("foliation.relabel: scale must be positive");
    f = f.relabeled(scale, value_or<double>(r, "offset", 0.0));
  }
  return f;
}

SamplingBox parse_sampling_box(const json& b, int dims, const ValidityBox& fallback) {
  SamplingBox box;
  box.lo = fallback.lo;
  box.hi = fallback.hi;
  box.periodic = fallback.period.has_value();
  if (b.is_object()) {
    if (b.contains("lo")) box.lo = chart_point(b.at("lo"), dims, "ensemble.box.lo");
    if (b.contains("hi")) box.hi = chart_point(b.at("hi"), dims, "ensemble.box.hi");
    box.periodic = value_or<bool>(b, "periodic", box.periodic);
  }
  return box;
}

}  // namespace

std::string scenario_hash(const json& doc) {
  const std::string text = doc.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Scenario parse_scenario(const json& doc) {
  if (!doc.is_object()) fail("scenario must be a JSON object");
  const std::string schema = value_or<std::string>(doc, "schema", kScenarioSchema);
  if (schema != kScenarioSchema) fail("unsupported scenario schema '" + schema + "'");

  const std::string mode_name = value_or<std::string>(doc, "mode", "D11");
  if (mode_name != "D11" && mode_name != "D31") fail("mode must be 'D11' or 'D31'");
  const SpinMode mode = mode_name == "D31" ? SpinMode::D31 : SpinMode::D11;
  const int dims = spatial_dims(mode);
  const double mass = value_or<double>(doc, "mass", 1.0);
  if (!(mass >= 0.0)) fail("mass must be non-negative");
  const int particles = value_or<int>(doc, "particles", 1);
  if (particles < 1 || particles > 4) fail("particles must be between 1 and 4");

  auto terms = parse_terms(require(doc, "wavefunction", "scenario"), particles, mass, mode);
  NParticleWavefunction psi(particles, mass, mode, std::move(terms));
  if (!psi.has_nonzero_coefficient()) fail("wavefunction: every coefficient is zero");

  const json& fb = require(doc, "foliation", "scenario");
  Foliation foliation = parse_foliation(fb, mode);
  const int scan_resolution = value_or<int>(fb, "scan_resolution", 201);
  if (scan_resolution < 1) fail("foliation.scan_resolution must be positive");
  const ValidityReport scan = foliation.validity_scan(scan_resolution);
  if (!scan.passed) {
    std::ostringstream msg;
    msg << "foliation is not space-like in its validity box: margin " << scan.min_margin << " at xi = "
        << scan.worst_point[0];
    throw ValidationError(msg.str(), "validity_breach");
  }

  IntegrationBlock ib;
  const json ij = doc.value("integration", json::object());
  ib.s0 = value_or<double>(ij, "s0", ib.s0);
  ib.s1 = value_or<double>(ij, "s1", ib.s1);
  ib.step = value_or<double>(ij, "step", ib.step);
  ib.node_threshold_factor = value_or<double>(ij, "node_threshold_factor", ib.node_threshold_factor);
  ib.tolerance = value_or<double>(ij, "tolerance", ib.tolerance);
  ib.output_stride = value_or<int>(ij, "output_stride", ib.output_stride);
  if (!(ib.s1 > ib.s0)) fail("integration: s1 must exceed s0");
  if (!(ib.step > 0.0)) fail("integration: step must be positive");
  if (ib.output_stride < 1) fail("integration: output_stride must be at least 1");
  if (!(ib.node_threshold_factor >= 0.0)) fail("integration: node_threshold_factor must be non-negative");
  if (ij.contains("initial_points")) {
    for (const auto& tuple : ij.at("initial_points")) {
      if (!tuple.is_array() || static_cast<int>(tuple.size()) != particles) {
        fail("integration.initial_points: each entry needs one chart point per particle");
      }
      std::vector<ChartPoint> pts;
      for (const auto& p : tuple) {
        const ChartPoint xi = chart_point(p, dims, "integration.initial_points");
        if (!foliation.in_validity_region(xi)) fail("integration.initial_points: point outside the validity box");
        pts.push_back(xi);
      }
      ib.initial_points.push_back(std::move(pts));
    }
  }

  EnsembleBlock eb;
  const json ej = doc.value("ensemble", json::object());
  const auto count = value_or<long long>(ej, "M", static_cast<long long>(eb.count));
  if (count < 1) fail("ensemble: M must be at least 1");
  eb.count = static_cast<std::size_t>(count);
  eb.seed = value_or<std::uint64_t>(ej, "seed", eb.seed);
  eb.box = parse_sampling_box(ej.value("box", json()), dims, foliation.box());
  eb.bins = value_or<int>(ej, "bins", eb.bins);
  eb.quadrature_order = value_or<int>(ej, "quadrature_order", eb.quadrature_order);
  eb.bin_quadrature_order = value_or<int>(ej, "bin_quadrature_order", eb.bin_quadrature_order);
  eb.tv_threshold = value_or<double>(ej, "tv_threshold", eb.tv_threshold);
  eb.ks_coefficient = value_or<double>(ej, "ks_coefficient", eb.ks_coefficient);
  eb.negative_control = value_or<bool>(ej, "negative_control", eb.negative_control);
  if (eb.quadrature_order < 1 || eb.bin_quadrature_order < 1) fail("ensemble: quadrature orders must be positive");
  for (int i = 0; i < dims; ++i) {
    const auto a = static_cast<std::size_t>(i);
    if (!(eb.box.hi[a] > eb.box.lo[a])) fail("ensemble.box: hi must exceed lo");
  }
  if (eb.box.periodic && !foliation.box().period) fail("ensemble.box: periodic box needs a periodic foliation");
  if (eb.box.periodic) {
    const double period = *foliation.box().period;
    for (const auto& term : psi.terms()) {
      for (const auto& m : term.modes) {
        for (int i = 0; i < dims; ++i) {
          const double cycles = m.momentum[static_cast<std::size_t>(i)] * period / (2.0 * std::numbers::pi);
          if (std::abs(cycles - std::round(cycles)) > 1e-9) {
            fail("wavefunction: momentum not commensurate with the foliation period");
          }
        }
      }
    }
  }

  std::string out_dir = "out";
  if (doc.contains("output")) out_dir = value_or<std::string>(doc.at("output"), "directory", out_dir);

  return Scenario{
      .name = value_or<std::string>(doc, "name", "scenario"),
      .mode = mode,
      .mass = mass,
      .particles = particles,
      .wavefunction = std::move(psi),
      .foliation = std::move(foliation),
      .scan_resolution = scan_resolution,
      .integration = std::move(ib),
      .ensemble = eb,
      .output_directory = out_dir,
      .hash = scenario_hash(doc),
  };
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file " + path.string(), "io_error");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("scenario is not valid JSON: ") + e.what(), "parse_error");
  }
  return parse_scenario(doc);
}

double node_threshold(const Scenario& sc) {
  const int dims = spatial_dims(sc.mode);
  const int joint = dims * sc.particles;
  const int grid = std::clamp(static_cast<int>(std::floor(std::pow(2.0e4, 1.0 / joint))), 3, 64);
  const Foliation& f = sc.foliation;
  const double s = sc.integration.s0;

  std::vector<int> idx(static_cast<std::size_t>(joint), 0);
  std::vector<FourVector> points(static_cast<std::size_t>(sc.particles));
  std::vector<FourVector> normals(points.size());
  double best = 0.0;
  while (true) {
    for (int k = 0; k < sc.particles; ++k) {
      ChartPoint xi{0.0, 0.0, 0.0};
      for (int a = 0; a < dims; ++a) {
        const auto ax = static_cast<std::size_t>(a);
        const double u = static_cast<double>(idx[static_cast<std::size_t>(k * dims + a)]) / (grid - 1);
        xi[ax] = sc.ensemble.box.lo[ax] + u * (sc.ensemble.box.hi[ax] - sc.ensemble.box.lo[ax]);
      }
      points[static_cast<std::size_t>(k)] = f.leaf_point(s, xi);
      normals[static_cast<std::size_t>(k)] = f.normal(points[static_cast<std::size_t>(k)]);
    }
    best = std::max(best, density_from_value(sc.wavefunction.evaluate(points), normals));
    int a = joint - 1;
    while (a >= 0 && ++idx[static_cast<std::size_t>(a)] == grid) idx[static_cast<std::size_t>(a--)] = 0;
    if (a < 0) break;
  }
  return sc.integration.node_threshold_factor * best;
}

IntegratorSettings integrator_settings(const Scenario& sc) {
  IntegratorSettings s;
  s.step = sc.integration.step;
  s.node_threshold = node_threshold(sc);
  s.output_stride = sc.integration.output_stride;
  return s;
}

LeafDensity leaf_density(const Scenario& sc, double s, DensityModel model) {
  return LeafDensity(sc.wavefunction, sc.foliation, s, sc.ensemble.box, sc.ensemble.quadrature_order, model);
}

std::vector<NConfiguration> initial_configurations(const Scenario& sc) {
  std::vector<NConfiguration> out;
  for (const auto& tuple : sc.integration.initial_points) {
    out.push_back(make_configuration(sc.foliation, sc.integration.s0, tuple));
  }
  return out;
}

}  // namespace hbd
