#include "hbd/output.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "hbd/errors.hpp"

namespace hbd {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

void write_header(std::ostream& out, const Provenance& prov) {
  out << "# scenario_hash=" << prov.scenario_hash << ",seed=" << prov.seed << '\n';
}

std::vector<std::string> split_fields(const std::string& line, std::size_t max_fields = 0) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    if (max_fields != 0 && fields.size() + 1 == max_fields) {
      fields.push_back(line.substr(start));
      break;
    }
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw ValidationError("bad number '" + s + "'");
  return v;
}

template <class Int>
Int parse_int(const std::string& s) {
  Int v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw ValidationError("bad integer '" + s + "'");
  return v;
}

Provenance read_header(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# scenario_hash=", 0) != 0) {
    throw ValidationError("missing provenance header");
  }
  const auto comma = line.find(",seed=");
  if (comma == std::string::npos) throw ValidationError("malformed provenance header");
  Provenance p;
  p.scenario_hash = line.substr(16, comma - 16);
  p.seed = parse_int<std::uint64_t>(line.substr(comma + 6));
  return p;
}

std::vector<std::string> read_columns(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("missing column header");
  return split_fields(line);
}

int coordinate_columns(const std::vector<std::string>& cols, std::size_t fixed, const char* prefix) {
  const int n = static_cast<int>(cols.size()) - static_cast<int>(fixed);
  if (n < 1) throw ValidationError("too few columns");
  for (int i = 0; i < n; ++i) {
    if (cols[fixed + static_cast<std::size_t>(i)] != prefix + std::to_string(i)) {
      throw ValidationError("unexpected column '" + cols[fixed + static_cast<std::size_t>(i)] + "'");
    }
  }
  return n;
}

std::string sanitize(std::string text) {
  for (char& c : text) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return text;
}

}  // namespace

void write_trajectories_csv(std::ostream& out, std::span<const TrajectoryBundle> bundles, SpinMode mode,
                            const Provenance& prov) {
  const int dims = spacetime_dims(mode);
  write_header(out, prov);
  out << "trajectory,s,k";
  for (int mu = 0; mu < dims; ++mu) out << ",x" << mu;
  out << '\n';
  for (std::size_t t = 0; t < bundles.size(); ++t) {
    for (const auto& c : bundles[t].configurations) {
      for (std::size_t k = 0; k < c.points.size(); ++k) {
        out << t << ',' << format_double(c.s) << ',' << k;
        for (int mu = 0; mu < dims; ++mu) out << ',' << format_double(c.points[k][static_cast<std::size_t>(mu)]);
        out << '\n';
      }
    }
  }
}

void write_events_csv(std::ostream& out, std::span<const TrajectoryBundle> bundles, const Provenance& prov) {
  write_header(out, prov);
  out << "trajectory,s,kind,detail\n";
  for (std::size_t t = 0; t < bundles.size(); ++t) {
    if (!bundles[t].halt) continue;
    const auto& e = *bundles[t].halt;
    out << t << ',' << format_double(e.s) << ',' << to_string(e.kind) << ',' << sanitize(e.detail) << '\n';
  }
}

void write_crossings_csv(std::ostream& out, const CrossingSet& set, SpinMode mode, const Provenance& prov) {
  const int dims = spatial_dims(mode);
  write_header(out, prov);
  out << "trajectory,s,k";
  for (int a = 0; a < dims; ++a) out << ",xi" << a;
  out << '\n';
  for (const auto& c : set.samples) {
    for (std::size_t k = 0; k < c.chart.size(); ++k) {
      out << c.trajectory << ',' << format_double(c.s) << ',' << k;
      for (int a = 0; a < dims; ++a) out << ',' << format_double(c.chart[k][static_cast<std::size_t>(a)]);
      out << '\n';
    }
  }
}

CsvTable<TrajectoryRecord> read_trajectories_csv(std::istream& in) {
  CsvTable<TrajectoryRecord> table;
  table.provenance = read_header(in);
  const auto cols = read_columns(in);
  if (cols.size() < 3 || cols[0] != "trajectory" || cols[1] != "s" || cols[2] != "k") {
    throw ValidationError("not a trajectory table");
  }
  const int dims = coordinate_columns(cols, 3, "x");
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != cols.size()) throw ValidationError("row has wrong number of fields");
    TrajectoryRecord r;
    r.trajectory = parse_int<std::size_t>(f[0]);
    r.s = parse_double(f[1]);
    r.k = parse_int<int>(f[2]);
    for (int mu = 0; mu < dims; ++mu) r.x[static_cast<std::size_t>(mu)] = parse_double(f[3 + static_cast<std::size_t>(mu)]);
    table.rows.push_back(r);
  }
  return table;
}

CsvTable<EventRecord> read_events_csv(std::istream& in) {
  CsvTable<EventRecord> table;
  table.provenance = read_header(in);
  const auto cols = read_columns(in);
  if (cols != std::vector<std::string>{"trajectory", "s", "kind", "detail"}) throw ValidationError("not an event table");
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_fields(line, 4);
    if (f.size() != 4) throw ValidationError("row has wrong number of fields");
    EventRecord r;
    r.trajectory = parse_int<std::size_t>(f[0]);
    r.s = parse_double(f[1]);
    try {
      r.kind = event_kind_from_string(f[2]);
    } catch (const InvalidArgument& e) {
      throw ValidationError(e.what());
    }
    r.detail = f[3];
    table.rows.push_back(std::move(r));
  }
  return table;
}

CsvTable<CrossingRecord> read_crossings_csv(std::istream& in) {
  CsvTable<CrossingRecord> table;
  table.provenance = read_header(in);
  const auto cols = read_columns(in);
  if (cols.size() < 3 || cols[0] != "trajectory" || cols[1] != "s" || cols[2] != "k") {
    throw ValidationError("not a crossing table");
  }
  const int dims = coordinate_columns(cols, 3, "xi");
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != cols.size()) throw ValidationError("row has wrong number of fields");
    CrossingRecord r;
    r.trajectory = parse_int<std::size_t>(f[0]);
    r.s = parse_double(f[1]);
    r.k = parse_int<int>(f[2]);
    for (int a = 0; a < dims; ++a) r.xi[static_cast<std::size_t>(a)] = parse_double(f[3 + static_cast<std::size_t>(a)]);
    table.rows.push_back(r);
  }
  return table;
}

json report_to_json(const EquivarianceReport& r, const Provenance& prov, const std::string& density_model) {
  json doc;
  doc["schema"] = kReportSchema;
  doc["scenario_hash"] = prov.scenario_hash;
  doc["seed"] = prov.seed;
  doc["density_model"] = density_model;
  doc["samples"] = r.samples;
  doc["excluded"] = r.excluded;
  doc["outside"] = r.outside;
  doc["dims"] = r.dims;
  doc["bins_per_axis"] = r.bins_per_axis;
  doc["lo"] = r.lo;
  doc["hi"] = r.hi;
  doc["tv"] = r.tv;
  doc["tv_threshold"] = r.tv_threshold;
  doc["expected_tv_noise"] = r.expected_tv_noise;
  doc["ks"] = r.ks;
  doc["ks_threshold"] = r.ks_threshold;
  doc["passed"] = r.passed;
  doc["counts"] = r.counts;
  doc["masses"] = r.masses;
  return doc;
}

EquivarianceReport report_from_json(const json& doc) {
  if (!doc.is_object() || doc.value("schema", "") != kReportSchema) throw ValidationError("not an equivariance report");
  EquivarianceReport r;
  try {
    r.samples = doc.at("samples").get<std::size_t>();
    r.excluded = doc.at("excluded").get<std::size_t>();
    r.outside = doc.at("outside").get<std::size_t>();
    r.dims = doc.at("dims").get<int>();
    r.bins_per_axis = doc.at("bins_per_axis").get<int>();
    r.lo = doc.at("lo").get<std::vector<double>>();
    r.hi = doc.at("hi").get<std::vector<double>>();
    r.tv = doc.at("tv").get<double>();
    r.tv_threshold = doc.at("tv_threshold").get<double>();
    r.expected_tv_noise = doc.at("expected_tv_noise").get<double>();
    r.ks = doc.at("ks").get<std::vector<double>>();
    r.ks_threshold = doc.at("ks_threshold").get<double>();
    r.passed = doc.at("passed").get<bool>();
    r.counts = doc.at("counts").get<std::vector<std::uint64_t>>();
    r.masses = doc.at("masses").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed report: ") + e.what());
  }
  return r;
}

json histogram_to_json(const EquivarianceReport& r, const Provenance& prov) {
  json doc;
  doc["schema"] = kHistogramSchema;
  doc["scenario_hash"] = prov.scenario_hash;
  doc["seed"] = prov.seed;
  doc["dims"] = r.dims;
  doc["bins_per_axis"] = r.bins_per_axis;
  json edges = json::array();
  for (int a = 0; a < r.dims; ++a) {
    std::vector<double> e(static_cast<std::size_t>(r.bins_per_axis) + 1);
    const double lo = r.lo[static_cast<std::size_t>(a)];
    const double hi = r.hi[static_cast<std::size_t>(a)];
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = lo + (hi - lo) * static_cast<double>(i) / r.bins_per_axis;
    edges.push_back(e);
  }
  doc["edges"] = edges;
  doc["counts"] = r.counts;
  doc["masses"] = r.masses;
  return doc;
}

void write_json(std::ostream& out, const json& doc) { out << doc.dump(2) << '\n'; }

}  // namespace hbd
