#pragma once

// Run artifacts. Every file starts with the scenario hash and master seed.
//
// trajectories.csv   # scenario_hash=<hex>,seed=<u64>
//                    trajectory,s,k,x0,x1[,x2,x3]
// events.csv         trajectory,s,kind,detail
// crossings.csv      trajectory,s,k,xi0[,xi1,xi2]
// report.json        schema "hbd-equivariance/1"
// histogram.json     schema "hbd-histogram/1"
//
// Numbers are written in shortest round-trip form, so reading a file back
// reproduces the doubles exactly.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hbd/dynamics.hpp"
#include "hbd/ensemble.hpp"

namespace hbd {

inline constexpr const char* kReportSchema = "hbd-equivariance/1";
inline constexpr const char* kHistogramSchema = "hbd-histogram/1";

struct Provenance {
  std::string scenario_hash;
  std::uint64_t seed = 0;
};

std::string format_double(double v);

void write_trajectories_csv(std::ostream& out, std::span<const TrajectoryBundle> bundles, SpinMode mode,
                            const Provenance& prov);
void write_events_csv(std::ostream& out, std::span<const TrajectoryBundle> bundles, const Provenance& prov);
void write_crossings_csv(std::ostream& out, const CrossingSet& set, SpinMode mode, const Provenance& prov);

struct TrajectoryRecord {
  std::size_t trajectory = 0;
  double s = 0.0;
  int k = 0;
  FourVector x;
};

struct EventRecord {
  std::size_t trajectory = 0;
  double s = 0.0;
  EventKind kind = EventKind::NodeProximity;
  std::string detail;
};

struct CrossingRecord {
  std::size_t trajectory = 0;
  double s = 0.0;
  int k = 0;
  ChartPoint xi{};
};

template <class Record>
struct CsvTable {
  Provenance provenance;
  std::vector<Record> rows;
};

// Readers throw ValidationError on malformed input.
CsvTable<TrajectoryRecord> read_trajectories_csv(std::istream& in);
CsvTable<EventRecord> read_events_csv(std::istream& in);
CsvTable<CrossingRecord> read_crossings_csv(std::istream& in);

nlohmann::json report_to_json(const EquivarianceReport& report, const Provenance& prov,
                              const std::string& density_model);
EquivarianceReport report_from_json(const nlohmann::json& doc);

nlohmann::json histogram_to_json(const EquivarianceReport& report, const Provenance& prov);

// Writes JSON with a fixed indent and a trailing newline.
void write_json(std::ostream& out, const nlohmann::json& doc);

}  // namespace hbd
