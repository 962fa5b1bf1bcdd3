// hbd: scenario-driven front end.
//
//   hbd simulate    --scenario s.json [--out dir] [--workers n] [--seed-override u]
//   hbd equilibrium --scenario s.json [--negative-control] ...
//   hbd checks      --scenario s.json ...
//
// Exit codes: 0 success, 1 check failure, 2 validation error, 3 runtime error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hbd/checks.hpp"
#include "hbd/errors.hpp"
#include "hbd/output.hpp"
#include "hbd/pipeline.hpp"
#include "hbd/scenario.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonArgs {
  std::string scenario;
  std::string out;
  int workers = 1;
  std::optional<std::uint64_t> seed_override;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--scenario", args.scenario, "scenario JSON file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out, "output directory (overrides the scenario)");
  cmd->add_option("--workers", args.workers, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--seed-override", args.seed_override, "replace the scenario's master seed");
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

fs::path output_dir(const CommonArgs& args, const hbd::Scenario& sc) {
  fs::path dir = args.out.empty() ? fs::path(sc.output_directory) : fs::path(args.out);
  fs::create_directories(dir);
  return dir;
}

hbd::Scenario load(const CommonArgs& args) {
  hbd::Scenario sc = hbd::load_scenario(args.scenario);
  if (args.seed_override) sc.ensemble.seed = *args.seed_override;
  return sc;
}

int simulate(const CommonArgs& args) {
  const hbd::Scenario sc = load(args);
  const fs::path dir = output_dir(args, sc);
  const hbd::SimulationRun run = hbd::run_simulation(sc, args.workers);
  const hbd::Provenance prov{sc.hash, sc.ensemble.seed};
  {
    auto out = open_output(dir / "trajectories.csv");
    hbd::write_trajectories_csv(out, run.bundles, sc.mode, prov);
  }
  {
    auto out = open_output(dir / "events.csv");
    hbd::write_events_csv(out, run.bundles, prov);
  }
  std::size_t halted = 0;
  for (const auto& b : run.bundles) halted += b.halted() ? 1 : 0;
  std::cout << "simulate: " << run.bundles.size() << " trajectories, " << halted << " halted -> " << dir.string()
            << '\n';
  return 0;
}

int equilibrium(const CommonArgs& args, bool negative_control) {
  const hbd::Scenario sc = load(args);
  const fs::path dir = output_dir(args, sc);
  const hbd::EquilibriumRun run = hbd::run_equilibrium(sc, args.workers, negative_control);
  const hbd::Provenance prov{sc.hash, sc.ensemble.seed};
  {
    auto out = open_output(dir / "report.json");
    hbd::write_json(out, hbd::report_to_json(run.report, prov, hbd::to_string(run.model)));
  }
  {
    auto out = open_output(dir / "histogram.json");
    hbd::write_json(out, hbd::histogram_to_json(run.report, prov));
  }
  {
    auto out = open_output(dir / "crossings.csv");
    hbd::write_crossings_csv(out, run.crossings, sc.mode, prov);
  }
  std::cout << "equilibrium (" << hbd::to_string(run.model) << "): M = " << run.report.samples
            << ", TV = " << run.report.tv << " (threshold " << run.report.tv_threshold << ", noise floor "
            << run.report.expected_tv_noise << ")";
  for (std::size_t a = 0; a < run.report.ks.size(); ++a) std::cout << ", KS" << a << " = " << run.report.ks[a];
  std::cout << " (threshold " << run.report.ks_threshold << ") -> " << (run.report.passed ? "pass" : "fail") << '\n';
  return run.report.passed ? 0 : 1;
}

int checks(const CommonArgs& args, const std::string& fault) {
  const hbd::Scenario sc = load(args);
  const fs::path dir = output_dir(args, sc);
  hbd::GammaSet gammas = hbd::standard_gammas(sc.mode);
  if (fault == "clifford") {
    gammas.g[1] *= 1.001;
  } else if (!fault.empty()) {
    throw hbd::ValidationError("unknown fault '" + fault + "'");
  }
  const hbd::CheckReport report = hbd::run_checks(sc, gammas);
  {
    auto out = open_output(dir / "checks.json");
    hbd::write_json(out, hbd::checks_to_json(report, {sc.hash, sc.ensemble.seed}));
  }
  for (const auto& r : report.results) {
    std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.max_residual << " (threshold "
              << r.threshold << ") " << r.detail << '\n';
  }
  return report.passed() ? 0 : 1;
}

// Machine-readable error report on stderr and, when possible, in the output directory.
void report_error(const std::string& kind, const std::string& message, const CommonArgs& args) {
  nlohmann::json doc{{"schema", "hbd-error/1"}, {"kind", kind}, {"message", message}};
  std::cerr << doc.dump() << '\n';
  if (!args.out.empty()) {
    std::error_code ec;
    fs::create_directories(args.out, ec);
    std::ofstream out(fs::path(args.out) / "error.json");
    if (out) hbd::write_json(out, doc);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hypersurface Bohm-Dirac trajectory simulator"};
  app.require_subcommand(1);

  CommonArgs args;
  bool negative_control = false;
  std::string fault;

  auto* sim = app.add_subcommand("simulate", "integrate trajectories and write trajectories.csv and events.csv");
  add_common(sim, args);
  auto* eq = app.add_subcommand("equilibrium", "sample, propagate and test equivariance of the crossings");
  add_common(eq, args);
  eq->add_flag("--negative-control", negative_control, "compare against the density with flat normals");
  auto* chk = app.add_subcommand("checks", "run the invariant suites and write checks.json");
  add_common(chk, args);
  chk->add_option("--inject-fault", fault, "corrupt an input for testing")->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) return simulate(args);
    if (eq->parsed()) return equilibrium(args, negative_control);
    return checks(args, fault);
  } catch (const hbd::ValidationError& e) {
    report_error(e.kind(), e.what(), args);
    return 2;
  } catch (const hbd::Error& e) {
    report_error(e.kind(), e.what(), args);
    return 3;
  } catch (const std::exception& e) {
    report_error("runtime_error", e.what(), args);
    return 3;
  }
}
