#pragma once

// Experiment configuration, the runner behind the `bsg` command line tool, and
// the CSV / JSON report writers.

#include "bsg/coordinate_oracle.hpp"
#include "bsg/geodesic.hpp"
#include "bsg/registry.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace bsg {

using Json = nlohmann::ordered_json;

enum class ExperimentMode { TotalSpace, UnitBundle, HorizontalLift, ResidualCheck, OracleCheck };

std::string to_string(ExperimentMode mode);
std::optional<ExperimentMode> parse_mode(const std::string& text);

struct Tolerances {
  double residual = 1e-6;
  double drift = 1e-7;
  double speed = 1e-6;
  double oracle = 1e-5;
  double closed_form = 1e-8;
};

struct InitialData {
  Vector x, p, u, v;
  /// When set, the data are normalized with unit_initial_state to this K.
  std::optional<double> K;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::string manifold;
  double delta = 0.0;
  ExperimentMode mode = ExperimentMode::TotalSpace;
  std::optional<InitialData> initial;
  std::string curve;  ///< "paper-c1" or "paper-c2"
  ClosedFormExample example;
  double t0 = 0.0;
  double t1 = 1.0;
  int samples = 101;
  StepPolicy policy;
  bool renormalize = false;
  bool frenet = false;
  std::string out_dir;
  unsigned long long seed = 0;
  int oracle_points = 100;
  Tolerances tolerances;
};

/// Field-level validation; throws Error(ConfigInvalid) listing every problem.
ExperimentConfig parse_config(const Json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Checks that need the registry: manifold id, dimensions, unit-bundle data.
void validate(const ExperimentConfig& cfg, const ManifoldRegistry& registry);

struct Overrides {
  std::optional<double> delta;
  std::optional<std::string> mode;
  std::optional<double> t_end;
  std::optional<double> step;
  std::optional<unsigned long long> seed;
  std::optional<std::string> out_dir;
  bool renormalize = false;
};

void apply_overrides(ExperimentConfig& cfg, const Overrides& o);

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  /// "below": pass when value < tolerance; "above": pass when value > tolerance.
  std::string sense = "below";

  bool pass() const { return sense == "above" ? value > tolerance : value < tolerance; }
};

struct RunResult {
  std::string name;
  std::vector<Check> checks;
  std::vector<std::filesystem::path> files;

  bool pass() const;
};

/// Output root: config out_dir, else $BSG_OUT_DIR, else the working directory.
std::filesystem::path output_root(const ExperimentConfig& cfg);

RunResult run_experiment(const ExperimentConfig& cfg,
                         const ManifoldRegistry& registry = ManifoldRegistry::builtin());

/// Full invariant suite for one registry entry; writes <id>.verify.json.
RunResult verify_manifold(const std::string& id, const std::filesystem::path& out_dir,
                          const ManifoldRegistry& registry = ManifoldRegistry::builtin());

Json describe_entry(const ManifoldRegistryEntry& entry);
Json list_entries(const ManifoldRegistry& registry);

// Writers. Files are written to a temporary name and renamed into place.

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);
std::string trajectory_csv(const BergerSasakiConfig& cfg, const Trajectory& traj);
Json invariants_json(const InvariantReport& r, const Tolerances& tol);
Json residual_json(const ResidualSeries& r);
Json oracle_json(const OracleReport& r);
Json frenet_json(const FrenetReport& r);
Json checks_json(const RunResult& r);
void write_atomically(const std::filesystem::path& path, const std::string& contents);

}  // namespace bsg
