#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ienergy/diagnostics.hpp"
#include "ienergy/io.hpp"
#include "ienergy/optimizer.hpp"
#include "ienergy/potentials.hpp"

namespace ienergy::cli {

inline constexpr const char* kToolVersion = "0.3.0";
inline constexpr const char* kWorkersEnv = "IENERGY_WORKERS";

/// Density fixture: "uniform_box" on [lo, hi)^d, or a file holding either a
/// grid JSON or an atoms CSV binned onto [-L, L)^d.
struct MeasureSource {
  std::string kind;
  int dim = 0;
  double lo = -1.0;
  double hi = 1.0;
  int resolution = 64;
  std::filesystem::path path;
  double L = 1.0;
};

struct ScanConfig {
  std::vector<double> scales;
  ScanOpts opts;
};

/// Command-line values that take precedence over the config file.
struct Overrides {
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  /// Raw value of the workers environment variable, if set.
  std::optional<std::string> env_workers;
};

struct RunConfig {
  /// Effective configuration (seed resolved, output_dir and workers removed);
  /// this is what gets stored and hashed.
  io::Json canonical;
  std::optional<PotentialSpec> potential;
  std::optional<std::int64_t> n;
  std::vector<std::int64_t> n_list;
  OptimOpts optim;
  DiagnosticsOpts diagnostics;
  std::optional<MeasureSource> measure;
  std::optional<ScanConfig> scan;
  std::optional<std::filesystem::path> configuration;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;
  int workers = 1;
  /// "default", "config", "env" or "flag".
  std::string workers_source = "default";
  bool require_convergence = false;
  int refine_levels = 3;
};

/// Validates the schema (unknown keys throw ConfigError) and applies
/// overrides. Relative paths resolve against base_dir.
RunConfig parse_run_config(const io::Json& j, const std::filesystem::path& base_dir, const Overrides& ov);

/// Reads and parses a config file; missing files raise IoError.
RunConfig load_run_config(const std::filesystem::path& path, const Overrides& ov);

}  // namespace ienergy::cli
