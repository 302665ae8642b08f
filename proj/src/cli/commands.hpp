#pragma once

#include <chrono>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "ienergy/measures.hpp"
#include "run_config.hpp"

namespace ienergy::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericError = 3, kIoError = 4 };

/// Wall-clock timer per named phase, in call order.
class PhaseTimer {
 public:
  void start(std::string name);
  void stop();
  io::Json to_json() const;

 private:
  std::vector<std::pair<std::string, double>> done_;
  std::string current_;
  std::chrono::steady_clock::time_point t0_;
};

struct CommandOutput {
  io::Json results;
  int exit_code = kOk;
};

/// Each command writes its artifacts into rc.output_dir.
CommandOutput cmd_classify(const RunConfig& rc, PhaseTimer& phases);
CommandOutput cmd_minimize(const RunConfig& rc, PhaseTimer& phases);
CommandOutput cmd_sweep(const RunConfig& rc, PhaseTimer& phases);
CommandOutput cmd_recover(const RunConfig& rc, PhaseTimer& phases);
CommandOutput cmd_analyze(const RunConfig& rc, PhaseTimer& phases);

/// Density described by a measure fixture.
GridDensity load_measure(const MeasureSource& m);

/// Loads the config, writes config.json, runs the command and writes
/// run_record.json. Errors are reported on `log` and mapped to exit codes.
int run_command(const std::string& command, const std::filesystem::path& config_path, const Overrides& ov,
                std::ostream& log);

}  // namespace ienergy::cli
