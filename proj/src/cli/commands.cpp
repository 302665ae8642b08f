#include "commands.hpp"

#include <cmath>
#include <limits>

#include "ienergy/error.hpp"
#include "ienergy/recovery.hpp"
#include "ienergy/svg.hpp"

namespace ienergy::cli {

namespace {

using io::Json;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const PotentialSpec& need_potential(const RunConfig& rc) {
  if (!rc.potential) throw ConfigError("config: 'potential' is required for this command");
  return *rc.potential;
}

void write_json(const std::filesystem::path& p, const Json& j) { io::write_file(p, j.dump(2) + "\n"); }

Configuration load_configuration(const std::filesystem::path& p) {
  if (!std::filesystem::exists(p)) throw IoError("configuration file '" + p.string() + "' does not exist");
  if (p.extension() == ".csv") return io::configuration_from_csv(io::read_file(p));
  return io::configuration_from_json(io::read_json(p));
}

std::vector<double> default_scales(const PotentialSpec& spec) {
  const double top = spec.kind() == PotentialKind::Morse ? 20.0 * std::max(spec.lr(), spec.la()) : 20.0;
  return log_spaced(0.05 * top / 20.0, top, 16);
}

}  // namespace

void PhaseTimer::start(std::string name) {
  if (!current_.empty()) stop();
  current_ = std::move(name);
  t0_ = std::chrono::steady_clock::now();
}

void PhaseTimer::stop() {
  if (current_.empty()) return;
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  done_.emplace_back(current_, s);
  current_.clear();
}

Json PhaseTimer::to_json() const {
  Json out = Json::array();
  for (const auto& [name, s] : done_) out.push_back({{"phase", name}, {"seconds", s}});
  return out;
}

GridDensity load_measure(const MeasureSource& m) {
  if (m.kind == "uniform_box") return GridDensity::uniform_box(m.dim, m.lo, m.hi, m.resolution);
  if (!std::filesystem::exists(m.path)) throw IoError("measure file '" + m.path.string() + "' does not exist");
  if (m.path.extension() == ".json") return io::grid_from_json(io::read_json(m.path));
  if (!(m.L >= 1.0)) throw InvalidArgument("measure: L must be >= 1");
  const AtomicMeasure mu = io::atoms_from_csv(io::read_file(m.path));
  return GridDensity::from_atoms(mu, -m.L, m.L, mu.dim() == 1 ? 64 : 16);
}

CommandOutput cmd_classify(const RunConfig& rc, PhaseTimer& phases) {
  const PotentialSpec& spec = need_potential(rc);
  phases.start("classify");
  const StabilityVerdict v = classify_stability(spec);
  std::string cls = to_string(v.cls);
  std::string basis = "analytic";

  Json certificate = nullptr;
  const bool run_scan = rc.scan.has_value() || spec.kind() == PotentialKind::Morse;
  if (run_scan) {
    phases.start("scan");
    ScanConfig sc = rc.scan.value_or(ScanConfig{});
    if (sc.scales.empty()) sc.scales = default_scales(spec);
    const InstabilityCertificate cert = numeric_instability_scan(spec, sc.scales, sc.opts);
    certificate = io::to_json(cert);
    if (v.cls == StabilityClass::Unknown && cert.found) {
      cls = to_string(StabilityClass::Unstable);
      basis = "numeric certificate";
    }
  }
  phases.stop();

  Json out = {{"class", cls},
              {"basis", basis},
              {"margin", io::number(v.margin)},
              {"note", v.note},
              {"potential", io::to_json(spec)},
              {"certificate", certificate}};
  write_json(rc.output_dir / "classify.json", out);
  return {out, kOk};
}

CommandOutput cmd_minimize(const RunConfig& rc, PhaseTimer& phases) {
  const PotentialSpec& spec = need_potential(rc);
  if (!rc.n) throw ConfigError("config: 'N' is required for minimize");
  phases.start("optimize");
  const OptimResult r = minimize_multistart(spec, static_cast<std::size_t>(*rc.n), rc.optim);
  phases.start("diagnose");
  const DiagnosticsReport rep = diagnose(spec, r.best, rc.diagnostics);
  phases.start("write");
  const Json out = {{"result", io::to_json(r)}, {"diagnostics", io::to_json(rep)}};
  write_json(rc.output_dir / "minimize.json", out);
  write_json(rc.output_dir / "configuration.json", io::to_json(r.best));
  io::write_file(rc.output_dir / "configuration.csv", io::configuration_to_csv(r.best));
  io::CsvTable table({"N", "energy", "diameter", "force_residual", "iterations", "converged"});
  table.add_row({static_cast<double>(*rc.n), r.energy, r.diameter, r.force_residual,
                 static_cast<double>(r.iterations), r.converged ? 1.0 : 0.0});
  io::write_file(rc.output_dir / "minimize.csv", table.str());
  phases.stop();

  const Json summary = {{"N", *rc.n},
                        {"energy", io::number(r.energy)},
                        {"diameter", io::number(r.diameter)},
                        {"force_residual", io::number(r.force_residual)},
                        {"converged", r.converged}};
  return {summary, rc.require_convergence && !r.converged ? kNumericError : kOk};
}

CommandOutput cmd_sweep(const RunConfig& rc, PhaseTimer& phases) {
  const PotentialSpec& spec = need_potential(rc);
  if (rc.n_list.empty()) throw ConfigError("config: 'N_list' is required for sweep");
  io::CsvTable table(
      {"N", "energy", "diameter", "morrey_seminorm", "el_pair_spread", "el_energy_spread", "fitted_k"});
  Json per_n = Json::array();
  std::vector<std::pair<double, double>> spreads;
  svg::Series diam{"diameter", {}, {}}, pair{"max-min P_i", {}, {}}, energy{"max |P_i - 2E_N|", {}, {}};
  bool all_converged = true;
  for (std::int64_t n : rc.n_list) {
    phases.start("optimize N=" + std::to_string(n));
    const OptimResult r = minimize_multistart(spec, static_cast<std::size_t>(n), rc.optim);
    all_converged = all_converged && r.converged;
    phases.start("diagnose N=" + std::to_string(n));
    const DiagnosticsReport rep = diagnose(spec, r.best, rc.diagnostics);
    spreads.emplace_back(static_cast<double>(n), rep.el.pair_spread);
    double k = kNaN;
    try {
      k = fit_power_decay(spreads).k_hat;
    } catch (const InvalidArgument&) {
      // fewer than two positive samples so far
    }
    table.add_row({static_cast<double>(n), r.energy, r.diameter, rep.morrey.value, rep.el.pair_spread,
                   rep.el.energy_spread, k});
    diam.x.push_back(static_cast<double>(n));
    diam.y.push_back(r.diameter);
    pair.x.push_back(static_cast<double>(n));
    pair.y.push_back(rep.el.pair_spread);
    energy.x.push_back(static_cast<double>(n));
    energy.y.push_back(rep.el.energy_spread);
    io::write_file(rc.output_dir / "configs" / ("N_" + std::to_string(n) + ".csv"), io::configuration_to_csv(r.best));
    Json res = io::to_json(r);
    res.erase("best");
    per_n.push_back({{"N", n}, {"result", res}, {"diagnostics", io::to_json(rep)}});
  }
  phases.start("write");
  io::write_file(rc.output_dir / "sweep.csv", table.str());
  write_json(rc.output_dir / "sweep.json", per_n);
  io::write_file(rc.output_dir / "diameter.svg",
                 svg::line_plot({diam}, {"Minimiser diameter", "N", "diameter", false, false}));
  io::write_file(rc.output_dir / "spread.svg",
                 svg::line_plot({pair, energy}, {"Euler-Lagrange spread", "N", "spread", true, true}));
  phases.stop();
  const Json summary = {{"rows", table.rows()}, {"all_converged", all_converged}};
  return {summary, rc.require_convergence && !all_converged ? kNumericError : kOk};
}

CommandOutput cmd_recover(const RunConfig& rc, PhaseTimer& phases) {
  const PotentialSpec& spec = need_potential(rc);
  if (!rc.measure) throw ConfigError("config: 'measure' is required for recover");
  std::vector<std::int64_t> ns = rc.n_list;
  if (ns.empty() && rc.n) ns.push_back(*rc.n);
  if (ns.empty()) throw ConfigError("config: 'N_list' or 'N' is required for recover");
  phases.start("load measure");
  const GridDensity rho = load_measure(*rc.measure);
  if (rho.dim() != spec.dim()) throw ConfigError("recover: measure and potential dimensions differ");
  if (rho.lo() != -rho.hi()) throw InvalidArgument("recover: density box must be [-L, L)^d");
  if (!(rho.hi() >= 1.0)) throw InvalidArgument("recover: L must be >= 1");
  phases.start("recover");
  const auto rows = recovery_convergence_report(spec, rho, ns, rc.refine_levels);
  phases.start("write");
  io::CsvTable table({"N", "E_N", "E_rho", "energy_gap", "W1", "theta", "N_e", "N_e_bound", "W1_quantised"});
  svg::Series gap{"|E_N - E(rho)|", {}, {}}, w1{"W1", {}, {}};
  for (const auto& r : rows) {
    const double n = static_cast<double>(r.n_particles);
    table.add_row({n, r.e_n, r.e_rho, r.energy_gap, r.w1, r.theta, static_cast<double>(r.n_e),
                   auxiliary_count_bound(spec.dim(), r.n_particles), r.w1_quantised ? 1.0 : 0.0});
    gap.x.push_back(n);
    gap.y.push_back(r.energy_gap);
    w1.x.push_back(n);
    w1.y.push_back(r.w1);
  }
  io::write_file(rc.output_dir / "recover.csv", table.str());
  io::write_file(rc.output_dir / "gap.svg", svg::line_plot({gap}, {"Energy gap", "N", "gap", true, true}));
  io::write_file(rc.output_dir / "w1.svg", svg::line_plot({w1}, {"Wasserstein-1 distance", "N", "W1", true, true}));
  phases.stop();
  return {{{"rows", rows.size()}, {"E_rho", io::number(rows.front().e_rho)}}, kOk};
}

CommandOutput cmd_analyze(const RunConfig& rc, PhaseTimer& phases) {
  const PotentialSpec& spec = need_potential(rc);
  if (!rc.configuration) throw ConfigError("config: 'configuration' is required for analyze");
  phases.start("load");
  const Configuration x = load_configuration(*rc.configuration);
  if (x.dim() != spec.dim()) throw ConfigError("analyze: configuration and potential dimensions differ");
  phases.start("diagnose");
  const DiagnosticsReport rep = diagnose(spec, x, rc.diagnostics);
  phases.start("write");
  const Json out = io::to_json(rep);
  write_json(rc.output_dir / "analyze.json", out);
  io::CsvTable table({"N", "energy", "diameter", "morrey_seminorm", "el_pair_spread", "el_energy_spread",
                      "stationarity_min", "lower_mass"});
  table.add_row({static_cast<double>(rep.n), rep.energy, rep.diameter, rep.morrey.value, rep.el.pair_spread,
                 rep.el.energy_spread, rep.stationarity.empty() ? kNaN : rep.stationarity_min, rep.lower_mass});
  io::write_file(rc.output_dir / "analyze.csv", table.str());
  phases.stop();
  return {{{"N", rep.n}, {"notes", rep.notes}}, kOk};
}

int run_command(const std::string& command, const std::filesystem::path& config_path, const Overrides& ov,
                std::ostream& log) {
  try {
    const auto t0 = std::chrono::steady_clock::now();
    const RunConfig rc = load_run_config(config_path, ov);
    if (rc.workers_source == "env") {
      log << "[ienergy] workers=" << rc.workers << " taken from " << kWorkersEnv << "\n";
    }
    std::error_code ec;
    std::filesystem::create_directories(rc.output_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + rc.output_dir.string() + "': " + ec.message());
    const std::string stored = rc.canonical.dump(2) + "\n";
    io::write_file(rc.output_dir / "config.json", stored);

    PhaseTimer phases;
    CommandOutput result;
    if (command == "classify") {
      result = cmd_classify(rc, phases);
    } else if (command == "minimize") {
      result = cmd_minimize(rc, phases);
    } else if (command == "sweep") {
      result = cmd_sweep(rc, phases);
    } else if (command == "recover") {
      result = cmd_recover(rc, phases);
    } else if (command == "analyze") {
      result = cmd_analyze(rc, phases);
    } else {
      throw ConfigError("unknown command '" + command + "'");
    }

    const Json record = {
        {"tool", "ienergy"},
        {"version", kToolVersion},
        {"command", command},
        {"config_hash", io::hex64(io::fnv1a64(stored))},
        {"seed", rc.seed},
        {"workers", rc.workers},
        {"workers_source", rc.workers_source},
        {"simd", kernels::active_kernels().name},
        {"phases", phases.to_json()},
        {"wall_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()},
        {"exit_code", result.exit_code},
        {"results", result.results}};
    write_json(rc.output_dir / "run_record.json", record);
    if (result.exit_code == kNumericError) log << "[ienergy] error: convergence was required but not reached\n";
    log << "[ienergy] " << command << " done, outputs in " << rc.output_dir.string() << "\n";
    return result.exit_code;
  } catch (const ConfigError& e) {
    log << "[ienergy] config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const InvalidArgument& e) {
    log << "[ienergy] config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const io::Json::exception& e) {
    log << "[ienergy] config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const IoError& e) {
    log << "[ienergy] i/o error: " << e.what() << "\n";
    return kIoError;
  } catch (const NumericError& e) {
    log << "[ienergy] numeric error: " << e.what() << "\n";
    return kNumericError;
  } catch (const std::exception& e) {
    log << "[ienergy] error: " << e.what() << "\n";
    return kNumericError;
  }
}

}  // namespace ienergy::cli
