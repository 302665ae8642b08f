#include "run_config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <set>

#include "ienergy/error.hpp"

namespace ienergy::cli {

namespace {

using io::Json;

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

double real(const Json& j, const std::string& key, const std::string& where) {
  const Json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(where + "." + key + " must be finite");
  return x;
}

double positive(const Json& j, const std::string& key, const std::string& where) {
  const double x = real(j, key, where);
  if (!(x > 0.0)) throw ConfigError(where + "." + key + " must be > 0");
  return x;
}

std::int64_t integer(const Json& j, const std::string& key, const std::string& where, std::int64_t lo) {
  const Json& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + " must be an integer");
  const auto x = v.get<std::int64_t>();
  if (x < lo) throw ConfigError(where + "." + key + " must be >= " + std::to_string(lo));
  return x;
}

std::vector<double> real_list(const Json& j, const std::string& key, const std::string& where) {
  const Json& v = j.at(key);
  if (!v.is_array() || v.empty()) throw ConfigError(where + "." + key + " must be a nonempty array");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number() || !(e.get<double>() > 0.0) || !std::isfinite(e.get<double>())) {
      throw ConfigError(where + "." + key + " entries must be positive numbers");
    }
    out.push_back(e.get<double>());
  }
  return out;
}

OptimOpts parse_optim(const Json& j) {
  const std::string w = "optim";
  check_keys(j, {"grad_tol", "max_iters", "init_radius", "n_starts", "hop_count", "hop_sigma", "min_pair_dist",
                 "record_trace"},
             w);
  OptimOpts o;
  if (j.contains("grad_tol")) o.grad_tol = positive(j, "grad_tol", w);
  if (j.contains("max_iters")) o.max_iters = static_cast<int>(integer(j, "max_iters", w, 1));
  if (j.contains("init_radius")) o.init_radius = positive(j, "init_radius", w);
  if (j.contains("n_starts")) o.n_starts = static_cast<int>(integer(j, "n_starts", w, 1));
  if (j.contains("hop_count")) o.hop_count = static_cast<int>(integer(j, "hop_count", w, 0));
  if (j.contains("hop_sigma")) o.hop_sigma = positive(j, "hop_sigma", w);
  if (j.contains("min_pair_dist")) o.min_pair_dist = positive(j, "min_pair_dist", w);
  if (j.contains("record_trace")) {
    if (!j.at("record_trace").is_boolean()) throw ConfigError("optim.record_trace must be a boolean");
    o.record_trace = j.at("record_trace").get<bool>();
  }
  return o;
}

DiagnosticsOpts parse_diagnostics(const Json& j) {
  const std::string w = "diagnostics";
  check_keys(j, {"morrey_exponent", "eps_factors", "mass_radius_factors"}, w);
  DiagnosticsOpts o;
  if (j.contains("morrey_exponent")) o.morrey_exponent = positive(j, "morrey_exponent", w);
  if (j.contains("eps_factors")) {
    o.eps_factors = real_list(j, "eps_factors", w);
    for (double f : o.eps_factors) {
      if (!(f < 0.5)) throw ConfigError("diagnostics.eps_factors entries must be < 0.5");
    }
  }
  if (j.contains("mass_radius_factors")) o.mass_radius_factors = real_list(j, "mass_radius_factors", w);
  return o;
}

MeasureSource parse_measure(const Json& j, const std::filesystem::path& base, int default_dim) {
  const std::string w = "measure";
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw ConfigError("measure: expected an object with a string 'kind'");
  }
  MeasureSource m;
  m.kind = j.at("kind").get<std::string>();
  m.dim = default_dim;
  if (m.kind == "uniform_box") {
    check_keys(j, {"kind", "d", "lo", "hi", "resolution"}, w);
    if (j.contains("d")) m.dim = static_cast<int>(integer(j, "d", w, 1));
    if (j.contains("lo")) m.lo = real(j, "lo", w);
    if (j.contains("hi")) m.hi = real(j, "hi", w);
    if (j.contains("resolution")) m.resolution = static_cast<int>(integer(j, "resolution", w, 1));
    if (!(m.hi > m.lo)) throw ConfigError("measure: need lo < hi");
    if (m.dim < 1) throw ConfigError("measure: dimension unknown (give measure.d or a potential)");
  } else if (m.kind == "file") {
    check_keys(j, {"kind", "path", "L"}, w);
    if (!j.contains("path") || !j.at("path").is_string()) throw ConfigError("measure.path must be a string");
    m.path = base / j.at("path").get<std::string>();
    if (j.contains("L")) m.L = real(j, "L", w);
  } else {
    throw ConfigError("measure: unknown kind '" + m.kind + "'");
  }
  return m;
}

ScanConfig parse_scan(const Json& j) {
  const std::string w = "scan";
  check_keys(j, {"scales", "lo", "hi", "count", "resolution", "refine_levels", "tolerance"}, w);
  ScanConfig s;
  if (j.contains("scales")) {
    if (j.contains("lo") || j.contains("hi") || j.contains("count")) {
      throw ConfigError("scan: give either scales or lo/hi/count");
    }
    s.scales = real_list(j, "scales", w);
  } else if (j.contains("lo") || j.contains("hi") || j.contains("count")) {
    if (!j.contains("lo") || !j.contains("hi") || !j.contains("count")) {
      throw ConfigError("scan: lo, hi and count go together");
    }
    const double lo = positive(j, "lo", w), hi = positive(j, "hi", w);
    if (hi < lo) throw ConfigError("scan: need lo <= hi");
    s.scales = log_spaced(lo, hi, static_cast<int>(integer(j, "count", w, 1)));
  }
  if (j.contains("resolution")) s.opts.resolution = static_cast<int>(integer(j, "resolution", w, 4));
  if (j.contains("refine_levels")) s.opts.refine_levels = static_cast<int>(integer(j, "refine_levels", w, 0));
  if (j.contains("tolerance")) s.opts.tolerance = positive(j, "tolerance", w);
  return s;
}

std::vector<std::int64_t> parse_n_list(const Json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("N_list must be a nonempty array of integers");
  std::vector<std::int64_t> out;
  std::set<std::int64_t> seen;
  for (const auto& e : j) {
    if (!e.is_number_integer() || e.get<std::int64_t>() < 2) throw ConfigError("N_list entries must be integers >= 2");
    if (!seen.insert(e.get<std::int64_t>()).second) throw ConfigError("N_list entries must be distinct");
    out.push_back(e.get<std::int64_t>());
  }
  return out;
}

int parse_workers(const std::string& text) {
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(text.c_str(), &end, 10);
  if (errno != 0 || end == text.c_str() || *end != '\0' || v < 1 || v > 1024) {
    throw ConfigError(std::string(kWorkersEnv) + " must be an integer in [1, 1024], got '" + text + "'");
  }
  return static_cast<int>(v);
}

}  // namespace

RunConfig parse_run_config(const Json& j, const std::filesystem::path& base, const Overrides& ov) {
  check_keys(j, {"potential", "N", "N_list", "optim", "diagnostics", "measure", "scan", "configuration", "output_dir",
                 "seed", "workers", "require_convergence", "refine_levels"},
             "config");
  RunConfig rc;
  if (j.contains("potential")) rc.potential = io::potential_from_json(j.at("potential"));
  if (j.contains("N")) rc.n = integer(j, "N", "config", 2);
  if (j.contains("N_list")) rc.n_list = parse_n_list(j.at("N_list"));
  if (j.contains("optim")) rc.optim = parse_optim(j.at("optim"));
  if (j.contains("diagnostics")) rc.diagnostics = parse_diagnostics(j.at("diagnostics"));
  if (j.contains("measure")) rc.measure = parse_measure(j.at("measure"), base, rc.potential ? rc.potential->dim() : 0);
  if (j.contains("scan")) rc.scan = parse_scan(j.at("scan"));
  if (j.contains("configuration")) {
    if (!j.at("configuration").is_string()) throw ConfigError("configuration must be a path string");
    rc.configuration = base / j.at("configuration").get<std::string>();
  }
  if (j.contains("output_dir")) {
    if (!j.at("output_dir").is_string()) throw ConfigError("output_dir must be a string");
    rc.output_dir = base / j.at("output_dir").get<std::string>();
  }
  if (j.contains("seed")) {
    const auto& seed = j.at("seed");
    if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<std::int64_t>() < 0)) {
      throw ConfigError("seed must be a nonnegative integer");
    }
    rc.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("workers")) {
    rc.workers = static_cast<int>(integer(j, "workers", "config", 1));
    rc.workers_source = "config";
  }
  if (j.contains("require_convergence")) {
    if (!j.at("require_convergence").is_boolean()) throw ConfigError("require_convergence must be a boolean");
    rc.require_convergence = j.at("require_convergence").get<bool>();
  }
  if (j.contains("refine_levels")) rc.refine_levels = static_cast<int>(integer(j, "refine_levels", "config", 0));

  if (ov.env_workers) {
    rc.workers = parse_workers(*ov.env_workers);
    rc.workers_source = "env";
  }
  if (ov.workers) {
    if (*ov.workers < 1) throw ConfigError("--workers must be >= 1");
    rc.workers = *ov.workers;
    rc.workers_source = "flag";
  }
  if (ov.seed) rc.seed = *ov.seed;
  if (ov.out) rc.output_dir = *ov.out;

  rc.optim.seed = rc.seed;
  rc.optim.workers = rc.workers;

  rc.canonical = j;
  rc.canonical.erase("output_dir");
  rc.canonical.erase("workers");
  rc.canonical["seed"] = rc.seed;
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path, const Overrides& ov) {
  const Json j = io::read_json(path);
  return parse_run_config(j, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."), ov);
}

}  // namespace ienergy::cli
