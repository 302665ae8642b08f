#include "ienergy/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "ienergy/error.hpp"

namespace ienergy::io {

namespace {

void reject_unknown(const Json& j, const std::set<std::string>& allowed, const std::string& what) {
  if (!j.is_object()) throw ConfigError(what + ": expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(what + ": unknown key '" + key + "'");
  }
}

double get_number(const Json& j, const std::string& key, const std::string& what) {
  if (!j.contains(key)) throw ConfigError(what + ": missing key '" + key + "'");
  const Json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(what + ": '" + key + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(what + ": '" + key + "' must be finite");
  return x;
}

int get_int(const Json& j, const std::string& key, const std::string& what) {
  if (!j.contains(key)) throw ConfigError(what + ": missing key '" + key + "'");
  if (!j.at(key).is_number_integer()) throw ConfigError(what + ": '" + key + "' must be an integer");
  return j.at(key).get<int>();
}

double parse_double(const std::string& field) {
  const char* begin = field.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  while (end != nullptr && (*end == ' ' || *end == '\t' || *end == '\r')) ++end;
  if (end == begin || *end != '\0') throw ConfigError("csv: cannot parse number '" + field + "'");
  if (!std::isfinite(v)) throw ConfigError("csv: non-finite value '" + field + "'");
  return v;
}

std::vector<std::vector<double>> parse_csv_rows(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) row.push_back(parse_double(field));
    if (!rows.empty() && row.size() != rows.front().size()) throw ConfigError("csv: ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("csv: no data rows");
  return rows;
}

}  // namespace

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json to_json(const PotentialSpec& spec) {
  if (spec.kind() == PotentialKind::PowerLaw) {
    return {{"kind", "power_law"}, {"d", spec.dim()}, {"a", spec.a()}, {"b", spec.b()}};
  }
  return {{"kind", "morse"}, {"d", spec.dim()}, {"Cr", spec.cr()}, {"lr", spec.lr()}, {"Ca", spec.ca()}, {"la", spec.la()}};
}

PotentialSpec potential_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw ConfigError("potential: expected an object with a string 'kind'");
  }
  const std::string kind = j.at("kind").get<std::string>();
  try {
    if (kind == "power_law") {
      reject_unknown(j, {"kind", "d", "a", "b"}, "potential");
      return PotentialSpec::power_law(get_int(j, "d", "potential"), get_number(j, "a", "potential"),
                                      get_number(j, "b", "potential"));
    }
    if (kind == "morse") {
      reject_unknown(j, {"kind", "d", "Cr", "lr", "Ca", "la"}, "potential");
      return PotentialSpec::morse(get_int(j, "d", "potential"), get_number(j, "Cr", "potential"),
                                  get_number(j, "lr", "potential"), get_number(j, "Ca", "potential"),
                                  get_number(j, "la", "potential"));
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("potential: ") + e.what());
  }
  throw ConfigError("potential: unknown kind '" + kind + "'");
}

Json to_json(const Configuration& x) {
  Json pts = Json::array();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto p = x.point(i);
    pts.push_back(std::vector<double>(p.begin(), p.end()));
  }
  return {{"d", x.dim()}, {"points", pts}};
}

Configuration configuration_from_json(const Json& j) {
  reject_unknown(j, {"d", "points"}, "configuration");
  const int d = get_int(j, "d", "configuration");
  if (!j.contains("points") || !j.at("points").is_array()) throw ConfigError("configuration: 'points' must be an array");
  std::vector<double> flat;
  for (const auto& p : j.at("points")) {
    if (!p.is_array() || static_cast<int>(p.size()) != d) throw ConfigError("configuration: every point needs d coordinates");
    for (const auto& c : p) {
      if (!c.is_number()) throw ConfigError("configuration: coordinates must be numbers");
      flat.push_back(c.get<double>());
    }
  }
  try {
    return Configuration(d, std::move(flat));
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

std::string configuration_to_csv(const Configuration& x) {
  std::string out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (int k = 0; k < x.dim(); ++k) {
      if (k > 0) out += ',';
      out += format_number(x.point(i)[k]);
    }
    out += '\n';
  }
  return out;
}

Configuration configuration_from_csv(const std::string& text) {
  const auto rows = parse_csv_rows(text);
  std::vector<double> flat;
  for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
  try {
    return Configuration(static_cast<int>(rows.front().size()), std::move(flat));
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

Json to_json(const GridDensity& rho) {
  return {{"d", rho.dim()}, {"lo", rho.lo()}, {"hi", rho.hi()}, {"resolution", rho.resolution()}, {"mass", rho.cell_mass()}};
}

GridDensity grid_from_json(const Json& j) {
  reject_unknown(j, {"d", "lo", "hi", "resolution", "mass"}, "grid density");
  if (!j.contains("mass") || !j.at("mass").is_array()) throw ConfigError("grid density: 'mass' must be an array");
  std::vector<double> mass;
  for (const auto& v : j.at("mass")) {
    if (!v.is_number()) throw ConfigError("grid density: masses must be numbers");
    mass.push_back(v.get<double>());
  }
  try {
    return GridDensity(get_int(j, "d", "grid density"), get_number(j, "lo", "grid density"),
                       get_number(j, "hi", "grid density"), get_int(j, "resolution", "grid density"), std::move(mass));
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

std::string atoms_to_csv(const AtomicMeasure& mu) {
  std::string out;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (int k = 0; k < mu.dim(); ++k) out += format_number(mu.point(i)[k]) + ',';
    out += format_number(mu.weights()[i]) + '\n';
  }
  return out;
}

AtomicMeasure atoms_from_csv(const std::string& text) {
  const auto rows = parse_csv_rows(text);
  if (rows.front().size() < 2) throw ConfigError("atoms csv: need coordinates and a weight per row");
  const int d = static_cast<int>(rows.front().size()) - 1;
  std::vector<double> pts, wts;
  for (const auto& r : rows) {
    pts.insert(pts.end(), r.begin(), r.end() - 1);
    wts.push_back(r.back());
  }
  try {
    return AtomicMeasure(d, std::move(pts), std::move(wts));
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

Json to_json(const OptimResult& r) {
  Json starts = Json::array();
  for (const auto& s : r.starts) {
    starts.push_back({{"index", s.index},
                      {"energy", number(s.energy)},
                      {"iterations", s.iterations},
                      {"converged", s.converged},
                      {"accepted", s.accepted}});
  }
  Json j = {{"energy", number(r.energy)},
            {"force_residual", number(r.force_residual)},
            {"iterations", r.iterations},
            {"converged", r.converged},
            {"label", "approximate global minimiser"},
            {"diameter", number(r.diameter)},
            {"diameter_ok", r.diameter_ok},
            {"starts", starts},
            {"best", to_json(r.best)}};
  j["diameter_bound"] = r.diameter_bound ? number(*r.diameter_bound) : Json(nullptr);
  return j;
}

Json to_json(const DiagnosticsReport& r) {
  Json stat = Json::array();
  for (const auto& s : r.stationarity) {
    stat.push_back({{"eps", s.eps}, {"min", number(s.min_value)}, {"values", s.values}});
  }
  Json mass = Json::array();
  for (const auto& [rad, m] : r.lower_mass_by_radius) mass.push_back({{"r", rad}, {"min_mass", m}});
  Json j = {{"N", r.n},
            {"energy", number(r.energy)},
            {"diameter", number(r.diameter)},
            {"morrey", {{"exponent", r.morrey_exponent},
                        {"value", number(r.morrey.value)},
                        {"argmax_i", r.morrey.argmax_i},
                        {"argmax_r", number(r.morrey.argmax_r)}}},
            {"el_spread_pairs", number(r.el.pair_spread)},
            {"el_spread_energy", number(r.el.energy_spread)},
            {"stationarity", stat},
            {"stationarity_min", number(r.stationarity_min)},
            {"stationarity_eps", number(r.stationarity_eps)},
            {"lower_mass_profile", mass},
            {"lower_mass", r.lower_mass},
            {"lower_mass_radius", r.lower_mass_radius},
            {"notes", r.notes}};
  j["K_N_bound"] = r.k_n_bound ? number(*r.k_n_bound) : Json(nullptr);
  j["diameter_bound_holds"] = r.diameter_bound_holds ? Json(*r.diameter_bound_holds) : Json(nullptr);
  return j;
}

Json to_json(const RecoveryResult& r) {
  return {{"N", r.config.size()},
          {"n", r.n},
          {"counts", r.counts},
          {"N_p", r.n_p},
          {"N_e", r.n_e},
          {"theta", r.theta},
          {"L", r.L},
          {"main_range", {r.main_range.first, r.main_range.second}},
          {"aux_range", {r.aux_range.first, r.aux_range.second}},
          {"configuration", to_json(r.config)}};
}

Json to_json(const InstabilityCertificate& c) {
  Json scan = Json::array();
  for (std::size_t k = 0; k < c.scales.size(); ++k) scan.push_back({{"t", c.scales[k]}, {"energy", number(c.energies[k])}});
  return {{"found", c.found},
          {"best_scale", c.best_scale},
          {"best_energy", number(c.best_energy)},
          {"threshold", number(c.threshold)},
          {"quad_error", number(c.quad_error)},
          {"scan", scan}};
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void CsvTable::add_row(const std::vector<double>& row) {
  if (row.size() != header_.size()) throw InvalidArgument("csv: row width does not match the header");
  rows_.push_back(row);
}

std::string CsvTable::str() const {
  std::string out;
  for (std::size_t k = 0; k < header_.size(); ++k) out += (k ? "," : "") + header_[k];
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t k = 0; k < row.size(); ++k) out += (k ? "," : "") + format_number(row[k]);
    out += '\n';
  }
  return out;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Json read_json(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

}  // namespace ienergy::io
