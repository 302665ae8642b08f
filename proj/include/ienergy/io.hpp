#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ienergy/configuration.hpp"
#include "ienergy/diagnostics.hpp"
#include "ienergy/measures.hpp"
#include "ienergy/optimizer.hpp"
#include "ienergy/potentials.hpp"
#include "ienergy/recovery.hpp"

namespace ienergy::io {

using Json = nlohmann::json;

/// {"kind":"power_law","d":2,"a":2,"b":1} or
/// {"kind":"morse","d":2,"Cr":1,"lr":0.5,"Ca":1,"la":1}. Unknown keys throw ConfigError.
Json to_json(const PotentialSpec& spec);
PotentialSpec potential_from_json(const Json& j);

/// {"d":2,"points":[[x,y],...]}
Json to_json(const Configuration& x);
Configuration configuration_from_json(const Json& j);
/// One point per row, comma separated, no header.
std::string configuration_to_csv(const Configuration& x);
Configuration configuration_from_csv(const std::string& text);

/// {"d","lo","hi","resolution","mass":[...]}
Json to_json(const GridDensity& rho);
GridDensity grid_from_json(const Json& j);

/// Rows "x_1,...,x_d,weight".
std::string atoms_to_csv(const AtomicMeasure& mu);
AtomicMeasure atoms_from_csv(const std::string& text);

Json to_json(const OptimResult& r);
Json to_json(const DiagnosticsReport& r);
Json to_json(const RecoveryResult& r);
Json to_json(const InstabilityCertificate& c);

/// Number formatting shared by every CSV writer (17 significant digits).
std::string format_number(double v);

/// Plain CSV table with a header row.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add_row(const std::vector<double>& row);
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<double>> rows_;
};

/// JSON-safe number: non-finite values become null.
Json number(double v);

std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t v);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);
Json read_json(const std::filesystem::path& path);

}  // namespace ienergy::io
