#ifndef RWRE_REPORT_HPP
#define RWRE_REPORT_HPP

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace rwre {

inline constexpr const char* kArtifactVersion = "0.1.0";

/// One estimate. replica and component are -1 for aggregates; grid_value is
/// NaN when the row has no grid point.
struct ReportRow {
  std::string section;
  std::string model;
  std::uint64_t seed = 0;
  std::int64_t replica = -1;
  int component = -1;
  std::string grid_name;
  double grid_value = std::numeric_limits<double>::quiet_NaN();
  std::string quantity;
  double estimate = 0.0;
  double std_error = std::numeric_limits<double>::quiet_NaN();
};

struct Verdict {
  std::string name;
  bool passed = false;
  double observed = 0.0;
  std::string threshold;
  std::string detail;
};

struct ExperimentReport {
  std::string version = kArtifactVersion;
  std::string experiment;
  std::string config;  // verbatim config text
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<ReportRow> rows;
  std::vector<Verdict> verdicts;

  bool all_passed() const {
    for (const auto& v : verdicts) {
      if (!v.passed) return false;
    }
    return true;
  }
};

/// Shortest round-trip decimal form; "nan", "inf", "-inf" for non-finite values.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, p);
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline constexpr const char* kRowHeader =
    "section,model,seed,replica,component,grid_name,grid_value,quantity,estimate,std_error";
inline constexpr const char* kVerdictHeader = "name,passed,observed,threshold,detail";

/// Rows as CSV; the header block repeats the version, seed, metadata and
/// config as '#' comment lines.
inline std::string rows_csv(const ExperimentReport& r) {
  std::ostringstream out;
  out << "# version: " << r.version << "\n# experiment: " << r.experiment << "\n# seed: " << r.seed << "\n";
  for (const auto& [k, v] : r.metadata) out << "# " << k << ": " << v << "\n";
  out << "# config:\n";
  std::istringstream cfg(r.config);
  std::string line;
  while (std::getline(cfg, line)) out << "#   " << line << "\n";
  out << kRowHeader << "\n";
  for (const ReportRow& row : r.rows) {
    out << csv_field(row.section) << ',' << csv_field(row.model) << ',' << row.seed << ',' << row.replica << ','
        << row.component << ',' << csv_field(row.grid_name) << ','
        << (std::isnan(row.grid_value) ? std::string() : format_number(row.grid_value)) << ','
        << csv_field(row.quantity) << ',' << format_number(row.estimate) << ','
        << (std::isnan(row.std_error) ? std::string() : format_number(row.std_error)) << "\n";
  }
  return out.str();
}

inline std::string verdicts_csv(const ExperimentReport& r) {
  std::ostringstream out;
  out << kVerdictHeader << "\n";
  for (const Verdict& v : r.verdicts) {
    out << csv_field(v.name) << ',' << (v.passed ? "true" : "false") << ',' << format_number(v.observed) << ','
        << csv_field(v.threshold) << ',' << csv_field(v.detail) << "\n";
  }
  return out.str();
}

inline nlohmann::ordered_json number_json(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

inline std::string report_json(const ExperimentReport& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["version"] = r.version;
  j["experiment"] = r.experiment;
  j["seed"] = r.seed;
  j["all_passed"] = r.all_passed();
  ordered_json meta = ordered_json::object();
  for (const auto& [k, v] : r.metadata) meta[k] = v;
  j["metadata"] = meta;
  ordered_json verdicts = ordered_json::array();
  for (const Verdict& v : r.verdicts) {
    verdicts.push_back({{"name", v.name},
                        {"passed", v.passed},
                        {"observed", number_json(v.observed)},
                        {"threshold", v.threshold},
                        {"detail", v.detail}});
  }
  j["verdicts"] = verdicts;
  ordered_json rows = ordered_json::array();
  for (const ReportRow& row : r.rows) {
    rows.push_back({{"section", row.section},
                    {"model", row.model},
                    {"seed", row.seed},
                    {"replica", row.replica},
                    {"component", row.component},
                    {"grid_name", row.grid_name},
                    {"grid_value", number_json(row.grid_value)},
                    {"quantity", row.quantity},
                    {"estimate", number_json(row.estimate)},
                    {"std_error", number_json(row.std_error)}});
  }
  j["rows"] = rows;
  j["config"] = r.config;
  return j.dump(2) + "\n";
}

/// Writes <experiment>.json, or <experiment>.csv plus <experiment>.verdicts.csv,
/// into dir and returns the paths written.
inline std::vector<std::filesystem::path> emit(const ExperimentReport& r, const std::string& format,
                                               const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [](const std::filesystem::path& p, const std::string& body) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + p.string() + " for writing");
    f << body;
    if (!f) throw std::runtime_error("write to " + p.string() + " failed");
  };
  std::vector<std::filesystem::path> out;
  if (format == "json") {
    out.push_back(dir / (r.experiment + ".json"));
    write(out.back(), report_json(r));
  } else if (format == "csv") {
    out.push_back(dir / (r.experiment + ".csv"));
    write(out.back(), rows_csv(r));
    out.push_back(dir / (r.experiment + ".verdicts.csv"));
    write(out.back(), verdicts_csv(r));
  } else {
    throw std::invalid_argument("unknown report format '" + format + "' (csv, json)");
  }
  return out;
}

}  // namespace rwre

#endif  // RWRE_REPORT_HPP
