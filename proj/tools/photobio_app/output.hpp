#pragma once

// CSV and JSON emitters. Every file starts with the same metadata: schema
// name, code version, command, assumption flags and the full config echo.
// CSV carries it as leading '#' lines before the header row.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "photobio_app/config.hpp"

namespace photobio::app {

using json = nlohmann::ordered_json;
using KeyValues = std::vector<std::pair<std::string, std::string>>;

inline constexpr const char* kCodeVersion = PHOTOBIO_VERSION;

struct Metadata {
  std::string command;
  KeyValues config;
  KeyValues assumptions;
};

inline KeyValues assumption_flags(const RunConfig& c) {
  const Params& p = c.params;
  return {
      {"cell_rate", std::string(to_string(p.cell_rate))},
      {"chi_in_calibrated_range", p.taxis().in_calibrated_range() ? "true" : "false"},
      {"chi_from_G_c", "exact root of the taxis zero-crossing"},
      {"R_m", "metadata only"},
  };
}

inline Metadata make_metadata(const std::string& command, const RunConfig& c, KeyValues extra = {}) {
  Metadata m{command, echo(c), assumption_flags(c)};
  m.assumptions.insert(m.assumptions.end(), extra.begin(), extra.end());
  return m;
}

/// 12 significant digits; NaN and infinities become null.
inline json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  const double r = std::strtod(fmt12(v).c_str(), nullptr);
  return r == 0.0 ? 0.0 : r;
}

inline json metadata_json(const Metadata& m, const std::string& schema) {
  json cfg = json::object();
  for (const auto& [k, v] : m.config) cfg[k] = v;
  json as = json::object();
  for (const auto& [k, v] : m.assumptions) as[k] = v;
  return json{{"schema", schema}, {"code_version", kCodeVersion}, {"command", m.command},
              {"assumptions", as}, {"config", cfg}};
}

inline std::filesystem::path prepare_dir(const std::string& dir) {
  std::filesystem::path p(dir);
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec || !std::filesystem::is_directory(p)) throw ConfigError("output directory '" + dir + "' is not writable");
  return p;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

/// Streams rows to a CSV file. Cells are strings (numbers preformatted with
/// fmt12).
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const Metadata& meta, const std::string& schema,
            const std::vector<std::string>& columns)
      : out_(path), ncol_(columns.size()) {
    if (!out_) throw ConfigError("cannot write '" + path.string() + "'");
    out_ << "# schema: " << schema << "\n";
    out_ << "# code_version: " << kCodeVersion << "\n";
    out_ << "# command: " << meta.command << "\n";
    for (const auto& [k, v] : meta.assumptions) out_ << "# assumption." << k << ": " << v << "\n";
    for (const auto& [k, v] : meta.config) out_ << "# config." << k << ": " << v << "\n";
    row(columns);
  }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != ncol_) throw std::logic_error("CSV row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << csv_field(cells[i]);
    out_ << "\n";
  }

  void row_numbers(const std::vector<double>& cells) {
    std::vector<std::string> s;
    s.reserve(cells.size());
    for (double v : cells) s.push_back(fmt12(v));
    row(s);
  }

 private:
  std::ofstream out_;
  std::size_t ncol_;
};

inline void write_json(const std::filesystem::path& path, const Metadata& meta, const std::string& schema,
                       json data) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  json doc{{"metadata", metadata_json(meta, schema)}, {"data", std::move(data)}};
  out << doc.dump(2) << "\n";
}

/// Tabular result written as CSV or as JSON {"columns", "rows"} depending on
/// the configured format. Returns the path written.
inline std::filesystem::path write_table(const std::filesystem::path& dir, const std::string& stem,
                                         const RunConfig& c, const Metadata& meta, const std::string& schema,
                                         const std::vector<std::string>& columns,
                                         const std::vector<std::vector<std::string>>& rows) {
  if (c.format == "json") {
    json data{{"columns", columns}, {"rows", json::array()}};
    for (const auto& r : rows) {
      json jr = json::array();
      for (const auto& cell : r) {
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        if (!cell.empty() && end && *end == '\0') jr.push_back(num(v));
        else jr.push_back(cell);
      }
      data["rows"].push_back(std::move(jr));
    }
    const auto path = dir / (stem + ".json");
    write_json(path, meta, schema, std::move(data));
    return path;
  }
  const auto path = dir / (stem + ".csv");
  CsvWriter w(path, meta, schema, columns);
  for (const auto& r : rows) w.row(r);
  return path;
}

}  // namespace photobio::app
