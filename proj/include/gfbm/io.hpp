#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gfbm/errors.hpp"
#include "gfbm/parameters.hpp"

namespace gfbm {

inline constexpr const char* kToolVersion = "0.1.0";

/// %.17g: enough digits for every double to round-trip.
inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_csv_row(std::ostream& os, const double* v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (i) os << ',';
    os << format_double(v[i]);
  }
  os << '\n';
}

/// Header row of times, then one row per matrix row.
inline void write_csv(std::ostream& os, const std::vector<double>& header, const Eigen::MatrixXd& m) {
  write_csv_row(os, header.data(), header.size());
  std::vector<double> row(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
    write_csv_row(os, row.data(), row.size());
  }
}

inline void write_csv_file(const std::string& path, const std::vector<double>& header, const Eigen::MatrixXd& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_csv(os, header, m);
}

struct CsvTable {
  std::vector<double> header;
  Eigen::MatrixXd rows;
};

inline std::vector<double> parse_csv_line(const std::string& line) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t next = line.find(',', pos);
    if (next == std::string::npos) next = line.size();
    const std::string field = line.substr(pos, next - pos);
    if (field.find_first_not_of(" \t\r") != std::string::npos) out.push_back(std::stod(field));
    pos = next + 1;
  }
  return out;
}

/// Numeric CSV with a header row, as written by write_csv.
inline CsvTable read_csv_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error(path + " is empty");
  CsvTable t;
  t.header = parse_csv_line(line);
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    rows.push_back(parse_csv_line(line));
    if (rows.back().size() != t.header.size()) throw std::runtime_error(path + ": ragged row");
  }
  t.rows.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < t.header.size(); ++j)
      t.rows(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return t;
}

/// Times from a text file, one per line or comma separated.
inline std::vector<double> read_times(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::vector<double> out;
  std::string line;
  while (std::getline(is, line)) {
    const auto v = parse_csv_line(line);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

struct RunManifest {
  std::string command;
  ModelParams params;
  std::uint64_t seed = 0;
  std::string tool_version = kToolVersion;
  std::string timestamp;
  std::vector<std::string> outputs;
  std::vector<std::string> argv;
  nlohmann::json extra = nlohmann::json::object();
};

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void to_json(nlohmann::json& j, const RunManifest& m) {
  j = nlohmann::json{{"command", m.command}, {"params", m.params},       {"seed", m.seed},
                     {"tool_version", m.tool_version}, {"timestamp", m.timestamp},
                     {"outputs", m.outputs},  {"argv", m.argv}};
  for (const auto& [k, v] : m.extra.items()) j[k] = v;
}

inline std::string manifest_path(const std::string& output) { return output + ".manifest.json"; }

inline void write_manifest(const RunManifest& m) {
  for (const auto& out : m.outputs) {
    std::ofstream os(manifest_path(out), std::ios::binary);
    if (!os) throw std::runtime_error("cannot write manifest for " + out);
    os << nlohmann::json(m).dump(2) << '\n';
  }
}

}  // namespace gfbm
