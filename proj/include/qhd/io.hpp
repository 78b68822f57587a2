#pragma once

// Result emission: CSV series, gnuplot data files, and the JSON run summary.

#include "qhd/config.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace qhd {

struct Table {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row) { rows.push_back(std::move(row)); }
};

struct RunOutput {
  std::string experiment;
  Json metrics = Json::object();
  Json fitted_rate = Json::object();
  Json pass_flags = Json::object();
  std::vector<Table> csv;
  std::vector<Table> dat;

  bool all_passed() const;
};

/// 64-bit FNV-1a of the canonical (sorted-key, compact) dump of the config document.
std::uint64_t config_hash(const Json& doc);

/// Shortest round-trip representation; identical inputs give identical bytes.
std::string format_number(double x);

void write_csv(const std::filesystem::path& file, const Table& t);
/// Whitespace-separated columns with a commented header line.
void write_dat(const std::filesystem::path& file, const Table& t);

/// Writes config.json, summary.json, <name>.csv and <name>.dat into `dir`.
void write_run(const std::filesystem::path& dir, const ExperimentConfig& cfg, const RunOutput& out);

}  // namespace qhd
