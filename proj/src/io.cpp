#include "qhd/io.hpp"

#include "qhd/error.hpp"

#include <fmt/core.h>

#include <cmath>
#include <fstream>

namespace qhd {

bool RunOutput::all_passed() const {
  for (const auto& [key, value] : pass_flags.items()) {
    if (!value.is_boolean() || !value.get<bool>()) return false;
  }
  return true;
}

std::uint64_t config_hash(const Json& doc) {
  // nlohmann objects are key-sorted, so dump() is already canonical.
  const std::string text = doc.dump();
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{}", x);
}

namespace {

std::ofstream open_out(const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorKind::Config, "cannot write " + file.string());
  return out;
}

void write_rows(std::ofstream& out, const Table& t, const char* sep) {
  for (const auto& row : t.rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out << sep;
      out << format_number(row[i]);
    }
    out << '\n';
  }
}

}  // namespace

void write_csv(const std::filesystem::path& file, const Table& t) {
  auto out = open_out(file);
  for (size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << '\n';
  write_rows(out, t, ",");
}

void write_dat(const std::filesystem::path& file, const Table& t) {
  auto out = open_out(file);
  out << '#';
  for (const auto& c : t.columns) out << ' ' << c;
  out << '\n';
  write_rows(out, t, " ");
}

void write_run(const std::filesystem::path& dir, const ExperimentConfig& cfg, const RunOutput& out) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Config, "cannot create output directory " + dir.string());

  auto echo = open_out(dir / "config.json");
  echo << cfg.raw.dump(2) << '\n';

  Json summary;
  summary["experiment"] = out.experiment;
  summary["config_hash"] = fmt::format("{:016x}", config_hash(cfg.raw));
  summary["metrics"] = out.metrics;
  summary["fitted_rate"] = out.fitted_rate;
  summary["pass_flags"] = out.pass_flags;
  auto s = open_out(dir / "summary.json");
  s << summary.dump(2) << '\n';

  for (const auto& t : out.csv) write_csv(dir / (t.name + ".csv"), t);
  for (const auto& t : out.dat) write_dat(dir / (t.name + ".dat"), t);
}

}  // namespace qhd
