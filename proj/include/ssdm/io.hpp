#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssdm/common.hpp"

namespace ssdm {

using json = nlohmann::json;

/// Writes a trace as UTF-8 CSV with header `index,value`, one sample per row.
/// Values are printed with %.17g so a read-back is bit-exact.
inline void write_trace_csv(const std::filesystem::path& path,
                            const std::vector<double>& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "index,value\n";
  char buf[64];
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i, values[i]);
    out << buf;
  }
  if (!out) throw IoError("write failed: " + path.string());
}

/// Reads a trace CSV produced by write_trace_csv (or any `index,value` file).
inline std::vector<double> read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty file: " + path.string());
  // Header row is required but its exact spelling is not enforced.
  std::vector<double> values;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw IoError(path.string() + ":" + std::to_string(lineno) +
                    ": expected `index,value`");
    const char* first = line.data() + comma + 1;
    const char* last = line.data() + line.size();
    if (last > first && last[-1] == '\r') --last;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
      throw IoError(path.string() + ":" + std::to_string(lineno) +
                    ": bad value `" + std::string(first, last) + "`");
    values.push_back(v);
  }
  return values;
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace ssdm
