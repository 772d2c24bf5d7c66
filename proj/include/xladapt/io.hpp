#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "xladapt/errors.hpp"
#include "xladapt/hash.hpp"

namespace xladapt::io {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write file: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw DataError("short write: " + path.string());
}

// Write to <path>.tmp then rename, so readers never observe partial content.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  write_file(tmp, content);
  std::filesystem::rename(tmp, path);
}

inline uint64_t file_digest(const std::filesystem::path& path) {
  return hash::fnv1a64(read_file(path));
}

// Minimal RFC 4180 style quoting.
inline std::string csv_field(std::string_view v) {
  bool needs_quote = v.find_first_of(",\"\n\r") != std::string_view::npos;
  if (!needs_quote) return std::string(v);
  std::string out = "\"";
  for (char c : v) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline void csv_row(std::ostream& os, std::initializer_list<std::string_view> fields) {
  bool first = true;
  for (auto f : fields) {
    if (!first) os << ',';
    os << csv_field(f);
    first = false;
  }
  os << '\n';
}

inline void csv_row(std::ostream& os, const std::vector<std::string>& fields) {
  bool first = true;
  for (const auto& f : fields) {
    if (!first) os << ',';
    os << csv_field(f);
    first = false;
  }
  os << '\n';
}

// Round-trip-safe formatting for values consumed by later pipeline stages.
inline std::string fmt_full(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// Presentation rounding; internal values stay at full precision.
inline std::string fmt_fixed(double x, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, x);
  return buf;
}

}  // namespace xladapt::io
