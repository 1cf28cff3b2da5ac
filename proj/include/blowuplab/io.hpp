#pragma once

// Deterministic result persistence: CSV with 17-significant-digit reals and
// '.' decimal separator regardless of locale, FNV-1a content digests, and
// the per-run manifest.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace blowuplab::io {

/// Shortest-faithful decimal rendering at 17 significant digits, C locale.
inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline uint64_t fnv1a64(std::string_view bytes) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string digest_hex(std::string_view bytes) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

/// Row-oriented CSV assembly; all writes go through write_file so each run
/// directory has a single writer.
class CsvBuilder {
 public:
  explicit CsvBuilder(const std::vector<std::string>& header) {
    append_row_raw(header);
  }
  void add_row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_real(v));
    append_row_raw(cells);
  }
  void add_row_raw(const std::vector<std::string>& cells) {
    append_row_raw(cells);
  }
  const std::string& str() const { return body_; }

 private:
  void append_row_raw(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) body_ += ',';
      body_ += cells[i];
    }
    body_ += '\n';
  }
  std::string body_;
};

inline void write_file(const std::filesystem::path& path,
                       std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("write_file: cannot open " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write_file: short write " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_file: cannot open " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  return content;
}

}  // namespace blowuplab::io
