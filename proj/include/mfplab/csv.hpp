#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "mfplab/error.hpp"
#include "mfplab/graph.hpp"

namespace mfplab::csv {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("missing file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

/// Splits into lines, dropping a trailing empty line and any '\r'.
inline std::vector<std::string_view> lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    start = end + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& value) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  return ec == std::errc() && ptr == s.data() + s.size();
}

/// Calls fn(field_index, field) for each comma-separated field of a line.
template <typename Fn>
void for_each_field(std::string_view line, Fn&& fn) {
  std::size_t idx = 0;
  std::size_t start = 0;
  while (true) {
    std::size_t end = line.find(',', start);
    fn(idx++, line.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
}

/// Shortest decimal text that parses back to the same double.
inline void append_number(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("io.write", "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("io.write", "write failed for " + path.string());
}

/// Writes a dense matrix as headerless comma-separated decimal rows.
template <typename Derived>
void write_matrix(const std::filesystem::path& path, const Eigen::MatrixBase<Derived>& m) {
  std::string out;
  out.reserve(static_cast<std::size_t>(m.rows() * m.cols() * 8));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out.push_back(',');
      append_number(out, static_cast<double>(m(i, j)));
    }
    out.push_back('\n');
  }
  write_file(path, out);
}

inline FeatureMatrix read_matrix(const std::filesystem::path& path, Index expected_rows, Index expected_cols) {
  const std::string text = read_file(path);
  const auto rows = lines(text);
  if (static_cast<Index>(rows.size()) != expected_rows)
    throw LoadError(path.filename().string() + ": expected " + std::to_string(expected_rows) + " rows, found " +
                    std::to_string(rows.size()));
  FeatureMatrix m(expected_rows, expected_cols);
  for (Index i = 0; i < expected_rows; ++i) {
    Index count = 0;
    for_each_field(rows[i], [&](std::size_t j, std::string_view field) {
      ++count;
      if (static_cast<Index>(j) >= expected_cols) return;
      double v = 0;
      if (!parse_number(field, v))
        throw LoadError(path.filename().string() + ": bad number '" + std::string(field) + "' at line " +
                        std::to_string(i + 1));
      m(i, static_cast<Index>(j)) = v;
    });
    if (count != expected_cols)
      throw LoadError(path.filename().string() + ": line " + std::to_string(i + 1) + " has " + std::to_string(count) +
                      " values, expected " + std::to_string(expected_cols));
  }
  return m;
}

}  // namespace mfplab::csv
