#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ncst/error.hpp"
#include "ncst/numerics.hpp"

namespace ncst {

/// n x k observations with one label per column.
struct DataMatrix {
  std::vector<std::string> labels;
  Matrix values;

  Eigen::Index rows() const noexcept { return values.rows(); }
  Eigen::Index cols() const noexcept { return values.cols(); }
};

// Shortest text that reads back to the same double, capped at 17 significant digits.
inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"'))
    s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.size() - start : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return in;
}

}  // namespace detail

/// Reads a numeric CSV with a header row. Blank lines are skipped; any other
/// malformed line raises InputError naming its line number.
inline DataMatrix read_csv(std::istream& in, const std::string& source = "input") {
  std::string line;
  std::size_t line_no = 0;
  DataMatrix dm;
  while (std::getline(in, line)) {
    ++line_no;
    if (!detail::trim(line).empty()) break;
  }
  if (detail::trim(line).empty()) throw InputError(source + ": no header row");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
  for (auto f : detail::split_fields(line)) dm.labels.emplace_back(f);
  const auto k = dm.labels.size();
  std::vector<double> flat;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_fields(line);
    if (fields.size() != k)
      throw InputError(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(k) + " fields, found " +
                       std::to_string(fields.size()));
    for (std::size_t j = 0; j < k; ++j) {
      double v;
      if (!detail::parse_double(fields[j], v) || !std::isfinite(v))
        throw InputError(source + ":" + std::to_string(line_no) + ": column '" + dm.labels[j] +
                         "' is not a finite number");
      flat.push_back(v);
    }
    ++rows;
  }
  dm.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < k; ++j)
      dm.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = flat[i * k + j];
  return dm;
}

inline DataMatrix read_csv(const std::string& path) {
  auto in = detail::open_input(path);
  return read_csv(in, path);
}

inline void write_csv(std::ostream& out, const DataMatrix& dm) {
  for (std::size_t j = 0; j < dm.labels.size(); ++j) out << (j ? "," : "") << dm.labels[j];
  out << '\n';
  for (Eigen::Index i = 0; i < dm.rows(); ++i) {
    for (Eigen::Index j = 0; j < dm.cols(); ++j) out << (j ? "," : "") << format_double(dm.values(i, j));
    out << '\n';
  }
}

inline std::vector<std::string> default_labels(Eigen::Index k, const std::string& prefix = "t") {
  std::vector<std::string> out;
  for (Eigen::Index j = 0; j < k; ++j) out.push_back(prefix + std::to_string(j + 1));
  return out;
}

// Feature names of the WDBC file in UCI column order (after id and diagnosis):
// ten mean features, then the same ten as standard errors, then the ten "worst" values.
inline const std::array<std::string, 10>& wdbc_base_features() {
  static const std::array<std::string, 10> names{"radius",     "texture",   "perimeter", "area",
                                                 "smoothness", "compactness", "concavity", "concave points",
                                                 "symmetry",   "fractal_dimension"};
  return names;
}

inline std::vector<std::string> wdbc_uci_columns() {
  std::vector<std::string> cols{"id", "diagnosis"};
  for (const char* suffix : {"_mean", "_se", "_worst"})
    for (const auto& f : wdbc_base_features()) cols.push_back(f + suffix);
  return cols;
}

inline const std::vector<std::string>& wdbc_selected_features() {
  static const std::vector<std::string> names{"concavity_se", "symmetry_se", "fractal_dimension_se"};
  return names;
}

/// Extracts concavity_se, symmetry_se and fractal_dimension_se from a WDBC file.
/// Accepts a header row naming the columns (any order, extra columns ignored) or the
/// 32-column headerless UCI layout.
inline DataMatrix read_wdbc(std::istream& in, const std::string& source = "input") {
  const auto& wanted = wdbc_selected_features();
  std::vector<std::string> lines;
  std::vector<std::size_t> line_numbers;
  {
    std::string line;
    std::size_t no = 0;
    while (std::getline(in, line)) {
      ++no;
      if (detail::trim(line).empty()) continue;
      if (lines.empty() && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);
      lines.push_back(line);
      line_numbers.push_back(no);
    }
  }
  if (lines.empty()) throw InputError(source + ": file is empty");

  std::vector<std::size_t> index(wanted.size());
  std::size_t first = 0;
  std::size_t min_fields = 0;
  const auto head = detail::split_fields(lines[0]);
  double probe;
  if (!head.empty() && detail::parse_double(head[0], probe)) {
    const auto uci = wdbc_uci_columns();
    if (head.size() < uci.size())
      throw InputError(source + ": headerless input must have the 32-column UCI layout, found " +
                       std::to_string(head.size()) + " columns");
    for (std::size_t w = 0; w < wanted.size(); ++w)
      index[w] = static_cast<std::size_t>(std::find(uci.begin(), uci.end(), wanted[w]) - uci.begin());
    min_fields = uci.size();
  } else {
    for (std::size_t w = 0; w < wanted.size(); ++w) {
      auto it = std::find(head.begin(), head.end(), std::string_view(wanted[w]));
      if (it == head.end()) throw InputError(source + ": missing column '" + wanted[w] + "'");
      index[w] = static_cast<std::size_t>(it - head.begin());
    }
    first = 1;
    min_fields = head.size();
  }

  DataMatrix dm;
  dm.labels = wanted;
  dm.values.resize(static_cast<Eigen::Index>(lines.size() - first), static_cast<Eigen::Index>(wanted.size()));
  for (std::size_t i = first; i < lines.size(); ++i) {
    const auto fields = detail::split_fields(lines[i]);
    const std::string where = source + ":" + std::to_string(line_numbers[i]);
    // Kaggle exports end every row with an empty trailing field; tolerate a short tail
    // as long as the selected columns are present.
    if (fields.size() + 1 < min_fields)
      throw InputError(where + ": expected " + std::to_string(min_fields) + " fields, found " +
                       std::to_string(fields.size()));
    for (std::size_t w = 0; w < wanted.size(); ++w) {
      double v;
      if (index[w] >= fields.size() || !detail::parse_double(fields[index[w]], v) || !std::isfinite(v))
        throw InputError(where + ": " + wanted[w] + " is not a finite number");
      if (v < 0.0) throw InputError(where + ": " + wanted[w] + " is negative");
      dm.values(static_cast<Eigen::Index>(i - first), static_cast<Eigen::Index>(w)) = v;
    }
  }
  return dm;
}

inline DataMatrix read_wdbc(const std::string& path) {
  auto in = detail::open_input(path);
  return read_wdbc(in, path);
}

}  // namespace ncst
