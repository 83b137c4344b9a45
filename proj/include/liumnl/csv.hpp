#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "liumnl/model.hpp"

namespace liumnl {

/// Raised for missing files, malformed rows and non-numeric cells. Messages
/// identify the offending row and column where that is meaningful.
struct CsvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

/// Read a comma-separated file with a header row. Every data row must have
/// exactly as many fields as the header.
inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open '" + path + "'");
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (lineno == 1) {
      for (std::string& f : fields) f = trim(f);
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size())
      throw CsvError("'" + path + "' row " + std::to_string(lineno) + ": expected " +
                     std::to_string(table.header.size()) + " fields, found " +
                     std::to_string(fields.size()));
    table.rows.push_back(std::move(fields));
  }
  if (table.header.empty()) throw CsvError("'" + path + "' has no header row");
  return table;
}

inline double parse_double(const std::string& raw, const std::string& context) {
  const std::string s = trim(raw);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw CsvError(context + ": '" + raw + "' is not a number");
  return value;
}

struct LoadedDataset {
  Dataset data;
  std::vector<std::string> covariate_names;
};

/// Load a modelling dataset: `response` names the label column, everything
/// else must be numeric. `reference` is a level name or "last" for the
/// lexicographically last level. An intercept column of ones is appended
/// when requested.
inline LoadedDataset load_dataset_csv(const std::string& path, const std::string& response,
                                      const std::string& reference, bool intercept) {
  const CsvTable table = read_csv(path);
  std::size_t response_col = table.header.size();
  for (std::size_t j = 0; j < table.header.size(); ++j)
    if (table.header[j] == response) response_col = j;
  if (response_col == table.header.size())
    throw CsvError("'" + path + "' has no column named '" + response + "'");

  const std::size_t n = table.rows.size();
  const std::size_t p = table.header.size() - 1;
  if (n == 0) throw CsvError("'" + path + "' has no data rows");

  Matrix x(n, p + (intercept ? 1 : 0));
  std::vector<std::string> labels(n);
  std::vector<std::string> names;
  for (std::size_t j = 0; j < table.header.size(); ++j)
    if (j != response_col) names.push_back(table.header[j]);

  for (std::size_t i = 0; i < n; ++i) {
    std::size_t col = 0;
    for (std::size_t j = 0; j < table.header.size(); ++j) {
      if (j == response_col) {
        labels[i] = table.rows[i][j];
        continue;
      }
      x(i, col) = parse_double(table.rows[i][j], "'" + path + "' row " + std::to_string(i + 2) +
                                                     ", column '" + table.header[j] + "'");
      ++col;
    }
    if (intercept) x(i, p) = 1.0;
  }
  if (intercept) names.push_back("(intercept)");

  std::string ref = reference;
  if (ref == "last") {
    std::vector<std::string> seen;
    for (const std::string& l : labels) seen.push_back(trim(l));
    std::sort(seen.begin(), seen.end());
    ref = seen.back();
  }
  return {Dataset::from_labels(std::move(x), labels, ref), std::move(names)};
}

/// Load a purely numeric matrix, optionally skipping one named column.
inline std::pair<Matrix, std::vector<std::string>> load_numeric_csv(
    const std::string& path, const std::string& skip_column = "") {
  const CsvTable table = read_csv(path);
  std::size_t skip = table.header.size();
  if (!skip_column.empty()) {
    for (std::size_t j = 0; j < table.header.size(); ++j)
      if (table.header[j] == skip_column) skip = j;
    if (skip == table.header.size())
      throw CsvError("'" + path + "' has no column named '" + skip_column + "'");
  }
  const std::size_t p = table.header.size() - (skip < table.header.size() ? 1 : 0);
  Matrix x(table.rows.size(), p);
  std::vector<std::string> names;
  for (std::size_t j = 0; j < table.header.size(); ++j)
    if (j != skip) names.push_back(table.header[j]);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    std::size_t col = 0;
    for (std::size_t j = 0; j < table.header.size(); ++j) {
      if (j == skip) continue;
      x(i, col++) = parse_double(table.rows[i][j], "'" + path + "' row " + std::to_string(i + 2) +
                                                       ", column '" + table.header[j] + "'");
    }
  }
  return {std::move(x), std::move(names)};
}

/// Pearson correlation matrix of the columns of X. A zero-variance column
/// makes the correlation undefined and raises DataError.
inline Matrix correlation_matrix(const Matrix& x) {
  const std::size_t n = x.rows(), p = x.cols();
  require(n >= 2, "correlation_matrix: need at least two rows");
  Vector mean(p, 0.0), sd(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < n; ++i) mean[j] += x(i, j);
    mean[j] /= static_cast<double>(n);
  }
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const double d = x(i, j) - mean[j];
      sd[j] += d * d;
    }
    if (sd[j] <= 0.0)
      throw DataError("correlation_matrix: column " + std::to_string(j + 1) + " has zero variance");
    sd[j] = std::sqrt(sd[j]);
  }
  Matrix r(p, p);
  for (std::size_t a = 0; a < p; ++a) {
    r(a, a) = 1.0;
    for (std::size_t b = a + 1; b < p; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += (x(i, a) - mean[a]) * (x(i, b) - mean[b]);
      r(a, b) = s / (sd[a] * sd[b]);
      r(b, a) = r(a, b);
    }
  }
  return r;
}

}  // namespace liumnl
