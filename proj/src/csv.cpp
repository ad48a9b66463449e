#include "rdream/csv.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>

#include "rdream/data_model.hpp"

namespace rdream {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

bool parse_cell(const std::string& s, double* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return false;
  if (!std::isfinite(v)) return false;
  *out = v;
  return true;
}

}  // namespace

CsvIngestResult ingest_csv(const std::string& path,
                           const std::string& response_column,
                           const std::vector<std::string>& covariate_columns) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFoundError(path);

  std::string line;
  if (!std::getline(in, line)) throw AllRowsDroppedError();
  const std::vector<std::string> header = split_line(line);

  auto column_index = [&header](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw MissingColumnError(name);
    return static_cast<std::size_t>(it - header.begin());
  };

  CsvIngestResult result;
  result.response_name = response_column;
  const std::size_t y_col = column_index(response_column);

  std::vector<std::size_t> x_cols;
  if (covariate_columns.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (j != y_col) {
        x_cols.push_back(j);
        result.covariate_names.push_back(header[j]);
      }
    }
  } else {
    for (const std::string& name : covariate_columns) {
      x_cols.push_back(column_index(name));
      result.covariate_names.push_back(name);
    }
  }
  if (x_cols.empty()) throw EmptyCovariatesError();

  std::vector<double> ys;
  std::vector<double> xs;  // row major
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    double yv = 0.0;
    std::vector<double> row(x_cols.size());
    bool ok = y_col < cells.size() && parse_cell(cells[y_col], &yv);
    for (std::size_t j = 0; ok && j < x_cols.size(); ++j) {
      ok = x_cols[j] < cells.size() && parse_cell(cells[x_cols[j]], &row[j]);
    }
    if (!ok) {
      ++result.dropped_rows;
      continue;
    }
    ys.push_back(yv);
    xs.insert(xs.end(), row.begin(), row.end());
  }
  if (ys.empty()) throw AllRowsDroppedError();

  const Index n = static_cast<Index>(ys.size());
  const Index p = static_cast<Index>(x_cols.size());
  Vector y = Eigen::Map<Vector>(ys.data(), n);
  Matrix x = Eigen::Map<
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      xs.data(), n, p);
  result.data = validate_dataset(y, x);
  return result;
}

}  // namespace rdream
