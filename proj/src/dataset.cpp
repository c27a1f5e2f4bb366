#include "lab/dataset.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace lab {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_double(const std::string& field, int line_no) {
  const char* first = field.data();
  const char* last = field.data() + field.size();
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || field.empty()) {
    throw ParseError("expected a number, got '" + field + "'", line_no);
  }
  if (!std::isfinite(value)) {
    throw ParseError("non-finite value '" + field + "'", line_no);
  }
  return value;
}

}  // namespace

Dataset make_dataset(Matrix x, Vector y) {
  if (x.rows() != y.size()) {
    throw DimensionMismatch("dataset: " + std::to_string(x.rows()) +
                            " rows of x vs " + std::to_string(y.size()) +
                            " labels");
  }
  if (x.rows() == 0) throw EmptyDataset("dataset has zero rows");
  if (x.cols() == 0) throw DimensionMismatch("dataset has zero feature columns");
  if (!x.allFinite() || !y.allFinite()) {
    throw NumericalFailure("dataset contains non-finite entries");
  }
  return Dataset{std::move(x), std::move(y)};
}

Dataset parse_dataset_csv(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  int d = -1;
  std::vector<std::vector<double>> rows;

  while (std::getline(ss, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (d < 0) {
      // Header: x1,...,xd,y
      if (fields.size() < 2 || fields.back() != "y") {
        throw ParseError("header must be x1,...,xd,y", line_no);
      }
      for (std::size_t i = 0; i + 1 < fields.size(); ++i) {
        if (fields[i] != "x" + std::to_string(i + 1)) {
          throw ParseError("header column " + std::to_string(i + 1) +
                               " must be x" + std::to_string(i + 1) +
                               ", got '" + fields[i] + "'",
                           line_no);
        }
      }
      d = static_cast<int>(fields.size()) - 1;
      continue;
    }
    if (static_cast<int>(fields.size()) != d + 1) {
      throw DimensionError("row has " + std::to_string(fields.size()) +
                               " fields, header implies " +
                               std::to_string(d + 1),
                           line_no);
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_double(f, line_no));
    rows.push_back(std::move(row));
  }

  if (d < 0) throw ParseError("missing header row", 1);
  if (rows.empty()) throw EmptyDataset("no data rows after header");

  Matrix x(static_cast<Eigen::Index>(rows.size()), d);
  Vector y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < d; ++j) x(static_cast<Eigen::Index>(i), j) = rows[i][j];
    y(static_cast<Eigen::Index>(i)) = rows[i][d];
  }
  return Dataset{std::move(x), std::move(y)};
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_dataset_csv(buf.str());
}

Dataset with_bias_column(const Dataset& d) {
  Matrix x(d.x.rows(), d.x.cols() + 1);
  x.leftCols(d.x.cols()) = d.x;
  x.col(d.x.cols()).setOnes();
  return Dataset{std::move(x), d.y};
}

}  // namespace lab
