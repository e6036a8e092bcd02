#include "bregkit/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "bregkit/rng.hpp"

namespace bregkit {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

Mat read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IOError, "cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw Error(ErrorCode::IOError, "bad number '" + cell + "' in " + path);
      }
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  require(!rows.empty(), ErrorCode::IOError, "empty CSV " + path);
  Mat a(static_cast<Index>(rows.size()), static_cast<Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i].size() == rows[0].size(), ErrorCode::IOError, "ragged CSV " + path);
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      a(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  }
  return a;
}

Vec read_vector_csv(const std::string& path) {
  Mat a = read_matrix_csv(path);
  if (a.cols() == 1) return a.col(0);
  if (a.rows() == 1) return a.row(0).transpose();
  throw Error(ErrorCode::IOError, "expected a single-column CSV in " + path);
}

void write_matrix_csv(const std::string& path, const Mat& a) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::IOError, "cannot write " + path);
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(a(i, j));
    }
    out << '\n';
  }
}

void write_vector_csv(const std::string& path, const Vec& v) {
  write_matrix_csv(path, v);
}

double pairwise_sum(const double* data, Index n) {
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (Index i = 0; i < n; ++i) s += data[i];
    return s;
  }
  Index half = n / 2;
  return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

}  // namespace bregkit
