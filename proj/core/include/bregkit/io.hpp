#pragma once

#include <string>

#include "bregkit/types.hpp"

namespace bregkit {

// Array files are headerless CSV, comma separated, LF line endings, one
// matrix row per line; vectors are a single column. Values round-trip
// exactly (%.17g).

Mat read_matrix_csv(const std::string& path);
Vec read_vector_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Mat& a);
void write_vector_csv(const std::string& path, const Vec& v);

std::string format_double(double x);

}  // namespace bregkit
