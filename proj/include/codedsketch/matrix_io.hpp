#pragma once

// Matrix files. The binary container is the 8-byte magic "CSKMAT01", rows and
// cols as little-endian uint64, then rows*cols little-endian float64 values in
// row-major order. Files ending in ".csv" are read and written as plain
// comma-separated rows instead.

#include <string>

#include "codedsketch/poly_codec.hpp"

namespace codedsketch::io {

using poly::Matrix;

Matrix load_matrix(const std::string& path);
void save_matrix(const std::string& path, const Matrix& matrix);

Matrix load_binary(const std::string& path);
void save_binary(const std::string& path, const Matrix& matrix);
Matrix load_csv(const std::string& path);
void save_csv(const std::string& path, const Matrix& matrix);

}  // namespace codedsketch::io
