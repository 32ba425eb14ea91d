#include "codedsketch/matrix_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <vector>

#include "codedsketch/error.hpp"

namespace codedsketch::io {

namespace {

constexpr std::array<char, 8> kMagic = {'C', 'S', 'K', 'M', 'A', 'T', '0', '1'};

bool ends_with_csv(const std::string& path) {
  return path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
}

void put_u64(std::ostream& out, std::uint64_t value) {
  std::array<char, 8> bytes{};
  for (std::size_t i = 0; i < 8; ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xffu);
  out.write(bytes.data(), 8);
}

std::uint64_t get_u64(const unsigned char* bytes) {
  std::uint64_t value = 0;
  for (std::size_t i = 0; i < 8; ++i) value |= std::uint64_t{bytes[i]} << (8 * i);
  return value;
}

}  // namespace

Matrix load_matrix(const std::string& path) {
  return ends_with_csv(path) ? load_csv(path) : load_binary(path);
}

void save_matrix(const std::string& path, const Matrix& matrix) {
  if (ends_with_csv(path)) {
    save_csv(path, matrix);
  } else {
    save_binary(path, matrix);
  }
}

Matrix load_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open matrix file '" + path + "'");
  std::array<unsigned char, 24> header{};
  if (!in.read(reinterpret_cast<char*>(header.data()), header.size())) {
    throw IoError("'" + path + "': truncated header");
  }
  if (std::memcmp(header.data(), kMagic.data(), kMagic.size()) != 0) {
    throw IoError("'" + path + "': bad magic, not a CSKMAT01 matrix file");
  }
  const auto rows = get_u64(header.data() + 8);
  const auto cols = get_u64(header.data() + 16);
  const auto limit = static_cast<std::uint64_t>(std::numeric_limits<Eigen::Index>::max());
  if (rows == 0 || cols == 0 || rows > limit / cols / 8) {
    throw IoError("'" + path + "': invalid dimensions " + std::to_string(rows) + "x" +
                  std::to_string(cols));
  }
  Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::vector<unsigned char> raw(rows * cols * 8);
  if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
    throw IoError("'" + path + "': truncated data, expected " + std::to_string(rows * cols) +
                  " values");
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw IoError("'" + path + "': trailing bytes after matrix data");
  }
  for (std::uint64_t q = 0; q < rows * cols; ++q) {
    out(static_cast<Eigen::Index>(q / cols), static_cast<Eigen::Index>(q % cols)) =
        std::bit_cast<double>(get_u64(raw.data() + 8 * q));
  }
  return out;
}

void save_binary(const std::string& path, const Matrix& matrix) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write matrix file '" + path + "'");
  out.write(kMagic.data(), kMagic.size());
  put_u64(out, static_cast<std::uint64_t>(matrix.rows()));
  put_u64(out, static_cast<std::uint64_t>(matrix.cols()));
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      put_u64(out, std::bit_cast<std::uint64_t>(matrix(i, j)));
    }
  }
  if (!out) throw IoError("write to '" + path + "' failed");
}

Matrix load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open matrix file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      auto end = line.find(',', start);
      if (end == std::string::npos) end = line.size();
      auto first = line.find_first_not_of(" \t", start);
      auto last = line.find_last_not_of(" \t", end - 1);
      double value = 0.0;
      const char* b = line.data() + (first == std::string::npos || first >= end ? end : first);
      const char* e = line.data() + (last == std::string::npos || last < start ? end : last + 1);
      if (b < e && *b == '+') ++b;
      const auto [ptr, ec] = std::from_chars(b, e, value);
      if (b >= e || ec != std::errc() || ptr != e) {
        throw IoError("'" + path + "' line " + std::to_string(line_no) +
                      ": cannot parse value '" + line.substr(start, end - start) + "'");
      }
      row.push_back(value);
      if (end == line.size()) break;
      start = end + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError("'" + path + "' line " + std::to_string(line_no) + ": expected " +
                    std::to_string(rows.front().size()) + " columns, found " +
                    std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("'" + path + "' contains no rows");
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return out;
}

void save_csv(const std::string& path, const Matrix& matrix) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write matrix file '" + path + "'");
  std::array<char, 32> buf{};
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
      if (j > 0) out << ',';
      const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), matrix(i, j));
      out.write(buf.data(), ptr - buf.data());
    }
    out << '\n';
  }
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace codedsketch::io
