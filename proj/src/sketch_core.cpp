#include "codedsketch/sketch_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "codedsketch/error.hpp"

namespace codedsketch {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::parameter: return "parameter error";
    case ErrorCode::partition: return "partition error";
    case ErrorCode::configuration: return "configuration error";
    case ErrorCode::insufficient_samples: return "insufficient samples";
    case ErrorCode::numerical_failure: return "numerical failure";
    case ErrorCode::starvation: return "starvation";
    case ErrorCode::io: return "io error";
  }
  return "unknown error";
}

}  // namespace codedsketch

namespace codedsketch::sketch {

namespace {

bool is_prime(std::uint64_t x) {
  if (x < 2) return false;
  if (x % 2 == 0) return x == 2;
  for (std::uint64_t f = 3; f * f <= x; f += 2) {
    if (x % f == 0) return false;
  }
  return true;
}

}  // namespace

std::uint64_t next_prime_above(std::uint64_t x) {
  std::uint64_t candidate = x + 1;
  while (!is_prime(candidate)) ++candidate;
  return candidate;
}

std::uint64_t modulus_for_domain(std::size_t domain) {
  constexpr std::uint64_t kFloor = std::uint64_t{1} << 31;
  const std::uint64_t base = std::max<std::uint64_t>(domain, kFloor);
  // The common case is hit on every draw; skip the search.
  if (base == kFloor) return 2147483659ULL;
  return next_prime_above(base);
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
  std::uint64_t z = root + (stream + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

HashFn::HashFn(std::uint64_t multiplier, std::uint64_t offset,
               std::uint64_t prime, std::size_t range, std::size_t domain,
               std::uint64_t seed)
    : seed_(seed),
      a_(multiplier),
      b_(offset),
      prime_(prime),
      range_(range),
      domain_(domain) {
  if (range == 0 || domain == 0) {
    throw ParameterError("hash range and domain must be >= 1");
  }
  if (prime < 2 || multiplier == 0 || multiplier >= prime || offset >= prime) {
    throw ParameterError("hash parameters require 1 <= a < P and 0 <= b < P");
  }
}

HashFn HashFn::draw(std::uint64_t seed, std::size_t domain, std::size_t range) {
  if (range == 0 || domain == 0) {
    throw ParameterError("hash range and domain must be >= 1");
  }
  const std::uint64_t prime = modulus_for_domain(domain);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> draw_a(1, prime - 1);
  std::uniform_int_distribution<std::uint64_t> draw_b(0, prime - 1);
  const std::uint64_t a = draw_a(rng);
  const std::uint64_t b = draw_b(rng);
  return HashFn(a, b, prime, range, domain, seed);
}

HashFn HashFn::from_table(std::vector<std::uint32_t> table, std::size_t range) {
  if (table.empty() || range == 0) {
    throw ParameterError("hash table and range must be non-empty");
  }
  for (auto v : table) {
    if (v >= range) throw ParameterError("hash table entry outside [0, range)");
  }
  HashFn h;
  h.range_ = range;
  h.domain_ = table.size();
  h.table_ = std::move(table);
  return h;
}

std::size_t HashFn::operator()(std::size_t x) const {
  if (x >= domain_) {
    throw ParameterError("hash input " + std::to_string(x) +
                         " outside domain of size " + std::to_string(domain_));
  }
  if (!table_.empty()) return table_[x];
  const auto wide = static_cast<unsigned __int128>(a_) * x + b_;
  return static_cast<std::size_t>(static_cast<std::uint64_t>(wide % prime_) %
                                  range_);
}

SignFn SignFn::draw(std::uint64_t seed, std::size_t domain) {
  return SignFn(HashFn::draw(seed, domain, 2));
}

SignFn SignFn::from_table(const std::vector<int>& signs) {
  std::vector<std::uint32_t> bits;
  bits.reserve(signs.size());
  for (int s : signs) {
    if (s != 1 && s != -1) throw ParameterError("sign table entries must be +-1");
    bits.push_back(s > 0 ? 1U : 0U);
  }
  return SignFn(HashFn::from_table(std::move(bits), 2));
}

std::vector<HashFn> make_hash_family(std::uint64_t seed, std::size_t count,
                                     std::size_t domain, std::size_t range) {
  if (count == 0 || domain == 0 || range == 0) {
    throw ParameterError("hash family requires d, n, b' >= 1");
  }
  std::vector<HashFn> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(HashFn::draw(derive_seed(seed, i), domain, range));
  }
  return out;
}

std::vector<SignFn> make_sign_family(std::uint64_t seed, std::size_t count,
                                     std::size_t domain) {
  if (count == 0 || domain == 0) {
    throw ParameterError("sign family requires d, n >= 1");
  }
  std::vector<SignFn> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(SignFn::draw(derive_seed(seed, i), domain));
  }
  return out;
}

CountSketchTable count_sketch(std::span<const double> a,
                              std::vector<HashFn> hashes,
                              std::vector<SignFn> signs) {
  if (hashes.empty() || hashes.size() != signs.size()) {
    throw ParameterError("count_sketch needs equally many (>= 1) hashes and signs");
  }
  const std::size_t width = hashes.front().range();
  for (std::size_t t = 0; t < hashes.size(); ++t) {
    if (hashes[t].domain() != a.size() || signs[t].domain() != a.size()) {
      throw ParameterError("hash/sign domain does not match vector length " +
                           std::to_string(a.size()));
    }
    if (hashes[t].range() != width) {
      throw ParameterError("all hashes of a table must share one range");
    }
  }

  CountSketchTable table;
  table.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(hashes.size()),
                                       static_cast<Eigen::Index>(width));
  for (std::size_t t = 0; t < hashes.size(); ++t) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      table.values(static_cast<Eigen::Index>(t),
                   static_cast<Eigen::Index>(hashes[t](i))) += signs[t](i) * a[i];
    }
  }
  table.hashes = std::move(hashes);
  table.signs = std::move(signs);
  return table;
}

double median_of(std::vector<double> values) {
  if (values.empty()) throw ParameterError("median of an empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

double recover(const CountSketchTable& table, std::size_t j) {
  if (j >= table.domain()) {
    throw ParameterError("recover index " + std::to_string(j) +
                         " out of range for domain " +
                         std::to_string(table.domain()));
  }
  std::vector<double> estimates(table.depth());
  for (std::size_t t = 0; t < table.depth(); ++t) {
    estimates[t] = table.signs[t](j) *
                   table.values(static_cast<Eigen::Index>(t),
                                static_cast<Eigen::Index>(table.hashes[t](j)));
  }
  return median_of(std::move(estimates));
}

std::vector<double> recover_all(const CountSketchTable& table) {
  std::vector<double> out(table.domain());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = recover(table, j);
  return out;
}

double tail_norm(std::span<const double> a, std::size_t k) {
  if (k > a.size()) {
    throw ParameterError("tail_norm k=" + std::to_string(k) +
                         " exceeds length " + std::to_string(a.size()));
  }
  std::vector<std::size_t> order(a.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return std::abs(a[x]) > std::abs(a[y]);
  });
  double sum = 0.0;
  for (std::size_t r = k; r < order.size(); ++r) sum += a[order[r]] * a[order[r]];
  return std::sqrt(sum);
}

void SketchFamily::validate(std::size_t d, std::size_t m, std::size_t n,
                            std::size_t expected_bprime) const {
  if (row_hashes.size() != d || row_signs.size() != d ||
      col_hashes.size() != d || col_signs.size() != d) {
    throw ParameterError("sketch family must hold d=" + std::to_string(d) +
                         " functions per group");
  }
  for (std::size_t l = 0; l < d; ++l) {
    if (row_hashes[l].domain() != m || row_signs[l].domain() != m) {
      throw ParameterError("row hash/sign domain must equal m=" + std::to_string(m));
    }
    if (col_hashes[l].domain() != n || col_signs[l].domain() != n) {
      throw ParameterError("column hash/sign domain must equal n=" + std::to_string(n));
    }
    if (row_hashes[l].range() != expected_bprime ||
        col_hashes[l].range() != expected_bprime) {
      throw ParameterError("hash range must equal b'=" +
                           std::to_string(expected_bprime));
    }
  }
}

SketchFamily make_sketch_family(std::uint64_t master_seed, std::size_t d,
                                std::size_t m, std::size_t n,
                                std::size_t bprime) {
  SketchFamily family;
  family.master_seed = master_seed;
  family.bprime = bprime;
  family.row_hashes = make_hash_family(derive_seed(master_seed, 0), d, m, bprime);
  family.row_signs = make_sign_family(derive_seed(master_seed, 1), d, m);
  family.col_hashes = make_hash_family(derive_seed(master_seed, 2), d, n, bprime);
  family.col_signs = make_sign_family(derive_seed(master_seed, 3), d, n);
  return family;
}

}  // namespace codedsketch::sketch
