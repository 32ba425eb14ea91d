#pragma once

// Pairwise-independent hashing, count-sketch construction and median
// recovery for plain vectors.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace codedsketch::sketch {

/// Smallest prime strictly greater than `x`.
std::uint64_t next_prime_above(std::uint64_t x);

/// The modulus used for a domain of size `domain`: smallest prime
/// > max(domain, 2^31).
std::uint64_t modulus_for_domain(std::size_t domain);

/// splitmix64 step; used to derive independent child seeds from a root seed
/// in a fixed order.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream);

/// h(x) = ((a*x + b) mod P) mod range, drawn from the strongly 2-universal
/// modular family. A hash may instead carry an explicit lookup table; the
/// worked-example fixture uses that form.
class HashFn {
 public:
  /// Draw a, b uniformly from [1, P-1] x [0, P-1] using `seed`.
  static HashFn draw(std::uint64_t seed, std::size_t domain, std::size_t range);

  /// Fixed table: h(x) = table[x]. Every entry must be < range.
  static HashFn from_table(std::vector<std::uint32_t> table, std::size_t range);

  /// Explicit modular parameters. Requires 1 <= a < prime, b < prime.
  HashFn(std::uint64_t multiplier, std::uint64_t offset, std::uint64_t prime,
         std::size_t range, std::size_t domain, std::uint64_t seed = 0);

  std::size_t operator()(std::size_t x) const;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t multiplier() const noexcept { return a_; }
  std::uint64_t offset() const noexcept { return b_; }
  std::uint64_t prime() const noexcept { return prime_; }
  std::size_t range() const noexcept { return range_; }
  std::size_t domain() const noexcept { return domain_; }
  bool tabulated() const noexcept { return !table_.empty(); }

 private:
  HashFn() = default;

  std::uint64_t seed_ = 0;
  std::uint64_t a_ = 1;
  std::uint64_t b_ = 0;
  std::uint64_t prime_ = 2;
  std::size_t range_ = 1;
  std::size_t domain_ = 1;
  std::vector<std::uint32_t> table_;
};

/// s(x) = 2*g(x) - 1 with g an independently seeded hash into {0, 1}.
class SignFn {
 public:
  static SignFn draw(std::uint64_t seed, std::size_t domain);
  /// Fixed signs; every entry must be -1 or +1.
  static SignFn from_table(const std::vector<int>& signs);

  int operator()(std::size_t x) const {
    return 2 * static_cast<int>(bits_(x)) - 1;
  }

  std::uint64_t seed() const noexcept { return bits_.seed(); }
  std::size_t domain() const noexcept { return bits_.domain(); }
  const HashFn& bits() const noexcept { return bits_; }

 private:
  explicit SignFn(HashFn bits) : bits_(std::move(bits)) {}

  HashFn bits_;
};

std::vector<HashFn> make_hash_family(std::uint64_t seed, std::size_t count,
                                     std::size_t domain, std::size_t range);

std::vector<SignFn> make_sign_family(std::uint64_t seed, std::size_t count,
                                     std::size_t domain);

/// d x b' table built by the count-sketch update loop.
struct CountSketchTable {
  Eigen::MatrixXd values;
  std::vector<HashFn> hashes;
  std::vector<SignFn> signs;

  std::size_t depth() const noexcept { return hashes.size(); }
  std::size_t width() const noexcept {
    return static_cast<std::size_t>(values.cols());
  }
  std::size_t domain() const noexcept {
    return hashes.empty() ? 0 : hashes.front().domain();
  }
};

CountSketchTable count_sketch(std::span<const double> a,
                              std::vector<HashFn> hashes,
                              std::vector<SignFn> signs);

/// Median of the d signed bucket reads for entry j.
double recover(const CountSketchTable& table, std::size_t j);

/// recover() for every index of the domain.
std::vector<double> recover_all(const CountSketchTable& table);

/// Median of `values`. Even counts return the mean of the two middle order
/// statistics. Throws on an empty input.
double median_of(std::vector<double> values);

/// l2 norm of `a` after removing its k largest-magnitude entries (ties: lower
/// index removed first).
double tail_norm(std::span<const double> a, std::size_t k);

/// Row-hash/sign and column-hash/sign families for the coded pipeline.
/// Derivation order from the master seed: row hashes, row signs, column
/// hashes, column signs, l = 1..d within each group.
struct SketchFamily {
  std::uint64_t master_seed = 0;
  std::size_t bprime = 1;
  std::vector<HashFn> row_hashes;
  std::vector<SignFn> row_signs;
  std::vector<HashFn> col_hashes;
  std::vector<SignFn> col_signs;

  std::size_t depth() const noexcept { return row_hashes.size(); }
  std::size_t rows() const noexcept {
    return row_hashes.empty() ? 0 : row_hashes.front().domain();
  }
  std::size_t cols() const noexcept {
    return col_hashes.empty() ? 0 : col_hashes.front().domain();
  }

  /// Throws ParameterError unless all four groups have d members with the
  /// expected domains and range.
  void validate(std::size_t d, std::size_t m, std::size_t n,
                std::size_t bprime) const;
};

SketchFamily make_sketch_family(std::uint64_t master_seed, std::size_t d,
                                std::size_t m, std::size_t n,
                                std::size_t bprime);

}  // namespace codedsketch::sketch
