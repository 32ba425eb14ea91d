#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "doctest.h"
#include "codedsketch/sketch_core.hpp"
#include "codedsketch/error.hpp"
#include "oracles.hpp"

using namespace codedsketch;
using namespace codedsketch::sketch;

namespace {

std::vector<std::vector<std::size_t>> hash_rows(const std::vector<HashFn>& hs, std::size_t n) {
  std::vector<std::vector<std::size_t>> out;
  for (const auto& h : hs) {
    std::vector<std::size_t> row(n);
    for (std::size_t i = 0; i < n; ++i) row[i] = h(i);
    out.push_back(row);
  }
  return out;
}

std::vector<std::vector<int>> sign_rows(const std::vector<SignFn>& ss, std::size_t n) {
  std::vector<std::vector<int>> out;
  for (const auto& s : ss) {
    std::vector<int> row(n);
    for (std::size_t i = 0; i < n; ++i) row[i] = s(i);
    out.push_back(row);
  }
  return out;
}

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<double> a(n);
  for (auto& v : a) v = nd(rng);
  return a;
}

}  // namespace

TEST_CASE("modulus is the smallest prime above max(domain, 2^31)") {
  const std::uint64_t base = std::uint64_t{1} << 31;
  std::uint64_t expected = base + 1;
  while (!oracle::is_prime(expected)) ++expected;
  CHECK(modulus_for_domain(4) == expected);
  CHECK(modulus_for_domain(10000) == expected);
  CHECK(next_prime_above(10) == 11);
  CHECK(next_prime_above(11) == 13);
  const std::uint64_t big = base + 100;
  std::uint64_t expected_big = big + 1;
  while (!oracle::is_prime(expected_big)) ++expected_big;
  CHECK(modulus_for_domain(big) == expected_big);
}

TEST_CASE("hash family values stay in range") {
  const auto family = make_hash_family(7, 3, 4, 2);
  REQUIRE(family.size() == 3);
  for (const auto& h : family) {
    CHECK(h.multiplier() >= 1);
    CHECK(h.multiplier() < h.prime());
    CHECK(h.offset() < h.prime());
    for (std::size_t x = 0; x < 4; ++x) CHECK(h(x) < 2);
  }
}

TEST_CASE("identity parameters give h(x) = x") {
  const HashFn h(1, 0, 5, 5, 5);
  for (std::size_t x = 0; x < 5; ++x) CHECK(h(x) == x);
}

TEST_CASE("hash draws are deterministic in the seed") {
  const auto a = HashFn::draw(99, 100, 7);
  const auto b = HashFn::draw(99, 100, 7);
  const auto c = HashFn::draw(100, 100, 7);
  CHECK(a.multiplier() == b.multiplier());
  CHECK(a.offset() == b.offset());
  CHECK(a.prime() == b.prime());
  CHECK((a.multiplier() != c.multiplier() || a.offset() != c.offset()));
}

TEST_CASE("pairwise collision rate is close to 1/b'") {
  const std::size_t n = 10000;
  const std::size_t range = 16;
  const auto family = make_hash_family(42, 2, n, range);
  const double p = 1.0 / static_cast<double>(range);
  const std::size_t samples = 100000;
  const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(samples));
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (const auto& h : family) {
    std::size_t hits = 0;
    for (std::size_t q = 0; q < samples; ++q) {
      std::size_t x = pick(rng);
      std::size_t y = pick(rng);
      while (y == x) y = pick(rng);
      if (h(x) == h(y)) ++hits;
    }
    CHECK(static_cast<double>(hits) / static_cast<double>(samples) <= p + 3 * sigma);
  }
}

TEST_CASE("invalid hash parameters are rejected") {
  CHECK_THROWS_AS(make_hash_family(1, 0, 4, 2), ParameterError);
  CHECK_THROWS_AS(make_hash_family(1, 2, 0, 2), ParameterError);
  CHECK_THROWS_AS(make_hash_family(1, 2, 4, 0), ParameterError);
  CHECK_THROWS_AS(HashFn(0, 0, 5, 5, 5), ParameterError);
  CHECK_THROWS_AS(HashFn(5, 0, 5, 5, 5), ParameterError);
  CHECK_THROWS_AS(HashFn::from_table({0, 2}, 2), ParameterError);
  CHECK_THROWS_AS(SignFn::from_table({1, 0}), ParameterError);
  const auto h = HashFn::draw(1, 4, 2);
  CHECK_THROWS_AS(h(4), ParameterError);
}

TEST_CASE("signs are +-1 and both values occur") {
  const auto signs = make_sign_family(3, 4, 200);
  for (const auto& s : signs) {
    int plus = 0;
    for (std::size_t x = 0; x < 200; ++x) {
      const int v = s(x);
      CHECK((v == 1 || v == -1));
      plus += v == 1;
    }
    CHECK(plus > 50);
    CHECK(plus < 150);
  }
}

TEST_CASE("count sketch of the zero vector is zero") {
  const std::vector<double> a(10, 0.0);
  const auto t = count_sketch(a, make_hash_family(1, 3, 10, 4), make_sign_family(2, 3, 10));
  CHECK(t.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("count sketch row for the tabulated example hash") {
  const std::vector<double> a = {1.5, -2.0, 4.0, 0.25};
  const auto t = count_sketch(a, {HashFn::from_table({0, 0, 1, 0}, 2)},
                              {SignFn::from_table({-1, 1, -1, 1})});
  CHECK(t.values(0, 0) == doctest::Approx(-a[0] + a[1] + a[3]));
  CHECK(t.values(0, 1) == doctest::Approx(-a[2]));
}

TEST_CASE("count sketch matches the direct accumulation oracle") {
  const std::size_t n = 37;
  const auto a = random_vector(n, 11);
  const auto hs = make_hash_family(21, 4, n, 6);
  const auto ss = make_sign_family(22, 4, n);
  const auto t = count_sketch(a, hs, ss);
  const auto expected = oracle::sketch_table(a, hash_rows(hs, n), sign_rows(ss, n), 6);
  CHECK((t.values - expected).cwiseAbs().maxCoeff() <= 1e-12);
  for (Eigen::Index r = 0; r < t.values.rows(); ++r) {
    double l1 = 0;
    for (double v : a) l1 += std::abs(v);
    CHECK(t.values.row(r).cwiseAbs().sum() <= l1 + 1e-12);
  }
}

TEST_CASE("count sketch is deterministic and linear") {
  const std::size_t n = 50;
  const auto a = random_vector(n, 1);
  const auto b = random_vector(n, 2);
  std::vector<double> sum(n);
  for (std::size_t i = 0; i < n; ++i) sum[i] = a[i] + b[i];
  const auto hs = make_hash_family(9, 3, n, 5);
  const auto ss = make_sign_family(10, 3, n);
  const auto ta = count_sketch(a, hs, ss);
  const auto ta2 = count_sketch(a, make_hash_family(9, 3, n, 5), make_sign_family(10, 3, n));
  CHECK(ta.values == ta2.values);
  const auto tb = count_sketch(b, hs, ss);
  const auto ts = count_sketch(sum, hs, ss);
  const double scale = std::max(1.0, ts.values.cwiseAbs().maxCoeff());
  CHECK((ts.values - ta.values - tb.values).cwiseAbs().maxCoeff() <= 1e-12 * scale);
}

TEST_CASE("count sketch rejects mismatched families") {
  const std::vector<double> a(5, 1.0);
  CHECK_THROWS_AS(count_sketch(a, make_hash_family(1, 2, 5, 3), make_sign_family(1, 3, 5)),
                  ParameterError);
  CHECK_THROWS_AS(count_sketch(a, make_hash_family(1, 2, 6, 3), make_sign_family(1, 2, 6)),
                  ParameterError);
}

TEST_CASE("median recovery") {
  SUBCASE("single row reads back the signed bucket") {
    const auto a = random_vector(20, 3);
    const auto t = count_sketch(a, make_hash_family(4, 1, 20, 5), make_sign_family(5, 1, 20));
    for (std::size_t j = 0; j < 20; ++j) {
      CHECK(recover(t, j) == t.signs[0](j) * t.values(0, static_cast<Eigen::Index>(t.hashes[0](j))));
    }
  }
  SUBCASE("median of three candidates") {
    CountSketchTable t;
    t.hashes = {HashFn::from_table({0}, 1), HashFn::from_table({0}, 1), HashFn::from_table({0}, 1)};
    t.signs = {SignFn::from_table({1}), SignFn::from_table({1}), SignFn::from_table({1})};
    t.values = Eigen::MatrixXd(3, 1);
    t.values << 2.0, 5.0, 3.0;
    CHECK(recover(t, 0) == 3.0);
    CHECK_THROWS_AS(recover(t, 1), ParameterError);
  }
  SUBCASE("even count averages the middle pair") {
    CHECK(median_of({4.0, 1.0, 3.0, 2.0}) == 2.5);
    CHECK(median_of({7.0}) == 7.0);
    CHECK_THROWS_AS(median_of({}), ParameterError);
  }
  SUBCASE("recover_all agrees with recover") {
    const auto a = random_vector(30, 8);
    const auto t = count_sketch(a, make_hash_family(6, 5, 30, 7), make_sign_family(7, 5, 30));
    const auto all = recover_all(t);
    for (std::size_t j = 0; j < 30; ++j) CHECK(all[j] == recover(t, j));
  }
}

TEST_CASE("tail norm") {
  const std::vector<double> a = {3.0, -4.0, 1.0};
  CHECK(tail_norm(a, 0) == doctest::Approx(std::sqrt(26.0)));
  CHECK(tail_norm(a, 1) == doctest::Approx(std::sqrt(10.0)));
  CHECK(tail_norm(a, 3) == 0.0);
  const std::vector<double> ties = {2.0, -2.0, 1.0};
  CHECK(tail_norm(ties, 1) == doctest::Approx(std::sqrt(5.0)));
  CHECK_THROWS_AS(tail_norm(a, 4), ParameterError);
}

TEST_CASE("single-row estimates: mean, variance and tail bound over 2000 families") {
  const std::size_t n = 64;
  const std::size_t families = 2000;
  const double eps = 0.5;
  const std::size_t width = static_cast<std::size_t>(std::ceil(3.0 / (eps * eps)));
  const auto a = random_vector(n, 12345);
  const double norm2 = std::inner_product(a.begin(), a.end(), a.begin(), 0.0);
  const std::size_t j = 5;
  std::vector<double> est(families);
  std::size_t exceed = 0;
  for (std::size_t f = 0; f < families; ++f) {
    const auto t = count_sketch(a, make_hash_family(derive_seed(77, 2 * f), 1, n, width),
                                make_sign_family(derive_seed(77, 2 * f + 1), 1, n));
    est[f] = recover(t, j);
    if (std::abs(est[f] - a[j]) >= eps * std::sqrt(norm2)) ++exceed;
  }
  const double mean = std::accumulate(est.begin(), est.end(), 0.0) / families;
  double var = 0;
  for (double v : est) var += (v - mean) * (v - mean);
  var /= families - 1;
  CHECK(std::abs(mean - a[j]) <= 4 * std::sqrt(var / families));
  CHECK(var <= 1.2 * norm2 / static_cast<double>(width));
  CHECK(static_cast<double>(exceed) / families <= 1.0 / 3.0 + 0.05);
}

TEST_CASE("median estimate is unbiased over 2000 seeds (n=64, d=5, b'=8)") {
  const std::size_t n = 64;
  const std::size_t seeds = 2000;
  const auto a = random_vector(n, 4242);
  const std::size_t j = 17;
  std::vector<double> est(seeds);
  for (std::size_t f = 0; f < seeds; ++f) {
    const auto t = count_sketch(a, make_hash_family(derive_seed(5, 2 * f), 5, n, 8),
                                make_sign_family(derive_seed(5, 2 * f + 1), 5, n));
    est[f] = recover(t, j);
  }
  const double mean = std::accumulate(est.begin(), est.end(), 0.0) / seeds;
  double var = 0;
  for (double v : est) var += (v - mean) * (v - mean);
  var /= seeds - 1;
  CHECK(std::abs(mean - a[j]) <= 3 * std::sqrt(var / seeds));
}

TEST_CASE("sparse vectors: entries isolated in a majority of rows come back exactly") {
  // With k nonzeros, entry j is read exactly in every row where no other
  // nonzero shares its bucket. Once more than half the rows (more than d/2 + 1
  // for even d, which averages the middle pair) are clean, the median is exact.
  const std::size_t n = 256;
  const std::size_t k = 3;
  const std::size_t width = 9;
  const std::size_t d = 8;
  std::size_t checked = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> a(n, 0.0);
    std::vector<std::size_t> support;
    while (support.size() < k) {
      const std::size_t i = rng() % n;
      if (a[i] != 0.0) continue;
      a[i] = 1.0 + static_cast<double>(rng() % 1000) / 100.0;
      support.push_back(i);
    }
    const auto t = count_sketch(a, make_hash_family(derive_seed(seed, 1), d, n, width),
                                make_sign_family(derive_seed(seed, 2), d, n));
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t clean = 0;
      for (std::size_t r = 0; r < d; ++r) {
        bool hit = false;
        for (auto i : support) hit = hit || (i != j && t.hashes[r](i) == t.hashes[r](j));
        clean += !hit;
      }
      if (clean >= d / 2 + 1) {
        CHECK(recover(t, j) == a[j]);
        ++checked;
      }
    }
  }
  CHECK(checked > 0);
}
