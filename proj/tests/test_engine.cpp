#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "codedsketch/engine.hpp"
#include "oracles.hpp"

using namespace codedsketch;

namespace {

SchemeParams make_params(std::size_t p, std::size_t m, std::size_t n, std::size_t bprime,
                         std::size_t d, std::size_t extra = 0) {
  SchemeParams params;
  params.p = p;
  params.m = m;
  params.n = n;
  params.bprime = bprime;
  params.d = d;
  params.workers = static_cast<std::size_t>((2 * p * bprime - 1) * (2 * d - 1)) + extra;
  return params;
}

std::vector<WorkerResult> compute_all(const std::vector<EncodedShare>& shares) {
  std::vector<WorkerResult> out;
  for (const auto& s : shares) out.push_back(worker_compute(s));
  return out;
}

double max_sketch_deviation(const SketchSet& a, const SketchSet& b) {
  double worst = 0;
  for (std::size_t eta = 1; eta <= a.depth(); ++eta) {
    for (std::size_t k = 0; k < a.blocks[eta - 1].size(); ++k) {
      worst = std::max(worst, (a.at(eta, k) - b.at(eta, k)).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("thresholds") {
  CHECK(threshold_cs(4, 2, 3) == 75);
  CHECK(threshold_cs(1, 1, 1) == 1);
  CHECK(threshold_cs(5, 5, 4) == 49 * 7);
  CHECK(threshold_exact(4, 4, 4) == 67);
  CHECK(threshold_exact(1000, 1000, 1000) == 1000ull * 1000 * 1000 + 999);

  const auto report = threshold_report(1000, 1000, 1000, 0.1, 0.02);
  CHECK(report.derived_bprime == 300);
  CHECK(report.derived_d == 6);
  CHECK(report.operational == (2ull * 1000 * 300 - 1) * 11);
  CHECK(report.printed_first == 6599988);
  CHECK(report.exact == 1000000999);
  CHECK(report.printed_bound == 6599988);
}

TEST_CASE("accuracy-driven parameters") {
  CHECK(bprime_for_epsilon(0.5) == 12);
  CHECK(bprime_for_epsilon(0.1) == 300);
  CHECK(bprime_for_epsilon(1.0) == 3);
  CHECK(depth_for_delta(0.125) == 3);
  CHECK(depth_for_delta(0.02) == 6);
  CHECK(depth_for_delta(0.5) == 1);
  CHECK(depth_for_delta(0.01, 10.0) == 2);
  const auto params = params_from_accuracy(2, 2, 2, 0.5, 0.125);
  CHECK(params.bprime == 12);
  CHECK(params.d == 3);
  CHECK(params.workers == 235);
  CHECK_THROWS_AS(bprime_for_epsilon(0.0), ConfigurationError);
  CHECK_THROWS_AS(depth_for_delta(0.1, 1.0), ConfigurationError);
  const auto sparse = sparse_threshold_report(2, 4, 4, 2, 1.0);
  CHECK(sparse.derived_bprime == 6);
  CHECK(sparse.derived_d == 4);
}

TEST_CASE("parameter validation") {
  auto params = make_params(2, 2, 2, 2, 2);
  CHECK_NOTHROW(params.validate());
  params.workers -= 1;
  CHECK_THROWS_AS(params.validate(), ConfigurationError);
  params = make_params(2, 2, 2, 2, 2);
  params.d = 0;
  CHECK_THROWS_AS(params.validate(), ConfigurationError);
  CHECK_THROWS_AS(check_divisibility(5, 4, 4, make_params(2, 2, 2, 2, 2)), PartitionError);
  CHECK_THROWS_AS(check_divisibility(4, 3, 4, make_params(2, 2, 2, 2, 2)), PartitionError);
  CHECK_NOTHROW(check_divisibility(4, 4, 6, make_params(2, 2, 3, 2, 2)));
}

TEST_CASE("encode") {
  SUBCASE("degenerate scheme sends signed copies of A and B") {
    const auto params = make_params(1, 1, 1, 1, 1, 2);
    const Matrix a = random_dense(3, 2, 1);
    const Matrix b = random_dense(2, 4, 2);
    const auto family = sketch::make_sketch_family(5, 1, 1, 1, 1);
    const auto shares = encode(a, b, params, family, poly::EvaluationGrid::roots_of_unity(3));
    for (const auto& s : shares) {
      CHECK((s.f_share.real() - family.row_signs[0](0) * a).cwiseAbs().maxCoeff() <= 1e-14);
      CHECK((s.g_share.real() - family.col_signs[0](0) * b).cwiseAbs().maxCoeff() <= 1e-14);
      CHECK(s.f_share.imag().cwiseAbs().maxCoeff() <= 1e-14);
    }
  }
  SUBCASE("worked example share shapes") {
    const auto params = golden_params();
    const Matrix a = random_dense(8, 12, 3);
    const Matrix b = random_dense(12, 16, 4);
    const auto shares =
        encode(a, b, params, golden_family(), poly::EvaluationGrid::roots_of_unity(80));
    REQUIRE(shares.size() == 80);
    for (const auto& s : shares) {
      CHECK(s.f_share.rows() == 2);
      CHECK(s.f_share.cols() == 3);
      CHECK(s.g_share.rows() == 3);
      CHECK(s.g_share.cols() == 4);
      CHECK(s.f_share.size() * 16 == a.size());
      CHECK(s.g_share.size() * 16 == b.size());
    }
  }
  SUBCASE("share at theta = 1 is the first sketch pair") {
    const auto params = make_params(2, 2, 2, 2, 2);
    const Matrix a = random_dense(8, 8, 5);
    const Matrix b = random_dense(8, 8, 6);
    const auto family = sketch::make_sketch_family(7, 2, 2, 2, 2);
    const auto shares = encode(a, b, params, family, poly::EvaluationGrid::roots_of_unity(params.workers));
    REQUIRE(shares[0].point == Complex(1.0, 0.0));
    auto single = params;
    single.d = 1;
    sketch::SketchFamily first = family;
    first.row_hashes.erase(first.row_hashes.begin() + 1, first.row_hashes.end());
    first.row_signs.erase(first.row_signs.begin() + 1, first.row_signs.end());
    first.col_hashes.erase(first.col_hashes.begin() + 1, first.col_hashes.end());
    first.col_signs.erase(first.col_signs.begin() + 1, first.col_signs.end());
    const CMatrix want = oracle::f_share(a, single, first, 1.0);
    CHECK((shares[0].f_share - want).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("random points match the expansion oracle") {
    const auto params = make_params(3, 2, 2, 2, 3);
    const Matrix a = random_dense(4, 6, 9);
    const Matrix b = random_dense(6, 4, 10);
    const auto family = sketch::make_sketch_family(11, 3, 2, 2, 2);
    std::vector<Complex> pts;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.1, 1.1);
    for (std::size_t j = 0; j < params.workers; ++j) pts.emplace_back(u(rng), u(rng));
    const auto shares = encode(a, b, params, family, poly::EvaluationGrid::from_points(pts));
    for (std::size_t j = 0; j < 10; ++j) {
      const CMatrix fo = oracle::f_share(a, params, family, pts[j]);
      const CMatrix go = oracle::g_share(b, params, family, pts[j]);
      CHECK((shares[j].f_share - fo).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, fo.cwiseAbs().maxCoeff()));
      CHECK((shares[j].g_share - go).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, go.cwiseAbs().maxCoeff()));
    }
  }
  SUBCASE("errors") {
    const auto params = make_params(2, 2, 2, 2, 2);
    const auto family = sketch::make_sketch_family(1, 2, 2, 2, 2);
    CHECK_THROWS_AS(encode(random_dense(5, 4, 1), random_dense(4, 4, 2), params, family,
                           poly::EvaluationGrid::roots_of_unity(params.workers)),
                    PartitionError);
    CHECK_THROWS_AS(encode(random_dense(4, 4, 1), random_dense(4, 4, 2), params, family,
                           poly::EvaluationGrid::roots_of_unity(params.workers - 1)),
                    ConfigurationError);
  }
}

TEST_CASE("worker compute") {
  EncodedShare share;
  share.index = 3;
  share.f_share = CMatrix::Zero(2, 3);
  share.g_share = CMatrix::Ones(3, 4);
  CHECK(worker_compute(share).product == CMatrix::Zero(2, 4));
  share.f_share = CMatrix::Constant(1, 1, 2.0);
  share.g_share = CMatrix::Constant(1, 1, 3.0);
  const auto r = worker_compute(share);
  CHECK(r.product(0, 0) == Complex(6.0, 0.0));
  CHECK(r.index == 3);
  share.g_share = CMatrix::Ones(2, 2);
  CHECK_THROWS_AS(worker_compute(share), ParameterError);

  const auto params = make_params(2, 2, 2, 2, 2);
  const Matrix a = random_dense(4, 4, 1);
  const Matrix b = random_dense(4, 4, 2);
  const auto family = sketch::make_sketch_family(3, 2, 2, 2, 2);
  const Complex theta(0.3, 0.8);
  const auto shares = encode(a, b, params, family, poly::EvaluationGrid::from_points(
      [&] {
        std::vector<Complex> pts{theta};
        for (std::size_t j = 1; j < params.workers; ++j) pts.emplace_back(2.0 + j, 0.0);
        return pts;
      }()));
  const CMatrix want = oracle::f_share(a, params, family, theta) * oracle::g_share(b, params, family, theta);
  CHECK((worker_compute(shares[0]).product - want).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("decode matches the brute-force sketch of the exact product") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t p = 1 + rng() % 3, m = 1 + rng() % 3, n = 1 + rng() % 3;
    const std::size_t bprime = 1 + rng() % 3, d = 1 + rng() % 3;
    const auto params = make_params(p, m, n, bprime, d, 3);
    const Matrix a = random_dense(2 * m, 2 * p, rng());
    const Matrix b = random_dense(2 * p, 2 * n, rng());
    const Matrix c = a * b;
    const auto family = sketch::make_sketch_family(rng(), d, m, n, bprime);
    const auto shares = encode(a, b, params, family, poly::EvaluationGrid::roots_of_unity(params.workers));
    const auto sketches = decode(compute_all(shares), params, family);
    CHECK(sketches.depth() == d);
    for (std::size_t eta = 1; eta <= d; ++eta) {
      const auto want = oracle::sketch_blocks(c, family, eta, m, n, bprime);
      REQUIRE(sketches.blocks[eta - 1].size() == 2 * bprime - 1);
      for (std::size_t k = 0; k < want.size(); ++k) {
        CHECK(oracle::rel_diff(sketches.at(eta, k), want[k], c.norm()) <= 1e-8);
      }
    }
    CHECK(sketches.max_imaginary_residue <= 1e-8 * std::max(1.0, c.norm()));
  }
}

TEST_CASE("worked example") {
  const auto params = golden_params();
  const auto family = golden_family();
  const Matrix a = random_dense(8, 8, 31);
  const Matrix b = random_dense(8, 8, 32);
  const Matrix c = a * b;

  SUBCASE("the tabulated sketch combinations agree with the fixture's hashes") {
    for (std::size_t eta = 1; eta <= 3; ++eta) {
      const auto want = oracle::sketch_blocks(c, family, eta, 4, 4, 2);
      for (std::size_t k = 0; k < 3; ++k) {
        CHECK(oracle::rel_diff(combine_blocks(c, 4, 4, golden_table()[eta - 1][k]), want[k],
                               c.norm()) <= 1e-12);
      }
    }
  }
  SUBCASE("sketch (1, 2) is -C20 - C22") {
    const auto shares = encode(a, b, params, family, poly::EvaluationGrid::roots_of_unity(80));
    auto results = compute_all(shares);
    std::mt19937_64 rng(8);
    std::shuffle(results.begin(), results.end(), rng);
    results.resize(75);
    const auto sketches = decode(results, params, family);
    const Matrix want = -oracle::block(c, 4, 4, 2, 0) - oracle::block(c, 4, 4, 2, 2);
    CHECK(oracle::rel_diff(sketches.at(1, 2), want, c.norm()) <= 1e-8);
  }
  SUBCASE("C20 is the median of its three signed read-outs") {
    const auto shares = encode(a, b, params, family, poly::EvaluationGrid::roots_of_unity(75));
    const auto sketches = decode(compute_all(shares), params, family);
    const auto report = median_recover(sketches, params, true);
    REQUIRE(report.candidates.size() == 3);
    std::vector<Matrix> reads;
    for (std::size_t eta = 1; eta <= 3; ++eta) {
      const auto blocks = oracle::sketch_blocks(c, family, eta, 4, 4, 2);
      const std::size_t l = eta - 1;
      const std::size_t k = family.row_hashes[l](2) + family.col_hashes[l](0);
      reads.push_back(static_cast<double>(family.row_signs[l](2) * family.col_signs[l](0)) * blocks[k]);
    }
    const Matrix got = oracle::block(report.estimate, 4, 4, 2, 0);
    for (Eigen::Index u = 0; u < 2; ++u) {
      for (Eigen::Index v = 0; v < 2; ++v) {
        const double want = oracle::median({reads[0](u, v), reads[1](u, v), reads[2](u, v)});
        CHECK(std::abs(got(u, v) - want) <= 1e-8 * std::max(1.0, c.norm()));
      }
    }
  }
}

TEST_CASE("median recovery with one sketch is the signed read-out") {
  const auto params = make_params(2, 3, 2, 3, 1);
  const Matrix a = random_dense(6, 4, 1);
  const Matrix b = random_dense(4, 4, 2);
  const Matrix c = a * b;
  const auto family = sketch::make_sketch_family(4, 1, 3, 2, 3);
  const auto sketches = decode(
      compute_all(encode(a, b, params, family, poly::EvaluationGrid::roots_of_unity(params.workers))),
      params, family);
  const auto report = median_recover(sketches, params);
  const auto blocks = oracle::sketch_blocks(c, family, 1, 3, 2, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      const Matrix want = static_cast<double>(family.row_signs[0](i) * family.col_signs[0](j)) *
                          blocks[family.row_hashes[0](i) + family.col_hashes[0](j)];
      CHECK(oracle::rel_diff(oracle::block(report.estimate, 3, 2, i, j), want, c.norm()) <= 1e-9);
    }
  }
}

TEST_CASE("decoding is independent of which workers respond and in what order") {
  // 75 of the 80th roots of unity: the Vandermonde condition number is about
  // 4 when the five missing points are evenly spread and about 7e5 when they
  // are adjacent, so the attainable agreement depends on the subset.
  const auto params = golden_params();
  const auto family = golden_family();
  const Matrix a = random_dense(8, 8, 51);
  const Matrix b = random_dense(8, 8, 52);
  const Matrix c = a * b;
  const auto all = compute_all(encode(a, b, params, family, poly::EvaluationGrid::roots_of_unity(80)));
  SketchSet exact;
  exact.blocks.resize(3);
  for (std::size_t eta = 1; eta <= 3; ++eta) exact.blocks[eta - 1] = oracle::sketch_blocks(c, family, eta, 4, 4, 2);
  double scale = 0;
  for (const auto& row : exact.blocks) {
    for (const auto& blk : row) scale = std::max(scale, blk.cwiseAbs().maxCoeff());
  }
  SUBCASE("evenly spread stragglers") {
    std::vector<WorkerResult> spread;
    for (const auto& r : all) {
      if (r.index % 16 != 3) spread.push_back(r);
    }
    const auto got = decode(spread, params, family);
    CHECK(max_sketch_deviation(got, exact) <= 1e-9 * std::max(1.0, scale));
    std::reverse(spread.begin(), spread.end());
    CHECK(max_sketch_deviation(decode(spread, params, family), got) <= 1e-9 * std::max(1.0, scale));
  }
  SUBCASE("adjacent stragglers") {
    std::vector<WorkerResult> head(all.begin(), all.begin() + 75);
    CHECK(max_sketch_deviation(decode(head, params, family), exact) <= 1e-6 * std::max(1.0, scale));
  }
  SUBCASE("random subsets in random order") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 50; ++trial) {
      auto subset = all;
      std::shuffle(subset.begin(), subset.end(), rng);
      subset.resize(75);
      const auto got = decode(subset, params, family);
      CHECK(max_sketch_deviation(got, exact) <= 1e-6 * std::max(1.0, scale));
      std::reverse(subset.begin(), subset.end());
      CHECK(max_sketch_deviation(decode(subset, params, family), got) <= 1e-6 * std::max(1.0, scale));
    }
  }
}

TEST_CASE("decode errors") {
  const auto params = golden_params();
  const auto family = golden_family();
  const auto all = compute_all(encode(random_dense(8, 8, 1), random_dense(8, 8, 2), params, family,
                                      poly::EvaluationGrid::roots_of_unity(80)));
  std::vector<WorkerResult> few(all.begin(), all.begin() + 70);
  try {
    decode(few, params, family);
    FAIL("expected InsufficientSamplesError");
  } catch (const InsufficientSamplesError& e) {
    CHECK(e.shortfall() == 5);
  }
  auto corrupted = std::vector<WorkerResult>(all.begin(), all.begin() + 75);
  for (auto& r : corrupted) r.product = r.product * Complex(0.0, 1.0);
  CHECK_THROWS_AS(decode(corrupted, params, family), NumericalFailureError);
}

TEST_CASE("approximate multiply") {
  SUBCASE("zero B gives exactly zero") {
    const auto params = make_params(2, 2, 2, 3, 3);
    const auto est = approximate_multiply(random_dense(8, 8, 1), Matrix::Zero(8, 8), params, 5);
    CHECK(est.estimate.cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("identity product within eps of its norm") {
    // b' = 4 corresponds to eps = sqrt(3/4); d = 3 to delta = 1/8.
    const auto params = make_params(2, 2, 2, 4, 3);
    const double eps = std::sqrt(3.0 / 4.0);
    const Matrix id = Matrix::Identity(8, 8);
    std::size_t ok = 0;
    const std::size_t trials = 40;
    for (std::size_t t = 0; t < trials; ++t) {
      MultiplyOptions options;
      options.diagnostics = true;
      const auto est = approximate_multiply(id, id, params, 1000 + t, options);
      REQUIRE(est.max_abs_error.has_value());
      if (*est.max_abs_error <= eps * id.norm()) ++ok;
    }
    CHECK(static_cast<double>(ok) / trials >= 1.0 - 0.125);
  }
  SUBCASE("imaginary residue stays tiny on the roots-of-unity grid") {
    const auto params = make_params(3, 2, 2, 3, 3);
    const Matrix a = random_dense(4, 6, 2);
    const Matrix b = random_dense(6, 4, 3);
    const auto family = sketch::make_sketch_family(1, 3, 2, 2, 3);
    const auto sketches = decode(
        compute_all(encode(a, b, params, family, poly::EvaluationGrid::roots_of_unity(params.workers))),
        params, family);
    CHECK(sketches.max_imaginary_residue <= 1e-8 * (a * b).norm());
  }
  SUBCASE("same seed, same result") {
    const auto params = make_params(2, 2, 2, 2, 2);
    const Matrix a = random_dense(4, 4, 1);
    const Matrix b = random_dense(4, 4, 2);
    CHECK(approximate_multiply(a, b, params, 9).estimate == approximate_multiply(a, b, params, 9).estimate);
  }
}

TEST_CASE("block-sparse generator") {
  const auto params = make_params(2, 4, 4, 2, 2);
  const auto problem = random_block_sparse(8, 4, 8, params, 2, 3);
  CHECK(problem.nonzero_blocks.size() == 2);
  const Matrix c = problem.a * problem.b;
  std::size_t nonzero = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      const bool listed = std::find(problem.nonzero_blocks.begin(), problem.nonzero_blocks.end(),
                                    std::make_pair(i, j)) != problem.nonzero_blocks.end();
      const double mag = oracle::block(c, 4, 4, i, j).cwiseAbs().maxCoeff();
      CHECK((mag > 0.0) == listed);
      nonzero += mag > 0.0;
    }
  }
  CHECK(nonzero == 2);
  CHECK_THROWS_AS(random_block_sparse(8, 4, 8, params, 3, 3), ConfigurationError);
}
