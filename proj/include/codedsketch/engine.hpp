#pragma once

// The coded-sketch scheme end to end: master-side encoding, worker products,
// interpolation-based decoding with coefficient extraction, and median
// recovery of the approximate product.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "codedsketch/poly_codec.hpp"
#include "codedsketch/sketch_core.hpp"

namespace codedsketch {

using poly::CMatrix;
using poly::Complex;
using poly::Matrix;
using sketch::SketchFamily;

/// Scheme integers and accuracy targets.
///
/// A is split into an m x p grid and B into a p x n grid; each of the d row
/// and column sketches has width b'. `workers` is N, the number of encoded
/// shares handed out.
struct SchemeParams {
  std::size_t p = 1;
  std::size_t m = 1;
  std::size_t n = 1;
  std::size_t bprime = 1;
  std::size_t d = 1;
  std::size_t workers = 1;
  double epsilon = 0.0;
  double delta = 0.0;
  double log_base = 2.0;

  /// Throws ConfigurationError if any integer is zero or N < threshold_cs.
  void validate() const;
};

/// b' = ceil(3 / eps^2).
std::size_t bprime_for_epsilon(double epsilon);
/// d = ceil(log_base(1 / delta)), at least 1.
std::size_t depth_for_delta(double delta, double log_base = 2.0);

/// Fills b' and d from (epsilon, delta). Workers default to the threshold.
SchemeParams params_from_accuracy(std::size_t p, std::size_t m, std::size_t n,
                                  double epsilon, double delta,
                                  double log_base = 2.0,
                                  std::optional<std::size_t> workers = {});

/// (2 p b' - 1)(2 d - 1): the number of worker results decoding waits for.
std::uint64_t threshold_cs(const SchemeParams& params);
std::uint64_t threshold_cs(std::size_t p, std::size_t bprime, std::size_t d);

/// p m n + p - 1, the exact entangled-polynomial threshold.
std::uint64_t threshold_exact(const SchemeParams& params);
std::uint64_t threshold_exact(std::size_t p, std::size_t m, std::size_t n);

/// The accuracy-driven bound, with the closed-form first term:
/// min{(2p ceil(3/eps^2) - 1)(2 ceil(log 1/delta) - 1) - 1, pmn + p - 1}.
struct ThresholdReport {
  std::size_t derived_bprime = 0;
  std::size_t derived_d = 0;
  std::uint64_t operational = 0;   ///< (2pb'-1)(2d-1) with derived b', d
  std::uint64_t printed_first = 0; ///< operational - 1
  std::uint64_t exact = 0;         ///< pmn + p - 1
  std::uint64_t printed_bound = 0; ///< min(printed_first, exact)
};

ThresholdReport threshold_report(std::size_t p, std::size_t m, std::size_t n,
                                 double epsilon, double delta,
                                 double log_base = 2.0);

/// Sparse-recovery bound, with b' = ceil(3k/eps^2) and
/// d = ceil(log mn).
ThresholdReport sparse_threshold_report(std::size_t p, std::size_t m,
                                        std::size_t n, std::size_t k,
                                        double epsilon, double log_base = 2.0);

/// Shares sent to worker j: F(theta_j) is (r/m x s/p), G(theta_j) is
/// (s/p x t/n).
struct EncodedShare {
  std::size_t index = 0;
  Complex point;
  CMatrix f_share;
  CMatrix g_share;
};

struct WorkerResult {
  std::size_t index = 0;
  Complex point;
  CMatrix product;
  double completion_time = 0.0;
};

/// blocks[eta-1][k] is the coefficient of x^(kp+p-1) in F_eta(x) G_eta(x),
/// k = 0..2b'-2.
struct SketchSet {
  std::size_t bprime = 0;
  std::vector<std::vector<Matrix>> blocks;
  SketchFamily family;
  /// Largest |imag| discarded by the real projection.
  double max_imaginary_residue = 0.0;
  /// Largest |coefficient| of the interpolated P(x).
  double coefficient_scale = 0.0;
  /// Residual at results beyond the threshold, when more were supplied.
  double interpolation_residual = 0.0;

  std::size_t depth() const noexcept { return blocks.size(); }
  const Matrix& at(std::size_t eta, std::size_t k) const {
    return blocks.at(eta - 1).at(k);
  }
};

struct EstimateReport {
  /// r x t approximation assembled from the m x n estimated blocks.
  Matrix estimate;
  /// Optional: candidates[eta-1] is the signed read-out matrix for sketch eta.
  std::vector<Matrix> candidates;
  double max_imaginary_residue = 0.0;
  /// Filled by approximate_multiply when diagnostics are requested.
  std::optional<double> max_abs_error;
  std::optional<double> exact_frobenius;
};

/// Shares for every grid point. Divisibility failures raise PartitionError;
/// a grid smaller than threshold_cs raises ConfigurationError.
std::vector<EncodedShare> encode(const Matrix& a, const Matrix& b,
                                 const SchemeParams& params,
                                 const SketchFamily& family,
                                 const poly::EvaluationGrid& grid);

/// P(theta_j) = F(theta_j) G(theta_j).
WorkerResult worker_compute(const EncodedShare& share);

struct DecodeOptions {
  /// Residue above this times max(1, coefficient scale) raises
  /// NumericalFailureError.
  double imaginary_tolerance = 1e-6;
};

/// Interpolates P(x) from the first threshold_cs results, regroups it in
/// (x, omega), evaluates omega = 1..d and extracts the count-sketch blocks.
SketchSet decode(std::span<const WorkerResult> results,
                 const SchemeParams& params, const SketchFamily& family,
                 const DecodeOptions& options = {});

/// Elementwise median over eta of s_eta(i) s~_eta(j) P^(eta)_{h(i)+h~(j)}.
EstimateReport median_recover(const SketchSet& sketches,
                              const SchemeParams& params,
                              bool keep_candidates = false);

struct MultiplyOptions {
  poly::GridMode grid = poly::GridMode::roots_of_unity;
  bool diagnostics = false;
  bool keep_candidates = false;
  DecodeOptions decode;
};

/// encode -> worker_compute x N -> decode (first threshold results in index
/// order) -> median_recover, with a family drawn from `seed`.
EstimateReport approximate_multiply(const Matrix& a, const Matrix& b,
                                    const SchemeParams& params,
                                    std::uint64_t seed,
                                    const MultiplyOptions& options = {});

/// Checks that (A, B) split under params; throws PartitionError otherwise.
void check_divisibility(std::size_t r, std::size_t s, std::size_t t,
                        const SchemeParams& params);

// ---------------------------------------------------------------------------
// Worked example fixture: p = m = n = 4, b' = 2, d = 3, with the hash/sign
// functions stated for that example.

SchemeParams golden_params();
SketchFamily golden_family();

/// One signed block term +-C_{i,j}.
struct SignedBlock {
  int sign;
  std::size_t i;
  std::size_t j;
};

/// golden_table()[eta-1][k] lists the signed blocks of the example's
/// count-sketch table at index k.
const std::vector<std::vector<std::vector<SignedBlock>>>& golden_table();

/// Evaluates a signed combination of the blocks of C (block grid m x n).
Matrix combine_blocks(const Matrix& c, std::size_t m, std::size_t n,
                      std::span<const SignedBlock> terms);

// ---------------------------------------------------------------------------
// Matrix generation

Matrix random_dense(std::size_t rows, std::size_t cols, std::uint64_t seed);

/// A (r x s) and B (s x t) whose product has exactly the listed nonzero
/// blocks in its m x n grid. Requires p >= k.
struct SparseProblem {
  Matrix a;
  Matrix b;
  std::vector<std::pair<std::size_t, std::size_t>> nonzero_blocks;
};

SparseProblem random_block_sparse(std::size_t r, std::size_t s, std::size_t t,
                                  const SchemeParams& params, std::size_t k,
                                  std::uint64_t seed);

}  // namespace codedsketch
