#include "codedsketch/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace codedsketch {

namespace {

// ceil() that ignores floating noise just above an integer, e.g.
// 3 / 0.1^2 = 300.00000000000006.
std::size_t robust_ceil(double x) {
  const double nearest = std::round(x);
  if (std::abs(x - nearest) <= 1e-9 * std::max(1.0, std::abs(x))) {
    return static_cast<std::size_t>(std::max(0.0, nearest));
  }
  return static_cast<std::size_t>(std::max(0.0, std::ceil(x)));
}

void require_positive(const SchemeParams& params) {
  if (params.p == 0 || params.m == 0 || params.n == 0 || params.bprime == 0 ||
      params.d == 0) {
    throw ConfigurationError("p, m, n, b', d must all be >= 1");
  }
}

std::size_t log_ceil(double value, double base) {
  if (!(base > 1.0)) throw ConfigurationError("log base must be > 1");
  if (value <= 1.0) return 1;
  return std::max<std::size_t>(1, robust_ceil(std::log(value) / std::log(base)));
}

}  // namespace

void SchemeParams::validate() const {
  require_positive(*this);
  const auto needed = threshold_cs(*this);
  if (workers < needed) {
    throw ConfigurationError("N=" + std::to_string(workers) +
                             " workers is below the recovery threshold " +
                             std::to_string(needed) + " = (2pb'-1)(2d-1)");
  }
}

std::size_t bprime_for_epsilon(double epsilon) {
  if (!(epsilon > 0.0)) throw ConfigurationError("epsilon must be > 0");
  return std::max<std::size_t>(1, robust_ceil(3.0 / (epsilon * epsilon)));
}

std::size_t depth_for_delta(double delta, double log_base) {
  if (!(delta > 0.0)) throw ConfigurationError("delta must be > 0");
  return log_ceil(1.0 / delta, log_base);
}

SchemeParams params_from_accuracy(std::size_t p, std::size_t m, std::size_t n,
                                  double epsilon, double delta, double log_base,
                                  std::optional<std::size_t> workers) {
  SchemeParams params;
  params.p = p;
  params.m = m;
  params.n = n;
  params.epsilon = epsilon;
  params.delta = delta;
  params.log_base = log_base;
  params.bprime = bprime_for_epsilon(epsilon);
  params.d = depth_for_delta(delta, log_base);
  params.workers = workers.value_or(static_cast<std::size_t>(threshold_cs(params)));
  return params;
}

std::uint64_t threshold_cs(std::size_t p, std::size_t bprime, std::size_t d) {
  return (2 * std::uint64_t{p} * bprime - 1) * (2 * std::uint64_t{d} - 1);
}

std::uint64_t threshold_cs(const SchemeParams& params) {
  require_positive(params);
  return threshold_cs(params.p, params.bprime, params.d);
}

std::uint64_t threshold_exact(std::size_t p, std::size_t m, std::size_t n) {
  return std::uint64_t{p} * m * n + p - 1;
}

std::uint64_t threshold_exact(const SchemeParams& params) {
  return threshold_exact(params.p, params.m, params.n);
}

ThresholdReport threshold_report(std::size_t p, std::size_t m, std::size_t n,
                                 double epsilon, double delta, double log_base) {
  ThresholdReport report;
  report.derived_bprime = bprime_for_epsilon(epsilon);
  report.derived_d = depth_for_delta(delta, log_base);
  report.operational = threshold_cs(p, report.derived_bprime, report.derived_d);
  report.printed_first = report.operational - 1;
  report.exact = threshold_exact(p, m, n);
  report.printed_bound = std::min(report.printed_first, report.exact);
  return report;
}

ThresholdReport sparse_threshold_report(std::size_t p, std::size_t m,
                                        std::size_t n, std::size_t k,
                                        double epsilon, double log_base) {
  if (!(epsilon > 0.0)) throw ConfigurationError("epsilon must be > 0");
  ThresholdReport report;
  report.derived_bprime = std::max<std::size_t>(
      1, robust_ceil(3.0 * static_cast<double>(k) / (epsilon * epsilon)));
  report.derived_d = log_ceil(static_cast<double>(m * n), log_base);
  report.operational = threshold_cs(p, report.derived_bprime, report.derived_d);
  report.printed_first = report.operational - 1;
  report.exact = threshold_exact(p, m, n);
  report.printed_bound = std::min(report.printed_first, report.exact);
  return report;
}

void check_divisibility(std::size_t r, std::size_t s, std::size_t t,
                        const SchemeParams& params) {
  require_positive(params);
  auto fail = [&](const char* what, std::size_t dim, std::size_t parts) {
    throw PartitionError(std::string(what) + "=" + std::to_string(dim) +
                         " is not divisible by " + std::to_string(parts));
  };
  if (r == 0 || s == 0 || t == 0) throw PartitionError("matrix dimensions must be >= 1");
  if (r % params.m != 0) fail("rows(A)", r, params.m);
  if (s % params.p != 0) fail("cols(A)=rows(B)", s, params.p);
  if (t % params.n != 0) fail("cols(B)", t, params.n);
}

std::vector<EncodedShare> encode(const Matrix& a, const Matrix& b,
                                 const SchemeParams& params,
                                 const SketchFamily& family,
                                 const poly::EvaluationGrid& grid) {
  if (a.cols() != b.rows()) {
    throw ParameterError("inner dimensions of A and B differ");
  }
  check_divisibility(static_cast<std::size_t>(a.rows()),
                     static_cast<std::size_t>(a.cols()),
                     static_cast<std::size_t>(b.cols()), params);
  const auto needed = threshold_cs(params);
  if (grid.size() < needed) {
    throw ConfigurationError("grid of " + std::to_string(grid.size()) +
                             " points is below the recovery threshold " +
                             std::to_string(needed));
  }
  family.validate(params.d, params.m, params.n, params.bprime);

  const auto a_blocks = poly::partition(a, params.m, params.p);
  const auto b_blocks = poly::partition(b, params.p, params.n);
  const auto layer = poly::layer_entangled(a_blocks, b_blocks);
  auto sketches = poly::sketch_polynomials(layer, family);
  const auto f = poly::lagrange_combine(std::move(sketches.f));
  const auto g = poly::lagrange_combine(std::move(sketches.g));

  std::vector<EncodedShare> shares(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    shares[j].index = j;
    shares[j].point = grid[j];
    shares[j].f_share = poly::substitute_and_eval(f, grid[j], params.p, params.bprime);
    shares[j].g_share = poly::substitute_and_eval(g, grid[j], params.p, params.bprime);
  }
  return shares;
}

WorkerResult worker_compute(const EncodedShare& share) {
  if (share.f_share.cols() != share.g_share.rows()) {
    throw ParameterError("worker " + std::to_string(share.index) +
                         ": share shapes are not conformable");
  }
  WorkerResult result;
  result.index = share.index;
  result.point = share.point;
  result.product.noalias() = share.f_share * share.g_share;
  return result;
}

SketchSet decode(std::span<const WorkerResult> results,
                 const SchemeParams& params, const SketchFamily& family,
                 const DecodeOptions& options) {
  family.validate(params.d, params.m, params.n, params.bprime);
  const auto needed = static_cast<std::size_t>(threshold_cs(params));
  if (results.size() < needed) {
    throw InsufficientSamplesError(
        needed - results.size(),
        "decoding needs " + std::to_string(needed) + " worker results, got " +
            std::to_string(results.size()) + " (short by " +
            std::to_string(needed - results.size()) + ")");
  }

  std::vector<poly::Sample> samples;
  samples.reserve(results.size());
  for (const auto& r : results) samples.push_back({r.point, r.product});
  const auto interp = poly::interpolate(samples, needed - 1);
  const auto& coeffs = interp.polynomial.coefficients();

  SketchSet out;
  out.bprime = params.bprime;
  out.family = family;
  out.interpolation_residual = interp.max_residual;
  for (const auto& c : coeffs) {
    out.coefficient_scale = std::max(out.coefficient_scale, c.cwiseAbs().maxCoeff());
  }

  // P(x) = sum_e c_e x^e with e = q * stride + r, r < stride: the x part is
  // r and the omega = x^stride part is q, unambiguous since every
  // F_l(x) G_k(x) has x-degree <= 2pb' - 2.
  const std::size_t stride = 2 * params.p * params.bprime - 1;
  const std::size_t omega_terms = 2 * params.d - 1;
  const std::size_t width = 2 * params.bprime - 1;
  const auto rows = coeffs.front().rows();
  const auto cols = coeffs.front().cols();

  out.blocks.assign(params.d, std::vector<Matrix>(width));
  for (std::size_t eta = 1; eta <= params.d; ++eta) {
    for (std::size_t k = 0; k < width; ++k) {
      const std::size_t r = k * params.p + params.p - 1;
      CMatrix acc = CMatrix::Zero(rows, cols);
      double power = 1.0;
      for (std::size_t q = 0; q < omega_terms; ++q) {
        acc += power * coeffs[q * stride + r];
        power *= static_cast<double>(eta);
      }
      out.max_imaginary_residue =
          std::max(out.max_imaginary_residue, acc.imag().cwiseAbs().maxCoeff());
      out.blocks[eta - 1][k] = acc.real();
    }
  }

  const double limit = options.imaginary_tolerance * std::max(1.0, out.coefficient_scale);
  if (out.max_imaginary_residue > limit) {
    throw NumericalFailureError(
        out.max_imaginary_residue,
        "imaginary residue " + std::to_string(out.max_imaginary_residue) +
            " after decoding exceeds the limit " + std::to_string(limit));
  }
  return out;
}

EstimateReport median_recover(const SketchSet& sketches,
                              const SchemeParams& params, bool keep_candidates) {
  const auto& family = sketches.family;
  const std::size_t d = sketches.depth();
  if (d == 0 || d != params.d || family.depth() != d) {
    throw ParameterError("sketch set is incomplete for d=" + std::to_string(params.d));
  }
  const auto& first = sketches.blocks.front().front();
  const auto br = first.rows();
  const auto bc = first.cols();
  EstimateReport report;
  report.max_imaginary_residue = sketches.max_imaginary_residue;
  report.estimate = Matrix::Zero(br * static_cast<Eigen::Index>(params.m),
                                 bc * static_cast<Eigen::Index>(params.n));
  if (keep_candidates) {
    report.candidates.assign(d, Matrix::Zero(report.estimate.rows(), report.estimate.cols()));
  }

  std::vector<Matrix> signed_blocks(d);
  std::vector<double> values(d);
  for (std::size_t i = 0; i < params.m; ++i) {
    for (std::size_t j = 0; j < params.n; ++j) {
      for (std::size_t eta = 1; eta <= d; ++eta) {
        const std::size_t l = eta - 1;
        const std::size_t bucket = family.row_hashes[l](i) + family.col_hashes[l](j);
        const double sign = family.row_signs[l](i) * family.col_signs[l](j);
        signed_blocks[l] = sign * sketches.at(eta, bucket);
        if (keep_candidates) {
          report.candidates[l].block(static_cast<Eigen::Index>(i) * br,
                                     static_cast<Eigen::Index>(j) * bc, br, bc) =
              signed_blocks[l];
        }
      }
      for (Eigen::Index u = 0; u < br; ++u) {
        for (Eigen::Index v = 0; v < bc; ++v) {
          for (std::size_t l = 0; l < d; ++l) values[l] = signed_blocks[l](u, v);
          report.estimate(static_cast<Eigen::Index>(i) * br + u,
                          static_cast<Eigen::Index>(j) * bc + v) = sketch::median_of(values);
        }
      }
    }
  }
  return report;
}

EstimateReport approximate_multiply(const Matrix& a, const Matrix& b,
                                    const SchemeParams& params, std::uint64_t seed,
                                    const MultiplyOptions& options) {
  params.validate();
  const auto family = sketch::make_sketch_family(seed, params.d, params.m,
                                                 params.n, params.bprime);
  const auto grid = poly::EvaluationGrid::make(options.grid, params.workers);
  const auto shares = encode(a, b, params, family, grid);
  std::vector<WorkerResult> results;
  results.reserve(shares.size());
  for (const auto& share : shares) results.push_back(worker_compute(share));
  const auto sketches = decode(results, params, family, options.decode);
  auto report = median_recover(sketches, params, options.keep_candidates);
  if (options.diagnostics) {
    const Matrix exact = a * b;
    report.exact_frobenius = exact.norm();
    report.max_abs_error = (report.estimate - exact).cwiseAbs().maxCoeff();
  }
  return report;
}

Matrix random_dense(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) = normal(rng);
  }
  return out;
}

SparseProblem random_block_sparse(std::size_t r, std::size_t s, std::size_t t,
                                  const SchemeParams& params, std::size_t k,
                                  std::uint64_t seed) {
  check_divisibility(r, s, t, params);
  const std::size_t cells = params.m * params.n;
  if (k > cells) {
    throw ConfigurationError("k=" + std::to_string(k) + " exceeds the " +
                             std::to_string(cells) + " blocks of C");
  }
  if (k > params.p) {
    throw ConfigurationError("block-sparse generation needs p >= k (p=" +
                             std::to_string(params.p) + ", k=" + std::to_string(k) + ")");
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(cells);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  SparseProblem problem;
  problem.a = Matrix::Zero(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s));
  problem.b = Matrix::Zero(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t));
  const auto ar = static_cast<Eigen::Index>(r / params.m);
  const auto inner = static_cast<Eigen::Index>(s / params.p);
  const auto bc = static_cast<Eigen::Index>(t / params.n);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto fill = [&](auto block) {
    for (Eigen::Index u = 0; u < block.rows(); ++u) {
      for (Eigen::Index v = 0; v < block.cols(); ++v) block(u, v) = normal(rng);
    }
  };
  for (std::size_t q = 0; q < k; ++q) {
    const std::size_t i = order[q] / params.n;
    const std::size_t j = order[q] % params.n;
    problem.nonzero_blocks.emplace_back(i, j);
    const auto inner_index = static_cast<Eigen::Index>(q);
    fill(problem.a.block(static_cast<Eigen::Index>(i) * ar, inner_index * inner, ar, inner));
    fill(problem.b.block(inner_index * inner, static_cast<Eigen::Index>(j) * bc, inner, bc));
  }
  std::sort(problem.nonzero_blocks.begin(), problem.nonzero_blocks.end());
  return problem;
}

}  // namespace codedsketch
