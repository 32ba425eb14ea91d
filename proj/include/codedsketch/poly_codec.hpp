#pragma once

// Block partitioning, the entangled polynomial layer, sketch polynomials,
// the Lagrange combining layer, and evaluation/interpolation of matrix
// polynomials over structured point grids.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "codedsketch/error.hpp"
#include "codedsketch/sketch_core.hpp"

namespace codedsketch::poly {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;

/// u x v grid of equally shaped blocks, stored row-major.
class BlockMatrix {
 public:
  BlockMatrix(std::size_t grid_rows, std::size_t grid_cols,
              std::vector<Matrix> blocks);

  std::size_t grid_rows() const noexcept { return grid_rows_; }
  std::size_t grid_cols() const noexcept { return grid_cols_; }
  std::size_t block_rows() const noexcept;
  std::size_t block_cols() const noexcept;
  std::size_t rows() const noexcept { return grid_rows_ * block_rows(); }
  std::size_t cols() const noexcept { return grid_cols_ * block_cols(); }

  const Matrix& block(std::size_t i, std::size_t j) const;
  Matrix& block(std::size_t i, std::size_t j);

  Matrix assemble() const;

 private:
  std::size_t grid_rows_;
  std::size_t grid_cols_;
  std::vector<Matrix> blocks_;
};

/// Lossless split into a u x v grid. Non-divisible shapes throw
/// PartitionError; there is no implicit padding.
BlockMatrix partition(const Matrix& m, std::size_t u, std::size_t v);

enum class GridMode { roots_of_unity, chebyshev, explicit_points };

/// Pairwise distinct evaluation points, one per worker.
class EvaluationGrid {
 public:
  /// theta_j = exp(2 pi i (j-1) / N), j = 1..N.
  static EvaluationGrid roots_of_unity(std::size_t count);
  /// Chebyshev points of the first kind on [-1, 1].
  static EvaluationGrid chebyshev(std::size_t count);
  /// Caller-provided points; throws ParameterError on duplicates.
  static EvaluationGrid from_points(std::vector<Complex> points);
  static EvaluationGrid make(GridMode mode, std::size_t count);

  GridMode mode() const noexcept { return mode_; }
  std::size_t size() const noexcept { return points_.size(); }
  const std::vector<Complex>& points() const noexcept { return points_; }
  Complex operator[](std::size_t j) const { return points_[j]; }

 private:
  EvaluationGrid(GridMode mode, std::vector<Complex> points)
      : mode_(mode), points_(std::move(points)) {}

  GridMode mode_;
  std::vector<Complex> points_;
};

/// Dense polynomial in x whose coefficients are equally shaped matrices.
template <typename Scalar>
class MatrixPolynomial {
 public:
  using Block = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  MatrixPolynomial() = default;
  explicit MatrixPolynomial(std::vector<Block> coefficients)
      : coeffs_(std::move(coefficients)) {
    for (const auto& c : coeffs_) {
      if (c.rows() != coeffs_.front().rows() || c.cols() != coeffs_.front().cols()) {
        throw ParameterError("matrix polynomial coefficients must share one shape");
      }
    }
  }
  /// Zero polynomial of the given degree and shape.
  static MatrixPolynomial zero(std::size_t degree, Eigen::Index rows,
                               Eigen::Index cols) {
    return MatrixPolynomial(
        std::vector<Block>(degree + 1, Block::Zero(rows, cols)));
  }

  bool empty() const noexcept { return coeffs_.empty(); }
  /// Storage degree (number of coefficients - 1).
  std::size_t degree() const noexcept {
    return coeffs_.empty() ? 0 : coeffs_.size() - 1;
  }
  Eigen::Index rows() const noexcept { return coeffs_.empty() ? 0 : coeffs_.front().rows(); }
  Eigen::Index cols() const noexcept { return coeffs_.empty() ? 0 : coeffs_.front().cols(); }

  const Block& coefficient(std::size_t k) const { return coeffs_.at(k); }
  Block& coefficient(std::size_t k) { return coeffs_.at(k); }
  const std::vector<Block>& coefficients() const noexcept { return coeffs_; }

  /// Highest k with a coefficient of max-abs above `tol`; 0 for the zero
  /// polynomial.
  std::size_t effective_degree(double tol = 0.0) const {
    for (std::size_t k = coeffs_.size(); k-- > 0;) {
      if (coeffs_[k].cwiseAbs().maxCoeff() > tol) return k;
    }
    return 0;
  }

  /// Horner evaluation.
  template <typename X>
  auto evaluate(X x) const {
    using Out = std::common_type_t<Scalar, X>;
    using OutBlock = Eigen::Matrix<Out, Eigen::Dynamic, Eigen::Dynamic>;
    if (coeffs_.empty()) return OutBlock();
    OutBlock acc = coeffs_.back().template cast<Out>();
    for (std::size_t k = coeffs_.size() - 1; k-- > 0;) {
      acc *= Out(x);
      acc += coeffs_[k].template cast<Out>();
    }
    return acc;
  }

 private:
  std::vector<Block> coeffs_;
};

using RealPolynomial = MatrixPolynomial<double>;
using ComplexPolynomial = MatrixPolynomial<Complex>;

/// Product of two matrix polynomials (coefficient convolution with matrix
/// products).
template <typename Scalar>
MatrixPolynomial<Scalar> multiply(const MatrixPolynomial<Scalar>& lhs,
                                  const MatrixPolynomial<Scalar>& rhs) {
  if (lhs.empty() || rhs.empty()) return {};
  if (lhs.cols() != rhs.rows()) {
    throw ParameterError("matrix polynomial product shapes are not conformable");
  }
  auto out = MatrixPolynomial<Scalar>::zero(lhs.degree() + rhs.degree(),
                                            lhs.rows(), rhs.cols());
  for (std::size_t i = 0; i <= lhs.degree(); ++i) {
    for (std::size_t j = 0; j <= rhs.degree(); ++j) {
      out.coefficient(i + j).noalias() += lhs.coefficient(i) * rhs.coefficient(j);
    }
  }
  return out;
}

/// A_hat(x) = sum_k x^k A_k over block-columns of A, and
/// B_hat(x) = sum_k x^(p-1-k) B_k over block-rows of B, kept per block-row
/// of A (m entries) and per block-column of B (n entries).
struct EntangledLayer {
  std::size_t p = 1;
  std::vector<RealPolynomial> a_rows;
  std::vector<RealPolynomial> b_cols;
};

/// `a` must be an m x p block grid and `b` a p x n block grid.
EntangledLayer layer_entangled(const BlockMatrix& a, const BlockMatrix& b);

/// Bivariate polynomial sum_k alpha^k Q_k(x); `alpha_terms[k]` is Q_k.
/// `term_count` counts how many items were hashed in.
struct SketchPolynomial {
  std::vector<RealPolynomial> alpha_terms;
  std::size_t term_count = 0;

  std::size_t alpha_degree() const noexcept {
    return alpha_terms.empty() ? 0 : alpha_terms.size() - 1;
  }
  /// Value at (x, alpha).
  CMatrix evaluate(Complex x, Complex alpha) const;
};

/// sum_i s(i) items_i(x) alpha^h(i), with alpha degree h.range() - 1.
SketchPolynomial sketch_items(std::span<const RealPolynomial> items,
                              const sketch::HashFn& hash,
                              const sketch::SignFn& sign);

struct SketchPolynomials {
  std::vector<SketchPolynomial> f;  ///< rows of A_hat, one per l
  std::vector<SketchPolynomial> g;  ///< columns of B_hat, one per l
};

SketchPolynomials sketch_polynomials(const EntangledLayer& layer,
                                     const sketch::SketchFamily& family);

/// L_l(omega) = prod_{i != l} (omega - i) / (l - i) at nodes 1..d,
/// returned for l = 1..d.
std::vector<Complex> lagrange_weights(std::size_t d, Complex omega);
std::vector<double> lagrange_weights(std::size_t d, double omega);

/// Monomial coefficients of the Lagrange basis: result[l-1][q] is the
/// coefficient of omega^q in L_l(omega).
std::vector<std::vector<double>> lagrange_basis_coefficients(std::size_t d);

/// Trivariate F(x, alpha, omega) = sum_l F_l(x, alpha) L_l(omega).
class LagrangeCombined {
 public:
  explicit LagrangeCombined(std::vector<SketchPolynomial> components);

  std::size_t d() const noexcept { return components_.size(); }
  const std::vector<SketchPolynomial>& components() const noexcept {
    return components_;
  }

  /// Bivariate slice at a real omega, with real coefficients.
  SketchPolynomial at_omega(double omega) const;

  CMatrix evaluate(Complex x, Complex alpha, Complex omega) const;

 private:
  std::vector<SketchPolynomial> components_;
};

LagrangeCombined lagrange_combine(std::vector<SketchPolynomial> sketches);

/// x^e by repeated squaring.
Complex integer_power(Complex x, std::uint64_t e);

/// F(theta, theta^p, theta^(2 p b' - 1)).
CMatrix substitute_and_eval(const LagrangeCombined& combined, Complex theta,
                            std::size_t p, std::size_t bprime);

struct Sample {
  Complex point;
  CMatrix value;
};

struct Interpolation {
  ComplexPolynomial polynomial;
  /// Max |P(theta) - sample| over samples beyond the first D+1, 0 if none.
  double max_residual = 0.0;
  /// Number of samples used (always D+1).
  std::size_t used = 0;
};

/// Unique degree-<=D matrix polynomial through the first D+1 samples in the
/// given order. Duplicate points throw ParameterError; too few samples throw
/// InsufficientSamplesError carrying the shortfall.
Interpolation interpolate(std::span<const Sample> samples, std::size_t degree);

}  // namespace codedsketch::poly
