#include "codedsketch/poly_codec.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace codedsketch::poly {

BlockMatrix::BlockMatrix(std::size_t grid_rows, std::size_t grid_cols,
                         std::vector<Matrix> blocks)
    : grid_rows_(grid_rows), grid_cols_(grid_cols), blocks_(std::move(blocks)) {
  if (grid_rows == 0 || grid_cols == 0 || blocks_.size() != grid_rows * grid_cols) {
    throw ParameterError("block grid size does not match block count");
  }
  for (const auto& b : blocks_) {
    if (b.rows() != blocks_.front().rows() || b.cols() != blocks_.front().cols()) {
      throw PartitionError("all blocks of a grid must share one shape");
    }
  }
}

std::size_t BlockMatrix::block_rows() const noexcept {
  return static_cast<std::size_t>(blocks_.front().rows());
}

std::size_t BlockMatrix::block_cols() const noexcept {
  return static_cast<std::size_t>(blocks_.front().cols());
}

const Matrix& BlockMatrix::block(std::size_t i, std::size_t j) const {
  return blocks_.at(i * grid_cols_ + j);
}

Matrix& BlockMatrix::block(std::size_t i, std::size_t j) {
  return blocks_.at(i * grid_cols_ + j);
}

Matrix BlockMatrix::assemble() const {
  const auto br = static_cast<Eigen::Index>(block_rows());
  const auto bc = static_cast<Eigen::Index>(block_cols());
  Matrix out(static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols()));
  for (std::size_t i = 0; i < grid_rows_; ++i) {
    for (std::size_t j = 0; j < grid_cols_; ++j) {
      out.block(static_cast<Eigen::Index>(i) * br, static_cast<Eigen::Index>(j) * bc,
                br, bc) = block(i, j);
    }
  }
  return out;
}

BlockMatrix partition(const Matrix& m, std::size_t u, std::size_t v) {
  if (u == 0 || v == 0) throw PartitionError("partition counts must be >= 1");
  const auto rows = static_cast<std::size_t>(m.rows());
  const auto cols = static_cast<std::size_t>(m.cols());
  if (rows == 0 || cols == 0 || rows % u != 0 || cols % v != 0) {
    throw PartitionError("cannot split a " + std::to_string(rows) + "x" +
                         std::to_string(cols) + " matrix into a " +
                         std::to_string(u) + "x" + std::to_string(v) +
                         " grid of equal blocks");
  }
  const auto br = static_cast<Eigen::Index>(rows / u);
  const auto bc = static_cast<Eigen::Index>(cols / v);
  std::vector<Matrix> blocks;
  blocks.reserve(u * v);
  for (std::size_t i = 0; i < u; ++i) {
    for (std::size_t j = 0; j < v; ++j) {
      blocks.emplace_back(m.block(static_cast<Eigen::Index>(i) * br,
                                  static_cast<Eigen::Index>(j) * bc, br, bc));
    }
  }
  return BlockMatrix(u, v, std::move(blocks));
}

EvaluationGrid EvaluationGrid::roots_of_unity(std::size_t count) {
  if (count == 0) throw ParameterError("grid needs at least one point");
  std::vector<Complex> pts(count);
  for (std::size_t j = 0; j < count; ++j) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(j) /
                         static_cast<double>(count);
    pts[j] = std::polar(1.0, angle);
  }
  return EvaluationGrid(GridMode::roots_of_unity, std::move(pts));
}

EvaluationGrid EvaluationGrid::chebyshev(std::size_t count) {
  if (count == 0) throw ParameterError("grid needs at least one point");
  std::vector<Complex> pts(count);
  for (std::size_t j = 0; j < count; ++j) {
    pts[j] = std::cos((2.0 * static_cast<double>(j) + 1.0) * std::numbers::pi /
                      (2.0 * static_cast<double>(count)));
  }
  return EvaluationGrid(GridMode::chebyshev, std::move(pts));
}

EvaluationGrid EvaluationGrid::from_points(std::vector<Complex> points) {
  if (points.empty()) throw ParameterError("grid needs at least one point");
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      if (points[i] == points[j]) {
        throw ParameterError("evaluation points " + std::to_string(i) + " and " +
                             std::to_string(j) + " coincide");
      }
    }
  }
  return EvaluationGrid(GridMode::explicit_points, std::move(points));
}

EvaluationGrid EvaluationGrid::make(GridMode mode, std::size_t count) {
  switch (mode) {
    case GridMode::roots_of_unity: return roots_of_unity(count);
    case GridMode::chebyshev: return chebyshev(count);
    case GridMode::explicit_points: break;
  }
  throw ParameterError("explicit grids must be built from points");
}

EntangledLayer layer_entangled(const BlockMatrix& a, const BlockMatrix& b) {
  const std::size_t p = a.grid_cols();
  if (b.grid_rows() != p) {
    throw ParameterError("A has " + std::to_string(p) +
                         " block-columns but B has " +
                         std::to_string(b.grid_rows()) + " block-rows");
  }
  if (a.block_cols() != b.block_rows()) {
    throw ParameterError("inner block dimensions of A and B differ");
  }
  EntangledLayer layer;
  layer.p = p;
  layer.a_rows.reserve(a.grid_rows());
  for (std::size_t i = 0; i < a.grid_rows(); ++i) {
    std::vector<Matrix> coeffs;
    coeffs.reserve(p);
    for (std::size_t k = 0; k < p; ++k) coeffs.push_back(a.block(i, k));
    layer.a_rows.emplace_back(std::move(coeffs));
  }
  layer.b_cols.reserve(b.grid_cols());
  for (std::size_t j = 0; j < b.grid_cols(); ++j) {
    std::vector<Matrix> coeffs(p);
    for (std::size_t k = 0; k < p; ++k) coeffs[p - 1 - k] = b.block(k, j);
    layer.b_cols.emplace_back(std::move(coeffs));
  }
  return layer;
}

CMatrix SketchPolynomial::evaluate(Complex x, Complex alpha) const {
  if (alpha_terms.empty()) return {};
  CMatrix acc = alpha_terms.back().evaluate(x);
  for (std::size_t k = alpha_terms.size() - 1; k-- > 0;) {
    acc *= alpha;
    acc += alpha_terms[k].evaluate(x);
  }
  return acc;
}

SketchPolynomial sketch_items(std::span<const RealPolynomial> items,
                              const sketch::HashFn& hash,
                              const sketch::SignFn& sign) {
  if (items.empty()) throw ParameterError("nothing to sketch");
  if (hash.domain() != items.size() || sign.domain() != items.size()) {
    throw ParameterError("hash/sign domain " + std::to_string(hash.domain()) +
                         " does not match " + std::to_string(items.size()) +
                         " items");
  }
  const auto& first = items.front();
  SketchPolynomial out;
  out.alpha_terms.assign(hash.range(), RealPolynomial::zero(first.degree(),
                                                            first.rows(),
                                                            first.cols()));
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].degree() != first.degree() || items[i].rows() != first.rows() ||
        items[i].cols() != first.cols()) {
      throw ParameterError("sketched items must share degree and shape");
    }
    auto& bucket = out.alpha_terms[hash(i)];
    const double s = sign(i);
    for (std::size_t k = 0; k <= first.degree(); ++k) {
      bucket.coefficient(k) += s * items[i].coefficient(k);
    }
    ++out.term_count;
  }
  return out;
}

SketchPolynomials sketch_polynomials(const EntangledLayer& layer,
                                     const sketch::SketchFamily& family) {
  const std::size_t d = family.depth();
  if (d == 0) throw ParameterError("sketch family is empty");
  family.validate(d, layer.a_rows.size(), layer.b_cols.size(), family.bprime);
  SketchPolynomials out;
  out.f.reserve(d);
  out.g.reserve(d);
  for (std::size_t l = 0; l < d; ++l) {
    out.f.push_back(sketch_items(layer.a_rows, family.row_hashes[l], family.row_signs[l]));
    out.g.push_back(sketch_items(layer.b_cols, family.col_hashes[l], family.col_signs[l]));
  }
  return out;
}

namespace {

template <typename T>
std::vector<T> lagrange_weights_impl(std::size_t d, T omega) {
  if (d == 0) throw ParameterError("Lagrange combine needs d >= 1");
  std::vector<T> w(d, T(1.0));
  for (std::size_t l = 1; l <= d; ++l) {
    for (std::size_t i = 1; i <= d; ++i) {
      if (i == l) continue;
      w[l - 1] *= (omega - static_cast<double>(i)) /
                  (static_cast<double>(l) - static_cast<double>(i));
    }
  }
  return w;
}

}  // namespace

std::vector<Complex> lagrange_weights(std::size_t d, Complex omega) {
  return lagrange_weights_impl(d, omega);
}

std::vector<double> lagrange_weights(std::size_t d, double omega) {
  return lagrange_weights_impl(d, omega);
}

std::vector<std::vector<double>> lagrange_basis_coefficients(std::size_t d) {
  if (d == 0) throw ParameterError("Lagrange combine needs d >= 1");
  std::vector<std::vector<double>> out(d);
  for (std::size_t l = 1; l <= d; ++l) {
    std::vector<double> poly{1.0};
    for (std::size_t i = 1; i <= d; ++i) {
      if (i == l) continue;
      const double scale = 1.0 / (static_cast<double>(l) - static_cast<double>(i));
      std::vector<double> next(poly.size() + 1, 0.0);
      for (std::size_t q = 0; q < poly.size(); ++q) {
        next[q + 1] += poly[q] * scale;
        next[q] -= poly[q] * static_cast<double>(i) * scale;
      }
      poly = std::move(next);
    }
    out[l - 1] = std::move(poly);
  }
  return out;
}

LagrangeCombined::LagrangeCombined(std::vector<SketchPolynomial> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw ParameterError("Lagrange combine needs d >= 1");
  const auto& f = components_.front();
  for (const auto& c : components_) {
    if (c.alpha_terms.size() != f.alpha_terms.size() ||
        c.alpha_terms.front().degree() != f.alpha_terms.front().degree() ||
        c.alpha_terms.front().rows() != f.alpha_terms.front().rows() ||
        c.alpha_terms.front().cols() != f.alpha_terms.front().cols()) {
      throw ParameterError("combined sketch polynomials must share structure");
    }
  }
}

SketchPolynomial LagrangeCombined::at_omega(double omega) const {
  const auto w = lagrange_weights(d(), omega);
  SketchPolynomial out = components_.front();
  for (auto& term : out.alpha_terms) {
    for (std::size_t k = 0; k <= term.degree(); ++k) term.coefficient(k).setZero();
  }
  out.term_count = 0;
  for (std::size_t l = 0; l < d(); ++l) {
    if (w[l] == 0.0) continue;
    out.term_count += components_[l].term_count;
    for (std::size_t a = 0; a < out.alpha_terms.size(); ++a) {
      auto& dst = out.alpha_terms[a];
      const auto& src = components_[l].alpha_terms[a];
      for (std::size_t k = 0; k <= dst.degree(); ++k) {
        dst.coefficient(k) += w[l] * src.coefficient(k);
      }
    }
  }
  return out;
}

CMatrix LagrangeCombined::evaluate(Complex x, Complex alpha, Complex omega) const {
  const auto w = lagrange_weights(d(), omega);
  CMatrix acc = w[0] * components_[0].evaluate(x, alpha);
  for (std::size_t l = 1; l < d(); ++l) acc += w[l] * components_[l].evaluate(x, alpha);
  return acc;
}

LagrangeCombined lagrange_combine(std::vector<SketchPolynomial> sketches) {
  return LagrangeCombined(std::move(sketches));
}

Complex integer_power(Complex x, std::uint64_t e) {
  Complex result(1.0, 0.0);
  while (e != 0) {
    if (e & 1U) result *= x;
    x *= x;
    e >>= 1U;
  }
  return result;
}

CMatrix substitute_and_eval(const LagrangeCombined& combined, Complex theta,
                            std::size_t p, std::size_t bprime) {
  if (p == 0 || bprime == 0) throw ParameterError("p and b' must be >= 1");
  const Complex alpha = integer_power(theta, p);
  const Complex omega = integer_power(theta, 2 * p * bprime - 1);
  return combined.evaluate(theta, alpha, omega);
}

}  // namespace codedsketch::poly
