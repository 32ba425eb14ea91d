#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include <unsupported/Eigen/FFT>

#include "codedsketch/poly_codec.hpp"

namespace codedsketch::poly {

namespace {

constexpr double kCircleTol = 1e-12;
constexpr double kCoincideTol = 1e-13;

// Samples stacked as a K x E matrix, one flattened (column-major) block per
// row.
CMatrix stack_values(std::span<const Sample> samples, std::size_t count) {
  const auto entries = samples.front().value.size();
  CMatrix y(static_cast<Eigen::Index>(count), entries);
  for (std::size_t j = 0; j < count; ++j) {
    y.row(static_cast<Eigen::Index>(j)) =
        Eigen::Map<const Eigen::RowVectorXcd>(samples[j].value.data(), entries);
  }
  return y;
}

// Forward DFT of every column divided by the length: turns values at the
// K-th roots of unity (in index order) into monomial coefficients.
CMatrix values_to_coefficients(const CMatrix& values) {
  const auto k = values.rows();
  if (k == 1) return values;  // kissfft has no plan for length 1
  Eigen::FFT<double> fft;
  CMatrix coeffs(k, values.cols());
  std::vector<Complex> in(static_cast<std::size_t>(k));
  std::vector<Complex> out;
  for (Eigen::Index e = 0; e < values.cols(); ++e) {
    for (Eigen::Index j = 0; j < k; ++j) in[static_cast<std::size_t>(j)] = values(j, e);
    fft.fwd(out, in);
    for (Eigen::Index j = 0; j < k; ++j) {
      coeffs(j, e) = out[static_cast<std::size_t>(j)] / static_cast<double>(k);
    }
  }
  return coeffs;
}

Complex unit_root(std::size_t index, std::size_t order) {
  return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(index) /
                             static_cast<double>(order));
}

// If the points are exactly the K-th roots of unity (any order), returns the
// root index of every point.
std::optional<std::vector<std::size_t>> root_indices(std::span<const Complex> pts) {
  const std::size_t k = pts.size();
  std::vector<std::size_t> idx(k);
  std::vector<bool> seen(k, false);
  for (std::size_t j = 0; j < k; ++j) {
    double turns = std::arg(pts[j]) / (2.0 * std::numbers::pi);
    if (turns < 0) turns += 1.0;
    const auto r = static_cast<std::size_t>(std::llround(turns * static_cast<double>(k))) % k;
    if (seen[r] || std::abs(pts[j] - unit_root(r, k)) > kCircleTol) return std::nullopt;
    seen[r] = true;
    idx[j] = r;
  }
  return idx;
}

// Barycentric weights 1 / prod_{k != j}(x_j - x_k), rescaled so the largest
// magnitude is 1 (the scale cancels in the second barycentric form).
std::vector<Complex> barycentric_weights(std::span<const Complex> pts) {
  const std::size_t k = pts.size();
  std::vector<double> log_mag(k, 0.0);
  std::vector<double> phase(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < k; ++i) {
      if (i == j) continue;
      const Complex diff = pts[j] - pts[i];
      log_mag[j] += std::log(std::abs(diff));
      phase[j] += std::arg(diff);
    }
  }
  const double ref = *std::min_element(log_mag.begin(), log_mag.end());
  std::vector<Complex> w(k);
  for (std::size_t j = 0; j < k; ++j) w[j] = std::polar(std::exp(ref - log_mag[j]), -phase[j]);
  return w;
}

// Evaluates the interpolant through (pts, y) at the K-th roots of unity with
// the second barycentric formula, then maps values to coefficients.
CMatrix circle_coefficients(std::span<const Complex> pts, const CMatrix& y) {
  const std::size_t k = pts.size();
  const auto w = barycentric_weights(pts);
  CMatrix resample = CMatrix::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  std::vector<Complex> terms(k);
  for (std::size_t t = 0; t < k; ++t) {
    const Complex z = unit_root(t, k);
    std::optional<std::size_t> hit;
    Complex denom(0.0, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
      const Complex diff = z - pts[j];
      if (std::abs(diff) < kCoincideTol) {
        hit = j;
        break;
      }
      terms[j] = w[j] / diff;
      denom += terms[j];
    }
    const auto row = static_cast<Eigen::Index>(t);
    if (hit) {
      resample(row, static_cast<Eigen::Index>(*hit)) = 1.0;
      continue;
    }
    for (std::size_t j = 0; j < k; ++j) {
      resample(row, static_cast<Eigen::Index>(j)) = terms[j] / denom;
    }
  }
  return values_to_coefficients(resample * y);
}

// Newton divided differences followed by conversion to the monomial basis.
// Used off the unit circle; conditioning degrades quickly with the degree.
CMatrix newton_coefficients(std::span<const Complex> pts, CMatrix c) {
  const auto k = static_cast<Eigen::Index>(pts.size());
  for (Eigen::Index level = 1; level < k; ++level) {
    for (Eigen::Index j = k - 1; j >= level; --j) {
      const Complex denom = pts[static_cast<std::size_t>(j)] -
                            pts[static_cast<std::size_t>(j - level)];
      c.row(j) = (c.row(j) - c.row(j - 1)) / denom;
    }
  }
  CMatrix mono = CMatrix::Zero(k, c.cols());
  mono.row(0) = c.row(k - 1);
  Eigen::Index len = 1;
  for (Eigen::Index j = k - 2; j >= 0; --j) {
    const Complex node = pts[static_cast<std::size_t>(j)];
    for (Eigen::Index i = len; i > 0; --i) {
      mono.row(i) = mono.row(i - 1) - node * mono.row(i);
    }
    mono.row(0) = -node * mono.row(0) + c.row(j);
    ++len;
  }
  return mono;
}

}  // namespace

Interpolation interpolate(std::span<const Sample> samples, std::size_t degree) {
  const std::size_t needed = degree + 1;
  if (samples.size() < needed) {
    throw InsufficientSamplesError(
        needed - samples.size(),
        "interpolating degree " + std::to_string(degree) + " needs " +
            std::to_string(needed) + " samples, got " +
            std::to_string(samples.size()) + " (short by " +
            std::to_string(needed - samples.size()) + ")");
  }
  const auto rows = samples.front().value.rows();
  const auto cols = samples.front().value.cols();
  for (const auto& s : samples) {
    if (s.value.rows() != rows || s.value.cols() != cols) {
      throw ParameterError("interpolation samples must share one shape");
    }
  }

  std::vector<Complex> pts(needed);
  for (std::size_t j = 0; j < needed; ++j) pts[j] = samples[j].point;
  for (std::size_t i = 0; i < needed; ++i) {
    for (std::size_t j = i + 1; j < needed; ++j) {
      if (std::abs(pts[i] - pts[j]) <= kCoincideTol * std::max(1.0, std::abs(pts[i]))) {
        throw ParameterError("duplicate interpolation point at samples " +
                             std::to_string(i) + " and " + std::to_string(j));
      }
    }
  }

  const CMatrix y = stack_values(samples, needed);
  const bool on_circle = std::all_of(pts.begin(), pts.end(), [](Complex z) {
    return std::abs(std::abs(z) - 1.0) < kCircleTol;
  });

  CMatrix coeffs;
  if (on_circle) {
    if (auto idx = root_indices(pts)) {
      CMatrix ordered(y.rows(), y.cols());
      for (std::size_t j = 0; j < needed; ++j) {
        ordered.row(static_cast<Eigen::Index>((*idx)[j])) = y.row(static_cast<Eigen::Index>(j));
      }
      coeffs = values_to_coefficients(ordered);
    } else {
      coeffs = circle_coefficients(pts, y);
    }
  } else {
    coeffs = newton_coefficients(pts, y);
  }

  std::vector<CMatrix> blocks;
  blocks.reserve(needed);
  for (std::size_t k = 0; k < needed; ++k) {
    CMatrix block(rows, cols);
    Eigen::Map<Eigen::RowVectorXcd>(block.data(), block.size()) =
        coeffs.row(static_cast<Eigen::Index>(k));
    blocks.push_back(std::move(block));
  }

  Interpolation result;
  result.polynomial = ComplexPolynomial(std::move(blocks));
  result.used = needed;
  for (std::size_t j = needed; j < samples.size(); ++j) {
    const CMatrix diff = result.polynomial.evaluate(samples[j].point) - samples[j].value;
    result.max_residual = std::max(result.max_residual, diff.cwiseAbs().maxCoeff());
  }
  return result;
}

}  // namespace codedsketch::poly
