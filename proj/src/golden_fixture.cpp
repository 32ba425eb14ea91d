// Worked example with p = m = n = 4, b' = 2, d = 3. The hash and sign tables
// are read off the example's sketch polynomials, e.g.
//   F_1(x, a) = (-A0 + A1 + A3) - A2 a  gives h_1 = (0,0,1,0), s_1 = (-,+,-,+).

#include <string>

#include "codedsketch/engine.hpp"

namespace codedsketch {

SchemeParams golden_params() {
  SchemeParams params;
  params.p = 4;
  params.m = 4;
  params.n = 4;
  params.bprime = 2;
  params.d = 3;
  params.workers = 80;
  return params;
}

SketchFamily golden_family() {
  using sketch::HashFn;
  using sketch::SignFn;
  SketchFamily family;
  family.bprime = 2;
  family.row_hashes = {
      HashFn::from_table({0, 0, 1, 0}, 2),
      HashFn::from_table({1, 0, 0, 1}, 2),
      HashFn::from_table({1, 1, 0, 1}, 2),
  };
  family.row_signs = {
      SignFn::from_table({-1, +1, -1, +1}),
      SignFn::from_table({+1, +1, +1, -1}),
      SignFn::from_table({-1, +1, +1, +1}),
  };
  family.col_hashes = {
      HashFn::from_table({1, 0, 1, 0}, 2),
      HashFn::from_table({0, 0, 1, 1}, 2),
      HashFn::from_table({1, 0, 0, 0}, 2),
  };
  family.col_signs = {
      SignFn::from_table({+1, -1, +1, -1}),
      SignFn::from_table({+1, -1, -1, +1}),
      SignFn::from_table({+1, -1, -1, +1}),
  };
  return family;
}

const std::vector<std::vector<std::vector<SignedBlock>>>& golden_table() {
  static const std::vector<std::vector<std::vector<SignedBlock>>> table = {
      {
          {{+1, 0, 1}, {+1, 0, 3}, {-1, 1, 1}, {-1, 1, 3}, {-1, 3, 1}, {-1, 3, 3}},
          {{-1, 0, 0}, {-1, 0, 2}, {+1, 1, 0}, {+1, 1, 2},
           {+1, 2, 1}, {+1, 2, 3}, {+1, 3, 2}, {+1, 3, 0}},
          {{-1, 2, 0}, {-1, 2, 2}},
      },
      {
          {{+1, 1, 0}, {-1, 1, 1}, {+1, 2, 0}, {-1, 2, 1}},
          {{+1, 0, 0}, {-1, 0, 1}, {-1, 1, 2}, {+1, 1, 3},
           {-1, 2, 2}, {+1, 2, 3}, {-1, 3, 0}, {+1, 3, 1}},
          {{-1, 0, 2}, {+1, 0, 3}, {+1, 3, 2}, {-1, 3, 3}},
      },
      {
          {{-1, 2, 1}, {-1, 2, 2}, {+1, 2, 3}},
          {{+1, 0, 1}, {+1, 0, 2}, {-1, 0, 3}, {-1, 1, 1}, {-1, 1, 2},
           {+1, 1, 3}, {+1, 2, 0}, {-1, 3, 1}, {-1, 3, 2}, {+1, 3, 3}},
          {{-1, 0, 0}, {+1, 1, 0}, {+1, 3, 0}},
      },
  };
  return table;
}

Matrix combine_blocks(const Matrix& c, std::size_t m, std::size_t n,
                      std::span<const SignedBlock> terms) {
  if (m == 0 || n == 0 || c.rows() % static_cast<Eigen::Index>(m) != 0 ||
      c.cols() % static_cast<Eigen::Index>(n) != 0) {
    throw PartitionError("matrix does not split into a " + std::to_string(m) +
                         "x" + std::to_string(n) + " block grid");
  }
  const auto br = c.rows() / static_cast<Eigen::Index>(m);
  const auto bc = c.cols() / static_cast<Eigen::Index>(n);
  Matrix out = Matrix::Zero(br, bc);
  for (const auto& term : terms) {
    if (term.i >= m || term.j >= n) throw ParameterError("block index out of range");
    out += term.sign * c.block(static_cast<Eigen::Index>(term.i) * br,
                               static_cast<Eigen::Index>(term.j) * bc, br, bc);
  }
  return out;
}

}  // namespace codedsketch
