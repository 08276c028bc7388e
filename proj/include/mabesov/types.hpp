#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace mabesov {

using Scalar = double;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Kernel matrix K(x_i, x_j) over grid nodes; always applied through the
// quadrature weights, (Kf)_i = sum_j K(i,j) w_j f_j.
using KernelMatrix = Eigen::SparseMatrix<Scalar>;

// Values aligned with grid nodes.
using GridFunction = Vector;

using Mask = std::vector<std::uint8_t>;

inline constexpr Scalar kInf = std::numeric_limits<Scalar>::infinity();

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad configuration or inadmissible parameters (CLI exit code 2).
struct ConfigError : Error {
  using Error::Error;
};

// Numerical failure: divergence, loss of contraction, degenerate data
// (CLI exit code 3).
struct NumericError : Error {
  using Error::Error;
};

}  // namespace mabesov
