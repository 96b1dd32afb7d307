#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace tenprop {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr double pi = 3.14159265358979323846;

// Bad or inconsistent input (config files, malformed models, hash mismatch).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Quadrature not converged, bond cap exceeded, non-PSD embedding, NaN in state.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Work or memory estimate above the configured budget.
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace tenprop
