#pragma once

#include <Eigen/Dense>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace cpflow {

using cplx = std::complex<double>;
using MatrixXc = Eigen::MatrixXcd;
using VectorXc = Eigen::VectorXcd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// representation not supported by an operation (e.g. Gamma on a grid matrix)
struct Unsupported : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonConvergence : std::runtime_error {
  NonConvergence(const std::string& what, double partial, double tail)
      : std::runtime_error(what), partial_sum(partial), tail_estimate(tail) {}
  double partial_sum;
  double tail_estimate;
};

struct PreconditionViolation : std::runtime_error {
  PreconditionViolation(const std::string& what, double measured)
      : std::runtime_error(what), measured(measured) {}
  double measured;
};

}  // namespace cpflow
