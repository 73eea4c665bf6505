#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <vector>

namespace cpflow {

// Neville extrapolation of samples f(x_i) to x = 0. Returns the value of the
// full interpolant and the difference to the interpolant without the first
// (coarsest) sample, a usual error proxy.
template <typename Scalar>
struct Extrapolated {
  Scalar value;
  double error;
};

template <typename Scalar>
Extrapolated<Scalar> neville_at_zero(const std::vector<double>& x,
                                     const std::vector<Scalar>& f) {
  const std::size_t n = x.size();
  std::vector<Scalar> p(f);
  Scalar previous = p.back();
  for (std::size_t level = 1; level < n; ++level) {
    for (std::size_t i = 0; i + level < n; ++i) {
      const double xa = x[i];
      const double xb = x[i + level];
      p[i] = (xb * p[i] - xa * p[i + 1]) / (xb - xa);
    }
    if (level == n - 2) previous = p[1];
  }
  return {p[0], std::abs(p[0] - previous)};
}

// Hermitian square root of a PSD matrix, negative eigenvalues clamped
template <typename Derived>
typename Derived::PlainObject psd_sqrt(const Eigen::MatrixBase<Derived>& g) {
  Eigen::SelfAdjointEigenSolver<typename Derived::PlainObject> es(g);
  auto ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

template <typename Derived>
double trace_norm_hermitian(const Eigen::MatrixBase<Derived>& m) {
  typename Derived::PlainObject h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<typename Derived::PlainObject> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().sum();
}

template <typename Derived>
double min_eigenvalue_hermitian(const Eigen::MatrixBase<Derived>& m) {
  typename Derived::PlainObject h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<typename Derived::PlainObject> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// log2 slope of successive errors under halving of h
inline std::vector<double> observed_orders(const std::vector<double>& errors) {
  std::vector<double> out;
  for (std::size_t i = 1; i < errors.size(); ++i) {
    out.push_back(std::log2(errors[i - 1] / errors[i]));
  }
  return out;
}

}  // namespace cpflow
