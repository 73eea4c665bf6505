#pragma once

#include <memory>
#include <stdexcept>
#include <vector>

#include "cpflow/numerics.hpp"
#include "cpflow/weights.hpp"

namespace cpflow {

// z = 1 leaves the off-diagonal free up to a boundary weight xi'
struct DegenerateDirection : std::domain_error {
  using std::domain_error::domain_error;
};

// Choi matrix sum_ab E_ab (x) Phi(E_ab) of a map given as a superoperator on
// column-major vec: vec(Phi(X)) = S vec(X), S of shape (dout^2, din^2).
// Entry [(a,c),(b,d)] = Phi(E_ab)_{cd}.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> choi_matrix(
    const Eigen::MatrixBase<Derived>& superop, int din, int dout) {
  using Scalar = typename Derived::Scalar;
  if (superop.rows() != dout * dout || superop.cols() != din * din) {
    throw InvalidArgument("choi: superoperator shape does not match dimensions");
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> c(din * dout, din * dout);
  for (int a = 0; a < din; ++a) {
    for (int b = 0; b < din; ++b) {
      const auto col = superop.col(a + din * b);
      for (int cc = 0; cc < dout; ++cc) {
        for (int d = 0; d < dout; ++d) c(a * dout + cc, b * dout + d) = col(cc + dout * d);
      }
    }
  }
  return c;
}

template <typename Derived>
double choi_min_eig(const Eigen::MatrixBase<Derived>& choi) {
  if (choi.rows() != choi.cols()) throw InvalidArgument("choi: matrix is not square");
  return min_eigenvalue_hermitian(choi);
}

struct CpVerdict {
  double min_eig;
  double max_eig;
  double trace;
  double threshold;  // -tol * max(1, |trace|)
  bool cp;
};

CpVerdict cp_verdict(const MatrixXc& choi, double tol = 1e-8);

// Truncated model for Choi matrices of pi_t^#: inputs are operators on
// span{w_a (x) f_i} in H = K (x) L^2, outputs are compressed to span{w_c} in K.
struct CornerModel {
  LambdaSequence lambda = LambdaSequence::linear();
  int factors = 4;       // N
  int factor_dim = 2;    // m
  int l2_dim = 2;        // L^2 factor basis size
  double l2_rate = 0.5;  // L^2 factor basis exp(-(rate + i) x)
  SeriesConfig series;
};

// Choi blocks of the generalized boundary representation at one t.
//   minimal(z)[(a,c),(b,d)] = sum_k z^{k+1} mu_k(c,d) alpha_k(c,a) conj(alpha_k(d,b))
//   mu_k(c,d) = prod_{i<=k} (w_c,i, e^{-x} 1_[0,t) w_d,i)
//   alpha_k(c,a) = (w_c shifted by k, S0(w_aK (x) E(t,inf) f_a0))
//   boundary = B (x) D_t,  B_ab = beta(|phi_a><phi_b|),  D_t(c,d) = (w_c, Delta_t w_d)
class BoundaryChoi {
 public:
  BoundaryChoi(const CornerModel& model, double t);

  int input_dim() const { return din_; }
  int output_dim() const { return dout_; }
  double t() const { return t_; }
  int powers() const { return static_cast<int>(alpha_.size()); }

  MatrixXc minimal(cplx z) const;
  // xi part; needs z = 1 weights
  MatrixXc boundary(const BoundaryWeight& xi) const;
  MatrixXc beta_matrix(const BoundaryWeight& xi) const;
  const MatrixXc& delta_block() const { return delta_t_; }

  // single entry (w_c, pi_t^#(|phi_a><phi_b|) w_d) by the generic path
  cplx entry(const WeightSpec& spec, int a, int b, int c, int d) const;
  HOp input_unit(int a, int b) const;

 private:
  CornerModel model_;
  double t_;
  std::shared_ptr<ProductBasis> kbasis_;
  FactorBasis l2basis_;
  int din_;
  int dout_;
  std::vector<MatrixXc> mu_;     // dout x dout per k
  std::vector<MatrixXc> alpha_;  // dout x din per k
  MatrixXc delta_t_;
};

struct SubordinationVerdict {
  double t;
  CpVerdict difference;
  bool subordinate;
};

// pi_t^#(A) - pi_t^#(B) completely positive; both inputs must be CP
SubordinationVerdict subordination_check(const MatrixXc& choi_a, const MatrixXc& choi_b,
                                         double t, double tol = 1e-8);

// Choi matrix of the 2x2 matrix map [X_ij] -> [Phi_ij(X_ij)] restricted to its
// support (entries with output block != input block vanish identically).
MatrixXc corner_choi(const MatrixXc& c11, const MatrixXc& c12, const MatrixXc& c21,
                     const MatrixXc& c22);

struct HypermaxPoint {
  double t;
  CpVerdict minimal_corner;  // (i) Omega^1 q-positive at t
  CpVerdict difference;      // (ii) Omega - Omega^1 CP
  double gap;                // (iii) largest eigenvalue of the difference
  bool ordered;
  bool gap_ok;
};

struct HypermaxReport {
  cplx z;
  std::vector<HypermaxPoint> points;
  bool q_positive;
  bool ordered;
  bool gap;
  bool degenerate;  // xi = 0: the witness carries no gap
  bool passed() const { return q_positive && ordered && gap; }
};

HypermaxReport hypermax_witness(cplx z, const BoundaryWeight& xi, const CornerModel& model,
                                const std::vector<double>& ts, double tol = 1e-8);

// min Choi eigenvalue of [[min(1), min(z) + s B(x)D],[.., min(1)]]: adding xi
// to the off-diagonal breaks positivity for z != 1
double offdiagonal_xi_probe(const BoundaryChoi& bc, cplx z, const BoundaryWeight& xi,
                            cplx s);

}  // namespace cpflow
