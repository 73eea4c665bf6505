#pragma once

#include <vector>

#include "cpflow/halfline.hpp"
#include "cpflow/lambda.hpp"

namespace cpflow {

// Vector in K = (x)_j L^2(0,inf): explicit head factors, then position j
// carries the reference vector k_{j + offset}.
struct ProductVector {
  std::vector<ExpKernelVector> head;
  int offset = 0;

  static ProductVector reference() { return {}; }
  int head_size() const { return static_cast<int>(head.size()); }
  ExpKernelVector factor(int j, const LambdaSequence& lam) const;
  // positions n+1, n+2, ... renumbered from 1
  ProductVector dropped_front(int n, const LambdaSequence& lam) const;
  ProductVector scaled(cplx s) const;
  bool operator==(const ProductVector&) const = default;
};

cplx inner_product(const ProductVector& f, const ProductVector& g,
                   const LambdaSequence& lam);

// Elementary tensor on K: coef * e^{-x} (x) ... (x) e^{-x}   (lead copies)
//                          (x) head_1 (x) ... (x) head_h (x) tail rule.
struct ElemTensor {
  cplx coef = 1.0;
  int lead = 0;
  std::vector<FactorOp> head;
  TailRule tail;

  static ElemTensor identity() { return {}; }
  static ElemTensor delta() { return {1.0, 0, {}, TailRule::mult(1.0)}; }
  // (x)_j e^{-x} 1_[0,t)
  static ElemTensor delta_upto(double t) { return {1.0, 0, {}, TailRule::mult(1.0, 0.0, t)}; }
  static ElemTensor rank_one(const ProductVector& f, const ProductVector& g,
                             const LambdaSequence& lam, cplx coef = 1.0);

  int extent() const { return lead + static_cast<int>(head.size()); }
  FactorOp factor(int j, const LambdaSequence& lam) const;
  ElemTensor adjoint() const;
  ElemTensor scaled(cplx s) const;
  // all positions up to n written out explicitly (lead expanded)
  ElemTensor expanded(int n, const LambdaSequence& lam) const;
};

ElemTensor operator*(const ElemTensor& a, const ElemTensor& b);

// (F, X G)
cplx matrix_element(const ProductVector& f, const ElemTensor& x,
                    const ProductVector& g, const LambdaSequence& lam);
// prod_{j >= from} (k_{j+oF}, X_j k_{j+oG}), coefficient excluded
cplx reference_tail(const ElemTensor& x, int from, int oF, int oG,
                    const LambdaSequence& lam);

// ----------------------------------------------------------- H = K (x) L^2

struct HVector {
  ProductVector k;
  ExpKernelVector l2;
};

struct HOp {
  ElemTensor k;
  FactorOp l2;
};

using HOperator = std::vector<HOp>;

cplx inner_product(const HVector& f, const HVector& g, const LambdaSequence& lam);
cplx matrix_element(const HVector& f, const HOp& a, const HVector& g,
                    const LambdaSequence& lam);

// Lambda(A) = A (x) e^{-x}; the windowed variants restrict the L^2 factor
inline HOp lambda_op(const ElemTensor& a) { return {a, FactorOp::mult(1.0)}; }
inline HOp lambda_from(const ElemTensor& a, double t) {
  return {a, FactorOp::mult(1.0, t, kInf)};
}
inline HOp lambda_upto(const ElemTensor& a, double t) {
  return {a, FactorOp::mult(1.0, 0.0, t)};
}
// I - Lambda
inline HOp one_minus_lambda() {
  return {ElemTensor::identity(), FactorOp::identity() - FactorOp::mult(1.0)};
}
// E(t, inf) A E(t, inf) on the L^2 factor
inline HOp compress_from(const HOp& a, double t) {
  return {a.k, a.l2.compressed(t, kInf)};
}

// S0((f_1 (x) f_2 (x) ...) (x) h) = h (x) f_1 (x) f_2 (x) ...
ProductVector s0_apply(const HVector& v);
HVector s0_adjoint(const ProductVector& f, const LambdaSequence& lam);

struct TruncatedShift {
  ProductVector value;
  double fidelity;
};
// drops old factor N and reports |(f_N, k_N)|
TruncatedShift s0_apply_truncated(const HVector& v, int n_factors,
                                  const LambdaSequence& lam);

// pi(A) = S0 A S0^*
ElemTensor pi_apply(const HOp& a);
// (pi Lambda)^n (A)
ElemTensor pi_lambda_power(const ElemTensor& a, int n);

struct DeltaCurve {
  std::vector<cplx> curve;  // n -> (F, (pi Lambda)^n(I) G), n = 0..n_max
  cplx limit;               // (F, Delta G)
  double tail_estimate;     // prod_{i > n_max} lambda_i^2 / (1 + lambda_i^2)
  bool monotone;
};

DeltaCurve delta_pairing(const ProductVector& f, const ProductVector& g,
                         int n_max, const LambdaSequence& lam);

// ------------------------------------------------------------------ bases

// Orthonormal basis of span{exp(-(base + i) x) : i < m}; element 0 is the
// normalized exp(-base x).
class FactorBasis {
 public:
  FactorBasis(double base_rate, int m);
  int size() const { return static_cast<int>(functions_.size()); }
  const ExpKernelVector& operator[](int i) const { return functions_[i]; }
  MatrixXc matrix(const FactorOp& a) const;

 private:
  std::vector<ExpKernelVector> functions_;
};

// Product basis of the first N positions of K with reference tail.
// Index digits are most significant at position 1.
class ProductBasis {
 public:
  ProductBasis(LambdaSequence lam, int n_factors, int m);

  int dim() const { return dim_; }
  int factors() const { return n_; }
  int factor_dim() const { return m_; }
  const LambdaSequence& lambda() const { return lam_; }
  const FactorBasis& factor(int j) const { return bases_[j - 1]; }

  std::vector<int> digits(int index) const;
  ProductVector vector(int index) const;
  // (w_a, X w_b)
  MatrixXc matrix(const ElemTensor& x) const;

 private:
  LambdaSequence lam_;
  int n_;
  int m_;
  int dim_;
  std::vector<FactorBasis> bases_;
};

}  // namespace cpflow
