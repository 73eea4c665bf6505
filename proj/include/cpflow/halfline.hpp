#pragma once

#include <vector>

#include "cpflow/types.hpp"

namespace cpflow {

// x -> sum_j c_j exp(-mu_j x), restricted to the window [lo, hi).
struct ExpTerm {
  cplx coef;
  cplx rate;
  friend bool operator==(const ExpTerm&, const ExpTerm&) = default;
};

class ExpKernelVector {
 public:
  ExpKernelVector() = default;
  explicit ExpKernelVector(std::vector<ExpTerm> terms, double lo = 0.0,
                           double hi = kInf);

  static ExpKernelVector exponential(cplx rate, cplx coef = 1.0);
  // k(x) = lambda exp(-lambda^2 x / 2), unit norm
  static ExpKernelVector reference(double lambda);

  const std::vector<ExpTerm>& terms() const { return terms_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  bool empty() const { return terms_.empty() || hi_ <= lo_; }

  cplx operator()(double x) const;

  // multiplication by exp(-p x)
  ExpKernelVector damped(cplx p) const;
  // multiplication by the indicator of [a, b)
  ExpKernelVector windowed(double a, double b) const;
  // (U(t) f)(x) = f(x - t)
  ExpKernelVector translated(double t) const;
  // (U(t)^* f)(x) = f(x + t)
  ExpKernelVector translated_back(double t) const;
  ExpKernelVector scaled(cplx s) const;

  ExpKernelVector operator+(const ExpKernelVector& o) const;
  // structural, not functional, equality
  bool operator==(const ExpKernelVector&) const = default;

 private:
  void validate() const;
  std::vector<ExpTerm> terms_;
  double lo_ = 0.0;
  double hi_ = kInf;
};

// int_a^b exp(-s x) dx
cplx exp_integral(cplx s, double a, double b);

cplx inner_product(const ExpKernelVector& f, const ExpKernelVector& g);
double norm(const ExpKernelVector& f);

// multiplication by exp(-x) on one factor
inline ExpKernelVector apply_lambda_factor(const ExpKernelVector& f) {
  return f.damped(1.0);
}

// Operators on L^2(0, inf) closed under products and adjoints:
// sums of coef * exp(-p x) 1_[lo,hi) and coef * |ket><bra|.
struct MultTerm {
  cplx coef;
  double p;
  double lo;
  double hi;
};

struct RankOneTerm {
  cplx coef;
  ExpKernelVector ket;
  ExpKernelVector bra;
};

class FactorOp {
 public:
  FactorOp() = default;

  static FactorOp identity();
  static FactorOp zero() { return {}; }
  static FactorOp mult(double p, double lo = 0.0, double hi = kInf,
                       cplx coef = 1.0);
  static FactorOp rank_one(const ExpKernelVector& ket,
                           const ExpKernelVector& bra, cplx coef = 1.0);

  const std::vector<MultTerm>& mults() const { return mults_; }
  const std::vector<RankOneTerm>& ranks() const { return ranks_; }
  bool is_zero() const { return mults_.empty() && ranks_.empty(); }

  // (f, A g)
  cplx matrix_element(const ExpKernelVector& f, const ExpKernelVector& g) const;
  ExpKernelVector apply(const ExpKernelVector& g) const;

  FactorOp adjoint() const;
  // 1_[a,b) A 1_[a,b)
  FactorOp compressed(double a, double b) const;
  // U(t) A U(t)^*
  FactorOp translated(double t) const;

  FactorOp operator+(const FactorOp& o) const;
  FactorOp operator-(const FactorOp& o) const;
  FactorOp operator*(const FactorOp& o) const;
  FactorOp scaled(cplx s) const;

 private:
  std::vector<MultTerm> mults_;
  std::vector<RankOneTerm> ranks_;
};

// Gamma(A) = int_0^inf e^{-t} U(t) A U(t)^* dt, kept as A plus the closed-form
// matrix-element rule: for pure exponentials (e_a, Gamma(A) e_b) =
// (e_a, A e_b) / (1 + conj(a) + b).
class GammaImage {
 public:
  explicit GammaImage(FactorOp a) : a_(std::move(a)) {}
  cplx matrix_element(const ExpKernelVector& f, const ExpKernelVector& g) const;
  const FactorOp& source() const { return a_; }

 private:
  FactorOp a_;
};

GammaImage apply_gamma(const FactorOp& a);

// the fixed Q0 kernel q(x) = exp(-x/2)
ExpKernelVector q0_kernel();

// Phi(rho)(A) for A = A_K (x) A_0 elementary: rho(A_K) * (q, A_0 q)
inline cplx phi_factor(const FactorOp& a0) {
  const auto q = q0_kernel();
  return a0.matrix_element(q, q);
}
inline cplx phi_factor(const GammaImage& g0) {
  const auto q = q0_kernel();
  return g0.matrix_element(q, q);
}

// ---------------------------------------------------------------- grid backend

struct Grid {
  double length;
  int points;
  double spacing() const { return length / points; }
  double midpoint(int i) const { return (i + 0.5) * spacing(); }
};

struct GridVector {
  Grid grid;
  VectorXc values;

  static GridVector sample(const ExpKernelVector& f, const Grid& grid);
  double norm2() const;
};

cplx inner_product(const GridVector& f, const GridVector& g);

struct SnapReport {
  int cells;
  double snapped_t;
  double snap_distance;
};

SnapReport snap_time(const Grid& grid, double t);

struct Translation {
  GridVector value;
  SnapReport snap;
  double outflow_mass;
};

Translation translate(const GridVector& f, double t);

// grid matrices of U(t) and E(t) = I - U(t)U(t)^*
MatrixXc translation_matrix(const Grid& grid, int cells);
MatrixXc edge_projection(const Grid& grid, double t);

}  // namespace cpflow
