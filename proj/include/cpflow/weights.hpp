#pragma once

#include <map>
#include <memory>
#include <optional>
#include <tuple>
#include <vector>

#include "cpflow/tensorspace.hpp"

namespace cpflow {

struct SeriesConfig {
  int max_terms = 1 << 17;
  double tail_tolerance = 1e-10;
};

// w * (f, . g)
struct RankTerm {
  cplx weight;
  ProductVector f;
  ProductVector g;
};

// Normal functional on B(K): rho(A) = tr(D M(A)) + sum_i w_i (f_i, A g_i),
// with M(A)_{ab} = (w_a, A w_b) in a product basis.
class Functional {
 public:
  Functional() = default;
  static Functional vector_state(const ProductVector& f, cplx weight = 1.0);
  static Functional dense(std::shared_ptr<const ProductBasis> basis, MatrixXc density);

  Functional& add(cplx weight, const ProductVector& f, const ProductVector& g);

  cplx operator()(const ElemTensor& x, const LambdaSequence& lam) const;
  cplx trace(const LambdaSequence& lam) const;

  bool has_dense() const { return basis_ != nullptr; }
  const ProductBasis& basis() const { return *basis_; }
  const MatrixXc& density() const { return density_; }
  const std::vector<RankTerm>& ranks() const { return ranks_; }

  // dense part rewritten as rank terms over basis vectors
  Functional as_rank_terms() const;
  Functional scaled(cplx s) const;
  Functional operator+(const Functional& o) const;

 private:
  std::shared_ptr<const ProductBasis> basis_;
  MatrixXc density_;
  std::vector<RankTerm> ranks_;
};

struct HRankTerm {
  cplx weight;
  HVector f;
  HVector g;
};

// Normal functional on B(H) given by rank terms
class HFunctional {
 public:
  static HFunctional vector_state(const HVector& f);
  HFunctional& add(cplx weight, const HVector& f, const HVector& g);
  cplx operator()(const HOp& a, const LambdaSequence& lam) const;
  cplx operator()(const HOperator& a, const LambdaSequence& lam) const;
  // (Lambda-hat nu)(B) = nu(B (x) e^{-x})
  Functional contracted() const;
  const std::vector<HRankTerm>& ranks() const { return ranks_; }

 private:
  std::vector<HRankTerm> ranks_;
};

// Boundary-algebra membership of an H operator: the L^2 factor must vanish
// at x = 0 (multiplier sum zero there, rank terms windowed away from 0).
bool is_boundary_element(const HOp& a);
void require_boundary_element(const HOperator& a);

struct SeriesResult {
  cplx value = 0.0;
  int terms = 0;
  bool extrapolated = false;
  double tail_bound = 0.0;
};

// sum_n z^{n+1} rho((pi Lambda)^n pi(A)) for a fixed boundary element A.
// Past the head of rho every term is (head part) x (scalar), so the scalar
// series is cached per (head length, offsets, z).
class SeriesEvaluator {
 public:
  SeriesEvaluator(HOperator a, LambdaSequence lam, SeriesConfig cfg = {});

  SeriesResult omega_z(cplx z, const Functional& rho) const;
  const HOperator& element() const { return a_; }

 private:
  SeriesResult scalar_series(cplx z, int head, int oF, int oG) const;
  cplx term_value(int n, int head, int oF, int oG) const;

  HOperator a_;
  std::vector<ElemTensor> pi_a_;
  LambdaSequence lam_;
  SeriesConfig cfg_;
  mutable std::map<std::tuple<int, int, int, double, double>, SeriesResult> cache_;
};

SeriesResult omega1(const Functional& rho, const HOperator& a,
                    const LambdaSequence& lam, const SeriesConfig& cfg = {});
SeriesResult omega_z(cplx z, const Functional& rho, const HOperator& a,
                     const LambdaSequence& lam, const SeriesConfig& cfg = {});

// xi = (1 - nu(Lambda(Delta)))^{-1} R(pi-hat Lambda-hat) nu, evaluated as
// xi(V) = c [nu(V) + omega1(Lambda-hat nu)(V)].
class BoundaryWeight {
 public:
  static BoundaryWeight zero(LambdaSequence lam);
  static BoundaryWeight from_nu(HFunctional nu, LambdaSequence lam,
                                SeriesConfig cfg = {}, double singular_margin = 1e-9);

  bool is_zero() const { return zero_; }
  double normalization() const { return c_; }
  cplx nu_lambda_delta() const { return nu_lambda_delta_; }
  const HFunctional& nu() const { return nu_; }

  cplx operator()(const HOperator& v) const;
  cplx operator()(const HOp& v) const { return (*this)(HOperator{v}); }

 private:
  explicit BoundaryWeight(LambdaSequence lam) : lam_(std::move(lam)) {}
  bool zero_ = true;
  HFunctional nu_;
  Functional nu_prime_;
  LambdaSequence lam_;
  SeriesConfig cfg_;
  double c_ = 0.0;
  cplx nu_lambda_delta_ = 0.0;
};

// omega(rho) = omega^z(rho) + [z == 1] rho(Delta) xi
struct WeightSpec {
  cplx z = 1.0;
  std::optional<BoundaryWeight> xi;

  bool minimal() const { return !xi || xi->is_zero(); }
};

cplx evaluate_weight(const WeightSpec& spec, const Functional& rho,
                     const HOperator& a, const LambdaSequence& lam,
                     const SeriesConfig& cfg = {});
cplx omega_full(const Functional& rho, const HOperator& a, const BoundaryWeight& xi,
                const LambdaSequence& lam, const SeriesConfig& cfg = {});

// omega|_t(rho)(A) = omega(rho)(E(t,inf) A E(t,inf)), bounded for t > 0
class TruncatedWeight {
 public:
  TruncatedWeight(WeightSpec spec, double t, LambdaSequence lam, SeriesConfig cfg = {});
  cplx operator()(const Functional& rho, const HOperator& a) const;
  double t() const { return t_; }

 private:
  WeightSpec spec_;
  double t_;
  LambdaSequence lam_;
  SeriesConfig cfg_;
};

TruncatedWeight truncate_weight(const WeightSpec& spec, double t,
                                const LambdaSequence& lam, const SeriesConfig& cfg = {});

// Generalized boundary representation in Heisenberg form:
//   pi_t^#(X) = sum_k z^{k+1} K_t^k pi(E X E) + beta(X) Delta_t,
//   K_t(A) = pi(A (x) e^{-x} 1_[0,t)),  E = E(t, inf),
//   beta(X) = [xi(E X E) - xi(Lambda_t P_t X)] / (1 + xi(Lambda_t Delta_t)).
class BoundaryRep {
 public:
  BoundaryRep(WeightSpec spec, double t, LambdaSequence lam, SeriesConfig cfg = {});

  double t() const { return t_; }
  const WeightSpec& spec() const { return spec_; }
  const LambdaSequence& lambda() const { return lam_; }

  // K_t^k pi(E X E), without the z weight
  ElemTensor power_term(const HOp& x, int k) const;
  cplx beta(const HOp& x) const;
  cplx beta_denominator() const { return beta_den_; }

  // rho(pi_t^#(X)); the k-sum stops once terms are negligible
  cplx apply(const Functional& rho, const HOp& x) const;
  // pi_t^#(X) written out up to k_max
  std::vector<ElemTensor> heisenberg(const HOp& x, int k_max) const;
  // |rho(Y) + omega(rho)(Lambda_t Y) - omega(rho)(E X E)| with Y = pi_t^#(X)
  double residual(const Functional& rho, const HOp& x, int k_max) const;

 private:
  WeightSpec spec_;
  double t_;
  LambdaSequence lam_;
  SeriesConfig cfg_;
  cplx beta_den_ = 1.0;
};

// Bounded finite-dimensional weight maps (matrices on coordinate spaces of
// functionals): pi = omega (I + Lambda-hat omega)^{-1}.
struct FiniteRepResult {
  VectorXc value;      // omega(sigma)
  VectorXc sigma;      // solution of (I + Lambda-hat omega) sigma = rho
  double condition;
  double residual;
};

FiniteRepResult finite_boundary_rep(const MatrixXc& omega, const MatrixXc& lambda_hat,
                                    const VectorXc& rho, double max_condition = 1e12);
MatrixXc finite_boundary_rep_matrix(const MatrixXc& omega, const MatrixXc& lambda_hat);
// omega = pi (I - Lambda-hat pi)^{-1}
MatrixXc recover_weight_matrix(const MatrixXc& pi_hat, const MatrixXc& lambda_hat);

// n -> trace norm of (Lambda-hat pi-hat)^n rho
struct DecayCurve {
  std::vector<double> norms;
  cplx rho_delta;
};

DecayCurve lemma_decay_curve(const Functional& rho, int n_max,
                             const LambdaSequence& lam, double tolerance = 1e-10);
double trace_norm(const Functional& rho, const LambdaSequence& lam);
Functional lambda_pi_hat(const Functional& rho, const LambdaSequence& lam);

// Non-normal weight example: weight value on P_n and the partial mass
struct NonNormalRow {
  int n;
  double weight_on_pn;
  double partial_mass;        // int_{1/n}^{L} x^{-s} dx (diverges as n grows)
  double boundary_mass;       // int_{1/n}^{L} x^{-s} (1 - e^{-x}) dx (stays finite)
};

std::vector<NonNormalRow> nonnormal_weight_demo(double s, int n_max,
                                                double length = 20.0,
                                                int points_per_unit = 400);

}  // namespace cpflow
