#include "cpflow/cornercheck.hpp"

#include <algorithm>
#include <cmath>
#include <unsupported/Eigen/KroneckerProduct>

namespace cpflow {

CpVerdict cp_verdict(const MatrixXc& choi, double tol) {
  if (choi.rows() != choi.cols()) throw InvalidArgument("choi: matrix is not square");
  const MatrixXc h = 0.5 * (choi + choi.adjoint());
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(h, Eigen::EigenvaluesOnly);
  CpVerdict v;
  v.min_eig = es.eigenvalues().minCoeff();
  v.max_eig = es.eigenvalues().maxCoeff();
  v.trace = h.trace().real();
  v.threshold = -tol * std::max(1.0, std::abs(v.trace));
  v.cp = v.min_eig >= v.threshold;
  return v;
}

// ------------------------------------------------------------ BoundaryChoi

namespace {

constexpr int kMaxPowers = 200;

}  // namespace

BoundaryChoi::BoundaryChoi(const CornerModel& model, double t)
    : model_(model),
      t_(t),
      kbasis_(std::make_shared<ProductBasis>(model.lambda, model.factors, model.factor_dim)),
      l2basis_(model.l2_rate, model.l2_dim) {
  if (!(t > 0.0)) throw InvalidArgument("corner check needs t > 0");
  const auto& lam = model_.lambda;
  dout_ = kbasis_->dim();
  din_ = dout_ * l2basis_.size();

  std::vector<ProductVector> w;
  for (int c = 0; c < dout_; ++c) w.push_back(kbasis_->vector(c));
  std::vector<ProductVector> fed;
  for (int a = 0; a < din_; ++a) {
    const int ak = a / l2basis_.size();
    const int a0 = a % l2basis_.size();
    fed.push_back(s0_apply(HVector{w[ak], l2basis_[a0].windowed(t_, kInf)}));
  }

  const auto edge = FactorOp::mult(1.0, 0.0, t_);
  MatrixXc mu = MatrixXc::Ones(dout_, dout_);
  double first = 0.0;
  for (int k = 0; k < kMaxPowers; ++k) {
    if (k > 0) {
      for (int c = 0; c < dout_; ++c) {
        for (int d = 0; d < dout_; ++d) {
          mu(c, d) *= edge.matrix_element(w[c].factor(k, lam), w[d].factor(k, lam));
        }
      }
    }
    MatrixXc alpha(dout_, din_);
    for (int c = 0; c < dout_; ++c) {
      const auto shifted = w[c].dropped_front(k, lam);
      for (int a = 0; a < din_; ++a) alpha(c, a) = inner_product(shifted, fed[a], lam);
    }
    const double size = alpha.cwiseAbs2().maxCoeff() * mu.cwiseAbs().maxCoeff();
    mu_.push_back(mu);
    alpha_.push_back(std::move(alpha));
    if (k == 0) first = std::max(size, 1e-300);
    if (k >= 2 && size <= 1e-18 * first) break;
  }

  delta_t_.resize(dout_, dout_);
  const auto dt = ElemTensor::delta_upto(t_);
  for (int c = 0; c < dout_; ++c) {
    for (int d = 0; d < dout_; ++d) delta_t_(c, d) = matrix_element(w[c], dt, w[d], lam);
  }
}

MatrixXc BoundaryChoi::minimal(cplx z) const {
  MatrixXc out = MatrixXc::Zero(din_ * dout_, din_ * dout_);
  cplx zk = z;
  for (std::size_t k = 0; k < alpha_.size(); ++k, zk *= z) {
    const auto& al = alpha_[k];
    const auto& mu = mu_[k];
    for (int a = 0; a < din_; ++a) {
      for (int b = 0; b < din_; ++b) {
        out.block(a * dout_, b * dout_, dout_, dout_).array() +=
            zk * mu.array() * (al.col(a) * al.col(b).adjoint()).array();
      }
    }
  }
  return out;
}

HOp BoundaryChoi::input_unit(int a, int b) const {
  const int m0 = l2basis_.size();
  const auto& lam = model_.lambda;
  return {ElemTensor::rank_one(kbasis_->vector(a / m0), kbasis_->vector(b / m0), lam),
          FactorOp::rank_one(l2basis_[a % m0], l2basis_[b % m0])};
}

MatrixXc BoundaryChoi::beta_matrix(const BoundaryWeight& xi) const {
  MatrixXc beta = MatrixXc::Zero(din_, din_);
  if (xi.is_zero()) return beta;
  const BoundaryRep rep(WeightSpec{1.0, xi}, t_, model_.lambda, model_.series);
  for (int a = 0; a < din_; ++a) {
    for (int b = 0; b < din_; ++b) beta(a, b) = rep.beta(input_unit(a, b));
  }
  return beta;
}

MatrixXc BoundaryChoi::boundary(const BoundaryWeight& xi) const {
  return Eigen::kroneckerProduct(beta_matrix(xi), delta_t_).eval();
}

cplx BoundaryChoi::entry(const WeightSpec& spec, int a, int b, int c, int d) const {
  const BoundaryRep rep(spec, t_, model_.lambda, model_.series);
  Functional rho;
  rho.add(1.0, kbasis_->vector(c), kbasis_->vector(d));
  return rep.apply(rho, input_unit(a, b));
}

// ------------------------------------------------------------ verdicts

SubordinationVerdict subordination_check(const MatrixXc& choi_a, const MatrixXc& choi_b,
                                         double t, double tol) {
  if (choi_a.rows() != choi_b.rows() || choi_a.cols() != choi_b.cols()) {
    throw InvalidArgument("subordination: Choi shapes differ");
  }
  const auto va = cp_verdict(choi_a, tol);
  if (!va.cp) throw PreconditionViolation("subordination: first map is not CP", va.min_eig);
  const auto vb = cp_verdict(choi_b, tol);
  if (!vb.cp) throw PreconditionViolation("subordination: second map is not CP", vb.min_eig);
  const auto diff = cp_verdict(choi_a - choi_b, tol);
  return {t, diff, diff.cp};
}

MatrixXc corner_choi(const MatrixXc& c11, const MatrixXc& c12, const MatrixXc& c21,
                     const MatrixXc& c22) {
  const Eigen::Index n = c11.rows();
  MatrixXc out(2 * n, 2 * n);
  out << c11, c12, c21, c22;
  return out;
}

HypermaxReport hypermax_witness(cplx z, const BoundaryWeight& xi, const CornerModel& model,
                                const std::vector<double>& ts, double tol) {
  if (std::abs(z - 1.0) <= 1e-12) {
    throw DegenerateDirection(
        "z = 1: the corner admits an extra boundary weight xi'; no hypermaximality witness");
  }
  if (std::abs(std::abs(z) - 1.0) > 1e-12) throw InvalidArgument("hypermax witness needs |z| = 1");
  if (!xi.is_zero()) {
    const double unit = xi(one_minus_lambda()).real();
    if (std::abs(unit - 1.0) > 1e-8) throw InvalidArgument("hypermax witness needs a unital xi");
  }
  HypermaxReport rep;
  rep.z = z;
  rep.degenerate = xi.is_zero();
  rep.q_positive = rep.ordered = rep.gap = true;
  for (double t : ts) {
    const BoundaryChoi bc(model, t);
    const MatrixXc m1 = bc.minimal(1.0);
    const MatrixXc mz = bc.minimal(z);
    const MatrixXc mzb = bc.minimal(std::conj(z));
    const MatrixXc r = xi.is_zero() ? MatrixXc::Zero(m1.rows(), m1.cols()) : bc.boundary(xi);
    const MatrixXc zero = MatrixXc::Zero(m1.rows(), m1.cols());

    HypermaxPoint p;
    p.t = t;
    p.minimal_corner = cp_verdict(corner_choi(m1, mz, mzb, m1), tol);
    p.difference = cp_verdict(corner_choi(r, zero, zero, r), tol);
    p.gap = p.difference.max_eig;
    p.ordered = p.difference.cp;
    p.gap_ok = p.gap > tol * std::max(1.0, std::abs(p.difference.trace));
    rep.q_positive = rep.q_positive && p.minimal_corner.cp;
    rep.ordered = rep.ordered && p.ordered;
    rep.gap = rep.gap && p.gap_ok;
    rep.points.push_back(p);
  }
  return rep;
}

double offdiagonal_xi_probe(const BoundaryChoi& bc, cplx z, const BoundaryWeight& xi,
                            cplx s) {
  const MatrixXc m1 = bc.minimal(1.0);
  const MatrixXc r = bc.boundary(xi);
  const MatrixXc c = corner_choi(m1, bc.minimal(z) + s * r,
                                 bc.minimal(std::conj(z)) + std::conj(s) * r, m1);
  return min_eigenvalue_hermitian(c);
}

}  // namespace cpflow
