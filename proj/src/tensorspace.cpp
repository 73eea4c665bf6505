#include "cpflow/tensorspace.hpp"

#include <algorithm>
#include <cmath>
#include <unsupported/Eigen/KroneckerProduct>

namespace cpflow {

namespace {

ExpKernelVector reference_vector(int index, const LambdaSequence& lam) {
  const double l = lam.value(index);
  if (!std::isfinite(l)) throw Unsupported("reference vector beyond floating range");
  return ExpKernelVector::reference(l);
}

FactorOp tail_op(const TailRule& rule, int j, const LambdaSequence& lam) {
  switch (rule.kind) {
    case TailKind::Identity: return FactorOp::identity();
    case TailKind::Mult: return FactorOp::mult(rule.p, rule.lo, rule.hi);
    case TailKind::RefRank: {
      if (j - rule.ket_shift < 1 || j - rule.bra_shift < 1) {
        throw InvalidArgument("rank tail used below its first position");
      }
      return FactorOp::rank_one(reference_vector(j - rule.ket_shift, lam),
                                reference_vector(j - rule.bra_shift, lam));
    }
  }
  return {};
}

}  // namespace

ExpKernelVector ProductVector::factor(int j, const LambdaSequence& lam) const {
  if (j <= head_size()) return head[j - 1];
  return reference_vector(j + offset, lam);
}

ProductVector ProductVector::dropped_front(int n, const LambdaSequence& lam) const {
  ProductVector out;
  out.offset = offset + n;
  for (int j = n + 1; j <= head_size(); ++j) out.head.push_back(head[j - 1]);
  (void)lam;
  return out;
}

ProductVector ProductVector::scaled(cplx s) const {
  auto out = *this;
  if (out.head.empty()) {
    throw Unsupported("scaling a pure reference vector; give it a head factor");
  }
  out.head[0] = out.head[0].scaled(s);
  return out;
}

cplx inner_product(const ProductVector& f, const ProductVector& g,
                   const LambdaSequence& lam) {
  return matrix_element(f, ElemTensor::identity(), g, lam);
}

// ---------------------------------------------------------------- ElemTensor

ElemTensor ElemTensor::rank_one(const ProductVector& f, const ProductVector& g,
                                const LambdaSequence& lam, cplx coef) {
  ElemTensor x;
  x.coef = coef;
  const int n = std::max({f.head_size(), g.head_size(), -f.offset, -g.offset, 0});
  for (int j = 1; j <= n; ++j) {
    x.head.push_back(FactorOp::rank_one(f.factor(j, lam), g.factor(j, lam)));
  }
  x.tail = TailRule::ref_rank(-f.offset, -g.offset);
  return x;
}

FactorOp ElemTensor::factor(int j, const LambdaSequence& lam) const {
  if (j <= lead) return FactorOp::mult(1.0);
  if (j <= extent()) return head[j - lead - 1];
  return tail_op(tail, j, lam);
}

ElemTensor ElemTensor::adjoint() const {
  auto out = *this;
  out.coef = std::conj(coef);
  for (auto& h : out.head) h = h.adjoint();
  if (tail.kind == TailKind::RefRank) std::swap(out.tail.ket_shift, out.tail.bra_shift);
  return out;
}

ElemTensor ElemTensor::scaled(cplx s) const {
  auto out = *this;
  out.coef *= s;
  return out;
}

ElemTensor ElemTensor::expanded(int n, const LambdaSequence& lam) const {
  ElemTensor out;
  out.coef = coef;
  out.tail = tail;
  const int upto = std::max(n, extent());
  for (int j = 1; j <= upto; ++j) out.head.push_back(factor(j, lam));
  return out;
}

ElemTensor operator*(const ElemTensor& a, const ElemTensor& b) {
  TailRule tail;
  if (a.tail.kind == TailKind::Identity) {
    tail = b.tail;
  } else if (b.tail.kind == TailKind::Identity) {
    tail = a.tail;
  } else if (a.tail.kind == TailKind::Mult && b.tail.kind == TailKind::Mult) {
    tail = TailRule::mult(a.tail.p + b.tail.p, std::max(a.tail.lo, b.tail.lo),
                          std::min(a.tail.hi, b.tail.hi));
  } else {
    throw Unsupported("product of these tail rules is not an elementary tensor");
  }
  // lead factors multiply to e^{-2x}, so everything is written out
  const int n = std::max(a.extent(), b.extent());
  ElemTensor out;
  out.coef = a.coef * b.coef;
  out.tail = tail;
  // the expansion never needs reference vectors for Identity/Mult tails
  const auto lam = LambdaSequence::linear();
  for (int j = 1; j <= n; ++j) out.head.push_back(a.factor(j, lam) * b.factor(j, lam));
  return out;
}

cplx reference_tail(const ElemTensor& x, int from, int oF, int oG,
                    const LambdaSequence& lam) {
  cplx val = 1.0;
  int j = from;
  if (j <= x.lead) {
    val *= lam.partial_product(TailRule::mult(1.0), j, x.lead, oF, oG);
    j = x.lead + 1;
  }
  for (; j <= x.extent() && val != 0.0; ++j) {
    const auto& op = x.head[j - x.lead - 1];
    val *= op.matrix_element(reference_vector(j + oF, lam), reference_vector(j + oG, lam));
  }
  if (val == 0.0) return 0.0;
  if (j < x.tail.first_valid_position()) {
    throw InvalidArgument("tensor tail starts before its first valid position");
  }
  return val * lam.tail_product(x.tail, j, oF, oG);
}

cplx matrix_element(const ProductVector& f, const ElemTensor& x,
                    const ProductVector& g, const LambdaSequence& lam) {
  const int h = std::max(f.head_size(), g.head_size());
  cplx val = x.coef;
  for (int j = 1; j <= h && val != 0.0; ++j) {
    val *= x.factor(j, lam).matrix_element(f.factor(j, lam), g.factor(j, lam));
  }
  if (val == 0.0) return 0.0;
  return val * reference_tail(x, h + 1, f.offset, g.offset, lam);
}

// --------------------------------------------------------------------- H

cplx inner_product(const HVector& f, const HVector& g, const LambdaSequence& lam) {
  return inner_product(f.k, g.k, lam) * inner_product(f.l2, g.l2);
}

cplx matrix_element(const HVector& f, const HOp& a, const HVector& g,
                    const LambdaSequence& lam) {
  const cplx l2 = a.l2.matrix_element(f.l2, g.l2);
  if (l2 == 0.0) return 0.0;
  return l2 * matrix_element(f.k, a.k, g.k, lam);
}

ProductVector s0_apply(const HVector& v) {
  ProductVector out;
  out.head.reserve(v.k.head.size() + 1);
  out.head.push_back(v.l2);
  out.head.insert(out.head.end(), v.k.head.begin(), v.k.head.end());
  out.offset = v.k.offset - 1;
  return out;
}

HVector s0_adjoint(const ProductVector& f, const LambdaSequence& lam) {
  HVector out;
  out.l2 = f.factor(1, lam);
  out.k = f.dropped_front(1, lam);
  return out;
}

TruncatedShift s0_apply_truncated(const HVector& v, int n_factors,
                                  const LambdaSequence& lam) {
  if (v.k.offset != 0) throw InvalidArgument("truncated shift expects a reference tail");
  ProductVector out;
  out.head.push_back(v.l2);
  for (int j = 1; j < n_factors; ++j) out.head.push_back(v.k.factor(j, lam));
  const auto fn = v.k.factor(n_factors, lam);
  const double fidelity = std::abs(inner_product(fn, reference_vector(n_factors, lam)));
  return {out, fidelity};
}

ElemTensor pi_apply(const HOp& a) {
  ElemTensor out;
  out.coef = a.k.coef;
  out.head.reserve(a.k.extent() + 1);
  out.head.push_back(a.l2);
  for (int j = 1; j <= a.k.lead; ++j) out.head.push_back(FactorOp::mult(1.0));
  out.head.insert(out.head.end(), a.k.head.begin(), a.k.head.end());
  out.tail = a.k.tail.shifted(1);
  return out;
}

ElemTensor pi_lambda_power(const ElemTensor& a, int n) {
  if (n < 0) throw InvalidArgument("negative power");
  auto out = a;
  out.lead += n;
  out.tail = a.tail.shifted(n);
  return out;
}

DeltaCurve delta_pairing(const ProductVector& f, const ProductVector& g,
                         int n_max, const LambdaSequence& lam) {
  DeltaCurve out;
  for (int n = 0; n <= n_max; ++n) {
    out.curve.push_back(matrix_element(f, pi_lambda_power(ElemTensor::identity(), n), g, lam));
  }
  out.limit = matrix_element(f, ElemTensor::delta(), g, lam);
  out.tail_estimate = lam.tail_product(TailRule::mult(1.0), n_max + 1, 0, 0);
  out.monotone = true;
  for (std::size_t i = 1; i < out.curve.size(); ++i) {
    if (out.curve[i].real() > out.curve[i - 1].real() * (1.0 + 1e-14)) out.monotone = false;
  }
  return out;
}

// ------------------------------------------------------------------ bases

FactorBasis::FactorBasis(double base_rate, int m) {
  if (m < 1) throw InvalidArgument("basis size must be positive");
  Eigen::MatrixXd gram(m, m);
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < m; ++k) gram(i, k) = 1.0 / (2.0 * base_rate + i + k);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) throw InvalidArgument("basis Gram matrix not positive");
  // phi = e L^{-T}
  const Eigen::MatrixXd inv_lt =
      llt.matrixU().solve(Eigen::MatrixXd::Identity(m, m));
  for (int k = 0; k < m; ++k) {
    std::vector<ExpTerm> terms;
    for (int i = 0; i <= k; ++i) terms.push_back({inv_lt(i, k), base_rate + i});
    functions_.emplace_back(std::move(terms));
  }
}

MatrixXc FactorBasis::matrix(const FactorOp& a) const {
  const int m = size();
  MatrixXc out(m, m);
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < m; ++k) out(i, k) = a.matrix_element(functions_[i], functions_[k]);
  }
  return out;
}

ProductBasis::ProductBasis(LambdaSequence lam, int n_factors, int m)
    : lam_(std::move(lam)), n_(n_factors), m_(m), dim_(1) {
  if (n_factors < 1 || m < 1) throw InvalidArgument("basis needs N >= 1 and m >= 1");
  for (int j = 1; j <= n_; ++j) {
    const double l = lam_.value(j);
    bases_.emplace_back(0.5 * l * l, m_);
    dim_ *= m_;
  }
}

std::vector<int> ProductBasis::digits(int index) const {
  std::vector<int> d(n_);
  for (int j = n_ - 1; j >= 0; --j) {
    d[j] = index % m_;
    index /= m_;
  }
  return d;
}

ProductVector ProductBasis::vector(int index) const {
  ProductVector v;
  const auto d = digits(index);
  for (int j = 0; j < n_; ++j) v.head.push_back(bases_[j][d[j]]);
  return v;
}

MatrixXc ProductBasis::matrix(const ElemTensor& x) const {
  MatrixXc out = MatrixXc::Constant(1, 1, x.coef);
  for (int j = 1; j <= n_; ++j) {
    const MatrixXc mj = bases_[j - 1].matrix(x.factor(j, lam_));
    MatrixXc next = Eigen::kroneckerProduct(out, mj);
    out.swap(next);
  }
  return out * reference_tail(x, n_ + 1, 0, 0, lam_);
}

}  // namespace cpflow
