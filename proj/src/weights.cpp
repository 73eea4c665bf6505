#include "cpflow/weights.hpp"

#include <algorithm>
#include <cmath>

#include "cpflow/numerics.hpp"

namespace cpflow {

namespace {

constexpr int kMinCheckpoint = 1024;

bool vanishes_at_zero(const FactorOp& op) {
  cplx at_zero = 0.0;
  for (const auto& m : op.mults()) {
    if (m.lo <= 0.0) at_zero += m.coef;
  }
  if (std::abs(at_zero) > 1e-14) return false;
  for (const auto& r : op.ranks()) {
    if (!(r.ket.lo() > 0.0) || !(r.bra.lo() > 0.0)) return false;
  }
  return true;
}

cplx head_part(const ProductVector& f, const ProductVector& g, int h,
               const LambdaSequence& lam) {
  const auto e = FactorOp::mult(1.0);
  cplx v = 1.0;
  for (int j = 1; j <= h; ++j) v *= e.matrix_element(f.factor(j, lam), g.factor(j, lam));
  return v;
}

}  // namespace

// ---------------------------------------------------------------- Functional

Functional Functional::vector_state(const ProductVector& f, cplx weight) {
  Functional rho;
  rho.add(weight, f, f);
  return rho;
}

Functional Functional::dense(std::shared_ptr<const ProductBasis> basis, MatrixXc density) {
  if (density.rows() != basis->dim() || density.cols() != basis->dim()) {
    throw InvalidArgument("density shape does not match basis");
  }
  Functional rho;
  rho.basis_ = std::move(basis);
  rho.density_ = std::move(density);
  return rho;
}

Functional& Functional::add(cplx weight, const ProductVector& f, const ProductVector& g) {
  ranks_.push_back({weight, f, g});
  return *this;
}

cplx Functional::operator()(const ElemTensor& x, const LambdaSequence& lam) const {
  cplx v = 0.0;
  if (basis_) v += (density_ * basis_->matrix(x)).trace();
  for (const auto& r : ranks_) v += r.weight * matrix_element(r.f, x, r.g, lam);
  return v;
}

cplx Functional::trace(const LambdaSequence& lam) const {
  return (*this)(ElemTensor::identity(), lam);
}

Functional Functional::as_rank_terms() const {
  Functional out;
  out.ranks_ = ranks_;
  if (basis_) {
    const int d = basis_->dim();
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) {
        // tr(D M) = sum_ab D_ab (w_b, . w_a)
        if (density_(a, b) != 0.0) out.add(density_(a, b), basis_->vector(b), basis_->vector(a));
      }
    }
  }
  return out;
}

Functional Functional::scaled(cplx s) const {
  auto out = *this;
  if (out.basis_) out.density_ *= s;
  for (auto& r : out.ranks_) r.weight *= s;
  return out;
}

Functional Functional::operator+(const Functional& o) const {
  Functional out = *this;
  if (o.basis_) {
    if (out.basis_ && out.basis_ != o.basis_) {
      out = out.as_rank_terms();
      auto other = o.as_rank_terms();
      out.ranks_.insert(out.ranks_.end(), other.ranks_.begin(), other.ranks_.end());
      return out;
    }
    if (out.basis_) {
      out.density_ += o.density_;
    } else {
      out.basis_ = o.basis_;
      out.density_ = o.density_;
    }
  }
  out.ranks_.insert(out.ranks_.end(), o.ranks_.begin(), o.ranks_.end());
  return out;
}

HFunctional HFunctional::vector_state(const HVector& f) {
  HFunctional nu;
  nu.add(1.0, f, f);
  return nu;
}

HFunctional& HFunctional::add(cplx weight, const HVector& f, const HVector& g) {
  ranks_.push_back({weight, f, g});
  return *this;
}

cplx HFunctional::operator()(const HOp& a, const LambdaSequence& lam) const {
  cplx v = 0.0;
  for (const auto& r : ranks_) v += r.weight * matrix_element(r.f, a, r.g, lam);
  return v;
}

cplx HFunctional::operator()(const HOperator& a, const LambdaSequence& lam) const {
  cplx v = 0.0;
  for (const auto& op : a) v += (*this)(op, lam);
  return v;
}

Functional HFunctional::contracted() const {
  Functional out;
  const auto e = FactorOp::mult(1.0);
  for (const auto& r : ranks_) {
    out.add(r.weight * e.matrix_element(r.f.l2, r.g.l2), r.f.k, r.g.k);
  }
  return out;
}

bool is_boundary_element(const HOp& a) { return vanishes_at_zero(a.l2); }

void require_boundary_element(const HOperator& a) {
  for (const auto& op : a) {
    if (!is_boundary_element(op)) {
      throw InvalidArgument(
          "not a boundary-algebra element: the L2 factor must vanish at x = 0");
    }
  }
}

// ----------------------------------------------------------- weight series

SeriesEvaluator::SeriesEvaluator(HOperator a, LambdaSequence lam, SeriesConfig cfg)
    : a_(std::move(a)), lam_(std::move(lam)), cfg_(cfg) {
  require_boundary_element(a_);
  for (const auto& op : a_) pi_a_.push_back(pi_apply(op));
}

cplx SeriesEvaluator::term_value(int n, int head, int oF, int oG) const {
  cplx v = 0.0;
  for (const auto& p : pi_a_) {
    v += p.coef * reference_tail(pi_lambda_power(p, n), head + 1, oF, oG, lam_);
  }
  return v;
}

SeriesResult SeriesEvaluator::scalar_series(cplx z, int head, int oF, int oG) const {
  const auto key = std::make_tuple(head, oF, oG, z.real(), z.imag());
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;

  SeriesResult out;
  std::vector<double> xs;
  std::vector<cplx> partial;
  cplx zpow = std::pow(z, head + 1);
  cplx sum = 0.0;
  double prev = -1.0;
  bool done = false;
  int count = 0;
  for (int n = head; count < cfg_.max_terms; ++n) {
    const cplx term = zpow * term_value(n, head, oF, oG);
    sum += term;
    ++count;
    zpow *= z;
    const double mag = std::abs(term);
    if (count >= 2 && mag <= 1e-3 * cfg_.tail_tolerance && (prev == 0.0 || mag <= 0.5 * prev)) {
      out.tail_bound = mag;
      done = true;
      break;
    }
    prev = mag;
    if (count >= kMinCheckpoint && (count & (count - 1)) == 0) {
      xs.push_back(1.0 / count);
      partial.push_back(sum);
      // positive majorant at A = I - Lambda: remainder of the telescoping sum
      const double cert =
          std::abs(zpow) *
          std::abs(reference_tail(pi_lambda_power(ElemTensor::identity(), n + 1), head + 1, oF, oG, lam_) -
                   reference_tail(ElemTensor::delta(), head + 1, oF, oG, lam_));
      if (cert < cfg_.tail_tolerance && mag < cfg_.tail_tolerance) {
        out.tail_bound = cert;
        done = true;
        break;
      }
    }
  }
  out.terms = count;
  if (done) {
    out.value = sum;
  } else {
    if (xs.size() < 3) {
      throw NonConvergence("weight series: max_terms too small to extrapolate",
                           std::abs(sum), std::abs(prev));
    }
    const std::size_t k = std::min<std::size_t>(4, xs.size());
    std::vector<double> xk(xs.end() - k, xs.end());
    std::vector<cplx> pk(partial.end() - k, partial.end());
    const auto ex = neville_at_zero(xk, pk);
    if (!(ex.error < cfg_.tail_tolerance)) {
      throw NonConvergence("weight series did not converge within max_terms",
                           std::abs(sum), ex.error);
    }
    out.value = ex.value;
    out.extrapolated = true;
    out.tail_bound = ex.error;
  }
  cache_.emplace(key, out);
  return out;
}

SeriesResult SeriesEvaluator::omega_z(cplx z, const Functional& rho) const {
  if (std::abs(z) > 1.0 + 1e-14) throw InvalidArgument("omega_z needs |z| <= 1");
  SeriesResult out;
  if (z == 0.0) return out;
  auto merge = [&out](const SeriesResult& s, cplx factor) {
    out.value += factor * s.value;
    out.terms = std::max(out.terms, s.terms);
    out.extrapolated = out.extrapolated || s.extrapolated;
    out.tail_bound += std::abs(factor) * s.tail_bound;
  };
  if (rho.has_dense()) {
    const auto& basis = rho.basis();
    const int h = basis.factors();
    cplx zpow = z;
    for (int n = 0; n < h; ++n) {
      MatrixXc m = MatrixXc::Zero(basis.dim(), basis.dim());
      for (const auto& p : pi_a_) m += basis.matrix(pi_lambda_power(p, n));
      out.value += zpow * (rho.density() * m).trace();
      zpow *= z;
    }
    const cplx hp =
        (rho.density() * basis.matrix(pi_lambda_power(ElemTensor::identity(), h))).trace();
    if (hp != 0.0) merge(scalar_series(z, h, 0, 0), hp);
  }
  for (const auto& r : rho.ranks()) {
    const int h = std::max(r.f.head_size(), r.g.head_size());
    cplx zpow = z;
    for (int n = 0; n < h; ++n) {
      cplx v = 0.0;
      for (const auto& p : pi_a_) v += matrix_element(r.f, pi_lambda_power(p, n), r.g, lam_);
      out.value += r.weight * zpow * v;
      zpow *= z;
    }
    const cplx hp = r.weight * head_part(r.f, r.g, h, lam_);
    if (hp != 0.0) merge(scalar_series(z, h, r.f.offset, r.g.offset), hp);
  }
  return out;
}

SeriesResult omega1(const Functional& rho, const HOperator& a,
                    const LambdaSequence& lam, const SeriesConfig& cfg) {
  return SeriesEvaluator(a, lam, cfg).omega_z(1.0, rho);
}

SeriesResult omega_z(cplx z, const Functional& rho, const HOperator& a,
                     const LambdaSequence& lam, const SeriesConfig& cfg) {
  if (std::abs(z) > 1.0 + 1e-14) throw InvalidArgument("omega_z needs |z| <= 1");
  return SeriesEvaluator(a, lam, cfg).omega_z(z, rho);
}

// ---------------------------------------------------------- boundary weight

BoundaryWeight BoundaryWeight::zero(LambdaSequence lam) { return BoundaryWeight(std::move(lam)); }

BoundaryWeight BoundaryWeight::from_nu(HFunctional nu, LambdaSequence lam,
                                       SeriesConfig cfg, double singular_margin) {
  BoundaryWeight xi(std::move(lam));
  if (nu.ranks().empty()) return xi;
  const HOp id{ElemTensor::identity(), FactorOp::identity()};
  const double total = nu(id, xi.lam_).real();
  if (total > 1.0 + 1e-12) throw InvalidArgument("xi from nu needs nu(I) <= 1");
  xi.nu_lambda_delta_ = nu(lambda_op(ElemTensor::delta()), xi.lam_);
  const cplx gap = 1.0 - xi.nu_lambda_delta_;
  if (std::abs(gap) < singular_margin) {
    throw PreconditionViolation("near-singular normalization: nu(Lambda(Delta)) ~ 1",
                                xi.nu_lambda_delta_.real());
  }
  xi.zero_ = false;
  xi.c_ = 1.0 / gap.real();
  xi.nu_prime_ = nu.contracted();
  xi.nu_ = std::move(nu);
  xi.cfg_ = cfg;
  return xi;
}

cplx BoundaryWeight::operator()(const HOperator& v) const {
  require_boundary_element(v);
  if (zero_) return 0.0;
  const cplx direct = nu_(v, lam_);
  const cplx series = SeriesEvaluator(v, lam_, cfg_).omega_z(1.0, nu_prime_).value;
  return c_ * (direct + series);
}

cplx evaluate_weight(const WeightSpec& spec, const Functional& rho,
                     const HOperator& a, const LambdaSequence& lam,
                     const SeriesConfig& cfg) {
  cplx v = SeriesEvaluator(a, lam, cfg).omega_z(spec.z, rho).value;
  if (spec.z == 1.0 && !spec.minimal()) {
    const cplx rd = rho(ElemTensor::delta(), lam);
    if (rd != 0.0) v += rd * (*spec.xi)(a);
  }
  return v;
}

cplx omega_full(const Functional& rho, const HOperator& a, const BoundaryWeight& xi,
                const LambdaSequence& lam, const SeriesConfig& cfg) {
  return evaluate_weight(WeightSpec{1.0, xi}, rho, a, lam, cfg);
}

TruncatedWeight::TruncatedWeight(WeightSpec spec, double t, LambdaSequence lam,
                                 SeriesConfig cfg)
    : spec_(std::move(spec)), t_(t), lam_(std::move(lam)), cfg_(cfg) {
  if (!(t > 0.0)) throw InvalidArgument("truncated weight needs t > 0");
}

cplx TruncatedWeight::operator()(const Functional& rho, const HOperator& a) const {
  HOperator cut;
  for (const auto& op : a) cut.push_back(compress_from(op, t_));
  return evaluate_weight(spec_, rho, cut, lam_, cfg_);
}

TruncatedWeight truncate_weight(const WeightSpec& spec, double t,
                                const LambdaSequence& lam, const SeriesConfig& cfg) {
  return TruncatedWeight(spec, t, lam, cfg);
}

// ------------------------------------------------- boundary representation

namespace {

constexpr int kMaxPower = 400;

// sums f(k) for k = 0, 1, ... until two consecutive terms are negligible
template <typename F>
cplx sum_powers(F&& f, int k_min) {
  cplx acc = 0.0;
  int quiet = 0;
  for (int k = 0; k < kMaxPower; ++k) {
    const cplx term = f(k);
    acc += term;
    const double scale = std::max(std::abs(acc), 1e-300);
    quiet = (std::abs(term) <= 1e-17 * scale) ? quiet + 1 : 0;
    if (k >= k_min && quiet >= 2) break;
  }
  return acc;
}

bool has_xi_part(const WeightSpec& spec) { return spec.z == 1.0 && !spec.minimal(); }

}  // namespace

BoundaryRep::BoundaryRep(WeightSpec spec, double t, LambdaSequence lam, SeriesConfig cfg)
    : spec_(std::move(spec)), t_(t), lam_(std::move(lam)), cfg_(cfg) {
  if (!(t > 0.0)) throw InvalidArgument("boundary representation needs t > 0");
  if (std::abs(spec_.z) > 1.0 + 1e-14) throw InvalidArgument("weight needs |z| <= 1");
  if (has_xi_part(spec_)) {
    beta_den_ = 1.0 + (*spec_.xi)(HOp{ElemTensor::delta_upto(t_), FactorOp::mult(1.0, t_, kInf)});
  }
}

ElemTensor BoundaryRep::power_term(const HOp& x, int k) const {
  const auto p = pi_apply(compress_from(x, t_));
  ElemTensor out;
  out.coef = p.coef;
  out.head.assign(k, FactorOp::mult(1.0, 0.0, t_));
  out.head.insert(out.head.end(), p.head.begin(), p.head.end());
  out.tail = p.tail.shifted(k);
  return out;
}

cplx BoundaryRep::beta(const HOp& x) const {
  if (!has_xi_part(spec_)) return 0.0;
  const auto& xi = *spec_.xi;
  const cplx direct = xi(compress_from(x, t_));
  const cplx feedback = sum_powers(
      [&](int k) { return xi(HOp{power_term(x, k), FactorOp::mult(1.0, t_, kInf)}); }, 8);
  return (direct - feedback) / beta_den_;
}

cplx BoundaryRep::apply(const Functional& rho, const HOp& x) const {
  int head = 0;
  if (rho.has_dense()) head = rho.basis().factors();
  for (const auto& r : rho.ranks()) head = std::max({head, r.f.head_size(), r.g.head_size()});
  const cplx z = spec_.z;
  cplx v = sum_powers(
      [&](int k) { return std::pow(z, k + 1) * rho(power_term(x, k), lam_); }, head + 2);
  if (has_xi_part(spec_)) v += beta(x) * rho(ElemTensor::delta_upto(t_), lam_);
  return v;
}

std::vector<ElemTensor> BoundaryRep::heisenberg(const HOp& x, int k_max) const {
  std::vector<ElemTensor> out;
  for (int k = 0; k <= k_max; ++k) out.push_back(power_term(x, k).scaled(std::pow(spec_.z, k + 1)));
  if (has_xi_part(spec_)) out.push_back(ElemTensor::delta_upto(t_).scaled(beta(x)));
  return out;
}

double BoundaryRep::residual(const Functional& rho, const HOp& x, int k_max) const {
  const auto y = heisenberg(x, k_max);
  cplx lhs = 0.0;
  HOperator lifted;
  for (const auto& term : y) {
    lhs += rho(term, lam_);
    lifted.push_back(lambda_from(term, t_));
  }
  lhs += evaluate_weight(spec_, rho, lifted, lam_, cfg_);
  const cplx rhs = evaluate_weight(spec_, rho, {compress_from(x, t_)}, lam_, cfg_);
  return std::abs(lhs - rhs);
}

// ------------------------------------------------------- bounded weight maps

FiniteRepResult finite_boundary_rep(const MatrixXc& omega, const MatrixXc& lambda_hat,
                                    const VectorXc& rho, double max_condition) {
  const Eigen::Index n = lambda_hat.rows();
  if (omega.cols() != n || lambda_hat.cols() != omega.rows() || rho.size() != n) {
    throw InvalidArgument("finite boundary representation: shape mismatch");
  }
  const MatrixXc system = MatrixXc::Identity(n, n) + lambda_hat * omega;
  Eigen::JacobiSVD<MatrixXc> svd(system);
  const auto& sv = svd.singularValues();
  const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : kInf;
  if (!(cond < max_condition)) {
    throw PreconditionViolation("non-invertible system (I + Lambda-hat omega)", cond);
  }
  FiniteRepResult out;
  out.sigma = system.partialPivLu().solve(rho);
  out.value = omega * out.sigma;
  out.condition = cond;
  out.residual = (system * out.sigma - rho).norm();
  return out;
}

MatrixXc finite_boundary_rep_matrix(const MatrixXc& omega, const MatrixXc& lambda_hat) {
  const Eigen::Index n = lambda_hat.rows();
  const MatrixXc system = MatrixXc::Identity(n, n) + lambda_hat * omega;
  return omega * system.partialPivLu().inverse();
}

MatrixXc recover_weight_matrix(const MatrixXc& pi_hat, const MatrixXc& lambda_hat) {
  const Eigen::Index n = lambda_hat.rows();
  const MatrixXc system = MatrixXc::Identity(n, n) - lambda_hat * pi_hat;
  return pi_hat * system.partialPivLu().inverse();
}

// ------------------------------------------------------------- decay curve

Functional lambda_pi_hat(const Functional& rho, const LambdaSequence& lam) {
  const auto src = rho.has_dense() ? rho.as_rank_terms() : rho;
  const auto e = FactorOp::mult(1.0);
  Functional out;
  for (const auto& r : src.ranks()) {
    const cplx w = r.weight * e.matrix_element(r.f.factor(1, lam), r.g.factor(1, lam));
    out.add(w, r.f.dropped_front(1, lam), r.g.dropped_front(1, lam));
  }
  return out;
}

double trace_norm(const Functional& rho, const LambdaSequence& lam) {
  if (rho.has_dense() && rho.ranks().empty()) {
    Eigen::JacobiSVD<MatrixXc> svd(rho.density());
    return svd.singularValues().sum();
  }
  const auto src = rho.has_dense() ? rho.as_rank_terms() : rho;
  const auto& terms = src.ranks();
  const int r = static_cast<int>(terms.size());
  if (r == 0) return 0.0;
  // density T = sum_i w_i |g_i><f_i| = U C U^*, U over distinct vectors so that
  // exact cancellations stay exact
  std::vector<const ProductVector*> u;
  auto index_of = [&u](const ProductVector& v) {
    for (std::size_t k = 0; k < u.size(); ++k) {
      if (*u[k] == v) return static_cast<int>(k);
    }
    u.push_back(&v);
    return static_cast<int>(u.size()) - 1;
  };
  std::vector<std::pair<int, int>> slots;
  for (const auto& t : terms) {
    const int gi = index_of(t.g);
    slots.push_back({gi, index_of(t.f)});
  }
  const int n = static_cast<int>(u.size());
  MatrixXc gram(n, n);
  for (int p = 0; p < n; ++p) {
    for (int q = p; q < n; ++q) {
      gram(p, q) = inner_product(*u[p], *u[q], lam);
      gram(q, p) = std::conj(gram(p, q));
    }
  }
  MatrixXc c = MatrixXc::Zero(n, n);
  for (int i = 0; i < r; ++i) c(slots[i].first, slots[i].second) += terms[i].weight;
  const MatrixXc s = psd_sqrt(gram);
  Eigen::JacobiSVD<MatrixXc> svd(s * c * s);
  return svd.singularValues().sum();
}

DecayCurve lemma_decay_curve(const Functional& rho, int n_max,
                             const LambdaSequence& lam, double tolerance) {
  DecayCurve out;
  out.rho_delta = rho(ElemTensor::delta(), lam);
  if (std::abs(out.rho_delta) > tolerance) {
    throw PreconditionViolation("decay curve needs rho(Delta) = 0", std::abs(out.rho_delta));
  }
  auto current = rho.has_dense() ? rho.as_rank_terms() : rho;
  for (int n = 0; n <= n_max; ++n) {
    out.norms.push_back(trace_norm(current, lam));
    current = lambda_pi_hat(current, lam);
  }
  return out;
}

// --------------------------------------------------------- non-normal demo

std::vector<NonNormalRow> nonnormal_weight_demo(double s, int n_max, double length,
                                                int points_per_unit) {
  if (!(s > 1.0 && s < 2.0)) throw InvalidArgument("demo needs s in (1, 2)");
  if (n_max < 1) throw InvalidArgument("demo needs n_max >= 1");
  std::vector<NonNormalRow> rows;
  for (int n = 1; n <= n_max; ++n) {
    const double a = 1.0 / n;
    const int cells = static_cast<int>(std::ceil((length - a) * points_per_unit));
    const double h = (length - a) / cells;
    Eigen::VectorXd x(cells), hx(cells), g(cells);
    for (int i = 0; i < cells; ++i) {
      x(i) = a + (i + 0.5) * h;
      hx(i) = std::pow(x(i), -0.5 * s);
      g(i) = std::exp(-x(i)) * std::sin(3.0 * x(i)) + std::exp(-0.5 * x(i));
    }
    // M_n: orthogonal complement of x^{-s/2} on [1/n, L]
    g -= (hx.dot(g) / hx.dot(hx)) * hx;
    g /= std::sqrt(h * g.dot(g));
    const double moment = h * hx.dot(g);
    NonNormalRow row;
    row.n = n;
    row.weight_on_pn = moment * moment;
    row.partial_mass = h * hx.squaredNorm();
    row.boundary_mass = h * (hx.array().square() * (1.0 - (-x.array()).exp())).sum();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace cpflow
