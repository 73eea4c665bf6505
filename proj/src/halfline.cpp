#include "cpflow/halfline.hpp"

#include <algorithm>
#include <cmath>

namespace cpflow {

ExpKernelVector::ExpKernelVector(std::vector<ExpTerm> terms, double lo,
                                 double hi)
    : terms_(std::move(terms)), lo_(std::max(lo, 0.0)), hi_(hi) {
  validate();
}

void ExpKernelVector::validate() const {
  if (std::isinf(hi_)) {
    for (const auto& t : terms_) {
      if (!(t.rate.real() > 0.0)) {
        throw InvalidArgument("invalid vector: rate with non-positive real part");
      }
    }
  }
}

ExpKernelVector ExpKernelVector::exponential(cplx rate, cplx coef) {
  return ExpKernelVector({{coef, rate}});
}

ExpKernelVector ExpKernelVector::reference(double lambda) {
  return ExpKernelVector({{lambda, 0.5 * lambda * lambda}});
}

cplx ExpKernelVector::operator()(double x) const {
  if (x < lo_ || x >= hi_) return 0.0;
  cplx s = 0.0;
  for (const auto& t : terms_) s += t.coef * std::exp(-t.rate * x);
  return s;
}

ExpKernelVector ExpKernelVector::damped(cplx p) const {
  auto out = *this;
  for (auto& t : out.terms_) t.rate += p;
  out.validate();
  return out;
}

ExpKernelVector ExpKernelVector::windowed(double a, double b) const {
  auto out = *this;
  out.lo_ = std::max(lo_, a);
  out.hi_ = std::min(hi_, b);
  return out;
}

ExpKernelVector ExpKernelVector::translated(double t) const {
  auto out = *this;
  for (auto& term : out.terms_) term.coef *= std::exp(term.rate * t);
  out.lo_ = lo_ + t;
  out.hi_ = hi_ + t;
  return out;
}

ExpKernelVector ExpKernelVector::translated_back(double t) const {
  auto out = *this;
  for (auto& term : out.terms_) term.coef *= std::exp(-term.rate * t);
  out.lo_ = std::max(lo_ - t, 0.0);
  out.hi_ = hi_ - t;
  return out;
}

ExpKernelVector ExpKernelVector::scaled(cplx s) const {
  auto out = *this;
  for (auto& t : out.terms_) t.coef *= s;
  return out;
}

ExpKernelVector ExpKernelVector::operator+(const ExpKernelVector& o) const {
  if (empty()) return o;
  if (o.empty()) return *this;
  if (lo_ != o.lo_ || hi_ != o.hi_) {
    throw InvalidArgument("sum of exponential vectors with different windows");
  }
  auto out = *this;
  out.terms_.insert(out.terms_.end(), o.terms_.begin(), o.terms_.end());
  return out;
}

cplx exp_integral(cplx s, double a, double b) {
  if (!(b > a)) return 0.0;
  if (std::isinf(b)) return std::exp(-s * a) / s;
  const cplx w = s * (b - a);
  if (std::abs(w) < 1e-6) {
    // (1 - e^{-w}) / s with the series 1 - w/2 + w^2/6
    return std::exp(-s * a) * (b - a) * (1.0 - w / 2.0 + w * w / 6.0);
  }
  return (std::exp(-s * a) - std::exp(-s * b)) / s;
}

cplx inner_product(const ExpKernelVector& f, const ExpKernelVector& g) {
  const double a = std::max(f.lo(), g.lo());
  const double b = std::min(f.hi(), g.hi());
  if (!(b > a)) return 0.0;
  cplx sum = 0.0;
  for (const auto& u : f.terms()) {
    for (const auto& v : g.terms()) {
      sum += std::conj(u.coef) * v.coef * exp_integral(std::conj(u.rate) + v.rate, a, b);
    }
  }
  return sum;
}

double norm(const ExpKernelVector& f) {
  return std::sqrt(std::max(0.0, inner_product(f, f).real()));
}

// ------------------------------------------------------------------ FactorOp

FactorOp FactorOp::identity() { return mult(0.0); }

FactorOp FactorOp::mult(double p, double lo, double hi, cplx coef) {
  FactorOp op;
  if (hi > lo) op.mults_.push_back({coef, p, std::max(lo, 0.0), hi});
  return op;
}

FactorOp FactorOp::rank_one(const ExpKernelVector& ket,
                            const ExpKernelVector& bra, cplx coef) {
  FactorOp op;
  op.ranks_.push_back({coef, ket, bra});
  return op;
}

cplx FactorOp::matrix_element(const ExpKernelVector& f,
                              const ExpKernelVector& g) const {
  cplx sum = 0.0;
  for (const auto& m : mults_) {
    sum += m.coef * inner_product(f, g.damped(m.p).windowed(m.lo, m.hi));
  }
  for (const auto& r : ranks_) {
    sum += r.coef * inner_product(f, r.ket) * inner_product(r.bra, g);
  }
  return sum;
}

ExpKernelVector FactorOp::apply(const ExpKernelVector& g) const {
  if (!mults_.empty() && !ranks_.empty()) {
    throw Unsupported("apply: mixed multiplication and rank-one terms");
  }
  ExpKernelVector out;
  for (const auto& m : mults_) {
    auto piece = g.damped(m.p).windowed(m.lo, m.hi).scaled(m.coef);
    out = out + piece;
  }
  for (const auto& r : ranks_) {
    out = out + r.ket.scaled(r.coef * inner_product(r.bra, g));
  }
  return out;
}

FactorOp FactorOp::adjoint() const {
  FactorOp out;
  for (const auto& m : mults_) out.mults_.push_back({std::conj(m.coef), m.p, m.lo, m.hi});
  for (const auto& r : ranks_) out.ranks_.push_back({std::conj(r.coef), r.bra, r.ket});
  return out;
}

FactorOp FactorOp::compressed(double a, double b) const {
  FactorOp out;
  for (const auto& m : mults_) {
    const double lo = std::max(m.lo, a);
    const double hi = std::min(m.hi, b);
    if (hi > lo) out.mults_.push_back({m.coef, m.p, lo, hi});
  }
  for (const auto& r : ranks_) {
    out.ranks_.push_back({r.coef, r.ket.windowed(a, b), r.bra.windowed(a, b)});
  }
  return out;
}

FactorOp FactorOp::translated(double t) const {
  FactorOp out;
  for (const auto& m : mults_) {
    out.mults_.push_back({m.coef * std::exp(m.p * t), m.p, m.lo + t, m.hi + t});
  }
  for (const auto& r : ranks_) {
    out.ranks_.push_back({r.coef, r.ket.translated(t), r.bra.translated(t)});
  }
  return out;
}

FactorOp FactorOp::operator+(const FactorOp& o) const {
  auto out = *this;
  out.mults_.insert(out.mults_.end(), o.mults_.begin(), o.mults_.end());
  out.ranks_.insert(out.ranks_.end(), o.ranks_.begin(), o.ranks_.end());
  return out;
}

FactorOp FactorOp::operator-(const FactorOp& o) const { return *this + o.scaled(-1.0); }

FactorOp FactorOp::scaled(cplx s) const {
  auto out = *this;
  for (auto& m : out.mults_) m.coef *= s;
  for (auto& r : out.ranks_) r.coef *= s;
  return out;
}

FactorOp FactorOp::operator*(const FactorOp& o) const {
  FactorOp out;
  for (const auto& m : mults_) {
    for (const auto& n : o.mults_) {
      const double lo = std::max(m.lo, n.lo);
      const double hi = std::min(m.hi, n.hi);
      if (hi > lo) out.mults_.push_back({m.coef * n.coef, m.p + n.p, lo, hi});
    }
    for (const auto& r : o.ranks_) {
      out.ranks_.push_back({m.coef * r.coef, r.ket.damped(m.p).windowed(m.lo, m.hi), r.bra});
    }
  }
  for (const auto& r : ranks_) {
    for (const auto& n : o.mults_) {
      // <bra| M = (M^* bra)^*, and M is real-multiplicative
      out.ranks_.push_back(
          {r.coef * std::conj(std::conj(n.coef)), r.ket, r.bra.damped(n.p).windowed(n.lo, n.hi)});
    }
    for (const auto& s : o.ranks_) {
      out.ranks_.push_back({r.coef * s.coef * inner_product(r.bra, s.ket), r.ket, s.bra});
    }
  }
  return out;
}

// ---------------------------------------------------------------------- Gamma

GammaImage apply_gamma(const FactorOp& a) { return GammaImage(a); }

cplx GammaImage::matrix_element(const ExpKernelVector& f,
                                const ExpKernelVector& g) const {
  if (f.lo() != 0.0 || g.lo() != 0.0 || !std::isinf(f.hi()) || !std::isinf(g.hi())) {
    throw Unsupported("Gamma matrix elements need unwindowed exponential vectors");
  }
  cplx sum = 0.0;
  for (const auto& u : f.terms()) {
    for (const auto& v : g.terms()) {
      const auto eu = ExpKernelVector::exponential(u.rate);
      const auto ev = ExpKernelVector::exponential(v.rate);
      sum += std::conj(u.coef) * v.coef * a_.matrix_element(eu, ev) /
             (1.0 + std::conj(u.rate) + v.rate);
    }
  }
  return sum;
}

ExpKernelVector q0_kernel() { return ExpKernelVector::exponential(0.5); }

// ----------------------------------------------------------------------- grid

GridVector GridVector::sample(const ExpKernelVector& f, const Grid& grid) {
  GridVector v{grid, VectorXc(grid.points)};
  for (int i = 0; i < grid.points; ++i) v.values(i) = f(grid.midpoint(i));
  return v;
}

double GridVector::norm2() const { return grid.spacing() * values.squaredNorm(); }

cplx inner_product(const GridVector& f, const GridVector& g) {
  if (f.grid.points != g.grid.points || f.grid.length != g.grid.length) {
    throw InvalidArgument("grid mismatch");
  }
  return f.grid.spacing() * f.values.dot(g.values);
}

SnapReport snap_time(const Grid& grid, double t) {
  if (t < 0.0) throw InvalidArgument("negative time");
  const double h = grid.spacing();
  const int cells = static_cast<int>(std::llround(t / h));
  return {cells, cells * h, std::abs(t - cells * h)};
}

Translation translate(const GridVector& f, double t) {
  const auto snap = snap_time(f.grid, t);
  const int n = f.grid.points;
  GridVector out{f.grid, VectorXc::Zero(n)};
  double lost = 0.0;
  for (int i = 0; i < n; ++i) {
    const int j = i + snap.cells;
    if (j < n) {
      out.values(j) = f.values(i);
    } else {
      lost += std::norm(f.values(i));
    }
  }
  return {out, snap, lost * f.grid.spacing()};
}

MatrixXc translation_matrix(const Grid& grid, int cells) {
  const int n = grid.points;
  MatrixXc u = MatrixXc::Zero(n, n);
  for (int i = 0; i + cells < n; ++i) u(i + cells, i) = 1.0;
  return u;
}

MatrixXc edge_projection(const Grid& grid, double t) {
  const auto u = translation_matrix(grid, snap_time(grid, t).cells);
  return MatrixXc::Identity(grid.points, grid.points) - u * u.adjoint();
}

}  // namespace cpflow
