#include "cpflow/semigroups.hpp"

#include <algorithm>
#include <cmath>

namespace cpflow {

FlowState::FlowState(std::shared_ptr<const Initial> init) : init_(std::move(init)) {
  double total = 0.0;
  for (double v : init_->cell_norms2) total += v;
  norms2_.push_back(init_->grid.spacing() * total);
  outflows_.push_back(0.0);
}

FlowState FlowState::from_cells(const Grid& grid, const MatrixXc& cells) {
  if (grid.points < 1 || !(grid.length > 0.0)) throw InvalidArgument("invalid grid");
  if (cells.rows() != grid.points || cells.cols() < 1) {
    throw InvalidArgument("flow state needs one K-vector per grid cell");
  }
  auto init = std::make_shared<Initial>();
  init->grid = grid;
  init->cells = cells;
  for (int i = 0; i < grid.points; ++i) init->cell_norms2.push_back(cells.row(i).squaredNorm());
  return FlowState(std::move(init));
}

FlowState FlowState::from_profile(const Grid& grid, const ExpKernelVector& profile,
                                  const VectorXc& k) {
  MatrixXc cells(grid.points, k.size());
  for (int i = 0; i < grid.points; ++i) {
    cells.row(i) = profile(grid.midpoint(i)) * k.transpose();
  }
  return from_cells(grid, cells);
}

FlowState FlowState::prefix(int k) const {
  if (k < 0 || k > steps()) throw InvalidArgument("prefix beyond the steps taken");
  FlowState out(*this);
  out.labels_.resize(k);
  out.log_damp_.resize(k + 1);
  out.norms2_.resize(k + 1);
  out.outflows_.resize(k + 1);
  return out;
}

void FlowState::push_step(cplx z) {
  const int n = grid().points;
  const double h = grid().spacing();
  const int t = steps();
  // cell n-1 leaves the grid
  double out = 0.0;
  if (n - 1 < t) {
    const int s = t - (n - 1);
    const double c2 = std::norm(labels_[s - 1]) * std::exp(2.0 * (log_damp_[t] - log_damp_[s - 1]));
    out = h * c2 * norms2_[s - 1];
  } else {
    out = h * std::exp(2.0 * log_damp_[t]) * init_->cell_norms2[n - 1 - t];
  }
  const double a2 = std::norm(z);
  labels_.push_back(z);
  log_damp_.push_back(log_damp_[t] - 0.5 * a2 * h);
  norms2_.push_back(std::exp(-a2 * h) * std::max(0.0, (1.0 + h * a2) * norms2_[t] - out));
  outflows_.push_back(outflows_[t] + out);
}

FlowState evolve(const FlowState& f, cplx z, double t, SnapReport* snap) {
  const auto rep = snap_time(f.grid(), t);
  if (snap) *snap = rep;
  FlowState out(f);
  for (int k = 0; k < rep.cells; ++k) out.push_step(z);
  return out;
}

cplx inner_product(const FlowState& f, const FlowState& g) {
  const auto& gf = f.grid();
  const auto& gg = g.grid();
  if (gf.points != gg.points || gf.length != gg.length || f.dimension() != g.dimension()) {
    throw InvalidArgument("flow states live on different grids");
  }
  const int n = gf.points;
  const double h = gf.spacing();
  const int ta = f.steps();
  const int tb = g.steps();
  const int delta = ta - tb;
  const int p0 = std::max(0, delta);
  const int q0 = p0 - delta;
  const auto& za = f.labels();
  const auto& zb = g.labels();
  const auto& xa = f.initial_cells();
  const auto& xb = g.initial_cells();

  // ip[k] = (f after p0+k steps, g after q0+k steps)
  std::vector<cplx> ip;
  ip.reserve(ta - p0 + 1);
  for (int p = p0, q = q0; p <= ta; ++p, ++q) {
    cplx sum = 0.0;
    const int fed = std::min({p, q, n});
    for (int i = 0; i < fed; ++i) {
      const int sa = p - i;
      const int sb = q - i;
      const cplx ca = za[sa - 1] * std::exp(f.log_damping(p) - f.log_damping(sa - 1));
      const cplx cb = zb[sb - 1] * std::exp(g.log_damping(q) - g.log_damping(sb - 1));
      sum += std::conj(ca) * cb * ip[(p - 1 - i) - p0];
    }
    const double scale = std::exp(f.log_damping(p) + g.log_damping(q));
    cplx concrete = 0.0;
    for (int i = std::max(p, q); i < n; ++i) concrete += xa.row(i - p).dot(xb.row(i - q));
    sum += scale * concrete;
    ip.push_back(h * sum);
  }
  return ip.back();
}

cplx covariance(cplx w, cplx z) {
  return 0.5 * (2.0 * std::conj(w) * z - std::norm(w) - std::norm(z));
}

MatrixXc covariance_gram(const std::vector<cplx>& zs, double t) {
  const int k = static_cast<int>(zs.size());
  MatrixXc g(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) g(i, j) = std::exp(covariance(zs[i], zs[j]) * t);
  }
  return g;
}

MatrixXc evolved_gram(const FlowState& f, const std::vector<cplx>& zs, double t) {
  std::vector<FlowState> states;
  for (cplx z : zs) states.push_back(evolve(f, z, t));
  const int k = static_cast<int>(zs.size());
  const double norm2 = f.norm2();
  if (!(norm2 > 0.0)) throw InvalidArgument("evolved Gram needs a nonzero state");
  MatrixXc g(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) {
      g(i, j) = inner_product(states[i], states[j]) / norm2;
      g(j, i) = std::conj(g(i, j));
    }
  }
  return g;
}

double covariance_residual(cplx w, cplx z, double t, const FlowState& f,
                           const FlowState& g, double outflow_tolerance) {
  SnapReport snap;
  const auto uf = evolve(f, w, t, &snap);
  const auto ug = evolve(g, z, t);
  const double out = std::max(uf.outflow_mass(), ug.outflow_mass());
  if (out > outflow_tolerance) {
    throw InvalidArgument("invalid experiment: outflow mass " + std::to_string(out) +
                          " exceeds tolerance; enlarge the grid");
  }
  const cplx expected = std::exp(covariance(w, z) * snap.snapped_t) * inner_product(f, g);
  return std::abs(inner_product(uf, ug) - expected);
}

double semigroup_residual(cplx z, double t, double s, const FlowState& f) {
  const auto a = evolve(f, z, t + s);
  const auto b = evolve(evolve(f, z, s), z, t);
  const double d2 = inner_product(a, a).real() + inner_product(b, b).real() -
                    2.0 * inner_product(a, b).real();
  return std::sqrt(std::max(0.0, d2));
}

double boundary_feed_residual(const FlowState& state) {
  const int t = state.steps();
  if (t < 1) throw InvalidArgument("boundary feed needs at least one step");
  const cplx z = state.labels()[t - 1];
  const auto prev = state.prefix(t - 1);
  const cplx c = z * std::exp(state.log_damping(t) - state.log_damping(t - 1));
  const double d2 = std::norm(c) * prev.norm2() + std::norm(z) * state.norm2() -
                    2.0 * (std::conj(c) * z * inner_product(prev, state)).real();
  return std::sqrt(std::max(0.0, d2));
}

}  // namespace cpflow
