#pragma once

#include <memory>
#include <vector>

#include "cpflow/halfline.hpp"

namespace cpflow {

// State of H = K (x) L^2(0, L) on a midpoint grid. Cell values live in a free
// extension of the truncated K: the initial cells are concrete vectors of
// dimension D, and every boundary feed adds the vector S0(previous state),
// with (S0 f, S0 g) = (f, g)_H and S0 f orthogonal to the concrete cells.
// A state is stored as its initial data plus the labels z of the steps taken.
class FlowState {
 public:
  static FlowState from_cells(const Grid& grid, const MatrixXc& cells);  // n x D
  // cell i = profile(x_i) * k
  static FlowState from_profile(const Grid& grid, const ExpKernelVector& profile,
                                const VectorXc& k);

  const Grid& grid() const { return init_->grid; }
  int dimension() const { return static_cast<int>(init_->cells.cols()); }
  int steps() const { return static_cast<int>(labels_.size()); }
  const std::vector<cplx>& labels() const { return labels_; }
  double norm2() const { return norms2_.back(); }
  // mass discarded at x = L since the initial state
  double outflow_mass() const { return outflows_.back(); }
  // the state after the first k steps
  FlowState prefix(int k) const;
  const MatrixXc& initial_cells() const { return init_->cells; }
  // sum of log damping factors over the first k steps
  double log_damping(int k) const { return log_damp_[k]; }

 private:
  struct Initial {
    Grid grid;
    MatrixXc cells;
    std::vector<double> cell_norms2;
  };
  explicit FlowState(std::shared_ptr<const Initial> init);
  void push_step(cplx z);

  std::shared_ptr<const Initial> init_;
  std::vector<cplx> labels_;
  std::vector<double> log_damp_{0.0};
  std::vector<double> norms2_;
  std::vector<double> outflows_;

  friend FlowState evolve(const FlowState&, cplx, double, SnapReport*);
};

// U_z(t): per step shift right by one cell, feed z S0(previous state) into
// cell 0, damp by exp(-|z|^2 h / 2). t is snapped to the grid.
FlowState evolve(const FlowState& f, cplx z, double t, SnapReport* snap = nullptr);

cplx inner_product(const FlowState& f, const FlowState& g);

// c(w, z) = (2 conj(w) z - |w|^2 - |z|^2) / 2
cplx covariance(cplx w, cplx z);
MatrixXc covariance_gram(const std::vector<cplx>& zs, double t);
// [(U_{z_i}(t) f, U_{z_j}(t) f)] / ||f||^2
MatrixXc evolved_gram(const FlowState& f, const std::vector<cplx>& zs, double t);

// |(U_w f, U_z g) - exp(c(w,z) t) (f, g)|; outflow above the tolerance makes
// the experiment invalid
double covariance_residual(cplx w, cplx z, double t, const FlowState& f,
                           const FlowState& g, double outflow_tolerance = 1e-8);
// ||U_z(t+s) f - U_z(t) U_z(s) f||
double semigroup_residual(cplx z, double t, double s, const FlowState& f);
// || (cell 0 value) - z S0(state) ||_K after the last step
double boundary_feed_residual(const FlowState& state);

}  // namespace cpflow
