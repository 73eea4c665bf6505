#pragma once

#include <random>
#include <string>
#include <vector>

#include "cpflow/types.hpp"

namespace cpflow {

enum class GaugeClass { GeneralContractive, Unitary, Isometric, Flow };

std::string to_string(GaugeClass c);

struct GaugeOptions {
  bool relax_isometric = false;  // accept Re(y) >= 0 for the isometric class
  double tolerance = 1e-12;
};

// Parameters (a, b, c, y) of a contractive local cocycle acting on units
struct GaugeParam {
  cplx a = 1.0;
  cplx b = 0.0;
  cplx c = 0.0;
  cplx y = 0.0;
  GaugeClass cls = GaugeClass::GeneralContractive;

  static GaugeParam identity() { return {1.0, 0.0, 0.0, 0.0, GaugeClass::Unitary}; }
  // |a| = 1, c = -conj(a) b so that ac + b = 0, Re(y) = 0
  static GaugeParam unitary(cplx a, cplx b, double im_y);
  static GaugeParam flow(cplx a) { return {a, 0.0, 0.0, 0.0, GaugeClass::Flow}; }
  static GaugeParam contractive(cplx a, cplx b, cplx c, cplx y) {
    return {a, b, c, y, GaugeClass::GeneralContractive};
  }
};

void validate(const GaugeParam& g, const GaugeOptions& opts = {});

// C(t) U_z(t) = exp(rate t) U_label(t)
struct UnitAction {
  cplx label;
  cplx rate;
};

cplx exponent(const GaugeParam& g, cplx z);
UnitAction act(const GaugeParam& g, cplx z, const GaugeOptions& opts = {});

// a -> conj(a), b <-> c, y -> conj(y)
GaugeParam adjoint(const GaugeParam& g);

double r_correction(const GaugeParam& g, const GaugeParam& gp);
// product cocycle C C'; y'' = y + y' - i Im(conj(c) b') + r/2, which is what
// sequential action forces
GaugeParam compose(const GaugeParam& g, const GaugeParam& gp);
// the law as printed: y'' = y + y' + i Im(conj(c) b') - r/2
GaugeParam compose_printed(const GaugeParam& g, const GaugeParam& gp);
GaugeClass composed_class(GaugeClass a, GaugeClass b);

double parameter_distance(const GaugeParam& g, const GaugeParam& h);
double associativity_residual(const GaugeParam& g1, const GaugeParam& g2,
                              const GaugeParam& g3);

// max over z of |rate'(z) + rate(a'z + b') - rate''(z)| + |label mismatch|
double action_composition_residual(const GaugeParam& g, const GaugeParam& gp,
                                   const std::vector<cplx>& zs, bool printed = false);

struct FormulaDiscrepancy {
  GaugeParam g;
  GaugeParam gp;
  std::vector<cplx> zs;
  double printed_residual;
  double consistent_residual;
};

// one record per pair whose printed-law residual exceeds the tolerance
std::vector<FormulaDiscrepancy> discrepancy_report(
    const std::vector<std::pair<GaugeParam, GaugeParam>>& pairs,
    const std::vector<cplx>& zs, double tolerance = 1e-12);

GaugeParam random_contractive(std::mt19937_64& rng, double max_modulus = 0.9);
GaugeParam random_unitary(std::mt19937_64& rng);
GaugeParam random_flow(std::mt19937_64& rng);

// ------------------------------------------------------------ transitivity

enum class AllowedSet { AEqualsOne, UnitCircle };

struct Reachability {
  bool reachable = false;
  cplx a = 1.0;             // witness, or the required a when unreachable
  cplx b = 0.0;
  std::string obstruction;  // empty when reachable
};

// is there z -> a z + b with a in the allowed set mapping src to dst?
Reachability pair_reachable(std::pair<cplx, cplx> src, std::pair<cplx, cplx> dst,
                            AllowedSet allowed, double tolerance = 1e-12);
Reachability unit_reachable(cplx z0, cplx z1, AllowedSet allowed);

}  // namespace cpflow
