#include "cpflow/gauge.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cpflow {

namespace {

constexpr double kUnitModulus = 1e-12;

bool on_circle(cplx a) { return std::abs(std::abs(a) - 1.0) <= kUnitModulus; }

std::string fmt(cplx v) {
  std::ostringstream os;
  os.precision(6);
  os << v.real() << (v.imag() < 0 ? "-" : "+") << std::abs(v.imag()) << "i";
  return os.str();
}

}  // namespace

std::string to_string(GaugeClass c) {
  switch (c) {
    case GaugeClass::GeneralContractive: return "general-contractive";
    case GaugeClass::Unitary: return "unitary";
    case GaugeClass::Isometric: return "isometric";
    case GaugeClass::Flow: return "flow";
  }
  return "?";
}

GaugeParam GaugeParam::unitary(cplx a, cplx b, double im_y) {
  if (!on_circle(a)) throw InvalidArgument("invalid parameter: unitary class needs |a| = 1");
  return {a, b, -std::conj(a) * b, cplx(0.0, im_y), GaugeClass::Unitary};
}

void validate(const GaugeParam& g, const GaugeOptions& opts) {
  const double tol = opts.tolerance;
  auto fail = [&](const std::string& why) {
    throw InvalidArgument("invalid parameter (" + to_string(g.cls) + "): " + why);
  };
  if (std::abs(g.a) > 1.0 + tol) fail("|a| > 1");
  switch (g.cls) {
    case GaugeClass::GeneralContractive:
      if (g.y.real() < -tol) fail("Re(y) < 0");
      if (on_circle(g.a) && std::abs(g.a * g.c + g.b) > tol) fail("|a| = 1 needs ac + b = 0");
      break;
    case GaugeClass::Unitary:
    case GaugeClass::Isometric: {
      if (!on_circle(g.a)) fail("|a| != 1");
      if (std::abs(g.a * g.c + g.b) > tol) fail("ac + b != 0");
      const bool relaxed = g.cls == GaugeClass::Isometric && opts.relax_isometric;
      if (relaxed ? g.y.real() < -tol : std::abs(g.y.real()) > tol) fail("Re(y) condition");
      break;
    }
    case GaugeClass::Flow:
      if (std::abs(g.b) > tol || std::abs(g.c) > tol || std::abs(g.y) > tol) {
        fail("flow class needs b = c = y = 0");
      }
      break;
  }
}

cplx exponent(const GaugeParam& g, cplx z) {
  if (g.cls == GaugeClass::Flow) return -0.5 * std::norm(z) * (1.0 - std::norm(g.a));
  if (on_circle(g.a)) {
    return -g.y - cplx(0.0, 1.0) * std::imag(g.a * std::conj(g.b) * z);
  }
  const double s = 1.0 - std::norm(g.a);
  const cplx v = -(std::conj(g.a) * g.b + g.c) / s;
  return -g.y - 0.5 * std::norm(v + z) * s + cplx(0.0, std::imag(std::conj(g.c) * z));
}

UnitAction act(const GaugeParam& g, cplx z, const GaugeOptions& opts) {
  validate(g, opts);
  return {g.a * z + g.b, exponent(g, z)};
}

GaugeParam adjoint(const GaugeParam& g) {
  return {std::conj(g.a), g.c, g.b, std::conj(g.y), g.cls};
}

double r_correction(const GaugeParam& g, const GaugeParam& gp) {
  if (on_circle(g.a) || on_circle(gp.a)) return 0.0;
  const cplx a = g.a, b = g.b, c = g.c;
  const cplx ap = gp.a, bp = gp.b, cp = gp.c;
  const double s = 1.0 - std::norm(a);
  const double sp = 1.0 - std::norm(ap);
  const double spp = 1.0 - std::norm(a * ap);
  return std::norm(std::conj(ap) * bp + cp) / sp +
         std::norm(bp * s - std::conj(a) * b - c) / s -
         std::norm(std::conj(a * ap) * (a * bp + b) + std::conj(ap) * c + cp) / spp;
}

GaugeClass composed_class(GaugeClass a, GaugeClass b) {
  using C = GaugeClass;
  if (a == C::Unitary && b == C::Unitary) return C::Unitary;
  if (a == C::Flow && b == C::Flow) return C::Flow;
  auto iso = [](C x) { return x == C::Unitary || x == C::Isometric; };
  if (iso(a) && iso(b)) return C::Isometric;
  return C::GeneralContractive;
}

namespace {

GaugeParam compose_with(const GaugeParam& g, const GaugeParam& gp, double sign) {
  GaugeParam out;
  out.a = g.a * gp.a;
  out.b = g.a * gp.b + g.b;
  out.c = std::conj(gp.a) * g.c + gp.c;
  const cplx im_term(0.0, std::imag(std::conj(g.c) * gp.b));
  out.y = g.y + gp.y + sign * (-im_term + 0.5 * r_correction(g, gp));
  out.cls = composed_class(g.cls, gp.cls);
  return out;
}

}  // namespace

GaugeParam compose(const GaugeParam& g, const GaugeParam& gp) { return compose_with(g, gp, 1.0); }

GaugeParam compose_printed(const GaugeParam& g, const GaugeParam& gp) {
  return compose_with(g, gp, -1.0);
}

double parameter_distance(const GaugeParam& g, const GaugeParam& h) {
  return std::max({std::abs(g.a - h.a), std::abs(g.b - h.b), std::abs(g.c - h.c),
                   std::abs(g.y - h.y)});
}

double associativity_residual(const GaugeParam& g1, const GaugeParam& g2,
                              const GaugeParam& g3) {
  return parameter_distance(compose(compose(g1, g2), g3), compose(g1, compose(g2, g3)));
}

double action_composition_residual(const GaugeParam& g, const GaugeParam& gp,
                                   const std::vector<cplx>& zs, bool printed) {
  const auto gpp = printed ? compose_printed(g, gp) : compose(g, gp);
  double worst = 0.0;
  for (cplx z : zs) {
    const cplx mid = gp.a * z + gp.b;
    const double rate = std::abs(exponent(gp, z) + exponent(g, mid) - exponent(gpp, z));
    const double label = std::abs(g.a * mid + g.b - (gpp.a * z + gpp.b));
    worst = std::max(worst, rate + label);
  }
  return worst;
}

std::vector<FormulaDiscrepancy> discrepancy_report(
    const std::vector<std::pair<GaugeParam, GaugeParam>>& pairs,
    const std::vector<cplx>& zs, double tolerance) {
  std::vector<FormulaDiscrepancy> out;
  for (const auto& [g, gp] : pairs) {
    const double printed = action_composition_residual(g, gp, zs, true);
    if (printed > tolerance) {
      out.push_back({g, gp, zs, printed, action_composition_residual(g, gp, zs, false)});
    }
  }
  return out;
}

namespace {

cplx normal_complex(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return {n(rng), n(rng)};
}

}  // namespace

GaugeParam random_contractive(std::mt19937_64& rng, double max_modulus) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double rad = max_modulus * std::sqrt(u(rng));
  const double arg = 2.0 * M_PI * u(rng);
  const cplx a = std::polar(rad, arg);
  const cplx b = normal_complex(rng);
  const cplx c = normal_complex(rng);
  const cplx y(std::abs(normal_complex(rng).real()), normal_complex(rng).imag());
  return GaugeParam::contractive(a, b, c, y);
}

GaugeParam random_unitary(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
  std::normal_distribution<double> n;
  return GaugeParam::unitary(std::polar(1.0, u(rng)), normal_complex(rng), n(rng));
}

GaugeParam random_flow(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return GaugeParam::flow(std::polar(std::sqrt(u(rng)), 2.0 * M_PI * u(rng)));
}

Reachability pair_reachable(std::pair<cplx, cplx> src, std::pair<cplx, cplx> dst,
                            AllowedSet allowed, double tolerance) {
  const cplx ds = src.second - src.first;
  if (std::abs(ds) <= tolerance || std::abs(dst.second - dst.first) <= tolerance) {
    throw InvalidArgument("pair reachability needs distinct labels");
  }
  Reachability out;
  out.a = (dst.second - dst.first) / ds;
  out.b = dst.first - out.a * src.first;
  switch (allowed) {
    case AllowedSet::AEqualsOne:
      out.reachable = std::abs(out.a - 1.0) <= tolerance;
      if (!out.reachable) out.obstruction = "requires a = " + fmt(out.a) + " but a = 1 is imposed";
      break;
    case AllowedSet::UnitCircle:
      out.reachable = std::abs(std::abs(out.a) - 1.0) <= tolerance;
      if (!out.reachable) {
        out.obstruction = "requires a = " + fmt(out.a) + " with |a| != 1";
      }
      break;
  }
  if (out.reachable && allowed == AllowedSet::AEqualsOne) {
    out.a = 1.0;
    out.b = dst.first - src.first;
  }
  return out;
}

Reachability unit_reachable(cplx z0, cplx z1, AllowedSet allowed) {
  (void)allowed;  // a = 1 lies in every allowed set
  return {true, 1.0, z1 - z0, ""};
}

}  // namespace cpflow
