#include "cpflow/experiments.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "cpflow/cornercheck.hpp"
#include "cpflow/gauge.hpp"
#include "cpflow/semigroups.hpp"
#include "cpflow/weights.hpp"

namespace cpflow::experiments {

namespace {

constexpr const char* kPaper = "paper";
constexpr const char* kTrivial = "trivial";
constexpr const char* kDerived = "derived-oracle";

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : "; ") + p;
  return out;
}

json to_json(cplx v) { return json::array({v.real(), v.imag()}); }

cplx to_cplx(const json& j) {
  if (j.is_number()) return j.get<double>();
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

bool is_cplx(const json& j) {
  return j.is_number() || (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number());
}

json gauge_json(const GaugeParam& g) {
  return {{"a", to_json(g.a)}, {"b", to_json(g.b)}, {"c", to_json(g.c)},
          {"y", to_json(g.y)}, {"class", to_string(g.cls)}};
}

struct Records {
  json list = json::array();
  bool ok = true;

  void add(const std::string& name, json value, json expected, std::optional<double> tol,
           bool pass, const char* provenance, const std::string& note = {}) {
    json r = {{"name", name},
              {"value", std::move(value)},
              {"expected", std::move(expected)},
              {"tolerance", tol ? json(*tol) : json(nullptr)},
              {"pass", pass},
              {"provenance", provenance}};
    if (!note.empty()) r["note"] = note;
    list.push_back(std::move(r));
    ok = ok && pass;
  }
};

struct Context {
  json cfg;
  std::uint64_t seed;
  int refine;
  Records records;
  json findings = json::array();
  std::vector<CsvTable> curves;
};

LambdaSequence make_lambda(const json& cfg) {
  const auto kind = cfg["lambda"]["kind"].get<std::string>();
  if (kind == "linear") return LambdaSequence::linear();
  if (kind == "geometric") return LambdaSequence::geometric();
  return LambdaSequence::custom(cfg["lambda"]["values"].get<std::vector<double>>());
}

SeriesConfig make_series(const json& cfg) {
  SeriesConfig s;
  s.max_terms = cfg["series"]["max_terms"].get<int>();
  s.tail_tolerance = cfg["series"]["tail_tolerance"].get<double>();
  return s;
}

cplx normal_complex(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return {n(rng), n(rng)};
}

// ----------------------------------------------------------------- delta

void run_delta(Context& ctx) {
  const auto lam = make_lambda(ctx.cfg);
  const int n = ctx.cfg["delta"]["n"].get<int>();
  const auto f0 = ProductVector::reference();
  const auto curve = delta_pairing(f0, f0, n, lam);

  double product = 1.0;
  for (int i = 1; i <= n; ++i) {
    const double l2 = lam.value(i) * lam.value(i);
    product *= l2 / (1.0 + l2);
  }
  const double value = curve.curve[n].real();
  ctx.records.add("finite_product", value, product, 1e-10, std::abs(value - product) < 1e-10,
                  kDerived, "prod_{i<=n} l_i^2/(1+l_i^2)");
  ctx.records.add("monotone", curve.monotone, true, std::nullopt, curve.monotone, kPaper);
  if (lam.name() == "linear") {
    const double ref = M_PI / std::sinh(M_PI);
    const double lim = curve.limit.real();
    ctx.records.add("limit", lim, ref, 1e-9, std::abs(lim - ref) < 1e-9, kDerived,
                    "pi / sinh(pi)");
  } else {
    ctx.records.add("limit", curve.limit.real(), nullptr, std::nullopt, true, kDerived,
                    "no closed form for this sequence");
  }
  CsvTable t{"delta_curve", {}};
  for (int i = 0; i <= n; ++i) t.rows.push_back({double(i), curve.curve[i].real(), curve.limit.real()});
  ctx.curves.push_back(std::move(t));
}

// ----------------------------------------------------------------- decay

ProductVector head_supported(int level, const LambdaSequence& lam, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  ProductVector f;
  for (int i = 1; i <= level; ++i) {
    const double l = lam.value(i);
    auto v = ExpKernelVector::reference(l);
    for (int j = 0; j < 2; ++j) {
      v = v + ExpKernelVector::exponential(0.5 * l * l + 0.5 + j, 0.3 * cplx(n(rng), n(rng)));
    }
    f.head.push_back(v);
  }
  return f;
}

void run_decay(Context& ctx) {
  const auto lam = make_lambda(ctx.cfg);
  const int level = ctx.cfg["decay"]["level"].get<int>();
  const int n_max = ctx.cfg["decay"]["n_max"].get<int>();
  std::mt19937_64 rng(ctx.seed);
  const auto f = head_supported(level, lam, rng);
  const auto f0 = ProductVector::reference();
  const auto delta = ElemTensor::delta();
  const cplx ratio = matrix_element(f, delta, f, lam) / matrix_element(f0, delta, f0, lam);
  Functional rho;
  rho.add(1.0, f, f);
  rho.add(-ratio, f0, f0);

  const auto curve = lemma_decay_curve(rho, n_max, lam, 1e-10);
  ctx.records.add("rho_delta", std::abs(curve.rho_delta), 0.0, 1e-12,
                  std::abs(curve.rho_delta) < 1e-12, kDerived, "enforced by construction");
  double tail = 0.0;
  for (int k = level; k <= n_max; ++k) tail = std::max(tail, curve.norms[k]);
  ctx.records.add("decay_after_level", tail, 0.0, 1e-12, tail <= 1e-12, kPaper,
                  "max_{n >= m} ||(Lambda-hat pi-hat)^n rho||");

  bool guarded = false;
  double measured = 0.0;
  try {
    lemma_decay_curve(Functional::vector_state(f0), n_max, lam, 1e-10);
  } catch (const PreconditionViolation& e) {
    guarded = true;
    measured = e.measured;
  }
  ctx.records.add("guard_rho_delta_nonzero", guarded ? "precondition-violation" : "accepted",
                  "precondition-violation", std::nullopt, guarded, kTrivial,
                  "measured rho(Delta) = " + std::to_string(measured));

  CsvTable t{"decay_curve", {}};
  for (int k = 0; k <= n_max; ++k) t.rows.push_back({double(k), curve.norms[k], 1e-12});
  ctx.curves.push_back(std::move(t));
}

// ------------------------------------------------------------ covariance

void run_covariance(Context& ctx) {
  const auto& cc = ctx.cfg["covariance"];
  const double length = ctx.cfg["grid"]["length"].get<double>();
  const int base = ctx.cfg["grid"]["points"].get<int>();
  const int levels = cc["refinements"].get<int>() + ctx.refine;
  const double t = cc["t"].get<double>();
  std::vector<cplx> zs;
  for (const auto& z : cc["labels"]) zs.push_back(to_cplx(z));
  const int dim = static_cast<int>(
      std::pow(ctx.cfg["tensor"]["factor_dim"].get<int>(), ctx.cfg["tensor"]["factors"].get<int>()));

  std::mt19937_64 rng(ctx.seed);
  VectorXc k1(dim), k2(dim);
  for (int i = 0; i < dim; ++i) {
    k1(i) = normal_complex(rng);
    k2(i) = normal_complex(rng);
  }
  k1.normalize();
  k2.normalize();
  const auto pf = ExpKernelVector::exponential(1.0).windowed(0.5, 3.0);
  const auto pg = ExpKernelVector::exponential(cplx(0.5, 1.0)).windowed(0.25, 2.5);

  const int pairs = static_cast<int>(zs.size() * zs.size());
  std::vector<std::vector<double>> res(pairs);
  std::vector<FlowState> finest;
  for (int lvl = 0; lvl < levels; ++lvl) {
    const Grid grid{length, base << lvl};
    const auto f = FlowState::from_profile(grid, pf, k1);
    const auto g = FlowState::from_profile(grid, pg, k2);
    for (int i = 0; i < pairs; ++i) {
      res[i].push_back(covariance_residual(zs[i / zs.size()], zs[i % zs.size()], t, f, g));
    }
    if (lvl + 1 == levels) finest.push_back(f);
  }

  CsvTable table{"covariance_residuals", {}};
  double worst_order = kInf;
  for (int i = 0; i < pairs; ++i) {
    const cplx w = zs[i / zs.size()];
    const cplx z = zs[i % zs.size()];
    bool exact = true;
    for (double r : res[i]) exact = exact && r <= 1e-12;
    const auto orders = observed_orders(res[i]);
    double min_order = kInf;
    for (double o : orders) min_order = std::min(min_order, o);
    const bool pass = exact || min_order >= 0.8;
    if (!exact) worst_order = std::min(worst_order, min_order);
    json value = {{"w", to_json(w)}, {"z", to_json(z)}, {"residuals", res[i]},
                  {"orders", exact ? json(nullptr) : json(orders)}, {"exact", exact}};
    ctx.records.add("covariance_order", value, 0.8, std::nullopt, pass, kDerived,
                    exact ? "scheme exact when w or z is 0" : "observed order >= 0.8");
    for (int lvl = 0; lvl < levels; ++lvl) {
      table.rows.push_back({double(i * levels + lvl), res[i][lvl], length / (base << lvl)});
    }
  }
  ctx.curves.push_back(std::move(table));

  const double analytic = min_eigenvalue_hermitian(covariance_gram(zs, t));
  ctx.records.add("gram_psd_analytic", analytic, 0.0, 1e-12, analytic >= -1e-12, kPaper,
                  "[exp(c(z_i, z_j) t)] is a Gram matrix");
  const double numeric = min_eigenvalue_hermitian(evolved_gram(finest.front(), zs, t));
  ctx.records.add("gram_psd_evolved", numeric, 0.0, 1e-12, numeric >= -1e-12, kDerived);
  ctx.records.add("worst_observed_order", std::isinf(worst_order) ? json(nullptr) : json(worst_order),
                  0.8, std::nullopt, std::isinf(worst_order) || worst_order >= 0.8, kDerived);
}

// ----------------------------------------------------------------- gauge

void run_gauge(Context& ctx) {
  const auto& gc = ctx.cfg["gauge"];
  const int triples = gc["triples"].get<int>();
  const int r_samples = gc["r_samples"].get<int>();
  const int z_samples = gc["z_samples"].get<int>();
  GaugeOptions opts;
  opts.relax_isometric = gc["relax_isometric"].get<bool>();
  std::mt19937_64 rng(ctx.seed);
  std::vector<cplx> zs;
  for (int i = 0; i < z_samples; ++i) zs.push_back(normal_complex(rng));

  // printed examples
  const auto id_act = act(GaugeParam::identity(), cplx(0.3, -0.7), opts);
  ctx.records.add("act_identity", {to_json(id_act.label), to_json(id_act.rate)},
                  {to_json(cplx(0.3, -0.7)), to_json(0.0)}, 1e-15,
                  std::abs(id_act.label - cplx(0.3, -0.7)) + std::abs(id_act.rate) < 1e-15, kTrivial);
  const auto tr = act(GaugeParam{1.0, 1.0, -1.0, 0.0, GaugeClass::Unitary}, 0.0, opts);
  ctx.records.add("act_unit_translation", {to_json(tr.label), to_json(tr.rate)},
                  {to_json(1.0), to_json(0.0)}, 1e-15,
                  std::abs(tr.label - 1.0) + std::abs(tr.rate) < 1e-15, kDerived);
  const auto fl = act(GaugeParam::flow(0.5), 2.0, opts);
  ctx.records.add("act_flow", {to_json(fl.label), to_json(fl.rate)},
                  {to_json(1.0), to_json(-1.5)}, 1e-15,
                  std::abs(fl.label - 1.0) + std::abs(fl.rate + 1.5) < 1e-15, kDerived,
                  "rate per unit time");

  double assoc = 0.0, assoc_u = 0.0, unit_act = 0.0, flow_act = 0.0, general_act = 0.0;
  double closure = 0.0, inverse = 0.0, monoid_re_y = kInf;
  std::vector<std::pair<GaugeParam, GaugeParam>> general_pairs;
  for (int i = 0; i < triples; ++i) {
    const auto g1 = random_contractive(rng), g2 = random_contractive(rng), g3 = random_contractive(rng);
    assoc = std::max(assoc, associativity_residual(g1, g2, g3));
    monoid_re_y = std::min(monoid_re_y, compose(g1, g2).y.real());
    general_act = std::max(general_act, action_composition_residual(g1, g2, zs));
    if (i < 8) general_pairs.push_back({g1, g2});

    const auto u1 = random_unitary(rng), u2 = random_unitary(rng), u3 = random_unitary(rng);
    assoc_u = std::max(assoc_u, associativity_residual(u1, u2, u3));
    unit_act = std::max(unit_act, action_composition_residual(u1, u2, zs));
    const auto u12 = compose(u1, u2);
    try {
      validate(u12, opts);
    } catch (const InvalidArgument&) {
      closure = kInf;
    }
    closure = std::max({closure, std::abs(std::abs(u12.a) - 1.0),
                        std::abs(u12.a * u12.c + u12.b), std::abs(u12.y.real())});
    inverse = std::max(inverse, parameter_distance(compose(u1, adjoint(u1)), GaugeParam::identity()));

    const auto f1 = random_flow(rng), f2 = random_flow(rng);
    flow_act = std::max(flow_act, action_composition_residual(f1, f2, zs));
  }
  double r_min = kInf;
  for (int i = 0; i < r_samples; ++i) {
    r_min = std::min(r_min, r_correction(random_contractive(rng), random_contractive(rng)));
  }

  ctx.records.add("associativity_contractive", assoc, 0.0, 1e-12, assoc < 1e-12, kDerived);
  ctx.records.add("associativity_unitary", assoc_u, 0.0, 1e-12, assoc_u < 1e-12, kDerived);
  ctx.records.add("r_nonnegative", r_min, 0.0, 1e-12, r_min >= -1e-12, kPaper,
                  "min r over samples");
  ctx.records.add("unitary_closure", closure, 0.0, 1e-12, closure < 1e-12, kTrivial);
  ctx.records.add("unitary_inverse", inverse, 0.0, 1e-12, inverse < 1e-12, kPaper,
                  "adjoint is the inverse");
  ctx.records.add("contractive_closure_re_y", monoid_re_y, 0.0, 1e-12, monoid_re_y >= -1e-12,
                  kDerived, "min Re(y'') over samples");
  ctx.records.add("action_oracle_unitary", unit_act, 0.0, 1e-12, unit_act < 1e-12, kDerived);
  ctx.records.add("action_oracle_flow", flow_act, 0.0, 1e-12, flow_act < 1e-12, kDerived);

  // the printed law against the oracle, with reproducers
  std::vector<std::pair<GaugeParam, GaugeParam>> probe = {
      {GaugeParam{1.0, cplx(0, 1), cplx(0, -1), 0.0, GaugeClass::Unitary},
       GaugeParam{1.0, 1.0, -1.0, 0.0, GaugeClass::Unitary}}};
  probe.insert(probe.end(), general_pairs.begin(), general_pairs.end());
  const auto report = discrepancy_report(probe, {cplx(0.5, 0.25), cplx(-1.0, 2.0)});
  for (const auto& d : report) {
    json zsj = json::array();
    for (cplx z : d.zs) zsj.push_back(to_json(z));
    ctx.findings.push_back({{"kind", "formula-discrepancy"},
                            {"law", "printed composition"},
                            {"g", gauge_json(d.g)},
                            {"g_prime", gauge_json(d.gp)},
                            {"z", zsj},
                            {"printed_residual", d.printed_residual},
                            {"consistent_residual", d.consistent_residual}});
  }
  const bool general_ok = general_act < 1e-12 || !report.empty();
  ctx.records.add("action_oracle_general", general_act, 0.0, 1e-12, general_ok, kDerived,
                  report.empty() ? "" : "printed-law discrepancies reported in findings");
}

// ---------------------------------------------------------- transitivity

void run_transitivity(Context& ctx) {
  const auto& tc = ctx.cfg["transitivity"];
  for (const auto& c : tc["cases"]) {
    const std::pair<cplx, cplx> src{to_cplx(c["src"][0]), to_cplx(c["src"][1])};
    const std::pair<cplx, cplx> dst{to_cplx(c["dst"][0]), to_cplx(c["dst"][1])};
    const auto allowed_name = c["allowed"].get<std::string>();
    const auto allowed = allowed_name == "a1" ? AllowedSet::AEqualsOne : AllowedSet::UnitCircle;
    const auto r = pair_reachable(src, dst, allowed);
    const bool expect = c["expect"].get<std::string>() == "reachable";
    bool pass = r.reachable == expect;
    json expected = {{"reachable", expect}};
    if (c.contains("a")) {
      const cplx a = to_cplx(c["a"]);
      pass = pass && std::abs(r.a - a) < 1e-12;
      expected["a"] = to_json(a);
    }
    if (c.contains("b")) {
      const cplx b = to_cplx(c["b"]);
      pass = pass && std::abs(r.b - b) < 1e-12;
      expected["b"] = to_json(b);
    }
    json value = {{"reachable", r.reachable}, {"a", to_json(r.a)}, {"b", to_json(r.b)}};
    if (!r.obstruction.empty()) value["obstruction"] = r.obstruction;
    ctx.records.add("pair_reachable/" + allowed_name, value, expected, 1e-12, pass, kDerived,
                    "affine solve z -> a z + b");
  }
  std::mt19937_64 rng(ctx.seed);
  const int n = tc["single_pairs"].get<int>();
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const cplx z0 = normal_complex(rng), z1 = normal_complex(rng);
    const auto r = unit_reachable(z0, z1, AllowedSet::AEqualsOne);
    const cplx image = r.a * z0 + r.b;
    worst = std::max({worst, std::abs(image - z1), std::abs(r.b - (z1 - z0)),
                      r.reachable ? 0.0 : kInf});
  }
  ctx.records.add("single_unit_transitive", worst, 0.0, 1e-12, worst < 1e-12, kDerived,
                  "witness b = z1 - z0 under a = 1");
}

// ---------------------------------------------------------------- corner

void run_corner(Context& ctx) {
  const auto& cc = ctx.cfg["corner"];
  CornerModel model;
  model.lambda = make_lambda(ctx.cfg);
  model.factors = cc["factors"].get<int>();
  model.factor_dim = cc["factor_dim"].get<int>();
  model.series = make_series(ctx.cfg);
  const double tol = cc["tolerance"].get<double>();
  const auto ts = cc["t"].get<std::vector<double>>();
  const cplx z = to_cplx(cc["z"]);

  const double nu_rate = cc["nu_rate"].get<double>();
  const HVector unit{ProductVector::reference(), ExpKernelVector::reference(nu_rate)};
  const auto xi = BoundaryWeight::from_nu(HFunctional::vector_state(unit), model.lambda, model.series);
  const auto zero = BoundaryWeight::zero(model.lambda);
  const double unital = xi(one_minus_lambda()).real();
  ctx.records.add("xi_unital", unital, 1.0, 1e-8, std::abs(unital - 1.0) < 1e-8, kPaper);

  for (double t : ts) {
    const std::string at = "@t=" + std::to_string(t);
    const BoundaryChoi bc(model, t);
    const MatrixXc m1 = bc.minimal(1.0);
    const MatrixXc full = m1 + bc.boundary(xi);

    double cross = 0.0;
    const int dout = bc.output_dim();
    const int din = bc.input_dim();
    for (const auto& [a, b, c, d] : std::vector<std::array<int, 4>>{
             {0, 0, 0, 0}, {1, din - 1, dout - 1, 2}, {din / 2, 3, 5, dout / 2}}) {
      const cplx generic = bc.entry(WeightSpec{1.0, xi}, a, b, c, d);
      cross = std::max(cross, std::abs(generic - full(a * dout + c, b * dout + d)));
    }
    ctx.records.add("choi_cross_check" + at, cross, 0.0, 1e-10, cross < 1e-10, kDerived,
                    "factorized Choi vs generic boundary representation");

    const auto v1 = cp_verdict(m1, tol);
    ctx.records.add("omega1_cp" + at, v1.min_eig, v1.threshold, tol, v1.cp, kDerived,
                    "Choi min eigenvalue >= -tol max(1, trace)");
    const auto sub = subordination_check(full, m1, t, tol);
    ctx.records.add("subordination_omega_over_omega1" + at, sub.difference.min_eig,
                    sub.difference.threshold, tol, sub.subordinate, kPaper);
    const auto rev = cp_verdict(m1 - full, tol);
    ctx.records.add("reverse_subordination_fails" + at, rev.min_eig, "< threshold", tol, !rev.cp,
                    kDerived, "strict gap for xi != 0");
  }

  const auto hm = hypermax_witness(z, xi, model, ts, tol);
  json points = json::array();
  for (const auto& p : hm.points) {
    points.push_back({{"t", p.t},
                      {"omega1_corner_min_eig", p.minimal_corner.min_eig},
                      {"difference_min_eig", p.difference.min_eig},
                      {"gap", p.gap}});
  }
  ctx.records.add("hypermax_q_positive", points, true, tol, hm.q_positive, kDerived);
  ctx.records.add("hypermax_ordered", hm.ordered, true, tol, hm.ordered, kPaper);
  ctx.records.add("hypermax_gap", hm.gap, true, tol, hm.gap, kPaper);

  bool degenerate = false;
  try {
    hypermax_witness(1.0, xi, model, ts, tol);
  } catch (const DegenerateDirection&) {
    degenerate = true;
  }
  ctx.records.add("hypermax_z1_degenerate", degenerate ? "degenerate-direction" : "accepted",
                  "degenerate-direction", std::nullopt, degenerate, kTrivial);
  const auto hz = hypermax_witness(z, zero, model, {ts.front()}, tol);
  ctx.records.add("hypermax_xi0_gap_fails", hz.gap, false, tol, !hz.gap && hz.degenerate, kTrivial);
}

// ----------------------------------------------------------- unitality

void run_unitality(Context& ctx) {
  const auto& wc = ctx.cfg["weights"];
  const auto lam = make_lambda(ctx.cfg);
  const auto series = make_series(ctx.cfg);
  const int samples = wc["samples"].get<int>();
  const double tol = wc["tolerance"].get<double>();
  auto basis = std::make_shared<ProductBasis>(lam, ctx.cfg["tensor"]["factors"].get<int>(),
                                              ctx.cfg["tensor"]["factor_dim"].get<int>());
  const HVector unit{ProductVector::reference(), ExpKernelVector::reference(wc["nu_rate"].get<double>())};
  const auto xi = BoundaryWeight::from_nu(HFunctional::vector_state(unit), lam, series);
  const HOperator a{one_minus_lambda()};
  const cplx xi_a = xi(a);
  ctx.records.add("xi_unital", xi_a.real(), 1.0, tol, std::abs(xi_a - 1.0) < tol, kPaper);

  const SeriesEvaluator ev(a, lam, series);
  const MatrixXc delta = basis->matrix(ElemTensor::delta());
  std::mt19937_64 rng(ctx.seed);
  double worst1 = 0.0, worst = 0.0, excess = -kInf;
  bool extrapolated = false;
  CsvTable table{"unitality_residuals", {}};
  for (int s = 0; s < samples; ++s) {
    MatrixXc g(basis->dim(), basis->dim());
    for (int i = 0; i < g.rows(); ++i) {
      for (int j = 0; j < g.cols(); ++j) g(i, j) = normal_complex(rng);
    }
    MatrixXc d = g * g.adjoint();
    d /= d.trace();
    const auto rho = Functional::dense(basis, d);
    const auto w1 = ev.omega_z(1.0, rho);
    extrapolated = extrapolated || w1.extrapolated;
    const cplx rho_i = d.trace();
    const cplx rho_delta = (d * delta).trace();
    const double r1 = std::abs(w1.value - (rho_i - rho_delta));
    const double r = std::abs(w1.value + rho_delta * xi_a - rho_i);
    worst1 = std::max(worst1, r1);
    worst = std::max(worst, r);
    excess = std::max(excess, w1.value.real() - rho_i.real());
    table.rows.push_back({double(s), r1, r});
  }
  ctx.curves.push_back(std::move(table));
  const std::string note = extrapolated ? "series tails extrapolated" : "";
  ctx.records.add("omega1_normalization", worst1, 0.0, tol, worst1 < tol, kPaper,
                  "|omega1(rho)(I-Lambda) - (rho(I) - rho(Delta))|; " + note);
  ctx.records.add("omega_unitality", worst, 0.0, tol, worst < tol, kPaper,
                  "|omega(rho)(I-Lambda) - rho(I)|");
  ctx.records.add("omega1_below_trace", excess, 0.0, tol, excess <= tol, kPaper,
                  "max omega1(rho)(I-Lambda) - rho(I)");
  const auto z0 = ev.omega_z(1.0, Functional{});
  ctx.records.add("omega1_zero_functional", std::abs(z0.value), 0.0, 0.0, z0.value == 0.0, kTrivial);
}

// -------------------------------------------------------------- config

void check(std::vector<std::string>& problems, bool ok, const std::string& msg) {
  if (!ok) problems.push_back(msg);
}

bool positive_number(const json& j) { return j.is_number() && j.get<double>() > 0.0; }
bool int_at_least(const json& j, int lo) { return j.is_number_integer() && j.get<long long>() >= lo; }

}  // namespace

ConfigError::ConfigError(std::vector<std::string> p)
    : InvalidArgument("invalid config: " + join(p)), problems(std::move(p)) {}

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names = {
      "delta", "decay", "covariance", "gauge-check", "transitivity", "corner", "weights-unitality"};
  return names;
}

json default_config() {
  return json::parse(R"({
    "grid": {"length": 8.0, "points": 200},
    "tensor": {"factors": 4, "factor_dim": 3},
    "lambda": {"kind": "linear"},
    "series": {"tail_tolerance": 1e-10, "max_terms": 131072},
    "seeds": {"rng": 20240601},
    "delta": {"n": 8},
    "decay": {"level": 3, "n_max": 8},
    "covariance": {"labels": [0, 1, [0, 1], [1, 1]], "t": 1.0, "refinements": 3},
    "gauge": {"triples": 1000, "r_samples": 100000, "z_samples": 100, "relax_isometric": false},
    "transitivity": {
      "cases": [
        {"src": [0, 1], "dst": [0, [0, 1]], "allowed": "a1", "expect": "unreachable", "a": [0, 1]},
        {"src": [0, 1], "dst": [0, [0, 1]], "allowed": "unit-circle", "expect": "reachable",
         "a": [0, 1], "b": 0}
      ],
      "single_pairs": 100
    },
    "corner": {"factors": 4, "factor_dim": 2, "t": [0.5, 0.25], "z": -1, "nu_rate": 1.0,
               "tolerance": 1e-8},
    "weights": {"samples": 100, "nu_rate": 1.0, "tolerance": 1e-8}
  })");
}

json resolve_config(const json& user) {
  if (!user.is_object()) throw ConfigError({"config must be a JSON object"});
  json cfg = default_config();
  cfg.merge_patch(user);
  std::vector<std::string> p;
  check(p, positive_number(cfg["grid"]["length"]), "grid.length must be positive");
  check(p, int_at_least(cfg["grid"]["points"], 1), "grid.points must be an integer >= 1");
  const bool tensor_ok = int_at_least(cfg["tensor"]["factors"], 1) &&
                         int_at_least(cfg["tensor"]["factor_dim"], 1);
  check(p, tensor_ok, "tensor.factors and tensor.factor_dim must be integers >= 1");
  if (tensor_ok) {
    const double dim = std::pow(cfg["tensor"]["factor_dim"].get<double>(),
                                cfg["tensor"]["factors"].get<double>());
    check(p, dim <= 4096, "tensor dimension m^N must be <= 4096");
  }
  const auto& kind = cfg["lambda"]["kind"];
  check(p, kind == "linear" || kind == "geometric" || kind == "custom",
        "lambda.kind must be linear, geometric or custom");
  if (kind == "custom") {
    const auto& v = cfg["lambda"]["values"];
    bool ok = v.is_array() && !v.empty();
    if (ok) {
      for (const auto& x : v) ok = ok && positive_number(x);
    }
    check(p, ok, "lambda.values must be a nonempty list of positive numbers");
  }
  check(p, positive_number(cfg["series"]["tail_tolerance"]), "series.tail_tolerance must be positive");
  check(p, int_at_least(cfg["series"]["max_terms"], 4096), "series.max_terms must be >= 4096");
  check(p, cfg["seeds"]["rng"].is_number_unsigned(), "seeds.rng must be a nonnegative integer");
  check(p, int_at_least(cfg["delta"]["n"], 0), "delta.n must be an integer >= 0");
  check(p, int_at_least(cfg["decay"]["level"], 1) && int_at_least(cfg["decay"]["n_max"], 0),
        "decay.level >= 1 and decay.n_max >= 0 required");
  const auto& cv = cfg["covariance"];
  bool labels_ok = cv["labels"].is_array() && !cv["labels"].empty();
  if (labels_ok) {
    for (const auto& z : cv["labels"]) labels_ok = labels_ok && is_cplx(z);
  }
  check(p, labels_ok, "covariance.labels must be a list of complex numbers");
  check(p, cv["t"].is_number() && cv["t"].get<double>() >= 0.0, "covariance.t must be >= 0");
  check(p, int_at_least(cv["refinements"], 2), "covariance.refinements must be >= 2");
  const auto& gc = cfg["gauge"];
  check(p, int_at_least(gc["triples"], 1) && int_at_least(gc["r_samples"], 1) &&
               int_at_least(gc["z_samples"], 1),
        "gauge sample counts must be integers >= 1");
  check(p, gc["relax_isometric"].is_boolean(), "gauge.relax_isometric must be boolean");
  const auto& tc = cfg["transitivity"];
  bool cases_ok = tc["cases"].is_array();
  if (cases_ok) {
    for (const auto& c : tc["cases"]) {
      cases_ok = cases_ok && c.is_object() && c.contains("src") && c.contains("dst") &&
                 c["src"].is_array() && c["src"].size() == 2 && c["dst"].is_array() &&
                 c["dst"].size() == 2 && is_cplx(c["src"][0]) && is_cplx(c["src"][1]) &&
                 is_cplx(c["dst"][0]) && is_cplx(c["dst"][1]) &&
                 (c.value("allowed", "") == "a1" || c.value("allowed", "") == "unit-circle") &&
                 (c.value("expect", "") == "reachable" || c.value("expect", "") == "unreachable") &&
                 (!c.contains("a") || is_cplx(c["a"])) && (!c.contains("b") || is_cplx(c["b"]));
    }
  }
  check(p, cases_ok,
        "transitivity.cases entries need src/dst pairs, allowed in {a1, unit-circle} and "
        "expect in {reachable, unreachable}");
  check(p, int_at_least(tc["single_pairs"], 0), "transitivity.single_pairs must be >= 0");
  const auto& cc = cfg["corner"];
  check(p, int_at_least(cc["factors"], 1) && int_at_least(cc["factor_dim"], 1),
        "corner.factors and corner.factor_dim must be >= 1");
  bool ts_ok = cc["t"].is_array() && !cc["t"].empty();
  if (ts_ok) {
    for (const auto& t : cc["t"]) ts_ok = ts_ok && positive_number(t);
  }
  check(p, ts_ok, "corner.t must be a nonempty list of positive numbers");
  check(p, is_cplx(cc["z"]), "corner.z must be a complex number");
  check(p, positive_number(cc["nu_rate"]) && positive_number(cc["tolerance"]),
        "corner.nu_rate and corner.tolerance must be positive");
  const auto& wc = cfg["weights"];
  check(p, int_at_least(wc["samples"], 1), "weights.samples must be >= 1");
  check(p, positive_number(wc["nu_rate"]) && positive_number(wc["tolerance"]),
        "weights.nu_rate and weights.tolerance must be positive");
  if (!p.empty()) throw ConfigError(std::move(p));
  return cfg;
}

Report run(const std::string& command, const json& config, std::optional<std::uint64_t> seed,
           int refine) {
  const auto& names = commands();
  if (std::find(names.begin(), names.end(), command) == names.end()) {
    throw InvalidArgument("unknown command '" + command + "'");
  }
  if (refine < 0) throw InvalidArgument("refine must be >= 0");
  const auto start = std::chrono::steady_clock::now();
  Context ctx;
  ctx.cfg = resolve_config(config);
  ctx.seed = seed.value_or(ctx.cfg["seeds"]["rng"].get<std::uint64_t>());
  ctx.refine = refine;

  if (command == "delta") run_delta(ctx);
  else if (command == "decay") run_decay(ctx);
  else if (command == "covariance") run_covariance(ctx);
  else if (command == "gauge-check") run_gauge(ctx);
  else if (command == "transitivity") run_transitivity(ctx);
  else if (command == "corner") run_corner(ctx);
  else run_unitality(ctx);

  Report rep;
  rep.passed = ctx.records.ok;
  rep.curves = std::move(ctx.curves);
  json curve_names = json::array();
  for (const auto& c : rep.curves) curve_names.push_back(c.name + ".csv");
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  rep.document = {{"experiment", command},
                  {"config", ctx.cfg},
                  {"seed", ctx.seed},
                  {"refine", refine},
                  {"records", std::move(ctx.records.list)},
                  {"findings", std::move(ctx.findings)},
                  {"curves", curve_names},
                  {"pass", rep.passed},
                  {"wall_time_s", wall}};
  return rep;
}

std::string csv_text(const CsvTable& table) {
  std::ostringstream os;
  os.precision(17);
  os << "index,value,bound\n";
  for (const auto& r : table.rows) os << r[0] << ',' << r[1] << ',' << r[2] << '\n';
  return os.str();
}

json without_timestamps(json report) {
  report.erase("wall_time_s");
  return report;
}

}  // namespace cpflow::experiments
