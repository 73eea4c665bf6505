#include <doctest.h>

#include <cmath>
#include <random>

#include "cpflow/gauge.hpp"

using namespace cpflow;

namespace {

std::vector<cplx> sample_z(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> d;
  std::vector<cplx> zs;
  for (int i = 0; i < n; ++i) zs.push_back({d(rng), d(rng)});
  return zs;
}

}  // namespace

TEST_CASE("actions on units") {
  const auto id = act(GaugeParam::identity(), cplx(2.0, -1.0));
  CHECK(id.label == cplx(2.0, -1.0));
  CHECK(std::abs(id.rate) == 0.0);

  const auto tr = act(GaugeParam::unitary(1.0, 1.0, 0.0), 0.0);
  CHECK(std::abs(tr.label - 1.0) < 1e-15);
  CHECK(std::abs(tr.rate) < 1e-15);

  const auto fl = act(GaugeParam::flow(0.5), 2.0);
  CHECK(std::abs(fl.label - 1.0) < 1e-15);
  CHECK(std::abs(fl.rate + 1.5) < 1e-15);
}

TEST_CASE("validation") {
  CHECK_THROWS_AS(GaugeParam::unitary(0.5, 1.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(validate(GaugeParam::contractive(1.5, 0.0, 0.0, 0.0)), InvalidArgument);
  CHECK_THROWS_AS(validate(GaugeParam::contractive(0.5, 0.0, 0.0, -1.0)), InvalidArgument);
  GaugeParam iso{1.0, 1.0, -1.0, 0.5, GaugeClass::Isometric};
  CHECK_THROWS_AS(validate(iso), InvalidArgument);
  CHECK_NOTHROW(validate(iso, GaugeOptions{true}));
}

TEST_CASE("adjoint") {
  CHECK(parameter_distance(adjoint(GaugeParam::identity()), GaugeParam::identity()) == 0.0);
  std::mt19937_64 rng(1);
  const auto g = random_contractive(rng);
  CHECK(parameter_distance(adjoint(adjoint(g)), g) == 0.0);
  const cplx a = std::polar(1.0, 0.7), b(0.3, -1.2);
  const auto u = GaugeParam::unitary(a, b, 0.4);
  for (cplx z : sample_z(rng, 5)) {
    CHECK(std::abs(act(adjoint(u), z).label - std::conj(a) * (z - b)) < 1e-14);
  }
}

TEST_CASE("composition") {
  std::mt19937_64 rng(2);
  const auto g = random_contractive(rng);
  CHECK(parameter_distance(compose(GaugeParam::identity(), g), g) < 1e-15);

  const auto ff = compose(GaugeParam::flow(cplx(0.5, 0.2)), GaugeParam::flow(0.3));
  CHECK(std::abs(ff.a - cplx(0.15, 0.06)) < 1e-15);
  CHECK(std::abs(ff.b) + std::abs(ff.c) + std::abs(ff.y) == 0.0);
  CHECK(r_correction(GaugeParam::flow(0.5), GaugeParam::flow(0.3)) == 0.0);

  const auto u = GaugeParam::unitary(std::polar(1.0, 1.1), cplx(0.4, 0.9), 0.3);
  CHECK(parameter_distance(compose(u, adjoint(u)), GaugeParam::identity()) < 1e-14);
  const auto zs = sample_z(rng, 20);
  CHECK(action_composition_residual(u, adjoint(u), zs) < 1e-13);
}

TEST_CASE("action composition oracle") {
  std::mt19937_64 rng(3);
  const auto zs = sample_z(rng, 100);
  CHECK(action_composition_residual(random_contractive(rng), GaugeParam::identity(), zs) < 1e-13);
  for (int i = 0; i < 200; ++i) {
    CHECK(action_composition_residual(random_unitary(rng), random_unitary(rng), zs) < 1e-12);
    CHECK(action_composition_residual(random_flow(rng), random_flow(rng), zs) < 1e-12);
    CHECK(action_composition_residual(random_contractive(rng), random_contractive(rng), zs) <
          1e-11);
  }
  // the printed sign convention fails already on unitaries
  const auto g = GaugeParam::unitary(1.0, cplx(0, 1), 0.0);
  const auto gp = GaugeParam::unitary(1.0, 1.0, 0.0);
  const auto rep = discrepancy_report({{g, gp}}, {cplx(0.5, 0.25)});
  REQUIRE(rep.size() == 1);
  CHECK(rep[0].printed_residual > 1.0);
  CHECK(rep[0].consistent_residual < 1e-14);
}

TEST_CASE("group and monoid axioms") {
  std::mt19937_64 rng(4);
  double r_min = 1.0;
  for (int i = 0; i < 1000; ++i) {
    const auto u1 = random_unitary(rng), u2 = random_unitary(rng), u3 = random_unitary(rng);
    CHECK(associativity_residual(u1, u2, u3) < 1e-12);
    const auto u12 = compose(u1, u2);
    CHECK(u12.cls == GaugeClass::Unitary);
    CHECK_NOTHROW(validate(u12));
    const auto c1 = random_contractive(rng), c2 = random_contractive(rng);
    CHECK(associativity_residual(c1, c2, random_contractive(rng)) < 1e-12);
    CHECK(compose(c1, c2).y.real() >= -1e-12);
    r_min = std::min(r_min, r_correction(c1, c2));
  }
  CHECK(r_min >= -1e-12);
}

TEST_CASE("transitivity") {
  const auto a1 = pair_reachable({0.0, 1.0}, {0.0, cplx(0, 1)}, AllowedSet::AEqualsOne);
  CHECK_FALSE(a1.reachable);
  CHECK(std::abs(a1.a - cplx(0, 1)) < 1e-15);
  CHECK(a1.obstruction.find("a = 0+1i") != std::string::npos);

  const auto rot = pair_reachable({0.0, 1.0}, {0.0, cplx(0, 1)}, AllowedSet::UnitCircle);
  CHECK(rot.reachable);
  CHECK(std::abs(rot.a - cplx(0, 1)) < 1e-15);
  CHECK(std::abs(rot.b) < 1e-15);

  const auto same = pair_reachable({cplx(1, 2), 3.0}, {cplx(1, 2), 3.0}, AllowedSet::AEqualsOne);
  CHECK(same.reachable);
  CHECK(same.a == 1.0);
  CHECK(same.b == 0.0);
  CHECK_THROWS_AS(pair_reachable({1.0, 1.0}, {0.0, 1.0}, AllowedSet::AEqualsOne), InvalidArgument);

  std::mt19937_64 rng(5);
  const auto zs = sample_z(rng, 200);
  for (int i = 0; i < 100; ++i) {
    const auto r = unit_reachable(zs[2 * i], zs[2 * i + 1], AllowedSet::AEqualsOne);
    CHECK(r.reachable);
    CHECK(std::abs(zs[2 * i] + r.b - zs[2 * i + 1]) < 1e-14);
  }
}
