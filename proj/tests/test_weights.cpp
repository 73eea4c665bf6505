#include <doctest.h>

#include <cmath>
#include <random>

#include "cpflow/weights.hpp"

using namespace cpflow;

namespace {

const LambdaSequence kLin = LambdaSequence::linear();

ProductVector head3() {
  ProductVector f;
  for (int i = 1; i <= 3; ++i) {
    f.head.push_back(ExpKernelVector::reference(i) +
                     ExpKernelVector::exponential(0.5 * i * i + 0.5, cplx(0.2, -0.1 * i)));
  }
  return f;
}

// first factor orthogonal to e^{-x} times the other: kills every n >= 1 term
std::pair<ProductVector, ProductVector> nilpotent_pair() {
  ProductVector f, g;
  f.head = {ExpKernelVector::exponential(1.0), ExpKernelVector::reference(2.0)};
  g.head = {ExpKernelVector::exponential(1.0, 3.0) + ExpKernelVector::exponential(2.0, -4.0),
            ExpKernelVector::exponential(1.5)};
  return {f, g};
}

HOperator windowed_identity(double from) {
  return {HOp{ElemTensor::identity(), FactorOp::mult(0.0, from, kInf)}};
}

BoundaryWeight unit_xi() {
  const HVector unit{ProductVector::reference(), ExpKernelVector::reference(1.0)};
  return BoundaryWeight::from_nu(HFunctional::vector_state(unit), kLin);
}

Functional decay_rho() {
  const auto f = head3();
  const auto f0 = ProductVector::reference();
  const auto d = ElemTensor::delta();
  Functional rho;
  rho.add(1.0, f, f);
  rho.add(-matrix_element(f, d, f, kLin) / matrix_element(f0, d, f0, kLin), f0, f0);
  return rho;
}

}  // namespace

TEST_CASE("omega1 basics") {
  const HOperator a{one_minus_lambda()};
  CHECK(omega1(Functional{}, a, kLin).value == 0.0);
  CHECK(is_boundary_element(one_minus_lambda()));
  CHECK_FALSE(is_boundary_element(HOp{ElemTensor::identity(), FactorOp::identity()}));

  const auto [f, g] = nilpotent_pair();
  Functional rho;
  rho.add(1.0, f, g);
  const auto w = windowed_identity(0.5);
  const cplx direct = rho(pi_apply(w.front()), kLin);
  CHECK(std::abs(omega1(rho, w, kLin).value - direct) < 1e-12);
}

TEST_CASE("omega1 normalization on rank states") {
  const auto f0 = ProductVector::reference();
  for (const auto& f : {f0, head3()}) {
    const auto rho = Functional::vector_state(f);
    const cplx lhs = omega1(rho, {one_minus_lambda()}, kLin).value;
    const cplx rhs = rho.trace(kLin) - rho(ElemTensor::delta(), kLin);
    CHECK(std::abs(lhs - rhs) < 1e-8);
    CHECK(lhs.real() <= rho.trace(kLin).real() + 1e-8);
  }
}

TEST_CASE("omega1 terms are positive") {
  const auto f = head3();
  const HOp a = one_minus_lambda();
  const ElemTensor pa = pi_apply(a);
  double partial = 0.0;
  for (int n = 0; n < 12; ++n) {
    const cplx term = matrix_element(f, pi_lambda_power(pa, n), f, kLin);
    CHECK(term.real() >= 0.0);
    CHECK(std::abs(term.imag()) < 1e-14);
    const double next = partial + term.real();
    CHECK(next >= partial);
    partial = next;
  }
}

TEST_CASE("omega^z") {
  const auto rho = Functional::vector_state(head3());
  const HOperator a{one_minus_lambda()};
  CHECK(omega_z(0.0, rho, a, kLin).value == 0.0);
  CHECK(std::abs(omega_z(1.0, rho, a, kLin).value - omega1(rho, a, kLin).value) < 1e-14);
  const double major = omega1(rho, a, kLin).value.real();
  for (cplx z : {cplx(0.5, 0.5), cplx(-0.9, 0.0), cplx(0.0, 1.0)}) {
    CHECK(std::abs(omega_z(z, rho, a, kLin).value) <= major + 1e-10);
  }
  CHECK_THROWS_AS(omega_z(1.5, rho, a, kLin), InvalidArgument);
}

TEST_CASE("derivation identity for omega^z") {
  std::mt19937_64 rng(17);
  const auto f = head3();
  const auto [g, h] = nilpotent_pair();
  Functional rho = Functional::vector_state(f);
  rho.add(0.3, g, h);
  const HOperator a{one_minus_lambda()};
  for (cplx z : {cplx(0.5, 0.3), cplx(-0.7, 0.1)}) {
    const auto lhs_rho = rho + lambda_pi_hat(rho, kLin).scaled(-z);
    const cplx lhs = omega_z(z, lhs_rho, a, kLin).value;
    const cplx rhs = z * rho(pi_apply(a[0]), kLin);
    CHECK(std::abs(lhs - rhs) < 1e-9);
  }
}

TEST_CASE("boundary weight from nu") {
  const auto xi = unit_xi();
  CHECK(std::abs(xi(one_minus_lambda()) - 1.0) < 1e-8);
  CHECK(BoundaryWeight::from_nu(HFunctional{}, kLin).is_zero());

  HFunctional big;
  const HVector v{ProductVector::reference(), ExpKernelVector::reference(1.0).scaled(1.5)};
  big.add(1.0, v, v);
  CHECK_THROWS_AS(BoundaryWeight::from_nu(big, kLin), InvalidArgument);
}

TEST_CASE("nu telescopes along (Lambda pi)^n") {
  const HVector unit{head3(), ExpKernelVector::reference(1.0)};
  const auto nu = HFunctional::vector_state(unit);
  HOp x = one_minus_lambda();
  HOp id{ElemTensor::identity(), FactorOp::identity()};
  cplx sum = 0.0;
  for (int n = 0; n < 6; ++n) {
    sum += nu(x, kLin);
    x = lambda_op(pi_apply(x));
    id = lambda_op(pi_apply(id));
  }
  // (Lambda pi)^6 (I) written as Lambda((pi Lambda)^5 pi(I))
  CHECK(std::abs(sum - (nu(HOp{ElemTensor::identity(), FactorOp::identity()}, kLin) -
                        nu(id, kLin))) < 1e-12);
  CHECK(nu(id, kLin).real() >= nu(lambda_op(ElemTensor::delta()), kLin).real() - 1e-12);
}

TEST_CASE("weights with boundary part") {
  const auto xi = unit_xi();
  const HOperator a{one_minus_lambda()};
  const auto rho0 = decay_rho();
  CHECK(std::abs(rho0(ElemTensor::delta(), kLin)) < 1e-12);
  const cplx w = omega_full(rho0, a, xi, kLin);
  CHECK(std::abs(w - omega1(rho0, a, kLin).value) < 1e-12);

  const auto rho = Functional::vector_state(head3());
  CHECK(std::abs(evaluate_weight(WeightSpec{1.0, BoundaryWeight::zero(kLin)}, rho, a, kLin) -
                 omega1(rho, a, kLin).value) < 1e-14);
  CHECK(std::abs(omega_full(rho, a, xi, kLin) - rho.trace(kLin)) < 1e-8);
}

TEST_CASE("unitality over random dense states") {
  const auto xi = unit_xi();
  const cplx xa = xi(one_minus_lambda());
  auto basis = std::make_shared<ProductBasis>(kLin, 2, 2);
  const MatrixXc delta = basis->matrix(ElemTensor::delta());
  const SeriesEvaluator ev({one_minus_lambda()}, kLin);
  std::mt19937_64 rng(19);
  std::normal_distribution<double> n;
  for (int s = 0; s < 5; ++s) {
    MatrixXc g(4, 4);
    for (int i = 0; i < 16; ++i) g(i / 4, i % 4) = cplx(n(rng), n(rng));
    const MatrixXc d = g * g.adjoint();
    const auto rho = Functional::dense(basis, d);
    const cplx w1 = ev.omega_z(1.0, rho).value;
    const cplx rd = (d * delta).trace();
    CHECK(std::abs(w1 - (d.trace() - rd)) < 1e-8 * d.trace().real());
    CHECK(std::abs(w1 + rd * xa - d.trace()) < 1e-8 * d.trace().real());
  }
}

TEST_CASE("truncated weights") {
  const auto rho = Functional::vector_state(head3());
  const WeightSpec minimal{1.0, std::nullopt};
  const HOperator early{HOp{ElemTensor::identity(), FactorOp::mult(0.0, 0.0, 0.5)}};
  CHECK(std::abs(truncate_weight(minimal, 0.5, kLin)(rho, early)) < 1e-15);
  const HOperator id{HOp{ElemTensor::identity(), FactorOp::identity()}};
  double prev = 0.0;
  for (double t : {2.0, 1.0, 0.5, 0.25}) {
    const double v = truncate_weight(minimal, t, kLin)(rho, id).real();
    CHECK(std::isfinite(v));
    CHECK(v > prev);
    prev = v;
  }
}

TEST_CASE("generalized boundary representation") {
  const auto xi = unit_xi();
  const auto rho = Functional::vector_state(head3());
  const HOp x{ElemTensor::identity(), FactorOp::rank_one(ExpKernelVector::exponential(0.5),
                                                          ExpKernelVector::exponential(1.0))};
  for (const auto& spec : {WeightSpec{1.0, std::nullopt}, WeightSpec{1.0, xi},
                           WeightSpec{cplx(0.0, -1.0), std::nullopt}}) {
    const BoundaryRep rep(spec, 0.5, kLin);
    CHECK(rep.residual(rho, x, 60) < 1e-10);
  }
  const BoundaryRep zero(WeightSpec{0.0, std::nullopt}, 0.5, kLin);
  CHECK(zero.apply(rho, x) == 0.0);
}

TEST_CASE("finite boundary representation") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> n;
  MatrixXc omega(5, 5), lam(5, 5);
  for (int i = 0; i < 25; ++i) {
    omega(i / 5, i % 5) = 0.2 * cplx(n(rng), n(rng));
    lam(i / 5, i % 5) = 0.2 * cplx(n(rng), n(rng));
  }
  const MatrixXc pi = finite_boundary_rep_matrix(omega, lam);
  CHECK((recover_weight_matrix(pi, lam) - omega).norm() < 1e-12);
  VectorXc rho = VectorXc::Random(5);
  const auto r = finite_boundary_rep(omega, lam, rho);
  CHECK(r.residual < 1e-10);
  CHECK((r.value - pi * rho).norm() < 1e-12);

  const MatrixXc bad = -MatrixXc::Identity(5, 5);
  CHECK_THROWS_AS(finite_boundary_rep(bad, MatrixXc::Identity(5, 5), rho), PreconditionViolation);
}

TEST_CASE("decay after the head") {
  const auto curve = lemma_decay_curve(decay_rho(), 8, kLin);
  for (int n = 3; n <= 8; ++n) CHECK(curve.norms[n] <= 1e-12);
  CHECK(curve.norms[0] > 1e-3);

  const auto zero = lemma_decay_curve(Functional{}, 4, kLin);
  for (double v : zero.norms) CHECK(v == 0.0);
  CHECK_THROWS_AS(lemma_decay_curve(Functional::vector_state(ProductVector::reference()), 4, kLin),
                  PreconditionViolation);
}

TEST_CASE("non-normal weight") {
  const auto rows = nonnormal_weight_demo(1.5, 8);
  for (const auto& r : rows) CHECK(r.weight_on_pn < 1e-10);
  CHECK(rows.back().partial_mass > 2.0 * rows.front().partial_mass);
  CHECK(rows.back().boundary_mass < 1.5 * rows.front().boundary_mass + 1.0);
  CHECK_THROWS_AS(nonnormal_weight_demo(2.5, 4), InvalidArgument);
}
