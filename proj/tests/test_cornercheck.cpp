#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "cpflow/cornercheck.hpp"

using namespace cpflow;

namespace {

const LambdaSequence kLin = LambdaSequence::linear();

// superoperator on column-major vec of X -> sum_k K_k X K_k^*
MatrixXc kraus_superop(const std::vector<MatrixXc>& ks) {
  const int dout = static_cast<int>(ks[0].rows());
  const int din = static_cast<int>(ks[0].cols());
  MatrixXc s = MatrixXc::Zero(dout * dout, din * din);
  for (const auto& k : ks) {
    for (int a = 0; a < din; ++a) {
      for (int b = 0; b < din; ++b) {
        const MatrixXc img = k.col(a) * k.col(b).adjoint();
        for (int c = 0; c < dout; ++c) {
          for (int d = 0; d < dout; ++d) s(c + dout * d, a + din * b) += img(c, d);
        }
      }
    }
  }
  return s;
}

BoundaryWeight unit_xi() {
  const HVector unit{ProductVector::reference(), ExpKernelVector::reference(1.0)};
  return BoundaryWeight::from_nu(HFunctional::vector_state(unit), kLin);
}

CornerModel small_model() {
  CornerModel m;
  m.factors = 2;
  m.factor_dim = 2;
  return m;
}

}  // namespace

TEST_CASE("Choi of identity and transpose") {
  const MatrixXc id = kraus_superop({MatrixXc::Identity(3, 3)});
  const MatrixXc c = choi_matrix(id, 3, 3);
  VectorXc omega = VectorXc::Zero(9);
  for (int i = 0; i < 3; ++i) omega(i * 3 + i) = 1.0;
  CHECK((c - omega * omega.adjoint()).norm() < 1e-15);
  const auto v = cp_verdict(c);
  CHECK(v.cp);
  CHECK(std::abs(v.min_eig) < 1e-14);

  MatrixXc t = MatrixXc::Zero(4, 4);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) t(b + 2 * a, a + 2 * b) = 1.0;
  }
  const auto tv = cp_verdict(choi_matrix(t, 2, 2));
  CHECK(tv.min_eig == doctest::Approx(-1.0));
  CHECK_FALSE(tv.cp);
  CHECK_THROWS_AS(choi_matrix(t, 3, 2), InvalidArgument);
}

TEST_CASE("Choi positivity does not depend on the basis order") {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> n;
  std::vector<MatrixXc> ks(2, MatrixXc(3, 4));
  for (auto& k : ks) {
    for (int i = 0; i < 12; ++i) k(i / 4, i % 4) = cplx(n(rng), n(rng));
  }
  // a non-CP map: difference of two CP maps
  const MatrixXc s = kraus_superop({ks[0]}) - 0.5 * kraus_superop({ks[1]});
  std::vector<int> perm(4);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::PermutationMatrix<Eigen::Dynamic> p(4);
  for (int i = 0; i < 4; ++i) p.indices()(i) = perm[i];
  std::vector<MatrixXc> pk;
  for (const auto& k : ks) pk.push_back(k * p);
  const MatrixXc sp = kraus_superop({pk[0]}) - 0.5 * kraus_superop({pk[1]});
  CHECK(std::abs(choi_min_eig(choi_matrix(s, 4, 3)) - choi_min_eig(choi_matrix(sp, 4, 3))) < 1e-10);
}

TEST_CASE("subordination") {
  const MatrixXc a = choi_matrix(kraus_superop({MatrixXc::Identity(2, 2)}), 2, 2);
  CHECK(subordination_check(a, a, 0.5).subordinate);
  MatrixXc t = MatrixXc::Zero(4, 4);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) t(j + 2 * i, i + 2 * j) = 1.0;
  }
  CHECK_THROWS_AS(subordination_check(choi_matrix(t, 2, 2), a, 0.5), PreconditionViolation);
}

TEST_CASE("boundary Choi at small truncation") {
  const auto model = small_model();
  const auto xi = unit_xi();
  const BoundaryChoi bc(model, 0.5);
  CHECK(bc.input_dim() == 8);
  CHECK(bc.output_dim() == 4);
  const MatrixXc m1 = bc.minimal(1.0);
  CHECK(cp_verdict(m1).cp);
  CHECK(std::abs(bc.minimal(0.0).norm()) == 0.0);

  const MatrixXc full = m1 + bc.boundary(xi);
  const WeightSpec spec{1.0, xi};
  const int dout = bc.output_dim();
  for (const auto& [a, b, c, d] : std::vector<std::array<int, 4>>{{0, 0, 0, 0}, {1, 6, 3, 2}}) {
    CHECK(std::abs(bc.entry(spec, a, b, c, d) - full(a * dout + c, b * dout + d)) < 1e-10);
  }
  const MatrixXc beta = bc.beta_matrix(xi);
  CHECK((beta - beta.adjoint()).norm() < 1e-12);
  CHECK(min_eigenvalue_hermitian(beta) >= -1e-12);

  CHECK(subordination_check(full, m1, 0.5).subordinate);
  CHECK_FALSE(cp_verdict(m1 - full).cp);
}

TEST_CASE("hypermaximality witness") {
  const auto model = small_model();
  const auto xi = unit_xi();
  const auto rep = hypermax_witness(-1.0, xi, model, {0.5});
  CHECK(rep.q_positive);
  CHECK(rep.ordered);
  CHECK(rep.gap);
  CHECK(rep.passed());

  CHECK_THROWS_AS(hypermax_witness(1.0, xi, model, {0.5}), DegenerateDirection);
  CHECK_THROWS_AS(hypermax_witness(0.5, xi, model, {0.5}), InvalidArgument);
  const auto degenerate = hypermax_witness(-1.0, BoundaryWeight::zero(kLin), model, {0.5});
  CHECK(degenerate.degenerate);
  CHECK_FALSE(degenerate.gap);

  // putting xi on the off-diagonal breaks positivity for z != 1
  const BoundaryChoi bc(model, 0.5);
  CHECK(offdiagonal_xi_probe(bc, -1.0, xi, 0.0) >= -1e-8);
  CHECK(offdiagonal_xi_probe(bc, -1.0, xi, 0.5) < -1e-3);
}
