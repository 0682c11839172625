#include "doctest.h"

#include <Eigen/Dense>

#include "cartan/lie.hpp"
#include "cartan/numerics.hpp"

using namespace cartan;
using namespace cartan::lie;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

AlgebraElement gl_elem(const MatrixXd& m) {
  return {m, StructureTag::gl(static_cast<int>(m.rows()))};
}

MatrixXd random_matrix(num::Rng& rng, int n, double scale = 1.0) {
  MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = scale * rng.uniform(-1, 1);
  return m;
}

}  // namespace

TEST_CASE("standard basis dimensions") {
  CHECK(gl_basis(3).dim() == 9);
  CHECK(sl_basis(4).dim() == 15);
  CHECK(so_basis(forms::SymmetricForm::standard(3, 2)).dim() == 10);
  CHECK(sl_complex_basis(3).dim() == 16);
  CHECK(su_basis(forms::HermitianForm::standard(1, 2)).dim() == 8);

  AlgebraBasis so22 = so_basis(forms::SymmetricForm::standard(2, 2));
  for (const auto& e : so22.elements()) CHECK(membership_residual(e) < 1e-12);
  AlgebraBasis su21 = su_basis(forms::HermitianForm::standard(2, 1));
  for (const auto& e : su21.elements()) CHECK(membership_residual(e) < 1e-12);
}

TEST_CASE("bracket: so(3) relations and antisymmetry") {
  auto so3 = so_basis(forms::SymmetricForm::standard(3, 0));
  // standard generators L1 = E32 - E23 etc.
  MatrixXd l1 = MatrixXd::Zero(3, 3), l2 = MatrixXd::Zero(3, 3),
           l3 = MatrixXd::Zero(3, 3);
  l1(2, 1) = 1;
  l1(1, 2) = -1;
  l2(0, 2) = 1;
  l2(2, 0) = -1;
  l3(1, 0) = 1;
  l3(0, 1) = -1;
  CHECK((bracket(gl_elem(l1), gl_elem(l2)).m - l3).norm() < 1e-14);

  num::Rng rng(5);
  MatrixXd a = random_matrix(rng, 4);
  CHECK(bracket(gl_elem(a), gl_elem(a)).m.norm() == 0.0);

  MatrixXd b(3, 3);
  CHECK_THROWS_AS(bracket(gl_elem(a), gl_elem(MatrixXd::Zero(3, 3))),
                  DimensionError);
}

TEST_CASE("bracket reproduces the rotation-algebra pairing on vectors") {
  // In so(p,q) presented as [[0, -Y^t I],[Y, A]], embedded vectors satisfy
  // [[Y1,Y2],Z] = <Y1,Z> Y2 - <Y2,Z> Y1 after projecting to the vector slot.
  int p = 3, q = 1;  // block form I_{p-1,q}
  int n = p - 1 + q;
  MatrixXd iblock = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) iblock(i, i) = i < p - 1 ? 1.0 : -1.0;
  auto embed = [&](const VectorXd& y) {
    MatrixXd m = MatrixXd::Zero(n + 1, n + 1);
    m.block(1, 0, n, 1) = y;
    m.block(0, 1, 1, n) = -(iblock * y).transpose();
    return gl_elem(m);
  };
  auto vector_slot = [&](const MatrixXd& m) {
    return VectorXd(m.block(1, 0, n, 1));
  };

  num::Rng rng(17);
  for (int trial = 0; trial < 25; ++trial) {
    VectorXd y1 = rng.gaussian(n), y2 = rng.gaussian(n), z = rng.gaussian(n);
    MatrixXd lhs = bracket(bracket(embed(y1), embed(y2)), embed(z)).m;
    VectorXd expected = y1.dot(iblock * z) * y2 - y2.dot(iblock * z) * y1;
    CHECK((vector_slot(lhs) - expected).norm() < 1e-12);
  }

  // the specific instance Y1 = e1, Y2 = e2, Z = e1
  VectorXd e1 = VectorXd::Zero(n), e2 = VectorXd::Zero(n);
  e1[0] = 1;
  e2[1] = 1;
  MatrixXd lhs = bracket(bracket(embed(e1), embed(e2)), embed(e1)).m;
  CHECK((vector_slot(lhs) - e2).norm() < 1e-14);
}

TEST_CASE("exponential: identity, rotation by pi, nilpotent") {
  MatrixXd z = MatrixXd::Zero(3, 3);
  CHECK((exponential(gl_elem(z)).m - MatrixXd::Identity(3, 3)).norm() < 1e-14);

  MatrixXd rot(2, 2);
  rot << 0, -M_PI, M_PI, 0;
  CHECK((exponential(gl_elem(rot)).m + MatrixXd::Identity(2, 2)).norm() < 1e-12);

  MatrixXd nil = MatrixXd::Zero(3, 3);
  nil(0, 1) = 1.0;
  nil(1, 2) = 1.0;
  MatrixXd expected = MatrixXd::Identity(3, 3) + nil + 0.5 * nil * nil;
  CHECK((exponential(gl_elem(nil)).m - expected).norm() < 1e-13);
}

TEST_CASE("exponential group laws") {
  num::Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    MatrixXd a = random_matrix(rng, 4);
    double s = rng.uniform(-1, 1), t = rng.uniform(-1, 1);
    MatrixXd lhs = exponential(gl_elem((s + t) * a)).m;
    MatrixXd rhs = exponential(gl_elem(s * a)).m * exponential(gl_elem(t * a)).m;
    CHECK((lhs - rhs).norm() < 1e-9 * std::max(1.0, rhs.norm()));

    MatrixXd inv_check = exponential(gl_elem(a)).m * exponential(gl_elem(-a)).m;
    CHECK((inv_check - MatrixXd::Identity(4, 4)).norm() < 1e-10);
  }
}

TEST_CASE("adjoint: identity, automorphism, exp series") {
  num::Rng rng(31);
  MatrixXd a = random_matrix(rng, 4), b = random_matrix(rng, 4);
  GroupElement id{MatrixXd::Identity(4, 4), StructureTag::gl(4)};
  CHECK((adjoint(id, gl_elem(a)).m - a).norm() == 0.0);

  GroupElement g = exponential(gl_elem(random_matrix(rng, 4, 0.5)));
  MatrixXd lhs = adjoint(g, bracket(gl_elem(a), gl_elem(b))).m;
  MatrixXd rhs = bracket(adjoint(g, gl_elem(a)), adjoint(g, gl_elem(b))).m;
  CHECK((lhs - rhs).norm() < 1e-10 * std::max(1.0, rhs.norm()));

  // Ad(exp(X)) A = sum ad_X^k(A)/k! for small X
  MatrixXd x = random_matrix(rng, 4, 0.05);
  MatrixXd series = a;
  MatrixXd term = a;
  for (int k = 1; k <= 12; ++k) {
    term = (x * term - term * x) / k;
    series += term;
  }
  MatrixXd direct = adjoint(exponential(gl_elem(x)), gl_elem(a)).m;
  CHECK((direct - series).norm() < 1e-8);
}

TEST_CASE("jacobi identity on random triples") {
  num::Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    AlgebraElement a = gl_elem(random_matrix(rng, 4));
    AlgebraElement b = gl_elem(random_matrix(rng, 4));
    AlgebraElement c = gl_elem(random_matrix(rng, 4));
    MatrixXd r = bracket(a, bracket(b, c)).m + bracket(b, bracket(c, a)).m +
                 bracket(c, bracket(a, b)).m;
    CHECK(r.cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("stabilizer of I_{p,q} inside sl(n+1) is so(p,q)") {
  for (auto [p, q] : {std::pair{3, 1}, std::pair{2, 2}, std::pair{4, 0}}) {
    int m = p + q;
    auto ambient = sl_basis(m);
    MatrixXd ipq = forms::SymmetricForm::standard(p, q).matrix();
    auto action = [&](const MatrixXd& a) {
      MatrixXd r = act_on_form(a, ipq);
      return VectorXd(Eigen::Map<VectorXd>(r.data(), r.size()));
    };
    AlgebraBasis stab = stabilizer_algebra(ambient, action);
    CHECK(stab.dim() == m * (m - 1) / 2);
    CHECK(bracket_closure_residual(stab) < 1e-8);
  }
}

TEST_CASE("stabilizer of v = 0 is everything") {
  auto ambient = sl_basis(3);
  auto action = [&](const MatrixXd& a) {
    return VectorXd(a * VectorXd::Zero(3));
  };
  CHECK(stabilizer_algebra(ambient, action).dim() == ambient.dim());
}

TEST_CASE("three-form machinery and G2 stabilizer dimensions") {
  ThreeForm split = split_g2_three_form();
  CHECK(split.max_antisymmetry_residual() == 0.0);

  MatrixXd b = split.induced_bilinear_form();
  MatrixXd expected = 6.0 * forms::SymmetricForm::standard(3, 4).matrix();
  CHECK((b - expected).norm() < 1e-10);

  // stabilizer inside so(3,4) w.r.t. the induced form: split G2, dim 14
  forms::SymmetricForm f(MatrixXd(b / 6.0));
  auto ambient = so_basis(f);
  REQUIRE(ambient.dim() == 21);
  auto action = [&](const MatrixXd& a) {
    return split.algebra_act(a).flatten();
  };
  AlgebraBasis stab = stabilizer_algebra(ambient, action);
  CHECK(stab.dim() == 14);
  CHECK(bracket_closure_residual(stab) < 1e-8);

  // the definite-type companion: stabilizer inside so(7), also dim 14
  ThreeForm compact = compact_g2_three_form();
  MatrixXd bc = compact.induced_bilinear_form();
  CHECK((bc - 6.0 * MatrixXd::Identity(7, 7)).norm() < 1e-10);
  auto ambient7 = so_basis(forms::SymmetricForm::standard(7, 0));
  auto action7 = [&](const MatrixXd& a) {
    return compact.algebra_act(a).flatten();
  };
  CHECK(stabilizer_algebra(ambient7, action7).dim() == 14);
}

TEST_CASE("intersect_algebras: equal, conformal stabilizer pair, transverse") {
  auto a = so_basis(forms::SymmetricForm::standard(2, 1));
  CHECK(intersect_algebras(a, a).dim() == a.dim());
  CHECK(intersect_algebras(a, a).spans_same(a));

  // transverse complementary spans inside gl(2)
  MatrixXd e00 = MatrixXd::Zero(2, 2), e11 = MatrixXd::Zero(2, 2);
  e00(0, 0) = 1;
  e11(1, 1) = 1;
  AlgebraBasis x({{e00, StructureTag::gl(2)}});
  AlgebraBasis y({{e11, StructureTag::gl(2)}});
  CHECK(intersect_algebras(x, y).dim() == 0);
}

TEST_CASE("su basis and membership") {
  auto f = forms::HermitianForm::standard(2, 1);
  auto basis = su_basis(f);
  CHECK(basis.dim() == 8);  // su(2,1)
  CHECK(bracket_closure_residual(basis) < 1e-10);
  for (const auto& e : basis.elements()) CHECK(membership_residual(e) < 1e-10);
}
