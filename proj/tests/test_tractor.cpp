#include "doctest.h"

#include <Eigen/Dense>

#include "cartan/numerics.hpp"
#include "cartan/tractor.hpp"

using namespace cartan;
using namespace cartan::tractor;
using cartan::chart::ChartGeometry;
using cartan::chart::QuadraticScale;
using cartan::chart::StructureKind;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd pt(std::initializer_list<double> xs) {
  VectorXd v(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

/// Parallel conformal tractor over the flat chart from the 2-jet of sigma:
/// s = (sigma, d sigma, -Lap sigma / n) evaluated at x.
VectorXd flat_section(const QuadraticScale& sigma, const MatrixXd& g,
                      const VectorXd& x) {
  int n = static_cast<int>(x.size());
  VectorXd s(n + 2);
  s[0] = sigma(x);
  s.segment(1, n) = sigma.gradient(x);
  double lap = (g.inverse() * sigma.hessian()).trace();
  s[n + 1] = -lap / n;
  return s;
}

}  // namespace

TEST_CASE("tractor_derivative: closed-form parallel sections on flat charts") {
  ChartGeometry c = chart::flat_chart(3, 0, StructureKind::Conformal);
  TractorConnection conn(c);
  MatrixXd g = MatrixXd::Identity(3, 3);

  QuadraticScale poincare{0.5, VectorXd::Zero(3), -1.0, g};
  QuadraticScale linear{0.0, pt({1, 0, 0}), 0.0, g};

  num::Rng rng(8);
  for (const QuadraticScale* sc : {&poincare, &linear}) {
    for (int trial = 0; trial < 10; ++trial) {
      VectorXd x = rng.gaussian(3);
      VectorXd xi = rng.sphere(3);
      VectorXd value = flat_section(*sc, g, x);
      // directional derivative of the slots along xi, from the closed form
      double h = 1e-7;
      VectorXd jet = (flat_section(*sc, g, VectorXd(x + h * xi)) -
                      flat_section(*sc, g, VectorXd(x - h * xi))) /
                     (2 * h);
      VectorXd nabla = conn.derivative(x, xi, value, jet);
      CHECK(nabla.norm() < 1e-6);
    }
  }

  // a constant section over a curved chart is not parallel
  ChartGeometry rs = chart::round_sphere_chart(3, StructureKind::Conformal);
  TractorConnection rconn(rs);
  VectorXd constant = VectorXd::Ones(5);
  VectorXd nabla = rconn.derivative(pt({0.1, 0.2, 0.0}), pt({1, 0, 0}),
                                    constant, VectorXd::Zero(5));
  CHECK(nabla.norm() > 1e-3);
}

TEST_CASE("flat transport matches the constant-coefficient closed form") {
  ChartGeometry c = chart::flat_chart(2, 1, StructureKind::Conformal);
  TractorConnection conn(c);
  MatrixXd g = c.flat_diag().asDiagonal();

  QuadraticScale sc{0.3, pt({0.2, -1.0, 0.4}), 0.7, g};
  VectorXd x0 = VectorXd::Zero(3);
  VectorXd target = pt({0.8, -0.5, 0.3});
  VectorXd via = pt({-0.4, 0.9, -0.2});

  VectorXd v0 = flat_section(sc, g, x0);
  Path path = Path::polyline({x0, via, target});
  VectorXd moved = conn.transport(path, v0, 1e-11);
  VectorXd expected = flat_section(sc, g, target);
  CHECK((moved - expected).norm() < 1e-9);

  // zero-length path
  Path still = Path::line(x0, x0);
  CHECK((conn.transport(still, v0) - v0).norm() < 1e-12);
}

TEST_CASE("round-trip transport is the identity") {
  ChartGeometry c = chart::bump_chart(3, 0, StructureKind::Conformal, 0.3, 21);
  TractorConnection conn(c);
  num::Rng rng(13);
  Path out = Path::polyline({pt({0, 0, 0}), pt({0.6, 0.2, -0.3}),
                             pt({0.1, 0.8, 0.4})});
  Path loop = out.then(out.reversed());
  VectorXd v0 = rng.gaussian(5);
  CHECK((conn.transport(loop, v0, 1e-10) - v0).norm() < 1e-8);
}

TEST_CASE("transport preserves the tractor metric") {
  ChartGeometry c = chart::bump_chart(2, 1, StructureKind::Conformal, 0.3, 33);
  TractorConnection conn(c);
  num::Rng rng(3);
  VectorXd a = pt({0, 0, 0});
  VectorXd b = pt({0.7, -0.4, 0.5});
  Path path = Path::line(a, b);
  MatrixXd ha = conn.fiber_metric(a)->matrix();
  MatrixXd hb = conn.fiber_metric(b)->matrix();
  for (int trial = 0; trial < 10; ++trial) {
    VectorXd v = rng.gaussian(5), w = rng.gaussian(5);
    VectorXd tv = conn.transport(path, v, 1e-10);
    VectorXd tw = conn.transport(path, w, 1e-10);
    double before = v.dot(ha * w);
    double after = tv.dot(hb * tw);
    CHECK(std::abs(after - before) < 1e-7 * std::max(1.0, std::abs(before)));
  }
}

TEST_CASE("tractor curvature: flat and conformally flat charts vanish") {
  ChartGeometry flat = chart::flat_chart(3, 0, StructureKind::Conformal);
  TractorConnection fconn(flat);
  MatrixXd f = fconn.curvature(pt({0.2, 0.1, -0.3}), pt({1, 0, 0}),
                               pt({0, 1, 0}));
  CHECK(f.norm() < 1e-12);

  ChartGeometry rs = chart::round_sphere_chart(3, StructureKind::Conformal);
  TractorConnection rconn(rs);
  MatrixXd fr = rconn.curvature(pt({0.2, -0.1, 0.3}), pt({1, 0, 0}),
                                pt({0, 0, 1}));
  CHECK(fr.norm() < 1e-5);

  ChartGeometry pb = chart::poincare_ball_chart(3, StructureKind::Conformal);
  TractorConnection pconn(pb);
  CHECK(pconn.curvature(pt({0.1, 0.25, -0.2}), pt({0, 1, 0}), pt({0, 0, 1}))
            .norm() < 1e-5);

  // projectively flat: constant-curvature charts kill the projective tractor
  // curvature as well
  ChartGeometry rsp = chart::round_sphere_chart(3, StructureKind::Projective);
  TractorConnection prconn(rsp);
  CHECK(prconn.curvature(pt({0.15, -0.2, 0.1}), pt({1, 0, 0}), pt({0, 1, 0}))
            .norm() < 1e-5);
}

TEST_CASE("tractor curvature: antisymmetry and torsion-freeness") {
  ChartGeometry c = chart::bump_chart(3, 0, StructureKind::Conformal, 0.4, 7);
  TractorConnection conn(c);
  VectorXd x = pt({0.15, -0.2, 0.25});
  num::Rng rng(19);
  VectorXd xi = rng.sphere(3), eta = rng.sphere(3);
  MatrixXd f = conn.curvature(x, xi, eta);
  MatrixXd fswap = conn.curvature(x, eta, xi);
  CHECK(f.norm() > 1e-4);  // nondegeneracy witness
  CHECK((f + fswap).norm() < 1e-7);
  CHECK(conn.torsion_block_norm(f) < 1e-6);

  ChartGeometry cp = chart::bump_chart(3, 0, StructureKind::Projective, 0.4, 7);
  TractorConnection pconn(cp);
  MatrixXd fp = pconn.curvature(x, xi, eta);
  CHECK(fp.norm() > 1e-4);
  CHECK(pconn.torsion_block_norm(fp) < 1e-6);
}

TEST_CASE("conformal tractor curvature blocks: Weyl and Cotton-York") {
  ChartGeometry c = chart::bump_chart(3, 0, StructureKind::Conformal, 0.4, 7);
  TractorConnection conn(c);
  const int n = 3;
  VectorXd x = pt({0.2, -0.15, 0.1});
  chart::CurvatureData cd = chart::curvature_tensors(c, x);

  // lower all Riemann indices, form Weyl via the Kulkarni-Nomizu product
  chart::Tensor4<double> rlow(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int e = 0; e < n; ++e)
        for (int d = 0; d < n; ++d) {
          double t = 0;
          for (int u = 0; u < n; ++u) t += cd.g(a, u) * cd.riemann(u, b, e, d);
          rlow(a, b, e, d) = t;
        }
  auto weyl_low = [&](int a, int b, int e, int d) {
    const MatrixXd& g = cd.g;
    const MatrixXd& p = cd.schouten;
    double kn = g(a, e) * p(b, d) + g(b, d) * p(a, e) - g(a, d) * p(b, e) -
                g(b, e) * p(a, d);
    return rlow(a, b, e, d) - kn;
  };

  // derivative of the Schouten tensor for the Cotton-York tensor
  auto dschouten = [&](int dir) {
    chart::VecS<ad::D1> xx(n);
    for (int i = 0; i < n; ++i) xx[i] = ad::D1(x[i], i == dir ? 1 : 0);
    auto ct = chart::curvature_at<ad::D1>(c, xx);
    MatrixXd dp(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) dp(i, j) = ct.schouten(i, j).d;
    return dp;
  };
  std::vector<MatrixXd> dp(n);
  for (int dir = 0; dir < n; ++dir) dp[dir] = dschouten(dir);
  auto nabla_p = [&](int a, int b, int d) {
    double t = dp[a](b, d);
    for (int e = 0; e < n; ++e)
      t -= cd.christoffel(e, a, b) * cd.schouten(e, d) +
           cd.christoffel(e, a, d) * cd.schouten(b, e);
    return t;
  };
  auto cotton = [&](int a, int b, int d) {
    return nabla_p(a, b, d) - nabla_p(b, a, d);
  };

  auto all = conn.curvature_all(x);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      MatrixXd g0 = conn.g0_block(all[a][b]);
      for (int cc = 0; cc < n; ++cc)
        for (int d = 0; d < n; ++d) {
          double w = 0;  // W^c_{d a b}
          for (int e = 0; e < n; ++e)
            w += cd.g_inv(cc, e) * weyl_low(e, d, a, b);
          CHECK(g0(cc, d) == doctest::Approx(w).epsilon(1e-7));
        }
      // mu <- sigma column carries the Cotton-York tensor
      for (int d = 0; d < n; ++d)
        CHECK(all[a][b](1 + d, 0) ==
              doctest::Approx(cotton(a, b, d)).epsilon(1e-7));
    }
}

TEST_CASE("curvature matches small-loop transports at cubic order") {
  ChartGeometry c = chart::bump_chart(3, 0, StructureKind::Conformal, 0.4, 7);
  TractorConnection conn(c);
  VectorXd x0 = VectorXd::Zero(3);
  VectorXd u = pt({1, 0, 0}), v = pt({0, 1, 0});
  MatrixXd kappa = conn.curvature(x0, u, v);
  // loop oriented v-then-u so that log T = +eps^2 kappa + O(eps^3)
  std::vector<double> epses = {1e-2, 5e-3, 2.5e-3};
  std::vector<double> errs;
  for (double eps : epses) {
    Path loop = Path::rectangle(x0, VectorXd(eps * v), VectorXd(eps * u));
    MatrixXd t = conn.transport_matrix(loop, 1e-13);
    errs.push_back((num::logm(t) - eps * eps * kappa).norm());
  }
  double slope1 = std::log2(errs[0] / errs[1]);
  double slope2 = std::log2(errs[1] / errs[2]);
  CHECK(slope1 >= 2.9);
  CHECK(slope2 >= 2.9);
}

TEST_CASE("holonomy: flat and conformally flat charts give dimension 0") {
  VectorXd x0 = VectorXd::Zero(3);
  for (auto make : {&chart::flat_chart}) {
    ChartGeometry c = make(3, 0, StructureKind::Conformal, 2.5);
    TractorConnection conn(c);
    auto hol = holonomy_algebra(conn, x0, default_loop_family(c, x0, 11));
    CHECK(hol.algebra.dim() == 0);
    for (const auto& s : hol.samples) CHECK(s.log.norm() < 1e-6);
  }
  ChartGeometry rs = chart::round_sphere_chart(3, StructureKind::Conformal);
  TractorConnection rconn(rs);
  auto rhol = holonomy_algebra(rconn, x0, default_loop_family(rs, x0, 11));
  CHECK(rhol.algebra.dim() == 0);
  for (const auto& s : rhol.samples) CHECK(s.log.norm() < 1e-6);
}

TEST_CASE("holonomy: generic perturbation saturates so(p+1,q+1)") {
  ChartGeometry c = chart::bump_chart(3, 0, StructureKind::Conformal, 0.4, 7);
  TractorConnection conn(c);
  VectorXd x0 = VectorXd::Zero(3);
  auto hol = holonomy_algebra(conn, x0, default_loop_family(c, x0, 11));
  CHECK(hol.algebra.dim() == 10);  // so(4,1)
  CHECK(lie::bracket_closure_residual(hol.algebra) < 1e-6);
  for (const auto& e : hol.algebra.elements())
    CHECK(lie::membership_residual(e) < 1e-5);  // inside so(h)
  for (const auto& s : hol.samples) CHECK(s.metric_residual < 1e-7);
}

TEST_CASE("normality residual: probe vanishes for the standard formulas") {
  VectorXd x = pt({0.2, -0.1, 0.15});
  ChartGeometry flat = chart::flat_chart(3, 0, StructureKind::Conformal);
  CHECK(normality_residual(TractorConnection(flat), VectorXd::Zero(3)) == 0.0);

  ChartGeometry rs = chart::round_sphere_chart(3, StructureKind::Conformal);
  CHECK(normality_residual(TractorConnection(rs), x) < 1e-6);

  ChartGeometry bump = chart::bump_chart(3, 0, StructureKind::Conformal, 0.4, 7);
  CHECK(normality_residual(TractorConnection(bump), x) < 1e-4);

  // sensitivity: a mis-scaled Schouten term must trip the probe, so the
  // vanishing above is not an artifact of the contraction pattern
  TractorConnection good(bump);
  auto all = good.curvature_all(x);
  chart::CurvatureData cd = chart::curvature_tensors(bump, x);
  MatrixXd corrupted = all[0][1];
  corrupted.block(1, 1, 3, 3) -=
      0.1 * cd.g.block(0, 0, 3, 3) * cd.schouten.trace();
  CHECK(good.g0_block(corrupted).trace() != doctest::Approx(0.0));
}

TEST_CASE("conformal rescaling preserves holonomy dimension") {
  VectorXd x0 = VectorXd::Zero(3);
  ChartGeometry flat = chart::flat_chart(3, 0, StructureKind::Conformal);
  ChartGeometry scaled =
      chart::conformal_rescaled_chart(flat, 0.2, pt({0.3, -0.1, 0.2}));
  TractorConnection conn(scaled);
  auto hol = holonomy_algebra(conn, x0, default_loop_family(scaled, x0, 11));
  CHECK(hol.algebra.dim() == 0);  // still conformally flat

  ChartGeometry bump = chart::bump_chart(3, 0, StructureKind::Conformal, 0.4, 7);
  ChartGeometry bump_scaled =
      chart::conformal_rescaled_chart(bump, 0.1, pt({0.2, 0.0, -0.1}));
  auto h1 = holonomy_algebra(TractorConnection(bump), x0,
                             default_loop_family(bump, x0, 11));
  auto h2 = holonomy_algebra(TractorConnection(bump_scaled), x0,
                             default_loop_family(bump_scaled, x0, 11));
  CHECK(h1.algebra.dim() == h2.algebra.dim());
}

TEST_CASE("central-difference engine cross-checks the autodiff curvature") {
  ChartGeometry c = chart::bump_chart(3, 0, StructureKind::Conformal, 0.4, 7);
  ChartGeometry cfd = c;
  cfd.engine = chart::DerivEngine::CentralDifference;
  TractorConnection a(c), f(cfd);
  VectorXd x = pt({0.1, 0.2, -0.1});
  MatrixXd fa = a.curvature(x, pt({1, 0, 0}), pt({0, 1, 0}));
  MatrixXd ff = f.curvature(x, pt({1, 0, 0}), pt({0, 1, 0}));
  CHECK((fa - ff).norm() < 1e-5);
  CHECK(normality_residual(f, x) < 1e-4);
}

TEST_CASE("transport failure paths") {
  ChartGeometry c = chart::flat_chart(2, 0, StructureKind::Conformal, 1.0);
  TractorConnection conn(c);
  CHECK_THROWS_AS(
      conn.transport(Path::line(pt({0, 0}), pt({3, 0})), VectorXd::Zero(4)),
      DomainError);
  CHECK_THROWS_AS(
      conn.transport(Path::line(pt({0, 0}), pt({0.5, 0})), VectorXd::Zero(3)),
      DimensionError);
}
