#include "cartan/chart.hpp"

#include "cartan/numerics.hpp"

namespace cartan::chart {

VectorXd ChartGeometry::flat_diag() const {
  VectorXd d(dim);
  for (int i = 0; i < dim; ++i) d[i] = i < sig_p ? 1.0 : -1.0;
  return d;
}

namespace {

ChartGeometry base_chart(int p, int q, StructureKind kind, double halfwidth) {
  ChartGeometry c;
  c.dim = p + q;
  c.sig_p = p;
  c.sig_q = q;
  c.kind = kind;
  c.box_lo = VectorXd::Constant(c.dim, -halfwidth);
  c.box_hi = VectorXd::Constant(c.dim, halfwidth);
  return c;
}

}  // namespace

ChartGeometry flat_chart(int p, int q, StructureKind kind, double halfwidth) {
  ChartGeometry c = base_chart(p, q, kind, halfwidth);
  c.metric = FlatMetric{c.flat_diag()};
  return c;
}

ChartGeometry round_sphere_chart(int dim, StructureKind kind,
                                 double halfwidth) {
  ChartGeometry c = base_chart(dim, 0, kind, halfwidth);
  c.metric = RoundSphereMetric{dim};
  return c;
}

ChartGeometry poincare_ball_chart(int dim, StructureKind kind,
                                  double halfwidth) {
  ChartGeometry c = base_chart(dim, 0, kind, halfwidth);
  c.metric = PoincareBallMetric{dim};
  return c;
}

ChartGeometry bump_chart(int p, int q, StructureKind kind, double eps,
                         std::uint64_t seed, double halfwidth) {
  ChartGeometry c = base_chart(p, q, kind, halfwidth);
  num::Rng rng(seed);
  int n = c.dim;
  MatrixXd mix(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double v = rng.uniform(-1.0, 1.0);
      mix(i, j) = v;
      mix(j, i) = v;
    }
  mix /= std::max(1e-12, mix.cwiseAbs().maxCoeff());
  VectorXd center(n);
  for (int i = 0; i < n; ++i) center[i] = rng.uniform(-0.4, 0.4);
  c.metric = BumpMetric{c.flat_diag(), eps, center, 1.2, mix};
  return c;
}

ChartGeometry sigma_rescaled_chart(const ChartGeometry& base,
                                   const QuadraticScale& sigma) {
  ChartGeometry c = base;
  c.metric = SigmaRescaledMetric{
      std::make_shared<MetricBox>(MetricBox{base.metric}), sigma};
  return c;
}

ChartGeometry conformal_rescaled_chart(const ChartGeometry& base, double f0,
                                       const VectorXd& f_lin) {
  ChartGeometry c = base;
  c.metric = ConformalRescaledMetric{
      std::make_shared<MetricBox>(MetricBox{base.metric}), f0, f_lin};
  return c;
}

MetricJet<double> metric_jet_fd(const MetricAnsatz& m, const VectorXd& x,
                                double h) {
  const int n = static_cast<int>(x.size());
  auto at = [&](const VectorXd& p) { return eval_metric<double>(m, p); };
  MetricJet<double> out;
  out.g = at(x);
  out.dg = Tensor3<double>(n);
  out.d2g = Tensor4<double>(n);

  auto first = [&](int c, double step) {
    VectorXd xp = x, xm = x;
    xp[c] += step;
    xm[c] -= step;
    return MatrixXd(((at(xp) - at(xm)) / (2.0 * step)).eval());
  };
  auto second_same = [&](int c, double step) {
    VectorXd xp = x, xm = x;
    xp[c] += step;
    xm[c] -= step;
    return MatrixXd(((at(xp) - 2.0 * out.g + at(xm)) / (step * step)).eval());
  };
  auto second_mixed = [&](int c, int d, double step) {
    VectorXd xpp = x, xpm = x, xmp = x, xmm = x;
    xpp[c] += step;
    xpp[d] += step;
    xpm[c] += step;
    xpm[d] -= step;
    xmp[c] -= step;
    xmp[d] += step;
    xmm[c] -= step;
    xmm[d] -= step;
    return MatrixXd(
        ((at(xpp) - at(xpm) - at(xmp) + at(xmm)) / (4.0 * step * step)).eval());
  };
  // Richardson: (4 D(h/2) - D(h)) / 3 removes the leading h^2 error term.
  auto richardson = [](const MatrixXd& coarse, const MatrixXd& fine) {
    return MatrixXd(((4.0 * fine - coarse) / 3.0).eval());
  };

  for (int c = 0; c < n; ++c) {
    MatrixXd d = richardson(first(c, h), first(c, h / 2));
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) out.dg(c, a, b) = d(a, b);
  }
  for (int c = 0; c < n; ++c)
    for (int d = c; d < n; ++d) {
      MatrixXd dd =
          c == d ? richardson(second_same(c, h), second_same(c, h / 2))
                 : richardson(second_mixed(c, d, h), second_mixed(c, d, h / 2));
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          out.d2g(c, d, a, b) = dd(a, b);
          out.d2g(d, c, a, b) = dd(a, b);
        }
    }
  return out;
}

CurvatureData curvature_tensors(const ChartGeometry& chart, const VectorXd& x) {
  chart.require_inside(x);
  CurvTensors<double> t = curvature_at<double>(chart, x);

  // Lazy validity checks on the metric value.
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(t.g, Eigen::EigenvaluesOnly);
  const VectorXd& ev = es.eigenvalues();
  double lo = ev.cwiseAbs().minCoeff(), hi = ev.cwiseAbs().maxCoeff();
  if (lo <= 0.0 || hi / lo > 1e8)
    throw DegenerateMetric("metric too ill-conditioned at queried point");
  int p = 0, q = 0;
  for (int i = 0; i < ev.size(); ++i) (ev[i] > 0 ? p : q)++;
  if (p != chart.sig_p || q != chart.sig_q)
    throw DegenerateMetric("metric signature differs from declaration");

  CurvatureData out;
  out.g = t.g;
  out.g_inv = t.g_inv;
  out.christoffel = t.gamma;
  out.riemann = t.riemann;
  out.ricci = 0.5 * (t.ricci + MatrixXd(t.ricci.transpose()));
  out.ricci_asymmetry = (t.ricci - t.ricci.transpose()).cwiseAbs().maxCoeff();
  out.scalar = t.scalar;
  out.schouten = t.schouten;
  out.schouten_mixed = t.schouten_mixed;

  const int n = chart.dim;
  double worst = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d)
          worst = std::max(worst, std::abs(t.riemann(a, b, c, d) +
                                           t.riemann(a, c, d, b) +
                                           t.riemann(a, d, b, c)));
  out.bianchi_residual = worst;
  return out;
}

}  // namespace cartan::chart
