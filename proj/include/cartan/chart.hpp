#pragma once

#include <Eigen/Dense>
#include <memory>
#include <variant>
#include <vector>

#include "cartan/dual.hpp"
#include "cartan/errors.hpp"

namespace cartan::chart {

using Eigen::MatrixXd;
using Eigen::VectorXd;

template <class S>
using MatS = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using VecS = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <class S>
struct Tensor3 {
  int n = 0;
  std::vector<S> a;
  Tensor3() = default;
  explicit Tensor3(int dim) : n(dim), a(dim * dim * dim, S(0)) {}
  S& operator()(int i, int j, int k) { return a[(i * n + j) * n + k]; }
  const S& operator()(int i, int j, int k) const { return a[(i * n + j) * n + k]; }
};

template <class S>
struct Tensor4 {
  int n = 0;
  std::vector<S> a;
  Tensor4() = default;
  explicit Tensor4(int dim) : n(dim), a(dim * dim * dim * dim, S(0)) {}
  S& operator()(int i, int j, int k, int l) {
    return a[((i * n + j) * n + k) * n + l];
  }
  const S& operator()(int i, int j, int k, int l) const {
    return a[((i * n + j) * n + k) * n + l];
  }
};

/// sigma(x) = a + b.x + (c/2) x^T D x; the closed-form scale family that
/// exhausts the parallel top slots over flat charts.
struct QuadraticScale {
  double a = 0.0;
  VectorXd b;
  double c = 0.0;
  MatrixXd d;  // quadratic-term matrix, usually the flat metric

  template <class S>
  S eval(const VecS<S>& x) const {
    S out(a);
    for (int i = 0; i < x.size(); ++i) out += b[i] * x[i];
    if (c != 0.0) {
      S q(0.0);
      for (int i = 0; i < x.size(); ++i)
        for (int j = 0; j < x.size(); ++j) q += d(i, j) * x[i] * x[j];
      out += 0.5 * c * q;
    }
    return out;
  }
  double operator()(const VectorXd& x) const { return eval<double>(x); }
  VectorXd gradient(const VectorXd& x) const { return b + c * (d * x); }
  MatrixXd hessian() const { return c * d; }
};

// ---------------------------------------------------------------------------
// Metric ansatz catalog. Every variant exposes eval<S>() so the same code
// path produces values, dual-number jets, and finite-difference stencils.
// ---------------------------------------------------------------------------

struct FlatMetric {
  VectorXd diag;
  template <class S>
  MatS<S> eval(const VecS<S>& x) const {
    MatS<S> g = MatS<S>::Zero(x.size(), x.size());
    for (int i = 0; i < x.size(); ++i) g(i, i) = S(diag[i]);
    return g;
  }
};

/// 4/(1+|x|^2)^2 delta: the unit round sphere in its stereographic chart.
struct RoundSphereMetric {
  int dim = 0;
  template <class S>
  MatS<S> eval(const VecS<S>& x) const {
    S r2(0.0);
    for (int i = 0; i < x.size(); ++i) r2 += x[i] * x[i];
    S f = 4.0 / ((1.0 + r2) * (1.0 + r2));
    MatS<S> g = MatS<S>::Zero(x.size(), x.size());
    for (int i = 0; i < x.size(); ++i) g(i, i) = f;
    return g;
  }
};

/// 4/(1-|x|^2)^2 delta on the open unit ball (hyperbolic space).
struct PoincareBallMetric {
  int dim = 0;
  template <class S>
  MatS<S> eval(const VecS<S>& x) const {
    S r2(0.0);
    for (int i = 0; i < x.size(); ++i) r2 += x[i] * x[i];
    S f = 4.0 / ((1.0 - r2) * (1.0 - r2));
    MatS<S> g = MatS<S>::Zero(x.size(), x.size());
    for (int i = 0; i < x.size(); ++i) g(i, i) = f;
    return g;
  }
};

/// Flat background plus a localized symmetric Gaussian perturbation:
/// g = diag + eps * mix * exp(-|x - center|^2 / width^2).
struct BumpMetric {
  VectorXd diag;
  double eps = 0.0;
  VectorXd center;
  double width = 1.0;
  MatrixXd mix;  // symmetric

  template <class S>
  MatS<S> eval(const VecS<S>& x) const {
    using std::exp;
    using cartan::ad::exp;
    S r2(0.0);
    for (int i = 0; i < x.size(); ++i) {
      S t = x[i] - center[i];
      r2 += t * t;
    }
    S f = eps * exp(-r2 / (width * width));
    MatS<S> g = MatS<S>::Zero(x.size(), x.size());
    for (int i = 0; i < x.size(); ++i) g(i, i) = S(diag[i]);
    for (int i = 0; i < x.size(); ++i)
      for (int j = 0; j < x.size(); ++j) g(i, j) += mix(i, j) * f;
    return g;
  }
};

/// Metric entries as multivariate polynomials (user-supplied charts).
struct PolynomialMetric {
  int dim = 0;
  struct Monomial {
    int row, col;
    std::vector<int> exponents;
    double coeff;
  };
  std::vector<Monomial> terms;

  template <class S>
  MatS<S> eval(const VecS<S>& x) const {
    MatS<S> g = MatS<S>::Zero(dim, dim);
    for (const auto& t : terms) {
      S v(t.coeff);
      for (int i = 0; i < dim; ++i)
        for (int e = 0; e < t.exponents[i]; ++e) v *= x[i];
      g(t.row, t.col) += v;
      if (t.row != t.col) g(t.col, t.row) += v;
    }
    return g;
  }
};

struct MetricBox;  // holds a MetricAnsatz; breaks the variant recursion

/// sigma^{-2} * base, defined away from the zero set of sigma.
struct SigmaRescaledMetric {
  std::shared_ptr<const MetricBox> base;
  QuadraticScale sigma;

  template <class S>
  MatS<S> eval(const VecS<S>& x) const;
};

/// exp(2 f) * base with affine f; conformal rescaling witness.
struct ConformalRescaledMetric {
  std::shared_ptr<const MetricBox> base;
  double f0 = 0.0;
  VectorXd f_lin;

  template <class S>
  MatS<S> eval(const VecS<S>& x) const;
};

using MetricAnsatz =
    std::variant<FlatMetric, RoundSphereMetric, PoincareBallMetric, BumpMetric,
                 PolynomialMetric, SigmaRescaledMetric, ConformalRescaledMetric>;

struct MetricBox {
  MetricAnsatz m;
};

template <class S>
MatS<S> eval_metric(const MetricAnsatz& m, const VecS<S>& x) {
  return std::visit([&](const auto& mm) { return mm.template eval<S>(x); }, m);
}

template <class S>
MatS<S> SigmaRescaledMetric::eval(const VecS<S>& x) const {
  S s = sigma.eval<S>(x);
  return eval_metric<S>(base->m, x) * (1.0 / (s * s));
}

template <class S>
MatS<S> ConformalRescaledMetric::eval(const VecS<S>& x) const {
  using std::exp;
  using cartan::ad::exp;
  S f(f0);
  for (int i = 0; i < x.size(); ++i) f += f_lin[i] * x[i];
  return eval_metric<S>(base->m, x) * exp(2.0 * f);
}

// ---------------------------------------------------------------------------

enum class StructureKind { Conformal, Projective };
enum class DerivEngine { ForwardAutodiff, CentralDifference };

/// Chart-level metric data on an open box domain.
struct ChartGeometry {
  int dim = 0;
  int sig_p = 0, sig_q = 0;
  MetricAnsatz metric = FlatMetric{};
  DerivEngine engine = DerivEngine::ForwardAutodiff;
  double fd_step = 1e-4;
  StructureKind kind = StructureKind::Conformal;
  VectorXd box_lo, box_hi;

  bool contains(const VectorXd& x) const {
    for (int i = 0; i < dim; ++i)
      if (x[i] < box_lo[i] || x[i] > box_hi[i]) return false;
    return true;
  }
  void require_inside(const VectorXd& x) const {
    if (!contains(x)) throw DomainError("point outside chart domain");
  }
  VectorXd flat_diag() const;  // signature diagonal (+1 x p, -1 x q)
};

ChartGeometry flat_chart(int p, int q, StructureKind kind,
                         double halfwidth = 2.5);
ChartGeometry round_sphere_chart(int dim, StructureKind kind,
                                 double halfwidth = 0.8);
ChartGeometry poincare_ball_chart(int dim, StructureKind kind,
                                  double halfwidth = 0.8);
/// Seeded generic perturbation of the flat (p,q) chart.
ChartGeometry bump_chart(int p, int q, StructureKind kind, double eps,
                         std::uint64_t seed, double halfwidth = 1.2);
ChartGeometry sigma_rescaled_chart(const ChartGeometry& base,
                                   const QuadraticScale& sigma);
ChartGeometry conformal_rescaled_chart(const ChartGeometry& base, double f0,
                                       const VectorXd& f_lin);

// ---------------------------------------------------------------------------
// Jets and curvature.
// ---------------------------------------------------------------------------

template <class S>
struct MetricJet {
  MatS<S> g;
  Tensor3<S> dg;   // dg(c; a, b) = d_c g_ab
  Tensor4<S> d2g;  // d2g(c, d; a, b)
};

template <class S>
MetricJet<S> metric_jet_ad(const MetricAnsatz& m, const VecS<S>& x) {
  using D = ad::Dual<ad::Dual<S>>;
  const int n = static_cast<int>(x.size());
  MetricJet<S> out;
  out.dg = Tensor3<S>(n);
  out.d2g = Tensor4<S>(n);
  for (int c = 0; c < n; ++c) {
    for (int d = c; d < n; ++d) {
      VecS<D> xx(n);
      for (int i = 0; i < n; ++i)
        xx[i] = D(ad::Dual<S>(x[i], S(i == c ? 1.0 : 0.0)),
                  ad::Dual<S>(S(i == d ? 1.0 : 0.0), S(0.0)));
      MatS<D> g = eval_metric<D>(m, xx);
      if (c == 0 && d == 0) {
        out.g.resize(n, n);
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) out.g(a, b) = g(a, b).v.v;
      }
      if (d == c) {
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) out.dg(c, a, b) = g(a, b).v.d;
      }
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          out.d2g(c, d, a, b) = g(a, b).d.d;
          out.d2g(d, c, a, b) = g(a, b).d.d;
        }
    }
  }
  return out;
}

MetricJet<double> metric_jet_fd(const MetricAnsatz& m, const VectorXd& x,
                                double h);

template <class S>
MetricJet<S> metric_jet(const ChartGeometry& chart, const VecS<S>& x) {
  if (chart.engine == DerivEngine::CentralDifference) {
    if constexpr (std::is_same_v<S, double>) {
      return metric_jet_fd(chart.metric, x, chart.fd_step);
    } else {
      throw Error("central-difference engine cannot be nested");
    }
  }
  return metric_jet_ad<S>(chart.metric, x);
}

/// Gaussian-elimination inverse usable with dual scalars (pivot on values).
template <class S>
MatS<S> invert(MatS<S> a) {
  const int n = static_cast<int>(a.rows());
  MatS<S> inv = MatS<S>::Zero(n, n);
  for (int i = 0; i < n; ++i) inv(i, i) = S(1.0);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = std::abs(ad::value_of(a(col, col)));
    for (int r = col + 1; r < n; ++r) {
      double cand = std::abs(ad::value_of(a(r, col)));
      if (cand > best) {
        best = cand;
        piv = r;
      }
    }
    if (best == 0.0) throw DegenerateMetric("singular matrix in invert()");
    if (piv != col) {
      a.row(piv).swap(a.row(col));
      inv.row(piv).swap(inv.row(col));
    }
    S d = a(col, col);
    for (int j = 0; j < n; ++j) {
      a(col, j) = a(col, j) / d;
      inv(col, j) = inv(col, j) / d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      S f = a(r, col);
      if (ad::value_of(f) == 0.0 && std::is_same_v<S, double>) continue;
      for (int j = 0; j < n; ++j) {
        a(r, j) = a(r, j) - f * a(col, j);
        inv(r, j) = inv(r, j) - f * inv(col, j);
      }
    }
  }
  return inv;
}

template <class S>
struct CurvTensors {
  MatS<S> g, g_inv;
  Tensor3<S> gamma;    // gamma(a; b, c) = Gamma^a_{bc}
  Tensor4<S> riemann;  // R^a_{bcd}
  MatS<S> ricci;
  S scalar{};
  MatS<S> schouten;        // P_ab per structure kind
  MatS<S> schouten_mixed;  // P_a{}^b
};

template <class S>
CurvTensors<S> curvature_from_jet(const MetricJet<S>& jet, StructureKind kind) {
  const int n = static_cast<int>(jet.g.rows());
  CurvTensors<S> out;
  out.g = jet.g;
  out.g_inv = invert<S>(jet.g);
  out.gamma = Tensor3<S>(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        S t(0.0);
        for (int d = 0; d < n; ++d)
          t += out.g_inv(a, d) *
               (jet.dg(b, d, c) + jet.dg(c, b, d) - jet.dg(d, b, c));
        out.gamma(a, b, c) = 0.5 * t;
      }

  // d_c Gamma^a_{db} from the order-2 jet (product rule through g^{-1}).
  Tensor4<S> dgamma(n);  // dgamma(c; a, d, b) = d_c Gamma^a_{db}
  for (int c = 0; c < n; ++c) {
    // d_c g^{ae} = -g^{af} (d_c g_{fh}) g^{he}
    MatS<S> dginv = MatS<S>::Zero(n, n);
    for (int a = 0; a < n; ++a)
      for (int e = 0; e < n; ++e) {
        S t(0.0);
        for (int f = 0; f < n; ++f)
          for (int h = 0; h < n; ++h)
            t += out.g_inv(a, f) * jet.dg(c, f, h) * out.g_inv(h, e);
        dginv(a, e) = S(0.0) - t;
      }
    for (int a = 0; a < n; ++a)
      for (int d = 0; d < n; ++d)
        for (int b = 0; b < n; ++b) {
          S t(0.0);
          for (int e = 0; e < n; ++e) {
            t += dginv(a, e) *
                 (jet.dg(d, e, b) + jet.dg(b, d, e) - jet.dg(e, d, b));
            t += out.g_inv(a, e) *
                 (jet.d2g(c, d, e, b) + jet.d2g(c, b, d, e) -
                  jet.d2g(c, e, d, b));
          }
          dgamma(c, a, d, b) = 0.5 * t;
        }
  }

  out.riemann = Tensor4<S>(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          S t = dgamma(c, a, d, b) - dgamma(d, a, c, b);
          for (int e = 0; e < n; ++e)
            t += out.gamma(a, c, e) * out.gamma(e, d, b) -
                 out.gamma(a, d, e) * out.gamma(e, c, b);
          out.riemann(a, b, c, d) = t;
        }

  out.ricci = MatS<S>::Zero(n, n);
  for (int b = 0; b < n; ++b)
    for (int d = 0; d < n; ++d) {
      S t(0.0);
      for (int a = 0; a < n; ++a) t += out.riemann(a, b, a, d);
      out.ricci(b, d) = t;
    }
  out.scalar = S(0.0);
  for (int b = 0; b < n; ++b)
    for (int d = 0; d < n; ++d)
      out.scalar += out.g_inv(b, d) * out.ricci(b, d);

  if (kind == StructureKind::Projective) {
    out.schouten = out.ricci * (1.0 / (n - 1));
  } else {
    if (n >= 3) {
      out.schouten =
          (out.ricci - out.g * (out.scalar / (2.0 * (n - 1)))) * (1.0 / (n - 2));
    } else {
      // Dimension 2 is only admitted for flat charts, where P = 0.
      double ric_size = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          ric_size = std::max(ric_size, std::abs(ad::value_of(out.ricci(i, j))));
      if (ric_size > 1e-8)
        throw DegenerateMetric(
            "conformal Schouten tensor undefined for curved dim-2 charts");
      out.schouten = MatS<S>::Zero(n, n);
    }
  }
  out.schouten_mixed = out.schouten * out.g_inv;
  return out;
}

template <class S>
CurvTensors<S> curvature_at(const ChartGeometry& chart, const VecS<S>& x) {
  return curvature_from_jet<S>(metric_jet<S>(chart, x), chart.kind);
}

/// Double-precision curvature bundle with validity checks, the public entry
/// point used by the verifiers.
struct CurvatureData {
  MatrixXd g, g_inv;
  Tensor3<double> christoffel;
  Tensor4<double> riemann;
  MatrixXd ricci;
  double scalar = 0.0;
  MatrixXd schouten;
  MatrixXd schouten_mixed;
  double bianchi_residual = 0.0;
  double ricci_asymmetry = 0.0;
};

CurvatureData curvature_tensors(const ChartGeometry& chart, const VectorXd& x);

}  // namespace cartan::chart
