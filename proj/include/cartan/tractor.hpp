#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "cartan/chart.hpp"
#include "cartan/lie.hpp"

namespace cartan::tractor {

using chart::ChartGeometry;
using chart::DerivEngine;
using chart::MatS;
using chart::StructureKind;
using chart::VecS;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Piecewise-smooth path: straight segments and cubic Beziers. Transport
/// integrates segment by segment, so corner kinks cost no accuracy.
class Path {
 public:
  struct Segment {
    bool cubic = false;
    VectorXd p0, p1, p2, p3;  // line uses p0, p1

    VectorXd eval(double t) const;
    VectorXd velocity(double t) const;
  };

  static Path line(const VectorXd& a, const VectorXd& b);
  static Path polyline(const std::vector<VectorXd>& pts);
  static Path cubic(const VectorXd& p0, const VectorXd& p1, const VectorXd& p2,
                    const VectorXd& p3);
  /// Closed rectangle loop base -> base+u -> base+u+v -> base+v -> base.
  static Path rectangle(const VectorXd& base, const VectorXd& u,
                        const VectorXd& v);

  Path reversed() const;
  Path then(const Path& next) const;

  const std::vector<Segment>& segments() const { return segs_; }
  VectorXd start() const { return segs_.front().eval(0.0); }
  VectorXd end() const { return segs_.back().eval(1.0); }
  bool closed(double tol = 1e-12) const {
    return (start() - end()).norm() < tol;
  }

 private:
  std::vector<Segment> segs_;
};

/// Slot ranges of the filtration T^1 subset T^0 subset T in the
/// chart-adapted frame.
struct SlotLayout {
  StructureKind kind = StructureKind::Conformal;
  int n = 0;          // base dimension
  int fiber_dim = 0;  // n+2 conformal, n+1 projective
  int top_begin = 0, top_count = 0;  // H_0 quotient slots (sigma resp. nu^b)
  int t1_begin = 0, t1_count = 0;    // T^1 slots (the distinguished line)
};

/// Tractor connection of the chart's structure kind in the standard slot
/// presentation:
///   conformal  (sigma, mu_b, rho):
///     nabla_a sigma = d_a sigma - mu_a
///     nabla_a mu_b  = D_a mu_b + P_ab sigma + g_ab rho
///     nabla_a rho   = d_a rho - P_a^b mu_b
///   projective (nu^b, rho):
///     nabla_a nu^b  = D_a nu^b + delta_a^b rho
///     nabla_a rho   = d_a rho - P_ab nu^b
/// with D the Levi-Civita connection on the tensor slots.
class TractorConnection {
 public:
  explicit TractorConnection(ChartGeometry chart_geometry);

  const ChartGeometry& chart() const { return chart_; }
  const SlotLayout& slots() const { return slots_; }
  int fiber_dim() const { return slots_.fiber_dim; }

  /// Fiber metric at x (conformal kind only).
  std::optional<forms::SymmetricForm> fiber_metric(const VectorXd& x) const;

  /// Canonical tractor X spanning T^1 in slot coordinates (x-independent).
  VectorXd canonical_tractor() const;

  /// Connection coefficient matrices A_a with nabla_a v = d_a v + A_a v.
  template <class S>
  std::vector<MatS<S>> coeffs(const VecS<S>& x) const;

  /// sum_a xi^a A_a(x).
  MatrixXd coeff_along(const VectorXd& x, const VectorXd& xi) const;

  /// Covariant derivative from a first-order jet of the section along xi.
  VectorXd derivative(const VectorXd& x, const VectorXd& xi,
                      const VectorXd& value,
                      const VectorXd& directional_derivative) const;

  /// Parallel transport of v0 along the path, RK4 with step halving until
  /// successive refinements differ by < tol.
  VectorXd transport(const Path& path, const VectorXd& v0, double tol = 1e-9,
                     int max_steps = 1 << 20) const;
  MatrixXd transport_matrix(const Path& path, double tol = 1e-9,
                            int max_steps = 1 << 20) const;

  /// Curvature endomorphism F(xi, eta) = [nabla_xi, nabla_eta] at x,
  /// assembled as d_a A_b - d_b A_a + [A_a, A_b] contracted with xi, eta.
  MatrixXd curvature(const VectorXd& x, const VectorXd& xi,
                     const VectorXd& eta) const;
  /// All coordinate-plane curvature endomorphisms F_ab.
  std::vector<std::vector<MatrixXd>> curvature_all(const VectorXd& x) const;

  /// Norm of the g_- (torsion) block of a curvature endomorphism.
  double torsion_block_norm(const MatrixXd& f) const;
  /// The g_0 block acting on the tangent slots.
  MatrixXd g0_block(const MatrixXd& f) const;

 private:
  ChartGeometry chart_;
  SlotLayout slots_;

  std::vector<MatrixXd> dcoeff(const VectorXd& x, int dir) const;
};

TractorConnection conformal_connection(const ChartGeometry& c);
TractorConnection projective_connection(const ChartGeometry& c);

/// One closed-loop transport with its principal log.
struct HolonomySample {
  Path loop;
  MatrixXd transport;
  MatrixXd log;
  double metric_residual = 0.0;  // |h(Tv,Tv) - h(v,v)| bound on basis pairs
};

struct HolonomyResult {
  lie::AlgebraBasis algebra;
  std::vector<HolonomySample> samples;
  int curvature_candidates = 0;
  int loop_candidates = 0;
};

/// Default loop family: coordinate-plane rectangles at several scales and
/// offsets plus seeded random parallelograms, all based at basepoint.
std::vector<Path> default_loop_family(const ChartGeometry& chart,
                                      const VectorXd& basepoint,
                                      std::uint64_t seed, int extra_random = 8);

/// Spanning set of the holonomy algebra at basepoint, merged from
/// small-loop logs and back-transported curvature endomorphisms; stops when
/// the span is stable for `budget` consecutive candidates. Candidates with
/// norm below noise_floor count as zero.
HolonomyResult holonomy_algebra(const TractorConnection& conn,
                                const VectorXd& basepoint,
                                const std::vector<Path>& loop_family,
                                int budget = 12, double noise_floor = 1e-6,
                                double span_tol = 1e-5);

/// Max Ricci-type trace of the g_0 block of kappa over sampled directions.
double normality_residual(const TractorConnection& conn, const VectorXd& x,
                          int n_dir_samples = 6, std::uint64_t seed = 2024);

template <class S>
std::vector<MatS<S>> TractorConnection::coeffs(const VecS<S>& x) const {
  const int n = slots_.n;
  const int m = slots_.fiber_dim;
  chart::CurvTensors<S> ct = chart::curvature_at<S>(chart_, x);
  std::vector<MatS<S>> out(n, MatS<S>::Zero(m, m));
  if (slots_.kind == StructureKind::Conformal) {
    for (int a = 0; a < n; ++a) {
      MatS<S>& c = out[a];
      c(0, 1 + a) = S(-1.0);
      for (int b = 0; b < n; ++b) {
        c(1 + b, 0) = ct.schouten(a, b);
        for (int e = 0; e < n; ++e) c(1 + b, 1 + e) = S(0.0) - ct.gamma(e, a, b);
        c(1 + b, n + 1) = ct.g(a, b);
        c(n + 1, 1 + b) = S(0.0) - ct.schouten_mixed(a, b);
      }
    }
  } else {
    for (int a = 0; a < n; ++a) {
      MatS<S>& c = out[a];
      for (int b = 0; b < n; ++b) {
        for (int e = 0; e < n; ++e) c(b, e) = ct.gamma(b, a, e);
        c(n, b) = S(0.0) - ct.schouten(a, b);
      }
      c(a, n) = S(1.0);
    }
  }
  return out;
}

}  // namespace cartan::tractor
