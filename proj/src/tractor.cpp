#include "cartan/tractor.hpp"

#include "cartan/numerics.hpp"

namespace cartan::tractor {

VectorXd Path::Segment::eval(double t) const {
  if (!cubic) return p0 + t * (p1 - p0);
  double u = 1.0 - t;
  return u * u * u * p0 + 3.0 * u * u * t * p1 + 3.0 * u * t * t * p2 +
         t * t * t * p3;
}

VectorXd Path::Segment::velocity(double t) const {
  if (!cubic) return p1 - p0;
  double u = 1.0 - t;
  return 3.0 * u * u * (p1 - p0) + 6.0 * u * t * (p2 - p1) +
         3.0 * t * t * (p3 - p2);
}

Path Path::line(const VectorXd& a, const VectorXd& b) {
  Path p;
  p.segs_.push_back({false, a, b, {}, {}});
  return p;
}

Path Path::polyline(const std::vector<VectorXd>& pts) {
  if (pts.size() < 2) throw Error("polyline needs at least two points");
  Path p;
  for (size_t i = 0; i + 1 < pts.size(); ++i)
    p.segs_.push_back({false, pts[i], pts[i + 1], {}, {}});
  return p;
}

Path Path::cubic(const VectorXd& p0, const VectorXd& p1, const VectorXd& p2,
                 const VectorXd& p3) {
  Path p;
  p.segs_.push_back({true, p0, p1, p2, p3});
  return p;
}

Path Path::rectangle(const VectorXd& base, const VectorXd& u,
                     const VectorXd& v) {
  return polyline({base, base + u, base + u + v, base + v, base});
}

Path Path::reversed() const {
  Path p;
  for (auto it = segs_.rbegin(); it != segs_.rend(); ++it) {
    Segment s = *it;
    if (s.cubic) {
      std::swap(s.p0, s.p3);
      std::swap(s.p1, s.p2);
    } else {
      std::swap(s.p0, s.p1);
    }
    p.segs_.push_back(s);
  }
  return p;
}

Path Path::then(const Path& next) const {
  Path p = *this;
  p.segs_.insert(p.segs_.end(), next.segs_.begin(), next.segs_.end());
  return p;
}

TractorConnection::TractorConnection(ChartGeometry chart_geometry)
    : chart_(std::move(chart_geometry)) {
  const int n = chart_.dim;
  slots_.kind = chart_.kind;
  slots_.n = n;
  if (chart_.kind == StructureKind::Conformal) {
    slots_.fiber_dim = n + 2;
    slots_.top_begin = 0;
    slots_.top_count = 1;
    slots_.t1_begin = n + 1;
    slots_.t1_count = 1;
  } else {
    slots_.fiber_dim = n + 1;
    slots_.top_begin = 0;
    slots_.top_count = n;
    slots_.t1_begin = n;
    slots_.t1_count = 1;
  }
}

std::optional<forms::SymmetricForm> TractorConnection::fiber_metric(
    const VectorXd& x) const {
  if (slots_.kind != StructureKind::Conformal) return std::nullopt;
  const int n = slots_.n;
  MatrixXd g = chart::eval_metric<double>(chart_.metric, VecS<double>(x));
  MatrixXd h = MatrixXd::Zero(n + 2, n + 2);
  h(0, n + 1) = 1.0;
  h(n + 1, 0) = 1.0;
  h.block(1, 1, n, n) = g.inverse();
  return forms::SymmetricForm(h);
}

VectorXd TractorConnection::canonical_tractor() const {
  VectorXd x = VectorXd::Zero(slots_.fiber_dim);
  x[slots_.t1_begin] = 1.0;
  return x;
}

MatrixXd TractorConnection::coeff_along(const VectorXd& x,
                                        const VectorXd& xi) const {
  auto cs = coeffs<double>(VecS<double>(x));
  MatrixXd m = MatrixXd::Zero(fiber_dim(), fiber_dim());
  for (int a = 0; a < slots_.n; ++a) m += xi[a] * cs[a];
  return m;
}

VectorXd TractorConnection::derivative(
    const VectorXd& x, const VectorXd& xi, const VectorXd& value,
    const VectorXd& directional_derivative) const {
  return directional_derivative + coeff_along(x, xi) * value;
}

namespace {

// One RK4 sweep of Phi' = -A(t) Phi across a path segment.
MatrixXd rk4_segment(const TractorConnection& conn, const Path::Segment& seg,
                     int steps, MatrixXd phi) {
  double h = 1.0 / steps;
  auto rhs = [&](double t, const MatrixXd& p) {
    return MatrixXd(-conn.coeff_along(seg.eval(t), seg.velocity(t)) * p);
  };
  for (int k = 0; k < steps; ++k) {
    double t = k * h;
    MatrixXd k1 = rhs(t, phi);
    MatrixXd k2 = rhs(t + 0.5 * h, phi + 0.5 * h * k1);
    MatrixXd k3 = rhs(t + 0.5 * h, phi + 0.5 * h * k2);
    MatrixXd k4 = rhs(t + h, phi + h * k3);
    phi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return phi;
}

MatrixXd transport_matrix_impl(const TractorConnection& conn, const Path& path,
                               double tol, int max_steps) {
  const int m = conn.fiber_dim();
  int steps_per_seg = 8;
  MatrixXd prev;
  while (true) {
    MatrixXd phi = MatrixXd::Identity(m, m);
    for (const auto& seg : path.segments())
      phi = rk4_segment(conn, seg, steps_per_seg, phi);
    if (prev.size() > 0 && (phi - prev).norm() < tol) return phi;
    prev = phi;
    steps_per_seg *= 2;
    if (steps_per_seg * static_cast<int>(path.segments().size()) > max_steps)
      throw NoConvergence("parallel transport did not reach tolerance");
  }
}

}  // namespace

VectorXd TractorConnection::transport(const Path& path, const VectorXd& v0,
                                      double tol, int max_steps) const {
  if (v0.size() != fiber_dim())
    throw DimensionError("transport: fiber dimension mismatch");
  chart_.require_inside(path.start());
  chart_.require_inside(path.end());
  return transport_matrix_impl(*this, path, tol, max_steps) * v0;
}

MatrixXd TractorConnection::transport_matrix(const Path& path, double tol,
                                             int max_steps) const {
  chart_.require_inside(path.start());
  chart_.require_inside(path.end());
  return transport_matrix_impl(*this, path, tol, max_steps);
}

std::vector<MatrixXd> TractorConnection::dcoeff(const VectorXd& x,
                                                int dir) const {
  const int n = slots_.n;
  if (chart_.engine == DerivEngine::ForwardAutodiff) {
    VecS<ad::D1> xx(n);
    for (int i = 0; i < n; ++i) xx[i] = ad::D1(x[i], i == dir ? 1.0 : 0.0);
    auto cs = coeffs<ad::D1>(xx);
    std::vector<MatrixXd> out(n);
    for (int b = 0; b < n; ++b) {
      out[b].resize(fiber_dim(), fiber_dim());
      for (int r = 0; r < fiber_dim(); ++r)
        for (int c = 0; c < fiber_dim(); ++c) out[b](r, c) = cs[b](r, c).d;
    }
    return out;
  }
  // central differences with one Richardson step
  auto eval = [&](double h) {
    VectorXd xp = x, xm = x;
    xp[dir] += h;
    xm[dir] -= h;
    auto cp = coeffs<double>(VecS<double>(xp));
    auto cm = coeffs<double>(VecS<double>(xm));
    std::vector<MatrixXd> out(n);
    for (int b = 0; b < n; ++b) out[b] = (cp[b] - cm[b]) / (2.0 * h);
    return out;
  };
  // The coefficient matrices already carry O(eps/h^2) rounding noise from
  // the inner stencils, so the outer step must stay well above fd_step.
  double h = std::max(chart_.fd_step, 2e-2);
  auto coarse = eval(h);
  auto fine = eval(h / 2);
  std::vector<MatrixXd> out(n);
  for (int b = 0; b < n; ++b) out[b] = (4.0 * fine[b] - coarse[b]) / 3.0;
  return out;
}

MatrixXd TractorConnection::curvature(const VectorXd& x, const VectorXd& xi,
                                      const VectorXd& eta) const {
  auto all = curvature_all(x);
  MatrixXd f = MatrixXd::Zero(fiber_dim(), fiber_dim());
  for (int a = 0; a < slots_.n; ++a)
    for (int b = 0; b < slots_.n; ++b) f += xi[a] * eta[b] * all[a][b];
  return f;
}

std::vector<std::vector<MatrixXd>> TractorConnection::curvature_all(
    const VectorXd& x) const {
  const int n = slots_.n;
  auto a_mats = coeffs<double>(VecS<double>(x));
  std::vector<std::vector<MatrixXd>> da(n);
  for (int dir = 0; dir < n; ++dir) da[dir] = dcoeff(x, dir);
  std::vector<std::vector<MatrixXd>> f(
      n, std::vector<MatrixXd>(n, MatrixXd::Zero(fiber_dim(), fiber_dim())));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      f[a][b] =
          da[a][b] - da[b][a] + a_mats[a] * a_mats[b] - a_mats[b] * a_mats[a];
    }
  return f;
}

double TractorConnection::torsion_block_norm(const MatrixXd& f) const {
  const int n = slots_.n;
  if (slots_.kind == StructureKind::Conformal) {
    double top = f.block(0, 1, 1, n).norm();       // sigma <- mu
    double side = f.block(1, n + 1, n, 1).norm();  // mu <- rho
    return std::max(top, side);
  }
  return f.block(0, n, n, 1).norm();  // nu <- rho
}

MatrixXd TractorConnection::g0_block(const MatrixXd& f) const {
  const int n = slots_.n;
  if (slots_.kind == StructureKind::Conformal) {
    // the mu block acts on covector slots; tangent action is -transpose
    return MatrixXd(-f.block(1, 1, n, n).transpose());
  }
  return f.block(0, 0, n, n);
}

TractorConnection conformal_connection(const ChartGeometry& c) {
  ChartGeometry cc = c;
  cc.kind = StructureKind::Conformal;
  return TractorConnection(cc);
}

TractorConnection projective_connection(const ChartGeometry& c) {
  ChartGeometry cc = c;
  cc.kind = StructureKind::Projective;
  return TractorConnection(cc);
}

std::vector<Path> default_loop_family(const ChartGeometry& chart,
                                      const VectorXd& basepoint,
                                      std::uint64_t seed, int extra_random) {
  const int n = chart.dim;
  double room = 1e9;
  for (int i = 0; i < n; ++i) {
    room = std::min(room, chart.box_hi[i] - basepoint[i]);
    room = std::min(room, basepoint[i] - chart.box_lo[i]);
  }
  std::vector<double> scales = {0.45 * room, 0.3 * room, 0.18 * room};
  std::vector<Path> loops;
  for (double s : scales)
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        VectorXd u = VectorXd::Zero(n), v = VectorXd::Zero(n);
        u[i] = s;
        v[j] = s;
        loops.push_back(Path::rectangle(basepoint, u, v));
      }
  num::Rng rng(seed);
  auto inside = [&](const VectorXd& p) {
    for (int i = 0; i < n; ++i)
      if (p[i] < chart.box_lo[i] || p[i] > chart.box_hi[i]) return false;
    return true;
  };
  for (int k = 0; k < extra_random; ++k) {
    VectorXd u = rng.sphere(n) * 0.4 * room;
    VectorXd v = rng.sphere(n) * 0.4 * room;
    if (inside(basepoint + u) && inside(basepoint + v) &&
        inside(basepoint + u + v))
      loops.push_back(Path::rectangle(basepoint, u, v));
  }
  return loops;
}

HolonomyResult holonomy_algebra(const TractorConnection& conn,
                                const VectorXd& basepoint,
                                const std::vector<Path>& loop_family,
                                int budget, double noise_floor,
                                double span_tol) {
  const int m = conn.fiber_dim();
  HolonomyResult result;
  auto metric = conn.fiber_metric(basepoint);

  MatrixXd span(m * m, 0);
  int stable_streak = 0;
  bool stabilized = false;

  auto add_candidate = [&](const MatrixXd& cand) {
    double nrm = cand.norm();
    if (nrm < noise_floor) {
      ++stable_streak;
    } else {
      VectorXd flat = Eigen::Map<const VectorXd>(cand.data(), cand.size());
      double res = num::projection_residual(span, flat);
      if (res > span_tol * nrm) {
        span.conservativeResize(Eigen::NoChange, span.cols() + 1);
        span.col(span.cols() - 1) = flat / flat.norm();
        span = num::column_space(span, 1e-10);
        stable_streak = 0;
      } else {
        ++stable_streak;
      }
    }
    if (stable_streak >= budget) stabilized = true;
  };

  // Route (a): principal logs of small-loop transports.
  for (const auto& loop : loop_family) {
    if (stabilized) break;
    MatrixXd t = conn.transport_matrix(loop, 1e-10);
    if ((t - MatrixXd::Identity(m, m)).norm() > 0.5)
      continue;  // outside the log injectivity guard
    HolonomySample sample;
    sample.loop = loop;
    sample.transport = t;
    sample.log = num::logm(t);
    if (metric) {
      const MatrixXd& h = metric->matrix();
      sample.metric_residual = (t.transpose() * h * t - h).norm();
    }
    add_candidate(sample.log);
    ++result.loop_candidates;
    result.samples.push_back(std::move(sample));
  }

  // Route (b): curvature endomorphisms conjugated back to the basepoint.
  if (!stabilized) {
    num::Rng rng(991);
    const ChartGeometry& chart = conn.chart();
    int n = chart.dim;
    for (int round = 0; round < 24 && !stabilized; ++round) {
      VectorXd x = basepoint;
      if (round > 0)
        for (int i = 0; i < n; ++i)
          x[i] = basepoint[i] +
                 0.5 * rng.uniform(chart.box_lo[i] - basepoint[i],
                                   chart.box_hi[i] - basepoint[i]);
      MatrixXd back = MatrixXd::Identity(m, m);
      MatrixXd fwd = back;
      if (round > 0) {
        Path radial = Path::line(x, basepoint);
        back = conn.transport_matrix(radial, 1e-10);
        fwd = conn.transport_matrix(radial.reversed(), 1e-10);
      }
      auto all = conn.curvature_all(x);
      for (int a = 0; a < n && !stabilized; ++a)
        for (int b = a + 1; b < n && !stabilized; ++b) {
          add_candidate(back * all[a][b] * fwd);
          ++result.curvature_candidates;
        }
    }
  }

  if (!stabilized)
    throw NoConvergence("holonomy span did not stabilize within budget");

  std::vector<lie::AlgebraElement> elems;
  lie::StructureTag tag =
      metric ? lie::StructureTag::so(*metric) : lie::StructureTag::sl(m);
  for (int i = 0; i < span.cols(); ++i)
    elems.push_back(
        {Eigen::Map<const MatrixXd>(span.col(i).data(), m, m), tag});
  result.algebra = lie::AlgebraBasis(std::move(elems));
  return result;
}

double normality_residual(const TractorConnection& conn, const VectorXd& x,
                          int n_dir_samples, std::uint64_t seed) {
  const int n = conn.chart().dim;
  auto all = conn.curvature_all(x);
  std::vector<std::vector<MatrixXd>> k0(n, std::vector<MatrixXd>(n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) k0[a][b] = conn.g0_block(all[a][b]);

  std::vector<VectorXd> ys, zs;
  for (int i = 0; i < n; ++i) {
    VectorXd e = VectorXd::Zero(n);
    e[i] = 1.0;
    ys.push_back(e);
    zs.push_back(e);
  }
  num::Rng rng(seed);
  for (int k = 0; k < n_dir_samples; ++k) {
    ys.push_back(rng.sphere(n));
    zs.push_back(rng.sphere(n));
  }

  double worst = 0.0;
  for (const auto& y : ys)
    for (const auto& z : zs) {
      // tr(W -> kappa_0(W, Y) Z)
      double t = 0.0;
      for (int a = 0; a < n; ++a) {
        MatrixXd k = MatrixXd::Zero(n, n);
        for (int b = 0; b < n; ++b) k += y[b] * k0[a][b];
        t += (k * z)[a];
      }
      worst = std::max(worst, std::abs(t));
    }
  return worst;
}

}  // namespace cartan::tractor
