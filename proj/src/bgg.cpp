#include "cartan/bgg.hpp"

#include <algorithm>

#include "cartan/numerics.hpp"

namespace cartan::bgg {

namespace {

std::vector<long long> quantize(const VectorXd& x) {
  std::vector<long long> key(x.size());
  for (int i = 0; i < x.size(); ++i)
    key[i] = static_cast<long long>(std::llround(x[i] * 1e12));
  return key;
}

}  // namespace

std::vector<VectorXd> Grid::points() const {
  const int n = static_cast<int>(lo.size());
  std::vector<VectorXd> out;
  std::vector<int> idx(n, 0);
  const int r = std::max(resolution, 1);
  while (true) {
    VectorXd x(n);
    for (int i = 0; i < n; ++i)
      x[i] = r == 1 ? 0.5 * (lo[i] + hi[i])
                    : lo[i] + (hi[i] - lo[i]) * idx[i] / (r - 1);
    out.push_back(x);
    int carry = 0;
    while (carry < n && ++idx[carry] == r) idx[carry++] = 0;
    if (carry == n) break;
  }
  return out;
}

Grid Grid::box(const ChartGeometry& chart, double halfwidth, int resolution) {
  Grid g;
  g.lo = VectorXd::Constant(chart.dim, -halfwidth);
  g.hi = VectorXd::Constant(chart.dim, halfwidth);
  g.resolution = resolution;
  return g;
}

ParallelSection::ParallelSection(std::shared_ptr<const TractorConnection> conn,
                                 VectorXd basepoint, VectorXd base_value,
                                 double transport_tol)
    : conn_(std::move(conn)),
      base_(std::move(basepoint)),
      v0_(std::move(base_value)),
      tol_(transport_tol) {
  if (v0_.size() != conn_->fiber_dim())
    throw DimensionError("section value has wrong fiber dimension");
}

VectorXd ParallelSection::value(const VectorXd& x) const {
  if ((x - base_).norm() < 1e-14) return v0_;
  auto key = quantize(x);
  {
    std::lock_guard<std::mutex> lock(memo_->mu);
    auto it = memo_->cache.find(key);
    if (it != memo_->cache.end()) return it->second;
  }
  VectorXd v = conn_->transport(Path::line(base_, x), v0_, tol_);
  std::lock_guard<std::mutex> lock(memo_->mu);
  memo_->cache.emplace(std::move(key), v);
  return v;
}

std::optional<double> ParallelSection::g_type_norm() const {
  auto h = conn_->fiber_metric(base_);
  if (!h) return std::nullopt;
  return v0_.dot(h->matrix() * v0_);
}

double ParallelSection::constancy_residual(
    const std::vector<VectorXd>& pts) const {
  auto h0 = g_type_norm();
  if (!h0) return 0.0;
  double worst = 0.0;
  for (const auto& x : pts) {
    VectorXd v = value(x);
    double hx = v.dot(conn_->fiber_metric(x)->matrix() * v);
    worst = std::max(worst, std::abs(hx - *h0));
  }
  return worst;
}

double ParallelSection::path_independence_residual(int n_probes,
                                                   std::uint64_t seed) const {
  const ChartGeometry& chart = conn_->chart();
  num::Rng rng(seed);
  double worst = 0.0;
  for (int k = 0; k < n_probes; ++k) {
    VectorXd target(chart.dim), mid(chart.dim);
    for (int i = 0; i < chart.dim; ++i) {
      target[i] = rng.uniform(chart.box_lo[i], chart.box_hi[i]);
      mid[i] = rng.uniform(chart.box_lo[i], chart.box_hi[i]);
    }
    VectorXd direct = conn_->transport(Path::line(base_, target), v0_, tol_);
    VectorXd twoleg =
        conn_->transport(Path::polyline({base_, mid, target}), v0_, tol_);
    worst = std::max(worst, (direct - twoleg).norm());
  }
  return worst;
}

ParallelFormSection::ParallelFormSection(
    std::shared_ptr<const TractorConnection> conn, VectorXd basepoint,
    MatrixXd base_value, double transport_tol)
    : conn_(std::move(conn)),
      base_(std::move(basepoint)),
      h0_(std::move(base_value)),
      tol_(transport_tol) {}

MatrixXd ParallelFormSection::value(const VectorXd& x) const {
  if ((x - base_).norm() < 1e-14) return h0_;
  auto key = quantize(x);
  {
    std::lock_guard<std::mutex> lock(memo_->mu);
    auto it = memo_->cache.find(key);
    if (it != memo_->cache.end()) return it->second;
  }
  MatrixXd phi = conn_->transport_matrix(Path::line(base_, x), tol_);
  MatrixXd phi_inv = phi.inverse();
  MatrixXd h = phi_inv.transpose() * h0_ * phi_inv;
  std::lock_guard<std::mutex> lock(memo_->mu);
  memo_->cache.emplace(std::move(key), h);
  return h;
}

double ParallelFormSection::bgg_value(const VectorXd& x) const {
  VectorXd xt = conn_->canonical_tractor();
  return xt.dot(value(x) * xt);
}

std::vector<ParallelSection> find_parallel_sections(
    std::shared_ptr<const TractorConnection> conn,
    const lie::AlgebraBasis& holonomy, const VectorXd& basepoint) {
  const int m = conn->fiber_dim();
  MatrixXd kernel;
  if (holonomy.dim() == 0) {
    kernel = MatrixXd::Identity(m, m);
  } else {
    MatrixXd sys(holonomy.dim() * m, m);
    for (int i = 0; i < holonomy.dim(); ++i)
      sys.middleRows(i * m, m) = holonomy[i].m;
    kernel = num::nullspace(sys, 1e-8);
  }
  std::vector<ParallelSection> out;
  for (int i = 0; i < kernel.cols(); ++i)
    out.emplace_back(conn, basepoint, VectorXd(kernel.col(i)));
  return out;
}

std::vector<ParallelFormSection> find_parallel_form_sections(
    std::shared_ptr<const TractorConnection> conn,
    const lie::AlgebraBasis& holonomy, const VectorXd& basepoint) {
  const int m = conn->fiber_dim();
  std::vector<std::pair<int, int>> coords;
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) coords.emplace_back(i, j);
  const int dim_s2 = static_cast<int>(coords.size());

  auto unflatten = [&](const VectorXd& c) {
    MatrixXd h = MatrixXd::Zero(m, m);
    for (int k = 0; k < dim_s2; ++k) {
      auto [i, j] = coords[k];
      h(i, j) = c[k];
      h(j, i) = c[k];
    }
    return h;
  };

  MatrixXd kernel;
  if (holonomy.dim() == 0) {
    kernel = MatrixXd::Identity(dim_s2, dim_s2);
  } else {
    MatrixXd sys(holonomy.dim() * dim_s2, dim_s2);
    for (int a = 0; a < holonomy.dim(); ++a) {
      for (int col = 0; col < dim_s2; ++col) {
        MatrixXd h = unflatten(VectorXd::Unit(dim_s2, col));
        MatrixXd act = holonomy[a].m.transpose() * h + h * holonomy[a].m;
        for (int k = 0; k < dim_s2; ++k)
          sys(a * dim_s2 + k, col) = act(coords[k].first, coords[k].second);
      }
    }
    kernel = num::nullspace(sys, 1e-8);
  }
  std::vector<ParallelFormSection> out;
  for (int i = 0; i < kernel.cols(); ++i)
    out.emplace_back(conn, basepoint, unflatten(kernel.col(i)));
  return out;
}

double bgg_project(const ParallelSection& s, const VectorXd& x) {
  return s.value(x)[s.connection().slots().top_begin];
}

VectorXd sigma_gradient(const ParallelSection& s, const VectorXd& x) {
  const auto& slots = s.connection().slots();
  if (slots.kind != chart::StructureKind::Conformal)
    throw ScenarioMismatch("sigma jets are defined for conformal sections");
  VectorXd v = s.value(x);
  return v.segment(1, slots.n);
}

MatrixXd sigma_hessian(const ParallelSection& s, const VectorXd& x) {
  const auto& slots = s.connection().slots();
  if (slots.kind != chart::StructureKind::Conformal)
    throw ScenarioMismatch("sigma jets are defined for conformal sections");
  const int n = slots.n;
  VectorXd v = s.value(x);
  double sigma = v[0];
  VectorXd mu = v.segment(1, n);
  double rho = v[n + 1];
  chart::CurvatureData cd = chart::curvature_tensors(s.connection().chart(), x);
  MatrixXd hess(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      double t = -cd.schouten(a, b) * sigma - cd.g(a, b) * rho;
      for (int c = 0; c < n; ++c) t += cd.christoffel(c, a, b) * mu[c];
      hess(a, b) = t;
    }
  return hess;
}

double projection_injectivity_gram(const std::vector<ParallelSection>& secs,
                                   const std::vector<VectorXd>& pts) {
  if (secs.empty()) return 1.0;
  MatrixXd samples(pts.size(), secs.size());
  for (size_t j = 0; j < pts.size(); ++j)
    for (size_t i = 0; i < secs.size(); ++i)
      samples(j, i) = bgg_project(secs[i], pts[j]);
  MatrixXd gram = samples.transpose() * samples;
  return gram.determinant();
}

namespace {

struct SlotSplit {
  double sigma;
  VectorXd mu;
  double rho;
};

SlotSplit split_conformal(const VectorXd& v, int n) {
  return {v[0], v.segment(1, n), v[n + 1]};
}

}  // namespace

report::StrataReport zero_strata(const ParallelSection& s, const Grid& grid,
                                 const StrataOptions& opts) {
  const auto& conn = s.connection();
  const int n = conn.slots().n;
  if (conn.slots().kind != chart::StructureKind::Conformal)
    throw ScenarioMismatch("zero_strata expects a conformal section");
  report::StrataReport out;
  auto pts = grid.points();
  std::vector<report::SampleRow> rows(pts.size());
  num::parallel_for(static_cast<int>(pts.size()), opts.threads, [&](int i) {
    const VectorXd& x = pts[i];
    VectorXd v = s.value(x);
    auto sp = split_conformal(v, n);
    double scale = std::max(v.norm(), 1e-300);
    double thr = std::max(opts.tol * scale, opts.abs_floor);
    bool in_t0 = std::abs(sp.sigma) <= thr;     // sigma = 0
    bool in_t1 = in_t0 && sp.mu.norm() <= thr;  // higher-order zero
    report::SampleRow row;
    row.coords = x;
    row.zu_membership = {in_t1 ? 1 : 0, in_t0 ? 1 : 0};
    row.label = in_t1 ? "DEEP_ZERO" : (in_t0 ? "ZERO" : "REGULAR");
    row.diagnostics["sigma"] = sp.sigma;
    if (in_t0) {
      VectorXd grad = sigma_gradient(s, x);
      MatrixXd hess = sigma_hessian(s, x);
      row.diagnostics["grad_norm"] = grad.norm();
      row.diagnostics["hess_det"] = hess.determinant();
    }
    rows[i] = std::move(row);
  });
  for (auto& r : rows) out.add(std::move(r));

  for (const auto& row : out.samples) {
    if (row.label == "REGULAR") continue;
    double grad = row.diagnostics.count("grad_norm")
                      ? row.diagnostics.at("grad_norm")
                      : 0.0;
    double det = row.diagnostics.count("hess_det")
                     ? row.diagnostics.at("hess_det")
                     : 0.0;
    std::string geo = "unresolved";
    double tol = std::max(opts.tol, opts.abs_floor);
    if (grad > 10 * tol)
      geo = "hypersurface";
    else if (grad <= tol && std::abs(det) > tol)
      geo = "isolated";
    if (!out.stratum_geometry.count(row.label))
      out.stratum_geometry[row.label] = geo;
  }
  return out;
}

report::StrataReport curved_orbit_decompose(const ParallelSection& s,
                                            const Grid& grid,
                                            const StrataOptions& opts) {
  const auto& conn = s.connection();
  if (conn.slots().kind != chart::StructureKind::Conformal)
    throw ScenarioMismatch("curved_orbit_decompose expects a conformal section");
  const int n = conn.slots().n;
  const ChartGeometry& chart = conn.chart();

  double hss = *s.g_type_norm();
  double hscale = conn.fiber_metric(s.basepoint())->matrix().norm() *
                  s.base_value().squaredNorm();
  bool null_type = std::abs(hss) <= 1e-9 * std::max(hscale, 1e-300);

  report::StrataReport out;
  auto pts = grid.points();
  std::vector<report::SampleRow> rows(pts.size());
  num::parallel_for(static_cast<int>(pts.size()), opts.threads, [&](int i) {
    const VectorXd& x = pts[i];
    VectorXd v = s.value(x);
    auto sp = split_conformal(v, n);
    double scale = std::max(v.norm(), 1e-300);
    double thr = std::max(opts.tol * scale, opts.abs_floor);
    model::PTypeLabel label;
    if (!null_type) {
      label = std::abs(sp.sigma) <= thr ? model::PTypeLabel::Zero
              : (sp.sigma > 0           ? model::PTypeLabel::Plus
                                        : model::PTypeLabel::Minus);
    } else {
      bool proportional = std::abs(sp.sigma) <= thr && sp.mu.norm() <= thr;
      if (proportional) {
        label = sp.rho > 0 ? model::PTypeLabel::IsolatedPlus
                           : model::PTypeLabel::IsolatedMinus;
      } else if (std::abs(sp.sigma) <= thr) {
        label = model::PTypeLabel::Hypersurface;
      } else {
        label = sp.sigma > 0 ? model::PTypeLabel::OpenPlus
                             : model::PTypeLabel::OpenMinus;
      }
    }
    report::SampleRow row;
    row.coords = x;
    row.label = model::label_name(label);
    row.diagnostics["sigma"] = sp.sigma;
    if (null_type && label == model::PTypeLabel::Hypersurface) {
      // conormal of the cone stratum: |d sigma|^2_g = h(s,s) - 2 sigma rho,
      // which degenerates on Z(sigma) exactly in the null G-type
      MatrixXd ginv = chart::eval_metric<double>(chart.metric, x).inverse();
      row.diagnostics["grad_sq_g"] = sp.mu.dot(ginv * sp.mu);
    }
    rows[i] = std::move(row);
  });
  for (auto& r : rows) out.add(std::move(r));

  // the matching flat model carries a datum of the same G-type; curved
  // labels must form a subset of its orbit set
  model::HomogeneousModel ref =
      model::HomogeneousModel::conformal_sphere(chart.sig_p, chart.sig_q);
  VectorXd v = VectorXd::Zero(chart.dim + 2);
  if (null_type) {
    v[0] = 1.0;
  } else if (hss > 0) {
    v[1] = 1.0;
  } else {
    v[0] = -0.5;
    v[chart.dim + 1] = 1.0;  // F(v,v) = -1
  }
  auto expected = model::expected_labels(ref, model::VectorDatum{v});
  bool subset = true;
  for (const auto& l : out.observed_labels)
    if (l != "AMBIGUOUS" && expected.count(l) == 0) subset = false;
  out.metrics["labels_subset_of_model"] = subset ? 1.0 : 0.0;
  return out;
}

double einstein_verify(const ChartGeometry& chart, const QuadraticScale& sigma,
                       const Grid& grid, const EinsteinCheck& check) {
  ChartGeometry rescaled = chart::sigma_rescaled_chart(chart, sigma);
  double worst = 0.0;
  for (const VectorXd& x : grid.points()) {
    double sv = sigma(x);
    if (std::abs(sv) < check.margin)
      throw MarginViolation("grid point too close to the zero set of sigma");
    chart::CurvatureData cd = chart::curvature_tensors(rescaled, x);
    double denom = std::max(cd.g.norm(), 1e-300);
    worst = std::max(worst, (cd.ricci - check.lambda * cd.g).norm() / denom);
  }
  return worst;
}

VectorXd FlatModelDictionary::model_vector(const VectorXd& slots) const {
  const int n = static_cast<int>(flat_metric.rows());
  VectorXd v(n + 2);
  v[0] = slots[n + 1];                                  // rho -> e0
  v.segment(1, n) = flat_metric * slots.segment(1, n);  // I mu
  v[n + 1] = slots[0];                                  // sigma -> einfty
  return v;
}

VectorXd FlatModelDictionary::lift(const VectorXd& x) const {
  const int n = static_cast<int>(flat_metric.rows());
  VectorXd l(n + 2);
  l[0] = 1.0;
  l.segment(1, n) = x;
  l[n + 1] = -0.5 * x.dot(flat_metric * x);
  return l;
}

VectorXd FlatModelDictionary::slots(const VectorXd& model_vec) const {
  const int n = static_cast<int>(flat_metric.rows());
  VectorXd s(n + 2);
  s[0] = model_vec[n + 1];
  s.segment(1, n) = flat_metric * model_vec.segment(1, n);
  s[n + 1] = model_vec[0];
  return s;
}

VectorXd flat_section_value(const QuadraticScale& sigma, const MatrixXd& g,
                            const VectorXd& x) {
  const int n = static_cast<int>(x.size());
  VectorXd s(n + 2);
  s[0] = sigma(x);
  s.segment(1, n) = sigma.gradient(x);
  double lap = (g.inverse() * sigma.hessian()).trace();
  s[n + 1] = -lap / n;
  return s;
}

ProjectiveMetricReport projective_metric_scenario(
    const ChartGeometry& chart_in, const ProjectiveMetricOptions& opts) {
  ChartGeometry chart = chart_in;
  chart.kind = chart::StructureKind::Projective;
  const int n = chart.dim;

  ProjectiveMetricReport rep;
  VectorXd base = VectorXd::Zero(n);
  chart::CurvatureData cd = chart::curvature_tensors(chart, base);
  rep.einstein_constant = cd.scalar / n;

  Grid grid = Grid::box(chart, opts.grid_halfwidth, opts.grid_resolution);
  QuadraticScale one{1.0, VectorXd::Zero(n), 0.0, MatrixXd::Identity(n, n)};
  EinsteinCheck echk;
  echk.lambda = rep.einstein_constant;
  echk.margin = 0.5;
  echk.tol = opts.einstein_tol;
  rep.chart_einstein_residual = einstein_verify(chart, one, grid, echk);
  rep.einstein_pass = rep.chart_einstein_residual < opts.einstein_tol;

  auto conn = std::make_shared<TractorConnection>(chart);
  auto hol = tractor::holonomy_algebra(
      *conn, base, tractor::default_loop_family(chart, base, opts.seed));
  rep.holonomy_dim = hol.algebra.dim();

  auto kernel = find_parallel_form_sections(conn, hol.algebra, base);
  rep.kernel_dim = static_cast<int>(kernel.size());
  if (kernel.empty()) return rep;

  // one fiber transport per grid point serves the whole kernel family
  auto pts = grid.points();
  VectorXd xt = conn->canonical_tractor();
  std::vector<VectorXd> pulled_tractor(pts.size());
  for (size_t j = 0; j < pts.size(); ++j) {
    MatrixXd phi_inv =
        conn->transport_matrix(Path::line(base, pts[j]), 1e-10).inverse();
    pulled_tractor[j] = phi_inv * xt;  // H(x)(X,X) = H0(phi^-1 X, phi^-1 X)
  }
  auto bgg_of = [&](const MatrixXd& h0, size_t j) {
    return pulled_tractor[j].dot(h0 * pulled_tractor[j]);
  };

  MatrixXd h0;
  if (opts.prescribed_base_metric) {
    h0 = *opts.prescribed_base_metric;
  } else {
    // calibrate to the Einstein scale: the parallel metric whose BGG
    // solution is identically 1 in the chart trivialization
    MatrixXd samples(pts.size(), kernel.size());
    for (size_t j = 0; j < pts.size(); ++j)
      for (size_t i = 0; i < kernel.size(); ++i)
        samples(j, i) = bgg_of(kernel[i].base_value(), j);
    VectorXd rhs = VectorXd::Ones(pts.size());
    VectorXd c = samples.colPivHouseholderQr().solve(rhs);
    h0 = MatrixXd::Zero(n + 1, n + 1);
    for (size_t i = 0; i < kernel.size(); ++i)
      h0 += c[i] * kernel[i].base_value();
  }

  rep.tractor_metric_signature = forms::signature(
      forms::SymmetricForm(MatrixXd(0.5 * (h0 + h0.transpose()))));

  double worst = 0.0;
  for (size_t j = 0; j < pts.size(); ++j) {
    double sv = bgg_of(h0, j);
    if (!opts.prescribed_base_metric)
      worst = std::max(worst, std::abs(sv - 1.0));
    double scale = std::max(h0.norm(), 1e-300);
    if (std::abs(sv) <= 1e-9 * scale)
      rep.labels.insert("ZERO");
    else
      rep.labels.insert(sv > 0 ? "PLUS" : "MINUS");
  }
  rep.canonical_scale_residual = worst;
  return rep;
}

}  // namespace cartan::bgg
