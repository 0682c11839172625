#include "cartan/model.hpp"

#include <algorithm>

namespace cartan::model {

namespace {

VectorXd vec(const MatrixXd& m) {
  return Eigen::Map<const VectorXd>(m.data(), m.size());
}

}  // namespace

std::string label_name(PTypeLabel label) {
  switch (label) {
    case PTypeLabel::Plus: return "PLUS";
    case PTypeLabel::Zero: return "ZERO";
    case PTypeLabel::Minus: return "MINUS";
    case PTypeLabel::IsolatedPlus: return "ISOLATED_PLUS";
    case PTypeLabel::IsolatedMinus: return "ISOLATED_MINUS";
    case PTypeLabel::Hypersurface: return "HYPERSURFACE";
    case PTypeLabel::OpenPlus: return "OPEN_PLUS";
    case PTypeLabel::OpenMinus: return "OPEN_MINUS";
    case PTypeLabel::Open: return "OPEN";
    case PTypeLabel::Single: return "SINGLE";
    case PTypeLabel::Ambiguous: return "AMBIGUOUS";
  }
  return "?";
}

void validate_datum(const ReductionDatum& datum,
                    const std::optional<forms::SymmetricForm>& ambient) {
  if (const auto* j = std::get_if<ComplexStructureDatum>(&datum)) {
    const MatrixXd& m = j->j;
    int n = static_cast<int>(m.rows());
    if ((m * m + MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-10)
      throw InvalidForm("complex-structure datum: J^2 != -I");
    if (ambient) {
      const MatrixXd& f = ambient->matrix();
      if ((m.transpose() * f * m - f).cwiseAbs().maxCoeff() > 1e-9)
        throw InvalidForm("complex-structure datum: J not orthogonal");
    }
  } else if (const auto* t = std::get_if<ThreeFormDatum>(&datum)) {
    if (t->phi.max_antisymmetry_residual() > 1e-12)
      throw InvalidForm("three-form datum is not antisymmetric");
  }
}

ReductionDatum model_solution_value(const ReductionDatum& datum,
                                    const lie::GroupElement& g) {
  const MatrixXd& m = g.m;
  return std::visit(
      [&](const auto& d) -> ReductionDatum {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, SymmetricFormDatum>) {
          return SymmetricFormDatum{
              forms::SymmetricForm(m.transpose() * d.form.matrix() * m)};
        } else if constexpr (std::is_same_v<T, VectorDatum>) {
          return VectorDatum{m.partialPivLu().solve(d.v)};
        } else if constexpr (std::is_same_v<T, HermitianFormDatum>) {
          return HermitianFormDatum{
              forms::HermitianForm(MatrixXd(m.transpose() * d.form.matrix() * m))};
        } else if constexpr (std::is_same_v<T, ComplexStructureDatum>) {
          return ComplexStructureDatum{m.partialPivLu().solve(d.j * m)};
        } else {
          return ThreeFormDatum{d.phi.group_act(m.inverse())};
        }
      },
      datum);
}

VectorXd datum_algebra_action(const ReductionDatum& datum, const MatrixXd& a) {
  return std::visit(
      [&](const auto& d) -> VectorXd {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, SymmetricFormDatum>) {
          return vec(lie::act_on_form(a, d.form.matrix()));
        } else if constexpr (std::is_same_v<T, VectorDatum>) {
          return a * d.v;
        } else if constexpr (std::is_same_v<T, HermitianFormDatum>) {
          return vec(lie::act_on_form(a, d.form.matrix()));
        } else if constexpr (std::is_same_v<T, ComplexStructureDatum>) {
          return vec(lie::act_on_endomorphism(a, d.j));
        } else {
          return d.phi.algebra_act(a).flatten();
        }
      },
      datum);
}

double datum_distance(const ReductionDatum& a, const ReductionDatum& b) {
  if (a.index() != b.index())
    throw ScenarioMismatch("cannot compare different datum variants");
  return std::visit(
      [&](const auto& da) -> double {
        using T = std::decay_t<decltype(da)>;
        const auto& db = std::get<T>(b);
        if constexpr (std::is_same_v<T, SymmetricFormDatum>) {
          return (da.form.matrix() - db.form.matrix()).norm();
        } else if constexpr (std::is_same_v<T, VectorDatum>) {
          return (da.v - db.v).norm();
        } else if constexpr (std::is_same_v<T, HermitianFormDatum>) {
          return (da.form.matrix() - db.form.matrix()).norm();
        } else if constexpr (std::is_same_v<T, ComplexStructureDatum>) {
          return (da.j - db.j).norm();
        } else {
          return (da.phi.flatten() - db.phi.flatten()).norm();
        }
      },
      a);
}

// --- model construction ------------------------------------------------------

HomogeneousModel::HomogeneousModel(Kind k, lie::StructureTag tag)
    : kind_(k), tag_(std::move(tag)) {}

namespace {

forms::SymmetricForm null_frame_form(int p, int q) {
  int m = p + q + 2;
  MatrixXd f = MatrixXd::Zero(m, m);
  f(0, m - 1) = 1.0;
  f(m - 1, 0) = 1.0;
  for (int i = 1; i <= p; ++i) f(i, i) = 1.0;
  for (int i = p + 1; i <= p + q; ++i) f(i, i) = -1.0;
  return forms::SymmetricForm(f);
}

forms::HermitianForm null_frame_hermitian(int p, int q) {
  int m = p + q + 2;
  Eigen::MatrixXcd f = Eigen::MatrixXcd::Zero(m, m);
  f(0, m - 1) = 1.0;
  f(m - 1, 0) = 1.0;
  for (int i = 1; i <= p; ++i) f(i, i) = 1.0;
  for (int i = p + 1; i <= p + q; ++i) f(i, i) = -1.0;
  return forms::HermitianForm(f);
}

void eigen_split(const MatrixXd& f, MatrixXd& plus, MatrixXd& minus) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(f);
  std::vector<int> pos, neg;
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    (es.eigenvalues()[i] > 0 ? pos : neg).push_back(i);
  plus.resize(f.rows(), pos.size());
  minus.resize(f.rows(), neg.size());
  for (size_t i = 0; i < pos.size(); ++i)
    plus.col(i) = es.eigenvectors().col(pos[i]);
  for (size_t i = 0; i < neg.size(); ++i)
    minus.col(i) = es.eigenvectors().col(neg[i]);
}

}  // namespace

HomogeneousModel HomogeneousModel::projective_sphere(int n) {
  HomogeneousModel m(Kind::ProjectiveSphere, lie::StructureTag::sl(n + 1));
  m.ambient_dim_ = n + 1;
  m.mode_ = QuotientMode::Ray;
  m.algebra_ = lie::sl_basis(n + 1);
  m.base_point_ = VectorXd::Zero(n + 1);
  m.base_point_[0] = 1.0;
  std::vector<lie::AlgebraElement> gm;
  for (int i = 1; i <= n; ++i) {
    MatrixXd e = MatrixXd::Zero(n + 1, n + 1);
    e(i, 0) = 1.0;
    gm.push_back({e, m.tag_});
  }
  m.g_minus_ = lie::AlgebraBasis(std::move(gm));
  return m;
}

HomogeneousModel HomogeneousModel::conformal_sphere(int p, int q) {
  forms::SymmetricForm f = null_frame_form(p, q);
  HomogeneousModel m(Kind::ConformalSphere, lie::StructureTag::so(f));
  int dim = p + q + 2;
  m.ambient_dim_ = dim;
  m.mode_ = QuotientMode::Ray;
  m.form_ = f;
  m.isotropic_points_ = true;
  m.algebra_ = lie::so_basis(f);
  m.base_point_ = VectorXd::Zero(dim);
  m.base_point_[0] = 1.0;
  std::vector<lie::AlgebraElement> gm;
  for (int i = 1; i <= p + q; ++i) {
    double sign = f.matrix()(i, i);
    MatrixXd e = MatrixXd::Zero(dim, dim);
    e(i, 0) = 1.0;
    e(dim - 1, i) = -sign;
    gm.push_back({e, m.tag_});
  }
  m.g_minus_ = lie::AlgebraBasis(std::move(gm));
  eigen_split(f.matrix(), m.eig_plus_, m.eig_minus_);
  return m;
}

HomogeneousModel HomogeneousModel::complex_projective(int n) {
  HomogeneousModel m(Kind::ComplexProjective,
                     lie::StructureTag::sl_complex(n + 1));
  m.ambient_dim_ = 2 * (n + 1);
  m.mode_ = QuotientMode::ComplexLine;
  m.algebra_ = lie::sl_complex_basis(n + 1);
  m.base_point_ = VectorXd::Zero(2 * (n + 1));
  m.base_point_[0] = 1.0;
  std::vector<lie::AlgebraElement> gm;
  const std::complex<double> I(0, 1);
  for (int i = 1; i <= n; ++i) {
    Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(n + 1, n + 1);
    e(i, 0) = 1.0;
    gm.push_back({forms::real_representation(e), m.tag_});
    e(i, 0) = I;
    gm.push_back({forms::real_representation(e), m.tag_});
  }
  m.g_minus_ = lie::AlgebraBasis(std::move(gm));
  return m;
}

HomogeneousModel HomogeneousModel::cr_sphere(int p, int q) {
  forms::HermitianForm f = null_frame_hermitian(p, q);
  HomogeneousModel m(Kind::CRSphere, lie::StructureTag::su(f));
  int mc = p + q + 2;  // complex dimension
  m.ambient_dim_ = 2 * mc;
  m.mode_ = QuotientMode::ComplexLine;
  m.form_ = forms::SymmetricForm(f.matrix());  // real-rep pairing
  m.isotropic_points_ = true;
  m.algebra_ = lie::su_basis(f);
  m.base_point_ = VectorXd::Zero(2 * mc);
  m.base_point_[0] = 1.0;

  const std::complex<double> I(0, 1);
  std::vector<lie::AlgebraElement> gm;
  for (int j = 1; j <= p + q; ++j) {
    double sign = j <= p ? 1.0 : -1.0;
    Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(mc, mc);
    e(j, 0) = 1.0;
    e(mc - 1, j) = -sign;
    gm.push_back({forms::real_representation(e), m.tag_});
    e.setZero();
    e(j, 0) = I;
    e(mc - 1, j) = I * sign;
    gm.push_back({forms::real_representation(e), m.tag_});
  }
  Eigen::MatrixXcd w = Eigen::MatrixXcd::Zero(mc, mc);
  w(mc - 1, 0) = I;
  gm.push_back({forms::real_representation(w), m.tag_});
  m.g_minus_ = lie::AlgebraBasis(std::move(gm));
  eigen_split(f.matrix(), m.eig_plus_, m.eig_minus_);
  return m;
}

double HomogeneousModel::point_residual(const VectorXd& rep) const {
  double res = std::abs(rep.norm() - 1.0);
  if (isotropic_points_)
    res = std::max(res, std::abs(rep.dot(form_->matrix() * rep)));
  return res;
}

void HomogeneousModel::require_valid(const ModelPoint& x) const {
  if (x.rep.size() != ambient_dim_)
    throw InvalidPoint("model point has wrong ambient dimension");
  if (x.mode != mode_) throw InvalidPoint("model point quotient mode mismatch");
  if (x.rep.norm() < 1e-12) throw InvalidPoint("zero representative");
  if (point_residual(VectorXd(x.rep / x.rep.norm())) > 1e-7)
    throw InvalidPoint("representative violates the model constraint");
}

ModelPoint HomogeneousModel::make_point(VectorXd rep) const {
  double n = rep.norm();
  if (n < 1e-12) throw InvalidPoint("zero representative");
  ModelPoint x{rep / n, mode_};
  require_valid(x);
  return x;
}

ModelPoint HomogeneousModel::sample_point(num::Rng& rng) const {
  if (!isotropic_points_) {
    return ModelPoint{rng.sphere(ambient_dim_), mode_};
  }
  VectorXd u = rng.sphere(static_cast<int>(eig_plus_.cols()));
  VectorXd w = rng.sphere(static_cast<int>(eig_minus_.cols()));
  VectorXd x = eig_plus_ * u + eig_minus_ * w;
  return ModelPoint{x / x.norm(), mode_};
}

ModelPoint HomogeneousModel::act(const lie::GroupElement& g,
                                 const ModelPoint& x) const {
  VectorXd y = g.m * x.rep;
  return ModelPoint{retract(y), mode_};
}

VectorXd HomogeneousModel::retract(VectorXd y) const {
  if (!isotropic_points_) return y / y.norm();
  const MatrixXd& f = form_->matrix();
  for (int iter = 0; iter < 4; ++iter) {
    y /= y.norm();
    VectorXd fy = f * y;
    double c = y.dot(fy);
    if (std::abs(c) < 1e-15) break;
    // Newton step along the transversal F y
    y -= (c / (2.0 * fy.squaredNorm())) * fy;
  }
  return y / y.norm();
}

std::optional<MatrixXd> HomogeneousModel::complex_structure() const {
  if (mode_ != QuotientMode::ComplexLine) return std::nullopt;
  return forms::complex_structure(ambient_dim_ / 2);
}

MatrixXd HomogeneousModel::standard_orthogonal_complex_structure() const {
  if (!form_) throw ScenarioMismatch("model carries no ambient form");
  if (eig_plus_.cols() % 2 != 0 || eig_minus_.cols() % 2 != 0)
    throw ScenarioMismatch(
        "orthogonal complex structure needs even signature counts");
  MatrixXd j = MatrixXd::Zero(ambient_dim_, ambient_dim_);
  auto rotate_pairs = [&](const MatrixXd& basis) {
    for (int k = 0; k + 1 < basis.cols(); k += 2) {
      j += basis.col(k + 1) * basis.col(k).transpose() -
           basis.col(k) * basis.col(k + 1).transpose();
    }
  };
  rotate_pairs(eig_plus_);
  rotate_pairs(eig_minus_);
  return j;
}

// --- classification ----------------------------------------------------------

namespace {

enum class Band { Negative, Zero, Positive, Ambiguous };

Band band_of(double t, double scale, double zero_tol) {
  double eps = zero_tol * std::max(scale, 1e-300);
  if (std::abs(t) <= eps) return Band::Zero;
  if (std::abs(t) <= kAmbiguousBand * eps) return Band::Ambiguous;
  return t > 0 ? Band::Positive : Band::Negative;
}

double pairing_scale(const MatrixXd& f, const VectorXd& a, const VectorXd& b) {
  return f.norm() * a.norm() * b.norm();
}

}  // namespace

PTypeLabel p_type(const HomogeneousModel& model, const ReductionDatum& datum,
                  const ModelPoint& x, double zero_tol) {
  model.require_valid(x);
  validate_datum(datum, model.ambient_form());
  using Kind = HomogeneousModel::Kind;

  if (const auto* d = std::get_if<SymmetricFormDatum>(&datum)) {
    if (model.kind() != Kind::ProjectiveSphere)
      throw ScenarioMismatch("symmetric-form datum requires the projective model");
    if (d->form.dim() != model.ambient_dim())
      throw ScenarioMismatch("datum dimension mismatch");
    double t = d->form.apply(x.rep, x.rep);
    switch (band_of(t, d->form.matrix().norm() * x.rep.squaredNorm(), zero_tol)) {
      case Band::Positive: return PTypeLabel::Plus;
      case Band::Negative: return PTypeLabel::Minus;
      case Band::Zero: return PTypeLabel::Zero;
      case Band::Ambiguous: return PTypeLabel::Ambiguous;
    }
  }

  if (const auto* d = std::get_if<VectorDatum>(&datum)) {
    if (model.kind() == Kind::ConformalSphere) {
      const MatrixXd& f = model.ambient_form()->matrix();
      const VectorXd& v = d->v;
      double vv = v.dot(f * v);
      double vscale = f.norm() * v.squaredNorm();
      double t = x.rep.dot(f * v);
      Band tb = band_of(t, pairing_scale(f, x.rep, v), zero_tol);
      if (std::abs(vv) > zero_tol * vscale) {
        // non-null datum: three orbits by the sign of the pairing
        switch (tb) {
          case Band::Positive: return PTypeLabel::Plus;
          case Band::Negative: return PTypeLabel::Minus;
          case Band::Zero: return PTypeLabel::Zero;
          case Band::Ambiguous: return PTypeLabel::Ambiguous;
        }
      }
      // null datum: five orbits
      VectorXd vhat = v / v.norm();
      if ((x.rep - vhat).norm() < 1e-8) return PTypeLabel::IsolatedPlus;
      if ((x.rep + vhat).norm() < 1e-8) return PTypeLabel::IsolatedMinus;
      switch (tb) {
        case Band::Positive: return PTypeLabel::OpenPlus;
        case Band::Negative: return PTypeLabel::OpenMinus;
        case Band::Zero: return PTypeLabel::Hypersurface;
        case Band::Ambiguous: return PTypeLabel::Ambiguous;
      }
    }
    if (model.kind() == Kind::CRSphere) {
      const MatrixXd& f = model.ambient_form()->matrix();
      MatrixXd j = *model.complex_structure();
      double re = x.rep.dot(f * d->v);
      double im = -x.rep.dot(f * (j * d->v));
      double t = std::hypot(re, im);
      double eps = zero_tol * std::max(pairing_scale(f, x.rep, d->v), 1e-300);
      if (t <= eps) return PTypeLabel::Zero;
      if (t <= kAmbiguousBand * eps) return PTypeLabel::Ambiguous;
      return PTypeLabel::Open;
    }
    throw ScenarioMismatch("vector datum requires a conformal or CR model");
  }

  if (const auto* d = std::get_if<HermitianFormDatum>(&datum)) {
    if (model.kind() != Kind::ComplexProjective)
      throw ScenarioMismatch(
          "hermitian-form datum requires the complex projective model");
    if (d->form.real_dim() != model.ambient_dim())
      throw ScenarioMismatch("datum dimension mismatch");
    double t = d->form.apply_real(x.rep);
    switch (band_of(t, d->form.matrix().norm() * x.rep.squaredNorm(), zero_tol)) {
      case Band::Positive: return PTypeLabel::Plus;
      case Band::Negative: return PTypeLabel::Minus;
      case Band::Zero: return PTypeLabel::Zero;
      case Band::Ambiguous: return PTypeLabel::Ambiguous;
    }
  }

  if (std::get_if<ComplexStructureDatum>(&datum)) {
    if (model.kind() != Kind::ConformalSphere)
      throw ScenarioMismatch("complex-structure datum requires a conformal model");
    return PTypeLabel::Single;
  }

  if (const auto* d = std::get_if<ThreeFormDatum>(&datum)) {
    if (model.kind() != Kind::ConformalSphere || d->phi.dim() != 7 ||
        model.ambient_dim() != 7)
      throw ScenarioMismatch("three-form datum requires the (2,3) conformal model");
    return PTypeLabel::Single;
  }

  throw ScenarioMismatch("unsupported model/datum combination");
}

std::set<std::string> expected_labels(const HomogeneousModel& model,
                                      const ReductionDatum& datum) {
  using Kind = HomogeneousModel::Kind;
  std::set<std::string> out;
  if (const auto* d = std::get_if<SymmetricFormDatum>(&datum)) {
    forms::Signature sig = d->form.signature();
    if (sig.positive > 0) out.insert("PLUS");
    if (sig.negative > 0) out.insert("MINUS");
    if (sig.positive > 0 && sig.negative > 0) out.insert("ZERO");
    return out;
  }
  if (const auto* d = std::get_if<HermitianFormDatum>(&datum)) {
    forms::Signature sig = d->form.signature();
    if (sig.positive > 0) out.insert("PLUS");
    if (sig.negative > 0) out.insert("MINUS");
    if (sig.positive > 0 && sig.negative > 0) out.insert("ZERO");
    return out;
  }
  if (const auto* d = std::get_if<VectorDatum>(&datum)) {
    const MatrixXd& f = model.ambient_form()->matrix();
    if (model.kind() == Kind::CRSphere) {
      // lines in v^perp exist iff the restriction there is indefinite
      forms::HermitianForm h(f);
      MatrixXd comp = forms::orthocomplement(h, MatrixXd(d->v));
      forms::Signature sig =
          forms::signature(forms::SymmetricForm(
              MatrixXd(comp.transpose() * f * comp)));
      out.insert("OPEN");
      if (sig.positive > 0 && sig.negative > 0) out.insert("ZERO");
      return out;
    }
    double vv = d->v.dot(f * d->v);
    double vscale = f.norm() * d->v.squaredNorm();
    if (std::abs(vv) > kLabelTol * vscale) {
      out = {"PLUS", "MINUS"};
      forms::SymmetricForm fs(f);
      MatrixXd comp = forms::orthocomplement(fs, MatrixXd(d->v));
      forms::Signature sig = forms::signature(
          forms::SymmetricForm(MatrixXd(comp.transpose() * f * comp)));
      if (sig.positive > 0 && sig.negative > 0) out.insert("ZERO");
      return out;
    }
    out = {"ISOLATED_PLUS", "ISOLATED_MINUS", "OPEN_PLUS", "OPEN_MINUS"};
    forms::Signature amb = forms::signature(forms::SymmetricForm(f));
    if (amb.positive > 1 && amb.negative > 1) out.insert("HYPERSURFACE");
    return out;
  }
  return {"SINGLE"};
}

double flow_identity_check(const HomogeneousModel& model,
                           const ReductionDatum& datum,
                           const lie::GroupElement& u,
                           const lie::AlgebraElement& x) {
  double xres = model.g_minus().span_residual(x.m);
  if (xres > 1e-10 * std::max(1.0, x.m.norm()))
    throw InvalidDirection("X is not in the declared complement g_-");
  ReductionDatum at_u = model_solution_value(datum, u);
  if (datum_distance(at_u, datum) > 1e-8)
    throw InvalidPoint("u does not stabilize the datum (s(u) != alpha)");
  lie::GroupElement ex = lie::exponential(x);
  lie::GroupElement uex{u.m * ex.m, u.tag};
  ReductionDatum lhs = model_solution_value(datum, uex);
  ReductionDatum rhs = model_solution_value(datum, ex);
  return datum_distance(lhs, rhs);
}

lie::AlgebraBasis datum_stabilizer(const HomogeneousModel& model,
                                   const ReductionDatum& datum) {
  return lie::stabilizer_algebra(
      model.algebra(),
      [&](const MatrixXd& a) { return datum_algebra_action(datum, a); });
}

// --- targeted representatives ------------------------------------------------

namespace {

/// A null vector of the restriction of f to span(basis columns), combining
/// one positive and one negative eigendirection of the Gram matrix.
std::optional<VectorXd> null_vector_in(const MatrixXd& f,
                                       const MatrixXd& basis) {
  MatrixXd gram = basis.transpose() * f * basis;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (gram + gram.transpose()));
  const VectorXd& ev = es.eigenvalues();
  double scale = ev.cwiseAbs().maxCoeff();
  int ip = -1, in = -1;
  for (int i = 0; i < ev.size(); ++i) {
    if (ev[i] > 1e-9 * scale) ip = i;
    if (ev[i] < -1e-9 * scale && in < 0) in = i;
  }
  if (ip < 0 || in < 0) return std::nullopt;
  VectorXd x = basis * (es.eigenvectors().col(ip) / std::sqrt(ev[ip]) +
                        es.eigenvectors().col(in) / std::sqrt(-ev[in]));
  return x;
}

}  // namespace

std::vector<ModelPoint> targeted_points(const HomogeneousModel& model,
                                        const ReductionDatum& datum) {
  using Kind = HomogeneousModel::Kind;
  std::vector<ModelPoint> out;
  num::Rng rng(777);

  auto push = [&](const VectorXd& rep) {
    out.push_back(model.make_point(rep));
  };

  if (const auto* d = std::get_if<SymmetricFormDatum>(&datum)) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(d->form.matrix());
    const VectorXd& ev = es.eigenvalues();
    double scale = ev.cwiseAbs().maxCoeff();
    int ip = -1, in = -1;
    for (int i = 0; i < ev.size(); ++i) {
      if (ev[i] > 1e-9 * scale) ip = i;
      if (ev[i] < -1e-9 * scale && in < 0) in = i;
    }
    if (ip >= 0) push(es.eigenvectors().col(ip));
    if (in >= 0) push(es.eigenvectors().col(in));
    if (ip >= 0 && in >= 0)
      push(es.eigenvectors().col(ip) / std::sqrt(ev[ip]) +
           es.eigenvectors().col(in) / std::sqrt(-ev[in]));
    return out;
  }

  if (const auto* d = std::get_if<HermitianFormDatum>(&datum)) {
    // the real representation has doubled eigenspaces; same construction
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(d->form.matrix());
    const VectorXd& ev = es.eigenvalues();
    double scale = ev.cwiseAbs().maxCoeff();
    int ip = -1, in = -1;
    for (int i = 0; i < ev.size(); ++i) {
      if (ev[i] > 1e-9 * scale) ip = i;
      if (ev[i] < -1e-9 * scale && in < 0) in = i;
    }
    if (ip >= 0) push(es.eigenvectors().col(ip));
    if (in >= 0) push(es.eigenvectors().col(in));
    if (ip >= 0 && in >= 0)
      push(es.eigenvectors().col(ip) / std::sqrt(ev[ip]) +
           es.eigenvectors().col(in) / std::sqrt(-ev[in]));
    return out;
  }

  if (const auto* d = std::get_if<VectorDatum>(&datum)) {
    const MatrixXd& f = model.ambient_form()->matrix();
    const VectorXd& v = d->v;
    double vv = v.dot(f * v);
    double vscale = f.norm() * v.squaredNorm();
    bool null_datum = model.kind() == Kind::ConformalSphere &&
                      std::abs(vv) <= kLabelTol * vscale;

    if (null_datum) {
      push(v);
      push(-v);
    }
    // a point with vanishing pairing: null vector inside v^perp
    MatrixXd comp;
    if (model.kind() == Kind::CRSphere) {
      forms::HermitianForm h(f);
      comp = forms::orthocomplement(h, MatrixXd(v));
    } else {
      // the form may be degenerate on v^perp for a null datum; build the
      // complement directly as the kernel of the pairing row
      comp = num::nullspace(MatrixXd((f * v).transpose()), 1e-12);
    }
    if (auto x = null_vector_in(f, comp)) {
      VectorXd cand = *x;
      if (!null_datum || (cand / cand.norm() - v / v.norm()).norm() > 1e-6)
        push(cand);
    }
    // open representatives of both signs where applicable
    for (int trial = 0; trial < 200 && out.size() < 12; ++trial) {
      ModelPoint x = model.sample_point(rng);
      double t = x.rep.dot(f * v);
      if (std::abs(t) > 1e-3) {
        push(x.rep);
        push(-x.rep);
        break;
      }
    }
    return out;
  }

  // single-orbit data: representatives are ordinary samples
  for (int k = 0; k < 3; ++k) out.push_back(model.sample_point(rng));
  return out;
}

// --- local stratum geometry ---------------------------------------------------

namespace {

/// Defining function(s) of the zero-type stratum for the scenario.
std::vector<std::function<double(const VectorXd&)>> defining_functions(
    const HomogeneousModel& model, const ReductionDatum& datum) {
  using Kind = HomogeneousModel::Kind;
  if (const auto* d = std::get_if<SymmetricFormDatum>(&datum)) {
    MatrixXd m = d->form.matrix();
    return {[m](const VectorXd& y) { return y.dot(m * y); }};
  }
  if (const auto* d = std::get_if<HermitianFormDatum>(&datum)) {
    MatrixXd m = d->form.matrix();
    return {[m](const VectorXd& y) { return y.dot(m * y); }};
  }
  if (const auto* d = std::get_if<VectorDatum>(&datum)) {
    MatrixXd f = model.ambient_form()->matrix();
    VectorXd v = d->v;
    if (model.kind() == Kind::CRSphere) {
      MatrixXd j = *model.complex_structure();
      return {[f, v](const VectorXd& y) { return y.dot(f * v); },
              [f, j, v](const VectorXd& y) { return -y.dot(f * (j * v)); }};
    }
    return {[f, v](const VectorXd& y) { return y.dot(f * v); }};
  }
  return {};
}

struct LocalGeometry {
  double grad_sigma_min = 0.0;
  double grad_sigma_max = 0.0;
  int jacobian_rank = 0;
  double hess_det = 0.0;
  std::string classification = "unresolved";
};

LocalGeometry local_geometry(const HomogeneousModel& model,
                             const ReductionDatum& datum, const ModelPoint& x) {
  auto fs = defining_functions(model, datum);
  LocalGeometry out;
  if (fs.empty()) return out;
  const int n = model.ambient_dim();

  // tangent directions: orthogonal to scalings (x, Jx) and to the model
  // constraint gradient (F x for the null cone)
  std::vector<VectorXd> rows;
  rows.push_back(x.rep);
  if (auto j = model.complex_structure()) rows.push_back(*j * x.rep);
  if (model.requires_isotropic())
    rows.push_back(model.ambient_form()->matrix() * x.rep);
  MatrixXd rowm(rows.size(), n);
  for (size_t i = 0; i < rows.size(); ++i) rowm.row(i) = rows[i].transpose();
  MatrixXd tangent = num::nullspace(rowm, 1e-10);
  const int k = static_cast<int>(tangent.cols());

  auto move = [&](const VectorXd& w, double eps) {
    return model.retract(x.rep + eps * w);
  };

  const double eps = 1e-6;
  MatrixXd jac(fs.size(), k);
  for (int i = 0; i < k; ++i) {
    VectorXd wp = move(tangent.col(i), eps), wm = move(tangent.col(i), -eps);
    for (size_t fidx = 0; fidx < fs.size(); ++fidx)
      jac(fidx, i) = (fs[fidx](wp) - fs[fidx](wm)) / (2 * eps);
  }
  Eigen::JacobiSVD<MatrixXd> svd(jac);
  out.grad_sigma_max = svd.singularValues()(0);
  out.grad_sigma_min = svd.singularValues()(svd.singularValues().size() - 1);
  double rank_tol = 1e-5;
  out.jacobian_rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > rank_tol) ++out.jacobian_rank;

  if (out.jacobian_rank == static_cast<int>(fs.size())) {
    out.classification = fs.size() == 1 ? "hypersurface" : "codim2";
    return out;
  }
  if (out.jacobian_rank == 0 && fs.size() == 1) {
    const double he = 1e-4;
    MatrixXd hess(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = i; j < k; ++j) {
        double fpp = fs[0](move(tangent.col(i) + tangent.col(j), he));
        double fpm = fs[0](move(tangent.col(i) - tangent.col(j), he));
        double fmp = fs[0](move(-tangent.col(i) + tangent.col(j), he));
        double fmm = fs[0](move(-(tangent.col(i) + tangent.col(j)), he));
        hess(i, j) = hess(j, i) = (fpp - fpm - fmp + fmm) / (4 * he * he);
      }
    out.hess_det = hess.determinant();
    if (std::abs(out.hess_det) > 1e-5) out.classification = "isolated";
  }
  return out;
}

bool zero_type_label(PTypeLabel l) {
  return l == PTypeLabel::Zero || l == PTypeLabel::Hypersurface ||
         l == PTypeLabel::IsolatedPlus || l == PTypeLabel::IsolatedMinus;
}

}  // namespace

report::StrataReport orbit_decompose_grid(const HomogeneousModel& model,
                                          const ReductionDatum& datum,
                                          const OrbitGridOptions& opts) {
  report::StrataReport out;
  num::Rng rng(opts.seed);
  std::vector<ModelPoint> pts;
  pts.reserve(opts.n_samples);
  for (int i = 0; i < opts.n_samples; ++i) pts.push_back(model.sample_point(rng));

  std::vector<report::SampleRow> rows(pts.size());
  num::parallel_for(
      static_cast<int>(pts.size()), opts.threads, [&](int i) {
        report::SampleRow row;
        row.coords = pts[i].rep;
        PTypeLabel l = p_type(model, datum, pts[i], opts.zero_tol);
        row.label = label_name(l);
        rows[i] = std::move(row);
      });
  for (auto& r : rows) out.add(std::move(r));

  for (const ModelPoint& tp : targeted_points(model, datum)) {
    report::SampleRow row;
    row.coords = tp.rep;
    row.targeted = true;
    PTypeLabel l = p_type(model, datum, tp, opts.zero_tol);
    row.label = label_name(l);
    if (opts.diagnostics && zero_type_label(l)) {
      LocalGeometry lg = local_geometry(model, datum, tp);
      row.diagnostics["grad_max"] = lg.grad_sigma_max;
      row.diagnostics["grad_min"] = lg.grad_sigma_min;
      row.diagnostics["jac_rank"] = lg.jacobian_rank;
      row.diagnostics["hess_det"] = lg.hess_det;
      auto it = out.stratum_geometry.find(row.label);
      if (it == out.stratum_geometry.end())
        out.stratum_geometry[row.label] = lg.classification;
    }
    out.add(std::move(row));
  }
  return out;
}

int h_orbit_invariance_check(const HomogeneousModel& model,
                             const ReductionDatum& datum, const ModelPoint& x,
                             int n_group_samples, std::uint64_t seed) {
  lie::AlgebraBasis stab = datum_stabilizer(model, datum);
  PTypeLabel base = p_type(model, datum, x);
  num::Rng rng(seed);
  int disagreements = 0;
  for (int k = 0; k < n_group_samples; ++k) {
    if (stab.dim() == 0) break;
    VectorXd c = 0.6 * rng.gaussian(stab.dim());
    lie::GroupElement h = lie::exponential(stab.combine(c));
    ModelPoint y = model.act(h, x);
    if (p_type(model, datum, y) != base) ++disagreements;
  }
  return disagreements;
}

std::pair<lie::AlgebraBasis, lie::AlgebraBasis> stabilizer_pair(
    const HomogeneousModel& model, const ReductionDatum& datum,
    const ModelPoint& x) {
  model.require_valid(x);
  lie::AlgebraBasis h = datum_stabilizer(model, datum);

  // line/ray stabilizer: A x must stay inside span{x} (plus J x for
  // complex lines)
  MatrixXd proj =
      MatrixXd::Identity(model.ambient_dim(), model.ambient_dim()) -
      x.rep * x.rep.transpose() / x.rep.squaredNorm();
  if (auto j = model.complex_structure()) {
    VectorXd jx = (*j) * x.rep;
    proj -= jx * jx.transpose() / jx.squaredNorm();
  }
  lie::AlgebraBasis px = lie::stabilizer_algebra(
      model.algebra(),
      [&](const MatrixXd& a) { return VectorXd(proj * (a * x.rep)); });
  return {h, lie::intersect_algebras(h, px)};
}

}  // namespace cartan::model
