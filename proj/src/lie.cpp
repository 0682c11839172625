#include "cartan/lie.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include "cartan/numerics.hpp"

namespace cartan::lie {

namespace {

VectorXd vec(const MatrixXd& m) {
  return Eigen::Map<const VectorXd>(m.data(), m.size());
}

MatrixXd unvec(const VectorXd& v, int rows, int cols) {
  return Eigen::Map<const MatrixXd>(v.data(), rows, cols);
}

MatrixXcd to_complex(const MatrixXd& real_rep) {
  int n = static_cast<int>(real_rep.rows()) / 2;
  MatrixXcd m(n, n);
  m.real() = real_rep.topLeftCorner(n, n);
  m.imag() = real_rep.bottomLeftCorner(n, n);
  return m;
}

}  // namespace

StructureTag StructureTag::so(forms::SymmetricForm f) {
  StructureTag t;
  t.kind = Kind::Orthogonal;
  t.matrix_dim = f.dim();
  t.form = std::move(f);
  return t;
}

StructureTag StructureTag::sl_complex(int n) {
  return {Kind::SpecialLinearComplex, 2 * n, {}, {}};
}

StructureTag StructureTag::su(forms::HermitianForm f) {
  StructureTag t;
  t.kind = Kind::SpecialUnitary;
  t.matrix_dim = f.real_dim();
  t.hform = std::move(f);
  return t;
}

std::string StructureTag::name() const {
  switch (kind) {
    case Kind::GeneralLinear:
      return "gl(" + std::to_string(matrix_dim) + ",R)";
    case Kind::SpecialLinear:
      return "sl(" + std::to_string(matrix_dim) + ",R)";
    case Kind::Orthogonal: {
      auto sig = form->signature();
      return "so(" + std::to_string(sig.positive) + "," +
             std::to_string(sig.negative) + ")";
    }
    case Kind::SpecialLinearComplex:
      return "sl(" + std::to_string(matrix_dim / 2) + ",C)";
    case Kind::SpecialUnitary: {
      auto sig = hform->signature();
      return "su(" + std::to_string(sig.positive) + "," +
             std::to_string(sig.negative) + ")";
    }
  }
  return "?";
}

int StructureTag::algebra_dim() const {
  int n = matrix_dim;
  switch (kind) {
    case Kind::GeneralLinear:
      return n * n;
    case Kind::SpecialLinear:
      return n * n - 1;
    case Kind::Orthogonal:
      return n * (n - 1) / 2;
    case Kind::SpecialLinearComplex: {
      int m = n / 2;
      return 2 * (m * m - 1);
    }
    case Kind::SpecialUnitary: {
      int m = n / 2;
      return m * m - 1;
    }
  }
  return 0;
}

double membership_residual(const AlgebraElement& a) {
  const MatrixXd& m = a.m;
  double res = 0.0;
  switch (a.tag.kind) {
    case StructureTag::Kind::GeneralLinear:
      break;
    case StructureTag::Kind::SpecialLinear:
      res = std::abs(m.trace());
      break;
    case StructureTag::Kind::Orthogonal: {
      const MatrixXd& f = a.tag.form->matrix();
      res = (m.transpose() * f + f * m).norm();
      break;
    }
    case StructureTag::Kind::SpecialLinearComplex: {
      MatrixXd j = forms::complex_structure(a.tag.matrix_dim / 2);
      res = (m * j - j * m).norm();
      res = std::max(res, std::abs(m.trace()));             // 2 Re tr_C
      res = std::max(res, std::abs((j * m).trace()));       // -2 Im tr_C
      break;
    }
    case StructureTag::Kind::SpecialUnitary: {
      MatrixXd j = forms::complex_structure(a.tag.matrix_dim / 2);
      const MatrixXd& f = a.tag.hform->matrix();
      res = (m * j - j * m).norm();
      res = std::max(res, (m.transpose() * f + f * m).norm());
      res = std::max(res, std::abs(m.trace()));
      res = std::max(res, std::abs((j * m).trace()));
      break;
    }
  }
  return res;
}

double membership_residual(const GroupElement& g) {
  const MatrixXd& m = g.m;
  double res = 0.0;
  switch (g.tag.kind) {
    case StructureTag::Kind::GeneralLinear:
      break;
    case StructureTag::Kind::SpecialLinear:
      res = std::abs(m.determinant() - 1.0);
      break;
    case StructureTag::Kind::Orthogonal: {
      const MatrixXd& f = g.tag.form->matrix();
      res = (m.transpose() * f * m - f).norm();
      break;
    }
    case StructureTag::Kind::SpecialLinearComplex: {
      MatrixXd j = forms::complex_structure(g.tag.matrix_dim / 2);
      res = (m * j - j * m).norm();
      res = std::max(res, std::abs(to_complex(m).determinant() - 1.0));
      break;
    }
    case StructureTag::Kind::SpecialUnitary: {
      MatrixXd j = forms::complex_structure(g.tag.matrix_dim / 2);
      const MatrixXd& f = g.tag.hform->matrix();
      res = (m * j - j * m).norm();
      res = std::max(res, (m.transpose() * f * m - f).norm());
      res = std::max(res, std::abs(to_complex(m).determinant() - 1.0));
      break;
    }
  }
  return res;
}

AlgebraBasis::AlgebraBasis(std::vector<AlgebraElement> elems,
                           bool orthonormalize)
    : elems_(std::move(elems)) {
  if (elems_.empty()) {
    flat_.resize(0, 0);
    return;
  }
  int sz = static_cast<int>(elems_[0].m.size());
  MatrixXd raw(sz, elems_.size());
  for (size_t i = 0; i < elems_.size(); ++i) raw.col(i) = vec(elems_[i].m);
  if (num::rank(raw, 1e-10) != static_cast<int>(elems_.size()))
    throw DegenerateBasis("algebra basis elements are linearly dependent");
  if (orthonormalize) {
    flat_ = num::column_space(raw, 1e-10);
    int rows = static_cast<int>(elems_[0].m.rows());
    StructureTag tag = elems_[0].tag;
    std::vector<AlgebraElement> ortho;
    ortho.reserve(flat_.cols());
    for (int i = 0; i < flat_.cols(); ++i)
      ortho.push_back({unvec(flat_.col(i), rows, rows), tag});
    elems_ = std::move(ortho);
  } else {
    flat_ = raw;
  }
}

AlgebraElement AlgebraBasis::combine(const VectorXd& coeffs) const {
  if (coeffs.size() != dim()) throw DimensionError("coefficient count");
  int rows = matrix_dim();
  MatrixXd m = MatrixXd::Zero(rows, rows);
  for (int i = 0; i < dim(); ++i) m += coeffs[i] * elems_[i].m;
  return {m, elems_[0].tag};
}

double AlgebraBasis::span_residual(const MatrixXd& m) const {
  if (dim() == 0) return m.norm();
  return num::projection_residual(flat_, vec(m));
}

bool AlgebraBasis::spans_same(const AlgebraBasis& other, double tol) const {
  if (dim() != other.dim()) return false;
  for (const auto& e : other.elements())
    if (span_residual(e.m) > tol * std::max(1.0, e.m.norm())) return false;
  return true;
}

AlgebraElement bracket(const AlgebraElement& a, const AlgebraElement& b) {
  if (a.m.rows() != b.m.rows() || a.m.cols() != b.m.cols())
    throw DimensionError("bracket: dimension mismatch");
  return {a.m * b.m - b.m * a.m, a.tag};
}

GroupElement exponential(const AlgebraElement& a, double tol) {
  if (!a.m.allFinite())
    throw NumericalError("exponential: non-finite entries");
  MatrixXd e = a.m.exp();
  MatrixXd einv = (-a.m).exp();
  int n = static_cast<int>(a.m.rows());
  double res = (e * einv - MatrixXd::Identity(n, n)).norm();
  if (res > tol * std::max(1.0, e.norm() * einv.norm()))
    throw NumericalError("exponential: residual above tolerance");
  return {e, a.tag};
}

AlgebraElement adjoint(const GroupElement& g, const AlgebraElement& a) {
  if (!g.tag.compatible(a.tag))
    throw DimensionError("adjoint: incompatible tags");
  Eigen::FullPivLU<MatrixXd> lu(g.m);
  if (!lu.isInvertible() ||
      lu.rcond() < 1e-14)
    throw NumericalError("adjoint: group element numerically singular");
  return {g.m * a.m * lu.inverse(), a.tag};
}

AlgebraBasis stabilizer_algebra(const AlgebraBasis& ambient,
                                const AlgebraAction& action,
                                double rank_rel_tol, double closure_tol) {
  if (ambient.dim() == 0) return ambient;
  VectorXd probe = action(ambient[0].m);
  MatrixXd sys(probe.size(), ambient.dim());
  sys.col(0) = probe;
  for (int i = 1; i < ambient.dim(); ++i) sys.col(i) = action(ambient[i].m);
  MatrixXd kern = num::nullspace(sys, rank_rel_tol);
  std::vector<AlgebraElement> elems;
  elems.reserve(kern.cols());
  for (int i = 0; i < kern.cols(); ++i)
    elems.push_back(ambient.combine(kern.col(i)));
  AlgebraBasis result(std::move(elems));
  double closure = bracket_closure_residual(result);
  if (closure > closure_tol)
    throw NumericalError("stabilizer algebra is not closed under bracket");
  return result;
}

AlgebraBasis intersect_algebras(const AlgebraBasis& a, const AlgebraBasis& b) {
  if (a.dim() == 0 || b.dim() == 0) return AlgebraBasis{};
  if (a.matrix_dim() != b.matrix_dim())
    throw DimensionError("intersect: ambient dimension mismatch");
  MatrixXd sys(a.flat().rows(), a.dim() + b.dim());
  sys << a.flat(), -b.flat();
  MatrixXd kern = num::nullspace(sys, 1e-10);
  std::vector<AlgebraElement> elems;
  for (int i = 0; i < kern.cols(); ++i)
    elems.push_back(a.combine(kern.col(i).head(a.dim())));
  AlgebraBasis result(std::move(elems));
  // dim a + dim b = dim(a+b) + dim(a /\ b)
  MatrixXd joint(a.flat().rows(), a.dim() + b.dim());
  joint << a.flat(), b.flat();
  int sum_dim = num::rank(joint, 1e-10);
  if (a.dim() + b.dim() != sum_dim + result.dim())
    throw NumericalError("intersection dimension formula violated");
  return result;
}

double jacobi_residual(const AlgebraBasis& basis) {
  double worst = 0.0;
  for (int i = 0; i < basis.dim(); ++i)
    for (int j = 0; j < basis.dim(); ++j)
      for (int k = 0; k < basis.dim(); ++k) {
        MatrixXd r = bracket(basis[i], bracket(basis[j], basis[k])).m +
                     bracket(basis[j], bracket(basis[k], basis[i])).m +
                     bracket(basis[k], bracket(basis[i], basis[j])).m;
        worst = std::max(worst, r.cwiseAbs().maxCoeff());
      }
  return worst;
}

double bracket_closure_residual(const AlgebraBasis& basis) {
  double worst = 0.0;
  for (int i = 0; i < basis.dim(); ++i)
    for (int j = i + 1; j < basis.dim(); ++j) {
      MatrixXd br = bracket(basis[i], basis[j]).m;
      worst = std::max(worst, basis.span_residual(br));
    }
  return worst;
}

AlgebraBasis gl_basis(int n) {
  std::vector<AlgebraElement> elems;
  StructureTag tag = StructureTag::gl(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      MatrixXd e = MatrixXd::Zero(n, n);
      e(i, j) = 1.0;
      elems.push_back({e, tag});
    }
  return AlgebraBasis(std::move(elems));
}

AlgebraBasis sl_basis(int n) {
  std::vector<AlgebraElement> elems;
  StructureTag tag = StructureTag::sl(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      MatrixXd e = MatrixXd::Zero(n, n);
      e(i, j) = 1.0;
      elems.push_back({e, tag});
    }
  for (int i = 0; i + 1 < n; ++i) {
    MatrixXd e = MatrixXd::Zero(n, n);
    e(i, i) = 1.0;
    e(i + 1, i + 1) = -1.0;
    elems.push_back({e, tag});
  }
  return AlgebraBasis(std::move(elems));
}

AlgebraBasis so_basis(const forms::SymmetricForm& f) {
  int n = f.dim();
  MatrixXd finv = f.matrix().inverse();
  StructureTag tag = StructureTag::so(f);
  std::vector<AlgebraElement> elems;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      MatrixXd s = MatrixXd::Zero(n, n);
      s(i, j) = 1.0;
      s(j, i) = -1.0;
      elems.push_back({finv * s, tag});
    }
  return AlgebraBasis(std::move(elems));
}

AlgebraBasis sl_complex_basis(int n) {
  StructureTag tag = StructureTag::sl_complex(n);
  std::vector<AlgebraElement> elems;
  auto push = [&](const MatrixXcd& m) {
    elems.push_back({forms::real_representation(m), tag});
  };
  const std::complex<double> I(0.0, 1.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      MatrixXcd e = MatrixXcd::Zero(n, n);
      e(i, j) = 1.0;
      push(e);
      e(i, j) = I;
      push(e);
    }
  for (int i = 0; i + 1 < n; ++i) {
    MatrixXcd e = MatrixXcd::Zero(n, n);
    e(i, i) = 1.0;
    e(i + 1, i + 1) = -1.0;
    push(e);
    e(i, i) = I;
    e(i + 1, i + 1) = -I;
    push(e);
  }
  return AlgebraBasis(std::move(elems));
}

AlgebraBasis su_basis(const forms::HermitianForm& f) {
  int n = f.complex_dim();
  MatrixXcd fc = to_complex(f.matrix());
  MatrixXcd fcinv = fc.inverse();
  const std::complex<double> I(0.0, 1.0);

  // u(F) = F^{-1} * (anti-Hermitian); carve out the complex-trace-zero part.
  std::vector<MatrixXcd> anti;
  for (int k = 0; k < n; ++k) {
    MatrixXcd s = MatrixXcd::Zero(n, n);
    s(k, k) = I;
    anti.push_back(s);
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      MatrixXcd s = MatrixXcd::Zero(n, n);
      s(i, j) = 1.0;
      s(j, i) = -1.0;
      anti.push_back(s);
      s(i, j) = I;
      s(j, i) = I;
      anti.push_back(s);
    }
  // tr(F^{-1} S) is purely imaginary; one real constraint.
  Eigen::RowVectorXd tr_constraint(anti.size());
  for (size_t k = 0; k < anti.size(); ++k)
    tr_constraint(static_cast<int>(k)) = (fcinv * anti[k]).trace().imag();
  MatrixXd combos = num::nullspace(tr_constraint, 1e-12);

  StructureTag tag = StructureTag::su(f);
  std::vector<AlgebraElement> elems;
  for (int c = 0; c < combos.cols(); ++c) {
    MatrixXcd s = MatrixXcd::Zero(n, n);
    for (size_t k = 0; k < anti.size(); ++k)
      s += combos(static_cast<int>(k), c) * anti[k];
    elems.push_back({forms::real_representation(fcinv * s), tag});
  }
  return AlgebraBasis(std::move(elems));
}

AlgebraBasis basis_for(const StructureTag& tag) {
  switch (tag.kind) {
    case StructureTag::Kind::GeneralLinear:
      return gl_basis(tag.matrix_dim);
    case StructureTag::Kind::SpecialLinear:
      return sl_basis(tag.matrix_dim);
    case StructureTag::Kind::Orthogonal:
      return so_basis(*tag.form);
    case StructureTag::Kind::SpecialLinearComplex:
      return sl_complex_basis(tag.matrix_dim / 2);
    case StructureTag::Kind::SpecialUnitary:
      return su_basis(*tag.hform);
  }
  throw Error("unknown tag");
}

ThreeForm::ThreeForm(int n) : n_(n), c_(n * n * n, 0.0) {}

void ThreeForm::add_term(int i, int j, int k, double c) {
  const int id[3] = {i, j, k};
  const int perms[6][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1},
                           {0, 2, 1}, {2, 1, 0}, {1, 0, 2}};
  for (int p = 0; p < 6; ++p) {
    double sgn = p < 3 ? 1.0 : -1.0;
    c_[idx(id[perms[p][0]], id[perms[p][1]], id[perms[p][2]])] += sgn * c;
  }
}

double ThreeForm::apply(const VectorXd& x, const VectorXd& y,
                        const VectorXd& z) const {
  double t = 0.0;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k)
        t += c_[idx(i, j, k)] * x[i] * y[j] * z[k];
  return t;
}

VectorXd ThreeForm::flatten() const {
  std::vector<double> out;
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j)
      for (int k = j + 1; k < n_; ++k) out.push_back(c_[idx(i, j, k)]);
  return Eigen::Map<VectorXd>(out.data(), out.size());
}

ThreeForm ThreeForm::algebra_act(const MatrixXd& a) const {
  ThreeForm out(n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k) {
        double t = 0.0;
        for (int l = 0; l < n_; ++l) {
          t -= a(l, i) * c_[idx(l, j, k)];
          t -= a(l, j) * c_[idx(i, l, k)];
          t -= a(l, k) * c_[idx(i, j, l)];
        }
        out.c_[idx(i, j, k)] = t;
      }
  return out;
}

ThreeForm ThreeForm::group_act(const MatrixXd& g) const {
  MatrixXd gi = g.inverse();
  ThreeForm out(n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k) {
        double t = 0.0;
        for (int a = 0; a < n_; ++a)
          for (int b = 0; b < n_; ++b)
            for (int c = 0; c < n_; ++c)
              t += c_[idx(a, b, c)] * gi(a, i) * gi(b, j) * gi(c, k);
        out.c_[idx(i, j, k)] = t;
      }
  return out;
}

MatrixXd ThreeForm::induced_bilinear_form() const {
  // (i_a phi) ^ (i_b phi) ^ phi summed over permutations with sign.
  int n = n_;
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  MatrixXd b = MatrixXd::Zero(n, n);
  do {
    // permutation sign by cycle counting
    std::vector<bool> seen(n, false);
    int sgn = 1;
    for (int i = 0; i < n; ++i) {
      if (seen[i]) continue;
      int len = 0;
      for (int j = i; !seen[j]; j = perm[j]) {
        seen[j] = true;
        ++len;
      }
      if (len % 2 == 0) sgn = -sgn;
    }
    double tail = c_[idx(perm[4], perm[5], perm[6])];
    if (tail != 0.0) {
      for (int a = 0; a < n; ++a)
        for (int bq = 0; bq < n; ++bq) {
          double t = c_[idx(a, perm[0], perm[1])] *
                     c_[idx(bq, perm[2], perm[3])] * tail;
          if (t != 0.0) b(a, bq) += sgn * t;
        }
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return b / 24.0;
}

double ThreeForm::max_antisymmetry_residual() const {
  double worst = 0.0;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k) {
        worst = std::max(worst,
                         std::abs(c_[idx(i, j, k)] + c_[idx(j, i, k)]));
        worst = std::max(worst,
                         std::abs(c_[idx(i, j, k)] + c_[idx(i, k, j)]));
      }
  return worst;
}

ThreeForm split_g2_three_form() {
  ThreeForm phi(7);
  phi.add_term(0, 1, 2, 1.0);
  phi.add_term(0, 3, 4, -1.0);
  phi.add_term(0, 5, 6, -1.0);
  phi.add_term(1, 3, 5, -1.0);
  phi.add_term(1, 4, 6, 1.0);
  phi.add_term(2, 3, 6, 1.0);
  phi.add_term(2, 4, 5, 1.0);
  return phi;
}

ThreeForm compact_g2_three_form() {
  ThreeForm phi(7);
  phi.add_term(0, 1, 2, 1.0);
  phi.add_term(0, 3, 4, 1.0);
  phi.add_term(0, 5, 6, 1.0);
  phi.add_term(1, 3, 5, 1.0);
  phi.add_term(1, 4, 6, -1.0);
  phi.add_term(2, 3, 6, -1.0);
  phi.add_term(2, 4, 5, -1.0);
  return phi;
}

}  // namespace cartan::lie
