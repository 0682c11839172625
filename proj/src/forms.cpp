#include "cartan/forms.hpp"

#include "cartan/numerics.hpp"

namespace cartan::forms {

namespace {

Signature eigen_signature(const MatrixXd& m, double zero_tol) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
  const VectorXd& ev = es.eigenvalues();
  double scale = ev.cwiseAbs().maxCoeff();
  double eps = scale > zero_tol ? zero_tol * scale : zero_tol;
  Signature sig;
  for (int i = 0; i < ev.size(); ++i) {
    if (ev(i) > eps)
      ++sig.positive;
    else if (ev(i) < -eps)
      ++sig.negative;
    else
      ++sig.null;
  }
  return sig;
}

void check_basis_rank(const MatrixXd& basis, int expected) {
  if (num::rank(basis, 1e-10) != expected)
    throw DegenerateBasis("subspace basis is rank-deficient");
}

}  // namespace

MatrixXd complex_structure(int n) {
  MatrixXd j = MatrixXd::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n) = -MatrixXd::Identity(n, n);
  j.bottomLeftCorner(n, n) = MatrixXd::Identity(n, n);
  return j;
}

MatrixXd real_representation(const MatrixXcd& m) {
  const auto n = m.rows();
  MatrixXd r(2 * n, 2 * n);
  r.topLeftCorner(n, n) = m.real();
  r.topRightCorner(n, n) = -m.imag();
  r.bottomLeftCorner(n, n) = m.imag();
  r.bottomRightCorner(n, n) = m.real();
  return r;
}

VectorXd real_vector(const VectorXcd& z) {
  VectorXd v(2 * z.size());
  v.head(z.size()) = z.real();
  v.tail(z.size()) = z.imag();
  return v;
}

SymmetricForm::SymmetricForm(MatrixXd m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw InvalidForm("form matrix must be square");
  double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
  double asym = (m_ - m_.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymTol * scale)
    throw InvalidForm("matrix is not symmetric within tolerance");
  m_ = 0.5 * (m_ + m_.transpose());  // absorb float drift
}

SymmetricForm SymmetricForm::diagonal(const VectorXd& d) {
  return SymmetricForm(MatrixXd(d.asDiagonal()));
}

SymmetricForm SymmetricForm::standard(int p, int q) {
  VectorXd d(p + q);
  d.head(p).setOnes();
  d.tail(q).setConstant(-1.0);
  return diagonal(d);
}

const Signature& SymmetricForm::signature() const {
  if (!signature_cache_) signature_cache_ = eigen_signature(m_, kZeroTol);
  return *signature_cache_;
}

HermitianForm::HermitianForm(MatrixXd real_rep) : m_(std::move(real_rep)) {
  if (m_.rows() != m_.cols() || m_.rows() % 2 != 0)
    throw InvalidForm("real representation must be square of even size");
  double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
  if ((m_ - m_.transpose()).cwiseAbs().maxCoeff() > kSymTol * scale)
    throw InvalidForm("Hermitian form: real representation not symmetric");
  MatrixXd j = complex_structure(complex_dim());
  if ((m_ * j - j * m_).cwiseAbs().maxCoeff() > kSymTol * scale)
    throw InvalidForm("Hermitian form: matrix does not commute with J0");
  m_ = 0.5 * (m_ + m_.transpose());
}

HermitianForm::HermitianForm(const MatrixXcd& m)
    : HermitianForm([&] {
        double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
        if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kSymTol * scale)
          throw InvalidForm("matrix is not Hermitian within tolerance");
        return real_representation(0.5 * (m + MatrixXcd(m.adjoint())));
      }()) {}

HermitianForm HermitianForm::standard(int p, int q) {
  MatrixXcd m = MatrixXcd::Zero(p + q, p + q);
  for (int i = 0; i < p; ++i) m(i, i) = 1.0;
  for (int i = p; i < p + q; ++i) m(i, i) = -1.0;
  return HermitianForm(m);
}

std::complex<double> HermitianForm::apply(const VectorXd& a,
                                          const VectorXd& b) const {
  MatrixXd j = complex_structure(complex_dim());
  double re = a.dot(m_ * b);
  double im = -a.dot(m_ * (j * b));
  return {re, im};
}

const Signature& HermitianForm::signature() const {
  if (!signature_cache_)
    signature_cache_ = cartan::forms::signature(*this, kZeroTol);
  return *signature_cache_;
}

Signature signature(const SymmetricForm& form, double zero_tol) {
  return eigen_signature(form.matrix(), zero_tol);
}

Signature signature(const HermitianForm& form, double zero_tol) {
  // Real-representation eigenvalues come in pairs; halve the counts.
  Signature s = eigen_signature(form.matrix(), zero_tol);
  return {s.positive / 2, s.negative / 2, s.null / 2};
}

Signature signature(const AnyForm& form, double zero_tol) {
  return std::visit([&](const auto& f) { return signature(f, zero_tol); },
                    form);
}

SymmetricForm restrict_form(const SymmetricForm& form, const MatrixXd& basis) {
  if (basis.rows() != form.dim())
    throw DimensionError("basis/form dimension mismatch");
  check_basis_rank(basis, static_cast<int>(basis.cols()));
  return SymmetricForm(basis.transpose() * form.matrix() * basis);
}

HermitianForm restrict_form(const HermitianForm& form, const MatrixXd& basis) {
  if (basis.rows() != form.real_dim())
    throw DimensionError("basis/form dimension mismatch");
  MatrixXd j = complex_structure(form.complex_dim());
  // Complex independence: the J-closed real span must have twice the rank.
  MatrixXd full(basis.rows(), 2 * basis.cols());
  full << basis, j * basis;
  if (num::rank(full, 1e-10) != 2 * basis.cols())
    throw DegenerateBasis("basis is complex-linearly dependent");
  // Gram on (w, Jw) is exactly the real representation of the complex Gram.
  return HermitianForm(MatrixXd(full.transpose() * form.matrix() * full));
}

namespace {

VectorSign classify_value(double t, double scale, double zero_tol) {
  double eps = zero_tol * std::max(scale, 1e-300);
  if (t > eps) return VectorSign::Positive;
  if (t < -eps) return VectorSign::Negative;
  return VectorSign::Null;
}

}  // namespace

VectorSign classify_vector(const SymmetricForm& form, const VectorXd& v,
                           double zero_tol) {
  if (v.norm() < 1e-12) throw InvalidPoint("cannot classify the zero vector");
  double t = form.apply(v, v);
  double scale = form.matrix().norm() * v.squaredNorm();
  return classify_value(t, scale, zero_tol);
}

VectorSign classify_vector(const HermitianForm& form, const VectorXd& v,
                           double zero_tol) {
  if (v.norm() < 1e-12) throw InvalidPoint("cannot classify the zero vector");
  double t = form.apply_real(v);
  double scale = form.matrix().norm() * v.squaredNorm();
  return classify_value(t, scale, zero_tol);
}

MatrixXd orthocomplement(const SymmetricForm& form, const MatrixXd& basis) {
  if (form.signature().null != 0)
    throw DegenerateForm("orthocomplement requires a non-degenerate form");
  if (basis.rows() != form.dim())
    throw DimensionError("basis/form dimension mismatch");
  // w is orthogonal to span(basis) iff basis^T M w = 0.
  return num::nullspace(basis.transpose() * form.matrix(), 1e-10);
}

MatrixXd orthocomplement(const HermitianForm& form, const MatrixXd& basis) {
  if (form.signature().null != 0)
    throw DegenerateForm("orthocomplement requires a non-degenerate form");
  if (basis.rows() != form.real_dim())
    throw DimensionError("basis/form dimension mismatch");
  MatrixXd j = complex_structure(form.complex_dim());
  MatrixXd full(basis.rows(), 2 * basis.cols());
  full << basis, j * basis;
  // Re h(w, u) = 0 and Im h(w, u) = 0 for all u; J-closing the constraint
  // set makes the complement a complex subspace.
  return num::nullspace(full.transpose() * form.matrix(), 1e-10);
}

}  // namespace cartan::forms
