#pragma once

#include <Eigen/Dense>
#include <optional>
#include <variant>

#include "cartan/errors.hpp"

namespace cartan::forms {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Eigenvalue sign counts of a symmetric/Hermitian form.
struct Signature {
  int positive = 0;
  int negative = 0;
  int null = 0;

  int rank() const { return positive + negative; }
  int dim() const { return positive + negative + null; }
  bool operator==(const Signature&) const = default;
};

/// Relative zero threshold used by signature and sign classifications.
inline constexpr double kZeroTol = 1e-9;
/// Symmetry / Hermitian-structure tolerance on construction.
inline constexpr double kSymTol = 1e-12;

/// Standard complex structure J0 = [[0,-I],[I,0]] on R^{2n}.
MatrixXd complex_structure(int n);

/// Real 2n x 2n representation [[A,-B],[B,A]] of A + iB.
MatrixXd real_representation(const MatrixXcd& m);
/// Real 2n vector (Re; Im) of a complex vector.
VectorXd real_vector(const VectorXcd& z);

/// Symmetric bilinear form on R^n. Input is symmetrized on construction;
/// asymmetry beyond tolerance is rejected.
class SymmetricForm {
 public:
  explicit SymmetricForm(MatrixXd m);
  /// diag(d1, ..., dn)
  static SymmetricForm diagonal(const VectorXd& d);
  /// I_{p,q} = diag(+1 x p, -1 x q)
  static SymmetricForm standard(int p, int q);

  const MatrixXd& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }

  double apply(const VectorXd& a, const VectorXd& b) const {
    return a.dot(m_ * b);
  }

  const Signature& signature() const;

 private:
  MatrixXd m_;
  mutable std::optional<Signature> signature_cache_;
};

/// Hermitian sesquilinear form on C^n kept in the real 2n x 2n
/// representation; the stored matrix is symmetric and commutes with J0.
class HermitianForm {
 public:
  /// From the real representation (dimension must be even).
  explicit HermitianForm(MatrixXd real_rep);
  /// From a complex Hermitian matrix.
  explicit HermitianForm(const MatrixXcd& m);
  static HermitianForm standard(int p, int q);

  const MatrixXd& matrix() const { return m_; }
  int complex_dim() const { return static_cast<int>(m_.rows()) / 2; }
  int real_dim() const { return static_cast<int>(m_.rows()); }

  /// h(a, b), conjugate-linear in the first slot; arguments in the real
  /// representation.
  std::complex<double> apply(const VectorXd& a, const VectorXd& b) const;
  /// h(a, a) (always real).
  double apply_real(const VectorXd& a) const { return a.dot(m_ * a); }

  /// Complex signature (p, q, r) with p + q + r = complex_dim().
  const Signature& signature() const;

 private:
  MatrixXd m_;
  mutable std::optional<Signature> signature_cache_;
};

using AnyForm = std::variant<SymmetricForm, HermitianForm>;

/// Signature by eigenvalue counts with relative zero threshold
/// (absolute fallback when every eigenvalue is below zero_tol).
Signature signature(const SymmetricForm& form, double zero_tol = kZeroTol);
Signature signature(const HermitianForm& form, double zero_tol = kZeroTol);
Signature signature(const AnyForm& form, double zero_tol = kZeroTol);

/// Gram matrix of the form on the given basis (columns). For Hermitian
/// forms the basis columns are complex vectors in the real representation
/// and the result is again a HermitianForm.
SymmetricForm restrict_form(const SymmetricForm& form, const MatrixXd& basis);
HermitianForm restrict_form(const HermitianForm& form, const MatrixXd& basis);

enum class VectorSign { Positive, Null, Negative };

/// Sign of form(v, v) with relative zero threshold; scale-free.
VectorSign classify_vector(const SymmetricForm& form, const VectorXd& v,
                           double zero_tol = kZeroTol);
VectorSign classify_vector(const HermitianForm& form, const VectorXd& v,
                           double zero_tol = kZeroTol);

/// Basis (columns) of {w : form(w, u) = 0 for all u in span(basis)}.
/// Requires a non-degenerate form. For Hermitian forms both the input and
/// the output describe complex subspaces (the output is J0-invariant).
MatrixXd orthocomplement(const SymmetricForm& form, const MatrixXd& basis);
MatrixXd orthocomplement(const HermitianForm& form, const MatrixXd& basis);

}  // namespace cartan::forms
