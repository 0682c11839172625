#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cartan/errors.hpp"
#include "cartan/forms.hpp"

namespace cartan::lie {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Identifies the ambient matrix algebra/group. Complex algebras are kept
/// in the doubled real representation throughout.
struct StructureTag {
  enum class Kind {
    GeneralLinear,         // gl(n, R)
    SpecialLinear,         // sl(n, R)
    Orthogonal,            // so(F) for a symmetric non-degenerate F
    SpecialLinearComplex,  // sl(n, C) as a real algebra (matrix size 2n)
    SpecialUnitary,        // su(F) for a Hermitian F (matrix size 2n)
  };

  Kind kind = Kind::GeneralLinear;
  int matrix_dim = 0;  // size of the real matrices
  std::optional<forms::SymmetricForm> form;   // Orthogonal
  std::optional<forms::HermitianForm> hform;  // SpecialUnitary

  static StructureTag gl(int n) { return {Kind::GeneralLinear, n, {}, {}}; }
  static StructureTag sl(int n) { return {Kind::SpecialLinear, n, {}, {}}; }
  static StructureTag so(forms::SymmetricForm f);
  static StructureTag sl_complex(int n);
  static StructureTag su(forms::HermitianForm f);

  std::string name() const;
  /// Real dimension of the tagged algebra.
  int algebra_dim() const;
  bool compatible(const StructureTag& o) const {
    return kind == o.kind && matrix_dim == o.matrix_dim;
  }
};

struct AlgebraElement {
  MatrixXd m;
  StructureTag tag;
};

struct GroupElement {
  MatrixXd m;
  StructureTag tag;
};

/// Residual of the tag's defining relations (trace, form-skewness,
/// J0-commutation) for an algebra element.
double membership_residual(const AlgebraElement& a);
/// Residual of the defining relations (det, form preservation,
/// J0-commutation) for a group element.
double membership_residual(const GroupElement& g);

/// Finite list of linearly independent algebra elements, orthonormalized
/// in the Frobenius inner product on construction.
class AlgebraBasis {
 public:
  AlgebraBasis() = default;
  explicit AlgebraBasis(std::vector<AlgebraElement> elems,
                        bool orthonormalize = true);

  int dim() const { return static_cast<int>(elems_.size()); }
  int matrix_dim() const { return elems_.empty() ? 0 : static_cast<int>(elems_[0].m.rows()); }
  const std::vector<AlgebraElement>& elements() const { return elems_; }
  const AlgebraElement& operator[](int i) const { return elems_[i]; }

  /// (matrix_dim^2) x dim matrix whose columns are the flattened elements.
  const MatrixXd& flat() const { return flat_; }

  /// Linear combination sum_i c_i E_i.
  AlgebraElement combine(const VectorXd& coeffs) const;

  /// Distance of vec(m) from the span of the basis.
  double span_residual(const MatrixXd& m) const;
  bool spans_same(const AlgebraBasis& other, double tol = 1e-8) const;

 private:
  std::vector<AlgebraElement> elems_;
  MatrixXd flat_;
};

/// [A, B] = AB - BA.
AlgebraElement bracket(const AlgebraElement& a, const AlgebraElement& b);

/// Matrix exponential with residual check ||exp(A) exp(-A) - I|| < tol.
GroupElement exponential(const AlgebraElement& a, double tol = 1e-12);

/// Ad(g) A = g A g^{-1}.
AlgebraElement adjoint(const GroupElement& g, const AlgebraElement& a);

/// Linear action of the ambient algebra on a tensor space, presented as
/// the map A -> A . v for the fixed element v.
using AlgebraAction = std::function<VectorXd(const MatrixXd&)>;

/// Basis of {A in span(g) : A . v = 0} by SVD nullspace of the stacked
/// system; the result is checked to be closed under bracket.
AlgebraBasis stabilizer_algebra(const AlgebraBasis& ambient,
                                const AlgebraAction& action,
                                double rank_rel_tol = 1e-8,
                                double closure_tol = 1e-8);

/// Basis of span(a) /\ span(b); asserts the dimension formula
/// dim a + dim b = dim(a + b) + dim(a /\ b).
AlgebraBasis intersect_algebras(const AlgebraBasis& a, const AlgebraBasis& b);

/// Max Jacobi-identity residual over the basis triples (diagnostic).
double jacobi_residual(const AlgebraBasis& basis);
/// Max over basis pairs of the span residual of their bracket.
double bracket_closure_residual(const AlgebraBasis& basis);

// Standard bases.
AlgebraBasis gl_basis(int n);
AlgebraBasis sl_basis(int n);
AlgebraBasis so_basis(const forms::SymmetricForm& f);
AlgebraBasis sl_complex_basis(int n);
AlgebraBasis su_basis(const forms::HermitianForm& f);
AlgebraBasis basis_for(const StructureTag& tag);

// Derivative (algebra) actions on the tensor spaces in scope.
inline MatrixXd act_on_form(const MatrixXd& a, const MatrixXd& m) {
  return -(a.transpose() * m + m * a);
}
inline VectorXd act_on_vector(const MatrixXd& a, const VectorXd& v) {
  return a * v;
}
inline MatrixXd act_on_endomorphism(const MatrixXd& a, const MatrixXd& j) {
  return a * j - j * a;
}

// Group actions (left actions; the bundle-value map uses their inverses).
inline MatrixXd group_act_on_form(const MatrixXd& g, const MatrixXd& m) {
  MatrixXd gi = g.inverse();
  return gi.transpose() * m * gi;
}
inline MatrixXd group_act_on_endomorphism(const MatrixXd& g, const MatrixXd& j) {
  return g * j * g.inverse();
}

/// Totally antisymmetric 3-form on R^n with dense coefficient storage.
class ThreeForm {
 public:
  explicit ThreeForm(int n);

  /// Adds c * e^{i} ^ e^{j} ^ e^{k} (0-based indices).
  void add_term(int i, int j, int k, double c);

  int dim() const { return n_; }
  double coeff(int i, int j, int k) const { return c_[idx(i, j, k)]; }

  /// phi(x, y, z).
  double apply(const VectorXd& x, const VectorXd& y, const VectorXd& z) const;

  /// Coefficients on the independent triples i<j<k, lexicographic.
  VectorXd flatten() const;

  /// Algebra action (A . phi)(x,y,z) = -phi(Ax,y,z)-phi(x,Ay,z)-phi(x,y,Az).
  ThreeForm algebra_act(const MatrixXd& a) const;
  /// Group action (g . phi)(x,y,z) = phi(g^{-1}x, g^{-1}y, g^{-1}z).
  ThreeForm group_act(const MatrixXd& g) const;

  /// Symmetric bilinear form B(x,y) vol = (i_x phi) ^ (i_y phi) ^ phi,
  /// normalized by 1/24 so the standard forms give +-6 I_{p,q}. Only
  /// meaningful for n = 7.
  MatrixXd induced_bilinear_form() const;

  double max_antisymmetry_residual() const;

 private:
  int idx(int i, int j, int k) const { return (i * n_ + j) * n_ + k; }
  int n_;
  std::vector<double> c_;
};

/// The split-type generic 3-form on R^7; its induced bilinear form is
/// 6 I_{3,4} and its stabilizer inside so(3,4) has dimension 14.
ThreeForm split_g2_three_form();
/// The definite-type generic 3-form on R^7 (induced form 6 I, stabilizer
/// inside so(7) of dimension 14).
ThreeForm compact_g2_three_form();

}  // namespace cartan::lie
