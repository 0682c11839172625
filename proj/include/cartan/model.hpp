#pragma once

#include <Eigen/Dense>
#include <optional>
#include <set>
#include <variant>

#include "cartan/forms.hpp"
#include "cartan/lie.hpp"
#include "cartan/numerics.hpp"
#include "cartan/report.hpp"

namespace cartan::model {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class QuotientMode { Ray, Line, ComplexLine };

enum class PTypeLabel {
  Plus,
  Zero,
  Minus,
  IsolatedPlus,
  IsolatedMinus,
  Hypersurface,
  OpenPlus,
  OpenMinus,
  Open,
  Single,
  Ambiguous,
};

std::string label_name(PTypeLabel label);

/// Point of G/P as a normalized representative in the ambient
/// representation space (real coordinates, doubled for complex models).
struct ModelPoint {
  VectorXd rep;
  QuotientMode mode = QuotientMode::Ray;
};

// --- Reduction data -------------------------------------------------------

struct SymmetricFormDatum {
  forms::SymmetricForm form;
};
struct VectorDatum {
  VectorXd v;  // real representative; complex models use the doubled form
};
struct HermitianFormDatum {
  forms::HermitianForm form;
};
struct ComplexStructureDatum {
  MatrixXd j;  // J^2 = -I, orthogonal for the model's ambient form
};
struct ThreeFormDatum {
  lie::ThreeForm phi;
};

using ReductionDatum =
    std::variant<SymmetricFormDatum, VectorDatum, HermitianFormDatum,
                 ComplexStructureDatum, ThreeFormDatum>;

void validate_datum(const ReductionDatum& datum,
                    const std::optional<forms::SymmetricForm>& ambient);

/// Datum transported by g^{-1} in its representation (the bundle-value map
/// g -> g^{-1} . alpha on the homogeneous model).
ReductionDatum model_solution_value(const ReductionDatum& datum,
                                    const lie::GroupElement& g);

/// Derivative action A . datum, flattened (stabilizer systems).
VectorXd datum_algebra_action(const ReductionDatum& datum, const MatrixXd& a);

double datum_distance(const ReductionDatum& a, const ReductionDatum& b);

// --- Homogeneous models ----------------------------------------------------

/// Flat model G/P in a fixed matrix presentation. Conformal and CR models
/// use the null frame (first basis vector isotropic, pairing with the
/// last), which makes the parabolic block-upper-triangular and the strictly
/// lower block a complement g_-.
class HomogeneousModel {
 public:
  enum class Kind { ProjectiveSphere, ConformalSphere, ComplexProjective, CRSphere };

  static HomogeneousModel projective_sphere(int n);
  static HomogeneousModel conformal_sphere(int p, int q);
  static HomogeneousModel complex_projective(int n);
  static HomogeneousModel cr_sphere(int p, int q);

  Kind kind() const { return kind_; }
  int ambient_dim() const { return ambient_dim_; }  // real dimension
  QuotientMode quotient_mode() const { return mode_; }
  const lie::StructureTag& group_tag() const { return tag_; }
  /// Ambient invariant form (real representation for CR); absent for the
  /// projective and complex projective models.
  const std::optional<forms::SymmetricForm>& ambient_form() const {
    return form_;
  }
  const lie::AlgebraBasis& algebra() const { return algebra_; }
  const lie::AlgebraBasis& g_minus() const { return g_minus_; }
  /// Stabilized representative (the base point eP).
  const VectorXd& base_point() const { return base_point_; }

  bool requires_isotropic() const { return isotropic_points_; }
  /// Null-cone / normalization residual of a candidate representative.
  double point_residual(const VectorXd& rep) const;
  void require_valid(const ModelPoint& x) const;

  ModelPoint make_point(VectorXd rep) const;
  ModelPoint sample_point(num::Rng& rng) const;
  ModelPoint act(const lie::GroupElement& g, const ModelPoint& x) const;

  /// Newton retraction of an ambient vector back onto the representative
  /// manifold (unit sphere intersected with the null cone when required).
  VectorXd retract(VectorXd y) const;

  /// J0 for complex models.
  std::optional<MatrixXd> complex_structure() const;

  /// An orthogonal complex structure on the ambient form (conformal models
  /// with both signature counts even): rotation by 90 degrees inside the
  /// positive and negative eigenspaces.
  MatrixXd standard_orthogonal_complex_structure() const;

 private:
  Kind kind_;
  int ambient_dim_ = 0;
  QuotientMode mode_ = QuotientMode::Ray;
  lie::StructureTag tag_;
  std::optional<forms::SymmetricForm> form_;
  lie::AlgebraBasis algebra_;
  lie::AlgebraBasis g_minus_;
  VectorXd base_point_;
  bool isotropic_points_ = false;
  MatrixXd eig_plus_, eig_minus_;  // orthonormal eigenbasis of the form

  HomogeneousModel(Kind k, lie::StructureTag tag);
};

// --- Operations ------------------------------------------------------------

inline constexpr double kLabelTol = 1e-9;
/// Width of the AMBIGUOUS band in units of the zero tolerance.
inline constexpr double kAmbiguousBand = 10.0;

/// P-type of x with respect to the holonomy reduction datum.
PTypeLabel p_type(const HomogeneousModel& model, const ReductionDatum& datum,
                  const ModelPoint& x, double zero_tol = kLabelTol);

/// The orbit set the scenario is expected to realize.
std::set<std::string> expected_labels(const HomogeneousModel& model,
                                      const ReductionDatum& datum);

/// || s(u exp(X)) - exp(-X) . alpha || for X in the declared complement g_-;
/// u must stabilize the datum.
double flow_identity_check(const HomogeneousModel& model,
                           const ReductionDatum& datum,
                           const lie::GroupElement& u,
                           const lie::AlgebraElement& x);

/// Stabilizer algebra of the datum inside the model's algebra.
lie::AlgebraBasis datum_stabilizer(const HomogeneousModel& model,
                                   const ReductionDatum& datum);

/// Representatives of the measure-zero orbits (and one per open orbit),
/// constructed from the datum rather than sampled.
std::vector<ModelPoint> targeted_points(const HomogeneousModel& model,
                                        const ReductionDatum& datum);

struct OrbitGridOptions {
  int n_samples = 2000;
  std::uint64_t seed = 1;
  double zero_tol = kLabelTol;
  bool diagnostics = true;  // local geometry of codim-positive labels
  int threads = 1;
};

/// Sampled orbit decomposition with targeted representatives and local
/// geometry diagnostics (finite-difference gradients/Hessians of the
/// defining functions restricted to the model).
report::StrataReport orbit_decompose_grid(const HomogeneousModel& model,
                                          const ReductionDatum& datum,
                                          const OrbitGridOptions& opts);

/// Number of label disagreements p_type(h.x) != p_type(x) over stabilizer
/// samples h = exp(random element of the datum stabilizer).
int h_orbit_invariance_check(const HomogeneousModel& model,
                             const ReductionDatum& datum, const ModelPoint& x,
                             int n_group_samples, std::uint64_t seed = 5);

/// (h, h /\ p_x): stabilizer of the datum and its intersection with the
/// parabolic at x, via the line/ray stabilizer of the representative.
std::pair<lie::AlgebraBasis, lie::AlgebraBasis> stabilizer_pair(
    const HomogeneousModel& model, const ReductionDatum& datum,
    const ModelPoint& x);

}  // namespace cartan::model
