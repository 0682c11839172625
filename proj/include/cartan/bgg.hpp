#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "cartan/model.hpp"
#include "cartan/report.hpp"
#include "cartan/tractor.hpp"

namespace cartan::bgg {

using chart::ChartGeometry;
using chart::QuadraticScale;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using tractor::Path;
using tractor::TractorConnection;

/// Rectangular evaluation lattice.
struct Grid {
  VectorXd lo, hi;
  int resolution = 5;

  std::vector<VectorXd> points() const;
  static Grid box(const ChartGeometry& chart, double halfwidth,
                  int resolution);
};

/// Section of the tractor bundle that is parallel for the chart connection,
/// evaluated anywhere by cached radial transport from the basepoint.
class ParallelSection {
 public:
  ParallelSection(std::shared_ptr<const TractorConnection> conn,
                  VectorXd basepoint, VectorXd base_value,
                  double transport_tol = 1e-10);

  const VectorXd& basepoint() const { return base_; }
  const VectorXd& base_value() const { return v0_; }
  const TractorConnection& connection() const { return *conn_; }

  /// Value at x via (memoized) radial transport.
  VectorXd value(const VectorXd& x) const;

  /// h(s,s) at the basepoint (conformal charts).
  std::optional<double> g_type_norm() const;

  /// Max |h(s,s)(x) - h(s,s)(base)| over the given points.
  double constancy_residual(const std::vector<VectorXd>& pts) const;

  /// Max disagreement of radial vs. two-leg transports to sampled targets;
  /// reports the curvature obstruction when the connection is not flat.
  double path_independence_residual(int n_probes, std::uint64_t seed) const;

 private:
  struct Memo {
    std::mutex mu;
    std::map<std::vector<long long>, VectorXd> cache;
  };
  std::shared_ptr<const TractorConnection> conn_;
  VectorXd base_, v0_;
  double tol_;
  std::shared_ptr<Memo> memo_ = std::make_shared<Memo>();
};

/// Parallel section of S^2 T^* (tractor metrics), transported as a form.
class ParallelFormSection {
 public:
  ParallelFormSection(std::shared_ptr<const TractorConnection> conn,
                      VectorXd basepoint, MatrixXd base_value,
                      double transport_tol = 1e-10);

  const MatrixXd& base_value() const { return h0_; }
  MatrixXd value(const VectorXd& x) const;
  /// sigma_H(x) = H(x)(X, X) on the canonical tractor.
  double bgg_value(const VectorXd& x) const;

 private:
  struct Memo {
    std::mutex mu;
    std::map<std::vector<long long>, MatrixXd> cache;
  };
  std::shared_ptr<const TractorConnection> conn_;
  VectorXd base_;
  MatrixXd h0_;
  double tol_;
  std::shared_ptr<Memo> memo_ = std::make_shared<Memo>();
};

/// Joint kernel {v : A v = 0 for all A in holonomy}, one ParallelSection per
/// kernel basis vector. Empty list when the holonomy is full.
std::vector<ParallelSection> find_parallel_sections(
    std::shared_ptr<const TractorConnection> conn,
    const lie::AlgebraBasis& holonomy, const VectorXd& basepoint);

/// Same on the induced S^2 T^* representation: kernel of
/// H -> A^T H + H A.
std::vector<ParallelFormSection> find_parallel_form_sections(
    std::shared_ptr<const TractorConnection> conn,
    const lie::AlgebraBasis& holonomy, const VectorXd& basepoint);

/// First BGG projection: the top (quotient) slot of the section value.
double bgg_project(const ParallelSection& s, const VectorXd& x);

/// Gradient and Hessian of sigma at x from the section slots and the chart
/// curvature (exact consequences of parallelism, no differencing).
VectorXd sigma_gradient(const ParallelSection& s, const VectorXd& x);
MatrixXd sigma_hessian(const ParallelSection& s, const VectorXd& x);

/// Gram determinant of sampled sigma fields of several sections; positive
/// when the BGG projection is injective on the span.
double projection_injectivity_gram(const std::vector<ParallelSection>& secs,
                                   const std::vector<VectorXd>& pts);

struct StrataOptions {
  double tol = 1e-8;        // zero-membership tolerance (relative)
  double abs_floor = 1e-10; // absolute floor for the membership test
  int threads = 1;
};

/// Z^U stratification of the zero locus over the grid, with slot-based
/// gradient/Hessian diagnostics at zero points. Filtration levels: s(x) in
/// T^1 (innermost), s(x) in T^0 (sigma = 0).
report::StrataReport zero_strata(const ParallelSection& s, const Grid& grid,
                                 const StrataOptions& opts = {});

/// Curved orbit labels over the grid using the model classifier logic
/// applied to (h, s(x), canonical tractor). Labels are checked against the
/// matching model orbit set.
report::StrataReport curved_orbit_decompose(const ParallelSection& s,
                                            const Grid& grid,
                                            const StrataOptions& opts = {});

/// Scale family handled by einstein_verify.
struct EinsteinCheck {
  double lambda = 0.0;        // expected Ric(g-hat) = lambda * g-hat
  double margin = 0.12;       // minimum |sigma| on the grid
  double tol = 1e-6;
};

/// Max relative Frobenius residual of Ric(sigma^{-2} g) - lambda sigma^{-2} g
/// over the grid; grid points inside the margin raise MarginViolation.
double einstein_verify(const ChartGeometry& chart, const QuadraticScale& sigma,
                       const Grid& grid, const EinsteinCheck& check);

/// Closed-form dictionary between flat-chart tractor slots and the
/// conformal model's null-frame coordinates.
struct FlatModelDictionary {
  MatrixXd flat_metric;  // I_{p,q}

  /// Model vector (e0, mid, einfty) for slot values (sigma, mu, rho).
  VectorXd model_vector(const VectorXd& slots) const;
  /// Canonical null lift of a chart point: (1, x, -|x|^2_g / 2).
  VectorXd lift(const VectorXd& x) const;
  /// Slot values at the basepoint 0 of the section induced by the model
  /// vector (inverse of model_vector).
  VectorXd slots(const VectorXd& model_vec) const;
};

/// Parallel conformal tractor over the flat chart from the 2-jet of the
/// quadratic scale: s = (sigma, d sigma, -(Lap sigma)/n) at the basepoint.
VectorXd flat_section_value(const QuadraticScale& sigma, const MatrixXd& g,
                            const VectorXd& x);

struct ProjectiveMetricOptions {
  int grid_resolution = 4;
  double grid_halfwidth = 0.55;
  std::uint64_t seed = 101;
  /// Tractor metric prescribed at the basepoint instead of the canonical
  /// least-squares selection (used on the flat affine chart).
  std::optional<MatrixXd> prescribed_base_metric;
  double einstein_tol = 1e-5;
};

struct ProjectiveMetricReport {
  double chart_einstein_residual = 0.0;
  double einstein_constant = 0.0;  // lambda with Ric = lambda g
  int holonomy_dim = 0;
  int kernel_dim = 0;
  forms::Signature tractor_metric_signature;
  double canonical_scale_residual = 0.0;  // max |sigma_H - 1| over the grid
  std::set<std::string> labels;
  bool einstein_pass = false;
};

/// Projective tractor scenario: verify the chart metric is Einstein,
/// extract holonomy, find parallel fiber metrics in S^2 T^*, pick the one
/// calibrated to the Einstein scale, report signature and grid labels.
ProjectiveMetricReport projective_metric_scenario(
    const ChartGeometry& chart_in, const ProjectiveMetricOptions& opts = {});

}  // namespace cartan::bgg
