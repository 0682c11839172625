#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "cartan/errors.hpp"

namespace cartan::num {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Default relative singular-value cutoff for rank decisions.
inline constexpr double kRankTol = 1e-8;

/// Orthonormal basis (columns) of the kernel of A, singular values below
/// rel_tol * sigma_max treated as zero.
MatrixXd nullspace(const MatrixXd& a, double rel_tol = kRankTol);

/// Numerical rank with relative singular-value threshold.
int rank(const MatrixXd& a, double rel_tol = 1e-10);

/// Orthonormal basis (columns) spanning the column space of A.
MatrixXd column_space(const MatrixXd& a, double rel_tol = kRankTol);

/// Frobenius-orthonormal projection residual of v against the span of the
/// columns of basis: || v - proj_span(v) ||.
double projection_residual(const MatrixXd& basis, const VectorXd& v);

/// Matrix exponential (scaling-and-squaring Pade).
MatrixXd expm(const MatrixXd& a);

/// Principal matrix logarithm (inverse scaling and squaring); caller must
/// keep ||A - I|| inside the injectivity region.
MatrixXd logm(const MatrixXd& a);

/// Deterministic random source used by all sampling code paths.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen_); }
  int uniform_int(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(gen_);
  }

  /// Standard-normal vector.
  VectorXd gaussian(int n) {
    VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  /// Uniform point on the unit sphere of R^n.
  VectorXd sphere(int n) {
    VectorXd v = gaussian(n);
    double nv = v.norm();
    while (nv < 1e-12) {
      v = gaussian(n);
      nv = v.norm();
    }
    return v / nv;
  }

  std::mt19937_64& raw() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

/// Runs fn(i) for i in [0, n) across at most `threads` workers. Work items
/// write to caller-indexed storage, so results do not depend on scheduling.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

/// max |a_ij - b_ij|
inline double max_abs_diff(const MatrixXd& a, const MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace cartan::num
