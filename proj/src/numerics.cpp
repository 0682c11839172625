#include "cartan/numerics.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <thread>

namespace cartan::num {

MatrixXd nullspace(const MatrixXd& a, double rel_tol) {
  if (a.rows() == 0 || a.cols() == 0)
    return MatrixXd::Identity(a.cols(), a.cols());
  Eigen::JacobiSVD<MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double cutoff = sv.size() > 0 ? rel_tol * sv(0) : 0.0;
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++r;
  return svd.matrixV().rightCols(a.cols() - r);
}

int rank(const MatrixXd& a, double rel_tol) {
  if (a.rows() == 0 || a.cols() == 0) return 0;
  Eigen::JacobiSVD<MatrixXd> svd(a);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * sv(0)) ++r;
  return r;
}

MatrixXd column_space(const MatrixXd& a, double rel_tol) {
  if (a.cols() == 0) return MatrixXd(a.rows(), 0);
  Eigen::JacobiSVD<MatrixXd> svd(a, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * sv(0)) ++r;
  return svd.matrixU().leftCols(r);
}

double projection_residual(const MatrixXd& basis, const VectorXd& v) {
  if (basis.cols() == 0) return v.norm();
  MatrixXd q = column_space(basis, kRankTol);
  return (v - q * (q.transpose() * v)).norm();
}

MatrixXd expm(const MatrixXd& a) { return a.exp(); }

MatrixXd logm(const MatrixXd& a) { return a.log(); }

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  int workers = std::min(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (int i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace cartan::num
