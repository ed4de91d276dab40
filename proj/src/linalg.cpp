#include "hdfts/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace hdfts {

SymEig sym_eig_desc(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("sym_eig_desc: matrix not square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) throw std::runtime_error("sym_eig_desc: eigensolver failed");
  const int n = static_cast<int>(m.rows());
  SymEig out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (int i = 0; i < n; ++i) {
    out.values[i] = solver.eigenvalues()[n - 1 - i];
    Eigen::VectorXd v = solver.eigenvectors().col(n - 1 - i);
    // sign convention: largest-|entry| coefficient positive, lowest index on ties
    int arg = 0;
    for (int r = 1; r < n; ++r)
      if (std::abs(v[r]) > std::abs(v[arg])) arg = r;
    if (v[arg] < 0.0) v = -v;
    out.vectors.col(i) = v;
  }
  return out;
}

Eigen::MatrixXd truncated_inv_sqrt(const Eigen::MatrixXd& psd, double ridge_rel) {
  const SymEig eig = sym_eig_desc(psd);
  const double lmax = eig.values.size() > 0 ? eig.values[0] : 0.0;
  if (!(lmax > 0.0)) throw std::runtime_error("truncated_inv_sqrt: matrix is numerically zero");
  const double cut = ridge_rel * lmax;
  int r = 0;
  while (r < eig.values.size() && eig.values[r] > cut) ++r;
  Eigen::MatrixXd w(psd.rows(), r);
  for (int i = 0; i < r; ++i) w.col(i) = eig.vectors.col(i) / std::sqrt(eig.values[i]);
  return w;
}

namespace {
Eigen::VectorXd floored_eigs(const Eigen::MatrixXd& psd, double ridge_rel, SymEig& eig) {
  eig = sym_eig_desc(psd);
  const double lmax = eig.values.size() > 0 ? eig.values[0] : 0.0;
  if (!(lmax > 0.0)) throw std::runtime_error("floored sqrt: matrix is numerically zero");
  return eig.values.cwiseMax(ridge_rel * lmax);
}
}  // namespace

Eigen::MatrixXd floored_sqrt(const Eigen::MatrixXd& psd, double ridge_rel) {
  SymEig eig;
  const Eigen::VectorXd d = floored_eigs(psd, ridge_rel, eig).cwiseSqrt();
  return eig.vectors * d.asDiagonal() * eig.vectors.transpose();
}

Eigen::MatrixXd floored_inv_sqrt(const Eigen::MatrixXd& psd, double ridge_rel) {
  SymEig eig;
  const Eigen::VectorXd d = floored_eigs(psd, ridge_rel, eig).cwiseSqrt().cwiseInverse();
  return eig.vectors * d.asDiagonal() * eig.vectors.transpose();
}

}  // namespace hdfts
