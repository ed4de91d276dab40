#pragma once

#include <Eigen/Dense>

namespace hdfts {

struct SymEig {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // columns, sign-fixed
};

// symmetric eigendecomposition sorted by descending eigenvalue with a
// deterministic sign convention: the largest-|entry| coefficient of each
// eigenvector is positive, ties broken by lowest index
SymEig sym_eig_desc(const Eigen::MatrixXd& m);

// W = V_r diag(lambda_r^{-1/2}) over eigenvalues above ridge_rel * lambda_max;
// whitens a PSD matrix on its numerical range
Eigen::MatrixXd truncated_inv_sqrt(const Eigen::MatrixXd& psd, double ridge_rel);

// symmetric PSD square root / inverse with eigenvalues floored at
// ridge_rel * lambda_max (full-dimensional, used for design standardizers)
Eigen::MatrixXd floored_sqrt(const Eigen::MatrixXd& psd, double ridge_rel);
Eigen::MatrixXd floored_inv_sqrt(const Eigen::MatrixXd& psd, double ridge_rel);

}  // namespace hdfts
