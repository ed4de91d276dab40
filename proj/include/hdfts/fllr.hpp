#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "hdfts/fpca.hpp"

namespace hdfts {

// Matrix form of the lagged regression: response scores U regressed on
// standardized lagged covariate scores. Blocks are indexed b = h*p + j.
// Standardization D_hj = {(n-L)^{-1} V^T V}^{1/2} makes each block design
// orthonormal, so group soft-thresholding is the exact block update.
struct FllrDesign {
  int n_eff = 0;  // n - L rows
  int p = 0;
  int L = 0;
  int q2 = 0;
  Eigen::VectorXi q1;                   // per-variable covariate truncation
  Eigen::MatrixXd u;                    // (n-L) x q2 response scores
  std::vector<Eigen::MatrixXd> omega;   // per block: (n-L) x q1[j], V * D^{-1}
  std::vector<Eigen::MatrixXd> d_sqrt;  // per block: q1 x q1
  std::vector<Eigen::MatrixXd> d_inv;
  EigenSystem es_x;
  EigenSystem es_y;

  int blocks() const { return (L + 1) * p; }
  int block_q(int b) const { return q1[b % p]; }
};

FllrDesign build_design(const FunctionalPanel& panel, int L, const TruncationRule& rule_x,
                        const TruncationRule& rule_y, double ridge = 1e-8);

struct SolveOptions {
  double tol = 1e-8;
  int max_sweeps = 10000;
};

struct FllrFit {
  int p = 0;
  int L = 0;
  std::vector<Eigen::MatrixXd> b;    // minimizer blocks
  std::vector<Eigen::MatrixXd> psi;  // D^{-1} B
  BlockKernel beta;                  // reconstructed surfaces, rows (h*p + j)
  std::vector<std::pair<int, int>> support;  // (h, j) with nonzero block
  double lambda = 0.0;
  int sweeps = 0;
  double kkt_residual = 0.0;
  bool converged = false;
  std::vector<double> objective_trace;  // objective after each sweep
};

// smallest lambda whose solution is exactly zero
double lambda_max(const FllrDesign& design);

FllrFit solve_group_lasso(const FllrDesign& design, double lambda, const SolveOptions& opts = {});

// resolve at a new lambda starting from the blocks already in `fit`
void solve_group_lasso_warm(const FllrDesign& design, double lambda, const SolveOptions& opts,
                            FllrFit& fit);

// warm-started solves over a nonincreasing lambda grid
std::vector<FllrFit> fit_path(const FllrDesign& design, const std::vector<double>& lambdas,
                              const SolveOptions& opts = {});

struct ReReport {
  double min_eig = 0.0;
  double min_margin = 0.0;
  int trials = 0;
  int violations = 0;
};

// min eigenvalue of Gamma_hat = (n-L)^{-1} Omega^T Omega plus the RE margin
// theta' Gamma theta - tau2 |theta|^2 + tau1 |theta|_1^2 over random sparse
// directions supported on `sparsity` blocks
ReReport check_re_condition(const FllrDesign& design, int trials, double tau1, double tau2,
                            int sparsity, std::uint64_t seed);

struct EstimationError {
  double l1_func = 0.0;  // sum of blockwise Hilbert-Schmidt distances
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int support_size = 0;
};

EstimationError estimation_error(const FllrFit& fit, const BlockKernel& truth);

}  // namespace hdfts
