#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "hdfts/fllr.hpp"
#include "hdfts/fpca.hpp"

namespace hdfts {

// scalar response on standardized functional score blocks plus scalar
// covariate columns; p = 0 (pure lasso) and d = 0 (pure functional) both work
struct PflrDesign {
  int n = 0;
  int p = 0;
  int d = 0;
  Eigen::VectorXi q;                    // per-variable truncation
  Eigen::VectorXd y;
  std::vector<Eigen::MatrixXd> omega;   // per j: n x q[j]
  std::vector<Eigen::MatrixXd> d_sqrt;  // per j: q x q
  std::vector<Eigen::MatrixXd> d_inv;
  Eigen::MatrixXd z_std;                // columns scaled to unit sample second moment
  Eigen::VectorXd z_scale;
  EigenSystem es_x;
};

PflrDesign build_design_pflr(const FunctionalPanel& panel, const TruncationRule& rule,
                             double ridge = 1e-8);

struct PflrFit {
  int p = 0;
  int d = 0;
  std::vector<Eigen::VectorXd> b;    // per functional block
  std::vector<Eigen::VectorXd> psi;  // D^{-1} B
  BlockKernel beta;                  // p x 1 coefficient curves
  Eigen::VectorXd gamma;             // on the original covariate scale
  std::vector<int> support_func;
  std::vector<int> support_scalar;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  int sweeps = 0;
  double kkt_residual = 0.0;
  bool converged = false;
  std::vector<double> objective_trace;
};

// smallest (lambda1, lambda2) giving the all-zero solution
std::pair<double, double> lambda_max_pflr(const PflrDesign& design);

PflrFit solve_mixed_lasso(const PflrDesign& design, double lambda1, double lambda2,
                          const SolveOptions& opts = {});

void solve_mixed_lasso_warm(const PflrDesign& design, double lambda1, double lambda2,
                            const SolveOptions& opts, PflrFit& fit);

// RE check on n^{-1} S^T S with S = (Omega, Z)
ReReport check_re_mixed(const PflrDesign& design, int trials, double tau1, double tau2,
                        int sparsity, std::uint64_t seed);

struct PflrError {
  double l1_func = 0.0;
  double l1_scalar = 0.0;
  double combined = 0.0;  // l1_func + q^(alpha/2) * l1_scalar
  double f1_func = 0.0;
  double f1_scalar = 0.0;
};

PflrError estimation_error_pflr(const PflrFit& fit, const BlockKernel& beta_truth,
                                const Eigen::VectorXd& gamma_truth, double alpha);

}  // namespace hdfts
