#pragma once

#include <vector>

#include "hdfts/funcspace.hpp"
#include "hdfts/procgen.hpp"

namespace hdfts {

// per-variable eigenpairs of the sample marginal covariance plus FPC scores
struct EigenSystem {
  BasisSpec basis;
  int n = 0;
  int p = 0;
  Eigen::MatrixXd omega;                // p x G, descending per variable
  std::vector<Eigen::MatrixXd> psi;     // per variable: G x G, columns are eigenfunctions
  Eigen::VectorXi q;                    // chosen truncation per variable
  std::vector<Eigen::MatrixXd> scores;  // per variable: n x G

  Curve eigenfunction(int j, int l) const;
};

// Sigma_hat_h(u,v) = (n-h)^{-1} sum_t X_t(u) X_{t+h}(v)^T
BlockKernel sample_autocov(const FunctionalPanel& panel, int h);

enum class CrossTarget { functional_response, scalar_companion };
BlockKernel sample_cross_cov(const FunctionalPanel& panel, int h, CrossTarget target);

EigenSystem eigendecompose_matrix(const Eigen::MatrixXd& coefs, const BasisSpec& basis, int p);
EigenSystem eigendecompose(const FunctionalPanel& panel);
EigenSystem eigendecompose_response(const FunctionalPanel& panel);

struct TruncationRule {
  enum class Kind { fve, fixed };
  Kind kind = Kind::fixed;
  double rho = 0.9;
  int q = 3;

  static TruncationRule fve(double rho);
  static TruncationRule fixed(int q);
};

Eigen::VectorXi select_truncation(const EigenSystem& es, const TruncationRule& rule);

// sample cross-(auto)covariance between score arrays:
// sigma_hat_{h,jklm} = (n-h)^{-1} sum_t zeta_tjl xi_(t+h)km
struct ScoreCrossCov {
  int h = 0;
  int p = 0;  // left variables
  int d = 0;  // right variables (1 per scalar column)
  int q1 = 0;
  int q2 = 0;
  std::vector<Eigen::MatrixXd> sigma;  // p*d blocks, each q1 x q2

  Eigen::MatrixXd& block(int j, int k) { return sigma[static_cast<std::size_t>(j) * d + k]; }
  const Eigen::MatrixXd& block(int j, int k) const {
    return sigma[static_cast<std::size_t>(j) * d + k];
  }
};

ScoreCrossCov score_cross_cov(const EigenSystem& x, const EigenSystem& y, int h, int q1, int q2);
ScoreCrossCov score_cross_cov_scalar(const EigenSystem& x, const Eigen::MatrixXd& z, int h,
                                     int q1);

// population counterpart: sigma_{h,jklm} = psi_jl^T C_h[j,k] phi_km
ScoreCrossCov population_score_cross_cov(const std::vector<Eigen::MatrixXd>& x_psi,
                                         const std::vector<Eigen::MatrixXd>& y_psi,
                                         const BlockKernel& c_h, int q1, int q2);

// normalizations from the deviation bounds: each statistic is the max over
// (j,k,l,m) of |sigma_hat - sigma| divided by the stated weight
enum class DeviationKind {
  xy,               // (l^{a1+1} v m^{a2+1}) sqrt(omega_jl omega_km)
  xz,               // l^{a1+1} sqrt(omega_jl)
  xeps_functional,  // (l^{a1} v m^{a2}) sqrt(omega_jl omega_m), truth zero
  xeps_scalar       // sqrt(omega_jl), truth zero
};

struct DeviationWeights {
  double alpha1 = 1.5;
  double alpha2 = 1.5;
  Eigen::MatrixXd omega_x;  // p x >=q1 population eigenvalues
  Eigen::MatrixXd omega_y;  // d x >=q2 (unused for scalar kinds)
};

double normalized_max_deviation(const ScoreCrossCov& est, const ScoreCrossCov* truth,
                                DeviationKind kind, const DeviationWeights& w);

}  // namespace hdfts
