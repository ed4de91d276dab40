#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "hdfts/funcspace.hpp"

namespace hdfts {

enum class ScoreLaw { gaussian, scaled_uniform, scaled_rademacher };

// Error curve model: eps_tj = scale_j * sum_l sqrt(omega_l) a_tjl e_l with
// i.i.d. unit-variance scores a drawn from `law`. The coefficient-space
// covariance of eps_j is scale_j^2 * diag(omega).
struct ErrorSpec {
  Eigen::VectorXd omega;  // strictly decreasing, positive, length G
  Eigen::VectorXd scale;  // per-variable scale, length p (ones if empty)
  ScoreLaw law = ScoreLaw::gaussian;

  static Eigen::VectorXd power_decay(int g, double c, double alpha);
  double scale_for(int j) const { return scale.size() > 0 ? scale[j] : 1.0; }
  void validate(int g) const;
};

// moving-average functional process X_t = sum_l A_l(eps_{t-l})
struct MAProcessSpec {
  BasisSpec basis;
  int p = 1;
  std::vector<BlockKernel> lags;  // A_0 .. A_L, each p x p on `basis`
  ErrorSpec error;

  int max_lag() const { return static_cast<int>(lags.size()) - 1; }
  // sum_l ||A_l||_inf, the summability report
  double coefficient_sum() const;
  void validate() const;
};

// FAR(1)-type process X_t = rho(X_{t-1}) + eps_t expanded as a truncated MA:
// A_l = rho^l, cut when the tail of sum ||rho^l||_inf drops below tail_tol.
MAProcessSpec far1_to_ma(const BlockKernel& rho, const ErrorSpec& error, double tail_tol = 1e-8,
                         int max_terms = 4096);

// jointly stationary mixed process (X_t, Z_t): the scalar block is driven by
// its own MA over fresh noise plus loadings on the functional error scores
struct MixedProcessSpec {
  MAProcessSpec functional;
  int d = 0;
  std::vector<Eigen::MatrixXd> scalar_lags;      // B_l, d x d, on scalar noise w
  std::vector<Eigen::MatrixXd> cross_loadings;   // Lambda_l, d x (p*G), on error scores
  ScoreLaw scalar_law = ScoreLaw::gaussian;

  void validate() const;
};

// Compiled generative form shared by every process type: the stacked state
// (functional coefficients first, then scalars) is a finite MA over an i.i.d.
// unit-variance score vector, state_t = sum_l coeff[l] * s_{t-l}. Population
// second-order quantities are exact finite sums in this representation.
struct LinearSystem {
  int state_dim = 0;
  int score_dim = 0;
  int func_dim = 0;    // leading coordinates: p*G functional coefficients
  int scalar_dim = 0;  // trailing coordinates
  int p = 0;
  BasisSpec basis;
  std::vector<Eigen::MatrixXd> coeff;                 // M_0..M_L, state_dim x score_dim
  std::vector<std::pair<ScoreLaw, int>> score_groups;  // law, count (column ranges)

  int max_lag() const { return static_cast<int>(coeff.size()) - 1; }
  // E[state_t state_{t+h}^T] = sum_l M_l M_{l+h}^T; transpose gives negative lags
  Eigen::MatrixXd cross_cov(int h) const;
};

LinearSystem compile(const MAProcessSpec& spec);
LinearSystem compile(const MixedProcessSpec& spec);

// n draws of the stacked state, exactly stationary after max_lag presamples;
// bit-identical for a given seed
Eigen::MatrixXd simulate_states(const LinearSystem& sys, int n, std::uint64_t seed);

FunctionalPanel simulate_fma(const MAProcessSpec& spec, int n, std::uint64_t seed);
FunctionalPanel simulate_mixed(const MixedProcessSpec& spec, int n, std::uint64_t seed);

// population lag-h autocovariance Sigma_h(u,v) = cov(X_t(u), X_{t+h}(v)),
// matching the expectation of the sample estimator; zero beyond the MA order
BlockKernel population_autocov(const MAProcessSpec& spec, int h);
// cross block cov(X_t(u), Z_{t+h}) as a p x d grid with scalar column basis
BlockKernel population_cross_cov_xz(const MixedProcessSpec& spec, int h);
// scalar block cov(Z_t, Z_{t+h})
Eigen::MatrixXd population_autocov_z(const MixedProcessSpec& spec, int h);

// per-variable eigenpairs of the population marginal covariance, sign-fixed
// the same way as the sample FPCA (columns of psi are eigenfunction coefs)
struct PopulationEigen {
  Eigen::MatrixXd omega;                  // p x G, descending per variable
  std::vector<Eigen::MatrixXd> psi;       // per variable: G x G
};
PopulationEigen population_eigen(const MAProcessSpec& spec);

BasisSpec scalar_basis();  // G = 1 pseudo-basis used for scalar-valued kernel columns

// population RE curvature: infimum of the Rayleigh quotient of the stacked
// lag-0..L covariance relative to its per-variable marginal diagonal
double population_re_infimum(const MAProcessSpec& spec, int L);
// mixed version over (normalized functional coordinates, raw scalars)
double population_re_infimum_mixed(const MixedProcessSpec& spec);

// --- regression scenarios -------------------------------------------------

struct FllrScenario {
  MAProcessSpec covariate;
  int L = 0;                                   // model lag order
  BasisSpec response_basis;                    // V side
  std::vector<std::pair<int, int>> support;    // (h, j) with nonzero beta_hj
  double kappa = 2.0;
  double mu = 1.0;                             // a_hjlm = mu * (l+m)^(-kappa-1/2)
  ErrorSpec noise;                             // functional error on V (univariate)
  double noise_scale = 1.0;

  // surfaces built on the covariate's population eigenfunctions (u side) and
  // the raw response basis (v side); rows indexed (h*p + j)
  BlockKernel true_beta() const;
  void validate() const;
};

struct PflrScenario {
  MixedProcessSpec covariate;
  std::vector<int> func_support;               // S_1
  double kappa = 2.0;
  double mu = 1.0;                             // a_jl = mu * l^(-kappa)
  std::vector<std::pair<int, double>> gamma;   // sparse scalar coefficients
  ScoreLaw noise_law = ScoreLaw::gaussian;
  double noise_scale = 1.0;

  BlockKernel true_beta() const;               // p x 1 grid of curves (scalar col basis)
  Eigen::VectorXd gamma_dense() const;
  void validate() const;
};

FunctionalPanel gen_fllr_data(const FllrScenario& scn, int n, std::uint64_t seed);
FunctionalPanel gen_pflr_data(const PflrScenario& scn, int n, std::uint64_t seed);

}  // namespace hdfts
