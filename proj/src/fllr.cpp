#include "hdfts/fllr.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "hdfts/linalg.hpp"
#include "hdfts/rng.hpp"

namespace hdfts {

namespace {
constexpr double kSupportTol = 1e-8;
}

FllrDesign build_design(const FunctionalPanel& panel, int L, const TruncationRule& rule_x,
                        const TruncationRule& rule_y, double ridge) {
  if (!panel.has_functional_response())
    throw std::invalid_argument("build_design: panel has no functional response");
  if (panel.n <= L) throw std::invalid_argument("build_design: need n > L");

  FllrDesign d;
  d.p = panel.p;
  d.L = L;
  d.n_eff = panel.n - L;

  d.es_x = eigendecompose(panel);
  d.es_x.q = select_truncation(d.es_x, rule_x);
  d.q1 = d.es_x.q;

  // response eigenanalysis over the modeled rows t = L+1..n
  FunctionalPanel ytail;
  ytail.basis = panel.response_basis;
  ytail.n = d.n_eff;
  ytail.p = 1;
  ytail.x = panel.yf.bottomRows(d.n_eff);
  d.es_y = eigendecompose(ytail);
  d.es_y.q = select_truncation(d.es_y, rule_y);
  d.q2 = d.es_y.q[0];
  d.u = d.es_y.scores[0].leftCols(d.q2);

  const int m = d.n_eff;
  d.omega.reserve(d.blocks());
  d.d_sqrt.reserve(d.blocks());
  d.d_inv.reserve(d.blocks());
  for (int h = 0; h <= L; ++h) {
    for (int j = 0; j < d.p; ++j) {
      const int qj = d.q1[j];
      // rows zeta_{(t-h)j} for t = L+1..n
      const Eigen::MatrixXd v = d.es_x.scores[j].middleRows(L - h, m).leftCols(qj);
      const Eigen::MatrixXd gram = v.transpose() * v / m;
      d.d_sqrt.push_back(floored_sqrt(gram, ridge));
      d.d_inv.push_back(floored_inv_sqrt(gram, ridge));
      d.omega.push_back(v * d.d_inv.back());
    }
  }
  return d;
}

double lambda_max(const FllrDesign& design) {
  double best = 0.0;
  for (int b = 0; b < design.blocks(); ++b)
    best = std::max(best, (design.omega[b].transpose() * design.u / design.n_eff).norm());
  return best;
}

namespace {

double group_objective(const FllrDesign& d, const std::vector<Eigen::MatrixXd>& b,
                       const Eigen::MatrixXd& resid, double lambda) {
  double pen = 0.0;
  for (const auto& blk : b) pen += blk.norm();
  return 0.5 * resid.squaredNorm() / d.n_eff + lambda * pen;
}

double group_kkt_residual(const FllrDesign& d, const std::vector<Eigen::MatrixXd>& b,
                          const Eigen::MatrixXd& resid, double lambda) {
  double worst = 0.0;
  for (int k = 0; k < d.blocks(); ++k) {
    const Eigen::MatrixXd c = d.omega[k].transpose() * resid / d.n_eff;
    const double bn = b[k].norm();
    if (bn > 0.0)
      worst = std::max(worst, (c - lambda * b[k] / bn).norm());
    else
      worst = std::max(worst, std::max(0.0, c.norm() - lambda));
  }
  return worst;
}

void reconstruct(const FllrDesign& d, FllrFit& fit) {
  fit.psi.clear();
  fit.support.clear();
  const BasisSpec& bu = d.es_x.basis;
  const BasisSpec& bv = d.es_y.basis;
  fit.beta = BlockKernel::zero(bu, bv, d.blocks(), 1);
  const Eigen::MatrixXd pphi = d.es_y.psi[0].leftCols(d.q2);
  for (int h = 0; h <= d.L; ++h) {
    for (int j = 0; j < d.p; ++j) {
      const int k = h * d.p + j;
      fit.psi.push_back(d.d_inv[k] * fit.b[k]);
      if (fit.psi.back().norm() > kSupportTol) fit.support.emplace_back(h, j);
      fit.beta.block(k, 0) =
          d.es_x.psi[j].leftCols(d.q1[j]) * fit.psi.back() * pphi.transpose();
    }
  }
}

}  // namespace

FllrFit solve_group_lasso(const FllrDesign& design, double lambda, const SolveOptions& opts) {
  if (lambda < 0.0) throw std::invalid_argument("solve_group_lasso: lambda must be >= 0");
  FllrFit fit;
  fit.p = design.p;
  fit.L = design.L;
  fit.lambda = lambda;
  fit.b.reserve(design.blocks());
  for (int k = 0; k < design.blocks(); ++k)
    fit.b.push_back(Eigen::MatrixXd::Zero(design.block_q(k), design.q2));
  solve_group_lasso_warm(design, lambda, opts, fit);
  return fit;
}

void solve_group_lasso_warm(const FllrDesign& design, double lambda, const SolveOptions& opts,
                            FllrFit& fit) {
  const int m = design.n_eff;
  Eigen::MatrixXd resid = design.u;
  for (int k = 0; k < design.blocks(); ++k) resid.noalias() -= design.omega[k] * fit.b[k];

  fit.lambda = lambda;
  fit.sweeps = 0;
  fit.converged = false;
  fit.objective_trace.clear();
  fit.objective_trace.push_back(group_objective(design, fit.b, resid, lambda));

  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    for (int k = 0; k < design.blocks(); ++k) {
      // partial-residual correlation; the block Gram is the identity
      Eigen::MatrixXd g = fit.b[k] + design.omega[k].transpose() * resid / m;
      const double gn = g.norm();
      Eigen::MatrixXd bnew;
      if (gn > lambda)
        bnew = (1.0 - lambda / gn) * g;
      else
        bnew = Eigen::MatrixXd::Zero(g.rows(), g.cols());
      if ((bnew - fit.b[k]).norm() > 0.0) {
        resid.noalias() -= design.omega[k] * (bnew - fit.b[k]);
        fit.b[k] = std::move(bnew);
      }
    }
    ++fit.sweeps;
    fit.objective_trace.push_back(group_objective(design, fit.b, resid, lambda));
    fit.kkt_residual = group_kkt_residual(design, fit.b, resid, lambda);
    if (fit.kkt_residual <= opts.tol) {
      fit.converged = true;
      break;
    }
  }
  reconstruct(design, fit);
}

std::vector<FllrFit> fit_path(const FllrDesign& design, const std::vector<double>& lambdas,
                              const SolveOptions& opts) {
  for (std::size_t i = 1; i < lambdas.size(); ++i)
    if (lambdas[i] > lambdas[i - 1])
      throw std::invalid_argument("fit_path: lambda grid must be nonincreasing");
  std::vector<FllrFit> fits;
  FllrFit current;
  current.p = design.p;
  current.L = design.L;
  for (int k = 0; k < design.blocks(); ++k)
    current.b.push_back(Eigen::MatrixXd::Zero(design.block_q(k), design.q2));
  for (double lam : lambdas) {
    solve_group_lasso_warm(design, lam, opts, current);
    fits.push_back(current);
  }
  return fits;
}

ReReport check_re_condition(const FllrDesign& design, int trials, double tau1, double tau2,
                            int sparsity, std::uint64_t seed) {
  const int nb = design.blocks();
  Eigen::VectorXi offsets(nb + 1);
  offsets[0] = 0;
  for (int k = 0; k < nb; ++k) offsets[k + 1] = offsets[k] + design.block_q(k);
  const int dim = offsets[nb];

  Eigen::MatrixXd full(design.n_eff, dim);
  for (int k = 0; k < nb; ++k)
    full.middleCols(offsets[k], design.block_q(k)) = design.omega[k];
  const Eigen::MatrixXd gamma = full.transpose() * full / design.n_eff;

  ReReport rep;
  rep.trials = trials;
  rep.min_eig = sym_eig_desc(gamma).values.minCoeff();
  rep.min_margin = std::numeric_limits<double>::infinity();

  Rng rng(seed);
  const int s = std::max(1, std::min(sparsity, nb));
  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(dim);
    for (int pick = 0; pick < s; ++pick) {
      const int k = static_cast<int>(rng.next_u64() % nb);
      for (int i = offsets[k]; i < offsets[k + 1]; ++i) theta[i] = rng.normal();
    }
    const double nrm = theta.norm();
    if (nrm == 0.0) continue;
    theta /= nrm;
    const double quad = theta.dot(gamma * theta);
    const double margin = quad - tau2 + tau1 * theta.lpNorm<1>() * theta.lpNorm<1>();
    rep.min_margin = std::min(rep.min_margin, margin);
    if (margin < -1e-10 * (1.0 + std::abs(tau2))) ++rep.violations;
  }
  return rep;
}

EstimationError estimation_error(const FllrFit& fit, const BlockKernel& truth) {
  if (truth.rows != fit.beta.rows || truth.cols != 1 ||
      truth.coef.rows() != fit.beta.coef.rows() || truth.coef.cols() != fit.beta.coef.cols())
    throw std::invalid_argument("estimation_error: shape mismatch");

  EstimationError err;
  int tp = 0, fp = 0, fn = 0;
  for (int k = 0; k < truth.rows; ++k) {
    err.l1_func += (fit.beta.block(k, 0) - truth.block(k, 0)).norm();
    const bool est_on = fit.beta.block(k, 0).norm() > kSupportTol;
    const bool true_on = truth.block(k, 0).norm() > kSupportTol;
    tp += est_on && true_on;
    fp += est_on && !true_on;
    fn += !est_on && true_on;
  }
  err.support_size = tp + fp;
  err.precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 1.0;
  err.recall = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : 1.0;
  err.f1 = (err.precision + err.recall) > 0.0
               ? 2.0 * err.precision * err.recall / (err.precision + err.recall)
               : 0.0;
  return err;
}

}  // namespace hdfts
