#include "hdfts/pflr.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "hdfts/linalg.hpp"
#include "hdfts/rng.hpp"

namespace hdfts {

namespace {
constexpr double kSupportTol = 1e-8;

double soft(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}
}  // namespace

PflrDesign build_design_pflr(const FunctionalPanel& panel, const TruncationRule& rule,
                             double ridge) {
  if (!panel.has_scalar_response())
    throw std::invalid_argument("build_design_pflr: panel has no scalar response");

  PflrDesign d;
  d.n = panel.n;
  d.p = panel.p;
  d.d = static_cast<int>(panel.z.cols());
  d.y = panel.y;

  if (d.p > 0) {
    d.es_x = eigendecompose(panel);
    d.es_x.q = select_truncation(d.es_x, rule);
    d.q = d.es_x.q;
    for (int j = 0; j < d.p; ++j) {
      const Eigen::MatrixXd xj = d.es_x.scores[j].leftCols(d.q[j]);
      const Eigen::MatrixXd gram = xj.transpose() * xj / d.n;
      d.d_sqrt.push_back(floored_sqrt(gram, ridge));
      d.d_inv.push_back(floored_inv_sqrt(gram, ridge));
      d.omega.push_back(xj * d.d_inv.back());
    }
  } else {
    d.q.resize(0);
  }

  d.z_scale.resize(d.d);
  d.z_std.resize(d.n, d.d);
  for (int k = 0; k < d.d; ++k) {
    const double s = std::sqrt(panel.z.col(k).squaredNorm() / d.n);
    if (!(s > 0.0)) throw std::invalid_argument("build_design_pflr: zero scalar column");
    d.z_scale[k] = s;
    d.z_std.col(k) = panel.z.col(k) / s;
  }
  return d;
}

std::pair<double, double> lambda_max_pflr(const PflrDesign& design) {
  double l1 = 0.0, l2 = 0.0;
  for (int j = 0; j < design.p; ++j)
    l1 = std::max(l1, (design.omega[j].transpose() * design.y / design.n).norm());
  for (int k = 0; k < design.d; ++k)
    l2 = std::max(l2, std::abs(design.z_std.col(k).dot(design.y) / design.n));
  return {l1, l2};
}

namespace {

double mixed_objective(const PflrDesign& d, const PflrFit& fit,
                       const Eigen::VectorXd& gamma_std, const Eigen::VectorXd& resid) {
  double pen = 0.0;
  for (const auto& b : fit.b) pen += fit.lambda1 * b.norm();
  pen += fit.lambda2 * gamma_std.lpNorm<1>();
  return 0.5 * resid.squaredNorm() / d.n + pen;
}

double mixed_kkt(const PflrDesign& d, const PflrFit& fit, const Eigen::VectorXd& gamma_std,
                 const Eigen::VectorXd& resid) {
  double worst = 0.0;
  for (int j = 0; j < d.p; ++j) {
    const Eigen::VectorXd c = d.omega[j].transpose() * resid / d.n;
    const double bn = fit.b[j].norm();
    if (bn > 0.0)
      worst = std::max(worst, (c - fit.lambda1 * fit.b[j] / bn).norm());
    else
      worst = std::max(worst, std::max(0.0, c.norm() - fit.lambda1));
  }
  for (int k = 0; k < d.d; ++k) {
    const double c = d.z_std.col(k).dot(resid) / d.n;
    if (gamma_std[k] != 0.0)
      worst = std::max(worst, std::abs(c - fit.lambda2 * (gamma_std[k] > 0 ? 1.0 : -1.0)));
    else
      worst = std::max(worst, std::max(0.0, std::abs(c) - fit.lambda2));
  }
  return worst;
}

void reconstruct(const PflrDesign& d, const Eigen::VectorXd& gamma_std, PflrFit& fit) {
  fit.psi.clear();
  fit.support_func.clear();
  fit.support_scalar.clear();
  fit.beta = BlockKernel::zero(d.p > 0 ? d.es_x.basis : scalar_basis(), scalar_basis(),
                               std::max(d.p, 0), 1);
  for (int j = 0; j < d.p; ++j) {
    fit.psi.push_back(d.d_inv[j] * fit.b[j]);
    if (fit.psi.back().norm() > kSupportTol) fit.support_func.push_back(j);
    fit.beta.block(j, 0) = d.es_x.psi[j].leftCols(d.q[j]) * fit.psi.back();
  }
  fit.gamma.resize(d.d);
  for (int k = 0; k < d.d; ++k) {
    fit.gamma[k] = gamma_std[k] / d.z_scale[k];
    if (std::abs(gamma_std[k]) > 0.0) fit.support_scalar.push_back(k);
  }
}

}  // namespace

PflrFit solve_mixed_lasso(const PflrDesign& design, double lambda1, double lambda2,
                          const SolveOptions& opts) {
  if (lambda1 < 0.0 || lambda2 < 0.0)
    throw std::invalid_argument("solve_mixed_lasso: penalties must be >= 0");
  PflrFit fit;
  fit.p = design.p;
  fit.d = design.d;
  for (int j = 0; j < design.p; ++j) fit.b.push_back(Eigen::VectorXd::Zero(design.q[j]));
  fit.gamma = Eigen::VectorXd::Zero(design.d);
  solve_mixed_lasso_warm(design, lambda1, lambda2, opts, fit);
  return fit;
}

void solve_mixed_lasso_warm(const PflrDesign& design, double lambda1, double lambda2,
                            const SolveOptions& opts, PflrFit& fit) {
  const int n = design.n;
  fit.lambda1 = lambda1;
  fit.lambda2 = lambda2;
  fit.sweeps = 0;
  fit.converged = false;
  fit.objective_trace.clear();

  Eigen::VectorXd gamma_std(design.d);
  for (int k = 0; k < design.d; ++k) gamma_std[k] = fit.gamma[k] * design.z_scale[k];

  Eigen::VectorXd resid = design.y;
  for (int j = 0; j < design.p; ++j) resid.noalias() -= design.omega[j] * fit.b[j];
  if (design.d > 0) resid.noalias() -= design.z_std * gamma_std;

  fit.objective_trace.push_back(mixed_objective(design, fit, gamma_std, resid));

  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    // functional blocks first, then scalar coordinates
    for (int j = 0; j < design.p; ++j) {
      Eigen::VectorXd g = fit.b[j] + design.omega[j].transpose() * resid / n;
      const double gn = g.norm();
      Eigen::VectorXd bnew;
      if (gn > lambda1)
        bnew = (1.0 - lambda1 / gn) * g;
      else
        bnew = Eigen::VectorXd::Zero(g.size());
      if ((bnew - fit.b[j]).norm() > 0.0) {
        resid.noalias() -= design.omega[j] * (bnew - fit.b[j]);
        fit.b[j] = std::move(bnew);
      }
    }
    for (int k = 0; k < design.d; ++k) {
      const double g = gamma_std[k] + design.z_std.col(k).dot(resid) / n;
      const double gnew = soft(g, lambda2);
      if (gnew != gamma_std[k]) {
        resid.noalias() -= design.z_std.col(k) * (gnew - gamma_std[k]);
        gamma_std[k] = gnew;
      }
    }
    ++fit.sweeps;
    fit.objective_trace.push_back(mixed_objective(design, fit, gamma_std, resid));
    fit.kkt_residual = mixed_kkt(design, fit, gamma_std, resid);
    if (fit.kkt_residual <= opts.tol) {
      fit.converged = true;
      break;
    }
  }
  reconstruct(design, gamma_std, fit);
}

ReReport check_re_mixed(const PflrDesign& design, int trials, double tau1, double tau2,
                        int sparsity, std::uint64_t seed) {
  Eigen::VectorXi offsets(design.p + 1);
  offsets[0] = 0;
  for (int j = 0; j < design.p; ++j) offsets[j + 1] = offsets[j] + design.q[j];
  const int dim = offsets[design.p] + design.d;

  // raw scalar columns enter S, matching the unstandardized RE statement
  Eigen::MatrixXd s(design.n, dim);
  for (int j = 0; j < design.p; ++j) s.middleCols(offsets[j], design.q[j]) = design.omega[j];
  for (int k = 0; k < design.d; ++k)
    s.col(offsets[design.p] + k) = design.z_std.col(k) * design.z_scale[k];
  const Eigen::MatrixXd gram = s.transpose() * s / design.n;

  ReReport rep;
  rep.trials = trials;
  rep.min_eig = sym_eig_desc(gram).values.minCoeff();
  rep.min_margin = std::numeric_limits<double>::infinity();

  Rng rng(seed);
  const int groups = design.p + design.d;  // scalar coordinates count as singleton groups
  const int spick = std::max(1, std::min(sparsity, groups));
  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(dim);
    for (int pick = 0; pick < spick; ++pick) {
      const int gsel = static_cast<int>(rng.next_u64() % groups);
      if (gsel < design.p) {
        for (int i = offsets[gsel]; i < offsets[gsel + 1]; ++i) theta[i] = rng.normal();
      } else {
        theta[offsets[design.p] + (gsel - design.p)] = rng.normal();
      }
    }
    const double nrm = theta.norm();
    if (nrm == 0.0) continue;
    theta /= nrm;
    const double quad = theta.dot(gram * theta);
    const double margin = quad - tau2 + tau1 * theta.lpNorm<1>() * theta.lpNorm<1>();
    rep.min_margin = std::min(rep.min_margin, margin);
    if (margin < -1e-10 * (1.0 + std::abs(tau2))) ++rep.violations;
  }
  return rep;
}

PflrError estimation_error_pflr(const PflrFit& fit, const BlockKernel& beta_truth,
                                const Eigen::VectorXd& gamma_truth, double alpha) {
  if (beta_truth.rows != fit.p || gamma_truth.size() != fit.d)
    throw std::invalid_argument("estimation_error_pflr: shape mismatch");

  PflrError err;
  int tp = 0, fp = 0, fn = 0;
  for (int j = 0; j < fit.p; ++j) {
    err.l1_func += (fit.beta.block(j, 0) - beta_truth.block(j, 0)).norm();
    const bool est_on = fit.beta.block(j, 0).norm() > kSupportTol;
    const bool true_on = beta_truth.block(j, 0).norm() > kSupportTol;
    tp += est_on && true_on;
    fp += est_on && !true_on;
    fn += !est_on && true_on;
  }
  const double prec_f = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 1.0;
  const double rec_f = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn) : 1.0;
  err.f1_func = (prec_f + rec_f) > 0.0 ? 2.0 * prec_f * rec_f / (prec_f + rec_f) : 0.0;

  int tps = 0, fps = 0, fns = 0;
  for (int k = 0; k < fit.d; ++k) {
    err.l1_scalar += std::abs(fit.gamma[k] - gamma_truth[k]);
    const bool est_on = std::abs(fit.gamma[k]) > 0.0;
    const bool true_on = std::abs(gamma_truth[k]) > 0.0;
    tps += est_on && true_on;
    fps += est_on && !true_on;
    fns += !est_on && true_on;
  }
  const double prec_s = (tps + fps) > 0 ? static_cast<double>(tps) / (tps + fps) : 1.0;
  const double rec_s = (tps + fns) > 0 ? static_cast<double>(tps) / (tps + fns) : 1.0;
  err.f1_scalar = (prec_s + rec_s) > 0.0 ? 2.0 * prec_s * rec_s / (prec_s + rec_s) : 0.0;

  int q = 1;
  for (const auto& b : fit.b) q = std::max<int>(q, static_cast<int>(b.size()));
  err.combined = err.l1_func + std::pow(static_cast<double>(q), alpha / 2.0) * err.l1_scalar;
  return err;
}

}  // namespace hdfts
