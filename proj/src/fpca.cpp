#include "hdfts/fpca.hpp"

#include <cmath>
#include <stdexcept>

#include "hdfts/linalg.hpp"

namespace hdfts {

Curve EigenSystem::eigenfunction(int j, int l) const {
  Curve c;
  c.basis = basis;
  c.coef = psi[j].col(l);
  return c;
}

BlockKernel sample_autocov(const FunctionalPanel& panel, int h) {
  if (h < 0 || h >= panel.n) throw std::invalid_argument("sample_autocov: need 0 <= h < n");
  const int m = panel.n - h;
  BlockKernel out = BlockKernel::zero(panel.basis, panel.basis, panel.p, panel.p);
  out.coef = panel.x.topRows(m).transpose() * panel.x.bottomRows(m) / m;
  return out;
}

BlockKernel sample_cross_cov(const FunctionalPanel& panel, int h, CrossTarget target) {
  if (h < 0 || h >= panel.n) throw std::invalid_argument("sample_cross_cov: need 0 <= h < n");
  const int m = panel.n - h;
  if (target == CrossTarget::functional_response) {
    if (!panel.has_functional_response())
      throw std::invalid_argument("sample_cross_cov: panel has no functional response");
    BlockKernel out = BlockKernel::zero(panel.basis, panel.response_basis, panel.p, 1);
    out.coef = panel.x.topRows(m).transpose() * panel.yf.bottomRows(m) / m;
    return out;
  }
  if (!panel.has_scalar_companion())
    throw std::invalid_argument("sample_cross_cov: panel has no scalar companion");
  BlockKernel out = BlockKernel::zero(panel.basis, scalar_basis(), panel.p,
                                      static_cast<int>(panel.z.cols()));
  out.coef = panel.x.topRows(m).transpose() * panel.z.bottomRows(m) / m;
  return out;
}

EigenSystem eigendecompose_matrix(const Eigen::MatrixXd& coefs, const BasisSpec& basis, int p) {
  const int n = static_cast<int>(coefs.rows());
  const int g = basis.size;
  if (n < 1) throw std::invalid_argument("eigendecompose: empty panel");
  if (coefs.cols() != static_cast<Eigen::Index>(p) * g)
    throw std::invalid_argument("eigendecompose: coefficient width mismatch");

  EigenSystem es;
  es.basis = basis;
  es.n = n;
  es.p = p;
  es.omega.resize(p, g);
  es.psi.reserve(p);
  es.scores.reserve(p);
  es.q = Eigen::VectorXi::Constant(p, g);
  for (int j = 0; j < p; ++j) {
    const auto xj = coefs.middleCols(static_cast<Eigen::Index>(j) * g, g);
    const Eigen::MatrixXd cov = xj.transpose() * xj / n;
    const SymEig eig = sym_eig_desc(cov);
    es.omega.row(j) = eig.values.cwiseMax(0.0).transpose();
    es.psi.push_back(eig.vectors);
    es.scores.push_back(xj * eig.vectors);
  }
  return es;
}

EigenSystem eigendecompose(const FunctionalPanel& panel) {
  return eigendecompose_matrix(panel.x, panel.basis, panel.p);
}

EigenSystem eigendecompose_response(const FunctionalPanel& panel) {
  if (!panel.has_functional_response())
    throw std::invalid_argument("eigendecompose_response: panel has no functional response");
  return eigendecompose_matrix(panel.yf, panel.response_basis, 1);
}

TruncationRule TruncationRule::fve(double rho) {
  if (!(rho > 0.0 && rho <= 1.0))
    throw std::invalid_argument("TruncationRule: fve share must be in (0, 1]");
  TruncationRule r;
  r.kind = Kind::fve;
  r.rho = rho;
  return r;
}

TruncationRule TruncationRule::fixed(int q) {
  if (q < 1) throw std::invalid_argument("TruncationRule: fixed q must be >= 1");
  TruncationRule r;
  r.kind = Kind::fixed;
  r.q = q;
  return r;
}

Eigen::VectorXi select_truncation(const EigenSystem& es, const TruncationRule& rule) {
  const int g = es.basis.size;
  Eigen::VectorXi q(es.p);
  for (int j = 0; j < es.p; ++j) {
    if (rule.kind == TruncationRule::Kind::fixed) {
      q[j] = std::min(rule.q, g);
      continue;
    }
    const double total = es.omega.row(j).sum();
    if (!(total > 0.0)) {
      q[j] = 1;
      continue;
    }
    double acc = 0.0;
    int sel = g;
    for (int l = 0; l < g; ++l) {
      acc += es.omega(j, l);
      if (acc >= rule.rho * total) {
        sel = l + 1;
        break;
      }
    }
    q[j] = sel;
  }
  return q;
}

ScoreCrossCov score_cross_cov(const EigenSystem& x, const EigenSystem& y, int h, int q1, int q2) {
  if (x.n != y.n) throw std::invalid_argument("score_cross_cov: sample size mismatch");
  if (h < 0 || h >= x.n) throw std::invalid_argument("score_cross_cov: need 0 <= h < n");
  const int m = x.n - h;
  ScoreCrossCov out;
  out.h = h;
  out.p = x.p;
  out.d = y.p;
  out.q1 = q1;
  out.q2 = q2;
  out.sigma.reserve(static_cast<std::size_t>(x.p) * y.p);
  for (int j = 0; j < x.p; ++j)
    for (int k = 0; k < y.p; ++k)
      out.sigma.push_back(x.scores[j].topRows(m).leftCols(q1).transpose() *
                          y.scores[k].bottomRows(m).leftCols(q2) / m);
  return out;
}

ScoreCrossCov score_cross_cov_scalar(const EigenSystem& x, const Eigen::MatrixXd& z, int h,
                                     int q1) {
  if (x.n != z.rows()) throw std::invalid_argument("score_cross_cov_scalar: length mismatch");
  if (h < 0 || h >= x.n) throw std::invalid_argument("score_cross_cov_scalar: need 0 <= h < n");
  const int m = x.n - h;
  ScoreCrossCov out;
  out.h = h;
  out.p = x.p;
  out.d = static_cast<int>(z.cols());
  out.q1 = q1;
  out.q2 = 1;
  out.sigma.reserve(static_cast<std::size_t>(out.p) * out.d);
  for (int j = 0; j < x.p; ++j)
    for (int k = 0; k < out.d; ++k)
      out.sigma.push_back(x.scores[j].topRows(m).leftCols(q1).transpose() *
                          z.col(k).tail(m) / m);
  return out;
}

ScoreCrossCov population_score_cross_cov(const std::vector<Eigen::MatrixXd>& x_psi,
                                         const std::vector<Eigen::MatrixXd>& y_psi,
                                         const BlockKernel& c_h, int q1, int q2) {
  ScoreCrossCov out;
  out.h = 0;
  out.p = c_h.rows;
  out.d = c_h.cols;
  out.q1 = q1;
  out.q2 = q2;
  out.sigma.reserve(static_cast<std::size_t>(out.p) * out.d);
  for (int j = 0; j < out.p; ++j)
    for (int k = 0; k < out.d; ++k)
      out.sigma.push_back(x_psi[j].leftCols(q1).transpose() * c_h.block(j, k) *
                          y_psi[k].leftCols(q2));
  return out;
}

double normalized_max_deviation(const ScoreCrossCov& est, const ScoreCrossCov* truth,
                                DeviationKind kind, const DeviationWeights& w) {
  const bool needs_truth = (kind == DeviationKind::xy || kind == DeviationKind::xz);
  if (needs_truth && truth == nullptr)
    throw std::invalid_argument("normalized_max_deviation: truth required for this statistic");

  constexpr double kOmegaFloor = 1e-12;
  double best = 0.0;
  for (int j = 0; j < est.p; ++j) {
    for (int k = 0; k < est.d; ++k) {
      for (int li = 0; li < est.q1; ++li) {
        for (int mi = 0; mi < est.q2; ++mi) {
          const double s_hat = est.block(j, k)(li, mi);
          const double s = truth ? truth->block(j, k)(li, mi) : 0.0;
          const double l = li + 1.0;
          const double m = mi + 1.0;
          const double wx = std::max(w.omega_x(j, li), kOmegaFloor);
          double denom = 1.0;
          switch (kind) {
            case DeviationKind::xy:
              denom = std::max(std::pow(l, w.alpha1 + 1.0), std::pow(m, w.alpha2 + 1.0)) *
                      std::sqrt(wx * std::max(w.omega_y(k, mi), kOmegaFloor));
              break;
            case DeviationKind::xz:
              denom = std::pow(l, w.alpha1 + 1.0) * std::sqrt(wx);
              break;
            case DeviationKind::xeps_functional:
              denom = std::max(std::pow(l, w.alpha1), std::pow(m, w.alpha2)) *
                      std::sqrt(wx * std::max(w.omega_y(k, mi), kOmegaFloor));
              break;
            case DeviationKind::xeps_scalar:
              denom = std::sqrt(wx);
              break;
          }
          best = std::max(best, std::abs(s_hat - s) / denom);
        }
      }
    }
  }
  return best;
}

}  // namespace hdfts
