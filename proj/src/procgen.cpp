#include "hdfts/procgen.hpp"

#include <cmath>
#include <stdexcept>

#include "hdfts/linalg.hpp"
#include "hdfts/rng.hpp"

namespace hdfts {

Eigen::VectorXd ErrorSpec::power_decay(int g, double c, double alpha) {
  Eigen::VectorXd w(g);
  for (int l = 0; l < g; ++l) w[l] = c * std::pow(static_cast<double>(l + 1), -alpha);
  return w;
}

void ErrorSpec::validate(int g) const {
  if (omega.size() != g) throw std::invalid_argument("ErrorSpec: omega length != basis size");
  for (int l = 0; l < g; ++l) {
    if (!(omega[l] > 0.0)) throw std::invalid_argument("ErrorSpec: omega must be positive");
    if (l > 0 && !(omega[l] < omega[l - 1]))
      throw std::invalid_argument("ErrorSpec: omega must be strictly decreasing");
  }
  for (int j = 0; j < scale.size(); ++j)
    if (!(scale[j] > 0.0)) throw std::invalid_argument("ErrorSpec: scale must be positive");
}

double MAProcessSpec::coefficient_sum() const {
  double s = 0.0;
  for (const auto& a : lags) s += block_norms(a).inf;
  return s;
}

void MAProcessSpec::validate() const {
  basis.validate();
  if (p < 1) throw std::invalid_argument("MAProcessSpec: p must be >= 1");
  if (lags.empty()) throw std::invalid_argument("MAProcessSpec: need at least A_0");
  for (const auto& a : lags) {
    if (a.rows != p || a.cols != p || !(a.row_basis == basis) || !(a.col_basis == basis))
      throw std::invalid_argument("MAProcessSpec: lag kernel shape mismatch");
  }
  error.validate(basis.size);
  if (error.scale.size() > 0 && error.scale.size() != p)
    throw std::invalid_argument("MAProcessSpec: error scale length != p");
}

MAProcessSpec far1_to_ma(const BlockKernel& rho, const ErrorSpec& error, double tail_tol,
                         int max_terms) {
  MAProcessSpec spec;
  spec.basis = rho.row_basis;
  spec.p = rho.rows;
  spec.error = error;

  BlockKernel a = BlockKernel::zero(rho.row_basis, rho.col_basis, rho.rows, rho.cols);
  a.coef = Eigen::MatrixXd::Identity(a.coef.rows(), a.coef.cols());
  spec.lags.push_back(a);

  double prev = 1.0;
  for (int l = 1; l < max_terms; ++l) {
    BlockKernel next = a;
    next.coef = rho.coef * a.coef;
    const double norm = block_norms(next).inf;
    if (norm >= prev && l > 1)
      throw std::invalid_argument("far1_to_ma: transition kernel is not a contraction");
    spec.lags.push_back(next);
    a = next;
    // geometric tail bound once the ratio settles
    const double ratio = prev > 0.0 ? norm / prev : 0.0;
    prev = norm;
    if (ratio < 1.0 && norm * ratio / (1.0 - ratio) < tail_tol) break;
  }
  return spec;
}

void MixedProcessSpec::validate() const {
  functional.validate();
  if (d < 0) throw std::invalid_argument("MixedProcessSpec: d must be >= 0");
  const int pg = functional.p * functional.basis.size;
  for (const auto& b : scalar_lags)
    if (b.rows() != d || b.cols() != d)
      throw std::invalid_argument("MixedProcessSpec: scalar lag shape mismatch");
  for (const auto& l : cross_loadings)
    if (l.rows() != d || l.cols() != pg)
      throw std::invalid_argument("MixedProcessSpec: cross loading shape mismatch");
}

Eigen::MatrixXd LinearSystem::cross_cov(int h) const {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(state_dim, state_dim);
  if (h < 0) return cross_cov(-h).transpose();
  const int nl = static_cast<int>(coeff.size());
  for (int l = 0; l + h < nl; ++l) c.noalias() += coeff[l] * coeff[l + h].transpose();
  return c;
}

namespace {

// block-diagonal score shaping: variable j contributes scale_j * sqrt(omega)
Eigen::VectorXd error_shaping(const MAProcessSpec& spec) {
  const int g = spec.basis.size;
  Eigen::VectorXd s(spec.p * g);
  for (int j = 0; j < spec.p; ++j) {
    const double sc = spec.error.scale_for(j);
    for (int l = 0; l < g; ++l) s[j * g + l] = sc * std::sqrt(spec.error.omega[l]);
  }
  return s;
}

}  // namespace

LinearSystem compile(const MAProcessSpec& spec) {
  spec.validate();
  LinearSystem sys;
  const int pg = spec.p * spec.basis.size;
  sys.state_dim = pg;
  sys.score_dim = pg;
  sys.func_dim = pg;
  sys.scalar_dim = 0;
  sys.p = spec.p;
  sys.basis = spec.basis;
  sys.score_groups = {{spec.error.law, pg}};
  const Eigen::VectorXd shape = error_shaping(spec);
  for (const auto& a : spec.lags) sys.coeff.push_back(a.coef * shape.asDiagonal());
  return sys;
}

LinearSystem compile(const MixedProcessSpec& spec) {
  spec.validate();
  const int pg = spec.functional.p * spec.functional.basis.size;
  LinearSystem sys;
  sys.state_dim = pg + spec.d;
  sys.score_dim = pg + spec.d;
  sys.func_dim = pg;
  sys.scalar_dim = spec.d;
  sys.p = spec.functional.p;
  sys.basis = spec.functional.basis;
  sys.score_groups = {{spec.functional.error.law, pg}, {spec.scalar_law, spec.d}};

  const Eigen::VectorXd shape = error_shaping(spec.functional);
  const std::size_t nl = std::max({spec.functional.lags.size(), spec.scalar_lags.size(),
                                   spec.cross_loadings.size()});
  for (std::size_t l = 0; l < nl; ++l) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(sys.state_dim, sys.score_dim);
    if (l < spec.functional.lags.size())
      m.topLeftCorner(pg, pg) = spec.functional.lags[l].coef * shape.asDiagonal();
    if (l < spec.cross_loadings.size()) m.bottomLeftCorner(spec.d, pg) = spec.cross_loadings[l];
    if (l < spec.scalar_lags.size()) m.bottomRightCorner(spec.d, spec.d) = spec.scalar_lags[l];
    sys.coeff.push_back(std::move(m));
  }
  return sys;
}

Eigen::MatrixXd simulate_states(const LinearSystem& sys, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("simulate_states: n must be >= 1");
  const int lag = sys.max_lag();
  Rng rng(seed);

  // scores for t = 1-lag .. n, drawn in one fixed order
  Eigen::MatrixXd scores(n + lag, sys.score_dim);
  for (int t = 0; t < n + lag; ++t) {
    int k = 0;
    for (const auto& [law, count] : sys.score_groups) {
      for (int i = 0; i < count; ++i, ++k) {
        switch (law) {
          case ScoreLaw::gaussian: scores(t, k) = rng.normal(); break;
          case ScoreLaw::scaled_uniform: scores(t, k) = rng.scaled_uniform(); break;
          case ScoreLaw::scaled_rademacher: scores(t, k) = rng.rademacher(); break;
        }
      }
    }
  }

  Eigen::MatrixXd states = Eigen::MatrixXd::Zero(n, sys.state_dim);
  for (int l = 0; l <= lag; ++l) {
    // state row t uses score row (t + lag - l)
    states.noalias() += scores.middleRows(lag - l, n) * sys.coeff[l].transpose();
  }
  return states;
}

FunctionalPanel simulate_fma(const MAProcessSpec& spec, int n, std::uint64_t seed) {
  const LinearSystem sys = compile(spec);
  FunctionalPanel panel;
  panel.basis = spec.basis;
  panel.n = n;
  panel.p = spec.p;
  panel.x = simulate_states(sys, n, seed);
  return panel;
}

FunctionalPanel simulate_mixed(const MixedProcessSpec& spec, int n, std::uint64_t seed) {
  const LinearSystem sys = compile(spec);
  const Eigen::MatrixXd states = simulate_states(sys, n, seed);
  FunctionalPanel panel;
  panel.basis = spec.functional.basis;
  panel.n = n;
  panel.p = spec.functional.p;
  panel.x = states.leftCols(sys.func_dim);
  panel.z = states.rightCols(sys.scalar_dim);
  return panel;
}

BasisSpec scalar_basis() {
  BasisSpec b;
  b.size = 1;
  return b;
}

BlockKernel population_autocov(const MAProcessSpec& spec, int h) {
  const LinearSystem sys = compile(spec);
  BlockKernel out = BlockKernel::zero(spec.basis, spec.basis, spec.p, spec.p);
  out.coef = sys.cross_cov(h).topLeftCorner(sys.func_dim, sys.func_dim);
  return out;
}

BlockKernel population_cross_cov_xz(const MixedProcessSpec& spec, int h) {
  const LinearSystem sys = compile(spec);
  BlockKernel out = BlockKernel::zero(spec.functional.basis, scalar_basis(), spec.functional.p,
                                      spec.d);
  out.coef = sys.cross_cov(h).topRightCorner(sys.func_dim, sys.scalar_dim);
  return out;
}

Eigen::MatrixXd population_autocov_z(const MixedProcessSpec& spec, int h) {
  const LinearSystem sys = compile(spec);
  return sys.cross_cov(h).bottomRightCorner(sys.scalar_dim, sys.scalar_dim);
}

double population_re_infimum(const MAProcessSpec& spec, int L) {
  if (L < 0) throw std::invalid_argument("population_re_infimum: L must be >= 0");
  const LinearSystem sys = compile(spec);
  const int g = spec.basis.size;
  const int pg = sys.func_dim;
  const int dim = (L + 1) * pg;

  Eigen::MatrixXd stacked(dim, dim);
  for (int a = 0; a <= L; ++a)
    for (int b = 0; b <= L; ++b)
      stacked.block(a * pg, b * pg, pg, pg) =
          sys.cross_cov(b - a).topLeftCorner(pg, pg);

  const Eigen::MatrixXd c0 = sys.cross_cov(0);
  std::vector<Eigen::MatrixXd> w(spec.p);
  int rank = 0;
  for (int j = 0; j < spec.p; ++j) {
    w[j] = truncated_inv_sqrt(c0.block(j * g, j * g, g, g), 1e-12);
    rank += static_cast<int>(w[j].cols());
  }
  Eigen::MatrixXd whiten = Eigen::MatrixXd::Zero(dim, (L + 1) * rank);
  int col = 0;
  for (int a = 0; a <= L; ++a) {
    for (int j = 0; j < spec.p; ++j) {
      whiten.block(a * pg + j * g, col, g, w[j].cols()) = w[j];
      col += static_cast<int>(w[j].cols());
    }
  }
  const Eigen::MatrixXd m = whiten.transpose() * stacked * whiten;
  return sym_eig_desc(m).values.minCoeff();
}

double population_re_infimum_mixed(const MixedProcessSpec& spec) {
  const LinearSystem sys = compile(spec);
  const int g = spec.functional.basis.size;
  const Eigen::MatrixXd c0 = sys.cross_cov(0);

  std::vector<Eigen::MatrixXd> w(spec.functional.p);
  int rank = 0;
  for (int j = 0; j < spec.functional.p; ++j) {
    w[j] = truncated_inv_sqrt(c0.block(j * g, j * g, g, g), 1e-12);
    rank += static_cast<int>(w[j].cols());
  }
  Eigen::MatrixXd whiten = Eigen::MatrixXd::Zero(sys.state_dim, rank + spec.d);
  int col = 0;
  for (int j = 0; j < spec.functional.p; ++j) {
    whiten.block(j * g, col, g, w[j].cols()) = w[j];
    col += static_cast<int>(w[j].cols());
  }
  whiten.bottomRightCorner(spec.d, spec.d).setIdentity();
  const Eigen::MatrixXd m = whiten.transpose() * c0 * whiten;
  return sym_eig_desc(m).values.minCoeff();
}

PopulationEigen population_eigen(const MAProcessSpec& spec) {
  const BlockKernel c0 = population_autocov(spec, 0);
  const int g = spec.basis.size;
  PopulationEigen out;
  out.omega.resize(spec.p, g);
  out.psi.reserve(spec.p);
  for (int j = 0; j < spec.p; ++j) {
    const SymEig eig = sym_eig_desc(c0.block(j, j));
    out.omega.row(j) = eig.values.transpose();
    out.psi.push_back(eig.vectors);
  }
  return out;
}

// --- regression scenarios -------------------------------------------------

void FllrScenario::validate() const {
  covariate.validate();
  response_basis.validate();
  if (L < 0) throw std::invalid_argument("FllrScenario: L must be >= 0");
  for (const auto& [h, j] : support)
    if (h < 0 || h > L || j < 0 || j >= covariate.p)
      throw std::invalid_argument("FllrScenario: support index out of range");
  if (!(kappa > 0.0)) throw std::invalid_argument("FllrScenario: kappa must be positive");
  noise.validate(response_basis.size);
}

BlockKernel FllrScenario::true_beta() const {
  validate();
  const int p = covariate.p;
  const int g1 = covariate.basis.size;
  const int g2 = response_basis.size;
  const PopulationEigen pe = population_eigen(covariate);

  BlockKernel beta = BlockKernel::zero(covariate.basis, response_basis, (L + 1) * p, 1);
  Eigen::MatrixXd a(g1, g2);
  for (const auto& [h, j] : support) {
    for (int l = 0; l < g1; ++l)
      for (int m = 0; m < g2; ++m)
        a(l, m) = mu * std::pow(static_cast<double>(l + m + 2), -kappa - 0.5);
    beta.block(h * p + j, 0) = pe.psi[j] * a;  // response side uses the raw basis
  }
  return beta;
}

FunctionalPanel gen_fllr_data(const FllrScenario& scn, int n, std::uint64_t seed) {
  if (n <= scn.L) throw std::invalid_argument("gen_fllr_data: n must exceed L");
  FunctionalPanel panel = simulate_fma(scn.covariate, n, seed);

  MAProcessSpec noise_proc;
  noise_proc.basis = scn.response_basis;
  noise_proc.p = 1;
  BlockKernel id = BlockKernel::zero(scn.response_basis, scn.response_basis, 1, 1);
  id.coef = Eigen::MatrixXd::Identity(scn.response_basis.size, scn.response_basis.size);
  noise_proc.lags = {id};
  noise_proc.error = scn.noise;
  const Eigen::MatrixXd eps =
      scn.noise_scale * simulate_fma(noise_proc, n, derive_seed(seed, 0x45505331ULL)).x;

  const BlockKernel beta = scn.true_beta();
  const int p = scn.covariate.p;
  const int g1 = scn.covariate.basis.size;

  // rows before t = L carry only noise; the model is defined from t = L+1 on
  panel.response_basis = scn.response_basis;
  panel.yf = eps;
  for (int t = scn.L; t < n; ++t) {
    for (int h = 0; h <= scn.L; ++h) {
      for (int j = 0; j < p; ++j) {
        const auto b = beta.block(h * p + j, 0);
        const auto xc = panel.x.row(t - h).segment(static_cast<Eigen::Index>(j) * g1, g1);
        panel.yf.row(t).noalias() += xc * b;
      }
    }
  }
  return panel;
}

void PflrScenario::validate() const {
  covariate.validate();
  for (int j : func_support)
    if (j < 0 || j >= covariate.functional.p)
      throw std::invalid_argument("PflrScenario: functional support out of range");
  for (const auto& [k, v] : gamma) {
    (void)v;
    if (k < 0 || k >= covariate.d)
      throw std::invalid_argument("PflrScenario: scalar support out of range");
  }
  if (!(kappa > 0.0)) throw std::invalid_argument("PflrScenario: kappa must be positive");
}

BlockKernel PflrScenario::true_beta() const {
  validate();
  const MAProcessSpec& fx = covariate.functional;
  const int g = fx.basis.size;
  const PopulationEigen pe = population_eigen(fx);
  BlockKernel beta = BlockKernel::zero(fx.basis, scalar_basis(), fx.p, 1);
  for (int j : func_support) {
    Eigen::VectorXd a(g);
    for (int l = 0; l < g; ++l) a[l] = mu * std::pow(static_cast<double>(l + 1), -kappa);
    beta.block(j, 0) = pe.psi[j] * a;
  }
  return beta;
}

Eigen::VectorXd PflrScenario::gamma_dense() const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(covariate.d);
  for (const auto& [k, v] : gamma) g[k] = v;
  return g;
}

FunctionalPanel gen_pflr_data(const PflrScenario& scn, int n, std::uint64_t seed) {
  FunctionalPanel panel = simulate_mixed(scn.covariate, n, seed);
  const BlockKernel beta = scn.true_beta();
  const Eigen::VectorXd gam = scn.gamma_dense();
  const int g = scn.covariate.functional.basis.size;

  Rng rng(derive_seed(seed, 0x45505332ULL));
  panel.y.resize(n);
  for (int t = 0; t < n; ++t) {
    double v = 0.0;
    for (int j = 0; j < panel.p; ++j)
      v += panel.x.row(t).segment(static_cast<Eigen::Index>(j) * g, g).dot(beta.block(j, 0).col(0));
    if (panel.z.cols() > 0) v += panel.z.row(t).dot(gam);
    double e = 0.0;
    switch (scn.noise_law) {
      case ScoreLaw::gaussian: e = rng.normal(); break;
      case ScoreLaw::scaled_uniform: e = rng.scaled_uniform(); break;
      case ScoreLaw::scaled_rademacher: e = rng.rademacher(); break;
    }
    panel.y[t] = v + scn.noise_scale * e;
  }
  return panel;
}

}  // namespace hdfts
