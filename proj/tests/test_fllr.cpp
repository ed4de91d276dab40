#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hdfts/fllr.hpp"
#include "hdfts/linalg.hpp"
#include "hdfts/procgen.hpp"
#include "hdfts/rng.hpp"

using namespace hdfts;

namespace {

BasisSpec small_basis(int g) {
  BasisSpec b;
  b.size = g;
  return b;
}

BlockKernel identity_kernel(const BasisSpec& basis, int p, double scale = 1.0) {
  BlockKernel k = BlockKernel::zero(basis, basis, p, p);
  k.coef = scale * Eigen::MatrixXd::Identity(k.coef.rows(), k.coef.cols());
  return k;
}

MAProcessSpec white_noise(int p, int g) {
  MAProcessSpec spec;
  spec.basis = small_basis(g);
  spec.p = p;
  spec.lags = {identity_kernel(spec.basis, p)};
  spec.error.omega = ErrorSpec::power_decay(g, 1.0, 1.5);
  return spec;
}

FllrScenario toy_scenario(int p, int g, int lag, std::vector<std::pair<int, int>> support,
                          double noise = 0.5) {
  FllrScenario scn;
  scn.covariate = white_noise(p, g);
  scn.L = lag;
  scn.response_basis = small_basis(g);
  scn.support = std::move(support);
  scn.kappa = 2.0;
  scn.mu = 2.0;
  scn.noise.omega = ErrorSpec::power_decay(g, 1.0, 2.0);
  scn.noise_scale = noise;
  return scn;
}

// independent reference: proximal gradient on the same objective
double ista_objective(const FllrDesign& d, double lambda) {
  const int nb = d.blocks();
  const int m = d.n_eff;
  std::vector<Eigen::MatrixXd> b(nb);
  for (int k = 0; k < nb; ++k) b[k] = Eigen::MatrixXd::Zero(d.block_q(k), d.q2);

  // Lipschitz constant of the smooth part over the stacked design
  Eigen::VectorXi off(nb + 1);
  off[0] = 0;
  for (int k = 0; k < nb; ++k) off[k + 1] = off[k] + d.block_q(k);
  Eigen::MatrixXd full(m, off[nb]);
  for (int k = 0; k < nb; ++k) full.middleCols(off[k], d.block_q(k)) = d.omega[k];
  const double lip = sym_eig_desc(full.transpose() * full / m).values[0];
  const double step = 1.0 / lip;

  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 100000; ++it) {
    Eigen::MatrixXd resid = d.u;
    for (int k = 0; k < nb; ++k) resid.noalias() -= d.omega[k] * b[k];
    for (int k = 0; k < nb; ++k) {
      const Eigen::MatrixXd g = b[k] + step * (d.omega[k].transpose() * resid / m);
      const double gn = g.norm();
      b[k] = gn > step * lambda ? ((1.0 - step * lambda / gn) * g).eval()
                                : Eigen::MatrixXd::Zero(g.rows(), g.cols()).eval();
    }
    resid = d.u;
    double pen = 0.0;
    for (int k = 0; k < nb; ++k) {
      resid.noalias() -= d.omega[k] * b[k];
      pen += b[k].norm();
    }
    const double obj = 0.5 * resid.squaredNorm() / m + lambda * pen;
    if (prev - obj < 1e-14 && it > 10) return obj;
    prev = obj;
  }
  return prev;
}

}  // namespace

TEST_CASE("design row counts and standardizer identity") {
  const FllrScenario scn = toy_scenario(2, 3, 2, {{0, 0}});
  const FunctionalPanel panel = gen_fllr_data(scn, 10, 5);
  const FllrDesign d = build_design(panel, 2, TruncationRule::fixed(2),
                                    TruncationRule::fixed(2));
  CHECK(d.n_eff == 8);
  CHECK(d.u.rows() == 8);
  CHECK(d.blocks() == 6);
  for (int k = 0; k < d.blocks(); ++k) {
    // D^2 equals the block Gram of the raw lagged scores
    const int h = k / d.p, j = k % d.p;
    const Eigen::MatrixXd v = d.es_x.scores[j].middleRows(2 - h, 8).leftCols(2);
    const Eigen::MatrixXd gram = v.transpose() * v / 8;
    CHECK((d.d_sqrt[k] * d.d_sqrt[k] - gram).cwiseAbs().maxCoeff() < 1e-10);
    // standardized block design is orthonormal
    const Eigen::MatrixXd g2 = d.omega[k].transpose() * d.omega[k] / 8;
    CHECK((g2 - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("scalar reduction: L = 0, p = 1, q = 1") {
  const FllrScenario scn = toy_scenario(1, 3, 0, {{0, 0}});
  const FunctionalPanel panel = gen_fllr_data(scn, 25, 7);
  const FllrDesign d = build_design(panel, 0, TruncationRule::fixed(1),
                                    TruncationRule::fixed(1));
  // the single design column is the first score sequence scaled to unit
  // sample second moment
  const Eigen::VectorXd zeta = d.es_x.scores[0].col(0);
  const double scale = std::sqrt(zeta.squaredNorm() / 25);
  CHECK((d.omega[0].col(0) - zeta / scale).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("build_design failure modes") {
  const FllrScenario scn = toy_scenario(1, 2, 1, {{0, 0}});
  const FunctionalPanel panel = gen_fllr_data(scn, 5, 9);
  CHECK_THROWS_AS(
      build_design(panel, 5, TruncationRule::fixed(1), TruncationRule::fixed(1)),
      std::invalid_argument);
  FunctionalPanel zero = panel;
  zero.x.setZero();
  CHECK_THROWS_AS(
      build_design(zero, 1, TruncationRule::fixed(1), TruncationRule::fixed(1)),
      std::runtime_error);
}

TEST_CASE("lambda_max: zero response and bracketing") {
  const FllrScenario scn = toy_scenario(3, 3, 1, {{0, 0}, {1, 2}});
  FunctionalPanel panel = gen_fllr_data(scn, 40, 11);
  const FllrDesign d = build_design(panel, 1, TruncationRule::fixed(2),
                                    TruncationRule::fixed(2));
  const double lmax = lambda_max(d);
  CHECK(lmax > 0.0);

  const FllrFit at_zero = solve_group_lasso(d, 1.01 * lmax);
  for (const auto& b : at_zero.b) CHECK(b.norm() == 0.0);
  CHECK(at_zero.support.empty());

  const FllrFit below = solve_group_lasso(d, 0.99 * lmax);
  double total = 0.0;
  for (const auto& b : below.b) total += b.norm();
  CHECK(total > 0.0);

  FunctionalPanel flat = panel;
  flat.yf.setZero();
  const FllrDesign dz = build_design(flat, 1, TruncationRule::fixed(2),
                                     TruncationRule::fixed(2));
  CHECK(lambda_max(dz) == 0.0);
}

TEST_CASE("unpenalized single block solves least squares in one step") {
  const FllrScenario scn = toy_scenario(1, 3, 0, {{0, 0}});
  const FunctionalPanel panel = gen_fllr_data(scn, 30, 13);
  const FllrDesign d = build_design(panel, 0, TruncationRule::fixed(3),
                                    TruncationRule::fixed(2));
  const FllrFit fit = solve_group_lasso(d, 0.0);
  CHECK(fit.converged);
  // normal equations on the standardized design
  const Eigen::MatrixXd expect = d.omega[0].transpose() * d.u / d.n_eff;
  CHECK((fit.b[0] - expect).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("objective trace is nonincreasing and KKT certified") {
  const FllrScenario scn = toy_scenario(4, 3, 1, {{0, 1}, {1, 3}});
  const FunctionalPanel panel = gen_fllr_data(scn, 60, 17);
  const FllrDesign d = build_design(panel, 1, TruncationRule::fixed(2),
                                    TruncationRule::fixed(2));
  const double lmax = lambda_max(d);
  for (double frac : {0.7, 0.3, 0.1, 0.02}) {
    const FllrFit fit = solve_group_lasso(d, frac * lmax);
    CHECK(fit.converged);
    CHECK(fit.kkt_residual <= 1e-8);
    for (std::size_t i = 1; i < fit.objective_trace.size(); ++i)
      CHECK(fit.objective_trace[i] <= fit.objective_trace[i - 1] + 1e-12);
  }
}

TEST_CASE("solver objective matches a proximal-gradient reference") {
  for (std::uint64_t seed : {23ULL, 29ULL, 31ULL}) {
    const FllrScenario scn = toy_scenario(3, 2, 0, {{0, 0}, {0, 2}});
    const FunctionalPanel panel = gen_fllr_data(scn, 40, seed);
    const FllrDesign d = build_design(panel, 0, TruncationRule::fixed(2),
                                      TruncationRule::fixed(2));
    const double lambda = 0.25 * lambda_max(d);
    const FllrFit fit = solve_group_lasso(d, lambda);
    const double reference = ista_objective(d, lambda);
    CHECK(std::abs(fit.objective_trace.back() - reference) < 1e-8);
  }
}

TEST_CASE("scaling equivariance: (cU, c lambda) gives c B") {
  const FllrScenario scn = toy_scenario(2, 3, 1, {{0, 0}});
  const FunctionalPanel panel = gen_fllr_data(scn, 50, 37);
  FllrDesign d = build_design(panel, 1, TruncationRule::fixed(2), TruncationRule::fixed(2));
  const double lambda = 0.3 * lambda_max(d);
  const FllrFit base = solve_group_lasso(d, lambda);
  const double c = 2.5;
  FllrDesign scaled = d;
  scaled.u *= c;
  const FllrFit big = solve_group_lasso(scaled, c * lambda);
  for (int k = 0; k < d.blocks(); ++k)
    CHECK((big.b[k] - c * base.b[k]).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("fit path warm starts and support growth") {
  const FllrScenario scn = toy_scenario(6, 3, 1, {{0, 1}, {0, 4}, {1, 2}}, 0.3);
  const FunctionalPanel panel = gen_fllr_data(scn, 200, 41);
  const FllrDesign d = build_design(panel, 1, TruncationRule::fixed(2),
                                    TruncationRule::fixed(2));
  const double lmax = lambda_max(d);

  const auto single = fit_path(d, {lmax});
  CHECK(single.size() == 1);
  CHECK(single[0].support.empty());

  std::vector<double> grid;
  for (int i = 0; i < 20; ++i) grid.push_back(lmax * std::pow(0.01, i / 19.0));
  const auto fits = fit_path(d, grid);
  int growth_ok = 0;
  for (std::size_t i = 1; i < fits.size(); ++i)
    growth_ok += fits[i].support.size() + 1 > fits[i - 1].support.size() ? 1 : 0;
  CHECK(growth_ok >= static_cast<int>(0.9 * (fits.size() - 1)));

  CHECK_THROWS_AS(fit_path(d, {0.1, 0.2}), std::invalid_argument);
}

TEST_CASE("RE condition check on an exactly orthonormal design") {
  const FllrScenario scn = toy_scenario(1, 4, 0, {{0, 0}});
  const FunctionalPanel panel = gen_fllr_data(scn, 50, 43);
  const FllrDesign d = build_design(panel, 0, TruncationRule::fixed(4),
                                    TruncationRule::fixed(2));
  // single block: Gamma = I exactly by standardization
  const ReReport rep = check_re_condition(d, 200, 0.0, 1.0, 1, 7);
  CHECK(rep.min_eig == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(rep.violations == 0);
  CHECK(rep.min_margin >= -1e-10);
}

TEST_CASE("estimation error: exact, zero, and brute-force random") {
  const FllrScenario scn = toy_scenario(3, 3, 1, {{0, 0}, {1, 2}});
  const BlockKernel truth = scn.true_beta();
  const FunctionalPanel panel = gen_fllr_data(scn, 60, 47);
  const FllrDesign d = build_design(panel, 1, TruncationRule::fixed(3),
                                    TruncationRule::fixed(3));
  FllrFit fit = solve_group_lasso(d, 0.05 * lambda_max(d));

  // exact agreement
  FllrFit exact = fit;
  exact.beta = truth;
  const EstimationError e0 = estimation_error(exact, truth);
  CHECK(e0.l1_func == 0.0);
  CHECK(e0.precision == 1.0);
  CHECK(e0.recall == 1.0);

  // zero fit: error is the summed truth norm, recall zero
  FllrFit zero = fit;
  zero.beta = BlockKernel::zero(truth.row_basis, truth.col_basis, truth.rows, 1);
  const EstimationError ez = estimation_error(zero, truth);
  double total = 0.0;
  for (int k = 0; k < truth.rows; ++k) total += truth.block(k, 0).norm();
  CHECK(ez.l1_func == doctest::Approx(total).epsilon(1e-12));
  CHECK(ez.recall == 0.0);

  // random pair equals an explicit per-block reduction
  const EstimationError er = estimation_error(fit, truth);
  double expect = 0.0;
  for (int k = 0; k < truth.rows; ++k)
    expect += (fit.beta.block(k, 0) - truth.block(k, 0)).norm();
  CHECK(er.l1_func == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("noiseless oracle-support recovery is near exact") {
  FllrScenario scn = toy_scenario(4, 3, 0, {{0, 1}}, 0.0);
  const FunctionalPanel panel = gen_fllr_data(scn, 300, 53);
  const FllrDesign d = build_design(panel, 0, TruncationRule::fixed(3),
                                    TruncationRule::fixed(3));
  SolveOptions opts;
  opts.tol = 1e-12;
  const FllrFit fit = solve_group_lasso(d, 1e-10 * lambda_max(d), opts);
  const EstimationError err = estimation_error(fit, scn.true_beta());
  CHECK(err.l1_func < 0.05);
  CHECK(err.recall == 1.0);
}
