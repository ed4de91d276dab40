#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hdfts/mc.hpp"
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

JointProcessSpec small_joint(int px, int dy, int g, double couple) {
  JointProcessSpec joint;
  joint.px = px;
  joint.dy = dy;
  joint.joint.basis = small_basis(g);
  joint.joint.p = px + dy;
  joint.joint.error.omega = ErrorSpec::power_decay(g, 1.0, 1.5);
  const int p = px + dy;
  BlockKernel a0 = identity_kernel(joint.joint.basis, p);
  // couple Y onto X's error sources so the cross-covariance is nonzero
  for (int k = 0; k < dy; ++k)
    a0.block(px + k, k % px) = couple * Eigen::MatrixXd::Identity(g, g);
  BlockKernel a1 = BlockKernel::zero(joint.joint.basis, joint.joint.basis, p, p);
  for (int j = 0; j < p; ++j) a1.block(j, j) = 0.4 * Eigen::MatrixXd::Identity(g, g);
  joint.joint.lags = {a0, a1};
  return joint;
}

StudyConfig base_cov_config() {
  StudyConfig cfg;
  cfg.kind = StudyKind::cov_deviation;
  cfg.joint = small_joint(2, 2, 2, 0.7);
  cfg.n_grid = {100, 400};
  cfg.h_grid = {0, 1};
  cfg.replicates = 6;
  cfg.base_seed = 31;
  return cfg;
}

}  // namespace

TEST_CASE("median of odd and even samples") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
}

TEST_CASE("study results are identical across thread counts") {
  const StudyConfig cfg = base_cov_config();
  const StudyResult a = run_study(cfg, 1);
  const StudyResult b = run_study(cfg, 4);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].statistic == b.records[i].statistic);
    CHECK(a.records[i].n == b.records[i].n);
    CHECK(a.records[i].replicate == b.records[i].replicate);
    CHECK(a.records[i].value == b.records[i].value);  // bitwise
    CHECK(a.records[i].seconds == 0.0);
  }
}

TEST_CASE("cov deviation records are complete, finite and nonnegative") {
  const StudyConfig cfg = base_cov_config();
  const StudyResult res = run_study(cfg, 2);
  // 2 n-values x 2 h-values x 6 replicates, one statistic per task
  CHECK(res.records.size() == 24);
  for (const auto& rec : res.records) {
    CHECK(std::isfinite(rec.value));
    CHECK(rec.value >= 0.0);
    CHECK(rec.study == "cov_deviation");
    CHECK(rec.p == 2);
  }
  CHECK(res.slopes.size() == 2);  // one summary per h tag
  for (const auto& s : res.slopes) {
    CHECK(s.medians.size() == 2);
    CHECK(s.medians[0].second > s.medians[1].second);  // error shrinks with n
  }
}

TEST_CASE("slope summary equals a brute-force log-log regression") {
  const std::vector<int> ns = {100, 200, 400, 800};
  std::vector<std::pair<int, double>> medians;
  std::vector<std::vector<double>> samples;
  Rng rng(11);
  for (int n : ns) {
    std::vector<double> vals;
    for (int r = 0; r < 9; ++r) vals.push_back((1.0 + 0.1 * rng.uniform()) / std::sqrt(n));
    samples.push_back(vals);
    medians.emplace_back(n, median(vals));
  }
  const SlopeSummary s = slope_summary("stat", medians, samples, ns, 5);

  // brute force: fit log(median) = a + b log(n)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const double x = std::log(static_cast<double>(ns[i]));
    const double y = std::log(medians[i].second);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double k = static_cast<double>(ns.size());
  const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  CHECK(std::abs(s.slope - slope) < 1e-10);
  CHECK(s.ci_lo <= s.slope + 1e-12);
  CHECK(s.ci_hi >= s.slope - 1e-12);
  CHECK(std::abs(slope + 0.5) < 0.05);  // the synthetic decay is 1/sqrt(n)
}

TEST_CASE("white-noise cov study has zero truth at h = 1") {
  StudyConfig cfg;
  cfg.kind = StudyKind::cov_deviation;
  JointProcessSpec joint;
  joint.px = 1;
  joint.dy = 1;
  joint.joint = white_noise(2, 2);
  cfg.joint = joint;
  cfg.n_grid = {200};
  cfg.h_grid = {1};
  cfg.replicates = 4;
  cfg.base_seed = 7;
  const StudyResult res = run_study(cfg, 1);
  for (const auto& rec : res.records) {
    CHECK(rec.value >= 0.0);
    CHECK(rec.value < 0.5);  // pure sampling noise at n = 200
  }
}

TEST_CASE("score deviation study produces all four statistics") {
  StudyConfig cfg;
  cfg.kind = StudyKind::score_deviation;
  cfg.joint = small_joint(2, 1, 3, 0.8);
  MixedProcessSpec mixed;
  mixed.functional = white_noise(2, 3);
  mixed.d = 2;
  mixed.scalar_lags = {Eigen::MatrixXd::Identity(2, 2)};
  Eigen::MatrixXd load = Eigen::MatrixXd::Zero(2, 6);
  load(0, 0) = 0.5;
  mixed.cross_loadings = {load};
  cfg.mixed = mixed;
  cfg.eps_func = white_noise(1, 3);
  cfg.n_grid = {150};
  cfg.h_grid = {0};
  cfg.replicates = 3;
  cfg.q1 = 2;
  cfg.q2 = 2;
  const StudyResult res = run_study(cfg, 2);
  std::set<std::string> stats;
  for (const auto& rec : res.records) {
    stats.insert(rec.statistic);
    CHECK(std::isfinite(rec.value));
    CHECK(rec.value >= 0.0);
  }
  CHECK(stats == std::set<std::string>{"score_dev_xy_h0", "score_dev_xz_h0",
                                       "score_dev_xeps_func_h0", "score_dev_xeps_scalar_h0"});
}

TEST_CASE("re study: white noise design concentrates at the population infimum") {
  StudyConfig cfg;
  cfg.kind = StudyKind::re_check;
  cfg.fma = white_noise(3, 3);
  cfg.n_grid = {600};
  cfg.replicates = 3;
  cfg.re_lags = 0;
  cfg.re_trials = 200;
  cfg.re_sparsity = 2;
  const StudyResult res = run_study(cfg, 2);
  CHECK(res.info.at("population_re_infimum") == doctest::Approx(1.0).epsilon(1e-10));
  for (const auto& rec : res.records) {
    if (rec.statistic == "re_min_eig") CHECK(std::abs(rec.value - 1.0) < 0.35);
    if (rec.statistic == "re_violation_frac") CHECK(rec.value <= 0.05);
  }
}

TEST_CASE("rate study smoke: errors finite and support found") {
  StudyConfig cfg;
  cfg.kind = StudyKind::rate_fllr;
  FllrScenario scn;
  scn.covariate = white_noise(4, 3);
  scn.L = 0;
  scn.response_basis = small_basis(3);
  scn.support = {{0, 1}};
  scn.kappa = 2.0;
  scn.mu = 2.0;
  scn.noise.omega = ErrorSpec::power_decay(3, 1.0, 2.0);
  scn.noise_scale = 0.3;
  cfg.fllr = scn;
  cfg.n_grid = {150, 300};
  cfg.replicates = 3;
  cfg.lambda_count = 8;
  cfg.trunc_q = 3;
  const StudyResult res = run_study(cfg, 2);
  double f1_at_300 = 0.0;
  for (const auto& rec : res.records) {
    CHECK(std::isfinite(rec.value));
    if (rec.statistic == "fllr_f1_best" && rec.n == 300)
      f1_at_300 = std::max(f1_at_300, rec.value);
  }
  CHECK(f1_at_300 == 1.0);
}

TEST_CASE("identical config reruns give identical records") {
  const StudyConfig cfg = base_cov_config();
  const StudyResult a = run_study(cfg, 3);
  const StudyResult b = run_study(cfg, 3);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i)
    CHECK(a.records[i].value == b.records[i].value);
}

TEST_CASE("config validation rejects incomplete studies") {
  StudyConfig cfg;
  cfg.kind = StudyKind::rate_fllr;
  cfg.n_grid = {100};
  CHECK_THROWS_AS(run_study(cfg, 1), std::invalid_argument);
  cfg.n_grid = {};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
