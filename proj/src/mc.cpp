#include "hdfts/mc.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>

#include "hdfts/fpca.hpp"
#include "hdfts/linalg.hpp"
#include "hdfts/rng.hpp"

namespace hdfts {

void StudyConfig::validate() const {
  if (n_grid.empty()) throw std::invalid_argument("StudyConfig: n grid is empty");
  if (replicates < 1) throw std::invalid_argument("StudyConfig: replicates must be >= 1");
  switch (kind) {
    case StudyKind::cov_deviation:
      if (!joint && !mixed)
        throw std::invalid_argument("StudyConfig: cov_deviation needs a joint or mixed spec");
      break;
    case StudyKind::score_deviation:
      if (!joint) throw std::invalid_argument("StudyConfig: score_deviation needs a joint spec");
      break;
    case StudyKind::re_check:
      if (!fma && !mixed)
        throw std::invalid_argument("StudyConfig: re_check needs an fma or mixed spec");
      break;
    case StudyKind::rate_fllr:
      if (!fllr) throw std::invalid_argument("StudyConfig: rate_fllr needs an fllr scenario");
      break;
    case StudyKind::rate_pflr:
      if (!pflr) throw std::invalid_argument("StudyConfig: rate_pflr needs a pflr scenario");
      break;
  }
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return (v.size() % 2 == 1) ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

namespace {

void parallel_for(int tasks, int threads, const std::function<void(int)>& body) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, tasks));
  if (threads == 1) {
    for (int i = 0; i < tasks; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < tasks; i = next.fetch_add(1)) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

struct OlsFit {
  double slope = 0.0;
};

OlsFit ols_loglog(const std::vector<int>& ns, const std::vector<double>& vals) {
  const int k = static_cast<int>(ns.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < k; ++i) {
    const double x = std::log(static_cast<double>(ns[i]));
    const double y = std::log(std::max(vals[i], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  OlsFit f;
  const double denom = k * sxx - sx * sx;
  f.slope = denom != 0.0 ? (k * sxy - sx * sy) / denom : 0.0;
  return f;
}

// split a joint panel into its X / Y variable halves
FunctionalPanel take_vars(const FunctionalPanel& panel, int from, int count) {
  FunctionalPanel out;
  out.basis = panel.basis;
  out.n = panel.n;
  out.p = count;
  out.x = panel.x.middleCols(static_cast<Eigen::Index>(from) * panel.basis.size,
                             static_cast<Eigen::Index>(count) * panel.basis.size);
  return out;
}

double max_block_hs_dev(const Eigen::MatrixXd& est, const Eigen::MatrixXd& truth, int gr,
                        int gc) {
  double best = 0.0;
  for (int i = 0; i * gr < est.rows(); ++i)
    for (int j = 0; j * gc < est.cols(); ++j)
      best = std::max(best,
                      (est.block(i * gr, j * gc, gr, gc) - truth.block(i * gr, j * gc, gr, gc))
                          .norm());
  return best;
}

struct TaskKey {
  int grid_index;
  int replicate;
};

// shared study loop: `per_task` returns named statistics for one replicate
void run_grid(const StudyConfig& cfg, int threads, bool measure_time,
              const std::function<std::vector<std::pair<std::string, double>>(
                  int n, int h, std::uint64_t seed)>& per_task,
              bool use_h_grid, const std::function<void(StudyRecord&)>& fill_dims,
              std::vector<StudyRecord>& records) {
  struct Cell {
    int n, h, replicate;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  const std::vector<int> hs = use_h_grid ? cfg.h_grid : std::vector<int>{0};
  int gi = 0;
  for (int n : cfg.n_grid) {
    for (int h : hs) {
      for (int r = 0; r < cfg.replicates; ++r)
        cells.push_back({n, h, r, derive_seed(cfg.base_seed, gi, r)});
      ++gi;
    }
  }
  std::vector<std::vector<StudyRecord>> out(cells.size());
  parallel_for(static_cast<int>(cells.size()), threads, [&](int i) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto stats = per_task(cells[i].n, cells[i].h, cells[i].seed);
    const double secs =
        measure_time
            ? std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()
            : 0.0;
    for (const auto& [name, value] : stats) {
      StudyRecord rec;
      rec.n = cells[i].n;
      rec.replicate = cells[i].replicate;
      rec.statistic = name;
      rec.value = value;
      rec.seconds = secs;
      fill_dims(rec);
      out[i].push_back(std::move(rec));
    }
  });
  for (auto& chunk : out)
    for (auto& rec : chunk) records.push_back(std::move(rec));
}

std::string h_tag(const std::string& base, int h) { return base + "_h" + std::to_string(h); }

}  // namespace

SlopeSummary slope_summary(const std::string& statistic,
                           const std::vector<std::pair<int, double>>& medians,
                           const std::vector<std::vector<double>>& samples_per_n,
                           const std::vector<int>& ns, std::uint64_t seed, int boot) {
  SlopeSummary s;
  s.statistic = statistic;
  s.medians = medians;
  std::vector<double> med_vals;
  for (const auto& [n, v] : medians) med_vals.push_back(v);
  s.slope = ols_loglog(ns, med_vals).slope;

  int decreasing = 0;
  for (std::size_t i = 1; i < medians.size(); ++i)
    if (medians[i].second < medians[i - 1].second) ++decreasing;
  s.monotone_decreasing_frac =
      medians.size() > 1 ? static_cast<double>(decreasing) / (medians.size() - 1) : 1.0;

  if (boot > 0 && !samples_per_n.empty()) {
    Rng rng(derive_seed(seed, 0x626f6f74ULL));
    std::vector<double> slopes;
    slopes.reserve(boot);
    for (int b = 0; b < boot; ++b) {
      std::vector<double> vals(ns.size());
      for (std::size_t i = 0; i < ns.size(); ++i) {
        const auto& pool = samples_per_n[i];
        std::vector<double> resampled(pool.size());
        for (std::size_t r = 0; r < pool.size(); ++r)
          resampled[r] = pool[rng.next_u64() % pool.size()];
        vals[i] = median(std::move(resampled));
      }
      slopes.push_back(ols_loglog(ns, vals).slope);
    }
    std::sort(slopes.begin(), slopes.end());
    const auto idx = [&](double q) {
      return std::min(slopes.size() - 1,
                      static_cast<std::size_t>(q * static_cast<double>(slopes.size())));
    };
    s.ci_lo = slopes[idx(0.025)];
    s.ci_hi = slopes[idx(0.975)];
  } else {
    s.ci_lo = s.ci_hi = s.slope;
  }
  return s;
}

namespace {

void summarize_by_statistic(const StudyConfig& cfg, StudyResult& result) {
  // collect per-(statistic, n) samples
  std::map<std::string, std::map<int, std::vector<double>>> table;
  for (const auto& rec : result.records) table[rec.statistic][rec.n].push_back(rec.value);
  for (const auto& [stat, by_n] : table) {
    std::vector<int> ns;
    std::vector<std::pair<int, double>> medians;
    std::vector<std::vector<double>> samples;
    for (const auto& [n, vals] : by_n) {
      ns.push_back(n);
      samples.push_back(vals);
      medians.emplace_back(n, median(vals));
    }
    result.slopes.push_back(slope_summary(stat, medians, samples, ns, cfg.base_seed));
  }
}

StudyResult run_cov_deviation(const StudyConfig& cfg, int threads, bool measure_time) {
  StudyResult result;
  const int g = cfg.joint ? cfg.joint->joint.basis.size : cfg.mixed->functional.basis.size;

  if (cfg.joint) {
    cfg.joint->validate();
    const LinearSystem sys = compile(cfg.joint->joint);
    const int px = cfg.joint->px, dy = cfg.joint->dy;
    run_grid(
        cfg, threads, measure_time,
        [&](int n, int h, std::uint64_t seed) {
          const FunctionalPanel panel = simulate_fma(cfg.joint->joint, n, seed);
          const int m = n - h;
          const Eigen::MatrixXd xs = panel.x.leftCols(px * g);
          const Eigen::MatrixXd ys = panel.x.rightCols(dy * g);
          const Eigen::MatrixXd est = xs.topRows(m).transpose() * ys.bottomRows(m) / m;
          const Eigen::MatrixXd truth =
              sys.cross_cov(h).topRightCorner(px * g, dy * g);
          return std::vector<std::pair<std::string, double>>{
              {h_tag("cov_dev_xy", h), max_block_hs_dev(est, truth, g, g)}};
        },
        true,
        [&](StudyRecord& rec) {
          rec.study = "cov_deviation";
          rec.p = px;
          rec.d = dy;
        },
        result.records);
  }

  if (cfg.mixed) {
    cfg.mixed->validate();
    const LinearSystem sys = compile(*cfg.mixed);
    const int p = cfg.mixed->functional.p, d = cfg.mixed->d;
    run_grid(
        cfg, threads, measure_time,
        [&](int n, int h, std::uint64_t seed) {
          const FunctionalPanel panel =
              simulate_mixed(*cfg.mixed, n, derive_seed(seed, 0x6d78ULL));
          const int m = n - h;
          const Eigen::MatrixXd est =
              panel.x.topRows(m).transpose() * panel.z.bottomRows(m) / m;
          const Eigen::MatrixXd truth = sys.cross_cov(h).topRightCorner(p * g, d);
          return std::vector<std::pair<std::string, double>>{
              {h_tag("cov_dev_xz", h), max_block_hs_dev(est, truth, g, 1)}};
        },
        true,
        [&](StudyRecord& rec) {
          rec.study = "cov_deviation";
          rec.p = p;
          rec.d = d;
        },
        result.records);
  }

  summarize_by_statistic(cfg, result);
  return result;
}

StudyResult run_score_deviation(const StudyConfig& cfg, int threads, bool measure_time) {
  StudyResult result;
  cfg.joint->validate();
  const JointProcessSpec& joint = *cfg.joint;
  const LinearSystem sys = compile(joint.joint);
  const int g = joint.joint.basis.size;
  const int px = joint.px, dy = joint.dy;
  const int q1 = std::min(cfg.q1, g), q2 = std::min(cfg.q2, g);

  // population eigenpairs of the X and Y margins of the joint system
  const Eigen::MatrixXd c0 = sys.cross_cov(0);
  std::vector<Eigen::MatrixXd> psi_x(px), psi_y(dy);
  Eigen::MatrixXd omega_x(px, g), omega_y(dy, g);
  for (int j = 0; j < px; ++j) {
    const SymEig e = sym_eig_desc(c0.block(j * g, j * g, g, g));
    psi_x[j] = e.vectors;
    omega_x.row(j) = e.values.transpose();
  }
  for (int k = 0; k < dy; ++k) {
    const int off = (px + k) * g;
    const SymEig e = sym_eig_desc(c0.block(off, off, g, g));
    psi_y[k] = e.vectors;
    omega_y.row(k) = e.values.transpose();
  }

  DeviationWeights w_xy{cfg.alpha1, cfg.alpha2, omega_x, omega_y};

  std::optional<LinearSystem> mixed_sys;
  Eigen::MatrixXd omega_x_mixed;
  std::vector<Eigen::MatrixXd> psi_x_mixed;
  if (cfg.mixed) {
    cfg.mixed->validate();
    mixed_sys = compile(*cfg.mixed);
    const int pm = cfg.mixed->functional.p;
    const Eigen::MatrixXd mc0 = mixed_sys->cross_cov(0);
    psi_x_mixed.resize(pm);
    omega_x_mixed.resize(pm, g);
    for (int j = 0; j < pm; ++j) {
      const SymEig e = sym_eig_desc(mc0.block(j * g, j * g, g, g));
      psi_x_mixed[j] = e.vectors;
      omega_x_mixed.row(j) = e.values.transpose();
    }
  }

  std::optional<PopulationEigen> eps_eigen;
  if (cfg.eps_func) eps_eigen = population_eigen(*cfg.eps_func);

  run_grid(
      cfg, threads, measure_time,
      [&](int n, int h, std::uint64_t seed) {
        std::vector<std::pair<std::string, double>> stats;

        const FunctionalPanel panel = simulate_fma(joint.joint, n, seed);
        const FunctionalPanel xp = take_vars(panel, 0, px);
        const FunctionalPanel yp = take_vars(panel, px, dy);
        const EigenSystem es_x = eigendecompose(xp);
        const EigenSystem es_y = eigendecompose(yp);

        const ScoreCrossCov est = score_cross_cov(es_x, es_y, h, q1, q2);
        BlockKernel ch = BlockKernel::zero(joint.joint.basis, joint.joint.basis, px, dy);
        ch.coef = sys.cross_cov(h).topRightCorner(px * g, dy * g);
        const ScoreCrossCov truth = population_score_cross_cov(psi_x, psi_y, ch, q1, q2);
        stats.emplace_back(h_tag("score_dev_xy", h),
                           normalized_max_deviation(est, &truth, DeviationKind::xy, w_xy));

        if (mixed_sys) {
          const FunctionalPanel mp =
              simulate_mixed(*cfg.mixed, n, derive_seed(seed, 0x7a31ULL));
          const EigenSystem es_mx = eigendecompose(take_vars(mp, 0, mp.p));
          const ScoreCrossCov est_z =
              score_cross_cov_scalar(es_mx, mp.z, h, q1);
          BlockKernel cxz = BlockKernel::zero(cfg.mixed->functional.basis, scalar_basis(),
                                              mp.p, cfg.mixed->d);
          cxz.coef = mixed_sys->cross_cov(h).topRightCorner(mp.p * g, cfg.mixed->d);
          std::vector<Eigen::MatrixXd> psi_z(cfg.mixed->d,
                                             Eigen::MatrixXd::Identity(1, 1));
          const ScoreCrossCov truth_z =
              population_score_cross_cov(psi_x_mixed, psi_z, cxz, q1, 1);
          DeviationWeights w_xz{cfg.alpha1, cfg.alpha2, omega_x_mixed, {}};
          stats.emplace_back(h_tag("score_dev_xz", h),
                             normalized_max_deviation(est_z, &truth_z, DeviationKind::xz, w_xz));
        }

        if (cfg.eps_func) {
          const FunctionalPanel ep =
              simulate_fma(*cfg.eps_func, n, derive_seed(seed, 0x7a32ULL));
          const EigenSystem es_e = eigendecompose(ep);
          const int qe = std::min(q2, cfg.eps_func->basis.size);
          const ScoreCrossCov est_e = score_cross_cov(es_x, es_e, h, q1, qe);
          Eigen::MatrixXd omega_e(1, cfg.eps_func->basis.size);
          omega_e.row(0) = eps_eigen->omega.row(0);
          DeviationWeights w_xe{cfg.alpha1, cfg.alpha2, omega_x, omega_e};
          stats.emplace_back(
              h_tag("score_dev_xeps_func", h),
              normalized_max_deviation(est_e, nullptr, DeviationKind::xeps_functional, w_xe));
        }

        {
          Rng erng(derive_seed(seed, 0x7a33ULL));
          Eigen::MatrixXd eps(n, 1);
          for (int t = 0; t < n; ++t) eps(t, 0) = erng.normal();
          const ScoreCrossCov est_s = score_cross_cov_scalar(es_x, eps, h, q1);
          DeviationWeights w_xs{cfg.alpha1, cfg.alpha2, omega_x, {}};
          stats.emplace_back(
              h_tag("score_dev_xeps_scalar", h),
              normalized_max_deviation(est_s, nullptr, DeviationKind::xeps_scalar, w_xs));
        }
        return stats;
      },
      true,
      [&](StudyRecord& rec) {
        rec.study = "score_deviation";
        rec.p = px;
        rec.d = dy;
        rec.q = q1;
      },
      result.records);

  summarize_by_statistic(cfg, result);
  return result;
}

FunctionalPanel with_zero_functional_response(FunctionalPanel panel) {
  panel.response_basis = scalar_basis();
  panel.yf = Eigen::MatrixXd::Zero(panel.n, 1);
  return panel;
}

StudyResult run_re_check(const StudyConfig& cfg, int threads, bool measure_time) {
  StudyResult result;
  const MeasureOptions mopts;

  if (cfg.fma) {
    cfg.fma->validate();
    const MAProcessSpec& spec = *cfg.fma;
    const int g = spec.basis.size;
    const int q = cfg.re_q > 0 ? std::min(cfg.re_q, g) : g;
    const int L = cfg.re_lags;
    const double mu_low = population_re_infimum(spec, L);
    const double m1x = sparse_stability(spec, 1, mopts);
    result.info["population_re_infimum"] = mu_low;
    result.info["m1_x"] = m1x;

    run_grid(
        cfg, threads, measure_time,
        [&](int n, int, std::uint64_t seed) {
          const FunctionalPanel panel =
              with_zero_functional_response(simulate_fma(spec, n, seed));
          const FllrDesign design =
              build_design(panel, L, TruncationRule::fixed(q), TruncationRule::fixed(1));
          const double tau1 = m1x * std::pow(static_cast<double>(q), cfg.alpha1 + 1.0) *
                              std::sqrt(std::log(std::max(2.0, 1.0 * spec.p * q)) / n);
          const ReReport rep =
              check_re_condition(design, cfg.re_trials, tau1, mu_low, cfg.re_sparsity,
                                 derive_seed(seed, 0x72651ULL));
          return std::vector<std::pair<std::string, double>>{
              {"re_min_eig", rep.min_eig},
              {"re_violation_frac",
               rep.trials > 0 ? static_cast<double>(rep.violations) / rep.trials : 0.0}};
        },
        false,
        [&](StudyRecord& rec) {
          rec.study = "re_check";
          rec.p = spec.p;
          rec.q = q;
          rec.s = cfg.re_sparsity;
        },
        result.records);
  }

  if (cfg.mixed) {
    cfg.mixed->validate();
    const MixedProcessSpec& spec = *cfg.mixed;
    const int g = spec.functional.basis.size;
    const int q = cfg.re_q > 0 ? std::min(cfg.re_q, g) : g;
    const double mu_low = population_re_infimum_mixed(spec);
    // M_{X,Z} = M_1^X + M_1^Z + M_{1,1}^{X,Z}
    double m_xz = sparse_stability(spec.functional, 1, mopts);
    if (spec.d > 0)
      m_xz += sparse_scalar_stability(spec, 1, mopts) +
              sparse_cross_stability_xz(spec, 1, 1, mopts);
    result.info["population_re_infimum_mixed"] = mu_low;
    result.info["m_xz"] = m_xz;

    run_grid(
        cfg, threads, measure_time,
        [&](int n, int, std::uint64_t seed) {
          FunctionalPanel panel = simulate_mixed(spec, n, seed);
          panel.y = Eigen::VectorXd::Zero(n);
          const PflrDesign design = build_design_pflr(panel, TruncationRule::fixed(q));
          const double tau1 =
              m_xz * std::pow(static_cast<double>(q), cfg.alpha1 + 1.0) *
              std::sqrt(std::log(std::max(2.0, 1.0 * spec.functional.p * q + spec.d)) / n);
          const ReReport rep = check_re_mixed(design, cfg.re_trials, tau1, mu_low,
                                              cfg.re_sparsity, derive_seed(seed, 0x72652ULL));
          return std::vector<std::pair<std::string, double>>{
              {"re_mixed_min_eig", rep.min_eig},
              {"re_mixed_violation_frac",
               rep.trials > 0 ? static_cast<double>(rep.violations) / rep.trials : 0.0}};
        },
        false,
        [&](StudyRecord& rec) {
          rec.study = "re_check";
          rec.p = spec.functional.p;
          rec.d = spec.d;
          rec.q = q;
          rec.s = cfg.re_sparsity;
        },
        result.records);
  }

  summarize_by_statistic(cfg, result);
  return result;
}

std::vector<double> lambda_grid(double lmax, int count, double min_ratio) {
  std::vector<double> grid;
  if (count < 1) count = 1;
  if (count == 1) return {lmax};
  for (int i = 0; i < count; ++i)
    grid.push_back(lmax * std::pow(min_ratio, static_cast<double>(i) / (count - 1)));
  return grid;
}

StudyResult run_rate_fllr(const StudyConfig& cfg, int threads, bool measure_time) {
  StudyResult result;
  const FllrScenario& scn = *cfg.fllr;
  scn.validate();
  const BlockKernel truth = scn.true_beta();
  const int s = static_cast<int>(scn.support.size());

  run_grid(
      cfg, threads, measure_time,
      [&](int n, int, std::uint64_t seed) {
        const FunctionalPanel panel = gen_fllr_data(scn, n, seed);
        const FllrDesign design = build_design(panel, scn.L, TruncationRule::fixed(cfg.trunc_q),
                                               TruncationRule::fixed(cfg.trunc_q));
        const auto grid = lambda_grid(lambda_max(design), cfg.lambda_count,
                                      cfg.lambda_min_ratio);
        const auto fits = fit_path(design, grid);
        double best_l1 = std::numeric_limits<double>::infinity();
        double best_f1 = 0.0;
        for (const auto& fit : fits) {
          const EstimationError err = estimation_error(fit, truth);
          best_l1 = std::min(best_l1, err.l1_func);
          best_f1 = std::max(best_f1, err.f1);
        }
        return std::vector<std::pair<std::string, double>>{{"fllr_l1_best", best_l1},
                                                           {"fllr_f1_best", best_f1}};
      },
      false,
      [&](StudyRecord& rec) {
        rec.study = "rate_fllr";
        rec.p = scn.covariate.p;
        rec.s = s;
        rec.q = cfg.trunc_q;
      },
      result.records);

  summarize_by_statistic(cfg, result);
  return result;
}

StudyResult run_rate_pflr(const StudyConfig& cfg, int threads, bool measure_time) {
  StudyResult result;
  const PflrScenario& scn = *cfg.pflr;
  scn.validate();
  const BlockKernel beta_truth = scn.true_beta();
  const Eigen::VectorXd gamma_truth = scn.gamma_dense();

  run_grid(
      cfg, threads, measure_time,
      [&](int n, int, std::uint64_t seed) {
        const FunctionalPanel panel = gen_pflr_data(scn, n, seed);
        const PflrDesign design = build_design_pflr(panel, TruncationRule::fixed(cfg.trunc_q));
        const auto [l1m, l2m] = lambda_max_pflr(design);
        const auto grid = lambda_grid(std::max(l1m, l2m), cfg.lambda_count,
                                      cfg.lambda_min_ratio);
        PflrFit fit;
        fit.p = design.p;
        fit.d = design.d;
        for (int j = 0; j < design.p; ++j) fit.b.push_back(Eigen::VectorXd::Zero(design.q[j]));
        fit.gamma = Eigen::VectorXd::Zero(design.d);

        double best_l1 = std::numeric_limits<double>::infinity();
        double best_f1f = 0.0, best_f1s = 0.0, best_gl1 = std::numeric_limits<double>::infinity();
        for (double lam : grid) {
          solve_mixed_lasso_warm(design, lam, lam, {}, fit);
          const PflrError err = estimation_error_pflr(fit, beta_truth, gamma_truth, cfg.alpha1);
          best_l1 = std::min(best_l1, err.l1_func);
          best_gl1 = std::min(best_gl1, err.l1_scalar);
          best_f1f = std::max(best_f1f, err.f1_func);
          best_f1s = std::max(best_f1s, err.f1_scalar);
        }
        return std::vector<std::pair<std::string, double>>{{"pflr_l1_best", best_l1},
                                                           {"pflr_gamma_l1_best", best_gl1},
                                                           {"pflr_f1_func_best", best_f1f},
                                                           {"pflr_f1_scalar_best", best_f1s}};
      },
      false,
      [&](StudyRecord& rec) {
        rec.study = "rate_pflr";
        rec.p = scn.covariate.functional.p;
        rec.d = scn.covariate.d;
        rec.s = static_cast<int>(scn.func_support.size());
        rec.q = cfg.trunc_q;
      },
      result.records);

  summarize_by_statistic(cfg, result);
  return result;
}

void sort_records(std::vector<StudyRecord>& records) {
  std::sort(records.begin(), records.end(), [](const StudyRecord& a, const StudyRecord& b) {
    if (a.study != b.study) return a.study < b.study;
    if (a.statistic != b.statistic) return a.statistic < b.statistic;
    if (a.n != b.n) return a.n < b.n;
    return a.replicate < b.replicate;
  });
}

}  // namespace

StudyResult run_study(const StudyConfig& cfg, int threads, bool measure_time) {
  cfg.validate();
  StudyResult result;
  switch (cfg.kind) {
    case StudyKind::cov_deviation: result = run_cov_deviation(cfg, threads, measure_time); break;
    case StudyKind::score_deviation:
      result = run_score_deviation(cfg, threads, measure_time);
      break;
    case StudyKind::re_check: result = run_re_check(cfg, threads, measure_time); break;
    case StudyKind::rate_fllr: result = run_rate_fllr(cfg, threads, measure_time); break;
    case StudyKind::rate_pflr: result = run_rate_pflr(cfg, threads, measure_time); break;
  }
  sort_records(result.records);
  return result;
}

}  // namespace hdfts
