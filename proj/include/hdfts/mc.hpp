#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hdfts/fllr.hpp"
#include "hdfts/pflr.hpp"
#include "hdfts/spectral.hpp"

namespace hdfts {

enum class StudyKind { cov_deviation, score_deviation, re_check, rate_fllr, rate_pflr };

struct StudyConfig {
  StudyKind kind = StudyKind::cov_deviation;
  std::vector<int> n_grid;
  std::vector<int> h_grid = {0};
  int replicates = 1;
  std::uint64_t base_seed = 1;

  std::optional<JointProcessSpec> joint;  // X,Y pair for deviation studies
  std::optional<MixedProcessSpec> mixed;  // X,Z pair
  std::optional<MAProcessSpec> fma;       // plain X process (RE study)
  std::optional<MAProcessSpec> eps_func;  // univariate error process for X-eps statistics
  std::optional<FllrScenario> fllr;
  std::optional<PflrScenario> pflr;

  // score-statistic normalization
  int q1 = 3;
  int q2 = 3;
  double alpha1 = 1.5;
  double alpha2 = 1.5;

  // RE study
  int re_trials = 1000;
  int re_sparsity = 3;
  int re_lags = 0;  // L of the stacked design
  int re_q = 0;     // 0 means full basis dimension

  // rate studies
  int lambda_count = 10;
  double lambda_min_ratio = 0.01;
  int trunc_q = 3;

  void validate() const;
};

struct StudyRecord {
  std::string study;
  int n = 0;
  int p = 0;
  int d = 0;
  int s = 0;
  int q = 0;
  int replicate = 0;
  std::string statistic;
  double value = 0.0;
  double seconds = 0.0;
};

struct SlopeSummary {
  std::string statistic;
  double slope = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::vector<std::pair<int, double>> medians;  // (n, median value)
  double monotone_decreasing_frac = 0.0;        // over adjacent median pairs
};

struct StudyResult {
  std::vector<StudyRecord> records;
  std::vector<SlopeSummary> slopes;
  std::map<std::string, double> info;  // population values and study metadata
};

// Runs the configured study on `threads` workers (0 = hardware concurrency).
// Results are identical for any thread count; per-replicate seeds derive from
// (base_seed, grid index, replicate). Wall times are recorded only when
// `measure_time` is set, keeping default outputs reproducible byte for byte.
StudyResult run_study(const StudyConfig& cfg, int threads = 0, bool measure_time = false);

// OLS slope of log(median) against log(n) with a replicate-bootstrap interval
SlopeSummary slope_summary(const std::string& statistic,
                           const std::vector<std::pair<int, double>>& medians,
                           const std::vector<std::vector<double>>& samples_per_n,
                           const std::vector<int>& ns, std::uint64_t seed, int boot = 200);

double median(std::vector<double> v);

}  // namespace hdfts
