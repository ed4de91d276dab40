#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "hdfts/procgen.hpp"

namespace hdfts {

// two multivariate functional processes driven by one shared error pool:
// the first `px` variables of `joint` form X, the remaining `dy` form Y.
// Block-diagonal lag kernels give independent X and Y; identical rows give
// Y identical to X.
struct JointProcessSpec {
  MAProcessSpec joint;
  int px = 0;
  int dy = 0;

  void validate() const;
};

struct MeasureOptions {
  int grid_size = 512;        // frequency grid over [-pi, pi], 0 and +/-pi included
  double ridge_rel = 1e-10;   // eigenvalue cut for covariance whitening
  long long subset_cap = 200000;  // enumeration budget for sparse measures
};

// per-frequency spectral density of the full stacked state, coefficient space
struct SpectralDensity {
  Eigen::VectorXd theta;
  std::vector<Eigen::MatrixXcd> value;
};

Eigen::VectorXd theta_grid(int grid_size);
SpectralDensity spectral_density(const LinearSystem& sys, int grid_size);

// functional stability measure M^X: 2pi sup_theta of the largest generalized
// eigenvalue of (f_theta, Sigma_0), realized by truncated whitening
double stability_measure(const MAProcessSpec& spec, const MeasureOptions& opts = {});

// cross-spectral measures: doubly whitened largest singular value
double cross_stability(const JointProcessSpec& spec, const MeasureOptions& opts = {});
double cross_stability_xz(const MixedProcessSpec& spec, const MeasureOptions& opts = {});

// non-functional stability measure of the scalar block
double scalar_stability(const MixedProcessSpec& spec, const MeasureOptions& opts = {});

// restricted measures over all variable subsets of the given cardinality
double sparse_stability(const MAProcessSpec& spec, int k, const MeasureOptions& opts = {});
double sparse_scalar_stability(const MixedProcessSpec& spec, int k,
                               const MeasureOptions& opts = {});
double sparse_cross_stability(const JointProcessSpec& spec, int k1, int k2,
                              const MeasureOptions& opts = {});
double sparse_cross_stability_xz(const MixedProcessSpec& spec, int k1, int k2,
                                 const MeasureOptions& opts = {});

// unwhitened comparison measures: 2pi sup of the largest singular value of the
// cross-spectral matrix, and the real-bilinear variant it upper-bounds
double basu_measure(const JointProcessSpec& spec, const MeasureOptions& opts = {});
double basu_measure_xz(const MixedProcessSpec& spec, const MeasureOptions& opts = {});
double real_bilinear_cross_measure(const JointProcessSpec& spec, const MeasureOptions& opts = {},
                                   int phase_grid = 64);

struct StabilityReport {
  std::optional<double> m_x, m_y, m_z, m_xy, m_xz, m_tilde;
  std::vector<std::pair<int, double>> m_k;  // (k, M_k)
  int grid_size = 0;
  double ridge_rel = 0.0;
};

StabilityReport stability_report(const MAProcessSpec& spec, const std::vector<int>& ks,
                                 const MeasureOptions& opts = {});
StabilityReport stability_report(const JointProcessSpec& spec, const MeasureOptions& opts = {});
StabilityReport stability_report(const MixedProcessSpec& spec, const MeasureOptions& opts = {});

}  // namespace hdfts
