#include "hdfts/spectral.hpp"

#include <cmath>
#include <stdexcept>

#include "hdfts/linalg.hpp"

namespace hdfts {

namespace {

constexpr double kPi = 3.1415926535897932384626433832795;

struct Span {
  int offset = 0;
  int len = 0;
};

// transfer function M(e^{i theta}) = sum_l M_l e^{i l theta}
Eigen::MatrixXcd transfer(const LinearSystem& sys, double theta) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(sys.state_dim, sys.score_dim);
  for (std::size_t l = 0; l < sys.coeff.size(); ++l) {
    const std::complex<double> z(std::cos(l * theta), std::sin(l * theta));
    m += z * sys.coeff[l];
  }
  return m;
}

Eigen::MatrixXcd sub_rows(const Eigen::MatrixXcd& m, const std::vector<int>& idx) {
  Eigen::MatrixXcd out(idx.size(), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(i) = m.row(idx[i]);
  return out;
}

Eigen::MatrixXd sub_square(const Eigen::MatrixXd& m, const std::vector<int>& idx) {
  Eigen::MatrixXd out(idx.size(), idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j) out(i, j) = m(idx[i], idx[j]);
  return out;
}

std::vector<int> span_indices(Span s) {
  std::vector<int> idx(s.len);
  for (int i = 0; i < s.len; ++i) idx[i] = s.offset + i;
  return idx;
}

double sigma_max(const Eigen::MatrixXcd& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  return Eigen::JacobiSVD<Eigen::MatrixXcd>(m).singularValues()[0];
}

// M restricted to coordinate set `idx`: sup over the grid of the largest
// whitened eigen/singular value; rows == cols gives the marginal measure
double measure_on(const LinearSystem& sys, const std::vector<int>& rows,
                  const std::vector<int>& cols, const MeasureOptions& opts, bool whiten) {
  const Eigen::MatrixXd c0 = sys.cross_cov(0);
  const bool same = rows == cols;
  Eigen::MatrixXd wr, wc;
  if (whiten) {
    wr = truncated_inv_sqrt(sub_square(c0, rows), opts.ridge_rel);
    wc = same ? wr : truncated_inv_sqrt(sub_square(c0, cols), opts.ridge_rel);
  }
  const Eigen::VectorXd grid = theta_grid(opts.grid_size);
  double best = 0.0;
  for (int i = 0; i < grid.size(); ++i) {
    const Eigen::MatrixXcd mz = transfer(sys, grid[i]);
    const Eigen::MatrixXcd mr = sub_rows(mz, rows);
    if (same) {
      // 2pi * lambda_max(W^T f W) = sigma_max(W^T Mz)^2
      const double s = sigma_max(whiten ? (wr.transpose() * mr).eval() : mr);
      best = std::max(best, s * s);
    } else {
      const Eigen::MatrixXcd mc = sub_rows(mz, cols);
      Eigen::MatrixXcd a = whiten ? (wr.transpose() * mr).eval() : mr;
      Eigen::MatrixXcd b = whiten ? (wc.transpose() * mc).eval() : mc;
      best = std::max(best, sigma_max(a * b.adjoint()));
    }
  }
  return best;
}

// lexicographic k-subsets of {0..n-1}
bool next_subset(std::vector<int>& s, int n) {
  const int k = static_cast<int>(s.size());
  int i = k - 1;
  while (i >= 0 && s[i] == n - k + i) --i;
  if (i < 0) return false;
  ++s[i];
  for (int j = i + 1; j < k; ++j) s[j] = s[j - 1] + 1;
  return true;
}

long long binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > (1LL << 56)) return 1LL << 56;
  }
  return r;
}

std::vector<int> var_indices(const std::vector<int>& vars, int width, int base) {
  std::vector<int> idx;
  idx.reserve(vars.size() * width);
  for (int v : vars)
    for (int g = 0; g < width; ++g) idx.push_back(base + v * width + g);
  return idx;
}

}  // namespace

void JointProcessSpec::validate() const {
  joint.validate();
  if (px < 1 || dy < 1 || px + dy != joint.p)
    throw std::invalid_argument("JointProcessSpec: partition must satisfy px + dy == p");
}

Eigen::VectorXd theta_grid(int grid_size) {
  if (grid_size < 3) throw std::invalid_argument("theta_grid: grid_size must be >= 3");
  const int n = (grid_size % 2 == 1) ? grid_size : grid_size + 1;  // odd: holds 0 and +/-pi
  Eigen::VectorXd g(n);
  for (int i = 0; i < n; ++i) g[i] = -kPi + 2.0 * kPi * i / (n - 1);
  return g;
}

SpectralDensity spectral_density(const LinearSystem& sys, int grid_size) {
  SpectralDensity sd;
  sd.theta = theta_grid(grid_size);
  sd.value.reserve(sd.theta.size());
  for (int i = 0; i < sd.theta.size(); ++i) {
    const Eigen::MatrixXcd mz = transfer(sys, sd.theta[i]);
    sd.value.push_back((mz * mz.adjoint()) / (2.0 * kPi));
  }
  return sd;
}

double stability_measure(const MAProcessSpec& spec, const MeasureOptions& opts) {
  const LinearSystem sys = compile(spec);
  const auto idx = span_indices({0, sys.func_dim});
  return measure_on(sys, idx, idx, opts, true);
}

double cross_stability(const JointProcessSpec& spec, const MeasureOptions& opts) {
  spec.validate();
  const LinearSystem sys = compile(spec.joint);
  const int g = spec.joint.basis.size;
  return measure_on(sys, span_indices({0, spec.px * g}),
                    span_indices({spec.px * g, spec.dy * g}), opts, true);
}

double cross_stability_xz(const MixedProcessSpec& spec, const MeasureOptions& opts) {
  const LinearSystem sys = compile(spec);
  return measure_on(sys, span_indices({0, sys.func_dim}),
                    span_indices({sys.func_dim, sys.scalar_dim}), opts, true);
}

double scalar_stability(const MixedProcessSpec& spec, const MeasureOptions& opts) {
  const LinearSystem sys = compile(spec);
  const auto idx = span_indices({sys.func_dim, sys.scalar_dim});
  return measure_on(sys, idx, idx, opts, true);
}

namespace {

template <typename Fn>
double max_over_subsets(int n, int k, long long cap, Fn&& value) {
  if (k < 1 || k > n) throw std::invalid_argument("sparse measure: k out of range");
  if (binom(n, k) > cap) throw std::invalid_argument("sparse measure: subset cap exceeded");
  std::vector<int> s(k);
  for (int i = 0; i < k; ++i) s[i] = i;
  double best = 0.0;
  do {
    best = std::max(best, value(s));
  } while (next_subset(s, n));
  return best;
}

}  // namespace

double sparse_stability(const MAProcessSpec& spec, int k, const MeasureOptions& opts) {
  const LinearSystem sys = compile(spec);
  const int g = spec.basis.size;
  return max_over_subsets(spec.p, k, opts.subset_cap, [&](const std::vector<int>& vars) {
    const auto idx = var_indices(vars, g, 0);
    return measure_on(sys, idx, idx, opts, true);
  });
}

double sparse_scalar_stability(const MixedProcessSpec& spec, int k, const MeasureOptions& opts) {
  const LinearSystem sys = compile(spec);
  return max_over_subsets(spec.d, k, opts.subset_cap, [&](const std::vector<int>& vars) {
    const auto idx = var_indices(vars, 1, sys.func_dim);
    return measure_on(sys, idx, idx, opts, true);
  });
}

double sparse_cross_stability(const JointProcessSpec& spec, int k1, int k2,
                              const MeasureOptions& opts) {
  spec.validate();
  const LinearSystem sys = compile(spec.joint);
  const int g = spec.joint.basis.size;
  if (binom(spec.px, k1) * binom(spec.dy, k2) > opts.subset_cap)
    throw std::invalid_argument("sparse measure: subset cap exceeded");
  return max_over_subsets(spec.px, k1, opts.subset_cap, [&](const std::vector<int>& xv) {
    const auto rows = var_indices(xv, g, 0);
    return max_over_subsets(spec.dy, k2, opts.subset_cap, [&](const std::vector<int>& yv) {
      return measure_on(sys, rows, var_indices(yv, g, spec.px * g), opts, true);
    });
  });
}

double sparse_cross_stability_xz(const MixedProcessSpec& spec, int k1, int k2,
                                 const MeasureOptions& opts) {
  const LinearSystem sys = compile(spec);
  const int g = spec.functional.basis.size;
  if (binom(spec.functional.p, k1) * binom(spec.d, k2) > opts.subset_cap)
    throw std::invalid_argument("sparse measure: subset cap exceeded");
  return max_over_subsets(spec.functional.p, k1, opts.subset_cap,
                          [&](const std::vector<int>& xv) {
    const auto rows = var_indices(xv, g, 0);
    return max_over_subsets(spec.d, k2, opts.subset_cap, [&](const std::vector<int>& zv) {
      return measure_on(sys, rows, var_indices(zv, 1, sys.func_dim), opts, true);
    });
  });
}

double basu_measure(const JointProcessSpec& spec, const MeasureOptions& opts) {
  spec.validate();
  const LinearSystem sys = compile(spec.joint);
  const int g = spec.joint.basis.size;
  return measure_on(sys, span_indices({0, spec.px * g}),
                    span_indices({spec.px * g, spec.dy * g}), opts, false);
}

double basu_measure_xz(const MixedProcessSpec& spec, const MeasureOptions& opts) {
  const LinearSystem sys = compile(spec);
  return measure_on(sys, span_indices({0, sys.func_dim}),
                    span_indices({sys.func_dim, sys.scalar_dim}), opts, false);
}

double real_bilinear_cross_measure(const JointProcessSpec& spec, const MeasureOptions& opts,
                                   int phase_grid) {
  spec.validate();
  const LinearSystem sys = compile(spec.joint);
  const int g = spec.joint.basis.size;
  const auto rows = span_indices({0, spec.px * g});
  const auto cols = span_indices({spec.px * g, spec.dy * g});
  const Eigen::VectorXd grid = theta_grid(opts.grid_size);
  double best = 0.0;
  for (int i = 0; i < grid.size(); ++i) {
    const Eigen::MatrixXcd mz = transfer(sys, grid[i]);
    const Eigen::MatrixXcd f = sub_rows(mz, rows) * sub_rows(mz, cols).adjoint();
    // sup over real unit vectors of |v1^T F v2| = max_phi sigma_max of the
    // rotated real part; phi has period pi
    for (int q = 0; q < phase_grid; ++q) {
      const double phi = kPi * q / phase_grid;
      const Eigen::MatrixXd rot = std::cos(phi) * f.real() + std::sin(phi) * f.imag();
      best = std::max(best, Eigen::JacobiSVD<Eigen::MatrixXd>(rot).singularValues()[0]);
    }
  }
  return best;
}

StabilityReport stability_report(const MAProcessSpec& spec, const std::vector<int>& ks,
                                 const MeasureOptions& opts) {
  StabilityReport r;
  r.grid_size = opts.grid_size;
  r.ridge_rel = opts.ridge_rel;
  r.m_x = stability_measure(spec, opts);
  for (int k : ks) r.m_k.emplace_back(k, sparse_stability(spec, k, opts));
  return r;
}

StabilityReport stability_report(const JointProcessSpec& spec, const MeasureOptions& opts) {
  StabilityReport r;
  r.grid_size = opts.grid_size;
  r.ridge_rel = opts.ridge_rel;
  const LinearSystem sys = compile(spec.joint);
  const int g = spec.joint.basis.size;
  const auto xi = span_indices({0, spec.px * g});
  const auto yi = span_indices({spec.px * g, spec.dy * g});
  r.m_x = measure_on(sys, xi, xi, opts, true);
  r.m_y = measure_on(sys, yi, yi, opts, true);
  r.m_xy = cross_stability(spec, opts);
  r.m_tilde = basu_measure(spec, opts);
  return r;
}

StabilityReport stability_report(const MixedProcessSpec& spec, const MeasureOptions& opts) {
  StabilityReport r;
  r.grid_size = opts.grid_size;
  r.ridge_rel = opts.ridge_rel;
  r.m_x = stability_measure(spec.functional, opts);
  r.m_z = scalar_stability(spec, opts);
  r.m_xz = cross_stability_xz(spec, opts);
  r.m_tilde = basu_measure_xz(spec, opts);
  return r;
}

}  // namespace hdfts
