#include "hdfts/config.hpp"

#include <fstream>
#include <set>

#include "hdfts/csvio.hpp"
#include "hdfts/rng.hpp"

namespace hdfts {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError(path + ": " + msg);
}

void check_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
}

// unknown keys are rejected so typos cannot silently change a run
void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& path) {
  check_object(j, path);
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key)) fail(path, "unknown key '" + key + "'");
  }
}

const json& require(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key)) fail(path, std::string("missing key '") + key + "'");
  return j.at(key);
}

double get_num(const json& j, const char* key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

double get_num_or(const json& j, const char* key, double dflt, const std::string& path) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_number()) fail(path + "." + key, "expected a number");
  return j.at(key).get<double>();
}

int get_int(const json& j, const char* key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
  return v.get<int>();
}

int get_int_or(const json& j, const char* key, int dflt, const std::string& path) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_number_integer()) fail(path + "." + key, "expected an integer");
  return j.at(key).get<int>();
}

std::string get_str(const json& j, const char* key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_string()) fail(path + "." + key, "expected a string");
  return v.get<std::string>();
}

std::vector<int> get_int_array(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of integers");
  std::vector<int> out;
  for (const auto& e : v) {
    if (!e.is_number_integer()) fail(path, "expected integers");
    out.push_back(e.get<int>());
  }
  return out;
}

Eigen::VectorXd get_vector(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  Eigen::VectorXd out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) fail(path, "expected numbers");
    out[i] = v[i].get<double>();
  }
  return out;
}

Eigen::MatrixXd get_matrix(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of rows");
  const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
  Eigen::MatrixXd out(v.size(), cols);
  for (std::size_t r = 0; r < v.size(); ++r) {
    if (!v[r].is_array() || v[r].size() != cols) fail(path, "ragged matrix rows");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!v[r][c].is_number()) fail(path, "expected numbers");
      out(r, c) = v[r][c].get<double>();
    }
  }
  return out;
}

ScoreLaw law_from_string(const std::string& s, const std::string& path) {
  if (s == "gaussian") return ScoreLaw::gaussian;
  if (s == "scaled_uniform") return ScoreLaw::scaled_uniform;
  if (s == "scaled_rademacher") return ScoreLaw::scaled_rademacher;
  fail(path, "unknown score law '" + s + "'");
}

Eigen::MatrixXd random_gaussian(int rows, int cols, std::uint64_t seed, double sd) {
  Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = sd * rng.normal();
  return m;
}

Eigen::MatrixXd scalar_matrix_from_json(const json& j, int d, const std::string& path) {
  check_keys(j, {"kind", "scale", "seed", "coef"}, path);
  const std::string kind = get_str(j, "kind", path);
  const double scale = get_num_or(j, "scale", 1.0, path);
  if (kind == "zero") return Eigen::MatrixXd::Zero(d, d);
  if (kind == "identity") return scale * Eigen::MatrixXd::Identity(d, d);
  if (kind == "random") {
    const auto seed = static_cast<std::uint64_t>(get_int(j, "seed", path));
    return random_gaussian(d, d, seed, scale / std::sqrt(static_cast<double>(d)));
  }
  if (kind == "explicit") {
    const Eigen::MatrixXd m = get_matrix(require(j, "coef", path), path + ".coef");
    if (m.rows() != d || m.cols() != d) fail(path + ".coef", "expected a d x d matrix");
    return m;
  }
  fail(path, "unknown matrix kind '" + kind + "'");
}

Eigen::MatrixXd loading_from_json(const json& j, int d, int p, int g, const std::string& path) {
  check_keys(j, {"kind", "scale", "seed", "coef", "entries"}, path);
  const std::string kind = get_str(j, "kind", path);
  if (kind == "zero") return Eigen::MatrixXd::Zero(d, p * g);
  if (kind == "random") {
    const auto seed = static_cast<std::uint64_t>(get_int(j, "seed", path));
    const double scale = get_num_or(j, "scale", 1.0, path);
    return random_gaussian(d, p * g, seed, scale / std::sqrt(static_cast<double>(p * g)));
  }
  if (kind == "entries") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, p * g);
    const json& entries = require(j, "entries", path);
    if (!entries.is_array()) fail(path + ".entries", "expected an array");
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const std::string epath = path + ".entries[" + std::to_string(i) + "]";
      check_keys(entries[i], {"row", "var", "score", "weight"}, epath);
      const int row = get_int(entries[i], "row", epath);
      const int var = get_int(entries[i], "var", epath);
      const int score = get_int(entries[i], "score", epath);
      const double w = get_num(entries[i], "weight", epath);
      if (row < 0 || row >= d || var < 0 || var >= p || score < 0 || score >= g)
        fail(epath, "loading index out of range");
      m(row, var * g + score) = w;
    }
    return m;
  }
  if (kind == "explicit") {
    const Eigen::MatrixXd m = get_matrix(require(j, "coef", path), path + ".coef");
    if (m.rows() != d || m.cols() != p * g) fail(path + ".coef", "expected a d x (p*G) matrix");
    return m;
  }
  fail(path, "unknown loading kind '" + kind + "'");
}

}  // namespace

json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

BasisSpec basis_from_json(const json& j, const std::string& path) {
  check_keys(j, {"size", "lo", "hi", "family"}, path);
  BasisSpec b;
  b.size = get_int(j, "size", path);
  b.lo = get_num_or(j, "lo", 0.0, path);
  b.hi = get_num_or(j, "hi", 1.0, path);
  if (j.contains("family")) {
    const std::string f = get_str(j, "family", path);
    if (f == "fourier")
      b.family = BasisFamily::fourier;
    else if (f == "legendre")
      b.family = BasisFamily::legendre;
    else
      fail(path + ".family", "unknown basis family '" + f + "'");
  }
  try {
    b.validate();
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
  return b;
}

ErrorSpec error_spec_from_json(const json& j, int basis_size, const std::string& path) {
  check_keys(j, {"law", "decay", "omega", "scale"}, path);
  ErrorSpec e;
  if (j.contains("law")) e.law = law_from_string(get_str(j, "law", path), path + ".law");
  if (j.contains("omega") && j.contains("decay"))
    fail(path, "give either 'omega' or 'decay', not both");
  if (j.contains("omega")) {
    e.omega = get_vector(j.at("omega"), path + ".omega");
  } else if (j.contains("decay")) {
    const json& d = j.at("decay");
    check_keys(d, {"c", "alpha"}, path + ".decay");
    e.omega = ErrorSpec::power_decay(basis_size, get_num(d, "c", path + ".decay"),
                                     get_num(d, "alpha", path + ".decay"));
  } else {
    e.omega = ErrorSpec::power_decay(basis_size, 1.0, 1.5);
  }
  if (j.contains("scale")) e.scale = get_vector(j.at("scale"), path + ".scale");
  return e;
}

BlockKernel kernel_from_json(const json& j, const BasisSpec& rb, const BasisSpec& cb, int rows,
                             int cols, const std::string& path) {
  check_keys(j, {"kind", "scale", "rate", "self", "cross", "seed", "coef"}, path);
  const std::string kind = get_str(j, "kind", path);
  BlockKernel k = BlockKernel::zero(rb, cb, rows, cols);
  const double scale = get_num_or(j, "scale", 1.0, path);
  const int g = rb.size;

  const auto diag_profile = [&](double s, double rate) {
    Eigen::VectorXd d(g);
    for (int l = 0; l < g; ++l) d[l] = s * std::pow(rate, l);
    return d;
  };

  if (kind == "zero") return k;
  if (kind == "identity") {
    if (rows != cols || !(rb == cb)) fail(path, "identity kernel needs a square grid");
    k.coef = scale * Eigen::MatrixXd::Identity(k.coef.rows(), k.coef.cols());
    return k;
  }
  if (kind == "diag_decay") {
    if (rows != cols || !(rb == cb)) fail(path, "diag_decay kernel needs a square grid");
    const double rate = get_num_or(j, "rate", 0.5, path);
    for (int v = 0; v < rows; ++v) k.block(v, v) = diag_profile(scale, rate).asDiagonal();
    return k;
  }
  if (kind == "neighbor") {
    if (rows != cols || !(rb == cb)) fail(path, "neighbor kernel needs a square grid");
    const double self = get_num_or(j, "self", 0.5, path);
    const double cross = get_num_or(j, "cross", 0.2, path);
    const double rate = get_num_or(j, "rate", 0.7, path);
    for (int v = 0; v < rows; ++v) {
      k.block(v, v) = diag_profile(self, rate).asDiagonal();
      if (v + 1 < rows) k.block(v, v + 1) = diag_profile(cross, rate).asDiagonal();
      if (v > 0) k.block(v, v - 1) = diag_profile(cross, rate).asDiagonal();
    }
    return k;
  }
  if (kind == "random") {
    const auto seed = static_cast<std::uint64_t>(get_int(j, "seed", path));
    k.coef = random_gaussian(static_cast<int>(k.coef.rows()), static_cast<int>(k.coef.cols()),
                             seed, scale / std::sqrt(static_cast<double>(k.coef.cols())));
    return k;
  }
  if (kind == "explicit") {
    const Eigen::MatrixXd m = get_matrix(require(j, "coef", path), path + ".coef");
    if (m.rows() != k.coef.rows() || m.cols() != k.coef.cols())
      fail(path + ".coef", "coefficient matrix has the wrong shape");
    k.coef = m;
    return k;
  }
  fail(path, "unknown kernel kind '" + kind + "'");
}

MAProcessSpec ma_spec_from_json(const json& j, const std::string& path) {
  check_keys(j, {"basis", "p", "lags", "far1", "error"}, path);
  MAProcessSpec spec;
  spec.basis = basis_from_json(require(j, "basis", path), path + ".basis");
  spec.p = get_int(j, "p", path);
  spec.error =
      error_spec_from_json(require(j, "error", path), spec.basis.size, path + ".error");

  if (j.contains("lags") == j.contains("far1"))
    fail(path, "give exactly one of 'lags' or 'far1'");
  if (j.contains("lags")) {
    const json& lags = j.at("lags");
    if (!lags.is_array() || lags.empty()) fail(path + ".lags", "expected a non-empty array");
    for (std::size_t l = 0; l < lags.size(); ++l)
      spec.lags.push_back(kernel_from_json(lags[l], spec.basis, spec.basis, spec.p, spec.p,
                                           path + ".lags[" + std::to_string(l) + "]"));
  } else {
    const json& f = j.at("far1");
    check_keys(f, {"transition", "tail_tol"}, path + ".far1");
    const BlockKernel rho =
        kernel_from_json(require(f, "transition", path + ".far1"), spec.basis, spec.basis,
                         spec.p, spec.p, path + ".far1.transition");
    const double tol = get_num_or(f, "tail_tol", 1e-8, path + ".far1");
    const MAProcessSpec expanded = far1_to_ma(rho, spec.error, tol);
    spec.lags = expanded.lags;
  }
  try {
    spec.validate();
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
  return spec;
}

MixedProcessSpec mixed_spec_from_json(const json& j, const std::string& path) {
  check_keys(j, {"functional", "d", "scalar_lags", "cross_loadings", "scalar_law"}, path);
  MixedProcessSpec spec;
  spec.functional = ma_spec_from_json(require(j, "functional", path), path + ".functional");
  spec.d = get_int(j, "d", path);
  if (j.contains("scalar_law"))
    spec.scalar_law = law_from_string(get_str(j, "scalar_law", path), path + ".scalar_law");
  if (j.contains("scalar_lags")) {
    const json& lags = j.at("scalar_lags");
    if (!lags.is_array()) fail(path + ".scalar_lags", "expected an array");
    for (std::size_t l = 0; l < lags.size(); ++l)
      spec.scalar_lags.push_back(scalar_matrix_from_json(
          lags[l], spec.d, path + ".scalar_lags[" + std::to_string(l) + "]"));
  }
  if (j.contains("cross_loadings")) {
    const json& loads = j.at("cross_loadings");
    if (!loads.is_array()) fail(path + ".cross_loadings", "expected an array");
    for (std::size_t l = 0; l < loads.size(); ++l)
      spec.cross_loadings.push_back(
          loading_from_json(loads[l], spec.d, spec.functional.p, spec.functional.basis.size,
                            path + ".cross_loadings[" + std::to_string(l) + "]"));
  }
  try {
    spec.validate();
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
  return spec;
}

JointProcessSpec joint_spec_from_json(const json& j, const std::string& path) {
  check_keys(j, {"joint", "px", "dy"}, path);
  JointProcessSpec spec;
  spec.joint = ma_spec_from_json(require(j, "joint", path), path + ".joint");
  spec.px = get_int(j, "px", path);
  spec.dy = get_int(j, "dy", path);
  try {
    spec.validate();
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
  return spec;
}

namespace {

std::vector<std::pair<int, int>> support_from_json(const json& j, int max_h, int p,
                                                   const std::string& path) {
  if (j.is_array()) {
    std::vector<std::pair<int, int>> out;
    for (const auto& e : j) {
      if (!e.is_array() || e.size() != 2) fail(path, "expected [h, j] pairs");
      out.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    return out;
  }
  check_keys(j, {"count", "seed"}, path);
  const int count = get_int(j, "count", path);
  const auto seed = static_cast<std::uint64_t>(get_int_or(j, "seed", 1, path));
  const int total = (max_h + 1) * p;
  if (count > total) fail(path, "support count exceeds (L+1)*p");
  Rng rng(derive_seed(seed, 0x737570ULL));
  std::set<int> picked;
  while (static_cast<int>(picked.size()) < count)
    picked.insert(static_cast<int>(rng.next_u64() % total));
  std::vector<std::pair<int, int>> out;
  for (int flat : picked) out.emplace_back(flat / p, flat % p);
  return out;
}

}  // namespace

FllrScenario fllr_scenario_from_json(const json& j, const std::string& path) {
  check_keys(j, {"covariate", "L", "response_basis", "support", "kappa", "mu", "noise",
                 "noise_scale"},
             path);
  FllrScenario scn;
  scn.covariate = ma_spec_from_json(require(j, "covariate", path), path + ".covariate");
  scn.L = get_int(j, "L", path);
  scn.response_basis =
      basis_from_json(require(j, "response_basis", path), path + ".response_basis");
  scn.support = support_from_json(require(j, "support", path), scn.L, scn.covariate.p,
                                  path + ".support");
  scn.kappa = get_num_or(j, "kappa", 2.0, path);
  scn.mu = get_num_or(j, "mu", 1.0, path);
  scn.noise = error_spec_from_json(require(j, "noise", path), scn.response_basis.size,
                                   path + ".noise");
  scn.noise_scale = get_num_or(j, "noise_scale", 1.0, path);
  try {
    scn.validate();
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
  return scn;
}

PflrScenario pflr_scenario_from_json(const json& j, const std::string& path) {
  check_keys(j, {"covariate", "func_support", "kappa", "mu", "gamma", "noise_law",
                 "noise_scale"},
             path);
  PflrScenario scn;
  scn.covariate = mixed_spec_from_json(require(j, "covariate", path), path + ".covariate");
  const json& fs = require(j, "func_support", path);
  if (fs.is_array()) {
    for (const auto& e : fs) scn.func_support.push_back(e.get<int>());
  } else {
    const auto pairs = support_from_json(fs, 0, scn.covariate.functional.p,
                                         path + ".func_support");
    for (const auto& [h, v] : pairs) {
      (void)h;
      scn.func_support.push_back(v);
    }
  }
  scn.kappa = get_num_or(j, "kappa", 2.0, path);
  scn.mu = get_num_or(j, "mu", 1.0, path);
  const json& gj = require(j, "gamma", path);
  if (gj.is_array()) {
    for (const auto& e : gj) {
      if (!e.is_array() || e.size() != 2) fail(path + ".gamma", "expected [index, value] pairs");
      scn.gamma.emplace_back(e[0].get<int>(), e[1].get<double>());
    }
  } else {
    check_keys(gj, {"count", "value", "seed"}, path + ".gamma");
    const int count = get_int(gj, "count", path + ".gamma");
    const double value = get_num_or(gj, "value", 1.0, path + ".gamma");
    const auto seed = static_cast<std::uint64_t>(get_int_or(gj, "seed", 2, path + ".gamma"));
    if (count > scn.covariate.d) fail(path + ".gamma", "count exceeds d");
    Rng rng(derive_seed(seed, 0x67616dULL));
    std::set<int> picked;
    while (static_cast<int>(picked.size()) < count)
      picked.insert(static_cast<int>(rng.next_u64() % scn.covariate.d));
    for (int k : picked) scn.gamma.emplace_back(k, value);
  }
  if (j.contains("noise_law"))
    scn.noise_law = law_from_string(get_str(j, "noise_law", path), path + ".noise_law");
  scn.noise_scale = get_num_or(j, "noise_scale", 1.0, path);
  try {
    scn.validate();
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
  return scn;
}

TruncationRule truncation_from_json(const json& j, const std::string& path) {
  check_keys(j, {"rule", "rho", "q"}, path);
  const std::string rule = get_str(j, "rule", path);
  try {
    if (rule == "fve") return TruncationRule::fve(get_num(j, "rho", path));
    if (rule == "fixed") return TruncationRule::fixed(get_int(j, "q", path));
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
  fail(path + ".rule", "expected 'fve' or 'fixed'");
}

StudyConfig study_config_from_json(const json& j, const std::string& path) {
  check_keys(j, {"study", "n_grid", "h_grid", "replicates", "base_seed", "joint", "mixed",
                 "fma", "eps_func", "fllr", "pflr", "q1", "q2", "alpha1", "alpha2", "re_trials",
                 "re_sparsity", "re_lags", "re_q", "lambda_count", "lambda_min_ratio",
                 "trunc_q"},
             path);
  StudyConfig cfg;
  const std::string kind = get_str(j, "study", path);
  if (kind == "cov_deviation")
    cfg.kind = StudyKind::cov_deviation;
  else if (kind == "score_deviation")
    cfg.kind = StudyKind::score_deviation;
  else if (kind == "re_check")
    cfg.kind = StudyKind::re_check;
  else if (kind == "rate_fllr")
    cfg.kind = StudyKind::rate_fllr;
  else if (kind == "rate_pflr")
    cfg.kind = StudyKind::rate_pflr;
  else
    fail(path + ".study", "unknown study kind '" + kind + "'");

  cfg.n_grid = get_int_array(require(j, "n_grid", path), path + ".n_grid");
  if (j.contains("h_grid")) cfg.h_grid = get_int_array(j.at("h_grid"), path + ".h_grid");
  cfg.replicates = get_int_or(j, "replicates", 1, path);
  cfg.base_seed = static_cast<std::uint64_t>(get_int_or(j, "base_seed", 1, path));
  if (j.contains("joint")) cfg.joint = joint_spec_from_json(j.at("joint"), path + ".joint");
  if (j.contains("mixed")) cfg.mixed = mixed_spec_from_json(j.at("mixed"), path + ".mixed");
  if (j.contains("fma")) cfg.fma = ma_spec_from_json(j.at("fma"), path + ".fma");
  if (j.contains("eps_func"))
    cfg.eps_func = ma_spec_from_json(j.at("eps_func"), path + ".eps_func");
  if (j.contains("fllr")) cfg.fllr = fllr_scenario_from_json(j.at("fllr"), path + ".fllr");
  if (j.contains("pflr")) cfg.pflr = pflr_scenario_from_json(j.at("pflr"), path + ".pflr");
  cfg.q1 = get_int_or(j, "q1", 3, path);
  cfg.q2 = get_int_or(j, "q2", 3, path);
  cfg.alpha1 = get_num_or(j, "alpha1", 1.5, path);
  cfg.alpha2 = get_num_or(j, "alpha2", 1.5, path);
  cfg.re_trials = get_int_or(j, "re_trials", 1000, path);
  cfg.re_sparsity = get_int_or(j, "re_sparsity", 3, path);
  cfg.re_lags = get_int_or(j, "re_lags", 0, path);
  cfg.re_q = get_int_or(j, "re_q", 0, path);
  cfg.lambda_count = get_int_or(j, "lambda_count", 10, path);
  cfg.lambda_min_ratio = get_num_or(j, "lambda_min_ratio", 0.01, path);
  cfg.trunc_q = get_int_or(j, "trunc_q", 3, path);
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    fail(path, e.what());
  }
  return cfg;
}

json stability_report_to_json(const StabilityReport& report) {
  json out;
  out["version"] = kVersion;
  out["grid_size"] = report.grid_size;
  out["ridge_rel"] = report.ridge_rel;
  if (report.m_x) out["m_x"] = *report.m_x;
  if (report.m_y) out["m_y"] = *report.m_y;
  if (report.m_z) out["m_z"] = *report.m_z;
  if (report.m_xy) out["m_xy"] = *report.m_xy;
  if (report.m_xz) out["m_xz"] = *report.m_xz;
  if (report.m_tilde) out["m_tilde"] = *report.m_tilde;
  if (!report.m_k.empty()) {
    json mk = json::array();
    for (const auto& [k, v] : report.m_k) mk.push_back({{"k", k}, {"value", v}});
    out["m_k"] = mk;
  }
  return out;
}

json study_result_summary(const StudyConfig& cfg, const StudyResult& result) {
  json out;
  out["version"] = kVersion;
  out["base_seed"] = cfg.base_seed;
  out["replicates"] = cfg.replicates;
  json slopes = json::array();
  for (const auto& s : result.slopes) {
    json medians = json::array();
    for (const auto& [n, v] : s.medians) medians.push_back({{"n", n}, {"median", v}});
    slopes.push_back({{"statistic", s.statistic},
                      {"slope", s.slope},
                      {"ci_lo", s.ci_lo},
                      {"ci_hi", s.ci_hi},
                      {"monotone_decreasing_frac", s.monotone_decreasing_frac},
                      {"medians", medians}});
  }
  out["slopes"] = slopes;
  for (const auto& [key, value] : result.info) out["info"][key] = value;
  return out;
}

}  // namespace hdfts
