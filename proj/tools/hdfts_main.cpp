#include <CLI11.hpp>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>

#include "hdfts/config.hpp"
#include "hdfts/csvio.hpp"

namespace {

using hdfts::ConfigError;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct GlobalArgs {
  std::string config;
  std::string out;
  std::optional<std::int64_t> seed;
  int threads = 0;
  bool verbose = false;
  bool timing = false;
};

int thread_count(const GlobalArgs& args) {
  if (args.threads > 0) return args.threads;
  if (const char* env = std::getenv("HDFTS_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 0;  // library default: hardware concurrency
}

void check_keys_top(const json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

std::uint64_t seed_of(const json& j, const GlobalArgs& args) {
  if (args.seed) return static_cast<std::uint64_t>(*args.seed);
  if (j.contains("seed")) return j.at("seed").get<std::uint64_t>();
  return 1;
}

// --- simulate ---------------------------------------------------------------

int cmd_simulate(const GlobalArgs& args) {
  const json cfg = hdfts::parse_json_file(args.config);
  check_keys_top(cfg, {"process", "n", "seed"}, "simulate config");
  if (!cfg.contains("process")) throw ConfigError("simulate config: missing 'process'");
  const json& proc = cfg.at("process");
  check_keys_top(proc, {"fma", "mixed"}, "simulate config.process");
  const int n = cfg.at("n").get<int>();
  const std::uint64_t seed = seed_of(cfg, args);

  hdfts::FunctionalPanel panel;
  if (proc.contains("fma")) {
    panel = hdfts::simulate_fma(hdfts::ma_spec_from_json(proc.at("fma"), "$.process.fma"), n,
                                seed);
  } else if (proc.contains("mixed")) {
    panel = hdfts::simulate_mixed(
        hdfts::mixed_spec_from_json(proc.at("mixed"), "$.process.mixed"), n, seed);
  } else {
    throw ConfigError("simulate config.process: give 'fma' or 'mixed'");
  }
  const std::string out = args.out.empty() ? "panel.csv" : args.out;
  hdfts::atomic_write(out, hdfts::panel_csv(panel));
  if (args.verbose) std::cerr << "wrote " << out << "\n";
  return kExitOk;
}

// --- stability --------------------------------------------------------------

int cmd_stability(const GlobalArgs& args) {
  const json cfg = hdfts::parse_json_file(args.config);
  check_keys_top(cfg, {"process", "grid_size", "ridge_rel", "sparse_k", "seed"},
                 "stability config");
  const json& proc = cfg.at("process");
  check_keys_top(proc, {"fma", "mixed", "joint"}, "stability config.process");

  hdfts::MeasureOptions opts;
  if (cfg.contains("grid_size")) opts.grid_size = cfg.at("grid_size").get<int>();
  if (cfg.contains("ridge_rel")) opts.ridge_rel = cfg.at("ridge_rel").get<double>();

  hdfts::StabilityReport report;
  if (proc.contains("fma")) {
    std::vector<int> ks;
    if (cfg.contains("sparse_k")) ks = cfg.at("sparse_k").get<std::vector<int>>();
    report = hdfts::stability_report(hdfts::ma_spec_from_json(proc.at("fma"), "$.process.fma"),
                                     ks, opts);
  } else if (proc.contains("joint")) {
    report = hdfts::stability_report(
        hdfts::joint_spec_from_json(proc.at("joint"), "$.process.joint"), opts);
  } else if (proc.contains("mixed")) {
    report = hdfts::stability_report(
        hdfts::mixed_spec_from_json(proc.at("mixed"), "$.process.mixed"), opts);
  } else {
    throw ConfigError("stability config.process: give 'fma', 'mixed' or 'joint'");
  }

  const std::string table = hdfts::stability_csv(report);
  std::cout << table;
  if (!args.out.empty()) hdfts::atomic_write(args.out, table);
  return kExitOk;
}

// --- fit-fllr ---------------------------------------------------------------

std::vector<double> lambda_grid_from_json(const json& j, double lmax, const std::string& where) {
  if (j.contains("value")) {
    check_keys_top(j, {"value"}, where);
    return {j.at("value").get<double>()};
  }
  check_keys_top(j, {"count", "min_ratio"}, where);
  const int count = j.value("count", 10);
  const double ratio = j.value("min_ratio", 0.01);
  std::vector<double> grid;
  if (count == 1) return {lmax};
  for (int i = 0; i < count; ++i)
    grid.push_back(lmax * std::pow(ratio, static_cast<double>(i) / (count - 1)));
  return grid;
}

int cmd_fit_fllr(const GlobalArgs& args) {
  const json cfg = hdfts::parse_json_file(args.config);
  check_keys_top(cfg, {"scenario", "n", "seed", "truncation", "lambda", "tol", "max_sweeps"},
                 "fit-fllr config");
  const hdfts::FllrScenario scn =
      hdfts::fllr_scenario_from_json(cfg.at("scenario"), "$.scenario");
  const int n = cfg.at("n").get<int>();
  const std::uint64_t seed = seed_of(cfg, args);
  const hdfts::TruncationRule rule =
      cfg.contains("truncation")
          ? hdfts::truncation_from_json(cfg.at("truncation"), "$.truncation")
          : hdfts::TruncationRule::fixed(3);
  hdfts::SolveOptions sopts;
  if (cfg.contains("tol")) sopts.tol = cfg.at("tol").get<double>();
  if (cfg.contains("max_sweeps")) sopts.max_sweeps = cfg.at("max_sweeps").get<int>();

  const hdfts::FunctionalPanel panel = hdfts::gen_fllr_data(scn, n, seed);
  const hdfts::FllrDesign design = hdfts::build_design(panel, scn.L, rule, rule);
  const double lmax = hdfts::lambda_max(design);
  const std::vector<double> grid =
      cfg.contains("lambda") ? lambda_grid_from_json(cfg.at("lambda"), lmax, "$.lambda")
                             : std::vector<double>{0.5 * lmax};
  const std::vector<hdfts::FllrFit> fits = hdfts::fit_path(design, grid, sopts);
  for (const auto& fit : fits) {
    if (!fit.converged) {
      std::cerr << "fit-fllr: solver did not converge at lambda=" << fit.lambda
                << " (kkt=" << fit.kkt_residual << ")\n";
      return kExitNumerical;
    }
  }
  const hdfts::FllrFit& last = fits.back();

  json summary;
  summary["version"] = hdfts::kVersion;
  summary["lambda"] = last.lambda;
  summary["lambda_max"] = lmax;
  summary["kkt_residual"] = last.kkt_residual;
  summary["sweeps"] = last.sweeps;
  summary["converged"] = last.converged;
  summary["objective"] = last.objective_trace.back();
  json support = json::array();
  for (const auto& [h, j2] : last.support) support.push_back({h, j2});
  summary["support"] = support;

  const std::filesystem::path dir = args.out.empty() ? "." : args.out;
  hdfts::atomic_write((dir / "fit.json").string(), summary.dump(2) + "\n");
  hdfts::atomic_write((dir / "surfaces.csv").string(), hdfts::fllr_surfaces_csv(last));
  hdfts::atomic_write((dir / "path.csv").string(), hdfts::fllr_path_csv(fits));
  if (args.verbose) std::cerr << "wrote " << (dir / "fit.json").string() << "\n";
  return kExitOk;
}

// --- fit-pflr ---------------------------------------------------------------

int cmd_fit_pflr(const GlobalArgs& args) {
  const json cfg = hdfts::parse_json_file(args.config);
  check_keys_top(cfg,
                 {"scenario", "n", "seed", "truncation", "lambda1", "lambda2", "lambda", "tol",
                  "max_sweeps"},
                 "fit-pflr config");
  const hdfts::PflrScenario scn =
      hdfts::pflr_scenario_from_json(cfg.at("scenario"), "$.scenario");
  const int n = cfg.at("n").get<int>();
  const std::uint64_t seed = seed_of(cfg, args);
  const hdfts::TruncationRule rule =
      cfg.contains("truncation")
          ? hdfts::truncation_from_json(cfg.at("truncation"), "$.truncation")
          : hdfts::TruncationRule::fixed(3);
  hdfts::SolveOptions sopts;
  if (cfg.contains("tol")) sopts.tol = cfg.at("tol").get<double>();
  if (cfg.contains("max_sweeps")) sopts.max_sweeps = cfg.at("max_sweeps").get<int>();

  const hdfts::FunctionalPanel panel = hdfts::gen_pflr_data(scn, n, seed);
  const hdfts::PflrDesign design = hdfts::build_design_pflr(panel, rule);
  const auto [l1max, l2max] = hdfts::lambda_max_pflr(design);

  double lambda1, lambda2;
  if (cfg.contains("lambda1") || cfg.contains("lambda2")) {
    lambda1 = cfg.value("lambda1", 0.0);
    lambda2 = cfg.value("lambda2", lambda1);
  } else if (cfg.contains("lambda")) {
    lambda1 = lambda2 = cfg.at("lambda").at("value").get<double>();
  } else {
    lambda1 = 0.5 * l1max;
    lambda2 = 0.5 * l2max;
  }

  const hdfts::PflrFit fit = hdfts::solve_mixed_lasso(design, lambda1, lambda2, sopts);
  if (!fit.converged) {
    std::cerr << "fit-pflr: solver did not converge (kkt=" << fit.kkt_residual << ")\n";
    return kExitNumerical;
  }

  json summary;
  summary["version"] = hdfts::kVersion;
  summary["lambda1"] = fit.lambda1;
  summary["lambda2"] = fit.lambda2;
  summary["kkt_residual"] = fit.kkt_residual;
  summary["sweeps"] = fit.sweeps;
  summary["converged"] = fit.converged;
  summary["objective"] = fit.objective_trace.back();
  summary["support_func"] = fit.support_func;
  summary["support_scalar"] = fit.support_scalar;
  json gamma = json::array();
  for (int k = 0; k < fit.gamma.size(); ++k) gamma.push_back(fit.gamma[k]);
  summary["gamma"] = gamma;

  const std::filesystem::path dir = args.out.empty() ? "." : args.out;
  hdfts::atomic_write((dir / "fit.json").string(), summary.dump(2) + "\n");
  hdfts::atomic_write((dir / "curves.csv").string(), hdfts::pflr_curves_csv(fit));
  if (args.verbose) std::cerr << "wrote " << (dir / "fit.json").string() << "\n";
  return kExitOk;
}

// --- mc ---------------------------------------------------------------------

int cmd_mc(const GlobalArgs& args) {
  json cfg = hdfts::parse_json_file(args.config);
  if (args.seed && cfg.is_object()) cfg["base_seed"] = *args.seed;
  const hdfts::StudyConfig study = hdfts::study_config_from_json(cfg);
  const hdfts::StudyResult result = hdfts::run_study(study, thread_count(args), args.timing);

  const std::string out = args.out.empty() ? "records.csv" : args.out;
  hdfts::atomic_write(out, hdfts::records_csv(result.records));
  hdfts::atomic_write(out + ".summary.json",
                      hdfts::study_result_summary(study, result).dump(2) + "\n");
  if (args.verbose)
    std::cerr << "wrote " << out << " (" << result.records.size() << " records)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"high-dimensional functional/scalar time series toolkit"};
  app.require_subcommand(1);

  GlobalArgs args;
  const auto add_common = [&](CLI::App* sub, bool needs_out) {
    sub->add_option("--config", args.config, "JSON configuration file")->required();
    auto* out = sub->add_option("--out", args.out, "output path");
    if (needs_out) out->required();
    sub->add_option("--seed", args.seed, "override the config seed");
    sub->add_option("--threads", args.threads, "worker threads (HDFTS_THREADS as fallback)");
    sub->add_flag("--verbose", args.verbose, "log progress to stderr");
  };

  auto* sim = app.add_subcommand("simulate", "draw a panel from a process spec");
  add_common(sim, false);
  auto* stab = app.add_subcommand("stability", "population stability measures of a spec");
  add_common(stab, false);
  auto* ffllr = app.add_subcommand("fit-fllr", "sparse functional linear lagged regression");
  add_common(ffllr, false);
  auto* fpflr = app.add_subcommand("fit-pflr", "partially functional linear regression");
  add_common(fpflr, false);
  auto* mc = app.add_subcommand("mc", "Monte Carlo verification studies");
  add_common(mc, false);
  mc->add_flag("--timing", args.timing, "record wall times in the records CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (sim->parsed()) return cmd_simulate(args);
    if (stab->parsed()) return cmd_stability(args);
    if (ffllr->parsed()) return cmd_fit_fllr(args);
    if (fpflr->parsed()) return cmd_fit_pflr(args);
    if (mc->parsed()) return cmd_mc(args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}
