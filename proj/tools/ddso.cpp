// Command-line front end: experiment simulation, asymptotic model dumps,
// dominance/lemma verification, misspecification sweeps, and limit-law
// comparisons. Outputs are deterministic per (config, seed, build); every
// run writes a manifest with per-file checksums.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ddso/config.hpp"
#include "ddso/csv.hpp"
#include "ddso/manifest.hpp"
#include "ddso/svg.hpp"

namespace {

using namespace ddso;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitSolver = 2;
constexpr int kExitVerification = 3;

struct GlobalArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
};

RunConfig load_config(const GlobalArgs& args) {
  if (args.config_path.empty()) throw ConfigError("missing --config PATH");
  RunConfig cfg = parse_config_file(args.config_path);
  if (args.seed) cfg.experiment.master_seed = *args.seed;
  if (args.workers) cfg.experiment.workers = *args.workers;
  return cfg;
}

std::string out_path(const GlobalArgs& args, const std::string& name) {
  std::filesystem::create_directories(args.out_dir);
  return (std::filesystem::path(args.out_dir) / name).string();
}

void add_output(RunManifest& manifest, const GlobalArgs& args, const std::string& name,
                const std::string& content) {
  write_file(out_path(args, name), content);
  manifest.output_checksums.push_back({name, fnv1a64(content)});
}

std::vector<SvgSeries> summary_series(const SummaryTable& summary) {
  std::vector<SvgSeries> series;
  for (Method m : {Method::SAA, Method::ETO, Method::IEO}) {
    SvgSeries s;
    s.label = to_string(m);
    for (const SummaryRow& row : summary) {
      if (row.method != m) continue;
      s.x.push_back(row.n);
      s.y.push_back(row.q50);
      s.band_lo.push_back(row.q25);
      s.band_hi.push_back(row.q75);
    }
    if (!s.x.empty()) series.push_back(std::move(s));
  }
  return series;
}

int cmd_simulate(const GlobalArgs& args) {
  const RunConfig cfg = load_config(args);
  const RegretTable table = run_experiment(cfg.experiment);
  const SummaryTable summary = summarize(table, cfg.experiment.c1_thresholds);

  RunManifest manifest;
  manifest.command = "simulate";
  manifest.master_seed = cfg.experiment.master_seed;
  manifest.config_echo = cfg.echo();
  add_output(manifest, args, "regret.csv", regret_csv(table));
  add_output(manifest, args, "summary.csv", summary_csv(summary, cfg.experiment.c1_thresholds));
  if (cfg.svg) {
    SvgOptions opt;
    opt.title = cfg.experiment.problem + " (" + cfg.experiment.setting + ")";
    opt.log_y = cfg.svg_log_y;
    add_output(manifest, args, "plot.svg", render_svg_lines(summary_series(summary), opt));
  }
  write_manifest(manifest, out_path(args, "manifest.json"));
  std::printf("simulate: %zu rows -> %s\n", table.size(), args.out_dir.c_str());
  return kExitOk;
}

int cmd_asymptotics(const GlobalArgs& args) {
  const RunConfig cfg = load_config(args);
  const CovModel cov = cov_model_for(cfg.experiment);

  RunManifest manifest;
  manifest.command = "asymptotics";
  manifest.master_seed = cfg.experiment.master_seed;
  manifest.config_echo = cfg.echo();
  add_output(manifest, args, "covmodel.csv", covmodel_csv(cov));

  const std::vector<Method> methods = cfg.experiment.effective_methods();
  std::vector<std::vector<double>> samples(methods.size());
  for (std::size_t m = 0; m < methods.size(); ++m) {
    const LimitLaw law = limit_law(cov, methods[m]);
    RngStream rng(cfg.experiment.master_seed, 0x11111111ULL + m);
    samples[m].resize(cfg.m_samples);
    for (int i = 0; i < cfg.m_samples; ++i) samples[m][i] = law.sample(rng);
  }
  add_output(manifest, args, "limitlaw_samples.csv", limitlaw_samples_csv(methods, samples));

  if (cfg.experiment.problem == "newsvendor" ||
      cfg.experiment.problem == "newsvendor_constrained") {
    add_output(manifest, args, "misspec_limits.csv", misspec_csv(misspec_limits_for(cfg.experiment)));
  }
  write_manifest(manifest, out_path(args, "manifest.json"));
  std::printf("asymptotics: wrote covmodel/limitlaw%s -> %s\n",
              cfg.experiment.problem.rfind("newsvendor", 0) == 0 &&
                      cfg.experiment.problem != "newsvendor_contextual"
                  ? "/misspec"
                  : "",
              args.out_dir.c_str());
  return kExitOk;
}

int cmd_sdcheck(const GlobalArgs& args, int trials, int dim_p, int dim_q, int sd_trials,
                int sd_samples, std::uint64_t seed) {
  std::string report;
  bool all_passed = true;
  const auto record = [&](const std::string& name, const CheckReport& r) {
    report += name + ": " + (r.passed ? "pass" : "FAIL") +
              " (trials=" + std::to_string(r.trials) +
              ", worst_slack=" + fmt17(r.worst_slack) + ")" +
              (r.detail.empty() ? "" : " [" + r.detail + "]") + "\n";
    all_passed = all_passed && r.passed;
  };

  RngStream rng(seed, 1);
  for (double lambda : {0.0, 0.1}) {
    record("lemma2 lambda=" + fmt17(lambda), check_lemma2(rng, dim_p, dim_q, lambda, trials));
  }
  RngStream rng3(seed, 2);
  for (double lambda : {0.0, 0.1}) {
    record("lemma3 lambda=" + fmt17(lambda), check_lemma3(rng3, dim_p, dim_q, lambda, trials));
  }
  RngStream rng1(seed, 3);
  record("lemma1 dominance sampling", check_lemma1_sd(rng1, dim_p, sd_samples, sd_trials));

  // Cramer-Rao on the four problem families.
  {
    ScaledMeanGaussianFamily f2;
    f2.p = 2;
    f2.sigmas = {1.0, 1.0};
    record("cramer_rao newsvendor p=2",
           check_cramer_rao(compute_cov_model(NewsvendorSpec::uniform_costs(2, 1.0, 5.0), f2, 3.0)));
    ScaledMeanGaussianFamily f5;
    f5.p = 5;
    f5.sigmas.assign(5, 1.0);
    record("cramer_rao constrained p=5",
           check_cramer_rao(
               compute_cov_model(NewsvendorSpec::uniform_costs(5, 1.0, 5.0, 40.0), f5, 3.0)));
    ContextualNewsvendorSpec ctx;
    LinearGaussianFamily lf;
    UniformFeatureLaw law;
    record("cramer_rao contextual",
           check_cramer_rao(compute_cov_model(ctx, lf, {2.0, 0.5, 0.5}, law)));
    PortfolioSpec port;
    port.num_assets = 2;
    port.alpha = 0.7;
    MeanVecGaussianFamily fm;
    fm.sigmas = {std::sqrt(3.0), std::sqrt(6.0)};
    record("cramer_rao portfolio", check_cramer_rao(compute_cov_model(port, fm, {12.0, 15.0})));
  }

  // Dominance of the sampled limit laws for the two-product newsvendor.
  {
    ScaledMeanGaussianFamily f2;
    f2.p = 2;
    f2.sigmas = {1.0, 1.0};
    const CovModel cov = compute_cov_model(NewsvendorSpec::uniform_costs(2, 1.0, 5.0), f2, 3.0);
    RngStream lr(seed, 4);
    const int m = sd_samples;
    std::vector<double> g_eto(m), g_ieo(m), g_saa(m);
    const LimitLaw leto = limit_law(cov, Method::ETO);
    const LimitLaw lieo = limit_law(cov, Method::IEO);
    const LimitLaw lsaa = limit_law(cov, Method::SAA);
    for (int i = 0; i < m; ++i) {
      g_eto[i] = leto.sample(lr);
      g_ieo[i] = lieo.sample(lr);
      g_saa[i] = lsaa.sample(lr);
    }
    const SdVerdict v1 = sd_test(g_eto, g_ieo);
    const SdVerdict v2 = sd_test(g_ieo, g_saa);
    const bool ok = v1 == SdVerdict::XDominated && v2 == SdVerdict::XDominated;
    report += std::string("limit-law dominance ETO<=IEO<=SAA: ") + (ok ? "pass" : "FAIL") +
              " (" + to_string(v1) + ", " + to_string(v2) + ")\n";
    all_passed = all_passed && ok;
  }

  report += std::string("overall: ") + (all_passed ? "pass" : "FAIL") + "\n";
  std::fputs(report.c_str(), stdout);
  write_file(out_path(args, "sdcheck_report.txt"), report);
  return all_passed ? kExitOk : kExitVerification;
}

int cmd_sweep(const GlobalArgs& args) {
  const RunConfig cfg = load_config(args);
  if (cfg.gamma_list.empty())
    throw ConfigError("sweep: config must set gamma_list");
  const std::map<double, RegretTable> tables = gamma_sweep(cfg.experiment, cfg.gamma_list);

  RunManifest manifest;
  manifest.command = "sweep";
  manifest.master_seed = cfg.experiment.master_seed;
  manifest.config_echo = cfg.echo();

  std::vector<double> gammas;
  std::vector<SummaryTable> summaries;
  for (const auto& [gamma, table] : tables) {
    const SummaryTable summary = summarize(table, cfg.experiment.c1_thresholds);
    char name[64];
    std::snprintf(name, sizeof(name), "summary_gamma_%.17g.csv", gamma);
    add_output(manifest, args, name, summary_csv(summary, cfg.experiment.c1_thresholds));
    gammas.push_back(gamma);
    summaries.push_back(summary);
  }
  add_output(manifest, args, "sweep.csv", sweep_csv(gammas, summaries));
  write_manifest(manifest, out_path(args, "manifest.json"));
  std::printf("sweep: %zu gamma values -> %s\n", gammas.size(), args.out_dir.c_str());
  return kExitOk;
}

int cmd_limits(const GlobalArgs& args) {
  const RunConfig cfg = load_config(args);
  const std::vector<LimitComparisonEntry> entries =
      limit_comparison(cfg.experiment, cfg.n_large, cfg.m_samples);

  RunManifest manifest;
  manifest.command = "limits";
  manifest.master_seed = cfg.experiment.master_seed;
  manifest.config_echo = cfg.echo();
  add_output(manifest, args, "limits.csv", limits_csv(entries));
  write_manifest(manifest, out_path(args, "manifest.json"));
  for (const LimitComparisonEntry& e : entries) {
    std::printf("%s: ks=%.4f empirical_mean=%.4f law_mean=%.4f\n", to_string(e.method),
                e.ks_distance, e.empirical_mean, e.law_mean);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-driven stochastic optimization experiments (SAA / ETO / IEO)"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalArgs args;
  std::uint64_t seed_value = 0;
  int workers_value = 0;
  app.add_option("--config", args.config_path, "Path to the experiment config file");
  app.add_option("--out", args.out_dir, "Output directory (default: current)");
  auto* seed_opt = app.add_option("--seed", seed_value, "Master seed override");
  auto* workers_opt = app.add_option("--workers", workers_value, "Worker thread count override");

  auto* simulate = app.add_subcommand("simulate", "Run the regret experiment");
  auto* asymptotics = app.add_subcommand("asymptotics", "Write covariance model and limit-law samples");
  auto* sdcheck = app.add_subcommand("sdcheck", "Verify matrix lemmas, Cramer-Rao, and dominance");
  auto* sweep = app.add_subcommand("sweep", "Run the misspecification sweep over gamma");
  auto* limits = app.add_subcommand("limits", "Compare empirical n*regret with the limit laws");

  int trials = 1000, dim_p = 4, dim_q = 2, sd_trials = 100, sd_samples = 100000;
  std::uint64_t sd_seed = 20240901;
  sdcheck->add_option("--trials", trials, "Randomized trials per lemma")->check(CLI::Range(1, 1000000000));
  sdcheck->add_option("--p", dim_p, "Matrix dimension p")->check(CLI::Range(1, 64));
  sdcheck->add_option("--q", dim_q, "Map dimension q")->check(CLI::Range(1, 64));
  sdcheck->add_option("--sd-trials", sd_trials, "Sampling trials for the dominance lemma");
  sdcheck->add_option("--sd-samples", sd_samples, "Samples per dominance trial");
  sdcheck->add_option("--sd-seed", sd_seed, "Seed for the verification run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  if (seed_opt->count() > 0) args.seed = seed_value;
  if (workers_opt->count() > 0) args.workers = workers_value;
  if (sdcheck->parsed() && seed_opt->count() > 0) sd_seed = seed_value;

  try {
    if (simulate->parsed()) return cmd_simulate(args);
    if (asymptotics->parsed()) return cmd_asymptotics(args);
    if (sdcheck->parsed())
      return cmd_sdcheck(args, trials, dim_p, dim_q, sd_trials, sd_samples, sd_seed);
    if (sweep->parsed()) return cmd_sweep(args);
    if (limits->parsed()) return cmd_limits(args);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return kExitSolver;
  }
  return kExitConfig;
}
