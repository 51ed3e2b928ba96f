#include "ddso/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace ddso {

namespace {

bool is_newsvendor(const std::string& p) {
  return p == "newsvendor" || p == "newsvendor_constrained";
}

// Assumed per-product standard deviations for the scaled-mean families.
std::vector<double> assumed_nv_sigmas(const ExperimentConfig& cfg) {
  std::vector<double> s(cfg.p);
  for (int j = 1; j <= cfg.p; ++j) {
    double var = 1.0;
    if (cfg.setting == "mis") {
      // Unconstrained: max(6-j, 1); constrained: 1 + 0.9 j.
      var = (cfg.problem == "newsvendor_constrained") ? 1.0 + 0.9 * j
                                                      : std::max(6.0 - j, 1.0);
    } else if (cfg.setting == "gamma") {
      var = cfg.gamma + (1.0 - cfg.gamma) * (6.0 - j);
    }
    s[j - 1] = std::sqrt(var);
  }
  return s;
}

std::vector<double> portfolio_true_means(int assets) {
  std::vector<double> theta(assets);
  for (int j = 1; j <= assets; ++j) theta[j - 1] = 9.0 + 3.0 * j;
  return theta;
}

std::vector<double> portfolio_true_variances(int assets) {
  std::vector<double> v(assets);
  for (int j = 1; j <= assets; ++j) v[j - 1] = 3.0 * j;
  return v;
}

std::vector<double> portfolio_assumed_variances(const ExperimentConfig& cfg, int assets) {
  if (cfg.setting == "mis") {
    std::vector<double> v(assets);
    for (int j = 1; j <= assets; ++j) v[j - 1] = 3.0 * (assets - j + 1);
    return v;
  }
  return portfolio_true_variances(assets);
}

struct Cell {
  int n = 0;
  int rep = 0;
};

std::string cell_context(const Cell& cell, const char* what) {
  return "replication (n=" + std::to_string(cell.n) + ", rep=" + std::to_string(cell.rep) +
         ") failed: " + what;
}

// Worker pool over independent cells; each cell owns its stream, dataset and
// fits, so output is invariant to the worker count. Any fit failure aborts
// the whole run with the offending cell named (no silent gaps).
template <typename Fn>
void run_cells(const std::vector<Cell>& cells, int workers, const Fn& fn) {
  if (workers <= 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      try {
        fn(i);
      } catch (const std::exception& e) {
        throw std::runtime_error(cell_context(cells[i], e.what()));
      }
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  std::vector<std::string> errors(workers);
  const int count = std::min<int>(workers, static_cast<int>(cells.size()));
  for (int w = 0; w < count; ++w) {
    pool.emplace_back([&, w]() {
      while (!failed.load(std::memory_order_relaxed)) {
        const std::size_t i = next.fetch_add(1);
        if (i >= cells.size()) break;
        try {
          fn(i);
        } catch (const std::exception& e) {
          errors[w] = cell_context(cells[i], e.what());
          failed.store(true);
          break;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failed.load()) {
    for (const auto& e : errors)
      if (!e.empty()) throw std::runtime_error(e);
    throw std::runtime_error("run_experiment: worker failed");
  }
}

}  // namespace

std::vector<Method> ExperimentConfig::effective_methods() const {
  if (!methods.empty()) return methods;
  if (problem == "newsvendor_contextual") return {Method::ETO, Method::IEO};
  return {Method::SAA, Method::ETO, Method::IEO};
}

void ExperimentConfig::validate() const {
  std::string errors;
  const auto complain = [&errors](const std::string& msg) {
    if (!errors.empty()) errors += "; ";
    errors += msg;
  };
  if (problem != "newsvendor" && problem != "newsvendor_constrained" &&
      problem != "newsvendor_contextual" && problem != "portfolio")
    complain("unknown problem '" + problem + "'");
  if (setting != "well" && setting != "mis" && setting != "gamma")
    complain("unknown setting '" + setting + "'");
  if (setting == "gamma" && !(gamma >= 0.0 && gamma <= 1.0))
    complain("gamma must lie in [0,1]");
  if (replications < 1) complain("replications must be >= 1");
  if (n_list.empty()) complain("n_list must not be empty");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 1) complain("n_list entries must be >= 1");
    if (i > 0 && n_list[i] <= n_list[i - 1]) complain("n_list must be strictly increasing");
  }
  if (p < 1) complain("p must be >= 1");
  if (problem == "portfolio" && p < 2) complain("portfolio needs p >= 2 (p - 1 assets)");
  if (!(h > 0.0) || !(b > 0.0)) complain("h and b must be positive");
  if (!(capacity > 0.0) && problem == "newsvendor_constrained") complain("capacity must be positive");
  if (!(alpha > 0.0) && problem == "portfolio") complain("alpha must be positive");
  if (workers < 1) complain("workers must be >= 1");
  if (problem == "newsvendor_contextual") {
    for (Method m : effective_methods())
      if (m == Method::SAA) complain("SAA is not applicable to contextual problems");
  }
  if (!errors.empty()) throw std::invalid_argument("config: " + errors);
}

RegretTable run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<Method> methods = cfg.effective_methods();

  std::vector<Cell> cells;
  for (int n : cfg.n_list)
    for (int rep = 0; rep < cfg.replications; ++rep) cells.push_back({n, rep});

  RegretTable table(cells.size() * methods.size());
  const std::string setting_id =
      cfg.setting == "gamma" ? "gamma=" + std::to_string(cfg.gamma) : cfg.setting;

  const auto emit = [&](std::size_t cell_idx, const std::vector<double>& regrets) {
    const Cell& cell = cells[cell_idx];
    for (std::size_t m = 0; m < methods.size(); ++m) {
      RegretRow& row = table[cell_idx * methods.size() + m];
      row.problem = cfg.problem;
      row.setting = setting_id;
      row.method = methods[m];
      row.n = cell.n;
      row.rep = cell.rep;
      row.regret = regrets[m];
      row.n_regret = cell.n * regrets[m];
    }
  };
  const auto cell_stream = [&](const Cell& cell) {
    return RngStream(cfg.master_seed,
                     (static_cast<std::uint64_t>(cell.n) << 32) |
                         static_cast<std::uint64_t>(cell.rep));
  };

  if (is_newsvendor(cfg.problem)) {
    const bool constrained = cfg.problem == "newsvendor_constrained";
    const NewsvendorSpec spec = NewsvendorSpec::uniform_costs(
        cfg.p, cfg.h, cfg.b,
        constrained ? std::optional<double>(cfg.capacity) : std::nullopt);
    ScaledMeanGaussianFamily truth_family;
    truth_family.p = cfg.p;
    truth_family.sigmas.assign(cfg.p, 1.0);
    ScaledMeanGaussianFamily assumed = truth_family;
    assumed.sigmas = assumed_nv_sigmas(cfg);
    std::vector<double> mu(cfg.p), sg(cfg.p, 1.0);
    for (int j = 0; j < cfg.p; ++j) mu[j] = (j + 1) * cfg.theta0;
    const NvGroundTruth truth = make_nv_ground_truth(spec, mu, sg);
    IeoGridOptions grid;
    grid.literal_paper_range = cfg.ieo_literal_grid;

    run_cells(cells, cfg.workers, [&](std::size_t i) {
      RngStream rng = cell_stream(cells[i]);
      const Dataset data = sample_dataset(truth_family, cfg.theta0, cells[i].n, rng);
      std::vector<double> regrets(methods.size());
      for (std::size_t m = 0; m < methods.size(); ++m) {
        FitResult fit;
        switch (methods[m]) {
          case Method::SAA: fit = saa(spec, data); break;
          case Method::ETO: fit = eto(spec, assumed, data); break;
          case Method::IEO: fit = ieo(spec, assumed, data, grid); break;
        }
        regrets[m] = regret(truth, fit.decision);
      }
      emit(i, regrets);
    });
    return table;
  }

  if (cfg.problem == "newsvendor_contextual") {
    ContextualNewsvendorSpec spec;
    spec.h = cfg.h;
    spec.b = cfg.b;
    LinearGaussianFamily gaussian;
    LinearUniformFamily uniform;
    UniformFeatureLaw law;
    CtxGroundTruth truth;
    truth.spec = spec;
    truth.theta0 = {2.0, 0.5, 0.5};
    truth.sigma = 1.0;
    truth.feature_law = law;
    const bool mis = cfg.setting == "mis";

    run_cells(cells, cfg.workers, [&](std::size_t i) {
      RngStream rng = cell_stream(cells[i]);
      const Dataset data = sample_dataset(gaussian, truth.theta0, cells[i].n, rng, law);
      std::vector<double> regrets(methods.size());
      for (std::size_t m = 0; m < methods.size(); ++m) {
        FitResult fit;
        if (mis) {
          fit = (methods[m] == Method::ETO) ? eto(spec, uniform, data) : ieo(spec, uniform, data);
        } else {
          fit = (methods[m] == Method::ETO) ? eto(spec, gaussian, data) : ieo(spec, gaussian, data);
        }
        const std::vector<double> theta = fit.theta;
        const auto policy = [&](const std::vector<double>& x) {
          if (mis) return ctx_uniform_oracle(uniform, theta, x, spec);
          return ctx_oracle_decision(gaussian, theta, x, spec);
        };
        regrets[m] = regret(truth, policy);
      }
      emit(i, regrets);
    });
    return table;
  }

  // portfolio
  const int assets = cfg.p - 1;
  PortfolioSpec spec;
  spec.num_assets = assets;
  spec.alpha = cfg.alpha;
  const std::vector<double> theta_true = portfolio_true_means(assets);
  const std::vector<double> var_true = portfolio_true_variances(assets);
  MeanVecGaussianFamily truth_family;
  for (double v : var_true) truth_family.sigmas.push_back(std::sqrt(v));
  MeanVecGaussianFamily assumed;
  for (double v : portfolio_assumed_variances(cfg, assets)) assumed.sigmas.push_back(std::sqrt(v));
  const PortfolioGroundTruth truth = make_portfolio_ground_truth(spec, theta_true, var_true);

  run_cells(cells, cfg.workers, [&](std::size_t i) {
    RngStream rng = cell_stream(cells[i]);
    const Dataset data = sample_dataset(truth_family, theta_true, cells[i].n, rng);
    std::vector<double> regrets(methods.size());
    for (std::size_t m = 0; m < methods.size(); ++m) {
      FitResult fit;
      switch (methods[m]) {
        case Method::SAA: fit = saa(spec, data); break;
        case Method::ETO: fit = eto(spec, assumed, data); break;
        case Method::IEO: fit = ieo(spec, assumed, data); break;
      }
      regrets[m] = regret(truth, fit.decision);
    }
    emit(i, regrets);
  });
  return table;
}

double quantile_type7(std::vector<double> values, double prob) {
  if (values.empty()) throw std::invalid_argument("quantile_type7: empty values");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - lo) * (values[lo + 1] - values[lo]);
}

SummaryTable summarize(const RegretTable& table, const std::vector<double>& c1) {
  if (table.empty()) throw std::invalid_argument("summarize: empty table");
  // Group rows by (method, n) in first-appearance order, then sort values so
  // the output is independent of row insertion order.
  std::vector<std::pair<Method, int>> keys;
  std::map<std::pair<int, int>, std::vector<double>> regret_groups;  // (method,n) -> values
  for (const RegretRow& row : table) {
    const std::pair<int, int> key{static_cast<int>(row.method), row.n};
    auto it = regret_groups.find(key);
    if (it == regret_groups.end()) {
      regret_groups[key] = {row.regret};
      keys.push_back({row.method, row.n});
    } else {
      it->second.push_back(row.regret);
    }
  }
  std::sort(keys.begin(), keys.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return static_cast<int>(a.first) < static_cast<int>(b.first);
    return a.second < b.second;
  });

  SummaryTable out;
  for (const auto& [method, n] : keys) {
    std::vector<double> regrets = regret_groups[{static_cast<int>(method), n}];
    std::sort(regrets.begin(), regrets.end());
    SummaryRow row;
    row.method = method;
    row.n = n;
    double sum = 0.0;
    for (double r : regrets) sum += r;
    row.mean = sum / static_cast<double>(regrets.size());
    row.q25 = quantile_type7(regrets, 0.25);
    row.q50 = quantile_type7(regrets, 0.50);
    row.q75 = quantile_type7(regrets, 0.75);
    double m1 = 0.0, m2 = 0.0, m3 = 0.0;
    for (double r : regrets) {
      const double nr = n * r;
      m1 += nr;
      m2 += nr * nr;
      m3 += nr * nr * nr;
    }
    const double count = static_cast<double>(regrets.size());
    row.m1 = m1 / count;
    row.m2 = m2 / count;
    row.m3 = m3 / count;
    for (double threshold : c1) {
      int over = 0;
      for (double r : regrets)
        if (n * r > threshold) ++over;
      row.tails.push_back(static_cast<double>(over) / count);
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::map<double, RegretTable> gamma_sweep(const ExperimentConfig& base,
                                          const std::vector<double>& gammas) {
  std::map<double, RegretTable> out;
  for (double g : gammas) {
    ExperimentConfig cfg = base;
    cfg.setting = "gamma";
    cfg.gamma = g;
    out[g] = run_experiment(cfg);
  }
  return out;
}

CovModel cov_model_for(const ExperimentConfig& cfg) {
  if (is_newsvendor(cfg.problem)) {
    const bool constrained = cfg.problem == "newsvendor_constrained";
    const NewsvendorSpec spec = NewsvendorSpec::uniform_costs(
        cfg.p, cfg.h, cfg.b,
        constrained ? std::optional<double>(cfg.capacity) : std::nullopt);
    ScaledMeanGaussianFamily family;
    family.p = cfg.p;
    family.sigmas.assign(cfg.p, 1.0);
    return compute_cov_model(spec, family, cfg.theta0);
  }
  if (cfg.problem == "newsvendor_contextual") {
    ContextualNewsvendorSpec spec;
    spec.h = cfg.h;
    spec.b = cfg.b;
    LinearGaussianFamily family;
    UniformFeatureLaw law;
    return compute_cov_model(spec, family, {2.0, 0.5, 0.5}, law);
  }
  PortfolioSpec spec;
  spec.num_assets = cfg.p - 1;
  spec.alpha = cfg.alpha;
  MeanVecGaussianFamily family;
  for (double v : portfolio_true_variances(spec.num_assets))
    family.sigmas.push_back(std::sqrt(v));
  return compute_cov_model(spec, family, portfolio_true_means(spec.num_assets));
}

MisspecLimits misspec_limits_for(const ExperimentConfig& cfg) {
  if (!is_newsvendor(cfg.problem))
    throw std::invalid_argument("misspec_limits_for: newsvendor problems only");
  const bool constrained = cfg.problem == "newsvendor_constrained";
  const NewsvendorSpec spec = NewsvendorSpec::uniform_costs(
      cfg.p, cfg.h, cfg.b, constrained ? std::optional<double>(cfg.capacity) : std::nullopt);
  ScaledMeanGaussianFamily assumed;
  assumed.p = cfg.p;
  assumed.sigmas = assumed_nv_sigmas(cfg);
  std::vector<double> mu(cfg.p), sg(cfg.p, 1.0);
  for (int j = 0; j < cfg.p; ++j) mu[j] = (j + 1) * cfg.theta0;
  return misspec_limits(spec, assumed, mu, sg);
}

std::vector<LimitComparisonEntry> limit_comparison(const ExperimentConfig& config, int n_large,
                                                   int m_samples) {
  if (n_large < 2000) throw std::invalid_argument("limit_comparison: n_large must be >= 2000");
  ExperimentConfig cfg = config;
  cfg.n_list = {n_large};
  const RegretTable table = run_experiment(cfg);
  const CovModel cov = cov_model_for(cfg);

  std::vector<LimitComparisonEntry> out;
  const std::vector<Method> methods = cfg.effective_methods();
  for (std::size_t m = 0; m < methods.size(); ++m) {
    std::vector<double> empirical;
    for (const RegretRow& row : table)
      if (row.method == methods[m]) empirical.push_back(row.n_regret);
    const LimitLaw law = limit_law(cov, methods[m]);
    RngStream rng(cfg.master_seed, 0xF17ADE55ULL + m);
    std::vector<double> draws(m_samples);
    for (int i = 0; i < m_samples; ++i) draws[i] = law.sample(rng);

    std::sort(empirical.begin(), empirical.end());
    std::sort(draws.begin(), draws.end());
    // Two-sample KS distance over the merged support.
    double ks = 0.0;
    std::size_t ia = 0, ib = 0;
    while (ia < empirical.size() && ib < draws.size()) {
      const double t = std::min(empirical[ia], draws[ib]);
      while (ia < empirical.size() && empirical[ia] <= t) ++ia;
      while (ib < draws.size() && draws[ib] <= t) ++ib;
      const double fa = static_cast<double>(ia) / static_cast<double>(empirical.size());
      const double fb = static_cast<double>(ib) / static_cast<double>(draws.size());
      ks = std::max(ks, std::fabs(fa - fb));
    }

    LimitComparisonEntry entry;
    entry.method = methods[m];
    entry.ks_distance = ks;
    double sum = 0.0;
    for (double v : empirical) sum += v;
    entry.empirical_mean = sum / static_cast<double>(empirical.size());
    entry.law_mean = law.mean();
    out.push_back(entry);
  }
  return out;
}

}  // namespace ddso
