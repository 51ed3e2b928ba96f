// Monte Carlo experiment engine: regret distributions over replications for
// the four problem setups, summaries (quantiles, moments, tail
// probabilities), misspecification sweeps, and comparisons against the
// limiting laws.
//
// Determinism contract: the stream for cell (n, rep) is
// RngStream(master_seed, (n << 32) | rep), every method within a cell sees
// the same dataset, and rows are written into preallocated slots in a fixed
// order, so results are byte-identical for any worker count.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ddso/asymptotics.hpp"
#include "ddso/estimators.hpp"

namespace ddso {

struct ExperimentConfig {
  std::string problem = "newsvendor";  // newsvendor | newsvendor_constrained |
                                       // newsvendor_contextual | portfolio
  std::string setting = "well";        // well | mis | gamma
  double gamma = 1.0;                  // only used when setting == "gamma"

  int p = 5;            // products; for the portfolio, risky assets = p - 1
  double h = 1.0;
  double b = 5.0;
  double capacity = 40.0;
  double alpha = 0.7;
  double theta0 = 3.0;  // scaled-mean ground truth

  std::vector<Method> methods;  // defaulted per problem when empty
  std::vector<int> n_list;
  int replications = 50;
  std::uint64_t master_seed = 20240901;
  std::vector<double> c1_thresholds = {0.5, 1.0, 1.5};
  int workers = 1;
  bool ieo_literal_grid = false;  // restore the fixed [2,4] IEO grid

  std::vector<Method> effective_methods() const;
  void validate() const;  // throws std::invalid_argument with all offending fields
};

struct RegretRow {
  std::string problem;
  std::string setting;
  Method method = Method::SAA;
  int n = 0;
  int rep = 0;
  double regret = 0.0;
  double n_regret = 0.0;
};

using RegretTable = std::vector<RegretRow>;

struct SummaryRow {
  Method method = Method::SAA;
  int n = 0;
  // mean and quantiles of the regret; raw moments and tails of n * regret.
  double mean = 0.0;
  double q25 = 0.0;
  double q50 = 0.0;
  double q75 = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
  double m3 = 0.0;
  std::vector<double> tails;  // P(n regret > c1) per configured threshold
};

using SummaryTable = std::vector<SummaryRow>;

RegretTable run_experiment(const ExperimentConfig& config);

SummaryTable summarize(const RegretTable& table, const std::vector<double>& c1_thresholds);

// One experiment per gamma; the ground truth is fixed and only the assumed
// family interpolates, so gamma = 1 reproduces the well-specified run.
std::map<double, RegretTable> gamma_sweep(const ExperimentConfig& base,
                                          const std::vector<double>& gammas);

struct LimitComparisonEntry {
  Method method = Method::SAA;
  double ks_distance = 0.0;
  double empirical_mean = 0.0;  // mean of n * regret over replications
  double law_mean = 0.0;        // (1/2) tr(H Sigma)
};

// Empirical n * regret at one large n against m_samples draws of the
// matching limit law (two-sample Kolmogorov-Smirnov distance).
std::vector<LimitComparisonEntry> limit_comparison(const ExperimentConfig& config, int n_large,
                                                   int m_samples);

// The covariance model matching a (well-specified) config; used by the
// asymptotics subcommand and the limit comparison.
CovModel cov_model_for(const ExperimentConfig& config);

// Misspecification limits for the configured newsvendor problem.
MisspecLimits misspec_limits_for(const ExperimentConfig& config);

// Type-7 quantile (linear interpolation) of a copy of the values.
double quantile_type7(std::vector<double> values, double prob);

}  // namespace ddso
