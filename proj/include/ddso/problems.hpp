// Decision problems: newsvendor (unconstrained, capacity-constrained,
// contextual) and the mean-variance portfolio. Cost functions, ground-truth
// expected costs in closed form, oracle decision maps, and regret.

#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "ddso/models.hpp"

namespace ddso {

struct NewsvendorSpec {
  int p = 1;
  std::vector<double> h;  // holding costs, elementwise > 0
  std::vector<double> b;  // backlog costs, elementwise > 0
  std::optional<double> capacity;

  static NewsvendorSpec uniform_costs(int p, double h, double b,
                                      std::optional<double> capacity = std::nullopt);
};

struct ContextualNewsvendorSpec {
  double h = 1.0;
  double b = 5.0;
  int feature_dim = 2;
};

struct PortfolioSpec {
  int num_assets = 2;  // p - 1 risky assets; the decision carries one auxiliary coordinate
  double alpha = 0.7;
};

struct Decision {
  std::vector<double> w;
};

// Ground truths cache the population optimum and its expected cost so regret
// evaluations are exact (no Monte Carlo noise).
struct NvGroundTruth {
  NewsvendorSpec spec;
  std::vector<double> mu;
  std::vector<double> sigma;
  Decision w_star;
  double v_star = 0.0;
};

struct CtxGroundTruth {
  ContextualNewsvendorSpec spec;
  std::vector<double> theta0;
  double sigma = 1.0;
  UniformFeatureLaw feature_law;
};

struct PortfolioGroundTruth {
  PortfolioSpec spec;
  std::vector<double> theta;  // true mean returns
  std::vector<double> sig2;   // true variances
  Decision w_star;            // risky weights plus optimal auxiliary coordinate
  double v_star = 0.0;
};

NvGroundTruth make_nv_ground_truth(const NewsvendorSpec& spec, const std::vector<double>& mu,
                                   const std::vector<double>& sigma);
PortfolioGroundTruth make_portfolio_ground_truth(const PortfolioSpec& spec,
                                                 const std::vector<double>& theta,
                                                 const std::vector<double>& sig2);

// sum_j h_j (w_j - z_j)^+ + b_j (z_j - w_j)^+
double nv_cost(const NewsvendorSpec& spec, const Decision& w, const std::vector<double>& z);

// Expected newsvendor cost under independent N(mu_j, sigma_j^2) demand:
// sum_j sigma_j [ (h_j + b_j) L(d_j) + h_j d_j ],  d_j = (w_j - mu_j)/sigma_j,
// with L the standard normal partial expectation.
double nv_expected_cost(const NewsvendorSpec& spec, const Decision& w,
                        const std::vector<double>& mu, const std::vector<double>& sigma);

// Closed-form unconstrained oracle: w_j = j theta + sigma_j Quantile(b/(b+h)).
Decision nv_oracle_decision(const ScaledMeanGaussianFamily& family, double theta,
                            const NewsvendorSpec& spec);

// Capacity-constrained oracle via binary search on the shadow price r in
// [-max b, 0]: w_j = F_j^{-1}((r + b_j)/(h_j + b_j)) clipped at zero, with r
// bisected until the capacity is met. Returns the decision and r (zero when
// the capacity is slack).
struct ConstrainedOracleResult {
  Decision w;
  double r = 0.0;
};
ConstrainedOracleResult nv_constrained_oracle(const ScaledMeanGaussianFamily& family, double theta,
                                              const NewsvendorSpec& spec, double eps = 1e-9);

// Contextual oracles.
double ctx_oracle_decision(const LinearGaussianFamily& family, const std::vector<double>& theta,
                           const std::vector<double>& x, const ContextualNewsvendorSpec& spec);
double ctx_uniform_oracle(const LinearUniformFamily& family, const std::vector<double>& theta,
                          const std::vector<double>& x, const ContextualNewsvendorSpec& spec);

// alpha (w^T (z,-1))^2 - w^T (z,0); w carries the auxiliary coordinate last.
double portfolio_cost(const PortfolioSpec& spec, const Decision& w, const std::vector<double>& z);

// Expected cost of risky weights with the auxiliary coordinate at its
// optimum: alpha sum_j sig2_j w_j^2 - sum_j theta_j w_j. Requires w on the
// simplex (within 1e-6).
double portfolio_true_expected_cost(const PortfolioSpec& spec, const std::vector<double>& w,
                                    const std::vector<double>& theta,
                                    const std::vector<double>& sig2);

// Expected cost of a full decision (risky weights + auxiliary coordinate),
// including the variance penalty from an off-optimum auxiliary value.
double portfolio_expected_cost_full(const PortfolioSpec& spec, const Decision& w,
                                    const std::vector<double>& theta,
                                    const std::vector<double>& sig2);

// Water-filling minimizer of the portfolio oracle; auxiliary coordinate set
// to sum_j w_j theta_j.
Decision portfolio_oracle_decision(const MeanVecGaussianFamily& family,
                                   const std::vector<double>& theta, const PortfolioSpec& spec);

// Regret v0(w) - v0(w*), clamped at zero against round-off.
double regret(const NvGroundTruth& truth, const Decision& w);
double regret(const PortfolioGroundTruth& truth, const Decision& w);

// Average regret of a contextual policy, integrated over the feature law by
// tensor midpoint quadrature on a grid_per_dim x grid_per_dim grid.
double regret(const CtxGroundTruth& truth, const std::function<double(const std::vector<double>&)>& policy,
              int grid_per_dim = 101);

}  // namespace ddso
