#include "ddso/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ddso/optim.hpp"
#include "ddso/stats.hpp"

namespace ddso {

namespace {

void check_nv_spec(const NewsvendorSpec& spec) {
  if (spec.p < 1 || spec.h.size() != static_cast<std::size_t>(spec.p) ||
      spec.b.size() != static_cast<std::size_t>(spec.p)) {
    throw std::invalid_argument("newsvendor spec: cost vectors must have length p");
  }
  for (int j = 0; j < spec.p; ++j) {
    if (!(spec.h[j] > 0.0) || !(spec.b[j] > 0.0))
      throw std::domain_error("newsvendor spec: costs must be positive");
  }
  if (spec.capacity && !(*spec.capacity > 0.0))
    throw std::domain_error("newsvendor spec: capacity must be positive");
}

double simplex_gap(const std::vector<double>& w) {
  double s = 0.0, neg = 0.0;
  for (double x : w) {
    s += x;
    neg = std::min(neg, x);
  }
  return std::max(std::fabs(s - 1.0), -neg);
}

// Shared core of the capacity-constrained fractile solve: demands are
// N(mu_j, sigma_j^2) and the order vector at shadow price r is
// w_j(r) = F_j^{-1}((r + b_j)/(h_j + b_j)) clipped at zero. Bisection per the
// binary-search scheme, then a Newton polish on r (the sum is steep in r when
// the binding fractile is extreme, so the raw r-gap stop can leave a visible
// capacity residual), and finally a common-quantile snap that lands the sum
// on C exactly while preserving the shared-fractile structure.
ConstrainedOracleResult capacity_fractile_solve(const NewsvendorSpec& spec,
                                                const std::vector<double>& mu,
                                                const std::vector<double>& sigma, double eps) {
  const double cap = *spec.capacity;
  const auto decision_at = [&](double r) {
    Decision d;
    d.w.resize(spec.p);
    for (int j = 0; j < spec.p; ++j) {
      const double frac = (r + spec.b[j]) / (spec.h[j] + spec.b[j]);
      const double f_at_zero = norm_cdf((0.0 - mu[j]) / sigma[j]);
      d.w[j] = (frac > f_at_zero) ? mu[j] + sigma[j] * norm_quantile(frac) : 0.0;
    }
    return d;
  };
  const auto total_of = [](const Decision& d) {
    return std::accumulate(d.w.begin(), d.w.end(), 0.0);
  };

  double r_lo = -*std::max_element(spec.b.begin(), spec.b.end());
  double r_hi = 0.0;
  double r = 0.5 * (r_lo + r_hi);
  Decision out = decision_at(r);
  while (r_hi - r_lo > eps) {
    r = 0.5 * (r_lo + r_hi);
    out = decision_at(r);
    const double total = total_of(out);
    if (std::fabs(total - cap) <= 1e-7) break;
    if (total < cap) {
      r_lo = r;
    } else {
      r_hi = r;
    }
  }

  // Newton refinement of total(r) = C; d w_j / d r = sigma_j / ((h+b) pdf).
  for (int it = 0; it < 12; ++it) {
    const double total = total_of(out);
    if (std::fabs(total - cap) <= 1e-12 * std::max(1.0, cap)) break;
    double slope = 0.0;
    for (int j = 0; j < spec.p; ++j) {
      if (out.w[j] > 0.0) {
        const double q = (out.w[j] - mu[j]) / sigma[j];
        slope += sigma[j] / ((spec.h[j] + spec.b[j]) * norm_pdf(q));
      }
    }
    if (!(slope > 0.0) || !std::isfinite(slope)) break;
    double r_next = r + (cap - total) / slope;
    r_next = std::min(std::max(r_next, -*std::max_element(spec.b.begin(), spec.b.end())), 0.0);
    if (r_next == r) break;
    r = r_next;
    out = decision_at(r);
  }

  // Common-quantile snap: shift every active product by sigma_j * delta so
  // the sum hits C exactly (bitwise for p = 1).
  double total = total_of(out);
  double active_sigma = 0.0;
  for (int j = 0; j < spec.p; ++j)
    if (out.w[j] > 0.0) active_sigma += sigma[j];
  if (active_sigma > 0.0 && std::fabs(total - cap) < 1e-3 * std::max(1.0, cap)) {
    const double delta = (cap - total) / active_sigma;
    for (int j = 0; j < spec.p; ++j)
      if (out.w[j] > 0.0) out.w[j] = std::max(out.w[j] + sigma[j] * delta, 0.0);
  } else if (total > cap) {
    // Pathological landing; retreat to the feasible side of the bracket.
    out = decision_at(r_lo);
    r = r_lo;
  }
  return {out, r};
}

}  // namespace

NewsvendorSpec NewsvendorSpec::uniform_costs(int p, double h, double b,
                                             std::optional<double> capacity) {
  NewsvendorSpec s;
  s.p = p;
  s.h.assign(p, h);
  s.b.assign(p, b);
  s.capacity = capacity;
  check_nv_spec(s);
  return s;
}

double nv_cost(const NewsvendorSpec& spec, const Decision& w, const std::vector<double>& z) {
  check_nv_spec(spec);
  if (w.w.size() != static_cast<std::size_t>(spec.p) || z.size() != w.w.size())
    throw std::invalid_argument("nv_cost: dimension mismatch");
  double c = 0.0;
  for (int j = 0; j < spec.p; ++j) {
    const double over = w.w[j] - z[j];
    c += (over >= 0.0) ? spec.h[j] * over : -spec.b[j] * over;
  }
  return c;
}

double nv_expected_cost(const NewsvendorSpec& spec, const Decision& w,
                        const std::vector<double>& mu, const std::vector<double>& sigma) {
  check_nv_spec(spec);
  if (w.w.size() != static_cast<std::size_t>(spec.p) || mu.size() != w.w.size() ||
      sigma.size() != w.w.size())
    throw std::invalid_argument("nv_expected_cost: dimension mismatch");
  double c = 0.0;
  for (int j = 0; j < spec.p; ++j) {
    if (!(sigma[j] > 0.0)) throw std::domain_error("nv_expected_cost: sigma must be positive");
    const double d = (w.w[j] - mu[j]) / sigma[j];
    c += sigma[j] * ((spec.h[j] + spec.b[j]) * normal_loss(d) + spec.h[j] * d);
  }
  return c;
}

Decision nv_oracle_decision(const ScaledMeanGaussianFamily& family, double theta,
                            const NewsvendorSpec& spec) {
  check_nv_spec(spec);
  if (family.p != spec.p) throw std::invalid_argument("nv_oracle_decision: p mismatch");
  Decision d;
  d.w.resize(spec.p);
  for (int j = 0; j < spec.p; ++j) {
    const double fractile = spec.b[j] / (spec.b[j] + spec.h[j]);
    d.w[j] = (j + 1) * theta + family.sigmas[j] * norm_quantile(fractile);
  }
  return d;
}

ConstrainedOracleResult nv_constrained_oracle(const ScaledMeanGaussianFamily& family, double theta,
                                              const NewsvendorSpec& spec, double eps) {
  check_nv_spec(spec);
  if (!(eps > 0.0)) throw std::domain_error("nv_constrained_oracle: eps must be > 0");
  if (!spec.capacity) throw std::invalid_argument("nv_constrained_oracle: spec has no capacity");
  const double cap = *spec.capacity;

  NewsvendorSpec unconstrained = spec;
  unconstrained.capacity.reset();
  Decision w = nv_oracle_decision(family, theta, unconstrained);
  const double total = std::accumulate(w.w.begin(), w.w.end(), 0.0);
  if (total <= cap) return {w, 0.0};

  std::vector<double> mu(spec.p);
  for (int j = 0; j < spec.p; ++j) mu[j] = (j + 1) * theta;
  return capacity_fractile_solve(spec, mu, family.sigmas, eps);
}

double ctx_oracle_decision(const LinearGaussianFamily& family, const std::vector<double>& theta,
                           const std::vector<double>& x, const ContextualNewsvendorSpec& spec) {
  const double fractile = spec.b / (spec.b + spec.h);
  double v = theta[0];
  for (std::size_t j = 0; j < x.size(); ++j) v += theta[j + 1] * x[j];
  return v + family.sigma * norm_quantile(fractile);
}

double ctx_uniform_oracle(const LinearUniformFamily&, const std::vector<double>& theta,
                          const std::vector<double>& x, const ContextualNewsvendorSpec& spec) {
  double upper = theta[0];
  for (std::size_t j = 0; j < x.size(); ++j) upper += theta[j + 1] * x[j];
  if (!(upper > 0.0))
    throw std::domain_error("ctx_uniform_oracle: nonpositive uniform upper bound");
  return spec.b / (spec.b + spec.h) * upper;
}

double portfolio_cost(const PortfolioSpec& spec, const Decision& w, const std::vector<double>& z) {
  const std::size_t k = static_cast<std::size_t>(spec.num_assets);
  if (w.w.size() != k + 1 || z.size() != k)
    throw std::invalid_argument("portfolio_cost: dimension mismatch");
  double wz = 0.0;
  for (std::size_t j = 0; j < k; ++j) wz += w.w[j] * z[j];
  const double spread = wz - w.w[k];
  return spec.alpha * spread * spread - wz;
}

double portfolio_true_expected_cost(const PortfolioSpec& spec, const std::vector<double>& w,
                                    const std::vector<double>& theta,
                                    const std::vector<double>& sig2) {
  const std::size_t k = static_cast<std::size_t>(spec.num_assets);
  if (w.size() != k || theta.size() != k || sig2.size() != k)
    throw std::invalid_argument("portfolio_true_expected_cost: dimension mismatch");
  if (simplex_gap(w) > 1e-6)
    throw std::domain_error("portfolio_true_expected_cost: weights not on the simplex");
  double c = 0.0;
  for (std::size_t j = 0; j < k; ++j)
    c += spec.alpha * sig2[j] * w[j] * w[j] - theta[j] * w[j];
  return c;
}

double portfolio_expected_cost_full(const PortfolioSpec& spec, const Decision& w,
                                    const std::vector<double>& theta,
                                    const std::vector<double>& sig2) {
  const std::size_t k = static_cast<std::size_t>(spec.num_assets);
  if (w.w.size() != k + 1 || theta.size() != k || sig2.size() != k)
    throw std::invalid_argument("portfolio_expected_cost_full: dimension mismatch");
  double mean = 0.0, var = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    mean += w.w[j] * theta[j];
    var += w.w[j] * w.w[j] * sig2[j];
  }
  const double gap = mean - w.w[k];
  return spec.alpha * (var + gap * gap) - mean;
}

Decision portfolio_oracle_decision(const MeanVecGaussianFamily& family,
                                   const std::vector<double>& theta, const PortfolioSpec& spec) {
  const std::size_t k = static_cast<std::size_t>(spec.num_assets);
  if (family.sigmas.size() != k || theta.size() != k)
    throw std::invalid_argument("portfolio_oracle_decision: dimension mismatch");
  std::vector<double> sig2(k);
  for (std::size_t j = 0; j < k; ++j) sig2[j] = family.sigmas[j] * family.sigmas[j];
  std::vector<double> w = water_filling_simplex(theta, sig2, spec.alpha);
  Decision d;
  d.w = w;
  d.w.push_back(dot(w, theta));
  return d;
}

NvGroundTruth make_nv_ground_truth(const NewsvendorSpec& spec, const std::vector<double>& mu,
                                   const std::vector<double>& sigma) {
  check_nv_spec(spec);
  NvGroundTruth t;
  t.spec = spec;
  t.mu = mu;
  t.sigma = sigma;
  // The population optimum is the oracle at the truth; mu_j = j * (mu_j / j)
  // only when demands follow the scaled-mean structure, so solve directly:
  // unconstrained fractile per product, or the binary search under capacity.
  Decision w;
  w.w.resize(spec.p);
  for (int j = 0; j < spec.p; ++j) {
    const double fractile = spec.b[j] / (spec.b[j] + spec.h[j]);
    w.w[j] = mu[j] + sigma[j] * norm_quantile(fractile);
  }
  if (spec.capacity) {
    const double total = std::accumulate(w.w.begin(), w.w.end(), 0.0);
    if (total > *spec.capacity) w = capacity_fractile_solve(spec, mu, sigma, 1e-12).w;
  }
  t.w_star = w;
  t.v_star = nv_expected_cost(spec, w, mu, sigma);
  return t;
}

PortfolioGroundTruth make_portfolio_ground_truth(const PortfolioSpec& spec,
                                                 const std::vector<double>& theta,
                                                 const std::vector<double>& sig2) {
  PortfolioGroundTruth t;
  t.spec = spec;
  t.theta = theta;
  t.sig2 = sig2;
  std::vector<double> w = water_filling_simplex(theta, sig2, spec.alpha);
  t.w_star.w = w;
  t.w_star.w.push_back(dot(w, theta));
  t.v_star = portfolio_expected_cost_full(spec, t.w_star, theta, sig2);
  return t;
}

double regret(const NvGroundTruth& truth, const Decision& w) {
  const double r = nv_expected_cost(truth.spec, w, truth.mu, truth.sigma) - truth.v_star;
  return std::max(r, 0.0);
}

double regret(const PortfolioGroundTruth& truth, const Decision& w) {
  const double r = portfolio_expected_cost_full(truth.spec, w, truth.theta, truth.sig2) - truth.v_star;
  return std::max(r, 0.0);
}

double regret(const CtxGroundTruth& truth,
              const std::function<double(const std::vector<double>&)>& policy, int grid_per_dim) {
  const ContextualNewsvendorSpec& spec = truth.spec;
  const double fractile = spec.b / (spec.b + spec.h);
  const double q = norm_quantile(fractile);
  const double lo = truth.feature_law.lo, hi = truth.feature_law.hi;
  const double cell = (hi - lo) / grid_per_dim;
  // Per-feature expected cost under N(m0(x), sigma^2):
  //   sigma [ (h+b) L(d) + h d ],  d = (w - m0)/sigma.
  const double optimal_unit = (spec.h + spec.b) * normal_loss(q) + spec.h * q;
  double acc = 0.0;
  std::vector<double> x(2);
  for (int i = 0; i < grid_per_dim; ++i) {
    x[0] = lo + (i + 0.5) * cell;
    for (int j = 0; j < grid_per_dim; ++j) {
      x[1] = lo + (j + 0.5) * cell;
      const double m0 = truth.theta0[0] + truth.theta0[1] * x[0] + truth.theta0[2] * x[1];
      const double d = (policy(x) - m0) / truth.sigma;
      const double unit = (spec.h + spec.b) * normal_loss(d) + spec.h * d;
      acc += truth.sigma * (unit - optimal_unit);
    }
  }
  const double r = acc / (static_cast<double>(grid_per_dim) * grid_per_dim);
  return std::max(r, 0.0);
}

}  // namespace ddso
