#include "ddso/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ddso {

const char* to_string(Method m) {
  switch (m) {
    case Method::SAA: return "SAA";
    case Method::ETO: return "ETO";
    case Method::IEO: return "IEO";
  }
  return "?";
}

namespace {

void check_nv_data(const NewsvendorSpec& spec, const Dataset& data) {
  if (data.size() == 0) throw std::invalid_argument("fit: empty dataset");
  for (const auto& rec : data.z) {
    if (rec.size() != static_cast<std::size_t>(spec.p))
      throw std::invalid_argument("fit: record dimension mismatch");
  }
}

// Smallest minimizer of sum_i h (w - z_i)^+ + b (z_i - w)^+ over w: the
// ceil(n b / (b + h))-th order statistic.
double empirical_fractile(std::vector<double> zs, double h, double b) {
  const std::size_t n = zs.size();
  const double target = static_cast<double>(n) * b / (b + h);
  std::size_t k = static_cast<std::size_t>(std::ceil(target - 1e-12));
  if (k < 1) k = 1;
  if (k > n) k = n;
  std::nth_element(zs.begin(), zs.begin() + (k - 1), zs.end());
  return zs[k - 1];
}

// Smallest minimizer of a convex piecewise-linear function given hinge
// breakpoints and per-hinge slopes: each term contributes slope -down below
// its breakpoint and +up above it.
struct Hinge {
  double at;
  double down;  // slope contribution below (negative direction magnitude)
  double up;    // slope contribution above
};

double piecewise_linear_argmin(std::vector<Hinge> hinges) {
  std::sort(hinges.begin(), hinges.end(),
            [](const Hinge& a, const Hinge& b) { return a.at < b.at; });
  double slope = 0.0;
  for (const Hinge& h : hinges) slope -= h.down;
  if (slope >= 0.0) return hinges.front().at;
  for (const Hinge& h : hinges) {
    slope += h.down + h.up;
    if (slope >= 0.0) return h.at;
  }
  return hinges.back().at;
}

}  // namespace

double nv_empirical_cost(const NewsvendorSpec& spec, const Decision& w, const Dataset& data) {
  double c = 0.0;
  for (const auto& rec : data.z) c += nv_cost(spec, w, rec);
  return c;
}

LpProblem build_nv_saa_lp(const NewsvendorSpec& spec, const Dataset& data) {
  check_nv_data(spec, data);
  const std::size_t n = data.size();
  const std::size_t p = static_cast<std::size_t>(spec.p);
  const std::size_t nv = p + 2 * n * p;  // w, u, v
  const std::size_t rows = 2 * n * p + (spec.capacity ? 1 : 0);

  LpProblem lp;
  lp.c.assign(nv, 0.0);
  lp.free_var.assign(nv, false);
  for (std::size_t j = 0; j < p; ++j) lp.free_var[j] = true;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      lp.c[p + i * p + j] = spec.h[j];
      lp.c[p + n * p + i * p + j] = spec.b[j];
    }
  }
  lp.a_ub = Matrix(rows, nv);
  lp.b_ub.assign(rows, 0.0);
  std::size_t r = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      // u_ij >= w_j - z_ij
      lp.a_ub(r, j) = 1.0;
      lp.a_ub(r, p + i * p + j) = -1.0;
      lp.b_ub[r] = data.z[i][j];
      ++r;
      // v_ij >= z_ij - w_j
      lp.a_ub(r, j) = -1.0;
      lp.a_ub(r, p + n * p + i * p + j) = -1.0;
      lp.b_ub[r] = -data.z[i][j];
      ++r;
    }
  }
  if (spec.capacity) {
    for (std::size_t j = 0; j < p; ++j) lp.a_ub(r, j) = 1.0;
    lp.b_ub[r] = *spec.capacity;
  }
  return lp;
}

LpProblem build_nv_ieo_lp(const NewsvendorSpec& spec, const ScaledMeanGaussianFamily& family,
                          const Dataset& data) {
  check_nv_data(spec, data);
  if (spec.capacity) throw std::invalid_argument("build_nv_ieo_lp: unconstrained problems only");
  const std::size_t n = data.size();
  const std::size_t p = static_cast<std::size_t>(spec.p);
  const std::size_t nv = 1 + 2 * n * p;  // theta, u, v

  std::vector<double> shift(p);
  for (std::size_t j = 0; j < p; ++j)
    shift[j] = family.sigmas[j] * norm_quantile(spec.b[j] / (spec.b[j] + spec.h[j]));

  LpProblem lp;
  lp.c.assign(nv, 0.0);
  lp.free_var.assign(nv, false);
  lp.free_var[0] = true;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      lp.c[1 + i * p + j] = spec.h[j];
      lp.c[1 + n * p + i * p + j] = spec.b[j];
    }
  }
  lp.a_ub = Matrix(2 * n * p, nv);
  lp.b_ub.assign(2 * n * p, 0.0);
  std::size_t r = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      const double jj = static_cast<double>(j + 1);
      // u_ij >= j theta + shift_j - z_ij
      lp.a_ub(r, 0) = jj;
      lp.a_ub(r, 1 + i * p + j) = -1.0;
      lp.b_ub[r] = data.z[i][j] - shift[j];
      ++r;
      // v_ij >= z_ij - j theta - shift_j
      lp.a_ub(r, 0) = -jj;
      lp.a_ub(r, 1 + n * p + i * p + j) = -1.0;
      lp.b_ub[r] = shift[j] - data.z[i][j];
      ++r;
    }
  }
  return lp;
}

FitResult saa(const NewsvendorSpec& spec, const Dataset& data) {
  check_nv_data(spec, data);
  FitResult fit;
  fit.method = Method::SAA;
  if (!spec.capacity) {
    fit.decision.w.resize(spec.p);
    std::vector<double> zs(data.size());
    for (int j = 0; j < spec.p; ++j) {
      for (std::size_t i = 0; i < data.size(); ++i) zs[i] = data.z[i][j];
      fit.decision.w[j] = empirical_fractile(zs, spec.h[j], spec.b[j]);
    }
    fit.objective = nv_empirical_cost(spec, fit.decision, data);
    return fit;
  }
  const LpProblem lp = build_nv_saa_lp(spec, data);
  const LpSolution sol = lp_solve(lp);
  if (sol.status != LpStatus::Optimal) {
    throw std::runtime_error(std::string("saa: capacity LP terminated with status ") +
                             to_string(sol.status));
  }
  fit.decision.w.assign(sol.x.begin(), sol.x.begin() + spec.p);
  fit.objective = sol.objective;
  fit.solver_status = to_string(sol.status);
  return fit;
}

FitResult eto(const NewsvendorSpec& spec, const ScaledMeanGaussianFamily& family,
              const Dataset& data) {
  check_nv_data(spec, data);
  FitResult fit;
  fit.method = Method::ETO;
  const double theta_hat = mle(family, data);
  fit.theta = {theta_hat};
  if (spec.capacity) {
    fit.decision = nv_constrained_oracle(family, theta_hat, spec).w;
  } else {
    fit.decision = nv_oracle_decision(family, theta_hat, spec);
  }
  fit.objective = nv_empirical_cost(spec, fit.decision, data);
  return fit;
}

FitResult ieo(const NewsvendorSpec& spec, const ScaledMeanGaussianFamily& family,
              const Dataset& data, const IeoGridOptions& grid) {
  check_nv_data(spec, data);
  FitResult fit;
  fit.method = Method::IEO;

  if (!spec.capacity) {
    // Exact minimizer of the piecewise-linear empirical cost in theta
    // (the LP over (theta, u, v) reaches the same optimum; tests check it).
    std::vector<Hinge> hinges;
    hinges.reserve(data.size() * spec.p);
    for (int j = 0; j < spec.p; ++j) {
      const double jj = j + 1.0;
      const double shift = family.sigmas[j] * norm_quantile(spec.b[j] / (spec.b[j] + spec.h[j]));
      for (std::size_t i = 0; i < data.size(); ++i) {
        hinges.push_back({(data.z[i][j] - shift) / jj, jj * spec.b[j], jj * spec.h[j]});
      }
    }
    const double theta_hat = piecewise_linear_argmin(std::move(hinges));
    fit.theta = {theta_hat};
    fit.decision = nv_oracle_decision(family, theta_hat, spec);
    fit.objective = nv_empirical_cost(spec, fit.decision, data);
    return fit;
  }

  const double theta_eto = mle(family, data);
  double lo = theta_eto - grid.radius;
  double hi = theta_eto + grid.radius;
  if (grid.literal_paper_range) {
    lo = 2.0;
    hi = 4.0;
  }
  const auto objective = [&](double theta) {
    const Decision w = nv_constrained_oracle(family, theta, spec).w;
    return nv_empirical_cost(spec, w, data);
  };
  auto [theta_grid, value_grid] = grid_search_1d(objective, lo, hi, grid.step);
  const double theta_ref = golden_refine(objective, std::max(lo, theta_grid - grid.step),
                                         std::min(hi, theta_grid + grid.step), 1e-7);
  double theta_hat = theta_grid;
  double value = value_grid;
  const double value_ref = objective(theta_ref);
  if (value_ref < value) {
    theta_hat = theta_ref;
    value = value_ref;
  }
  fit.theta = {theta_hat};
  fit.decision = nv_constrained_oracle(family, theta_hat, spec).w;
  fit.objective = value;
  return fit;
}

FitResult saa(const ContextualNewsvendorSpec&, const Dataset&) {
  throw std::invalid_argument(
      "saa: unsupported for contextual problems (an unrestricted feature-to-decision map overfits)");
}

FitResult eto(const ContextualNewsvendorSpec& spec, const LinearGaussianFamily& family,
              const Dataset& data) {
  (void)spec;
  FitResult fit;
  fit.method = Method::ETO;
  fit.theta = mle(family, data);
  fit.objective = loglik(family, fit.theta, data);
  return fit;
}

LpProblem build_ctx_ieo_lp(const ContextualNewsvendorSpec& spec,
                           const LinearGaussianFamily& family, const Dataset& data) {
  if (data.size() == 0 || !data.has_features())
    throw std::invalid_argument("build_ctx_ieo_lp: contextual data required");
  const std::size_t n = data.size();
  const std::size_t q = static_cast<std::size_t>(family.feature_dim) + 1;
  const double shift = family.sigma * norm_quantile(spec.b / (spec.b + spec.h));
  const std::size_t nv = q + 2 * n;

  LpProblem lp;
  lp.c.assign(nv, 0.0);
  lp.free_var.assign(nv, false);
  for (std::size_t k = 0; k < q; ++k) lp.free_var[k] = true;
  for (std::size_t i = 0; i < n; ++i) {
    lp.c[q + i] = spec.h;
    lp.c[q + n + i] = spec.b;
  }
  lp.a_ub = Matrix(2 * n, nv);
  lp.b_ub.assign(2 * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    // u_i >= (1, x_i) theta + shift - z_i ; v_i >= z_i - (1, x_i) theta - shift
    lp.a_ub(2 * i, 0) = 1.0;
    lp.a_ub(2 * i + 1, 0) = -1.0;
    for (std::size_t k = 1; k < q; ++k) {
      lp.a_ub(2 * i, k) = data.x[i][k - 1];
      lp.a_ub(2 * i + 1, k) = -data.x[i][k - 1];
    }
    lp.a_ub(2 * i, q + i) = -1.0;
    lp.a_ub(2 * i + 1, q + n + i) = -1.0;
    lp.b_ub[2 * i] = data.z[i][0] - shift;
    lp.b_ub[2 * i + 1] = shift - data.z[i][0];
  }
  return lp;
}

FitResult ieo(const ContextualNewsvendorSpec& spec, const LinearGaussianFamily& family,
              const Dataset& data) {
  const LpProblem lp = build_ctx_ieo_lp(spec, family, data);
  const LpSolution sol = lp_solve(lp);
  if (sol.status != LpStatus::Optimal) {
    throw std::runtime_error(std::string("ieo: contextual LP terminated with status ") +
                             to_string(sol.status));
  }
  FitResult fit;
  fit.method = Method::IEO;
  const std::size_t q = static_cast<std::size_t>(family.feature_dim) + 1;
  fit.theta.assign(sol.x.begin(), sol.x.begin() + q);
  fit.objective = sol.objective;
  fit.solver_status = to_string(sol.status);
  return fit;
}

namespace {

std::vector<double> double_least_squares_fit(const Dataset& data) {
  LinearGaussianFamily helper;
  helper.feature_dim = static_cast<int>(data.x.front().size());
  std::vector<double> theta = mle(helper, data);
  for (double& c : theta) c *= 2.0;
  return theta;
}

double ctx_uniform_empirical_cost(const ContextualNewsvendorSpec& spec,
                                  const std::vector<double>& theta, const Dataset& data) {
  const double ratio = spec.b / (spec.b + spec.h);
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    double upper = theta[0];
    for (std::size_t k = 0; k < data.x[i].size(); ++k) upper += theta[k + 1] * data.x[i][k];
    if (!(upper > 0.0)) return std::numeric_limits<double>::infinity();
    const double w = ratio * upper;
    const double gap = w - data.z[i][0];
    total += (gap >= 0.0) ? spec.h * gap : -spec.b * gap;
  }
  return total / static_cast<double>(data.size());
}

}  // namespace

FitResult eto(const ContextualNewsvendorSpec& spec, const LinearUniformFamily& family,
              const Dataset& data) {
  (void)spec;
  FitResult fit;
  fit.method = Method::ETO;
  fit.theta = mle(family, data);
  fit.objective = loglik(family, fit.theta, data);
  return fit;
}

FitResult ieo(const ContextualNewsvendorSpec& spec, const LinearUniformFamily& family,
              const Dataset& data) {
  (void)family;
  if (data.size() == 0 || !data.has_features())
    throw std::invalid_argument("ieo: contextual data required");
  const auto objective = [&](const std::vector<double>& theta) {
    return ctx_uniform_empirical_cost(spec, theta, data);
  };

  const std::vector<double> seed = double_least_squares_fit(data);
  double nm_scale = 0.0;
  for (double c : seed) nm_scale = std::max(nm_scale, std::fabs(c));
  nm_scale = std::max(0.05 * nm_scale, 1e-3);

  double best_val = std::numeric_limits<double>::infinity();
  std::vector<double> best = seed;
  for (double factor : {0.8, 0.9, 1.0, 1.1, 1.2}) {
    std::vector<double> start = seed;
    for (double& c : start) c *= factor;
    if (!std::isfinite(objective(start))) continue;
    const NelderMeadResult r = nelder_mead(objective, start, nm_scale, 1e-9, 3000);
    if (r.value < best_val) {
      best_val = r.value;
      best = r.x;
    }
  }
  if (!std::isfinite(best_val)) throw std::runtime_error("ieo(uniform): no feasible start");
  FitResult fit;
  fit.method = Method::IEO;
  fit.theta = best;
  fit.objective = best_val;
  return fit;
}

double portfolio_empirical_cost(const PortfolioSpec& spec, const Decision& w,
                                const Dataset& data) {
  double total = 0.0;
  for (const auto& rec : data.z) total += portfolio_cost(spec, w, rec);
  return total / static_cast<double>(data.size());
}

namespace {

struct PortfolioMoments {
  std::vector<double> mean;
  Matrix cov;  // 1/n-normalized empirical covariance
};

PortfolioMoments portfolio_moments(const PortfolioSpec& spec, const Dataset& data) {
  const std::size_t k = static_cast<std::size_t>(spec.num_assets);
  const std::size_t n = data.size();
  if (n == 0) throw std::invalid_argument("fit: empty dataset");
  PortfolioMoments m;
  m.mean.assign(k, 0.0);
  for (const auto& rec : data.z) {
    if (rec.size() != k) throw std::invalid_argument("fit: record dimension mismatch");
    for (std::size_t j = 0; j < k; ++j) m.mean[j] += rec[j];
  }
  for (double& v : m.mean) v /= static_cast<double>(n);
  m.cov = Matrix(k, k);
  for (const auto& rec : data.z) {
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b)
        m.cov(a, b) += (rec[a] - m.mean[a]) * (rec[b] - m.mean[b]);
  }
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) m.cov(a, b) /= static_cast<double>(n);
  return m;
}

double power_iteration_max_eig(const Matrix& m) {
  const std::size_t k = m.rows();
  std::vector<double> v(k, 1.0 / std::sqrt(static_cast<double>(k)));
  double lam = 0.0;
  for (int it = 0; it < 60; ++it) {
    std::vector<double> w = mat_vec(m, v);
    double norm = std::sqrt(dot(w, w));
    if (norm < 1e-30) return 0.0;
    for (double& x : w) x /= norm;
    lam = dot(w, mat_vec(m, w));
    v = std::move(w);
  }
  return lam;
}

}  // namespace

FitResult saa(const PortfolioSpec& spec, const Dataset& data) {
  const PortfolioMoments m = portfolio_moments(spec, data);
  const std::size_t k = static_cast<std::size_t>(spec.num_assets);

  // With the auxiliary coordinate eliminated at its empirical optimum
  // w_p = w . zbar, the objective is alpha w^T Cov w - zbar . w.
  const double lam_max = power_iteration_max_eig(m.cov);
  const double step = 1.0 / (2.0 * spec.alpha * std::max(lam_max, 1e-9));
  std::vector<double> w(k, 1.0 / static_cast<double>(k));
  for (int it = 0; it < 10000; ++it) {
    std::vector<double> grad = mat_vec(m.cov, w);
    for (std::size_t j = 0; j < k; ++j) grad[j] = 2.0 * spec.alpha * grad[j] - m.mean[j];
    for (std::size_t j = 0; j < k; ++j) w[j] -= step * grad[j];
    w = project_to_simplex(std::move(w));
  }
  FitResult fit;
  fit.method = Method::SAA;
  fit.decision.w = w;
  fit.decision.w.push_back(std::max(dot(w, m.mean), 0.0));
  fit.objective = portfolio_empirical_cost(spec, fit.decision, data);
  return fit;
}

FitResult eto(const PortfolioSpec& spec, const MeanVecGaussianFamily& family, const Dataset& data) {
  FitResult fit;
  fit.method = Method::ETO;
  fit.theta = mle(family, data);
  fit.decision = portfolio_oracle_decision(family, fit.theta, spec);
  fit.objective = portfolio_empirical_cost(spec, fit.decision, data);
  return fit;
}

FitResult ieo(const PortfolioSpec& spec, const MeanVecGaussianFamily& family, const Dataset& data) {
  if (data.size() == 0) throw std::invalid_argument("fit: empty dataset");
  const std::vector<double> theta_eto = mle(family, data);
  const auto objective = [&](const std::vector<double>& theta) {
    const Decision w = portfolio_oracle_decision(family, theta, spec);
    return portfolio_empirical_cost(spec, w, data);
  };

  double mag = 0.0;
  for (double c : theta_eto) mag = std::max(mag, std::fabs(c));
  const double delta = std::max(0.1 * mag, 0.1);

  std::vector<std::vector<double>> starts;
  starts.push_back(theta_eto);
  for (double f : {0.9, 1.1}) {
    std::vector<double> s = theta_eto;
    for (double& c : s) c *= f;
    starts.push_back(std::move(s));
  }
  for (std::size_t j = 0; j < theta_eto.size() && j < 2; ++j) {
    std::vector<double> s = theta_eto;
    s[j] += delta;
    starts.push_back(s);
    s[j] -= 2.0 * delta;
    starts.push_back(std::move(s));
  }

  double best_val = std::numeric_limits<double>::infinity();
  std::vector<double> best = theta_eto;
  for (const auto& start : starts) {
    const NelderMeadResult r = nelder_mead(objective, start, 0.5 * delta, 1e-9, 3000);
    if (r.value < best_val) {
      best_val = r.value;
      best = r.x;
    }
  }
  FitResult fit;
  fit.method = Method::IEO;
  fit.theta = best;
  fit.decision = portfolio_oracle_decision(family, best, spec);
  fit.objective = best_val;
  return fit;
}

}  // namespace ddso
