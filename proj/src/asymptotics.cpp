#include "ddso/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ddso {

namespace {

Matrix projector_from_rows(const Matrix& a, std::size_t dim) {
  if (a.rows() == 0) return Matrix::identity(dim);
  const Matrix aat = a * transpose(a);
  const Matrix inv = sym_inverse(aat);
  return Matrix::identity(dim) - transpose(a) * inv * a;
}

// Central-difference Jacobian of a vector map.
template <typename F>
Matrix fd_jacobian(const F& map, const std::vector<double>& theta, std::size_t out_dim) {
  Matrix j(out_dim, theta.size());
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double step = 1e-5 * (1.0 + std::fabs(theta[k]));
    std::vector<double> up = theta, dn = theta;
    up[k] += step;
    dn[k] -= step;
    const std::vector<double> fu = map(up);
    const std::vector<double> fd = map(dn);
    for (std::size_t i = 0; i < out_dim; ++i) j(i, k) = (fu[i] - fd[i]) / (2.0 * step);
  }
  return j;
}

// Central-difference Hessian of a scalar map; the wider step keeps the
// second difference above round-off of the closed-form objective values.
template <typename F>
Matrix fd_hessian(const F& f, const std::vector<double>& theta) {
  const std::size_t q = theta.size();
  Matrix h(q, q);
  const double f0 = f(theta);
  std::vector<double> step(q);
  for (std::size_t k = 0; k < q; ++k) step[k] = 5e-4 * (1.0 + std::fabs(theta[k]));
  for (std::size_t k = 0; k < q; ++k) {
    std::vector<double> up = theta, dn = theta;
    up[k] += step[k];
    dn[k] -= step[k];
    h(k, k) = (f(up) - 2.0 * f0 + f(dn)) / (step[k] * step[k]);
  }
  for (std::size_t k = 0; k < q; ++k) {
    for (std::size_t l = k + 1; l < q; ++l) {
      std::vector<double> pp = theta, pm = theta, mp = theta, mm = theta;
      pp[k] += step[k];
      pp[l] += step[l];
      pm[k] += step[k];
      pm[l] -= step[l];
      mp[k] -= step[k];
      mp[l] += step[l];
      mm[k] -= step[k];
      mm[l] -= step[l];
      const double v = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * step[k] * step[l]);
      h(k, l) = v;
      h(l, k) = v;
    }
  }
  return h;
}

// Variance of the hinge-cost subgradient h 1{z < w} - b 1{z > w} when
// P(z <= w) = tau.
double hinge_grad_variance(double h, double b, double tau) {
  const double mean = (h + b) * tau - b;
  const double second = h * h * tau + b * b * (1.0 - tau);
  return second - mean * mean;
}

Matrix random_psd(RngStream& rng, int n, double scale) {
  Matrix b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b(i, j) = scale * (2.0 * rng.next_unit() - 1.0);
  return b * transpose(b);
}

Matrix random_spd(RngStream& rng, int n, double scale) {
  Matrix m = random_psd(rng, n, scale);
  for (int i = 0; i < n; ++i) m(i, i) += 0.1;
  return m;
}

// Orthogonal projector of the requested rank from a random Gram-Schmidt basis.
Matrix random_projector(RngStream& rng, int n, int rank) {
  Matrix basis(n, rank);
  for (int k = 0; k < rank; ++k) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = 2.0 * rng.next_unit() - 1.0;
    for (int prev = 0; prev < k; ++prev) {
      double proj = 0.0;
      for (int i = 0; i < n; ++i) proj += v[i] * basis(i, prev);
      for (int i = 0; i < n; ++i) v[i] -= proj * basis(i, prev);
    }
    double norm = 0.0;
    for (int i = 0; i < n; ++i) norm += v[i] * v[i];
    norm = std::sqrt(norm);
    if (norm < 1e-8) {
      --k;  // degenerate draw, retry this column
      continue;
    }
    for (int i = 0; i < n; ++i) basis(i, k) = v[i] / norm;
  }
  return basis * transpose(basis);
}

std::vector<double> gaussian_vector(RngStream& rng, const Matrix& sqrt_cov) {
  const std::size_t n = sqrt_cov.rows();
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = norm_quantile(std::max(rng.next_unit(), 1e-17));
  return mat_vec(sqrt_cov, g);
}

double quad_form(const std::vector<double>& v, const Matrix& m) {
  return dot(v, mat_vec(m, v));
}

}  // namespace

CovModel compute_cov_model(const NewsvendorSpec& spec, const ScaledMeanGaussianFamily& family,
                           double theta0) {
  CovModel cov;
  const std::size_t p = static_cast<std::size_t>(spec.p);
  std::vector<double> mu(p), sigma(p);
  for (std::size_t j = 0; j < p; ++j) {
    mu[j] = (j + 1) * theta0;
    sigma[j] = family.sigmas[j];
  }

  const auto oracle = [&](const std::vector<double>& th) {
    if (spec.capacity) return nv_constrained_oracle(family, th[0], spec).w.w;
    return nv_oracle_decision(family, th[0], spec).w;
  };
  const std::vector<double> wstar = oracle({theta0});

  cov.h_omega = Matrix(p, p);
  cov.sigma_grad = Matrix(p, p);
  for (std::size_t j = 0; j < p; ++j) {
    const double q = (wstar[j] - mu[j]) / sigma[j];
    cov.h_omega(j, j) = (spec.h[j] + spec.b[j]) * norm_pdf(q) / sigma[j];
    // Unconstrained the fractile is b/(b+h) and this reduces to h_j b_j.
    cov.sigma_grad(j, j) = hinge_grad_variance(spec.h[j], spec.b[j], norm_cdf(q));
  }
  cov.h_bar = cov.h_omega;  // the capacity row is linear: no curvature term

  const double total = std::accumulate(wstar.begin(), wstar.end(), 0.0);
  cov.constrained = spec.capacity && total >= *spec.capacity - 1e-6;
  if (cov.constrained) {
    cov.a = Matrix(1, p);
    for (std::size_t j = 0; j < p; ++j) cov.a(0, j) = 1.0;
  }
  cov.phi = projector_from_rows(cov.a, p);

  cov.fisher = fisher_info(family, theta0);
  cov.jac = fd_jacobian(oracle, {theta0}, p);
  const auto value = [&](const std::vector<double>& th) {
    Decision d;
    d.w = oracle(th);
    return nv_expected_cost(spec, d, mu, sigma);
  };
  cov.h_theta = fd_hessian(value, {theta0});
  cov.s_theta = transpose(cov.jac) * cov.sigma_grad * cov.jac;
  return cov;
}

CovModel compute_cov_model(const ContextualNewsvendorSpec& spec,
                           const LinearGaussianFamily& family, const std::vector<double>& theta0,
                           const UniformFeatureLaw& law) {
  (void)theta0;  // the Gaussian policy Hessian does not depend on theta0
  CovModel cov;
  cov.fisher = fisher_info(family, law);
  const Matrix moments = (family.sigma * family.sigma) * cov.fisher;  // E[(1,x)^T (1,x)]
  const double q = norm_quantile(spec.b / (spec.b + spec.h));
  // theta-Hessian of the average cost: (h+b) pdf(q)/sigma * E[(1,x)^T(1,x)].
  cov.h_theta = ((spec.h + spec.b) * norm_pdf(q) / family.sigma) * moments;
  // theta-gradient covariance: subgradient variance h b at the fractile.
  cov.s_theta = (spec.h * spec.b) * moments;
  const std::size_t dim = moments.rows();
  cov.phi = Matrix::identity(dim);
  return cov;
}

Matrix portfolio_sigma_grad(const PortfolioSpec& spec, const std::vector<double>& theta,
                            const std::vector<double>& sig2, const std::vector<double>& wstar) {
  const std::size_t k = static_cast<std::size_t>(spec.num_assets);
  if (theta.size() != k || sig2.size() != k || wstar.size() != k + 1)
    throw std::invalid_argument("portfolio_sigma_grad: dimension mismatch");
  const double a = spec.alpha;
  // The spread w.z - w_p equals w.(z - theta) + (w.theta - w_p); the centered
  // gradient splits into a linear and a quadratic Gaussian part whose moments
  // are exact by Isserlis' theorem.
  const double gap = dot(std::vector<double>(wstar.begin(), wstar.end() - 1), theta) - wstar[k];
  double s2 = 0.0;
  for (std::size_t j = 0; j < k; ++j) s2 += wstar[j] * wstar[j] * sig2[j];

  Matrix out(k + 1, k + 1);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t l = 0; l < k; ++l) {
      // Cov of (theta_j + u_j)(2a(s + gap) - 1) across assets.
      const double lin = (j == l ? sig2[j] : 0.0) * (2.0 * a * gap - 1.0) * (2.0 * a * gap - 1.0)
                         + 2.0 * a * (2.0 * a * gap - 1.0) *
                               (theta[l] * wstar[j] * sig2[j] + theta[j] * wstar[l] * sig2[l])
                         + 4.0 * a * a * theta[j] * theta[l] * s2;
      const double quad =
          4.0 * a * a * ((j == l ? sig2[j] : 0.0) * s2 + wstar[j] * wstar[l] * sig2[j] * sig2[l]);
      out(j, l) = lin + quad;
    }
    const double cross = -2.0 * a * ((2.0 * a * gap - 1.0) * wstar[j] * sig2[j]
                                     + 2.0 * a * theta[j] * s2);
    out(j, k) = cross;
    out(k, j) = cross;
  }
  out(k, k) = 4.0 * a * a * s2;
  return out;
}

CovModel compute_cov_model(const PortfolioSpec& spec, const MeanVecGaussianFamily& family,
                           const std::vector<double>& theta0) {
  CovModel cov;
  const std::size_t k = static_cast<std::size_t>(spec.num_assets);
  const std::size_t p = k + 1;
  std::vector<double> sig2(k);
  for (std::size_t j = 0; j < k; ++j) sig2[j] = family.sigmas[j] * family.sigmas[j];

  const auto oracle = [&](const std::vector<double>& th) {
    return portfolio_oracle_decision(family, th, spec).w;
  };
  const std::vector<double> wstar = oracle(theta0);

  // Hessian of alpha E[(w.z - w_p)^2] - w.z over the full decision.
  cov.h_omega = Matrix(p, p);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b)
      cov.h_omega(a, b) = 2.0 * spec.alpha * ((a == b ? sig2[a] : 0.0) + theta0[a] * theta0[b]);
    cov.h_omega(a, k) = -2.0 * spec.alpha * theta0[a];
    cov.h_omega(k, a) = -2.0 * spec.alpha * theta0[a];
  }
  cov.h_omega(k, k) = 2.0 * spec.alpha;
  cov.h_bar = cov.h_omega;

  cov.constrained = true;  // the simplex equality is always active
  cov.a = Matrix(1, p);
  for (std::size_t j = 0; j < k; ++j) cov.a(0, j) = 1.0;
  cov.phi = projector_from_rows(cov.a, p);

  cov.sigma_grad = portfolio_sigma_grad(spec, theta0, sig2, wstar);

  cov.fisher = fisher_info(family, theta0);
  cov.jac = fd_jacobian(oracle, theta0, p);
  const auto value = [&](const std::vector<double>& th) {
    Decision d;
    d.w = oracle(th);
    return portfolio_expected_cost_full(spec, d, theta0, sig2);
  };
  cov.h_theta = fd_hessian(value, theta0);
  cov.s_theta = transpose(cov.jac) * cov.sigma_grad * cov.jac;
  return cov;
}

double LimitLaw::sample(RngStream& rng) const {
  const std::vector<double> n = gaussian_vector(rng, sqrt_sigma);
  return 0.5 * quad_form(n, h);
}

double LimitLaw::mean() const {
  const Matrix prod = h * sigma;
  double tr = 0.0;
  for (std::size_t i = 0; i < prod.rows(); ++i) tr += prod(i, i);
  return 0.5 * tr;
}

LimitLaw limit_law(const CovModel& cov, Method method) {
  LimitLaw law;
  switch (method) {
    case Method::ETO: {
      law.h = cov.h_theta;
      law.sigma = sym_inverse(cov.fisher);
      break;
    }
    case Method::IEO: {
      law.h = cov.h_theta;
      const Matrix hinv = sym_inverse(cov.h_theta);
      law.sigma = hinv * cov.s_theta * hinv;
      break;
    }
    case Method::SAA: {
      if (cov.h_omega.empty())
        throw std::invalid_argument("limit_law: SAA law needs a decision-space model");
      if (cov.constrained) {
        const Matrix proj_h = cov.phi * cov.h_bar * cov.phi;
        law.h = proj_h;
        const Matrix dagger = pinv(proj_h);
        law.sigma = dagger * cov.sigma_grad * dagger;
      } else {
        law.h = cov.h_omega;
        const Matrix hinv = sym_inverse(cov.h_omega);
        law.sigma = hinv * cov.sigma_grad * hinv;
      }
      break;
    }
  }
  law.sqrt_sigma = sym_sqrt(law.sigma);
  return law;
}

Matrix pinv(const Matrix& symmetric, double tol) {
  if (!is_symmetric(symmetric, 1e-8))
    throw std::invalid_argument("pinv: matrix must be symmetric");
  const EigenSym e = jacobi_eigen(symmetric);
  const std::size_t n = symmetric.rows();
  double max_abs = 0.0;
  for (double lam : e.values) max_abs = std::max(max_abs, std::fabs(lam));
  Matrix out(n, n);
  if (max_abs == 0.0) return out;
  for (std::size_t k = 0; k < n; ++k) {
    if (std::fabs(e.values[k]) <= tol * max_abs) continue;
    const double w = 1.0 / e.values[k];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out(i, j) += w * e.vectors(i, k) * e.vectors(j, k);
  }
  return out;
}

namespace {

// Sorted spectrum of S C S for the form matrix with square root S.
std::vector<double> form_spectrum(const Matrix& sqrt_form, const Matrix& cov) {
  return jacobi_eigen(sqrt_form * cov * sqrt_form).values;
}

double spectrum_slack(const Matrix& sqrt_form, const Matrix& lhs, const Matrix& rhs) {
  const std::vector<double> el = form_spectrum(sqrt_form, lhs);
  const std::vector<double> er = form_spectrum(sqrt_form, rhs);
  double slack = 1e300;
  for (std::size_t i = 0; i < el.size(); ++i) slack = std::min(slack, er[i] - el[i]);
  return slack;
}

}  // namespace

CheckReport check_lemma2(RngStream& rng, int p, int q, double lambda, int trials) {
  if (trials < 1) throw std::domain_error("check_lemma2: trials must be >= 1");
  CheckReport report;
  report.trials = trials;
  report.passed = true;
  report.worst_slack = 1e300;
  report.loewner_slack = 1e300;
  for (int t = 0; t < trials; ++t) {
    const Matrix q1 = random_spd(rng, p, 1.0);
    const Matrix q2 = random_psd(rng, p, 1.0);
    Matrix q3(p, q);
    Matrix mid;
    while (true) {
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < q; ++j) q3(i, j) = 2.0 * rng.next_unit() - 1.0;
      mid = transpose(q3) * q1 * q3;
      if (min_eigenvalue(mid) > 1e-6) break;
    }
    Matrix reg = mid;
    for (int i = 0; i < q; ++i) reg(i, i) += lambda;
    const Matrix reg_inv = sym_inverse(reg);
    const Matrix lhs = q3 * reg_inv * transpose(q3) * q2 * q3 * reg_inv * transpose(q3);
    const Matrix q1_inv = sym_inverse(q1);
    const Matrix rhs = q1_inv * q2 * q1_inv;
    const double slack = spectrum_slack(sym_sqrt(q1), lhs, rhs);
    report.worst_slack = std::min(report.worst_slack, slack);
    report.loewner_slack = std::min(report.loewner_slack, min_eigenvalue(rhs - lhs));
    if (slack < -1e-8) report.passed = false;
  }
  return report;
}

CheckReport check_lemma3(RngStream& rng, int p, int q, double lambda, int trials) {
  if (trials < 1) throw std::domain_error("check_lemma3: trials must be >= 1");
  CheckReport report;
  report.trials = trials;
  report.passed = true;
  report.worst_slack = 1e300;
  report.loewner_slack = 1e300;
  for (int t = 0; t < trials; ++t) {
    // rank >= q so that Q3' Q0 Q1 Q0 Q3 can be positive definite.
    const int rank =
        q + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(p - q + 1));
    const Matrix q0 = random_projector(rng, p, rank);
    // Q1 symmetric positive definite keeps rank(Q0 Q1 Q0) = rank(Q0).
    const Matrix q1 = random_spd(rng, p, 1.0);
    const Matrix q2 = random_psd(rng, p, 1.0);
    const Matrix q0q1q0 = q0 * q1 * q0;

    Matrix q3(p, q);
    Matrix mid;
    while (true) {
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < q; ++j) q3(i, j) = 2.0 * rng.next_unit() - 1.0;
      // The oracle-map analogue satisfies Q0 Q3 = Q3 (the Jacobian lies in
      // the active-constraint tangent space), so draw Q3 inside range(Q0).
      q3 = q0 * q3;
      mid = transpose(q3) * q0q1q0 * q3;
      if (min_eigenvalue(mid) > 1e-6) break;
    }
    Matrix reg = mid;
    for (int i = 0; i < q; ++i) reg(i, i) += lambda;
    const Matrix reg_inv = sym_inverse(reg);
    const Matrix lhs =
        q0 * q3 * reg_inv * transpose(q3) * q2 * q3 * reg_inv * transpose(q3) * q0;
    const Matrix dagger = pinv(q0q1q0);
    const Matrix rhs = q0 * dagger * q2 * dagger * q0;
    const double slack = spectrum_slack(sym_sqrt(q0q1q0), lhs, rhs);
    report.worst_slack = std::min(report.worst_slack, slack);
    report.loewner_slack = std::min(report.loewner_slack, min_eigenvalue(rhs - lhs));
    if (slack < -1e-8) report.passed = false;
  }
  return report;
}

CheckReport check_lemma1_sd(RngStream& rng, int dim, int num_samples, int trials) {
  if (trials < 1) throw std::domain_error("check_lemma1_sd: trials must be >= 1");
  CheckReport report;
  report.trials = trials;
  report.passed = true;
  for (int t = 0; t < trials; ++t) {
    const Matrix q1 = random_psd(rng, dim, 1.0);
    const Matrix q2 = q1 + random_psd(rng, dim, 0.8);  // Q1 <= Q2 by construction
    const Matrix q3 = random_psd(rng, dim, 1.0);
    const Matrix s1 = sym_sqrt(q1);
    const Matrix s2 = sym_sqrt(q2);
    std::vector<double> x(num_samples), y(num_samples);
    for (int i = 0; i < num_samples; ++i) {
      x[i] = quad_form(gaussian_vector(rng, s1), q3);
      y[i] = quad_form(gaussian_vector(rng, s2), q3);
    }
    const SdVerdict v = sd_test(x, y);
    if (v != SdVerdict::XDominated && v != SdVerdict::Indistinguishable) {
      report.passed = false;
      report.detail = to_string(v);
    }
  }
  return report;
}

CheckReport check_cramer_rao(const CovModel& cov) {
  CheckReport report;
  report.trials = 1;
  const Matrix hinv = sym_inverse(cov.h_theta);
  const Matrix sigma_ieo = hinv * cov.s_theta * hinv;
  const Matrix fisher_inv = sym_inverse(cov.fisher);
  report.worst_slack = min_eigenvalue(sigma_ieo - fisher_inv);
  report.passed = report.worst_slack >= -1e-7;
  return report;
}

MisspecLimits misspec_limits(const NewsvendorSpec& spec, const ScaledMeanGaussianFamily& assumed,
                             const std::vector<double>& true_mu,
                             const std::vector<double>& true_sigma) {
  MisspecLimits out;
  // theta_kl: Gaussian scale misspecification is closed form; the population
  // log-likelihood is quadratic in theta with weights j / sigma-assumed_j^2.
  double num = 0.0, den = 0.0;
  for (int j = 0; j < spec.p; ++j) {
    const double w = (j + 1) / (assumed.sigmas[j] * assumed.sigmas[j]);
    num += w * true_mu[j];
    den += w * (j + 1);
  }
  out.theta_kl = num / den;

  const NvGroundTruth truth = make_nv_ground_truth(spec, true_mu, true_sigma);
  const auto value = [&](double theta) {
    const Decision d = spec.capacity ? nv_constrained_oracle(assumed, theta, spec).w
                                     : nv_oracle_decision(assumed, theta, spec);
    return nv_expected_cost(spec, d, true_mu, true_sigma);
  };

  double lo = out.theta_kl - 2.0, hi = out.theta_kl + 2.0;
  for (int attempt = 0;; ++attempt) {
    if (attempt >= 6)
      throw std::runtime_error("misspec_limits: no interior minimizer after bracket widening");
    out.theta_star = golden_refine(value, lo, hi, 1e-9);
    const double margin = 0.01 * (hi - lo);
    if (out.theta_star > lo + margin && out.theta_star < hi - margin) break;
    const double mid = 0.5 * (lo + hi), half = hi - lo;
    lo = mid - half;
    hi = mid + half;
  }

  out.kappa_eto = std::max(value(out.theta_kl) - truth.v_star, 0.0);
  out.kappa_ieo = std::max(value(out.theta_star) - truth.v_star, 0.0);
  if (out.kappa_eto < out.kappa_ieo - 1e-8)
    throw std::runtime_error("misspec_limits: kappa ordering violated");
  return out;
}

const char* to_string(SdVerdict v) {
  switch (v) {
    case SdVerdict::XDominated: return "X_dominated";
    case SdVerdict::YDominated: return "Y_dominated";
    case SdVerdict::Indistinguishable: return "indistinguishable";
    case SdVerdict::Violated: return "violated";
  }
  return "?";
}

SdVerdict sd_test(const std::vector<double>& samples_x, const std::vector<double>& samples_y,
                  int grid_size, double alpha) {
  if (samples_x.empty() || samples_y.empty())
    throw std::invalid_argument("sd_test: empty sample set");
  std::vector<double> xs = samples_x, ys = samples_y;
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  std::vector<double> merged;
  merged.reserve(xs.size() + ys.size());
  std::merge(xs.begin(), xs.end(), ys.begin(), ys.end(), std::back_inserter(merged));

  const auto ecdf = [](const std::vector<double>& sorted, double t) {
    return static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), t) -
                               sorted.begin()) /
           static_cast<double>(sorted.size());
  };

  // delta(t) = Fx(t) - Fy(t) on merged-sample quantiles: positive everywhere
  // means X sits to the left of Y (X stochastically smaller).
  double min_delta = 0.0, max_delta = 0.0;
  for (int g = 0; g < grid_size; ++g) {
    const std::size_t idx = static_cast<std::size_t>(
        (static_cast<double>(g) + 0.5) / grid_size * static_cast<double>(merged.size()));
    const double t = merged[std::min(idx, merged.size() - 1)];
    const double delta = ecdf(xs, t) - ecdf(ys, t);
    min_delta = std::min(min_delta, delta);
    max_delta = std::max(max_delta, delta);
  }
  const double band = std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(xs.size()))) +
                      std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(ys.size())));
  const bool sig_pos = max_delta > band;
  const bool sig_neg = min_delta < -band;
  if (sig_pos && sig_neg) return SdVerdict::Violated;
  if (sig_pos) return SdVerdict::XDominated;
  if (sig_neg) return SdVerdict::YDominated;
  return SdVerdict::Indistinguishable;
}

}  // namespace ddso
