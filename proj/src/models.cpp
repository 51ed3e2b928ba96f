#include "ddso/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ddso/optim.hpp"

namespace ddso {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

void check_sigmas(const std::vector<double>& sigmas, std::size_t expect) {
  if (sigmas.size() != expect) throw std::invalid_argument("family: sigma vector has wrong length");
  for (double s : sigmas)
    if (!(s > 0.0)) throw std::domain_error("family: sigmas must be positive");
}

double affine(const std::vector<double>& theta, const std::vector<double>& x) {
  if (theta.size() != x.size() + 1) throw std::invalid_argument("affine: dimension mismatch");
  double v = theta[0];
  for (std::size_t j = 0; j < x.size(); ++j) v += theta[j + 1] * x[j];
  return v;
}

std::vector<double> sample_features(const UniformFeatureLaw& law, RngStream& rng) {
  std::vector<double> x(law.dim);
  for (int j = 0; j < law.dim; ++j) x[j] = sample_uniform(rng, law.lo, law.hi);
  return x;
}

// Least squares of z on (1, x) through the normal equations, with a ridge
// fallback (lambda = 1e-10) when the design is rank deficient.
std::vector<double> least_squares(const std::vector<std::vector<double>>& xs,
                                  const std::vector<double>& zs) {
  const std::size_t n = xs.size();
  const std::size_t d = xs.empty() ? 0 : xs[0].size();
  Matrix xtx(d + 1, d + 1);
  std::vector<double> xtz(d + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(d + 1, 1.0);
    for (std::size_t j = 0; j < d; ++j) row[j + 1] = xs[i][j];
    for (std::size_t a = 0; a <= d; ++a) {
      xtz[a] += row[a] * zs[i];
      for (std::size_t b = 0; b <= d; ++b) xtx(a, b) += row[a] * row[b];
    }
  }
  auto residual_ok = [&](const std::vector<double>& th) {
    const std::vector<double> r = mat_vec(xtx, th);
    double err = 0.0, scale = 1.0;
    for (std::size_t a = 0; a <= d; ++a) {
      err = std::max(err, std::fabs(r[a] - xtz[a]));
      scale = std::max(scale, std::fabs(xtz[a]));
    }
    return err <= 1e-6 * scale;
  };
  try {
    std::vector<double> th = solve_linear(xtx, xtz);
    if (residual_ok(th)) return th;
  } catch (const std::runtime_error&) {
  }
  Matrix ridge = xtx;
  for (std::size_t a = 0; a <= d; ++a) ridge(a, a) += 1e-10;
  return solve_linear(ridge, xtz);
}

}  // namespace

Dataset sample_dataset(const ScaledMeanGaussianFamily& family, double theta, int n,
                       RngStream& rng) {
  if (n < 1) throw std::domain_error("sample_dataset: n must be >= 1");
  check_sigmas(family.sigmas, static_cast<std::size_t>(family.p));
  Dataset d;
  d.z.reserve(n);
  for (int i = 0; i < n; ++i) {
    std::vector<double> rec(family.p);
    for (int j = 0; j < family.p; ++j)
      rec[j] = sample_normal(rng, (j + 1) * theta, family.sigmas[j]);
    d.z.push_back(std::move(rec));
  }
  return d;
}

Dataset sample_dataset(const MeanVecGaussianFamily& family, const std::vector<double>& theta,
                       int n, RngStream& rng) {
  if (n < 1) throw std::domain_error("sample_dataset: n must be >= 1");
  check_sigmas(family.sigmas, theta.size());
  Dataset d;
  d.z.reserve(n);
  for (int i = 0; i < n; ++i) {
    std::vector<double> rec(theta.size());
    for (std::size_t j = 0; j < theta.size(); ++j)
      rec[j] = sample_normal(rng, theta[j], family.sigmas[j]);
    d.z.push_back(std::move(rec));
  }
  return d;
}

Dataset sample_dataset(const LinearGaussianFamily& family, const std::vector<double>& theta,
                       int n, RngStream& rng, const UniformFeatureLaw& feature_law) {
  if (n < 1) throw std::domain_error("sample_dataset: n must be >= 1");
  if (theta.size() != static_cast<std::size_t>(family.feature_dim) + 1)
    throw std::invalid_argument("sample_dataset: theta has wrong length");
  if (!(family.sigma > 0.0)) throw std::domain_error("sample_dataset: sigma must be positive");
  Dataset d;
  for (int i = 0; i < n; ++i) {
    std::vector<double> x = sample_features(feature_law, rng);
    const double mean = affine(theta, x);
    d.z.push_back({sample_normal(rng, mean, family.sigma)});
    d.x.push_back(std::move(x));
  }
  return d;
}

Dataset sample_dataset(const LinearUniformFamily& family, const std::vector<double>& theta,
                       int n, RngStream& rng, const UniformFeatureLaw& feature_law) {
  if (n < 1) throw std::domain_error("sample_dataset: n must be >= 1");
  if (theta.size() != static_cast<std::size_t>(family.feature_dim) + 1)
    throw std::invalid_argument("sample_dataset: theta has wrong length");
  Dataset d;
  for (int i = 0; i < n; ++i) {
    std::vector<double> x = sample_features(feature_law, rng);
    const double upper = affine(theta, x);
    if (!(upper > 0.0))
      throw std::domain_error("sample_dataset: uniform upper bound must be positive");
    d.z.push_back({sample_uniform(rng, 0.0, upper)});
    d.x.push_back(std::move(x));
  }
  return d;
}

double loglik(const ScaledMeanGaussianFamily& family, double theta, const Dataset& data) {
  check_sigmas(family.sigmas, static_cast<std::size_t>(family.p));
  double ll = 0.0;
  for (const auto& rec : data.z) {
    if (rec.size() != static_cast<std::size_t>(family.p))
      throw std::invalid_argument("loglik: record dimension mismatch");
    for (int j = 0; j < family.p; ++j) {
      const double s = family.sigmas[j];
      const double r = rec[j] - (j + 1) * theta;
      ll += -0.5 * kLog2Pi - std::log(s) - 0.5 * r * r / (s * s);
    }
  }
  return ll;
}

double loglik(const MeanVecGaussianFamily& family, const std::vector<double>& theta,
              const Dataset& data) {
  check_sigmas(family.sigmas, theta.size());
  double ll = 0.0;
  for (const auto& rec : data.z) {
    if (rec.size() != theta.size()) throw std::invalid_argument("loglik: record dimension mismatch");
    for (std::size_t j = 0; j < theta.size(); ++j) {
      const double s = family.sigmas[j];
      const double r = rec[j] - theta[j];
      ll += -0.5 * kLog2Pi - std::log(s) - 0.5 * r * r / (s * s);
    }
  }
  return ll;
}

double loglik(const LinearGaussianFamily& family, const std::vector<double>& theta,
              const Dataset& data) {
  if (!data.has_features()) throw std::invalid_argument("loglik: contextual family needs features");
  double ll = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double r = data.z[i][0] - affine(theta, data.x[i]);
    ll += -0.5 * kLog2Pi - std::log(family.sigma) - 0.5 * r * r / (family.sigma * family.sigma);
  }
  return ll;
}

double loglik(const LinearUniformFamily&, const std::vector<double>& theta, const Dataset& data) {
  if (!data.has_features()) throw std::invalid_argument("loglik: contextual family needs features");
  double ll = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double upper = affine(theta, data.x[i]);
    if (!(upper > 0.0) || data.z[i][0] > upper)
      return -std::numeric_limits<double>::infinity();
    ll -= std::log(upper);
  }
  return ll;
}

double mle(const ScaledMeanGaussianFamily& family, const Dataset& data) {
  if (data.size() == 0) throw std::invalid_argument("mle: empty dataset");
  check_sigmas(family.sigmas, static_cast<std::size_t>(family.p));
  // Stationary point of the Gaussian log-likelihood: products are weighted
  // by j / sigma_j^2. With equal sigmas this is sum_ij j z_ij / (n sum j^2).
  double num = 0.0, den = 0.0;
  for (const auto& rec : data.z) {
    if (rec.size() != static_cast<std::size_t>(family.p))
      throw std::invalid_argument("mle: record dimension mismatch");
    for (int j = 0; j < family.p; ++j) {
      const double w = (j + 1) / (family.sigmas[j] * family.sigmas[j]);
      num += w * rec[j];
      den += w * (j + 1);
    }
  }
  return num / den;
}

std::vector<double> mle(const MeanVecGaussianFamily& family, const Dataset& data) {
  if (data.size() == 0) throw std::invalid_argument("mle: empty dataset");
  const std::size_t k = family.sigmas.size();
  std::vector<double> mean(k, 0.0);
  for (const auto& rec : data.z) {
    if (rec.size() != k) throw std::invalid_argument("mle: record dimension mismatch");
    for (std::size_t j = 0; j < k; ++j) mean[j] += rec[j];
  }
  for (double& m : mean) m /= static_cast<double>(data.size());
  return mean;
}

std::vector<double> mle(const LinearGaussianFamily& family, const Dataset& data) {
  if (data.size() == 0) throw std::invalid_argument("mle: empty dataset");
  if (!data.has_features()) throw std::invalid_argument("mle: contextual family needs features");
  std::vector<double> zs(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.x[i].size() != static_cast<std::size_t>(family.feature_dim))
      throw std::invalid_argument("mle: feature dimension mismatch");
    zs[i] = data.z[i][0];
  }
  return least_squares(data.x, zs);
}

std::vector<double> mle(const LinearUniformFamily& family, const Dataset& data) {
  if (data.size() == 0) throw std::invalid_argument("mle: empty dataset");
  if (!data.has_features()) throw std::invalid_argument("mle: contextual family needs features");

  // Moment seed: E[z | x] = (1,x)theta / 2, so twice the least-squares fit of
  // z estimates the upper-bound coefficients.
  std::vector<double> zs(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) zs[i] = data.z[i][0];
  std::vector<double> seed = least_squares(data.x, zs);
  for (double& c : seed) c *= 2.0;

  const auto objective = [&](const std::vector<double>& theta) {
    const double ll = loglik(family, theta, data);
    return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
  };

  double best_val = std::numeric_limits<double>::infinity();
  std::vector<double> best = seed;
  double nm_scale = 0.0;
  for (double c : seed) nm_scale = std::max(nm_scale, std::fabs(c));
  nm_scale = std::max(0.05 * nm_scale, 1e-3);

  int feasible_starts = 0;
  for (int k = 0; k < 8; ++k) {
    const double factor = 1.0 + 0.1 * k;
    std::vector<double> start = seed;
    for (double& c : start) c *= factor;
    if (!std::isfinite(objective(start))) continue;
    ++feasible_starts;
    const NelderMeadResult r = nelder_mead(objective, start, nm_scale, 1e-10, 4000);
    if (r.value < best_val) {
      best_val = r.value;
      best = r.x;
    }
  }
  if (feasible_starts == 0) {
    // Pathological data; inflate until feasible to keep the harness alive.
    std::vector<double> start = seed;
    for (int grow = 0; grow < 200; ++grow) {
      for (double& c : start) c *= 1.2;
      if (std::isfinite(objective(start))) break;
    }
    if (!std::isfinite(objective(start)))
      throw std::runtime_error("mle(uniform): no feasible start found");
    const NelderMeadResult r = nelder_mead(objective, start, nm_scale, 1e-10, 4000);
    best = r.x;
  }
  return best;
}

Matrix fisher_info(const ScaledMeanGaussianFamily& family, double) {
  check_sigmas(family.sigmas, static_cast<std::size_t>(family.p));
  double info = 0.0;
  for (int j = 0; j < family.p; ++j) {
    const double s = family.sigmas[j];
    info += (j + 1) * (j + 1) / (s * s);
  }
  Matrix m(1, 1);
  m(0, 0) = info;
  return m;
}

Matrix fisher_info(const MeanVecGaussianFamily& family, const std::vector<double>& theta) {
  check_sigmas(family.sigmas, theta.size());
  Matrix m(theta.size(), theta.size());
  for (std::size_t j = 0; j < theta.size(); ++j)
    m(j, j) = 1.0 / (family.sigmas[j] * family.sigmas[j]);
  return m;
}

Matrix fisher_info(const LinearGaussianFamily& family, const UniformFeatureLaw& law) {
  // E[(1,x)^T (1,x)] under independent Uniform[lo,hi) coordinates, from the
  // exact first and second moments of the uniform law.
  const double m1 = 0.5 * (law.lo + law.hi);
  const double m2 = (law.lo * law.lo + law.lo * law.hi + law.hi * law.hi) / 3.0;
  const std::size_t d = static_cast<std::size_t>(law.dim);
  Matrix m(d + 1, d + 1);
  m(0, 0) = 1.0;
  for (std::size_t j = 1; j <= d; ++j) {
    m(0, j) = m1;
    m(j, 0) = m1;
    for (std::size_t k = 1; k <= d; ++k) m(j, k) = (j == k) ? m2 : m1 * m1;
  }
  const double s2 = family.sigma * family.sigma;
  return (1.0 / s2) * m;
}

}  // namespace ddso
