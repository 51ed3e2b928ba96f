// Parametric distribution families: samplers, log-likelihoods, maximum
// likelihood estimators, and Fisher information. These are the estimation
// side of the plug-in pipeline and the ground-truth generators for the
// experiment harness.

#pragma once

#include <optional>
#include <vector>

#include "ddso/linalg.hpp"
#include "ddso/stats.hpp"

namespace ddso {

// i.i.d. records; `x` is empty for non-contextual data, otherwise x[i] is the
// feature vector paired with response z[i].
struct Dataset {
  std::vector<std::vector<double>> x;
  std::vector<std::vector<double>> z;

  std::size_t size() const { return z.size(); }
  bool has_features() const { return !x.empty(); }
};

// Product j in 1..p has law N(j*theta, sigmas[j-1]^2); theta is scalar.
struct ScaledMeanGaussianFamily {
  int p = 1;
  std::vector<double> sigmas;
};

// z | x ~ N((1, x^T) theta, sigma^2); theta has feature_dim + 1 entries.
struct LinearGaussianFamily {
  int feature_dim = 2;
  double sigma = 1.0;
};

// Asset j has law N(theta[j], sigmas[j]^2), assets independent.
struct MeanVecGaussianFamily {
  std::vector<double> sigmas;
};

// z | x ~ Uniform(0, (1, x^T) theta); requires (1,x^T) theta > 0 on the
// feature support.
struct LinearUniformFamily {
  int feature_dim = 2;
};

// Feature law for contextual sampling: each coordinate Uniform[lo, hi).
struct UniformFeatureLaw {
  int dim = 2;
  double lo = 0.0;
  double hi = 1.0;
};

Dataset sample_dataset(const ScaledMeanGaussianFamily& family, double theta, int n,
                       RngStream& rng);
Dataset sample_dataset(const MeanVecGaussianFamily& family, const std::vector<double>& theta,
                       int n, RngStream& rng);
Dataset sample_dataset(const LinearGaussianFamily& family, const std::vector<double>& theta,
                       int n, RngStream& rng, const UniformFeatureLaw& feature_law);
Dataset sample_dataset(const LinearUniformFamily& family, const std::vector<double>& theta,
                       int n, RngStream& rng, const UniformFeatureLaw& feature_law);

// Log-likelihoods keep all Gaussian constants so values are comparable
// across theta; the uniform family returns -infinity when any observation
// lies outside the support.
double loglik(const ScaledMeanGaussianFamily& family, double theta, const Dataset& data);
double loglik(const MeanVecGaussianFamily& family, const std::vector<double>& theta,
              const Dataset& data);
double loglik(const LinearGaussianFamily& family, const std::vector<double>& theta,
              const Dataset& data);
double loglik(const LinearUniformFamily& family, const std::vector<double>& theta,
              const Dataset& data);

double mle(const ScaledMeanGaussianFamily& family, const Dataset& data);
std::vector<double> mle(const MeanVecGaussianFamily& family, const Dataset& data);
// Least squares through the normal equations; near-singular designs fall
// back to a ridge solve with lambda = 1e-10.
std::vector<double> mle(const LinearGaussianFamily& family, const Dataset& data);
// Penalized Nelder-Mead with multi-starts seeded from a least-squares fit;
// see the module notes in models.cpp.
std::vector<double> mle(const LinearUniformFamily& family, const Dataset& data);

// Per-sample Fisher information at theta.
Matrix fisher_info(const ScaledMeanGaussianFamily& family, double theta);
Matrix fisher_info(const MeanVecGaussianFamily& family, const std::vector<double>& theta);
// E_x[(1,x)^T (1,x)] / sigma^2 under the given feature law, by closed-form
// moments of the uniform law.
Matrix fisher_info(const LinearGaussianFamily& family, const UniformFeatureLaw& feature_law);

}  // namespace ddso
