#include <cmath>
#include <stdexcept>

#include "ddso/models.hpp"
#include "doctest.h"

using namespace ddso;

namespace {

ScaledMeanGaussianFamily scaled_family(int p, double sigma = 1.0) {
  ScaledMeanGaussianFamily f;
  f.p = p;
  f.sigmas.assign(p, sigma);
  return f;
}

}  // namespace

TEST_CASE("sample_dataset: scaled-mean Gaussian per-product means") {
  ScaledMeanGaussianFamily f = scaled_family(2);
  RngStream rng(1, 100);
  const Dataset d = sample_dataset(f, 3.0, 100000, rng);
  double m1 = 0.0, m2 = 0.0;
  for (const auto& rec : d.z) {
    m1 += rec[0];
    m2 += rec[1];
  }
  m1 /= d.size();
  m2 /= d.size();
  CHECK(std::fabs(m1 - 3.0) < 0.02);
  CHECK(std::fabs(m2 - 6.0) < 0.02);

  RngStream rng1(2, 5), rng2(2, 5);
  const Dataset a = sample_dataset(f, 3.0, 50, rng1);
  const Dataset b = sample_dataset(f, 3.0, 50, rng2);
  CHECK(a.z == b.z);

  RngStream rng3(2, 6);
  CHECK(sample_dataset(f, 3.0, 1, rng3).size() == 1);
  CHECK_THROWS_AS(sample_dataset(f, 3.0, 0, rng3), std::domain_error);

  // Uniform family rejects parameters with a nonpositive upper bound.
  LinearUniformFamily fu;
  UniformFeatureLaw law;
  CHECK_THROWS_AS(sample_dataset(fu, {-1.0, 0.0, 0.0}, 5, rng3, law), std::domain_error);
}

TEST_CASE("loglik values and concavity") {
  SUBCASE("single standard normal sample at zero") {
    ScaledMeanGaussianFamily f = scaled_family(1);
    Dataset d;
    d.z = {{0.0}};
    // Constants are kept: -0.5 log(2 pi).
    CHECK(loglik(f, 0.0, d) == doctest::Approx(-0.9189385332046727).epsilon(1e-12));
  }
  SUBCASE("uniform family support violation returns -inf") {
    LinearUniformFamily f;
    Dataset d;
    d.x = {{0.5, 0.5}};
    d.z = {{10.0}};
    const std::vector<double> theta = {2.0, 0.5, 0.5};  // upper bound 2.5 < 10
    CHECK(loglik(f, theta, d) == -std::numeric_limits<double>::infinity());
  }
  SUBCASE("strict concavity in theta by second differences") {
    ScaledMeanGaussianFamily f = scaled_family(3);
    RngStream rng(3, 1);
    const Dataset d = sample_dataset(f, 3.0, 200, rng);
    const double h = 1e-3;
    for (double theta = 1.0; theta <= 5.0; theta += 0.5) {
      const double second =
          loglik(f, theta - h, d) - 2.0 * loglik(f, theta, d) + loglik(f, theta + h, d);
      CHECK(second < 0.0);
    }
  }
}

TEST_CASE("mle closed forms") {
  SUBCASE("worked scaled-mean example") {
    ScaledMeanGaussianFamily f = scaled_family(2);
    Dataset d;
    d.z = {{2.0, 7.0}, {4.0, 5.0}};
    CHECK(mle(f, d) == doctest::Approx(3.0).epsilon(1e-12));
  }
  SUBCASE("mean-vector family with one record") {
    MeanVecGaussianFamily f;
    f.sigmas = {1.0, 2.0};
    Dataset d;
    d.z = {{10.0, 12.0}};
    const std::vector<double> t = mle(f, d);
    CHECK(t[0] == doctest::Approx(10.0));
    CHECK(t[1] == doctest::Approx(12.0));
  }
  SUBCASE("degenerate regression design falls back to ridge") {
    LinearGaussianFamily f;
    Dataset d;
    for (int i = 0; i < 10; ++i) {
      d.x.push_back({0.0, 0.0});
      d.z.push_back({4.0 + 0.1 * i});
    }
    const std::vector<double> t = mle(f, d);
    CHECK(t[0] == doctest::Approx(4.45).epsilon(1e-6));
    CHECK(std::fabs(t[1]) < 1e-6);
    CHECK(std::fabs(t[2]) < 1e-6);
  }
  SUBCASE("empty dataset rejected") {
    CHECK_THROWS_AS(mle(scaled_family(1), Dataset{}), std::invalid_argument);
  }
}

TEST_CASE("mle maximizes the log-likelihood") {
  RngStream rng(11, 3);
  SUBCASE("scaled-mean family, heterogeneous sigmas") {
    ScaledMeanGaussianFamily f;
    f.p = 3;
    f.sigmas = {2.0, 1.0, 0.5};
    const Dataset d = sample_dataset(f, 3.0, 200, rng);
    const double that = mle(f, d);
    const double best = loglik(f, that, d);
    for (int t = 0; t < 100; ++t) {
      const double perturbed = that + sample_uniform(rng, -0.5, 0.5);
      CHECK(loglik(f, perturbed, d) <= best + 1e-9);
    }
  }
  SUBCASE("linear-Gaussian family") {
    LinearGaussianFamily f;
    UniformFeatureLaw law;
    const std::vector<double> theta0 = {2.0, 0.5, 0.5};
    const Dataset d = sample_dataset(f, theta0, 300, rng, law);
    const std::vector<double> that = mle(f, d);
    const double best = loglik(f, that, d);
    for (int t = 0; t < 100; ++t) {
      std::vector<double> perturbed = that;
      for (double& c : perturbed) c += sample_uniform(rng, -0.3, 0.3);
      CHECK(loglik(f, perturbed, d) <= best + 1e-9);
    }
  }
  SUBCASE("linear-uniform family via penalized search") {
    LinearUniformFamily f;
    UniformFeatureLaw law;
    const std::vector<double> theta0 = {4.0, 1.0, 1.0};
    const Dataset d = sample_dataset(f, theta0, 200, rng, law);
    const std::vector<double> that = mle(f, d);
    const double best = loglik(f, that, d);
    CHECK(std::isfinite(best));
    for (int t = 0; t < 100; ++t) {
      std::vector<double> perturbed = that;
      for (double& c : perturbed) c += sample_uniform(rng, -0.2, 0.2);
      CHECK(loglik(f, perturbed, d) <= best + 1e-9);
    }
    // Estimates land near the truth with n = 200.
    for (int j = 0; j < 3; ++j) CHECK(std::fabs(that[j] - theta0[j]) < 0.6);
  }
}

TEST_CASE("gaussian mle consistency at n = 1e4") {
  ScaledMeanGaussianFamily f = scaled_family(5);
  RngStream rng(21, 9);
  const Dataset d = sample_dataset(f, 3.0, 10000, rng);
  CHECK(std::fabs(mle(f, d) - 3.0) <= 0.05);
}

TEST_CASE("fisher information") {
  SUBCASE("scaled-mean: sum j^2 / sigma_j^2") {
    const Matrix m = fisher_info(scaled_family(2), 3.0);
    CHECK(m(0, 0) == doctest::Approx(5.0).epsilon(1e-12));
    ScaledMeanGaussianFamily f = scaled_family(2);
    f.sigmas = {2.0, 2.0};
    CHECK(fisher_info(f, 3.0)(0, 0) == doctest::Approx(5.0 / 4.0).epsilon(1e-12));
  }
  SUBCASE("mean-vector: diag(1/sigma_j^2)") {
    MeanVecGaussianFamily f;
    f.sigmas = {std::sqrt(3.0), std::sqrt(6.0)};
    const Matrix m = fisher_info(f, {0.0, 0.0});
    CHECK(m(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(m(1, 1) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    CHECK(m(0, 1) == 0.0);
  }
  SUBCASE("fisher matches the curvature of the log-likelihood") {
    ScaledMeanGaussianFamily f;
    f.p = 3;
    f.sigmas = {1.0, 2.0, 0.7};
    RngStream rng(31, 4);
    const int n = 100000;
    const Dataset d = sample_dataset(f, 3.0, n, rng);
    const double h = 1e-3;
    const double hess =
        -(loglik(f, 3.0 - h, d) - 2.0 * loglik(f, 3.0, d) + loglik(f, 3.0 + h, d)) / (h * h) / n;
    const double info = fisher_info(f, 3.0)(0, 0);
    CHECK(std::fabs(hess - info) / info < 0.02);
  }
  SUBCASE("contextual fisher by exact uniform moments") {
    LinearGaussianFamily f;
    UniformFeatureLaw law;
    const Matrix m = fisher_info(f, law);
    CHECK(m(0, 0) == doctest::Approx(1.0));
    CHECK(m(0, 1) == doctest::Approx(0.5));
    CHECK(m(1, 1) == doctest::Approx(1.0 / 3.0));
    CHECK(m(1, 2) == doctest::Approx(0.25));
  }
}
