#include <cmath>
#include <stdexcept>

#include "ddso/asymptotics.hpp"
#include "doctest.h"

using namespace ddso;

namespace {

ScaledMeanGaussianFamily scaled_family(int p, double sigma = 1.0) {
  ScaledMeanGaussianFamily f;
  f.p = p;
  f.sigmas.assign(p, sigma);
  return f;
}

constexpr double kHw1 = 1.4991056436842608;  // 6 pdf(q) at the 5/6 fractile

}  // namespace

TEST_CASE("cov model for the single-product newsvendor") {
  const NewsvendorSpec spec = NewsvendorSpec::uniform_costs(1, 1.0, 5.0);
  const CovModel cov = compute_cov_model(spec, scaled_family(1), 3.0);
  CHECK(cov.sigma_grad(0, 0) == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(cov.h_omega(0, 0) == doctest::Approx(kHw1).epsilon(1e-9));
  CHECK(cov.fisher(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cov.jac(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(!cov.constrained);

  const LimitLaw eto = limit_law(cov, Method::ETO);
  const LimitLaw ieo = limit_law(cov, Method::IEO);
  const LimitLaw saa = limit_law(cov, Method::SAA);
  CHECK(eto.mean() == doctest::Approx(kHw1 / 2.0).epsilon(1e-6));
  CHECK(saa.mean() == doctest::Approx(2.5 / kHw1).epsilon(1e-6));
  // J is an invertible scalar here, so the IEO and SAA laws coincide.
  CHECK(ieo.mean() == doctest::Approx(saa.mean()).epsilon(1e-6));
  CHECK(max_abs_diff(ieo.sigma, saa.sigma) < 1e-6);
}

TEST_CASE("cov model for the two-product newsvendor") {
  const NewsvendorSpec spec = NewsvendorSpec::uniform_costs(2, 1.0, 5.0);
  const CovModel cov = compute_cov_model(spec, scaled_family(2), 3.0);
  CHECK(cov.fisher(0, 0) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(cov.jac(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(cov.jac(1, 0) == doctest::Approx(2.0).epsilon(1e-6));
  // Hessian identity H_theta = J^T Hbar J.
  const Matrix composed = transpose(cov.jac) * cov.h_bar * cov.jac;
  CHECK(max_abs_diff(cov.h_theta, composed) < 1e-5);

  const double m_eto = limit_law(cov, Method::ETO).mean();
  const double m_ieo = limit_law(cov, Method::IEO).mean();
  const double m_saa = limit_law(cov, Method::SAA).mean();
  CHECK(m_eto == doctest::Approx(0.7495528218421304).epsilon(1e-6));
  CHECK(m_ieo == doctest::Approx(1.6676609887585387).epsilon(1e-6));
  CHECK(m_saa == doctest::Approx(2.0 * 1.6676609887585387).epsilon(1e-6));
  CHECK(m_eto < m_ieo);
  CHECK(m_ieo < m_saa);
}

TEST_CASE("cov model for the constrained newsvendor") {
  SUBCASE("binding projector on p = 2") {
    const NewsvendorSpec spec = NewsvendorSpec::uniform_costs(2, 1.0, 5.0, 8.0);
    const CovModel cov = compute_cov_model(spec, scaled_family(2), 3.0);
    REQUIRE(cov.constrained);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        CHECK(cov.phi(i, j) == doctest::Approx((i == j ? 1.0 : 0.0) - 0.5).epsilon(1e-12));
    // Phi kills the all-ones direction.
    const std::vector<double> ones = {1.0, 1.0};
    for (double v : mat_vec(cov.phi, ones)) CHECK(std::fabs(v) < 1e-12);
  }
  SUBCASE("p = 5 with capacity 40") {
    const NewsvendorSpec spec = NewsvendorSpec::uniform_costs(5, 1.0, 5.0, 40.0);
    const CovModel cov = compute_cov_model(spec, scaled_family(5), 3.0);
    REQUIRE(cov.constrained);
    // Oracle Jacobian dw_j/dtheta = j - 3 under the binding capacity.
    for (int j = 0; j < 5; ++j) CHECK(cov.jac(j, 0) == doctest::Approx(j + 1 - 3.0).epsilon(1e-4));
    // Projector properties and the tangency identity Phi J = J.
    CHECK(max_abs_diff(cov.phi * cov.phi, cov.phi) < 1e-10);
    CHECK(max_abs_diff(transpose(cov.phi), cov.phi) < 1e-10);
    CHECK(max_abs_diff(cov.phi * cov.jac, cov.jac) < 1e-6);
    const Matrix composed = transpose(cov.jac) * cov.h_bar * cov.jac;
    CHECK(max_abs_diff(cov.h_theta, composed) < 1e-5);

    const double m_eto = limit_law(cov, Method::ETO).mean();
    const double m_ieo = limit_law(cov, Method::IEO).mean();
    const double m_saa = limit_law(cov, Method::SAA).mean();
    CHECK(m_eto < m_ieo);
    CHECK(m_ieo < m_saa);
  }
}

TEST_CASE("portfolio cov model") {
  PortfolioSpec spec;
  spec.num_assets = 2;
  spec.alpha = 0.7;
  MeanVecGaussianFamily f;
  f.sigmas = {std::sqrt(3.0), std::sqrt(6.0)};
  const CovModel cov = compute_cov_model(spec, f, {12.0, 15.0});
  const Matrix composed = transpose(cov.jac) * cov.h_bar * cov.jac;
  CHECK(max_abs_diff(cov.h_theta, composed) < 1e-5);
  CHECK(max_abs_diff(cov.phi * cov.jac, cov.jac) < 1e-6);

  const double m_eto = limit_law(cov, Method::ETO).mean();
  const double m_ieo = limit_law(cov, Method::IEO).mean();
  const double m_saa = limit_law(cov, Method::SAA).mean();
  CHECK(m_eto < m_ieo);
  CHECK(m_ieo <= m_saa + 1e-3);

  SUBCASE("closed-form gradient covariance matches Monte Carlo") {
    const Decision wstar = portfolio_oracle_decision(f, {12.0, 15.0}, spec);
    const Matrix closed = portfolio_sigma_grad(spec, {12.0, 15.0}, {3.0, 6.0}, wstar.w);
    RngStream rng(424242, 0);
    const int draws = 1000000;
    Matrix second(3, 3);
    std::vector<double> mean(3, 0.0), grad(3);
    for (int it = 0; it < draws; ++it) {
      const std::vector<double> z = {sample_normal(rng, 12.0, std::sqrt(3.0)),
                                     sample_normal(rng, 15.0, std::sqrt(6.0))};
      const double spread = wstar.w[0] * z[0] + wstar.w[1] * z[1] - wstar.w[2];
      grad[0] = 2.0 * spec.alpha * spread * z[0] - z[0];
      grad[1] = 2.0 * spec.alpha * spread * z[1] - z[1];
      grad[2] = -2.0 * spec.alpha * spread;
      for (int a = 0; a < 3; ++a) {
        mean[a] += grad[a];
        for (int b = 0; b < 3; ++b) second(a, b) += grad[a] * grad[b];
      }
    }
    for (int a = 0; a < 3; ++a) mean[a] /= draws;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        const double mc = second(a, b) / draws - mean[a] * mean[b];
        CHECK(std::fabs(mc - closed(a, b)) <= 0.03 * (1.0 + std::fabs(closed(a, b))));
      }
    }
  }
}

TEST_CASE("pinv") {
  CHECK(max_abs_diff(pinv(Matrix::identity(3)), Matrix::identity(3)) < 1e-12);
  CHECK(max_abs_diff(pinv(Matrix(3, 3)), Matrix(3, 3)) < 1e-15);

  // Rank-one projector is its own pseudoinverse.
  Matrix v(3, 1);
  v(0, 0) = 1.0 / std::sqrt(3.0);
  v(1, 0) = 1.0 / std::sqrt(3.0);
  v(2, 0) = -1.0 / std::sqrt(3.0);
  const Matrix vvt = v * transpose(v);
  CHECK(max_abs_diff(pinv(vvt), vvt) < 1e-10);

  // Penrose identities on random symmetric matrices of mixed rank.
  RngStream rng(31337, 0);
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + static_cast<int>(rng.next_u64() % 4);
    Matrix b(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) b(i, j) = 2.0 * rng.next_unit() - 1.0;
    Matrix m = b * transpose(b);
    if (t % 2 == 0 && n >= 2) {
      // knock the rank down by projecting out a random direction
      std::vector<double> dir(n);
      double norm = 0.0;
      for (int i = 0; i < n; ++i) {
        dir[i] = 2.0 * rng.next_unit() - 1.0;
        norm += dir[i] * dir[i];
      }
      Matrix proj = Matrix::identity(n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) proj(i, j) -= dir[i] * dir[j] / norm;
      m = proj * m * proj;
    }
    const Matrix dag = pinv(m);
    CHECK(max_abs_diff(m * dag * m, m) < 1e-8);
    CHECK(max_abs_diff(dag * m * dag, dag) < 1e-8);
    CHECK(max_abs_diff(transpose(m * dag), m * dag) < 1e-8);
    CHECK(max_abs_diff(transpose(dag * m), dag * m) < 1e-8);
  }
}

TEST_CASE("lemma 2 sandwich inequality") {
  RngStream rng(7101, 0);
  for (double lambda : {0.0, 0.1}) {
    const CheckReport r = check_lemma2(rng, 4, 2, lambda, 200);
    CHECK(r.passed);
    CHECK(r.worst_slack >= -1e-8);
  }
  SUBCASE("zero Q2 sends both sides to zero") {
    // With Q2 = 0 the inequality holds with equality; spot-check directly.
    Matrix q1 = Matrix::identity(3);
    q1(0, 0) = 2.0;
    const Matrix q2(3, 3);
    const Matrix q1_inv = sym_inverse(q1);
    CHECK(max_abs_diff(q1_inv * q2 * q1_inv, Matrix(3, 3)) == 0.0);
  }
  SUBCASE("trials must be positive") {
    RngStream r2(7102, 0);
    CHECK_THROWS_AS(check_lemma2(r2, 4, 2, 0.0, 0), std::domain_error);
  }
}

TEST_CASE("lemma 3 projected sandwich inequality") {
  RngStream rng(7200, 0);
  for (double lambda : {0.0, 0.1}) {
    const CheckReport r = check_lemma3(rng, 4, 2, lambda, 200);
    CHECK(r.passed);
    CHECK(r.worst_slack >= -1e-8);
  }
  SUBCASE("zero projector sends both sides to zero") {
    const Matrix q0(3, 3);
    const Matrix q1 = Matrix::identity(3);
    const Matrix zero = q0 * q1 * q0;
    CHECK(max_abs_diff(pinv(zero), Matrix(3, 3)) < 1e-14);
  }
}

TEST_CASE("lemma 1 stochastic dominance sampling check") {
  RngStream rng(7300, 0);
  const CheckReport r = check_lemma1_sd(rng, 4, 20000, 10);
  CHECK(r.passed);

  SUBCASE("equal covariances are indistinguishable") {
    RngStream r2(7301, 0);
    std::vector<double> x(20000), y(20000);
    for (int i = 0; i < 20000; ++i) {
      double sx = 0.0, sy = 0.0;
      for (int k = 0; k < 3; ++k) {
        const double gx = sample_normal(r2, 0.0, 1.0);
        const double gy = sample_normal(r2, 0.0, 1.0);
        sx += gx * gx;
        sy += gy * gy;
      }
      x[i] = sx;
      y[i] = sy;
    }
    CHECK(sd_test(x, y) == SdVerdict::Indistinguishable);
  }
  SUBCASE("zero quadratic form is degenerate at zero on both sides") {
    const std::vector<double> zeros(100, 0.0);
    CHECK(sd_test(zeros, zeros) == SdVerdict::Indistinguishable);
  }
}

TEST_CASE("cramer-rao check across families") {
  const NewsvendorSpec s1 = NewsvendorSpec::uniform_costs(1, 1.0, 5.0);
  const CovModel c1 = compute_cov_model(s1, scaled_family(1), 3.0);
  const CheckReport r1 = check_cramer_rao(c1);
  CHECK(r1.passed);
  // Sigma_IEO = 5 / Hw^2 vs inverse Fisher = 1.
  CHECK(r1.worst_slack == doctest::Approx(5.0 / (kHw1 * kHw1) - 1.0).epsilon(1e-5));

  const NewsvendorSpec s5 = NewsvendorSpec::uniform_costs(5, 1.0, 5.0, 40.0);
  CHECK(check_cramer_rao(compute_cov_model(s5, scaled_family(5), 3.0)).passed);

  ContextualNewsvendorSpec ctx;
  LinearGaussianFamily lf;
  UniformFeatureLaw law;
  CHECK(check_cramer_rao(compute_cov_model(ctx, lf, {2.0, 0.5, 0.5}, law)).passed);

  PortfolioSpec port;
  port.num_assets = 2;
  port.alpha = 0.7;
  MeanVecGaussianFamily fm;
  fm.sigmas = {std::sqrt(3.0), std::sqrt(6.0)};
  const CheckReport rp = check_cramer_rao(compute_cov_model(port, fm, {12.0, 15.0}));
  CHECK(rp.passed);
  // The portfolio IEO estimating equation has MLE structure along part of
  // the parameter space: the slack sits against the bound.
  CHECK(std::fabs(rp.worst_slack) < 1e-3);

  SUBCASE("pure location family sits exactly on the bound") {
    CovModel loc;
    loc.h_theta = Matrix::identity(1);
    loc.s_theta = Matrix(1, 1);
    loc.s_theta(0, 0) = 2.5;  // Var of the cost gradient = sigma^2
    loc.fisher = Matrix(1, 1);
    loc.fisher(0, 0) = 1.0 / 2.5;
    const CheckReport r = check_cramer_rao(loc);
    CHECK(r.passed);
    CHECK(std::fabs(r.worst_slack) < 1e-12);
  }
}

TEST_CASE("misspecification limits") {
  std::vector<double> mu, sigma;
  for (int j = 1; j <= 5; ++j) {
    mu.push_back(3.0 * j);
    sigma.push_back(1.0);
  }
  const NewsvendorSpec spec = NewsvendorSpec::uniform_costs(5, 1.0, 5.0);

  SUBCASE("well-specified family has zero gaps") {
    const MisspecLimits m = misspec_limits(spec, scaled_family(5), mu, sigma);
    CHECK(m.theta_kl == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(std::fabs(m.theta_star - 3.0) < 1e-6);
    CHECK(m.kappa_eto <= 1e-9);
    CHECK(m.kappa_ieo <= 1e-9);
  }
  SUBCASE("wrong-sigma family: positive ordered gaps") {
    ScaledMeanGaussianFamily wrong;
    wrong.p = 5;
    for (int j = 1; j <= 5; ++j) wrong.sigmas.push_back(std::sqrt(std::max(6.0 - j, 1.0)));
    const MisspecLimits m = misspec_limits(spec, wrong, mu, sigma);
    CHECK(m.theta_kl == doctest::Approx(3.0).epsilon(1e-12));
    // Values pinned by the golden-search oracle run.
    CHECK(m.kappa_eto == doctest::Approx(1.5908230).epsilon(1e-4));
    CHECK(m.kappa_ieo == doctest::Approx(1.2656089).epsilon(1e-4));
    CHECK(m.kappa_eto >= m.kappa_ieo);
    CHECK(m.kappa_ieo > 0.0);
  }
  SUBCASE("gamma = 1 in the sweep family reduces to well-specified") {
    ScaledMeanGaussianFamily g1;
    g1.p = 5;
    for (int j = 1; j <= 5; ++j) g1.sigmas.push_back(std::sqrt(1.0));
    const MisspecLimits m = misspec_limits(spec, g1, mu, sigma);
    CHECK(m.kappa_eto <= 1e-9);
    CHECK(m.kappa_ieo <= 1e-9);
  }
}

TEST_CASE("sd_test verdicts") {
  RngStream rng(7400, 0);
  SUBCASE("identical samples are indistinguishable") {
    std::vector<double> x(50000);
    for (double& v : x) v = sample_normal(rng, 0.0, 1.0);
    CHECK(sd_test(x, x) == SdVerdict::Indistinguishable);
  }
  SUBCASE("scaled chi-squares order as expected") {
    std::vector<double> x(100000), y(100000);
    for (int i = 0; i < 100000; ++i) {
      const double gx = sample_normal(rng, 0.0, 1.0);
      const double gy = sample_normal(rng, 0.0, 1.0);
      x[i] = 0.75 * gx * gx;
      y[i] = 2.5 * gy * gy;
    }
    CHECK(sd_test(x, y) == SdVerdict::XDominated);
    CHECK(sd_test(y, x) == SdVerdict::YDominated);
  }
  SUBCASE("crossing cdfs are flagged as violated") {
    std::vector<double> x(100000), y(100000);
    for (int i = 0; i < 100000; ++i) {
      x[i] = sample_normal(rng, 0.0, 1.0);
      y[i] = sample_normal(rng, 0.1, 2.0);
    }
    CHECK(sd_test(x, y) == SdVerdict::Violated);
  }
  SUBCASE("empty input is rejected") {
    CHECK_THROWS_AS(sd_test({}, {1.0}), std::invalid_argument);
  }
}

TEST_CASE("limit laws of the two-product newsvendor obey stochastic dominance") {
  const NewsvendorSpec spec = NewsvendorSpec::uniform_costs(2, 1.0, 5.0);
  const CovModel cov = compute_cov_model(spec, scaled_family(2), 3.0);
  const LimitLaw leto = limit_law(cov, Method::ETO);
  const LimitLaw lieo = limit_law(cov, Method::IEO);
  const LimitLaw lsaa = limit_law(cov, Method::SAA);
  RngStream rng(7500, 0);
  const int m = 100000;
  std::vector<double> g_eto(m), g_ieo(m), g_saa(m);
  for (int i = 0; i < m; ++i) {
    g_eto[i] = leto.sample(rng);
    g_ieo[i] = lieo.sample(rng);
    g_saa[i] = lsaa.sample(rng);
  }
  CHECK(sd_test(g_eto, g_ieo) == SdVerdict::XDominated);
  CHECK(sd_test(g_ieo, g_saa) == SdVerdict::XDominated);
  CHECK(sd_test(g_eto, g_saa) == SdVerdict::XDominated);

  // Sample means agree with (1/2) tr(H Sigma).
  double mean_eto = 0.0;
  for (double v : g_eto) mean_eto += v;
  CHECK(mean_eto / m == doctest::Approx(leto.mean()).epsilon(0.03));
}

TEST_CASE("raw Loewner order between the sandwich covariances can fail") {
  // Negative control: the ordered-spectrum comparison above is the property
  // the dominance theorems need; the covariance difference itself is NOT
  // positive semidefinite for generic inputs. Document that here so the
  // checker's comparison choice stays justified.
  RngStream rng(7600, 0);
  const CheckReport r = check_lemma2(rng, 4, 2, 0.0, 100);
  CHECK(r.passed);                    // spectra are ordered in every trial
  CHECK(r.loewner_slack < -1e-3);     // but the matrix gap goes indefinite
}
