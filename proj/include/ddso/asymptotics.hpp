// Limiting regret laws and numerical verifiers for the asymptotic theory:
// the regret scaled by n converges to a quadratic form (1/2) N^T H N of a
// mean-zero Gaussian N whose covariance depends on the pipeline:
//
//   ETO  H = Hess_theta v0(omega_theta0),  Cov = FisherInfo^{-1}
//   IEO  H = Hess_theta,                   Cov = H^{-1} S_theta H^{-1}
//   SAA  H = Hess_omega v0(omega*),        Cov = H^{-1} SigmaGrad H^{-1}
//   SAA (active constraints)
//        H = Phi Hbar Phi,  Cov = (Phi Hbar Phi)^+ SigmaGrad (Phi Hbar Phi)^+
//
// with S_theta = J^T SigmaGrad J, J the Jacobian of the oracle map, Phi the
// orthogonal projector onto the active-constraint tangent space, and ^+ the
// Moore-Penrose pseudoinverse.

#pragma once

#include <string>
#include <vector>

#include "ddso/estimators.hpp"
#include "ddso/linalg.hpp"
#include "ddso/problems.hpp"

namespace ddso {

struct CovModel {
  Matrix h_omega;     // decision-space Hessian of the true expected cost
  Matrix h_bar;       // Lagrangian-augmented Hessian (equals h_omega here: linear constraints)
  Matrix h_theta;     // parameter-space Hessian of theta -> v0(omega_theta)
  Matrix sigma_grad;  // Var_P of the cost gradient at omega*
  Matrix fisher;      // per-sample Fisher information at theta0
  Matrix jac;         // d omega_theta / d theta at theta0 (p x q)
  Matrix a;           // active-constraint gradient rows (empty if none)
  Matrix phi;         // projector I - A^T (A A^T)^{-1} A (identity if no active rows)
  Matrix s_theta;     // Var_P of the theta-gradient of the cost at theta0
  bool constrained = false;
};

// Well-specified covariance model at theta0 for the scaled-mean newsvendor
// (capacity optional), the contextual Gaussian newsvendor, and the
// mean-vector portfolio. Derivatives of the oracle map use central finite
// differences; see the notes in asymptotics.cpp for which entries are closed
// form.
CovModel compute_cov_model(const NewsvendorSpec& spec, const ScaledMeanGaussianFamily& family,
                           double theta0);
// Contextual model: omega-level fields stay empty (the decision is a policy,
// not a vector); h_theta, fisher and s_theta are computed from the feature
// moments.
CovModel compute_cov_model(const ContextualNewsvendorSpec& spec,
                           const LinearGaussianFamily& family, const std::vector<double>& theta0,
                           const UniformFeatureLaw& law);
CovModel compute_cov_model(const PortfolioSpec& spec, const MeanVecGaussianFamily& family,
                           const std::vector<double>& theta0);

// Exact covariance of the portfolio cost gradient at the full decision
// (wstar includes the auxiliary coordinate) under independent N(theta, sig2)
// returns; fourth Gaussian moments via Isserlis. A Monte Carlo cross-check
// lives in the tests.
Matrix portfolio_sigma_grad(const PortfolioSpec& spec, const std::vector<double>& theta,
                            const std::vector<double>& sig2, const std::vector<double>& wstar);

struct LimitLaw {
  Matrix h;
  Matrix sigma;
  Matrix sqrt_sigma;

  // One draw of (1/2) N^T H N with N ~ N(0, sigma).
  double sample(RngStream& rng) const;
  // E[(1/2) N^T H N] = (1/2) tr(H sigma).
  double mean() const;
};

LimitLaw limit_law(const CovModel& cov, Method method);

// Moore-Penrose pseudoinverse of a symmetric matrix via Jacobi
// eigendecomposition; eigenvalues with |lambda| <= tol * max|lambda| are
// zeroed.
Matrix pinv(const Matrix& symmetric, double tol = 1e-10);

struct CheckReport {
  bool passed = false;
  int trials = 0;
  double worst_slack = 0.0;    // most negative ordered-spectrum gap seen
  double loewner_slack = 0.0;  // most negative eigenvalue of RHS - LHS (informational)
  std::string detail;
};

// Randomized verifier of the restricted-sandwich comparison between
//   C_lhs = Q3 (Q3' Q1 Q3 + lambda I)^{-1} Q3' Q2 Q3 (Q3' Q1 Q3 + lambda I)^{-1} Q3'
//   C_rhs = Q1^{-1} Q2 Q1^{-1}
// over random symmetric positive definite Q1, PSD Q2 and p x q maps Q3.
//
// The verified property is the one the dominance theorems consume: the
// quadratic forms (1/2) N' Q1 N they induce are spectrally ordered, i.e. the
// sorted eigenvalues of Q1^{1/2} C Q1^{1/2} satisfy lhs_i <= rhs_i for every
// i. (The raw Loewner gap C_rhs - C_lhs can be indefinite for generic Q2 --
// it is reported in `loewner_slack` -- but spectral ordering is exactly what
// first-order dominance of the induced Gaussian quadratic forms requires.)
CheckReport check_lemma2(RngStream& rng, int p, int q, double lambda, int trials);

// Same comparison with an orthogonal projector Q0 and pseudoinverses:
//   C_lhs = Q0 Q3 (...)^{-1} ... Q3' Q0,
//   C_rhs = Q0 (Q0 Q1 Q0)^+ Q2 (Q0 Q1 Q0)^+ Q0,
// induced form matrix Q0 Q1 Q0 with rank(Q0 Q1 Q0) = rank(Q0).
CheckReport check_lemma3(RngStream& rng, int p, int q, double lambda, int trials);

// Sampling check that Q1 <= Q2 implies Y1' Q3 Y1 is stochastically dominated
// by Y2' Q3 Y2 for Gaussian vectors Y_i ~ N(0, Q_i).
CheckReport check_lemma1_sd(RngStream& rng, int dim, int num_samples, int trials);

// min eigenvalue of Cov_IEO - FisherInfo^{-1} >= -1e-7 (the Cramer-Rao side
// of the ETO vs IEO comparison).
CheckReport check_cramer_rao(const CovModel& cov);

struct MisspecLimits {
  double theta_kl = 0.0;   // maximizer of the population log-likelihood
  double theta_star = 0.0; // minimizer of theta -> v0(omega_theta)
  double kappa_eto = 0.0;  // v0(omega_{theta_kl}) - v0(omega*)
  double kappa_ieo = 0.0;  // v0(omega_{theta_star}) - v0(omega*)
};

// Population limits of the newsvendor pipelines when the assumed family has
// the wrong sigmas. theta_kl is closed form for Gaussian scale
// misspecification; theta_star comes from a golden search with automatic
// bracket widening.
MisspecLimits misspec_limits(const NewsvendorSpec& spec, const ScaledMeanGaussianFamily& assumed,
                             const std::vector<double>& true_mu,
                             const std::vector<double>& true_sigma);

enum class SdVerdict { XDominated, YDominated, Indistinguishable, Violated };
const char* to_string(SdVerdict v);

// Empirical first-order dominance test on a merged-quantile grid with a
// two-sample DKW band: delta(t) = Fx(t) - Fy(t); X is declared dominated by Y
// (X stochastically smaller) when delta stays above -band and exceeds +band
// somewhere.
SdVerdict sd_test(const std::vector<double>& samples_x, const std::vector<double>& samples_y,
                  int grid_size = 512, double alpha = 1e-3);

}  // namespace ddso
