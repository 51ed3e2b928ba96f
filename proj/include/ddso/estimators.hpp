// The three data-driven pipelines.
//
//   SAA: optimize the empirical cost directly over decisions.
//   ETO: fit theta by maximum likelihood, then solve the oracle at theta-hat.
//   IEO: pick theta whose oracle decision minimizes the empirical cost.
//
// Solvers per problem:
//   unconstrained newsvendor  SAA = per-product empirical fractile (equal to
//                             the hinge LP; the LP builders are exposed so
//                             tests can verify the equivalence),
//                             IEO = exact minimizer of the piecewise-linear
//                             empirical cost in the scalar theta (equal to
//                             the LP in theta, u, v),
//   constrained newsvendor    SAA = hinge LP with the capacity row,
//                             IEO = grid over theta centered at the ETO
//                             estimate plus golden refinement, oracle by
//                             binary search,
//   contextual newsvendor     ETO = least squares / uniform MLE, IEO = LP in
//                             (theta, u, v) for the Gaussian family and
//                             Nelder-Mead multi-start for the uniform one,
//   portfolio                 SAA = projected gradient on the simplex,
//                             IEO = Nelder-Mead multi-start around the ETO
//                             estimate with the water-filling oracle inside.

#pragma once

#include <string>
#include <vector>

#include "ddso/optim.hpp"
#include "ddso/problems.hpp"

namespace ddso {

enum class Method { SAA, ETO, IEO };
const char* to_string(Method m);

struct FitResult {
  Method method = Method::SAA;
  Decision decision;          // empty for contextual fits (policy = theta)
  std::vector<double> theta;  // empty for SAA
  double objective = 0.0;     // in-sample objective value of the fit
  std::string solver_status = "ok";
};

struct IeoGridOptions {
  // Grid radius around the ETO estimate; `literal_paper_range` switches to
  // the fixed [2, 4] bracket instead.
  double radius = 1.0;
  double step = 0.01;
  bool literal_paper_range = false;
};

// --- newsvendor (non-contextual) ---
FitResult saa(const NewsvendorSpec& spec, const Dataset& data);
FitResult eto(const NewsvendorSpec& spec, const ScaledMeanGaussianFamily& family,
              const Dataset& data);
FitResult ieo(const NewsvendorSpec& spec, const ScaledMeanGaussianFamily& family,
              const Dataset& data, const IeoGridOptions& grid = {});

// Empirical newsvendor cost of a fixed decision (sum over records).
double nv_empirical_cost(const NewsvendorSpec& spec, const Decision& w, const Dataset& data);

// LP builders (paper formulations) used by the equivalence tests.
LpProblem build_nv_saa_lp(const NewsvendorSpec& spec, const Dataset& data);
LpProblem build_nv_ieo_lp(const NewsvendorSpec& spec, const ScaledMeanGaussianFamily& family,
                          const Dataset& data);

// --- contextual newsvendor ---
// SAA is rejected for contextual problems (any feature-to-decision map would
// overfit); this throws std::invalid_argument.
FitResult saa(const ContextualNewsvendorSpec& spec, const Dataset& data);
FitResult eto(const ContextualNewsvendorSpec& spec, const LinearGaussianFamily& family,
              const Dataset& data);
FitResult ieo(const ContextualNewsvendorSpec& spec, const LinearGaussianFamily& family,
              const Dataset& data);
FitResult eto(const ContextualNewsvendorSpec& spec, const LinearUniformFamily& family,
              const Dataset& data);
FitResult ieo(const ContextualNewsvendorSpec& spec, const LinearUniformFamily& family,
              const Dataset& data);

LpProblem build_ctx_ieo_lp(const ContextualNewsvendorSpec& spec,
                           const LinearGaussianFamily& family, const Dataset& data);

// --- portfolio ---
FitResult saa(const PortfolioSpec& spec, const Dataset& data);
FitResult eto(const PortfolioSpec& spec, const MeanVecGaussianFamily& family, const Dataset& data);
FitResult ieo(const PortfolioSpec& spec, const MeanVecGaussianFamily& family, const Dataset& data);

double portfolio_empirical_cost(const PortfolioSpec& spec, const Decision& w, const Dataset& data);

}  // namespace ddso
