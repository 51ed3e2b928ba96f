// Optimization kernels: a dense two-phase simplex LP solver, 1-D grid and
// golden-section search, Nelder-Mead, simplex projection, and the
// water-filling solution of the diagonal simplex QP.

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ddso/linalg.hpp"

namespace ddso {

// min c^T x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0 (or free).
// Free variables are split into nonnegative pairs internally.
struct LpProblem {
  std::vector<double> c;
  Matrix a_ub;
  std::vector<double> b_ub;
  Matrix a_eq;
  std::vector<double> b_eq;
  std::vector<bool> free_var;  // empty means all variables >= 0

  std::size_t num_vars() const { return c.size(); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpSolution {
  LpStatus status = LpStatus::IterationLimit;
  std::vector<double> x;
  double objective = 0.0;
  int iterations = 0;
};

const char* to_string(LpStatus s);

// Dense two-phase simplex with Bland's rule (lowest eligible index enters,
// lowest-index basic variable leaves on ratio ties), which is anti-cycling
// and gives a deterministic vertex among alternate optima.
LpSolution lp_solve(const LpProblem& problem, int max_iters = 50000);

// Argmin of f over {lo, lo+step, ..., hi} (hi included when it lands on the
// grid); ties resolve to the smallest theta.
std::pair<double, double> grid_search_1d(const std::function<double(double)>& f, double lo,
                                         double hi, double step);

// Golden-section refinement of a bracket; returns the midpoint of the final
// interval once it is shorter than tol.
double golden_refine(const std::function<double(double)>& f, double a, double b, double tol);

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
};

// Standard reflect/expand/contract/shrink Nelder-Mead. f may return +inf for
// infeasible points; the starting point must be finite.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             const std::vector<double>& x0, double scale, double tol,
                             int max_iters);

// Euclidean projection onto the probability simplex (sorting algorithm).
std::vector<double> project_to_simplex(std::vector<double> v);

// Minimizer of  alpha * sum_j sig2[j] w_j^2 - sum_j theta[j] w_j  over the
// probability simplex: w_j = max(0, (theta_j + lambda) / (2 alpha sig2_j))
// with lambda found by bisection so the weights sum to one.
std::vector<double> water_filling_simplex(const std::vector<double>& theta,
                                          const std::vector<double>& sig2, double alpha);

}  // namespace ddso
