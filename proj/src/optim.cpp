#include "ddso/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ddso {

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration_limit";
  }
  return "unknown";
}

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kZeroTol = 1e-11;

// Standard-form tableau for min c^T x, Ax = b, x >= 0 with b >= 0.
struct Tableau {
  std::size_t m = 0;       // constraint rows
  std::size_t n = 0;       // columns excluding rhs
  std::vector<double> t;   // (m+1) x (n+1), last row = objective, last col = rhs
  std::vector<int> basis;  // basic variable per row

  double& at(std::size_t i, std::size_t j) { return t[i * (n + 1) + j]; }
  double at(std::size_t i, std::size_t j) const { return t[i * (n + 1) + j]; }
  double rhs(std::size_t i) const { return at(i, n); }

  void pivot(std::size_t row, std::size_t col) {
    const std::size_t w = n + 1;
    double* pr = &t[row * w];
    const double inv = 1.0 / pr[col];
    for (std::size_t j = 0; j < w; ++j) pr[j] *= inv;
    pr[col] = 1.0;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == row) continue;
      double* r = &t[i * w];
      const double f = r[col];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < w; ++j) r[j] -= f * pr[j];
      r[col] = 0.0;
    }
    basis[row] = static_cast<int>(col);
  }

  // One simplex phase with Bland's rule over columns [0, ncols).
  LpStatus run(std::size_t ncols, int max_iters, int& iters) {
    while (iters < max_iters) {
      std::size_t enter = ncols;
      for (std::size_t j = 0; j < ncols; ++j) {
        if (at(m, j) < -kPivotTol) {
          enter = j;
          break;
        }
      }
      if (enter == ncols) return LpStatus::Optimal;

      std::size_t leave = m;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i) {
        const double a = at(i, enter);
        if (a > kPivotTol) {
          const double ratio = rhs(i) / a;
          if (ratio < best_ratio - kZeroTol ||
              (ratio < best_ratio + kZeroTol && (leave == m || basis[i] < basis[leave]))) {
            best_ratio = ratio;
            leave = i;
          }
        }
      }
      if (leave == m) return LpStatus::Unbounded;
      pivot(leave, enter);
      ++iters;
    }
    return LpStatus::IterationLimit;
  }
};

}  // namespace

LpSolution lp_solve(const LpProblem& problem, int max_iters) {
  const std::size_t n_orig = problem.num_vars();
  const std::size_t m1 = problem.b_ub.size();
  const std::size_t m2 = problem.b_eq.size();
  const std::size_t m = m1 + m2;
  if ((m1 > 0 && problem.a_ub.cols() != n_orig) || (m2 > 0 && problem.a_eq.cols() != n_orig) ||
      (m1 > 0 && problem.a_ub.rows() != m1) || (m2 > 0 && problem.a_eq.rows() != m2)) {
    throw std::invalid_argument("lp_solve: inconsistent problem dimensions");
  }

  // Split free variables into positive/negative parts.
  std::vector<std::size_t> neg_col(n_orig, SIZE_MAX);
  std::size_t n_split = n_orig;
  if (!problem.free_var.empty()) {
    for (std::size_t j = 0; j < n_orig; ++j) {
      if (problem.free_var[j]) neg_col[j] = n_split++;
    }
  }

  const std::size_t n_slack = m1;
  const std::size_t n_total = n_split + n_slack + m;  // artificials upper bound
  Tableau tb;
  tb.m = m;
  tb.n = n_total;
  tb.t.assign((m + 1) * (n_total + 1), 0.0);
  tb.basis.assign(m, -1);

  auto fill_row = [&](std::size_t row, const Matrix& a, std::size_t src, double rhs_val) {
    const double sign = (rhs_val < 0.0) ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n_orig; ++j) {
      const double v = sign * a(src, j);
      tb.at(row, j) = v;
      if (neg_col[j] != SIZE_MAX) tb.at(row, neg_col[j]) = -v;
    }
    tb.at(row, tb.n) = sign * rhs_val;
    return sign;
  };

  std::size_t n_art = 0;
  std::vector<std::size_t> art_rows;
  for (std::size_t i = 0; i < m1; ++i) {
    const double sign = fill_row(i, problem.a_ub, i, problem.b_ub[i]);
    tb.at(i, n_split + i) = sign;  // slack
    if (sign > 0.0) {
      tb.basis[i] = static_cast<int>(n_split + i);
    } else {
      art_rows.push_back(i);
    }
  }
  for (std::size_t i = 0; i < m2; ++i) {
    fill_row(m1 + i, problem.a_eq, i, problem.b_eq[i]);
    art_rows.push_back(m1 + i);
  }
  for (std::size_t r : art_rows) {
    const std::size_t col = n_split + n_slack + n_art;
    tb.at(r, col) = 1.0;
    tb.basis[r] = static_cast<int>(col);
    ++n_art;
  }
  const std::size_t n_used = n_split + n_slack + n_art;
  tb.n = n_total;  // row width fixed; columns beyond n_used stay zero

  LpSolution sol;
  int iters = 0;

  // Phase 1: minimize the sum of artificials.
  if (n_art > 0) {
    for (std::size_t k = 0; k < n_art; ++k) tb.at(m, n_split + n_slack + k) = 1.0;
    for (std::size_t r : art_rows) {
      for (std::size_t j = 0; j <= tb.n; ++j) tb.at(m, j) -= tb.at(r, j);
    }
    const LpStatus st = tb.run(n_used, max_iters, iters);
    if (st == LpStatus::IterationLimit) {
      sol.status = st;
      sol.iterations = iters;
      return sol;
    }
    if (-tb.at(m, tb.n) > 1e-7) {
      sol.status = LpStatus::Infeasible;
      sol.iterations = iters;
      return sol;
    }
    // Drive remaining artificials out of the basis.
    for (std::size_t i = 0; i < m; ++i) {
      if (tb.basis[i] >= static_cast<int>(n_split + n_slack)) {
        std::size_t col = n_split + n_slack;
        for (std::size_t j = 0; j < n_split + n_slack; ++j) {
          if (std::fabs(tb.at(i, j)) > kPivotTol) {
            col = j;
            break;
          }
        }
        if (col < n_split + n_slack) {
          tb.pivot(i, col);
        }
        // else: redundant row; its artificial stays basic at value zero.
      }
    }
  }

  // Phase 2: original objective. Zero the artificial columns so they can
  // never re-enter.
  for (std::size_t j = 0; j <= tb.n; ++j) tb.at(m, j) = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < n_art; ++k) tb.at(i, n_split + n_slack + k) = 0.0;
  }
  for (std::size_t j = 0; j < n_orig; ++j) {
    tb.at(m, j) += problem.c[j];
    if (neg_col[j] != SIZE_MAX) tb.at(m, neg_col[j]) -= problem.c[j];
  }
  for (std::size_t i = 0; i < m; ++i) {
    const int bj = tb.basis[i];
    if (bj < 0) continue;
    const double cost = tb.at(m, bj);
    if (cost == 0.0) continue;
    for (std::size_t j = 0; j <= tb.n; ++j) tb.at(m, j) -= cost * tb.at(i, j);
  }

  const LpStatus st = tb.run(n_split + n_slack, max_iters, iters);
  sol.status = st;
  sol.iterations = iters;
  if (st != LpStatus::Optimal) return sol;

  std::vector<double> xs(n_used, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (tb.basis[i] >= 0) xs[tb.basis[i]] = tb.rhs(i);
  }
  sol.x.assign(n_orig, 0.0);
  for (std::size_t j = 0; j < n_orig; ++j) {
    sol.x[j] = xs[j];
    if (neg_col[j] != SIZE_MAX) sol.x[j] -= xs[neg_col[j]];
  }
  sol.objective = dot(problem.c, sol.x);
  return sol;
}

std::pair<double, double> grid_search_1d(const std::function<double(double)>& f, double lo,
                                         double hi, double step) {
  if (!(lo < hi) || !(step > 0.0)) {
    throw std::domain_error("grid_search_1d: requires lo < hi and step > 0");
  }
  const long num_steps = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  double best_theta = lo;
  double best_value = f(lo);
  for (long k = 1; k <= num_steps; ++k) {
    const double theta = lo + static_cast<double>(k) * step;
    const double v = f(theta);
    if (v < best_value) {
      best_value = v;
      best_theta = theta;
    }
  }
  return {best_theta, best_value};
}

double golden_refine(const std::function<double(double)>& f, double a, double b, double tol) {
  if (!(b > a) || !(tol > 0.0)) {
    throw std::domain_error("golden_refine: requires b > a and tol > 0");
  }
  constexpr double invphi = 0.6180339887498949;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             const std::vector<double>& x0, double scale, double tol,
                             int max_iters) {
  const std::size_t k = x0.size();
  if (k == 0) throw std::invalid_argument("nelder_mead: empty start point");
  const double f0 = f(x0);
  if (!std::isfinite(f0)) throw std::invalid_argument("nelder_mead: non-finite f at start");

  std::vector<std::vector<double>> xs(k + 1, x0);
  std::vector<double> fs(k + 1, f0);
  for (std::size_t i = 0; i < k; ++i) {
    xs[i + 1][i] += (scale != 0.0 ? scale : 1.0);
    fs[i + 1] = f(xs[i + 1]);
  }

  auto order = [&]() {
    std::vector<std::size_t> idx(k + 1);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      if (fs[a] != fs[b]) return fs[a] < fs[b];
      return a < b;
    });
    std::vector<std::vector<double>> nx(k + 1);
    std::vector<double> nf(k + 1);
    for (std::size_t i = 0; i <= k; ++i) {
      nx[i] = xs[idx[i]];
      nf[i] = fs[idx[i]];
    }
    xs = std::move(nx);
    fs = std::move(nf);
  };

  int it = 0;
  for (; it < max_iters; ++it) {
    order();
    double diam = 0.0;
    for (std::size_t i = 1; i <= k; ++i)
      for (std::size_t j = 0; j < k; ++j) diam = std::max(diam, std::fabs(xs[i][j] - xs[0][j]));
    if (diam < tol) break;

    std::vector<double> centroid(k, 0.0);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) centroid[j] += xs[i][j] / static_cast<double>(k);

    auto blend = [&](double coef) {
      std::vector<double> p(k);
      for (std::size_t j = 0; j < k; ++j) p[j] = centroid[j] + coef * (centroid[j] - xs[k][j]);
      return p;
    };

    const std::vector<double> xr = blend(1.0);
    const double fr = f(xr);
    if (fr < fs[0]) {
      const std::vector<double> xe = blend(2.0);
      const double fe = f(xe);
      if (fe < fr) {
        xs[k] = xe;
        fs[k] = fe;
      } else {
        xs[k] = xr;
        fs[k] = fr;
      }
    } else if (fr < fs[k - 1]) {
      xs[k] = xr;
      fs[k] = fr;
    } else {
      const std::vector<double> xc = blend(fr < fs[k] ? 0.5 : -0.5);
      const double fc = f(xc);
      if (fc < std::min(fr, fs[k])) {
        xs[k] = xc;
        fs[k] = fc;
      } else {
        for (std::size_t i = 1; i <= k; ++i) {
          for (std::size_t j = 0; j < k; ++j) xs[i][j] = 0.5 * (xs[i][j] + xs[0][j]);
          fs[i] = f(xs[i]);
        }
      }
    }
  }
  order();
  return {xs[0], fs[0], it};
}

std::vector<double> project_to_simplex(std::vector<double> v) {
  const std::size_t n = v.size();
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumsum = 0.0, tau = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cumsum += u[i];
    const double t = (cumsum - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) tau = t;
  }
  for (std::size_t i = 0; i < n; ++i) v[i] = std::max(v[i] - tau, 0.0);
  // Remove the tiny drift so the weights sum to one exactly.
  double s = std::accumulate(v.begin(), v.end(), 0.0);
  if (s > 0.0) {
    for (double& w : v) w /= s;
  } else {
    std::fill(v.begin(), v.end(), 1.0 / static_cast<double>(n));
  }
  return v;
}

std::vector<double> water_filling_simplex(const std::vector<double>& theta,
                                          const std::vector<double>& sig2, double alpha) {
  const std::size_t n = theta.size();
  if (n == 0 || sig2.size() != n) {
    throw std::invalid_argument("water_filling_simplex: dimension mismatch");
  }
  if (!(alpha > 0.0)) throw std::domain_error("water_filling_simplex: alpha must be > 0");
  for (double s : sig2)
    if (!(s > 0.0)) throw std::domain_error("water_filling_simplex: variances must be > 0");

  auto weight = [&](double lambda, std::size_t j) {
    return std::max(0.0, (theta[j] + lambda) / (2.0 * alpha * sig2[j]));
  };
  auto total = [&](double lambda) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += weight(lambda, j);
    return s;
  };

  double lo = -theta[0], hi = 2.0 * alpha * sig2[0] - theta[0];
  for (std::size_t j = 1; j < n; ++j) {
    lo = std::min(lo, -theta[j]);
    hi = std::max(hi, 2.0 * alpha * sig2[j] - theta[j]);
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (total(mid) < 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double lambda = 0.5 * (lo + hi);
  std::vector<double> w(n);
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    w[j] = weight(lambda, j);
    s += w[j];
  }
  for (double& wj : w) wj /= s;  // exact simplex feasibility
  return w;
}

}  // namespace ddso
