#include <cmath>
#include <stdexcept>

#include "ddso/linalg.hpp"
#include "ddso/stats.hpp"
#include "doctest.h"

using namespace ddso;

namespace {

Matrix random_symmetric(RngStream& rng, std::size_t n, double scale = 1.0) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double v = scale * (2.0 * rng.next_unit() - 1.0);
      m(i, j) = v;
      m(j, i) = v;
    }
  return m;
}

}  // namespace

TEST_CASE("jacobi eigen reproduces known spectra") {
  Matrix a(2, 2);
  a(0, 0) = 2.0;
  a(1, 1) = 2.0;
  a(0, 1) = a(1, 0) = 1.0;
  const EigenSym e = jacobi_eigen(a);
  CHECK(e.values[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e.values[1] == doctest::Approx(3.0).epsilon(1e-12));

  // Reconstruction  A = V diag(lambda) V^T  for random symmetric matrices.
  RngStream rng(123, 0);
  for (int t = 0; t < 25; ++t) {
    const std::size_t n = 2 + (t % 5);
    const Matrix m = random_symmetric(rng, n, 3.0);
    const EigenSym d = jacobi_eigen(m);
    const Matrix rec = d.vectors * diag(d.values) * transpose(d.vectors);
    CHECK(max_abs_diff(rec, m) < 1e-10);
    const Matrix vtv = transpose(d.vectors) * d.vectors;
    CHECK(max_abs_diff(vtv, Matrix::identity(n)) < 1e-10);
  }
}

TEST_CASE("sym_sqrt squares back") {
  RngStream rng(77, 0);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 2 + (t % 4);
    Matrix b = random_symmetric(rng, n, 2.0);
    const Matrix psd = b * transpose(b);
    const Matrix root = sym_sqrt(psd);
    CHECK(max_abs_diff(root * root, psd) < 1e-9);
  }
}

TEST_CASE("solve_linear and sym_inverse") {
  Matrix a(3, 3);
  a(0, 0) = 4;  a(0, 1) = 1;  a(0, 2) = 0;
  a(1, 0) = 1;  a(1, 1) = 3;  a(1, 2) = 1;
  a(2, 0) = 0;  a(2, 1) = 1;  a(2, 2) = 5;
  const std::vector<double> x0 = {1.0, -2.0, 0.5};
  const std::vector<double> b = mat_vec(a, x0);
  const std::vector<double> x = solve_linear(a, b);
  for (int i = 0; i < 3; ++i) CHECK(x[i] == doctest::Approx(x0[i]).epsilon(1e-12));

  const Matrix inv = sym_inverse(a);
  CHECK(max_abs_diff(inv * a, Matrix::identity(3)) < 1e-12);

  Matrix singular(2, 2);
  singular(0, 0) = 1.0;
  singular(0, 1) = 1.0;
  singular(1, 0) = 1.0;
  singular(1, 1) = 1.0;
  CHECK_THROWS_AS(sym_inverse(singular), std::runtime_error);
  CHECK_THROWS_AS(solve_linear(singular, {1.0, 0.0}), std::runtime_error);
}
