// Small dense linear algebra kit. All matrices here are desk-scale (at most
// a few hundred rows in the LP tableau, single digits elsewhere), so the
// implementations favor clarity and determinism over speed.

#pragma once

#include <cstddef>
#include <vector>

namespace ddso {

class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t rows_, cols_;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);
Matrix transpose(const Matrix& a);
Matrix diag(const std::vector<double>& d);

std::vector<double> mat_vec(const Matrix& a, const std::vector<double>& x);
double dot(const std::vector<double>& a, const std::vector<double>& b);

double max_abs_diff(const Matrix& a, const Matrix& b);
bool is_symmetric(const Matrix& a, double tol = 1e-10);

struct EigenSym {
  std::vector<double> values;  // ascending
  Matrix vectors;              // columns are eigenvectors, same order
};

// Cyclic Jacobi rotations for a symmetric matrix. Converges to machine
// precision in a handful of sweeps at these sizes.
EigenSym jacobi_eigen(const Matrix& a, int max_sweeps = 100);

double min_eigenvalue(const Matrix& symmetric);

// Symmetric PSD square root; eigenvalues below eps are clamped to zero.
Matrix sym_sqrt(const Matrix& symmetric, double eps = 1e-12);

// Inverse of a symmetric positive definite matrix via eigendecomposition.
// Throws std::runtime_error (with the condition number) when an eigenvalue
// falls below rel_tol * max |eig|.
Matrix sym_inverse(const Matrix& symmetric, double rel_tol = 1e-12);

// Gaussian elimination with partial pivoting. Throws std::runtime_error on
// (numerically) singular systems.
std::vector<double> solve_linear(Matrix a, std::vector<double> b);

}  // namespace ddso
