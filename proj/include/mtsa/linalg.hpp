#pragma once

// Dense real linear algebra for the small systems used throughout the
// library (at most a few dozen rows). Row-major storage, value semantics.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace mtsa {

using Vector = std::vector<double>;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);
  static Matrix column(std::span<const double> v);
  static Matrix from_rows(const std::vector<Vector>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }
  bool empty() const { return entries_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

  std::span<const double> entries() const { return entries_; }
  std::span<double> entries() { return entries_; }
  Vector row(std::size_t i) const;
  Vector col(std::size_t j) const;

  Matrix transpose() const;
  Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
  void set_block(std::size_t r0, std::size_t c0, const Matrix& b);

  bool all_finite() const;

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator-(Matrix a);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, std::span<const double> x);

// Vector helpers.
Vector add(std::span<const double> a, std::span<const double> b);
Vector sub(std::span<const double> a, std::span<const double> b);
Vector scaled(std::span<const double> a, double s);
void axpy(double s, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> a, std::span<const double> b);
double norm_inf(std::span<const double> a);
double norm2(std::span<const double> a);
double norm_inf(const Matrix& a);
Matrix outer(std::span<const double> a, std::span<const double> b);

/// Solves a·x = b by Gaussian elimination with partial pivoting.
/// Throws SingularMatrix when a pivot magnitude falls to 1e-12 or below.
Matrix solve(const Matrix& a, const Matrix& b);
Vector solve(const Matrix& a, std::span<const double> b);
Matrix inverse(const Matrix& a);

/// Symmetric P with aᵀP + Pa = −I, via the n²×n² Kronecker system.
/// Throws SingularMatrix when a has eigenvalue pairs summing to zero.
Matrix lyapunov_solve(const Matrix& a);

struct HurwitzDiagnosis {
  bool hurwitz = false;
  bool marginal = false;  // Lyapunov system singular
  double max_sym_eig = 0.0;
  std::string detail;
};

HurwitzDiagnosis diagnose_hurwitz(const Matrix& a);
bool is_hurwitz(const Matrix& a);

/// Cholesky-based positive-definiteness test with pivots relative to the
/// largest diagonal entry.
bool is_positive_definite(const Matrix& p, double rel_tol = 1e-12);

/// Eigenvalues of (a+aᵀ)/2 by cyclic Jacobi, ascending.
Vector sym_eigenvalues(const Matrix& a);
double sym_max_eig(const Matrix& a);

double determinant(const Matrix& a);
std::string to_string(const Matrix& a, int precision = 6);
std::string to_string(std::span<const double> v, int precision = 6);

}  // namespace mtsa
