#include "mtsa/linalg.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "mtsa/errors.hpp"

namespace mtsa {

namespace {

constexpr double kPivotTol = 1e-12;
constexpr int kMaxJacobiSweeps = 100;

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string("matrix shape mismatch in ") + op);
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), entries_(rows * cols, fill) {}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  entries_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw std::invalid_argument("ragged matrix literal");
    entries_.insert(entries_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Matrix Matrix::column(std::span<const double> v) {
  Matrix m(v.size(), 1);
  std::copy(v.begin(), v.end(), m.entries_.begin());
  return m;
}

Matrix Matrix::from_rows(const std::vector<Vector>& rows) {
  const std::size_t nc = rows.empty() ? 0 : rows.front().size();
  Matrix m(rows.size(), nc);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != nc) throw std::invalid_argument("ragged matrix rows");
    std::copy(rows[i].begin(), rows[i].end(), m.entries_.begin() + i * nc);
  }
  return m;
}

Vector Matrix::row(std::size_t i) const {
  return Vector(entries_.begin() + i * cols_, entries_.begin() + (i + 1) * cols_);
}

Vector Matrix::col(std::size_t j) const {
  Vector v(rows_);
  for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
  return v;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
  assert(r0 + nr <= rows_ && c0 + nc <= cols_);
  Matrix b(nr, nc);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
  return b;
}

void Matrix::set_block(std::size_t r0, std::size_t c0, const Matrix& b) {
  assert(r0 + b.rows() <= rows_ && c0 + b.cols() <= cols_);
  for (std::size_t i = 0; i < b.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) (*this)(r0 + i, c0 + j) = b(i, j);
}

bool Matrix::all_finite() const {
  return std::all_of(entries_.begin(), entries_.end(), [](double x) { return std::isfinite(x); });
}

Matrix& Matrix::operator+=(const Matrix& o) {
  require_same_shape(*this, o, "+=");
  for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] += o.entries_[k];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  require_same_shape(*this, o, "-=");
  for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] -= o.entries_[k];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& x : entries_) x *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator-(Matrix a) { return a *= -1.0; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matrix product shape mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Vector operator*(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw std::invalid_argument("matrix-vector shape mismatch");
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

Vector add(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  Vector c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
  return c;
}

Vector sub(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  Vector c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
  return c;
}

Vector scaled(std::span<const double> a, double s) {
  Vector c(a.begin(), a.end());
  for (double& x : c) x *= s;
  return c;
}

void axpy(double s, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += s * x[i];
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm_inf(const Matrix& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += std::abs(a(i, j));
    m = std::max(m, s);
  }
  return m;
}

Matrix outer(std::span<const double> a, std::span<const double> b) {
  Matrix m(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = a[i] * b[j];
  return m;
}

Matrix solve(const Matrix& a, const Matrix& b) {
  if (!a.square()) throw std::invalid_argument("solve: matrix not square");
  if (a.rows() != b.rows()) throw std::invalid_argument("solve: rhs row mismatch");
  const std::size_t n = a.rows();
  const std::size_t k = b.cols();
  Matrix lu = a;
  Matrix x = b;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(lu(r, c)) > std::abs(lu(piv, c))) piv = r;
    if (!(std::abs(lu(piv, c)) > kPivotTol)) {
      throw SingularMatrix("pivot " + std::to_string(lu(piv, c)) + " at column " +
                           std::to_string(c));
    }
    if (piv != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(c, j), lu(piv, j));
      for (std::size_t j = 0; j < k; ++j) std::swap(x(c, j), x(piv, j));
    }
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = lu(r, c) / lu(c, c);
      if (f == 0.0) continue;
      for (std::size_t j = c; j < n; ++j) lu(r, j) -= f * lu(c, j);
      for (std::size_t j = 0; j < k; ++j) x(r, j) -= f * x(c, j);
    }
  }
  for (std::size_t ci = n; ci-- > 0;) {
    for (std::size_t j = 0; j < k; ++j) {
      double s = x(ci, j);
      for (std::size_t q = ci + 1; q < n; ++q) s -= lu(ci, q) * x(q, j);
      x(ci, j) = s / lu(ci, ci);
    }
  }
  return x;
}

Vector solve(const Matrix& a, std::span<const double> b) {
  return solve(a, Matrix::column(b)).col(0);
}

Matrix inverse(const Matrix& a) { return solve(a, Matrix::identity(a.rows())); }

Matrix lyapunov_solve(const Matrix& a) {
  if (!a.square()) throw std::invalid_argument("lyapunov_solve: matrix not square");
  const std::size_t n = a.rows();
  // Unknown P(i,j) lives at index i*n+j. Row (i,j) encodes (aᵀP + Pa)(i,j).
  Matrix kron(n * n, n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t row = i * n + j;
      for (std::size_t k = 0; k < n; ++k) {
        kron(row, k * n + j) += a(k, i);
        kron(row, i * n + k) += a(k, j);
      }
    }
  Vector rhs(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) rhs[i * n + i] = -1.0;
  const Vector p = solve(kron, rhs);
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out(i, j) = 0.5 * (p[i * n + j] + p[j * n + i]);
  return out;
}

bool is_positive_definite(const Matrix& p, double rel_tol) {
  if (!p.square()) return false;
  const std::size_t n = p.rows();
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(p(i, i)));
  if (!(scale > 0.0)) return false;
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = p(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > rel_tol * scale)) return false;
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = p(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return true;
}

HurwitzDiagnosis diagnose_hurwitz(const Matrix& a) {
  HurwitzDiagnosis d;
  d.max_sym_eig = sym_max_eig(a);
  try {
    const Matrix p = lyapunov_solve(a);
    d.hurwitz = is_positive_definite(p);
    d.detail = d.hurwitz ? "Lyapunov solution positive definite"
                         : "Lyapunov solution not positive definite";
  } catch (const SingularMatrix&) {
    d.hurwitz = false;
    d.marginal = true;
    d.detail = "Lyapunov system singular (eigenvalue pair sums to zero)";
  }
  return d;
}

bool is_hurwitz(const Matrix& a) { return diagnose_hurwitz(a).hurwitz; }

Vector sym_eigenvalues(const Matrix& a) {
  if (!a.square()) throw std::invalid_argument("sym_eigenvalues: matrix not square");
  const std::size_t n = a.rows();
  Matrix s = 0.5 * (a + a.transpose());
  auto off_norm = [&] {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) acc += s(i, j) * s(i, j);
    return std::sqrt(acc);
  };
  double frob = 0.0;
  for (double x : s.entries()) frob += x * x;
  const double tol = 1e-12 * std::max(1.0, std::sqrt(frob));

  int sweep = 0;
  while (off_norm() > tol) {
    if (++sweep > kMaxJacobiSweeps) throw NoConvergence("Jacobi: no convergence after 100 sweeps");
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = s(p, q);
        if (apq == 0.0) continue;
        const double theta = (s(q, q) - s(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double skp = s(k, p);
          const double skq = s(k, q);
          s(k, p) = c * skp - sn * skq;
          s(k, q) = sn * skp + c * skq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double spk = s(p, k);
          const double sqk = s(q, k);
          s(p, k) = c * spk - sn * sqk;
          s(q, k) = sn * spk + c * sqk;
        }
      }
  }
  Vector ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = s(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

double sym_max_eig(const Matrix& a) { return sym_eigenvalues(a).back(); }

double determinant(const Matrix& a) {
  if (!a.square()) throw std::invalid_argument("determinant: matrix not square");
  const std::size_t n = a.rows();
  Matrix lu = a;
  double det = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(lu(r, c)) > std::abs(lu(piv, c))) piv = r;
    if (lu(piv, c) == 0.0) return 0.0;
    if (piv != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(c, j), lu(piv, j));
      det = -det;
    }
    det *= lu(c, c);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = lu(r, c) / lu(c, c);
      for (std::size_t j = c; j < n; ++j) lu(r, j) -= f * lu(c, j);
    }
  }
  return det;
}

std::string to_string(const Matrix& a, int precision) {
  std::ostringstream os;
  os << std::setprecision(precision);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    os << (i == 0 ? "[[" : " [");
    for (std::size_t j = 0; j < a.cols(); ++j) os << (j ? ", " : "") << a(i, j);
    os << (i + 1 == a.rows() ? "]]" : "]\n");
  }
  if (a.rows() == 0) os << "[]";
  return os.str();
}

std::string to_string(std::span<const double> v, int precision) {
  std::ostringstream os;
  os << std::setprecision(precision) << "(";
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ")";
  return os.str();
}

}  // namespace mtsa
