#pragma once

// Reference computations used by the unit and acceptance tests. They avoid the
// algorithms they check: eigenvalues come from characteristic polynomials,
// MSPBE from the projection form, fixed points from one stacked solve.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "mtsa/conditions.hpp"
#include "mtsa/linalg.hpp"
#include "mtsa/mrp.hpp"

namespace oracle {

using mtsa::Matrix;
using mtsa::Vector;

inline std::vector<std::complex<double>> quadratic_roots(double b, double c) {
  // x^2 + b x + c
  const double disc = b * b - 4.0 * c;
  if (disc >= 0.0) {
    const double s = std::sqrt(disc);
    return {{(-b + s) / 2.0, 0.0}, {(-b - s) / 2.0, 0.0}};
  }
  const double im = std::sqrt(-disc) / 2.0;
  return {{-b / 2.0, im}, {-b / 2.0, -im}};
}

// Real root of x^3 + a2 x^2 + a1 x + a0 by bisection.
inline double cubic_real_root(double a2, double a1, double a0) {
  auto p = [&](double x) { return ((x + a2) * x + a1) * x + a0; };
  const double bound = 1.0 + std::max({std::abs(a2), std::abs(a1), std::abs(a0)});
  double lo = -bound, hi = bound;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if ((p(mid) < 0.0) == (p(lo) < 0.0)) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Eigenvalues of a 1x1, 2x2 or 3x3 matrix from its characteristic polynomial.
inline std::vector<std::complex<double>> char_poly_eigenvalues(const Matrix& a) {
  const std::size_t n = a.rows();
  if (n == 1) return {{a(0, 0), 0.0}};
  if (n == 2) {
    const double tr = a(0, 0) + a(1, 1);
    const double det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    return quadratic_roots(-tr, det);
  }
  const double tr = a(0, 0) + a(1, 1) + a(2, 2);
  const double minors = (a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0)) + (a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0)) +
                        (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1));
  const double det = a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
                     a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
                     a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
  const double a2 = -tr, a1 = minors, a0 = -det;
  const double r = cubic_real_root(a2, a1, a0);
  auto rest = quadratic_roots(a2 + r, a1 + r * (a2 + r));
  rest.insert(rest.begin(), std::complex<double>(r, 0.0));
  return rest;
}

inline double max_real_part(const Matrix& a) {
  double m = -INFINITY;
  for (const auto& z : char_poly_eigenvalues(a)) m = std::max(m, z.real());
  return m;
}

inline double min_abs_real_part(const Matrix& a) {
  double m = INFINITY;
  for (const auto& z : char_poly_eigenvalues(a)) m = std::min(m, std::abs(z.real()));
  return m;
}

// Largest eigenvalue of the symmetric part, for sizes up to 3.
inline double sym_max_eig(const Matrix& a) {
  Matrix s = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
  double m = -INFINITY;
  for (const auto& z : char_poly_eigenvalues(s)) m = std::max(m, z.real());
  return m;
}

// ||Phi theta - Pi (r + gamma P Phi theta)||_D^2 with Pi = Phi (Phi^T D Phi)^-1 Phi^T D.
inline double mspbe_projection(const mtsa::Mrp& m, const Vector& theta) {
  const Matrix& phi = m.features();
  const Vector& d = m.stationary();
  const Matrix dm = Matrix::diagonal(d);
  const Matrix pnt = m.transition_nt();
  const Vector v = phi * theta;
  Vector target = m.expected_reward();
  const Vector pv = pnt * v;
  for (std::size_t i = 0; i < target.size(); ++i) target[i] += m.gamma() * pv[i];
  const Matrix gram = phi.transpose() * dm * phi;
  const Vector proj = phi * mtsa::solve(gram, phi.transpose() * (dm * target));
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) acc += d[i] * (v[i] - proj[i]) * (v[i] - proj[i]);
  return acc;
}

// Coarse-to-fine grid minimizer of f over the box [lo, hi]^3.
template <class F>
Vector grid_minimize3(F f, double lo, double hi, int levels = 40, int points = 21) {
  Vector best{0.5 * (lo + hi), 0.5 * (lo + hi), 0.5 * (lo + hi)};
  double half = 0.5 * (hi - lo);
  for (int level = 0; level < levels; ++level) {
    Vector centre = best;
    double fbest = f(best);
    for (int i = 0; i < points; ++i)
      for (int j = 0; j < points; ++j)
        for (int k = 0; k < points; ++k) {
          const double step = 2.0 * half / (points - 1);
          Vector x{centre[0] - half + i * step, centre[1] - half + j * step, centre[2] - half + k * step};
          const double fx = f(x);
          if (fx < fbest) { fbest = fx; best = x; }
        }
    half *= 0.25;
  }
  return best;
}

// Expected visits to each state of a symmetric walk on 1..n absorbed at 0
// and n+1, started at `start` (Green's function 2 min(i,j) (n+1-max(i,j)) / (n+1)).
inline Vector walk_visits(int n, int start) {
  Vector g(n);
  for (int j = 1; j <= n; ++j) g[j - 1] = 2.0 * std::min(start, j) * (n + 1 - std::max(start, j)) / (n + 1);
  return g;
}

// Fixed point of the stacked system M x + c = 0 in one solve.
inline Vector stacked_fixed_point(const mtsa::AffineCascade& cas) {
  return mtsa::solve(cas.stacked_matrix(), mtsa::scaled(cas.stacked_offset(), -1.0));
}

// Random cascade whose level-i reduced matrix (Schur complement of the leading
// levels) equals -I + noise_scale * N_i with N_i uniform in [-1, 1].
inline mtsa::AffineCascade random_reduced_cascade(const std::vector<std::size_t>& dims, std::uint64_t seed,
                                                  double noise_scale = 0.1, double coupling = 0.5) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto rand_matrix = [&](std::size_t r, std::size_t c, double s) {
    Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) m(i, j) = s * u(gen);
    return m;
  };
  mtsa::AffineCascade cas(dims);
  const std::size_t n = dims.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) cas.set_block(i, j, rand_matrix(dims[i], dims[j], coupling));
    Vector c(dims[i]);
    for (auto& x : c) x = u(gen);
    cas.set_offset(i, c);
  }
  std::size_t lead = 0;
  for (std::size_t i = 0; i < n; ++i) {
    Matrix target = -1.0 * Matrix::identity(dims[i]) + rand_matrix(dims[i], dims[i], noise_scale);
    if (i > 0) {
      // M_ii = T_i + M_{i,<i} M_{<i,<i}^{-1} M_{<i,i}
      const Matrix full = cas.stacked_matrix();
      const Matrix mll = full.block(0, 0, lead, lead);
      const Matrix mil = full.block(lead, 0, dims[i], lead);
      const Matrix mli = full.block(0, lead, lead, dims[i]);
      target += mil * mtsa::solve(mll, mli);
    }
    cas.set_block(i, i, target);
    lead += dims[i];
  }
  return cas;
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

// Running mean and standard error of a scalar stream.
class Accumulator {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  MeanSe result() const {
    const double var = n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
    return {mean_, std::sqrt(var / static_cast<double>(n_))};
  }
  double stddev() const { return n_ > 1 ? std::sqrt(m2_ / static_cast<double>(n_ - 1)) : 0.0; }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0, m2_ = 0.0;
};

}  // namespace oracle
