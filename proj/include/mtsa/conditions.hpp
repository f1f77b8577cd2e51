#pragma once

// Verification of the per-timescale stability/convergence hypotheses for
// affine drift cascades h_i(x) = sum_j M_ij x_j + c_i, and the cascade fixed
// point obtained by eliminating faster timescales one level at a time.
//
// Levels are 0-based in code (level 0 is the fastest). The checker never
// reorders timescales.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mtsa/errors.hpp"
#include "mtsa/linalg.hpp"
#include "mtsa/sa_core.hpp"

namespace mtsa {

class AffineCascade {
 public:
  AffineCascade() = default;
  explicit AffineCascade(std::vector<std::size_t> dims);

  std::size_t levels() const { return dims_.size(); }
  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t total_dim() const;
  std::size_t offset_of(std::size_t level) const;

  const Matrix& block(std::size_t i, std::size_t j) const { return blocks_[i * levels() + j]; }
  void set_block(std::size_t i, std::size_t j, Matrix m);
  const Vector& offset(std::size_t i) const { return offsets_[i]; }
  void set_offset(std::size_t i, Vector c);

  Vector evaluate(std::size_t i, const Blocks& x) const;
  Blocks evaluate(const Blocks& x) const;

  // Stacked form: h(x) = M x + c on the concatenated state.
  Matrix stacked_matrix() const;
  Vector stacked_offset() const;
  Blocks split(const Vector& stacked) const;

  // Operator-norm bound of [M_i1 ... M_iN] (infinity norm).
  double lipschitz_bound(std::size_t i) const;

  static AffineCascade from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

 private:
  std::vector<std::size_t> dims_;
  std::vector<Matrix> blocks_;
  std::vector<Vector> offsets_;
};

// x -> linear * x + offset, where x concatenates the blocks of levels
// first_var..N-1.
struct AffineMap {
  std::size_t first_var = 0;
  Matrix linear;
  Vector offset;

  Vector apply(std::span<const double> x) const;
};

struct LevelVerdict {
  std::size_t level = 0;
  Matrix reduced_matrix;          // coefficient of x_level after elimination
  HurwitzDiagnosis diagnosis;
  bool scaled_clause = false;     // limiting scaled ODE has a g.a.s.e (lambda_inf, or origin at N)
  bool original_clause = false;   // original ODE has a g.a.s.e (lambda, or x* at N)
  bool lambda_inf_vanishes = false;  // lambda_inf(0) == 0
  std::optional<AffineMap> lambda;      // equilibrium map of slower vars (level < N-1)
  std::optional<AffineMap> lambda_inf;  // same for the offset-free cascade
  double scaled_gap_coefficient = 0.0;  // sup over unit ball of |h_c - h_inf| = this / c

  bool pass() const { return scaled_clause && original_clause; }
};

struct CascadeReport {
  std::vector<LevelVerdict> levels;
  bool passed = false;
  std::optional<std::size_t> failing_level;
  Blocks fixed_point;  // populated when passed
  double residual = 0.0;

  std::string to_text() const;
  nlohmann::json to_json() const;
};

class ReductionError : public Error {
 public:
  using Error::Error;
};

class NotHurwitz : public Error {
 public:
  NotHurwitz(std::size_t level, HurwitzDiagnosis diag);
  std::size_t level() const { return level_; }
  const HurwitzDiagnosis& diagnosis() const { return diag_; }

 private:
  std::size_t level_;
  HurwitzDiagnosis diag_;
};

/// h_c for level i with faster levels replaced by their lambda_inf maps:
/// x -> M~_i x + c_i / c over (x_i, ..., x_N). The c -> inf limit is the
/// same linear part with zero offset.
AffineMap scaled_drift(const AffineCascade& cas, std::size_t level, double c);
AffineMap scaled_drift_limit(const AffineCascade& cas, std::size_t level);

/// Reduces levels 0..level and reports the verdict for `level`.
/// Throws ReductionError if a faster level fails, NotHurwitz if `level` fails.
LevelVerdict check_level(const AffineCascade& cas, std::size_t level);

/// Runs every level, never throwing on a failed level.
CascadeReport analyze_cascade(const AffineCascade& cas);

/// Full fixed point by back-substitution. Throws NotHurwitz at a failing level.
CascadeReport cascade_fixed_point(const AffineCascade& cas);

/// Noisy SA system whose conditional-mean drift is the cascade, with i.i.d.
/// Gaussian observation noise of standard deviation sigma on every coordinate.
SaSystem cascade_system(const AffineCascade& cas, std::vector<StepSize> steps, double sigma);

}  // namespace mtsa
