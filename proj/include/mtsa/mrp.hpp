#pragma once

// Finite Markov reward process under a fixed policy with linear features.
// Transitions are n x (n+1): the last column is the terminal state, whose
// features are the zero vector.

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"
#include "mtsa/linalg.hpp"
#include "mtsa/rng.hpp"

namespace mtsa {

struct Sample {
  Vector phi;
  Vector phi_next;  // zero vector when the transition terminates
  double reward = 0.0;
};

struct MrpSpec {
  std::size_t n_states = 0;
  Matrix transition;  // n x (n+1), row-stochastic
  Matrix reward;      // n x (n+1), expected reward per transition
  double gamma = 1.0;
  Vector start;       // distribution over non-terminal states
  Matrix features;    // n x d
  // Accept |r| > 1 or ||phi|| > 1 (unit bound on data relaxed).
  bool allow_unbounded = false;
};

class Mrp {
 public:
  explicit Mrp(MrpSpec spec);

  std::size_t n_states() const { return spec_.n_states; }
  std::size_t feature_dim() const { return spec_.features.cols(); }
  double gamma() const { return spec_.gamma; }
  const Matrix& transition() const { return spec_.transition; }
  const Matrix& reward() const { return spec_.reward; }
  const Vector& start() const { return spec_.start; }
  const Matrix& features() const { return spec_.features; }
  Vector phi(std::size_t s) const { return spec_.features.row(s); }
  bool bound_override_used() const { return bound_override_used_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  // Non-terminal to non-terminal block.
  Matrix transition_nt() const;
  // Expected one-step reward from each state.
  Vector expected_reward() const;
  // Whether every start state is absorbed into the terminal with probability one.
  bool episodic() const { return episodic_; }
  // Cached stationary distribution of the restart chain.
  const Vector& stationary() const { return stationary_; }

  static Mrp from_json(const nlohmann::json& j);

 private:
  MrpSpec spec_;
  bool bound_override_used_ = false;
  bool episodic_ = false;
  Vector stationary_;
  std::vector<std::string> warnings_;
};

/// Stationary distribution of the chain in which terminal transitions restart
/// from `start`, restricted to non-terminal states. Lazy power iteration to
/// ||dP - d||_1 <= 1e-12. Throws NoConvergence, or ReducibleChain when some
/// state carries less than 1e-15 mass.
Vector stationary_distribution(const Mrp& m);

struct GtdModel {
  Matrix abar;        // E[phi (gamma phi' - phi)^T]
  Vector bbar;        // E[r phi]
  Matrix cbar;        // E[phi phi^T]
  Matrix next_cross;  // E[phi' phi^T]
  Matrix dmat;        // diag(d)
  Vector d;
  Vector theta_star;  // solves abar theta = -bbar
};

GtdModel gtd_model(const Mrp& m);

/// (A theta + b)^T C^{-1} (A theta + b).
double mspbe(const GtdModel& g, std::span<const double> theta);
double rmspbe(const GtdModel& g, std::span<const double> theta);

/// s ~ d, then s' ~ P(s, .), then the reward of (s, s').
Sample sample_iid(const Mrp& m, Rng& rng);

inline constexpr std::size_t kEpisodeCap = 1'000'000;

/// One episode from s0 ~ start until termination; one Sample per transition.
std::vector<Sample> sample_episode(const Mrp& m, Rng& rng);

}  // namespace mtsa
