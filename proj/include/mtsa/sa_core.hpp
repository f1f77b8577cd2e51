#pragma once

// Generic N-timescale stochastic approximation:
//
//   x_j <- x_j + a_j(t) * (g_j + eps_j(t)),   j = 1..N, all read at time t,
//
// where g is a noisy drift observation whose conditional mean is h_j(x) and
// eps_j is an optional vanishing perturbation.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "mtsa/linalg.hpp"
#include "mtsa/rng.hpp"
#include "mtsa/schedules.hpp"

namespace mtsa {

using Blocks = std::vector<Vector>;

struct SampledUpdate {
  Blocks g;
};

using DriftFn = std::function<SampledUpdate(std::uint64_t t, const Blocks& x, Rng& rng)>;

// Returns the perturbation for `level`, or an empty vector for none. It sees
// the sampled drift of the current step so that momentum corrections can be
// expressed exactly.
using PerturbationFn = std::function<Vector(std::size_t level, std::uint64_t t, const Blocks& x,
                                            const SampledUpdate& update)>;

inline constexpr double kDivergenceBound = 1e8;

struct SaSystem {
  std::vector<std::size_t> dims;
  std::vector<StepSize> steps;
  DriftFn drift;
  PerturbationFn perturbation;

  std::size_t n_timescales() const { return dims.size(); }
  void validate() const;
};

struct SaState {
  std::uint64_t t = 0;
  Blocks x;
  Rng rng;

  static SaState zeros(const SaSystem& sys, std::uint64_t seed);
};

/// Applies an already-drawn update to the state. Throws DriftError on
/// wrong-shaped or non-finite updates and DivergenceError when any block would
/// leave the sup-norm ball of radius 1e8; the state is left untouched on error.
void apply_update(const SaSystem& sys, SaState& st, const SampledUpdate& update);

/// Draws one sample through sys.drift with st.rng and applies it.
void step_in_place(const SaSystem& sys, SaState& st);
SaState step(const SaSystem& sys, SaState st);

using Probe = std::function<void(const SaState&)>;

/// Folds step() `steps` times; the probe sees the state after each step.
/// Step errors are rethrown with the failing step index attached.
SaState run(const SaSystem& sys, SaState init, std::uint64_t steps, const Probe& probe = {});

// Heavy-ball reparametrization. The coupled recursion
//   theta_{t+1} = theta_t + alpha_t g_t + eta_t (theta_t - theta_{t-1}),
//   eta_t = (rho_t - w alpha_t) / rho_{t-1},
// is realized as the timescale pair
//   v_{t+1} = v_t + xi_t (g_t - w v_t),   xi_t = alpha_t / rho_t,
//   theta_{t+1} = theta_t + rho_t v_{t+1},
// with v_0 = 0 corresponding to theta_{-1} = theta_0.
struct MomentumFragment {
  std::size_t dim = 0;
  double w = 0.0;
  StepSize velocity_step;  // xi_t
  StepSize position_step;  // rho_t

  Vector velocity_drift(const Vector& inner, const Vector& v) const;
  // Position drift is v_t; its perturbation xi_t * (velocity drift) makes the
  // position line consume v_{t+1}.
  Vector position_perturbation(std::uint64_t t, const Vector& velocity_g) const;
};

MomentumFragment momentum_to_timescales(std::size_t theta_dim, double w, const Schedule& fast_sched,
                                        const Schedule& slow_sched);

using InnerFn = std::function<Vector(std::uint64_t t, const Vector& theta, Rng& rng)>;

/// Stand-alone two-timescale system over (v, theta) driven by `inner`.
SaSystem momentum_system(const MomentumFragment& frag, InnerFn inner);

}  // namespace mtsa
