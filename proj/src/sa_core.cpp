#include "mtsa/sa_core.hpp"

#include <cmath>
#include <string>

#include "mtsa/errors.hpp"

namespace mtsa {

void SaSystem::validate() const {
  if (dims.empty()) throw ConfigError("SaSystem needs at least one timescale");
  if (steps.size() != dims.size()) throw ConfigError("SaSystem: one step size per timescale");
  for (std::size_t d : dims)
    if (d == 0) throw ConfigError("SaSystem: block dimensions must be >= 1");
  if (!drift) throw ConfigError("SaSystem: drift evaluator missing");
}

SaState SaState::zeros(const SaSystem& sys, std::uint64_t seed) {
  SaState st;
  st.rng = Rng(seed);
  for (std::size_t d : sys.dims) st.x.emplace_back(d, 0.0);
  return st;
}

void apply_update(const SaSystem& sys, SaState& st, const SampledUpdate& update) {
  const std::size_t n = sys.n_timescales();
  if (update.g.size() != n) throw DriftError("drift returned wrong number of blocks");
  for (std::size_t j = 0; j < n; ++j) {
    if (update.g[j].size() != sys.dims[j]) {
      throw DriftError("drift block " + std::to_string(j) + " has wrong length");
    }
    for (double v : update.g[j])
      if (!std::isfinite(v)) throw DriftError("drift block " + std::to_string(j) + " not finite");
  }

  Blocks next = st.x;
  for (std::size_t j = 0; j < n; ++j) {
    const double a = sys.steps[j].value(st.t);
    Vector eps;
    if (sys.perturbation) eps = sys.perturbation(j, st.t, st.x, update);
    if (!eps.empty() && eps.size() != sys.dims[j]) {
      throw DriftError("perturbation block " + std::to_string(j) + " has wrong length");
    }
    auto& xj = next[j];
    const auto& gj = update.g[j];
    for (std::size_t k = 0; k < xj.size(); ++k) {
      const double dir = eps.empty() ? gj[k] : gj[k] + eps[k];
      xj[k] += a * dir;
    }
    const double m = norm_inf(xj);
    if (!std::isfinite(m) || m > kDivergenceBound) {
      throw DivergenceError("block " + std::to_string(j) + " left the stability bound at t=" +
                            std::to_string(st.t));
    }
  }
  st.x = std::move(next);
  ++st.t;
}

void step_in_place(const SaSystem& sys, SaState& st) {
  const SampledUpdate u = sys.drift(st.t, st.x, st.rng);
  apply_update(sys, st, u);
}

SaState step(const SaSystem& sys, SaState st) {
  step_in_place(sys, st);
  return st;
}

SaState run(const SaSystem& sys, SaState init, std::uint64_t steps, const Probe& probe) {
  sys.validate();
  for (std::uint64_t k = 0; k < steps; ++k) {
    try {
      step_in_place(sys, init);
    } catch (StepError& e) {
      e.set_step_index(k);
      throw;
    }
    if (probe) probe(init);
  }
  return init;
}

Vector MomentumFragment::velocity_drift(const Vector& inner, const Vector& v) const {
  Vector g(inner.size());
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = inner[k] - w * v[k];
  return g;
}

Vector MomentumFragment::position_perturbation(std::uint64_t t, const Vector& velocity_g) const {
  return scaled(velocity_g, velocity_step.value(t));
}

MomentumFragment momentum_to_timescales(std::size_t theta_dim, double w, const Schedule& fast_sched,
                                        const Schedule& slow_sched) {
  fast_sched.validate();
  slow_sched.validate();
  if (!(slow_sched.scale > 0.0)) throw ConfigError("momentum: slow schedule must be positive");
  MomentumFragment f;
  f.dim = theta_dim;
  f.w = w;
  f.velocity_step = StepSize::ratio(fast_sched, slow_sched);
  f.position_step = StepSize::of(slow_sched);
  return f;
}

SaSystem momentum_system(const MomentumFragment& frag, InnerFn inner) {
  SaSystem sys;
  sys.dims = {frag.dim, frag.dim};
  sys.steps = {frag.velocity_step, frag.position_step};
  sys.drift = [frag, inner = std::move(inner)](std::uint64_t t, const Blocks& x, Rng& rng) {
    const Vector g = inner(t, x[1], rng);
    return SampledUpdate{{frag.velocity_drift(g, x[0]), x[0]}};
  };
  sys.perturbation = [frag](std::size_t level, std::uint64_t t, const Blocks&,
                            const SampledUpdate& u) -> Vector {
    if (level != 1) return {};
    return frag.position_perturbation(t, u.g[0]);
  };
  return sys;
}

}  // namespace mtsa
