#pragma once

// Shared fixtures for the gtd unit tests and the acceptance suite.

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "mtsa/envs.hpp"
#include "mtsa/gtd.hpp"
#include "mtsa/mrp.hpp"

namespace fixture {

// Step-size exponents used for the two benchmark environments.
inline mtsa::AlgoConfig benchmark_config(mtsa::Algo algo, mtsa::EnvName env) {
  mtsa::AlgoConfig c;
  c.algo = algo;
  c.w = 0.1;
  const bool rw = env == mtsa::EnvName::rw5;
  switch (mtsa::timescales_of(algo)) {
    case 2:
      c.alpha_exp = 0.4;
      c.beta_exp = 0.4;
      break;
    case 3:
      c.alpha_exp = rw ? 0.4 : 0.35;
      c.beta_exp = rw ? 0.4 : 0.35;
      c.rho1_exp = rw ? 0.5 : 0.45;
      break;
    default:
      c.alpha_exp = rw ? 0.4 : 0.35;
      c.beta_exp = rw ? 0.4 : 0.35;
      c.rho1_exp = rw ? 0.5 : 0.45;
      c.rho2_exp = rw ? 0.25 : 0.35;
      break;
  }
  return c;
}

struct Equivalence {
  double max_gap = 0.0;    // sup over steps of the sup-norm gap in theta and u
  double max_scale = 0.0;  // sup-norm of the decomposed iterates seen
  std::uint64_t steps = 0;
};

// Runs the coupled and decomposed forms on one shared i.i.d. sample stream.
inline Equivalence coupled_vs_decomposed(const mtsa::AlgoConfig& cfg, const mtsa::Mrp& m,
                                         std::uint64_t steps, std::uint64_t seed) {
  const mtsa::GtdSystem sys = mtsa::make_algorithm(cfg, m);
  mtsa::SaState st = sys.initial_state(cfg, seed);
  mtsa::CoupledMomentum coupled(cfg, m.feature_dim(), m.gamma());
  mtsa::Rng rng(seed);
  Equivalence out;
  for (std::uint64_t t = 0; t < steps; ++t) {
    const mtsa::Sample s = mtsa::sample_iid(m, rng);
    sys.apply(st, s);
    coupled.step(s);
    const mtsa::Vector& th = sys.theta(st);
    const mtsa::Vector& u = sys.u(st);
    for (std::size_t k = 0; k < th.size(); ++k) {
      out.max_gap = std::max(out.max_gap, std::abs(th[k] - coupled.theta()[k]));
      out.max_gap = std::max(out.max_gap, std::abs(u[k] - coupled.u()[k]));
      out.max_scale = std::max({out.max_scale, std::abs(th[k]), std::abs(u[k])});
    }
    out.steps = t + 1;
  }
  return out;
}

}  // namespace fixture
