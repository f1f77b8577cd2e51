#include <cmath>

#include "doctest.h"
#include "mtsa/envs.hpp"
#include "mtsa/errors.hpp"
#include "mtsa/mrp.hpp"

using namespace mtsa;

TEST_CASE("rw5 features have unit norm and full rank") {
  const Mrp m = make_rw5();
  CHECK(m.n_states() == 5);
  CHECK(m.feature_dim() == 3);
  for (std::size_t s = 0; s < 5; ++s) CHECK(norm2(m.phi(s)) == doctest::Approx(1.0));
  const Matrix& phi = m.features();
  CHECK(determinant(phi.transpose() * phi) > 1e-12);
  CHECK(m.gamma() == doctest::Approx(0.99));
  CHECK_FALSE(m.bound_override_used());
}

TEST_CASE("rw5 dynamics") {
  const Mrp m = make_rw5();
  CHECK(m.transition()(0, 5) == 0.5);
  CHECK(m.transition()(4, 5) == 0.5);
  CHECK(m.reward()(4, 5) == 1.0);
  CHECK(m.reward()(0, 5) == 0.0);
  CHECK(m.start()[2] == 1.0);
  CHECK(m.episodic());
  for (std::size_t s = 0; s < 5; ++s)
    CHECK(m.stationary()[s] == doctest::Approx(std::array<double, 5>{1, 2, 3, 2, 1}[s] / 9.0));
  CHECK(sym_max_eig(gtd_model(m).abar) < 0.0);
}

// Length counts the moves from state 6 down to state 0; the closing
// zero-reward transition out of state 0 is one extra sample.
TEST_CASE("boyan7 episodes take between 3 and 6 moves to reach state 0") {
  const Mrp m = make_boyan7();
  Rng rng(6);
  std::size_t shortest = 100, longest = 0;
  for (int e = 0; e < 5000; ++e) {
    const auto ep = sample_episode(m, rng);
    const std::size_t moves = ep.size() - 1;
    shortest = std::min(shortest, moves);
    longest = std::max(longest, moves);
    CHECK(moves >= 3);
    CHECK(moves <= 6);
    CHECK(ep.back().phi == m.phi(6));
    CHECK(ep.back().phi_next == Vector(4, 0.0));
  }
  CHECK(shortest == 3);
  CHECK(longest == 6);
}

TEST_CASE("boyan7 true values are representable with gamma = 1") {
  const Mrp m = make_boyan7(1.0);
  CHECK(m.bound_override_used());
  const Matrix& phi = m.features();
  CHECK(determinant(phi.transpose() * phi) > 1e-12);
  const std::size_t n = m.n_states();
  // V = r + P V, solved directly.
  const Vector v = solve(Matrix::identity(n) - m.transition_nt(), m.expected_reward());
  // Least-squares theta against the true values.
  const Vector theta = solve(phi.transpose() * phi, phi.transpose() * v);
  const Vector fitted = phi * theta;
  for (std::size_t s = 0; s < n; ++s) CHECK(fitted[s] == doctest::Approx(v[s]).epsilon(1e-12));
  // Row k is label 6 - k, and V(label) = -2 label.
  for (std::size_t k = 0; k < n; ++k) CHECK(v[k] == doctest::Approx(-2.0 * (6.0 - static_cast<double>(k))));
  const GtdModel g = gtd_model(m);
  const Vector spikes{v[0], v[2], v[4], v[6]};
  for (std::size_t i = 0; i < 4; ++i) CHECK(g.theta_star[i] == doctest::Approx(spikes[i]).epsilon(1e-10));
  CHECK(sym_max_eig(g.abar) < 0.0);
}

TEST_CASE("builders are deterministic and honour gamma") {
  CHECK(gtd_model(make_rw5()).abar == gtd_model(make_rw5()).abar);
  CHECK(gtd_model(make_boyan7()).bbar == gtd_model(make_boyan7()).bbar);
  CHECK(make_env({EnvName::boyan7, 0.8}).gamma() == 0.8);
  CHECK(make_env({EnvName::boyan7, std::nullopt}).gamma() == 1.0);
  CHECK(make_env({EnvName::rw5, std::nullopt}).gamma() == 0.99);
  CHECK_THROWS_AS(make_rw5(0.0), InvalidModel);
  CHECK(parse_env_name("rw5") == EnvName::rw5);
  CHECK(to_string(parse_env_name("boyan7")) == "boyan7");
  CHECK_THROWS_AS(parse_env_name("rw13"), ConfigError);
}
