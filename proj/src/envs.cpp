#include "mtsa/envs.hpp"

#include <cmath>

#include "mtsa/errors.hpp"

namespace mtsa {

EnvName parse_env_name(const std::string& s) {
  if (s == "rw5") return EnvName::rw5;
  if (s == "boyan7") return EnvName::boyan7;
  throw ConfigError("unknown environment '" + s + "' (expected rw5 or boyan7)");
}

std::string to_string(EnvName e) { return e == EnvName::rw5 ? "rw5" : "boyan7"; }

Mrp make_rw5(double gamma) {
  constexpr std::size_t n = 5;
  MrpSpec spec;
  spec.n_states = n;
  spec.gamma = gamma;
  spec.transition = Matrix(n, n + 1);
  spec.reward = Matrix(n, n + 1);
  for (std::size_t s = 0; s < n; ++s) {
    // Exiting on either side lands in the terminal column.
    const std::size_t left = s == 0 ? n : s - 1;
    const std::size_t right = s + 1 == n ? n : s + 1;
    spec.transition(s, left) += 0.5;
    spec.transition(s, right) += 0.5;
  }
  spec.reward(n - 1, n) = 1.0;
  spec.start = {0.0, 0.0, 1.0, 0.0, 0.0};
  const double a = 1.0 / std::sqrt(2.0);
  const double b = 1.0 / std::sqrt(3.0);
  spec.features = Matrix{{1.0, 0.0, 0.0}, {a, a, 0.0}, {b, b, b}, {0.0, a, a}, {0.0, 0.0, 1.0}};
  return Mrp(std::move(spec));
}

Mrp make_boyan7(double gamma) {
  constexpr std::size_t n = 7;
  MrpSpec spec;
  spec.n_states = n;
  spec.gamma = gamma;
  spec.transition = Matrix(n, n + 1);
  spec.reward = Matrix(n, n + 1);
  auto row_of = [](int label) { return static_cast<std::size_t>(6 - label); };
  for (int label = 6; label >= 2; --label) {
    const std::size_t s = row_of(label);
    spec.transition(s, row_of(label - 1)) = 0.5;
    spec.transition(s, row_of(label - 2)) = 0.5;
    spec.reward(s, row_of(label - 1)) = -3.0;
    spec.reward(s, row_of(label - 2)) = -3.0;
  }
  spec.transition(row_of(1), row_of(0)) = 1.0;
  spec.reward(row_of(1), row_of(0)) = -2.0;
  spec.transition(row_of(0), n) = 1.0;
  spec.start = Vector(n, 0.0);
  spec.start[row_of(6)] = 1.0;
  spec.features = Matrix{{1.0, 0.0, 0.0, 0.0}, {0.5, 0.5, 0.0, 0.0}, {0.0, 1.0, 0.0, 0.0},
                         {0.0, 0.5, 0.5, 0.0}, {0.0, 0.0, 1.0, 0.0}, {0.0, 0.0, 0.5, 0.5},
                         {0.0, 0.0, 0.0, 1.0}};
  // Rewards reach -3, beyond the unit bound.
  spec.allow_unbounded = true;
  return Mrp(std::move(spec));
}

Mrp make_env(const EnvSpec& spec) {
  switch (spec.name) {
    case EnvName::rw5:
      return make_rw5(spec.gamma.value_or(kRw5DefaultGamma));
    case EnvName::boyan7:
      return make_boyan7(spec.gamma.value_or(kBoyan7DefaultGamma));
  }
  throw ConfigError("unknown environment");
}

}  // namespace mtsa
