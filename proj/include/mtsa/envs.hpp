#pragma once

#include <optional>
#include <string>

#include "mtsa/mrp.hpp"

namespace mtsa {

enum class EnvName { rw5, boyan7 };

struct EnvSpec {
  EnvName name = EnvName::rw5;
  std::optional<double> gamma;
};

EnvName parse_env_name(const std::string& s);
std::string to_string(EnvName e);

inline constexpr double kRw5DefaultGamma = 0.99;
inline constexpr double kBoyan7DefaultGamma = 1.0;

// Five states in a line, start in the middle, +1 for exiting on the right.
// Dependent features (d = 3), every vector of unit norm.
Mrp make_rw5(double gamma = kRw5DefaultGamma);

// States 6..0 then terminal; state j >= 2 steps to j-1 or j-2 (reward -3),
// state 1 steps to 0 (reward -2), state 0 terminates (reward 0). Row index k
// holds state label 6-k. Hat features peaking at 6, 4, 2, 0 (d = 4).
Mrp make_boyan7(double gamma = kBoyan7DefaultGamma);

Mrp make_env(const EnvSpec& spec);

}  // namespace mtsa
