#pragma once

// Polynomial step-size schedules scale/(t+1)^exponent and validators for the
// step-size conditions of multi-timescale recursions.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace mtsa {

struct Schedule {
  double scale = 1.0;
  double exponent = 1.0;

  double value(std::uint64_t t) const;
  void validate() const;

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

// Index 0 is the fastest timescale.
using ScheduleSet = std::vector<Schedule>;

// A per-timescale step size: either a schedule or the ratio of two schedules
// (the velocity step of a heavy-ball decomposition is alpha_t / rho_t).
struct StepSize {
  Schedule numerator;
  std::optional<Schedule> denominator;

  static StepSize of(Schedule s) { return {s, std::nullopt}; }
  static StepSize ratio(Schedule num, Schedule den) { return {num, den}; }

  double value(std::uint64_t t) const;
  // Exponent p such that value(t) is proportional to (t+1)^-p.
  double effective_exponent() const;
  Schedule effective_schedule() const;
};

struct ClauseResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ValidationReport {
  std::string title;
  std::vector<ClauseResult> clauses;
  std::vector<double> effective_exponents;

  bool pass() const;
  const ClauseResult* clause(const std::string& name) const;
  std::string to_text() const;
  nlohmann::json to_json() const;
};

inline constexpr double kExponentTol = 1e-12;

/// Clauses: positivity, divergent sums (every exponent <= 1),
/// square-summability (every exponent > 1/2), and timescale separation
/// (strictly increasing exponents).
ValidationReport validate_theoretical(const ScheduleSet& ss);

/// Step-size conditions for the three-timescale momentum schemes in terms of
/// the raw alpha, beta, rho exponents: alpha < rho + beta and beta < rho.
ValidationReport validate_experimental_3ts(double alpha_exp, double beta_exp, double rho_exp);

/// Four-timescale conditions: alpha < beta + rho1 - rho2, beta < 2 rho2, rho2 < rho1.
ValidationReport validate_experimental_4ts(double alpha_exp, double beta_exp, double rho1_exp,
                                           double rho2_exp);

}  // namespace mtsa
