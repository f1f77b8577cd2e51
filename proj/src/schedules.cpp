#include "mtsa/schedules.hpp"

#include <cmath>
#include <sstream>

#include "mtsa/errors.hpp"

namespace mtsa {

double Schedule::value(std::uint64_t t) const {
  return scale / std::pow(static_cast<double>(t) + 1.0, exponent);
}

void Schedule::validate() const {
  // scale == 0 is accepted: it freezes a recursion (no-learning runs).
  if (!std::isfinite(scale) || scale < 0.0) throw ConfigError("schedule scale must be >= 0");
  if (!std::isfinite(exponent) || exponent < 0.0) throw ConfigError("schedule exponent must be finite and >= 0");
}

double StepSize::value(std::uint64_t t) const {
  const double num = numerator.value(t);
  return denominator ? num / denominator->value(t) : num;
}

double StepSize::effective_exponent() const {
  return denominator ? numerator.exponent - denominator->exponent : numerator.exponent;
}

Schedule StepSize::effective_schedule() const {
  if (!denominator) return numerator;
  return {numerator.scale / denominator->scale, effective_exponent()};
}

bool ValidationReport::pass() const {
  for (const auto& c : clauses)
    if (!c.pass) return false;
  return true;
}

const ClauseResult* ValidationReport::clause(const std::string& name) const {
  for (const auto& c : clauses)
    if (c.name == name) return &c;
  return nullptr;
}

std::string ValidationReport::to_text() const {
  std::ostringstream os;
  os << title << ": " << (pass() ? "PASS" : "FAIL") << "\n";
  if (!effective_exponents.empty()) {
    os << "  effective exponents:";
    for (double e : effective_exponents) os << " " << e;
    os << "\n";
  }
  for (const auto& c : clauses) {
    os << "  [" << (c.pass ? "pass" : "FAIL") << "] " << c.name;
    if (!c.detail.empty()) os << " - " << c.detail;
    os << "\n";
  }
  return os.str();
}

nlohmann::json ValidationReport::to_json() const {
  nlohmann::json j;
  j["title"] = title;
  j["pass"] = pass();
  j["effective_exponents"] = effective_exponents;
  nlohmann::json cl = nlohmann::json::object();
  for (const auto& c : clauses) cl[c.name] = {{"pass", c.pass}, {"detail", c.detail}};
  j["clauses"] = cl;
  return j;
}

namespace {

bool strictly_less(double a, double b) { return a < b - kExponentTol; }

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

}  // namespace

ValidationReport validate_theoretical(const ScheduleSet& ss) {
  ValidationReport r;
  r.title = "theoretical step-size conditions";
  for (const auto& s : ss) r.effective_exponents.push_back(s.exponent);

  ClauseResult positive{"positive", !ss.empty(), ss.empty() ? "no schedules" : ""};
  ClauseResult divergent{"divergent_sums", !ss.empty(), ""};
  ClauseResult square{"square_summable", !ss.empty(), ""};
  ClauseResult separation{"timescale_separation", !ss.empty(), ""};

  for (std::size_t j = 0; j < ss.size(); ++j) {
    const auto& s = ss[j];
    const std::string tag = "schedule " + std::to_string(j + 1);
    if (!(s.scale > 0.0) || !std::isfinite(s.scale)) {
      positive.pass = false;
      positive.detail += tag + " scale " + fmt(s.scale) + " not > 0; ";
    }
    if (s.exponent > 1.0 + kExponentTol) {
      divergent.pass = false;
      divergent.detail += tag + " exponent " + fmt(s.exponent) + " > 1; ";
    }
    if (!(s.exponent > 0.5 + kExponentTol)) {
      square.pass = false;
      square.detail += tag + " exponent " + fmt(s.exponent) + " <= 1/2; ";
    }
    if (j > 0 && !strictly_less(ss[j - 1].exponent, s.exponent)) {
      separation.pass = false;
      separation.detail += "exponent " + std::to_string(j) + " (" + fmt(ss[j - 1].exponent) +
                           ") not < exponent " + std::to_string(j + 1) + " (" + fmt(s.exponent) +
                           "); ";
    }
  }
  r.clauses = {positive, divergent, square, separation};
  return r;
}

ValidationReport validate_experimental_3ts(double alpha_exp, double beta_exp, double rho_exp) {
  ValidationReport r;
  r.title = "three-timescale step-size conditions";
  r.effective_exponents = {alpha_exp - rho_exp, beta_exp, rho_exp};
  r.clauses.push_back({"alpha < rho + beta", strictly_less(alpha_exp, rho_exp + beta_exp),
                       fmt(alpha_exp) + " vs " + fmt(rho_exp + beta_exp)});
  r.clauses.push_back({"beta < rho", strictly_less(beta_exp, rho_exp),
                       fmt(beta_exp) + " vs " + fmt(rho_exp)});
  return r;
}

ValidationReport validate_experimental_4ts(double alpha_exp, double beta_exp, double rho1_exp,
                                           double rho2_exp) {
  ValidationReport r;
  r.title = "four-timescale step-size conditions";
  r.effective_exponents = {alpha_exp - rho1_exp, beta_exp - rho2_exp, rho2_exp, rho1_exp};
  r.clauses.push_back({"alpha < beta + rho1 - rho2",
                       strictly_less(alpha_exp, beta_exp + rho1_exp - rho2_exp),
                       fmt(alpha_exp) + " vs " + fmt(beta_exp + rho1_exp - rho2_exp)});
  r.clauses.push_back({"beta < 2 rho2", strictly_less(beta_exp, 2.0 * rho2_exp),
                       fmt(beta_exp) + " vs " + fmt(2.0 * rho2_exp)});
  r.clauses.push_back({"rho2 < rho1", strictly_less(rho2_exp, rho1_exp),
                       fmt(rho2_exp) + " vs " + fmt(rho1_exp)});
  return r;
}

}  // namespace mtsa
