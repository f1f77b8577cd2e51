#pragma once

// GTD2 / TDC and their heavy-ball variants as multi-timescale SA systems.
//
// Block layouts (fastest first):
//   vanilla : (u, theta)          steps (beta, alpha)
//   M-3TS   : (v, u, theta)       steps (alpha/rho1, beta, rho1)
//   M-4TS   : (v, z, u, theta)    steps (alpha/rho1, beta/rho2, rho2, rho1)

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "mtsa/conditions.hpp"
#include "mtsa/mrp.hpp"
#include "mtsa/sa_core.hpp"
#include "mtsa/schedules.hpp"

namespace mtsa {

enum class Algo { gtd2, tdc, gtd2_m3, tdc_m3, gtd2_m4, tdc_m4 };
enum class BaseAlgo { gtd2, tdc };

Algo parse_algo(const std::string& s);
std::string to_string(Algo a);
BaseAlgo base_of(Algo a);
std::size_t timescales_of(Algo a);
inline bool is_momentum(Algo a) { return timescales_of(a) > 2; }

struct AlgoConfig {
  Algo algo = Algo::gtd2;
  std::optional<double> alpha_exp;
  std::optional<double> beta_exp;
  std::optional<double> rho1_exp;
  std::optional<double> rho2_exp;
  // Common scale of every schedule; 0 freezes learning.
  double step_scale = 1.0;
  double w = 0.1;
  Vector theta0;  // empty means zeros
  Vector u0;

  /// Throws ConfigError when an exponent required by the algorithm is
  /// missing or out of range, or when w <= 0 for a momentum variant.
  void validate() const;
  /// Step-size conditions the experiments rely on (always passes for vanilla).
  ValidationReport experimental_report() const;
  /// Square-summable theory conditions on the effective per-level schedules.
  ValidationReport theoretical_report() const;
  std::vector<StepSize> step_sizes() const;
};

double td_error(std::span<const double> theta, const Sample& s, double gamma);
// Sampled theta direction: (phi - gamma phi') phi^T u for GTD2,
// delta phi - gamma phi' (phi^T u) for TDC.
Vector theta_direction(BaseAlgo base, std::span<const double> theta, std::span<const double> u,
                       const Sample& s, double gamma);
// Shared correction direction (delta - phi^T u) phi.
Vector correction_direction(std::span<const double> theta, std::span<const double> u,
                            const Sample& s, double gamma);

struct ParamPair {
  Vector theta;
  Vector u;
};

ParamPair gtd2_update(const Vector& theta, const Vector& u, const Sample& s, double alpha_t,
                      double beta_t, double gamma);
ParamPair tdc_update(const Vector& theta, const Vector& u, const Sample& s, double alpha_t,
                     double beta_t, double gamma);

using SampleDriftFn = std::function<SampledUpdate(const Sample& s, const Blocks& x)>;

struct GtdSystem {
  Algo algo = Algo::gtd2;
  std::size_t dim = 0;
  double gamma = 1.0;
  std::size_t theta_level = 0;
  std::size_t u_level = 0;
  SampleDriftFn sample_drift;
  // Drift draws i.i.d. samples from the stationary distribution.
  SaSystem sa;

  SaState initial_state(const AlgoConfig& cfg, std::uint64_t seed) const;
  void apply(SaState& st, const Sample& s) const;
  const Vector& theta(const SaState& st) const { return st.x[theta_level]; }
  const Vector& u(const SaState& st) const { return st.x[u_level]; }
};

GtdSystem make_vanilla(BaseAlgo base, const AlgoConfig& cfg, const Mrp& m);
GtdSystem make_momentum_3ts(BaseAlgo base, const AlgoConfig& cfg, const Mrp& m);
GtdSystem make_momentum_4ts(BaseAlgo base, const AlgoConfig& cfg, const Mrp& m);
GtdSystem make_algorithm(const AlgoConfig& cfg, const Mrp& m);

// The coupled heavy-ball form, with theta_{-1} = theta_0, u_{-1} = u_0 and
// rho_{-1} = rho_0.
class CoupledMomentum {
 public:
  CoupledMomentum(const AlgoConfig& cfg, std::size_t dim, double gamma);

  void step(const Sample& s);
  // Forces eta to zero (removes the heavy-ball term).
  void set_zero_momentum(bool on) { zero_momentum_ = on; }

  const Vector& theta() const { return theta_; }
  const Vector& u() const { return u_; }
  std::uint64_t t() const { return t_; }

  double eta_theta(std::uint64_t t) const;
  double eta_u(std::uint64_t t) const;

 private:
  BaseAlgo base_;
  bool two_momenta_;
  double gamma_;
  double w_;
  Schedule alpha_, beta_, rho1_, rho2_;
  Vector theta_, theta_prev_, u_, u_prev_;
  std::uint64_t t_ = 0;
  bool zero_momentum_ = false;
};

/// Conditional-mean drift of the algorithm as an affine cascade in the block
/// layout above.
AffineCascade algorithm_cascade(Algo algo, const GtdModel& g, double gamma, double w);

}  // namespace mtsa
