#include "mtsa/gtd.hpp"

#include <cmath>

#include "mtsa/errors.hpp"

namespace mtsa {

Algo parse_algo(const std::string& s) {
  if (s == "gtd2") return Algo::gtd2;
  if (s == "tdc") return Algo::tdc;
  if (s == "gtd2-m3") return Algo::gtd2_m3;
  if (s == "tdc-m3") return Algo::tdc_m3;
  if (s == "gtd2-m4") return Algo::gtd2_m4;
  if (s == "tdc-m4") return Algo::tdc_m4;
  throw ConfigError("unknown algorithm '" + s + "'");
}

std::string to_string(Algo a) {
  switch (a) {
    case Algo::gtd2: return "gtd2";
    case Algo::tdc: return "tdc";
    case Algo::gtd2_m3: return "gtd2-m3";
    case Algo::tdc_m3: return "tdc-m3";
    case Algo::gtd2_m4: return "gtd2-m4";
    case Algo::tdc_m4: return "tdc-m4";
  }
  return "?";
}

BaseAlgo base_of(Algo a) {
  return (a == Algo::gtd2 || a == Algo::gtd2_m3 || a == Algo::gtd2_m4) ? BaseAlgo::gtd2 : BaseAlgo::tdc;
}

std::size_t timescales_of(Algo a) {
  switch (a) {
    case Algo::gtd2:
    case Algo::tdc: return 2;
    case Algo::gtd2_m3:
    case Algo::tdc_m3: return 3;
    case Algo::gtd2_m4:
    case Algo::tdc_m4: return 4;
  }
  return 0;
}

namespace {

double require(const std::optional<double>& v, const char* name, Algo a) {
  if (!v) throw ConfigError(std::string(name) + " exponent required for " + to_string(a));
  return *v;
}

Schedule sched(double scale, double exponent) { return Schedule{scale, exponent}; }

void check_exponent(const std::optional<double>& e, const char* name) {
  if (e && !(std::isfinite(*e) && *e > 0.0)) {
    throw ConfigError(std::string(name) + " exponent must be positive");
  }
}

}  // namespace

void AlgoConfig::validate() const {
  require(alpha_exp, "alpha", algo);
  require(beta_exp, "beta", algo);
  if (timescales_of(algo) >= 3) require(rho1_exp, "rho1", algo);
  if (timescales_of(algo) == 4) require(rho2_exp, "rho2", algo);
  check_exponent(alpha_exp, "alpha");
  check_exponent(beta_exp, "beta");
  check_exponent(rho1_exp, "rho1");
  check_exponent(rho2_exp, "rho2");
  if (!std::isfinite(step_scale) || step_scale < 0.0) throw ConfigError("step scale must be >= 0");
  if (is_momentum(algo)) {
    if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("momentum variants require w > 0");
    if (!(step_scale > 0.0)) throw ConfigError("momentum variants require a positive step scale");
  }
}

ValidationReport AlgoConfig::experimental_report() const {
  switch (timescales_of(algo)) {
    case 3: return validate_experimental_3ts(*alpha_exp, *beta_exp, *rho1_exp);
    case 4: return validate_experimental_4ts(*alpha_exp, *beta_exp, *rho1_exp, *rho2_exp);
    default: {
      ValidationReport r;
      r.title = "two-timescale step sizes (no additional conditions)";
      r.effective_exponents = {*beta_exp, *alpha_exp};
      return r;
    }
  }
}

std::vector<StepSize> AlgoConfig::step_sizes() const {
  const Schedule alpha = sched(step_scale, *alpha_exp);
  const Schedule beta = sched(step_scale, *beta_exp);
  switch (timescales_of(algo)) {
    case 3: {
      const Schedule rho = sched(step_scale, *rho1_exp);
      return {StepSize::ratio(alpha, rho), StepSize::of(beta), StepSize::of(rho)};
    }
    case 4: {
      const Schedule rho1 = sched(step_scale, *rho1_exp);
      const Schedule rho2 = sched(step_scale, *rho2_exp);
      return {StepSize::ratio(alpha, rho1), StepSize::ratio(beta, rho2), StepSize::of(rho2),
              StepSize::of(rho1)};
    }
    default:
      return {StepSize::of(beta), StepSize::of(alpha)};
  }
}

ValidationReport AlgoConfig::theoretical_report() const {
  ScheduleSet ss;
  for (const auto& s : step_sizes()) ss.push_back(s.effective_schedule());
  return validate_theoretical(ss);
}

double td_error(std::span<const double> theta, const Sample& s, double gamma) {
  return s.reward + gamma * dot(theta, s.phi_next) - dot(theta, s.phi);
}

Vector theta_direction(BaseAlgo base, std::span<const double> theta, std::span<const double> u,
                       const Sample& s, double gamma) {
  const double phi_u = dot(s.phi, u);
  Vector d(s.phi.size());
  if (base == BaseAlgo::gtd2) {
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = (s.phi[k] - gamma * s.phi_next[k]) * phi_u;
  } else {
    const double delta = td_error(theta, s, gamma);
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = delta * s.phi[k] - gamma * s.phi_next[k] * phi_u;
  }
  return d;
}

Vector correction_direction(std::span<const double> theta, std::span<const double> u,
                            const Sample& s, double gamma) {
  const double c = td_error(theta, s, gamma) - dot(s.phi, u);
  return scaled(s.phi, c);
}

namespace {

ParamPair vanilla_update(BaseAlgo base, const Vector& theta, const Vector& u, const Sample& s,
                         double alpha_t, double beta_t, double gamma) {
  const Vector dt = theta_direction(base, theta, u, s, gamma);
  const Vector du = correction_direction(theta, u, s, gamma);
  ParamPair out{theta, u};
  for (std::size_t k = 0; k < theta.size(); ++k) out.theta[k] += alpha_t * dt[k];
  for (std::size_t k = 0; k < u.size(); ++k) out.u[k] += beta_t * du[k];
  return out;
}

GtdSystem assemble(Algo algo, const AlgoConfig& cfg, const Mrp& m, SampleDriftFn drift,
                   PerturbationFn perturbation, std::size_t theta_level, std::size_t u_level) {
  GtdSystem gs;
  gs.algo = algo;
  gs.dim = m.feature_dim();
  gs.gamma = m.gamma();
  gs.theta_level = theta_level;
  gs.u_level = u_level;
  gs.sample_drift = drift;
  gs.sa.steps = cfg.step_sizes();
  gs.sa.dims = std::vector<std::size_t>(gs.sa.steps.size(), gs.dim);
  auto mrp = std::make_shared<const Mrp>(m);
  gs.sa.drift = [mrp, drift](std::uint64_t, const Blocks& x, Rng& rng) {
    return drift(sample_iid(*mrp, rng), x);
  };
  gs.sa.perturbation = std::move(perturbation);
  return gs;
}

AlgoConfig with_algo(AlgoConfig cfg, Algo algo) {
  cfg.algo = algo;
  cfg.validate();
  return cfg;
}

}  // namespace

ParamPair gtd2_update(const Vector& theta, const Vector& u, const Sample& s, double alpha_t,
                      double beta_t, double gamma) {
  return vanilla_update(BaseAlgo::gtd2, theta, u, s, alpha_t, beta_t, gamma);
}

ParamPair tdc_update(const Vector& theta, const Vector& u, const Sample& s, double alpha_t,
                     double beta_t, double gamma) {
  return vanilla_update(BaseAlgo::tdc, theta, u, s, alpha_t, beta_t, gamma);
}

SaState GtdSystem::initial_state(const AlgoConfig& cfg, std::uint64_t seed) const {
  SaState st = SaState::zeros(sa, seed);
  if (!cfg.theta0.empty()) {
    if (cfg.theta0.size() != dim) throw ConfigError("theta0 has wrong length");
    st.x[theta_level] = cfg.theta0;
  }
  if (!cfg.u0.empty()) {
    if (cfg.u0.size() != dim) throw ConfigError("u0 has wrong length");
    st.x[u_level] = cfg.u0;
  }
  return st;
}

void GtdSystem::apply(SaState& st, const Sample& s) const { apply_update(sa, st, sample_drift(s, st.x)); }

GtdSystem make_vanilla(BaseAlgo base, const AlgoConfig& cfg_in, const Mrp& m) {
  const Algo algo = base == BaseAlgo::gtd2 ? Algo::gtd2 : Algo::tdc;
  const AlgoConfig cfg = with_algo(cfg_in, algo);
  const double gamma = m.gamma();
  SampleDriftFn drift = [base, gamma](const Sample& s, const Blocks& x) {
    const Vector& u = x[0];
    const Vector& theta = x[1];
    return SampledUpdate{{correction_direction(theta, u, s, gamma), theta_direction(base, theta, u, s, gamma)}};
  };
  return assemble(algo, cfg, m, std::move(drift), {}, 1, 0);
}

GtdSystem make_momentum_3ts(BaseAlgo base, const AlgoConfig& cfg_in, const Mrp& m) {
  const Algo algo = base == BaseAlgo::gtd2 ? Algo::gtd2_m3 : Algo::tdc_m3;
  const AlgoConfig cfg = with_algo(cfg_in, algo);
  const double gamma = m.gamma();
  const std::size_t d = m.feature_dim();
  const MomentumFragment frag =
      momentum_to_timescales(d, cfg.w, Schedule{cfg.step_scale, *cfg.alpha_exp},
                             Schedule{cfg.step_scale, *cfg.rho1_exp});
  SampleDriftFn drift = [base, gamma, frag](const Sample& s, const Blocks& x) {
    const Vector& v = x[0];
    const Vector& u = x[1];
    const Vector& theta = x[2];
    return SampledUpdate{{frag.velocity_drift(theta_direction(base, theta, u, s, gamma), v),
                          correction_direction(theta, u, s, gamma), v}};
  };
  PerturbationFn pert = [frag](std::size_t level, std::uint64_t t, const Blocks&,
                               const SampledUpdate& up) -> Vector {
    if (level != 2) return {};
    return frag.position_perturbation(t, up.g[0]);
  };
  GtdSystem gs = assemble(algo, cfg, m, std::move(drift), std::move(pert), 2, 1);
  gs.sa.steps = {frag.velocity_step, StepSize::of(Schedule{cfg.step_scale, *cfg.beta_exp}),
                 frag.position_step};
  return gs;
}

GtdSystem make_momentum_4ts(BaseAlgo base, const AlgoConfig& cfg_in, const Mrp& m) {
  const Algo algo = base == BaseAlgo::gtd2 ? Algo::gtd2_m4 : Algo::tdc_m4;
  const AlgoConfig cfg = with_algo(cfg_in, algo);
  const double gamma = m.gamma();
  const std::size_t d = m.feature_dim();
  const MomentumFragment theta_pair =
      momentum_to_timescales(d, cfg.w, Schedule{cfg.step_scale, *cfg.alpha_exp},
                             Schedule{cfg.step_scale, *cfg.rho1_exp});
  const MomentumFragment u_pair =
      momentum_to_timescales(d, cfg.w, Schedule{cfg.step_scale, *cfg.beta_exp},
                             Schedule{cfg.step_scale, *cfg.rho2_exp});
  SampleDriftFn drift = [base, gamma, theta_pair, u_pair](const Sample& s, const Blocks& x) {
    const Vector& v = x[0];
    const Vector& z = x[1];
    const Vector& u = x[2];
    const Vector& theta = x[3];
    return SampledUpdate{{theta_pair.velocity_drift(theta_direction(base, theta, u, s, gamma), v),
                          u_pair.velocity_drift(correction_direction(theta, u, s, gamma), z), z, v}};
  };
  PerturbationFn pert = [theta_pair, u_pair](std::size_t level, std::uint64_t t, const Blocks&,
                                             const SampledUpdate& up) -> Vector {
    if (level == 2) return u_pair.position_perturbation(t, up.g[1]);
    if (level == 3) return theta_pair.position_perturbation(t, up.g[0]);
    return {};
  };
  GtdSystem gs = assemble(algo, cfg, m, std::move(drift), std::move(pert), 3, 2);
  gs.sa.steps = {theta_pair.velocity_step, u_pair.velocity_step, u_pair.position_step,
                 theta_pair.position_step};
  return gs;
}

GtdSystem make_algorithm(const AlgoConfig& cfg, const Mrp& m) {
  const BaseAlgo base = base_of(cfg.algo);
  switch (timescales_of(cfg.algo)) {
    case 3: return make_momentum_3ts(base, cfg, m);
    case 4: return make_momentum_4ts(base, cfg, m);
    default: return make_vanilla(base, cfg, m);
  }
}

CoupledMomentum::CoupledMomentum(const AlgoConfig& cfg, std::size_t dim, double gamma)
    : base_(base_of(cfg.algo)), two_momenta_(timescales_of(cfg.algo) == 4), gamma_(gamma), w_(cfg.w) {
  if (!is_momentum(cfg.algo)) throw ConfigError("coupled form needs a momentum algorithm");
  cfg.validate();
  alpha_ = Schedule{cfg.step_scale, *cfg.alpha_exp};
  beta_ = Schedule{cfg.step_scale, *cfg.beta_exp};
  rho1_ = Schedule{cfg.step_scale, *cfg.rho1_exp};
  if (two_momenta_) rho2_ = Schedule{cfg.step_scale, *cfg.rho2_exp};
  theta_ = cfg.theta0.empty() ? Vector(dim, 0.0) : cfg.theta0;
  u_ = cfg.u0.empty() ? Vector(dim, 0.0) : cfg.u0;
  theta_prev_ = theta_;
  u_prev_ = u_;
}

double CoupledMomentum::eta_theta(std::uint64_t t) const {
  const double prev = rho1_.value(t == 0 ? 0 : t - 1);
  return (rho1_.value(t) - w_ * alpha_.value(t)) / prev;
}

double CoupledMomentum::eta_u(std::uint64_t t) const {
  const double prev = rho2_.value(t == 0 ? 0 : t - 1);
  return (rho2_.value(t) - w_ * beta_.value(t)) / prev;
}

void CoupledMomentum::step(const Sample& s) {
  const Vector dt = theta_direction(base_, theta_, u_, s, gamma_);
  const Vector du = correction_direction(theta_, u_, s, gamma_);
  const double a = alpha_.value(t_);
  const double b = beta_.value(t_);
  const double eta1 = zero_momentum_ ? 0.0 : eta_theta(t_);
  const double eta2 = (zero_momentum_ || !two_momenta_) ? 0.0 : eta_u(t_);

  Vector theta_next(theta_.size());
  Vector u_next(u_.size());
  for (std::size_t k = 0; k < theta_.size(); ++k)
    theta_next[k] = theta_[k] + a * dt[k] + eta1 * (theta_[k] - theta_prev_[k]);
  for (std::size_t k = 0; k < u_.size(); ++k) {
    u_next[k] = two_momenta_ ? u_[k] + b * du[k] + eta2 * (u_[k] - u_prev_[k]) : u_[k] + b * du[k];
  }
  theta_prev_ = std::move(theta_);
  theta_ = std::move(theta_next);
  u_prev_ = std::move(u_);
  u_ = std::move(u_next);
  ++t_;
}

AffineCascade algorithm_cascade(Algo algo, const GtdModel& g, double gamma, double w) {
  const std::size_t d = g.bbar.size();
  const Matrix eye = Matrix::identity(d);
  const BaseAlgo base = base_of(algo);
  const std::size_t n = timescales_of(algo);
  AffineCascade cas(std::vector<std::size_t>(n, d));
  const std::size_t th = n - 1;
  const std::size_t u = n == 2 ? 0 : n - 2;

  // Mean theta direction: -A^T u for GTD2, A theta + b - gamma E[phi' phi^T] u for TDC.
  auto put_theta_direction = [&](std::size_t row) {
    if (base == BaseAlgo::gtd2) {
      cas.set_block(row, u, -g.abar.transpose());
    } else {
      cas.set_block(row, u, -gamma * g.next_cross);
      cas.set_block(row, th, g.abar);
      cas.set_offset(row, g.bbar);
    }
  };
  // Mean correction direction: A theta + b - C u.
  auto put_correction = [&](std::size_t row) {
    cas.set_block(row, u, -g.cbar);
    cas.set_block(row, th, g.abar);
    cas.set_offset(row, g.bbar);
  };

  if (n == 2) {
    put_correction(0);
    put_theta_direction(1);
  } else if (n == 3) {
    put_theta_direction(0);
    cas.set_block(0, 0, -w * eye);
    put_correction(1);
    cas.set_block(2, 0, eye);
  } else {
    put_theta_direction(0);
    cas.set_block(0, 0, -w * eye);
    put_correction(1);
    cas.set_block(1, 1, -w * eye);
    cas.set_block(2, 1, eye);
    cas.set_block(3, 0, eye);
  }
  return cas;
}

}  // namespace mtsa
