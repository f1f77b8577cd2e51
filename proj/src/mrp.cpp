#include "mtsa/mrp.hpp"

#include <cmath>

#include "mtsa/errors.hpp"

namespace mtsa {

namespace {

constexpr double kRowSumTol = 1e-12;
constexpr double kStationaryTol = 1e-12;
constexpr std::size_t kMaxPowerIterations = 1'000'000;
constexpr double kMinStationaryMass = 1e-15;

std::size_t inverse_cdf(std::span<const double> probs, double u) {
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0) last_positive = i;
    cum += probs[i];
    if (u < cum) return i;
  }
  return last_positive;
}

// Mass left in non-terminal states after 2^20 steps from the start distribution.
double residual_mass(const Matrix& p_nt, const Vector& start) {
  Matrix q = p_nt;
  for (int k = 0; k < 20; ++k) q = q * q;
  const Vector mass = q.transpose() * start;
  double s = 0.0;
  for (double v : mass) s += std::abs(v);
  return s;
}

}  // namespace

Mrp::Mrp(MrpSpec spec) : spec_(std::move(spec)) {
  const std::size_t n = spec_.n_states;
  if (n == 0) throw InvalidModel("mrp needs at least one state");
  if (spec_.transition.rows() != n || spec_.transition.cols() != n + 1) {
    throw InvalidModel("transition must be n x (n+1) with a terminal column");
  }
  if (spec_.reward.rows() != n || spec_.reward.cols() != n + 1) {
    throw InvalidModel("reward must be n x (n+1)");
  }
  if (spec_.start.size() != n) throw InvalidModel("start distribution has wrong length");
  if (spec_.features.rows() != n || spec_.features.cols() == 0) {
    throw InvalidModel("features must be n x d with d >= 1");
  }
  if (!(spec_.gamma > 0.0 && spec_.gamma <= 1.0)) throw InvalidModel("gamma must lie in (0, 1]");
  if (!spec_.transition.all_finite() || !spec_.reward.all_finite() || !spec_.features.all_finite()) {
    throw InvalidModel("mrp entries must be finite");
  }
  for (std::size_t s = 0; s < n; ++s) {
    double sum = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
      if (spec_.transition(s, k) < 0.0) throw InvalidModel("negative transition probability");
      sum += spec_.transition(s, k);
    }
    if (std::abs(sum - 1.0) > kRowSumTol) {
      throw InvalidModel("transition row " + std::to_string(s) + " does not sum to 1");
    }
  }
  double start_sum = 0.0;
  for (double p : spec_.start) {
    if (p < 0.0) throw InvalidModel("negative start probability");
    start_sum += p;
  }
  if (std::abs(start_sum - 1.0) > kRowSumTol) throw InvalidModel("start distribution does not sum to 1");

  double max_reward = 0.0;
  for (double r : spec_.reward.entries()) max_reward = std::max(max_reward, std::abs(r));
  double max_phi = 0.0;
  for (std::size_t s = 0; s < n; ++s) max_phi = std::max(max_phi, norm2(spec_.features.row(s)));
  if (max_reward > 1.0 || max_phi > 1.0 + 1e-12) {
    if (!spec_.allow_unbounded) {
      throw InvalidModel("rewards must satisfy |r| <= 1 and features ||phi|| <= 1");
    }
    bound_override_used_ = true;
    warnings_.push_back("bounded-data override: max |r| = " + std::to_string(max_reward) +
                        ", max ||phi|| = " + std::to_string(max_phi));
  }

  const Matrix& phi = spec_.features;
  const double gram = determinant(phi.transpose() * phi);
  if (!(gram > 1e-12)) throw InvalidModel("feature matrix is not of full column rank");

  episodic_ = residual_mass(transition_nt(), spec_.start) < 1e-12;
  stationary_ = stationary_distribution(*this);
}

Matrix Mrp::transition_nt() const { return spec_.transition.block(0, 0, n_states(), n_states()); }

Vector Mrp::expected_reward() const {
  Vector r(n_states(), 0.0);
  for (std::size_t s = 0; s < n_states(); ++s)
    for (std::size_t k = 0; k <= n_states(); ++k) r[s] += spec_.transition(s, k) * spec_.reward(s, k);
  return r;
}

Mrp Mrp::from_json(const nlohmann::json& j) {
  try {
    MrpSpec spec;
    spec.n_states = j.at("n_states").get<std::size_t>();
    const bool terminal_column = j.value("terminal_column", true);
    Matrix p = Matrix::from_rows(j.at("transition").get<std::vector<Vector>>());
    Matrix r = Matrix::from_rows(j.at("reward").get<std::vector<Vector>>());
    if (!terminal_column) {
      Matrix p2(p.rows(), p.cols() + 1);
      Matrix r2(r.rows(), r.cols() + 1);
      p2.set_block(0, 0, p);
      r2.set_block(0, 0, r);
      p = std::move(p2);
      r = std::move(r2);
    }
    spec.transition = std::move(p);
    spec.reward = std::move(r);
    spec.gamma = j.at("gamma").get<double>();
    spec.start = j.at("start").get<Vector>();
    spec.features = Matrix::from_rows(j.at("features").get<std::vector<Vector>>());
    spec.allow_unbounded = j.value("allow_unbounded", false);
    return Mrp(std::move(spec));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid mrp document: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid mrp document: ") + e.what());
  }
}

Vector stationary_distribution(const Mrp& m) {
  const std::size_t n = m.n_states();
  // Restart chain, made lazy so that periodic chains converge as well.
  Matrix restart = m.transition_nt();
  for (std::size_t s = 0; s < n; ++s) {
    const double pterm = m.transition()(s, n);
    for (std::size_t k = 0; k < n; ++k) restart(s, k) += pterm * m.start()[k];
  }
  // States the restart chain never visits carry no mass; the power iteration
  // only drives them below tolerance, so detect them structurally.
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> frontier;
  for (std::size_t s = 0; s < n; ++s)
    if (m.start()[s] > 0.0) {
      seen[s] = true;
      frontier.push_back(s);
    }
  while (!frontier.empty()) {
    const std::size_t s = frontier.back();
    frontier.pop_back();
    for (std::size_t k = 0; k < n; ++k)
      if (!seen[k] && restart(s, k) > 0.0) {
        seen[k] = true;
        frontier.push_back(k);
      }
  }
  for (std::size_t s = 0; s < n; ++s)
    if (!seen[s]) throw ReducibleChain("state " + std::to_string(s) + " is unreachable");

  Matrix lazy = 0.5 * (restart + Matrix::identity(n));
  const Matrix lazy_t = lazy.transpose();
  const Matrix restart_t = restart.transpose();

  Vector d(n, 1.0 / static_cast<double>(n));
  bool converged = false;
  for (std::size_t it = 0; it < kMaxPowerIterations; ++it) {
    Vector next = lazy_t * d;
    double total = 0.0;
    for (double v : next) total += v;
    for (double& v : next) v /= total;
    d = std::move(next);
    const Vector dp = restart_t * d;
    double diff = 0.0;
    for (std::size_t s = 0; s < n; ++s) diff += std::abs(dp[s] - d[s]);
    if (diff <= kStationaryTol) {
      converged = true;
      break;
    }
  }
  if (!converged) throw NoConvergence("stationary distribution: power iteration did not converge");
  for (std::size_t s = 0; s < n; ++s) {
    if (d[s] < kMinStationaryMass) {
      throw ReducibleChain("state " + std::to_string(s) + " has no stationary mass");
    }
  }
  return d;
}

GtdModel gtd_model(const Mrp& m) {
  GtdModel g;
  const Matrix& phi = m.features();
  g.d = m.stationary();
  g.dmat = Matrix::diagonal(g.d);
  const Matrix phit_d = phi.transpose() * g.dmat;
  const Matrix p_nt = m.transition_nt();
  g.cbar = phit_d * phi;
  // E[phi phi'^T] = Phi^T D P_nt Phi, so E[phi' phi^T] is its transpose.
  const Matrix cross = phit_d * p_nt * phi;
  g.next_cross = cross.transpose();
  g.abar = m.gamma() * cross - g.cbar;
  g.bbar = phit_d * m.expected_reward();
  if (!is_positive_definite(g.cbar)) throw InvalidModel("C matrix is not positive definite");
  if (!(sym_max_eig(g.abar) < 0.0)) {
    throw InvalidModel("A matrix is not negative definite in its symmetric part");
  }
  g.theta_star = solve(g.abar, scaled(g.bbar, -1.0));
  return g;
}

double mspbe(const GtdModel& g, std::span<const double> theta) {
  Vector resid = g.abar * theta;
  axpy(1.0, g.bbar, resid);
  const Vector y = solve(g.cbar, resid);
  return std::max(0.0, dot(resid, y));
}

double rmspbe(const GtdModel& g, std::span<const double> theta) { return std::sqrt(mspbe(g, theta)); }

Sample sample_iid(const Mrp& m, Rng& rng) {
  const std::size_t n = m.n_states();
  const std::size_t s = inverse_cdf(m.stationary(), rng.uniform());
  const Vector row = m.transition().row(s);
  const std::size_t next = inverse_cdf(row, rng.uniform());
  Sample out;
  out.phi = m.phi(s);
  out.phi_next = next == n ? Vector(m.feature_dim(), 0.0) : m.phi(next);
  out.reward = m.reward()(s, next);
  return out;
}

std::vector<Sample> sample_episode(const Mrp& m, Rng& rng) {
  if (!m.episodic()) throw EpisodeCap("chain is not absorbed within the episode cap");
  const std::size_t n = m.n_states();
  std::vector<Sample> ep;
  std::size_t s = inverse_cdf(m.start(), rng.uniform());
  while (true) {
    if (ep.size() >= kEpisodeCap) throw EpisodeCap("episode exceeded 1e6 transitions");
    const Vector row = m.transition().row(s);
    const std::size_t next = inverse_cdf(row, rng.uniform());
    Sample smp;
    smp.phi = m.phi(s);
    smp.phi_next = next == n ? Vector(m.feature_dim(), 0.0) : m.phi(next);
    smp.reward = m.reward()(s, next);
    ep.push_back(std::move(smp));
    if (next == n) break;
    s = next;
  }
  return ep;
}

}  // namespace mtsa
