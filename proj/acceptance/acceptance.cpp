// Acceptance suite: one PASS/FAIL line per criterion.
//
//   mtsa_acceptance [N ...]     run the listed criteria (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gtd_support.hpp"
#include "mtsa/conditions.hpp"
#include "mtsa/envs.hpp"
#include "mtsa/experiment.hpp"
#include "mtsa/gtd.hpp"
#include "mtsa/linalg.hpp"
#include "mtsa/schedules.hpp"
#include "oracles.hpp"

using namespace mtsa;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

const EnvName kEnvs[] = {EnvName::rw5, EnvName::boyan7};
const Algo kMomentum[] = {Algo::gtd2_m3, Algo::tdc_m3, Algo::gtd2_m4, Algo::tdc_m4};

// 1. Coupled and decomposed momentum trajectories coincide.
Outcome momentum_exactness() {
  // At unit scale GTD2-M-4TS leaves the 1e8 ball before 1e4 steps, so the
  // comparison runs at scale 0.25 where every trajectory stays bounded.
  constexpr double kScale = 0.25;
  double worst = 0.0;
  std::ostringstream os;
  for (EnvName env : kEnvs) {
    const Mrp m = make_env({env, std::nullopt});
    for (Algo a : kMomentum) {
      AlgoConfig cfg = fixture::benchmark_config(a, env);
      cfg.step_scale = kScale;
      const auto e = fixture::coupled_vs_decomposed(cfg, m, 10000, 2024);
      worst = std::max(worst, e.max_gap);
    }
  }
  os << "max gap " << fmt("%.3g", worst) << " <= 1e-10 at step scale " << kScale;
  // Unit-scale diagnostics.
  std::vector<std::string> diverged;
  for (EnvName env : kEnvs) {
    const Mrp m = make_env({env, std::nullopt});
    for (Algo a : kMomentum) {
      try {
        fixture::coupled_vs_decomposed(fixture::benchmark_config(a, env), m, 10000, 2024);
      } catch (const Error&) {
        diverged.push_back(to_string(a) + "/" + to_string(env));
      }
    }
  }
  if (!diverged.empty()) {
    os << "; at scale 1 diverged:";
    for (const auto& d : diverged) os << " " << d;
  }
  return {worst <= 1e-10, os.str()};
}

// 2. Noisy three-timescale affine cascade reaches its fixed point.
Outcome cascade_simulation() {
  const AffineCascade cas = oracle::random_reduced_cascade({2, 2, 2}, 7);
  const CascadeReport rep = cascade_fixed_point(cas);
  if (!rep.passed) return {false, "cascade rejected by the checker"};
  double worst_sym = -1e300;
  for (const auto& lv : rep.levels) worst_sym = std::max(worst_sym, sym_max_eig(lv.reduced_matrix));
  std::vector<StepSize> steps;
  for (double p : {0.6, 0.75, 0.9}) steps.push_back(StepSize::of(Schedule{1.0, p}));
  const SaSystem sys = cascade_system(cas, steps, 0.1);
  const SaState end = run(sys, SaState::zeros(sys, 7), 1000000);
  double err = 0.0;
  for (std::size_t i = 0; i < 3; ++i) err = std::max(err, norm_inf(sub(end.x[i], rep.fixed_point[i])));
  const bool ok = err <= 1e-2 && rep.residual <= 1e-9 && worst_sym <= -0.1;
  return {ok, "||x - x*||_inf " + fmt("%.3g", err) + " <= 1e-2, residual " + fmt("%.3g", rep.residual) +
                  " <= 1e-9, max sym eig " + fmt("%.3g", worst_sym) + " <= -0.1"};
}

// 3. Analytic cascades of the momentum algorithms.
Outcome analytic_cascades() {
  double worst = 0.0;
  bool all = true;
  for (EnvName env : kEnvs) {
    const Mrp m = make_env({env, std::nullopt});
    const GtdModel g = gtd_model(m);
    for (Algo a : kMomentum) {
      const CascadeReport rep = analyze_cascade(algorithm_cascade(a, g, m.gamma(), 0.1));
      if (!rep.passed) {
        all = false;
        continue;
      }
      for (std::size_t l = 0; l + 1 < rep.fixed_point.size(); ++l)
        worst = std::max(worst, norm_inf(rep.fixed_point[l]));
      worst = std::max(worst, norm_inf(sub(rep.fixed_point.back(), g.theta_star)));
    }
  }
  return {all && worst <= 1e-8, std::string(all ? "all levels Hurwitz" : "some level not Hurwitz") +
                                    ", max deviation from (0,...,theta*) " + fmt("%.3g", worst) + " <= 1e-8"};
}

// 4. TDC and TDC-M-3TS converge in the square-summable regime.
Outcome convergence_runs() {
  std::ostringstream os;
  bool ok = true;
  auto scenario = [&](Algo algo, double alpha, double beta, std::optional<double> rho) {
    ExperimentConfig c;
    c.env = {EnvName::rw5, std::nullopt};
    c.algo.algo = algo;
    c.algo.alpha_exp = alpha;
    c.algo.beta_exp = beta;
    c.algo.rho1_exp = rho;
    c.algo.w = 0.1;
    c.sampling = Sampling::iid;
    c.episodes = 1;
    c.iid_steps_per_episode = 200000;
    c.runs = 10;
    c.threads = 0;
    const bool theory = c.algo.theoretical_report().pass();
    const GtdModel g = gtd_model(build_mrp(c));
    std::vector<double> rel;
    for (const auto& r : run_experiment(c)) rel.push_back(r.diverged ? INFINITY : r.theta_err / norm2(g.theta_star));
    std::sort(rel.begin(), rel.end());
    const double med = 0.5 * (rel[4] + rel[5]);
    ok = ok && theory && med <= 0.05;
    os << to_string(algo) << " median " << fmt("%.5f", med) << (theory ? "" : " (exponents not square summable)")
       << "; ";
  };
  // Effective exponents: TDC (0.55, 0.65); TDC-M-3TS (0.53, 0.6, 0.62).
  scenario(Algo::tdc, 0.65, 0.55, std::nullopt);
  scenario(Algo::tdc_m3, 1.15, 0.6, 0.62);
  os << "threshold 0.05";
  return {ok, os.str()};
}

// 5. Model oracles.
Outcome model_oracles() {
  std::ostringstream os;
  // (a)
  const Mrp rw = make_rw5();
  double da = 0.0;
  const double want[] = {1, 2, 3, 2, 1};
  for (std::size_t s = 0; s < 5; ++s) da = std::max(da, std::abs(rw.stationary()[s] - want[s] / 9.0));
  const bool a = da <= 1e-10;
  // (b), (c), (d)
  double db = 0.0;
  std::size_t mc_total = 0, mc_ok = 0;
  double worst_eig = -1e300;
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (EnvName env : kEnvs) {
    const Mrp m = make_env({env, std::nullopt});
    const GtdModel g = gtd_model(m);
    const std::size_t d = m.feature_dim();
    for (int k = 0; k < 20; ++k) {
      Vector th(d);
      for (auto& x : th) x = u(gen);
      db = std::max(db, std::abs(mspbe(g, th) - oracle::mspbe_projection(m, th)));
    }
    std::vector<oracle::Accumulator> acc_a(d * d), acc_c(d * d), acc_b(d);
    Rng rng(env == EnvName::rw5 ? 101 : 202);
    for (int i = 0; i < 1000000; ++i) {
      const Sample s = sample_iid(m, rng);
      for (std::size_t r = 0; r < d; ++r) {
        acc_b[r].add(s.reward * s.phi[r]);
        for (std::size_t q = 0; q < d; ++q) {
          acc_a[r * d + q].add(s.phi[r] * (m.gamma() * s.phi_next[q] - s.phi[q]));
          acc_c[r * d + q].add(s.phi[r] * s.phi[q]);
        }
      }
    }
    auto check = [&](const oracle::Accumulator& acc, double truth) {
      const auto ms = acc.result();
      ++mc_total;
      if (std::abs(ms.mean - truth) <= 3.0 * ms.se + 1e-12) ++mc_ok;
    };
    for (std::size_t k = 0; k < d * d; ++k) {
      check(acc_a[k], g.abar.entries()[k]);
      check(acc_c[k], g.cbar.entries()[k]);
    }
    for (std::size_t r = 0; r < d; ++r) check(acc_b[r], g.bbar[r]);
    worst_eig = std::max(worst_eig, sym_max_eig(g.abar));
  }
  const bool b = db <= 1e-10, c = mc_ok == mc_total, dd = worst_eig < 0.0;
  os << "(a) " << fmt("%.2g", da) << " (b) " << fmt("%.2g", db) << " (c) " << mc_ok << "/" << mc_total
     << " entries within 3 SE (d) max sym eig " << fmt("%.4f", worst_eig);
  return {a && b && c && dd, os.str()};
}

// 6. Step-size validators.
Outcome validators() {
  auto theo = [](double a, double b, double c) {
    return validate_theoretical({Schedule{1.0, a}, Schedule{1.0, b}, Schedule{1.0, c}});
  };
  const ValidationReport bad = theo(0.4, 0.6, 0.9);
  const ClauseResult* sq = bad.clause("square_summable");
  const bool cases[] = {
      validate_experimental_3ts(0.4, 0.4, 0.5).pass(),
      validate_experimental_3ts(0.35, 0.35, 0.45).pass(),
      validate_experimental_4ts(0.4, 0.4, 0.5, 0.25).pass(),
      validate_experimental_4ts(0.35, 0.35, 0.45, 0.35).pass(),
      !validate_experimental_3ts(0.4, 0.6, 0.5).pass(),
      !validate_experimental_4ts(0.4, 0.4, 0.5, 0.6).pass(),
      theo(0.6, 0.75, 0.9).pass(),
      sq != nullptr && !sq->pass,
  };
  const int n = static_cast<int>(std::count(std::begin(cases), std::end(cases), true));
  return {n == 8, std::to_string(n) + "/8 validator cases as expected"};
}

// 7. Hurwitz test against characteristic-polynomial roots.
Outcome hurwitz_oracle() {
  std::mt19937_64 gen(500);
  std::uniform_int_distribution<int> u(-4, 4);
  int checked = 0, agree = 0, skipped = 0;
  while (checked < 500) {
    const std::size_t n = 2 + (checked + skipped) % 2;
    Matrix a(n, n);
    for (auto& x : a.entries()) x = u(gen);
    if (oracle::min_abs_real_part(a) < 1e-9) {
      ++skipped;
      continue;
    }
    ++checked;
    if (is_hurwitz(a) == (oracle::max_real_part(a) < 0.0)) ++agree;
  }
  return {agree == checked, std::to_string(agree) + "/" + std::to_string(checked) + " agree (" +
                                std::to_string(skipped) + " marginal excluded)"};
}

// 8. Momentum curves at or below vanilla over the final 10% of episodes.
Outcome figure_shape() {
  std::ostringstream os;
  double tail[3] = {0, 0, 0};
  const Algo algos[] = {Algo::gtd2, Algo::gtd2_m3, Algo::gtd2_m4};
  for (int i = 0; i < 3; ++i) {
    ExperimentConfig c;
    c.env = {EnvName::rw5, std::nullopt};
    c.algo = fixture::benchmark_config(algos[i], EnvName::rw5);
    c.runs = 100;
    c.episodes = 200;
    c.threads = 0;
    const auto rec = run_experiment(c);
    const std::string stem = "acceptance_c8_" + to_string(algos[i]);
    write_csv_file(stem + ".csv", rec);
    const auto rows = summarize(rec);
    {
      std::FILE* f = std::fopen((stem + ".summary.csv").c_str(), "w");
      if (f) {
        std::ostringstream s;
        write_summary_csv(s, rows);
        std::fputs(s.str().c_str(), f);
        std::fclose(f);
      }
    }
    std::size_t diverged = 0;
    for (const auto& r : rec)
      if (r.episode == c.episodes && r.diverged) ++diverged;
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& row : rows)
      if (row.episode > c.episodes - c.episodes / 10) {
        sum += row.mean_rmspbe;
        ++n;
      }
    tail[i] = sum / static_cast<double>(n);
    os << to_string(algos[i]) << " " << fmt("%.4f", tail[i]) << " (" << diverged << " runs diverged); ";
  }
  os << "momentum must be <= vanilla";
  return {tail[1] <= tail[0] && tail[2] <= tail[0], os.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria = {
      momentum_exactness, cascade_simulation, analytic_cascades, convergence_runs,
      model_oracles,      validators,         hurwitz_oracle,    figure_shape};
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "unknown criterion '%s' (expected 1..%zu)\n", argv[i], criteria.size());
      return 2;
    }
    which.push_back(k);
  }
  if (which.empty())
    for (int k = 1; k <= static_cast<int>(criteria.size()); ++k) which.push_back(k);

  int failures = 0;
  for (int k : which) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d: %s  %s  [%.1fs]\n", k, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
