// mtsa_cli: run experiments, check step sizes and drift cascades, inspect models.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "mtsa/conditions.hpp"
#include "mtsa/envs.hpp"
#include "mtsa/errors.hpp"
#include "mtsa/experiment.hpp"
#include "mtsa/gtd.hpp"
#include "mtsa/mrp.hpp"

namespace {

using nlohmann::json;
using namespace mtsa;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

std::string short_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

json load_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

// Options shared by the subcommands; only flags actually given override the
// config file.
struct Flags {
  std::string config, env, algo, sampling, out, mrp, cascade;
  double alpha = 0, beta = 0, rho1 = 0, rho2 = 0, w = 0, gamma = 0, step_scale = 0;
  std::int64_t episodes = 0, runs = 0, iid_steps = 0, threads = 0;
  std::uint64_t seed = 0;
  bool as_json = false;
};

struct Registered {
  CLI::Option *config = nullptr, *env = nullptr, *algo = nullptr, *sampling = nullptr, *out = nullptr,
              *mrp = nullptr, *alpha = nullptr, *beta = nullptr, *rho1 = nullptr, *rho2 = nullptr,
              *w = nullptr, *gamma = nullptr, *step_scale = nullptr, *episodes = nullptr, *runs = nullptr,
              *iid_steps = nullptr, *threads = nullptr, *seed = nullptr;
};

void add_model_flags(CLI::App* app, Flags& f, Registered& r) {
  r.env = app->add_option("--env", f.env, "Built-in environment: rw5 | boyan7");
  r.gamma = app->add_option("--gamma", f.gamma, "Discount override in (0, 1]");
  r.mrp = app->add_option("--mrp", f.mrp, "JSON file describing a custom MRP");
}

void add_algo_flags(CLI::App* app, Flags& f, Registered& r) {
  r.algo = app->add_option("--algo", f.algo, "gtd2 | tdc | gtd2-m3 | tdc-m3 | gtd2-m4 | tdc-m4");
  r.alpha = app->add_option("--alpha", f.alpha, "alpha exponent");
  r.beta = app->add_option("--beta", f.beta, "beta exponent");
  r.rho1 = app->add_option("--rho1", f.rho1, "rho (or rho1) exponent");
  r.rho2 = app->add_option("--rho2", f.rho2, "rho2 exponent");
  r.w = app->add_option("--w", f.w, "momentum constant");
  r.step_scale = app->add_option("--step-scale", f.step_scale, "common schedule scale (default 1)");
  r.config = app->add_option("--config", f.config, "JSON config file");
}

ExperimentConfig assemble(const Flags& f, const Registered& r) {
  ExperimentConfig cfg;
  if (r.config && *r.config) cfg.merge_json(load_json(f.config));
  json j = json::object();
  if (r.env && *r.env) j["env"] = f.env;
  if (r.gamma && *r.gamma) j["gamma"] = f.gamma;
  if (r.algo && *r.algo) j["algo"] = f.algo;
  if (r.alpha && *r.alpha) j["alpha"] = f.alpha;
  if (r.beta && *r.beta) j["beta"] = f.beta;
  if (r.rho1 && *r.rho1) j["rho1"] = f.rho1;
  if (r.rho2 && *r.rho2) j["rho2"] = f.rho2;
  if (r.w && *r.w) j["w"] = f.w;
  if (r.step_scale && *r.step_scale) j["step_scale"] = f.step_scale;
  if (r.episodes && *r.episodes) j["episodes"] = f.episodes;
  if (r.runs && *r.runs) j["runs"] = f.runs;
  if (r.seed && *r.seed) j["base_seed"] = f.seed;
  if (r.sampling && *r.sampling) j["sampling"] = f.sampling;
  if (r.iid_steps && *r.iid_steps) j["iid_steps_per_episode"] = f.iid_steps;
  if (r.out && *r.out) j["out_path"] = f.out;
  if (r.threads && *r.threads) j["threads"] = f.threads;
  if (r.mrp && *r.mrp) j["mrp"] = load_json(f.mrp);
  cfg.merge_json(j);
  return cfg;
}

int cmd_run(const ExperimentConfig& cfg) {
  for (const auto& w : preflight(cfg)) std::cerr << "warning: " << w << '\n';
  const auto records = run_experiment(cfg);
  if (cfg.out_path.empty() || cfg.out_path == "-") {
    write_csv(std::cout, records);
  } else {
    write_csv_file(cfg.out_path, records);
    std::cerr << "wrote " << records.size() << " records to " << cfg.out_path << '\n';
  }
  std::size_t diverged = 0;
  for (const auto& rec : records) diverged += rec.diverged ? 1 : 0;
  if (diverged) std::cerr << "warning: " << diverged << " run(s) diverged\n";
  return kExitOk;
}

int cmd_check(const ExperimentConfig& cfg, const std::string& cascade_path, bool as_json) {
  if (!cascade_path.empty()) {
    const AffineCascade cas = AffineCascade::from_json(load_json(cascade_path));
    const CascadeReport rep = analyze_cascade(cas);
    std::cout << (as_json ? rep.to_json().dump(2) : rep.to_text()) << '\n';
    return rep.passed ? kExitOk : kExitValidation;
  }
  cfg.algo.validate();
  const ValidationReport exp = cfg.algo.experimental_report();
  const ValidationReport th = cfg.algo.theoretical_report();
  const Mrp m = build_mrp(cfg);
  const GtdModel g = gtd_model(m);
  const CascadeReport rep = analyze_cascade(algorithm_cascade(cfg.algo.algo, g, m.gamma(), cfg.algo.w));
  if (as_json) {
    json out{{"experimental", exp.to_json()}, {"theoretical", th.to_json()}, {"cascade", rep.to_json()}};
    std::cout << out.dump(2) << '\n';
  } else {
    std::cout << exp.to_text() << '\n' << th.to_text() << '\n' << rep.to_text() << '\n';
  }
  if (!th.pass()) std::cerr << "warning: theoretical (square-summable) step-size conditions fail\n";
  if (!exp.pass()) {
    std::cerr << "error: step-size conditions fail\n";
    return kExitValidation;
  }
  if (!rep.passed) {
    std::cerr << "error: drift cascade fails at level " << (*rep.failing_level + 1) << '\n';
    return kExitValidation;
  }
  return kExitOk;
}

int cmd_analyze(const ExperimentConfig& cfg, bool as_json) {
  const Mrp m = build_mrp(cfg);
  const GtdModel g = gtd_model(m);
  const Vector eig = sym_eigenvalues(g.abar);
  if (as_json) {
    auto rows = [](const Matrix& a) {
      json r = json::array();
      for (std::size_t i = 0; i < a.rows(); ++i) r.push_back(a.row(i));
      return r;
    };
    json out{{"env", cfg.env_label()},   {"gamma", m.gamma()},    {"abar", rows(g.abar)},
             {"bbar", g.bbar},           {"cbar", rows(g.cbar)},  {"d_pi", g.d},
             {"theta_star", g.theta_star}, {"sym_eigenvalues", eig}, {"sym_max_eig", eig.back()}};
    std::cout << out.dump(2) << '\n';
    return kExitOk;
  }
  std::cout << "env: " << cfg.env_label() << "  gamma: " << short_real(m.gamma()) << "\n"
            << "A_bar:\n" << to_string(g.abar, 10) << "\n"
            << "b_bar: " << to_string(g.bbar, 10) << "\n"
            << "C_bar:\n" << to_string(g.cbar, 10) << "\n"
            << "d_pi: " << to_string(g.d, 12) << "\n"
            << "theta_star: " << to_string(g.theta_star, 12) << "\n"
            << "sym(A_bar) eigenvalues: " << to_string(eig, 10) << "\n"
            << "sym_max_eig: " << short_real(eig.back()) << (eig.back() < 0 ? " (negative definite)" : "")
            << "\n";
  for (const auto& w : m.warnings()) std::cerr << "warning: " << w << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-timescale stochastic approximation lab"};
  app.require_subcommand(1);
  Flags f;

  Registered run_r;
  CLI::App* run = app.add_subcommand("run", "Run seeded repetitions and write RunRecord CSV");
  add_model_flags(run, f, run_r);
  add_algo_flags(run, f, run_r);
  run_r.episodes = run->add_option("--episodes", f.episodes, "episodes per run");
  run_r.runs = run->add_option("--runs", f.runs, "independent runs");
  run_r.seed = run->add_option("--seed", f.seed, "base seed; run r uses seed + r");
  run_r.sampling = run->add_option("--sampling", f.sampling, "episodic | iid");
  run_r.iid_steps = run->add_option("--iid-steps", f.iid_steps, "samples per episode when sampling=iid");
  run_r.out = run->add_option("--out", f.out, "output CSV path (default stdout)");
  run_r.threads = run->add_option("--threads", f.threads, "worker threads (0 = all cores)");

  Registered check_r;
  CLI::App* check = app.add_subcommand("check", "Validate step sizes and the algorithm's drift cascade");
  add_model_flags(check, f, check_r);
  add_algo_flags(check, f, check_r);
  check->add_option("--cascade", f.cascade, "check a cascade JSON file instead");
  check->add_flag("--json", f.as_json, "JSON output");

  Registered an_r;
  CLI::App* analyze = app.add_subcommand("analyze", "Print the GTD model quantities of an environment");
  add_model_flags(analyze, f, an_r);
  analyze->add_flag("--json", f.as_json, "JSON output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*run) return cmd_run(assemble(f, run_r));
    if (*check) return cmd_check(assemble(f, check_r), f.cascade, f.as_json);
    return cmd_analyze(assemble(f, an_r), f.as_json);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
