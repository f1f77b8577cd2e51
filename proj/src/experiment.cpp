#include "mtsa/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "mtsa/errors.hpp"

namespace mtsa {

Sampling parse_sampling(const std::string& s) {
  if (s == "episodic") return Sampling::episodic;
  if (s == "iid") return Sampling::iid;
  throw ConfigError("unknown sampling mode '" + s + "'");
}

std::string to_string(Sampling s) { return s == Sampling::iid ? "iid" : "episodic"; }

std::string ExperimentConfig::env_label() const { return mrp ? "custom" : to_string(env.name); }

namespace {

using nlohmann::json;

template <class T>
T get_as(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

std::size_t get_count(const json& j, const char* key) {
  const auto v = get_as<std::int64_t>(j, key);
  if (v < 0) throw ConfigError(std::string("config field '") + key + "' must be >= 0");
  return static_cast<std::size_t>(v);
}

void opt_exponent(const json& j, const char* key, std::optional<double>& out) {
  if (j.contains(key)) out = get_as<double>(j, key);
}

}  // namespace

void ExperimentConfig::merge_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const char* known[] = {"env",   "gamma", "mrp",        "algo",     "alpha",
                                "beta",  "rho1",  "rho2",       "w",        "step_scale",
                                "theta0", "u0",   "episodes",   "runs",     "base_seed",
                                "sampling", "iid_steps_per_episode", "out_path", "threads"};
  for (const auto& [key, _] : j.items()) {
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) ==
        std::end(known)) {
      throw ConfigError("unknown config field '" + key + "'");
    }
  }
  if (j.contains("env")) env.name = parse_env_name(get_as<std::string>(j, "env"));
  if (j.contains("gamma")) env.gamma = get_as<double>(j, "gamma");
  if (j.contains("mrp")) mrp = j.at("mrp");
  if (j.contains("algo")) algo.algo = parse_algo(get_as<std::string>(j, "algo"));
  opt_exponent(j, "alpha", algo.alpha_exp);
  opt_exponent(j, "beta", algo.beta_exp);
  opt_exponent(j, "rho1", algo.rho1_exp);
  opt_exponent(j, "rho2", algo.rho2_exp);
  if (j.contains("w")) algo.w = get_as<double>(j, "w");
  if (j.contains("step_scale")) algo.step_scale = get_as<double>(j, "step_scale");
  if (j.contains("theta0")) algo.theta0 = get_as<Vector>(j, "theta0");
  if (j.contains("u0")) algo.u0 = get_as<Vector>(j, "u0");
  if (j.contains("episodes")) episodes = get_count(j, "episodes");
  if (j.contains("runs")) runs = get_count(j, "runs");
  if (j.contains("base_seed")) base_seed = get_as<std::uint64_t>(j, "base_seed");
  if (j.contains("sampling")) sampling = parse_sampling(get_as<std::string>(j, "sampling"));
  if (j.contains("iid_steps_per_episode")) iid_steps_per_episode = get_count(j, "iid_steps_per_episode");
  if (j.contains("out_path")) out_path = get_as<std::string>(j, "out_path");
  if (j.contains("threads")) threads = get_count(j, "threads");
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig cfg;
  cfg.merge_json(j);
  return cfg;
}

Mrp build_mrp(const ExperimentConfig& cfg) {
  if (!cfg.mrp) return make_env(cfg.env);
  json doc = *cfg.mrp;
  if (cfg.env.gamma) doc["gamma"] = *cfg.env.gamma;
  return Mrp::from_json(doc);
}

std::vector<std::string> preflight(const ExperimentConfig& cfg) {
  if (cfg.episodes < 1) throw ConfigError("episodes must be >= 1");
  if (cfg.runs < 1) throw ConfigError("runs must be >= 1");
  if (cfg.sampling == Sampling::iid && cfg.iid_steps_per_episode < 1)
    throw ConfigError("iid_steps_per_episode must be >= 1");
  cfg.algo.validate();
  std::vector<std::string> warnings;
  const ValidationReport exp = cfg.algo.experimental_report();
  if (!exp.pass()) throw ConfigError("step-size check failed:\n" + exp.to_text());
  const ValidationReport th = cfg.algo.theoretical_report();
  if (!th.pass()) {
    for (const auto& c : th.clauses)
      if (!c.pass) warnings.push_back("theoretical step-size clause '" + c.name + "' fails: " + c.detail);
  }
  return warnings;
}

std::vector<RunRecord> run_single(const ExperimentConfig& cfg, const Mrp& m, const GtdModel& g,
                                  std::size_t run) {
  const GtdSystem gs = make_algorithm(cfg.algo, m);
  SaState st = gs.initial_state(cfg.algo, cfg.seed_of(run));
  const std::string algo = to_string(cfg.algo.algo);
  const std::string env = cfg.env_label();

  auto record = [&](std::size_t episode, bool diverged) {
    const Vector& th = gs.theta(st);
    return RunRecord{algo,          env, run, episode, st.t, rmspbe(g, th), norm2(sub(th, g.theta_star)),
                     diverged};
  };

  std::vector<RunRecord> out;
  out.reserve(cfg.episodes);
  for (std::size_t e = 1; e <= cfg.episodes; ++e) {
    try {
      if (cfg.sampling == Sampling::episodic) {
        for (const Sample& s : sample_episode(m, st.rng)) gs.apply(st, s);
      } else {
        for (std::size_t k = 0; k < cfg.iid_steps_per_episode; ++k) gs.apply(st, sample_iid(m, st.rng));
      }
    } catch (const StepError&) {
      // The run stops; the remaining episodes repeat the last finite iterate.
      for (std::size_t k = e; k <= cfg.episodes; ++k) out.push_back(record(k, true));
      return out;
    }
    out.push_back(record(e, false));
  }
  return out;
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg) {
  preflight(cfg);
  const Mrp m = build_mrp(cfg);
  const GtdModel g = gtd_model(m);

  std::vector<std::vector<RunRecord>> per_run(cfg.runs);
  std::size_t workers = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.threads;
  workers = std::min(workers, cfg.runs);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (std::size_t r = next++; r < cfg.runs && !failed; r = next++) {
      try {
        per_run[r] = run_single(cfg, m, g, r);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<RunRecord> all;
  for (auto& v : per_run) all.insert(all.end(), v.begin(), v.end());
  std::stable_sort(all.begin(), all.end(), [](const RunRecord& a, const RunRecord& b) {
    return a.run != b.run ? a.run < b.run : a.episode < b.episode;
  });
  return all;
}

std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_csv(std::ostream& os, const std::vector<RunRecord>& records) {
  os << kCsvHeader << '\n';
  for (const auto& r : records) {
    os << r.algo << ',' << r.env << ',' << r.run << ',' << r.episode << ',' << r.steps_cum << ','
       << format_real(r.rmspbe) << ',' << format_real(r.theta_err) << ',' << (r.diverged ? 1 : 0) << '\n';
  }
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) out.push_back(f);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <class T>
T parse_int(const std::string& s, std::size_t line_no) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ConfigError("csv line " + std::to_string(line_no) + ": bad integer '" + s + "'");
  return v;
}

double parse_real(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw ConfigError("csv line " + std::to_string(line_no) + ": bad number '" + s + "'");
  return v;
}

}  // namespace

std::vector<RunRecord> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("csv is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw ConfigError("csv header mismatch: '" + line + "'");
  std::vector<RunRecord> out;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 8) throw ConfigError("csv line " + std::to_string(line_no) + ": expected 8 fields");
    RunRecord r;
    r.algo = f[0];
    r.env = f[1];
    r.run = parse_int<std::size_t>(f[2], line_no);
    r.episode = parse_int<std::size_t>(f[3], line_no);
    r.steps_cum = parse_int<std::uint64_t>(f[4], line_no);
    r.rmspbe = parse_real(f[5], line_no);
    r.theta_err = parse_real(f[6], line_no);
    const int d = parse_int<int>(f[7], line_no);
    if (d != 0 && d != 1) throw ConfigError("csv line " + std::to_string(line_no) + ": diverged must be 0/1");
    r.diverged = d == 1;
    out.push_back(std::move(r));
  }
  return out;
}

void write_csv_file(const std::string& path, const std::vector<RunRecord>& records) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  write_csv(os, records);
  if (!os) throw Error("write to '" + path + "' failed");
}

std::vector<RunRecord> read_csv_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open '" + path + "'");
  return read_csv(is);
}

std::vector<EpisodeSummary> summarize(const std::vector<RunRecord>& records) {
  struct Acc {
    std::vector<double> xs;
  };
  std::map<std::tuple<std::string, std::string, std::size_t>, Acc> groups;
  for (const auto& r : records) groups[{r.algo, r.env, r.episode}].xs.push_back(r.rmspbe);
  std::vector<EpisodeSummary> out;
  for (const auto& [key, acc] : groups) {
    const auto n = static_cast<double>(acc.xs.size());
    double sum = 0.0;
    for (double x : acc.xs) sum += x;
    const double mean = sum / n;
    double ss = 0.0;
    for (double x : acc.xs) ss += (x - mean) * (x - mean);
    const double se = acc.xs.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
    out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), acc.xs.size(), mean, se});
  }
  return out;
}

void write_summary_csv(std::ostream& os, const std::vector<EpisodeSummary>& rows) {
  os << "algo,env,episode,runs,mean_rmspbe,stderr_rmspbe\n";
  for (const auto& r : rows) {
    os << r.algo << ',' << r.env << ',' << r.episode << ',' << r.runs << ',' << format_real(r.mean_rmspbe)
       << ',' << format_real(r.stderr_rmspbe) << '\n';
  }
}

}  // namespace mtsa
