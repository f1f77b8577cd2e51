#pragma once

// Seeded multi-run experiments, RunRecord CSV I/O and per-episode summaries.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mtsa/envs.hpp"
#include "mtsa/gtd.hpp"
#include "mtsa/mrp.hpp"

namespace mtsa {

enum class Sampling { episodic, iid };

Sampling parse_sampling(const std::string& s);
std::string to_string(Sampling s);

struct ExperimentConfig {
  EnvSpec env;
  // Custom MRP document; replaces the built-in environment when present.
  std::optional<nlohmann::json> mrp;
  AlgoConfig algo;
  std::size_t episodes = 100;
  std::size_t runs = 1;
  std::uint64_t base_seed = 0;
  Sampling sampling = Sampling::episodic;
  std::size_t iid_steps_per_episode = 100;
  std::string out_path;
  // Worker count; 0 picks the hardware concurrency.
  std::size_t threads = 1;
  // Every run uses base_seed (determinism checks).
  bool same_seed = false;

  std::uint64_t seed_of(std::size_t run) const { return same_seed ? base_seed : base_seed + run; }
  std::string env_label() const;

  /// Overlays the fields present in `j` (names as above, exponents as
  /// "alpha", "beta", "rho1", "rho2"). Throws ConfigError.
  void merge_json(const nlohmann::json& j);
  static ExperimentConfig from_json(const nlohmann::json& j);
};

Mrp build_mrp(const ExperimentConfig& cfg);

/// Validates the configuration. Throws ConfigError on a structural problem or
/// a failed experimental step-size check; returns warnings (for example a
/// failed square-summability check).
std::vector<std::string> preflight(const ExperimentConfig& cfg);

struct RunRecord {
  std::string algo;
  std::string env;
  std::size_t run = 0;
  std::size_t episode = 0;  // 1-based
  std::uint64_t steps_cum = 0;
  double rmspbe = 0.0;
  double theta_err = 0.0;
  bool diverged = false;

  bool operator==(const RunRecord&) const = default;
};

/// One run of cfg.episodes episodes. On divergence the run stops; the failing
/// episode and every later one get a record flagged diverged that carries the
/// last finite iterate.
std::vector<RunRecord> run_single(const ExperimentConfig& cfg, const Mrp& m, const GtdModel& g,
                                  std::size_t run);

/// All runs on a worker pool, sorted by (run, episode).
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg);

inline constexpr const char* kCsvHeader = "algo,env,run,episode,steps_cum,rmspbe,theta_err,diverged";

void write_csv(std::ostream& os, const std::vector<RunRecord>& records);
std::vector<RunRecord> read_csv(std::istream& is);
void write_csv_file(const std::string& path, const std::vector<RunRecord>& records);
std::vector<RunRecord> read_csv_file(const std::string& path);

struct EpisodeSummary {
  std::string algo;
  std::string env;
  std::size_t episode = 0;
  std::size_t runs = 0;
  double mean_rmspbe = 0.0;
  double stderr_rmspbe = 0.0;
};

/// Mean and standard error of rmspbe across runs, per (algo, env, episode).
std::vector<EpisodeSummary> summarize(const std::vector<RunRecord>& records);
void write_summary_csv(std::ostream& os, const std::vector<EpisodeSummary>& rows);

std::string format_real(double x);

}  // namespace mtsa
