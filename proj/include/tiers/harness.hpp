#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "tiers/simgen.hpp"
#include "tiers/tiers.hpp"

namespace tiers {

enum class Study { Regression, Ggm };

struct ExperimentSpec {
  Study study = Study::Regression;
  Regime regime = Regime::SL;
  GgmRegime ggm_regime = GgmRegime::SparseBetaSparseOmega;
  double c = 2.0;  // Sigma_B = c Sigma_A (regression study only)
  long n = 100;
  long p = 150;
  std::vector<double> h_grid{0.0};
  int reps = 200;
  double alpha = 0.05;
  Variant variant = Variant::Tiers;
  std::uint64_t seed = 0;
  int draws = 2000;
  std::optional<double> eta;
  double mu_scale = 1.0;
  bool weighted_qhat = false;

  void validate() const;
  /// Canonical key = value text; the config hash is taken over this.
  std::string canonical() const;
};

/// n = 100, p = 150, reps = 200.
ExperimentSpec desk_preset();
/// n = 200, p = 500, reps = 100.
ExperimentSpec paper_preset();

/// Flat `key = value` lines, `#` comments. `preset = desk|paper` is applied
/// before the other keys regardless of position. h_grid is comma separated.
ExperimentSpec parse_experiment_config(const std::string& text);
ExperimentSpec load_experiment_config(const std::string& path);

struct ExperimentRow {
  double h = 0.0;
  int reps = 0;
  int rejections = 0;
  int failures = 0;
  double rate = 0.0;  // rejections / reps; a failed rep counts as no rejection
  double se = 0.0;    // sqrt(rate (1 - rate) / reps)
  double mean_t_n = 0.0;            // over completed reps
  double mean_critical_value = 0.0; // over completed reps
  std::vector<std::string> failure_messages;  // distinct, at most 5
  std::vector<std::uint64_t> rep_seeds;
  double wall_seconds_per_rep = 0.0;  // metadata only
};

struct ExperimentReport {
  ExperimentSpec spec;
  std::vector<ExperimentRow> rows;
  std::string library_version;
  std::string config_hash;
  double wall_seconds = 0.0;
  int threads = 1;
};

struct RunOptions {
  int threads = 0;
  /// Called after each finished replication with (done, total).
  std::function<void(long, long)> progress;
};

/// Seed of replication `rep` at grid point `h_index`.
std::uint64_t rep_seed(std::uint64_t experiment_seed, std::size_t h_index, int rep);

/// One replication: generate data for (spec, h, seed) and run the test.
TestResult run_replication(const ExperimentSpec& spec, double h, std::uint64_t seed);

/// Throws Error when more than 20% of the replications at some h fail.
ExperimentReport run_experiment(const ExperimentSpec& spec, const RunOptions& options = {});

/// Deterministic part of the report (no timing, no thread count).
nlohmann::json report_json(const ExperimentReport& report);
/// Timing and environment, kept apart from the deterministic part.
nlohmann::json report_metadata(const ExperimentReport& report);
/// {"report": ..., "metadata": ...}
std::string report_json_text(const ExperimentReport& report);
/// h, rate, se, rejections, failures, reps
std::string report_csv(const ExperimentReport& report);

std::string library_version();
/// 64-bit FNV-1a, 16 hex digits.
std::string fnv1a_hex(const std::string& text);

std::string to_string(Study s);

}  // namespace tiers
