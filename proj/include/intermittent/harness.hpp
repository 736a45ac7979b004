#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "intermittent/analysis.hpp"
#include "intermittent/config.hpp"
#include "intermittent/estimator.hpp"

namespace intermittent {

/// Everything one seed produced.
struct SeedLog {
  std::uint64_t seed = 0;
  std::vector<ScanEvent> scans;
  std::vector<PredictionRecord> predictions;
  bool truncated = false;  // k_max not reached within the horizon
  Level stalled_at_k = 0;  // k being searched when the run stopped short
  std::uint64_t samples_consumed = 0;
  std::uint64_t degeneracies = 0;

  friend bool operator==(const SeedLog& a, const SeedLog& b);
};

struct Check {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct DistRow {
  Level k = 0;
  std::size_t n_stopped = 0;  // samples of X_{zeta_k + 1}
  std::size_t n_reference = 0;
  double ks = 0.0;
  double critical = 0.0;  // 1.36 sqrt((n + m) / (n m))
  double threshold = 0.0;
  bool passed = false;
};

struct RunReport {
  ExperimentConfig config;
  std::vector<SeedLog> seeds;
  ErrorCurve curve;
  std::vector<ViolationRow> violations;  // filled when epsilon is set and the family is finite
  std::vector<DistRow> dist;
  std::vector<Check> checks;

  std::size_t truncated_seeds = 0;
  std::uint64_t degeneracies = 0;
  std::uint64_t samples_total = 0;
  std::uint64_t samples_max = 0;
  double wall_seconds = 0.0;

  [[nodiscard]] bool passed() const;
};

/// Drive sampler, estimator and oracle for one seed, generating the path
/// lazily. Stops after x_{zeta_{k_max} + 1} or at the horizon.
[[nodiscard]] SeedLog run_seed(const ExperimentConfig& config, std::uint64_t seed);

/// All seeds (concurrently when config.threads != 1), joined in seed order,
/// then aggregated: error curves always, bound violations when possible.
[[nodiscard]] RunReport run(const ExperimentConfig& config);

/// Two-sample KS of {X_{zeta_k + 1}} across the run's seeds against {X_1}
/// drawn from a disjoint set of seeds, for each k in config.dist_k.
[[nodiscard]] std::vector<DistRow> distribution_check(const RunReport& report);

/// Seed used for the reference sample paired with `seed` in distribution_check.
[[nodiscard]] std::uint64_t reference_seed(std::uint64_t seed);

// Report tables. Every number is printed with 17 significant digits, so
// identical runs give byte-identical files.
void write_events_csv(std::ostream& out, const RunReport& report);
void write_scan_csv(std::ostream& out, const std::vector<ScanEvent>& events);
void write_curves_csv(std::ostream& out, const RunReport& report);
void write_bound_csv(std::ostream& out, const RunReport& report);
void write_dist_csv(std::ostream& out, const RunReport& report);
[[nodiscard]] nlohmann::json summary_json(const RunReport& report, const std::string& subcommand);

/// Write the enabled formats under `dir` (created if missing).
void write_report(const RunReport& report, const std::string& subcommand, const std::string& dir);

/// Command-line entry point: simulate | verify-bound | dist-check | trace.
int cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace intermittent
