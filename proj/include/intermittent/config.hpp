#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "intermittent/partitions.hpp"
#include "intermittent/processes.hpp"
#include "intermittent/stopping.hpp"

namespace intermittent {

struct OutputSpec {
  std::string dir = "out";
  std::vector<std::string> formats{"csv", "json"};

  [[nodiscard]] bool wants(const std::string& format) const;
};

/// One experiment: what to sample, how to quantize and scan, how far to go.
///
/// Defaults are the slowly-refining preset: the odometer on [0,1) with
/// 2^{floor(1 + log2(1 + log2(1 + k)))} cells, l_k = min(k, floor(3 log2 k)),
/// epsilon = 1.
struct ExperimentConfig {
  ProcessModel model{Odometer{}};
  PartitionFamily family = PartitionFamily::example2();
  LagSchedule schedule = LagSchedule::log_floor(3.0);

  std::uint64_t seed_base = 1;
  std::vector<std::uint64_t> seeds = default_seeds(1, 50);
  bool seeds_are_range = true;

  std::uint64_t horizon = 1'000'000;  // samples per path
  Level k_max = 200;
  std::optional<double> epsilon = 1.0;
  Level k_min = 1;                        // first k in bound checks
  std::vector<Level> dist_k{5, 20};       // stopping indices for dist-check
  double ks_threshold = 0.06;
  unsigned threads = 0;                   // 0: hardware concurrency
  OutputSpec outputs;

  static std::vector<std::uint64_t> default_seeds(std::uint64_t base, std::uint64_t count);
  void set_seed_count(std::uint64_t count);
  void validate() const;
};

// Component (de)serializers. Output is canonical, so to_json(from_json(j))
// is a fixed point after one pass.
[[nodiscard]] nlohmann::json to_json(const ProcessModel& model);
[[nodiscard]] nlohmann::json to_json(const PartitionFamily& family);
[[nodiscard]] nlohmann::json to_json(const LagSchedule& schedule);
[[nodiscard]] nlohmann::json to_json(const ExperimentConfig& config);

[[nodiscard]] ProcessModel model_from_json(const nlohmann::json& j);
[[nodiscard]] PartitionFamily family_from_json(const nlohmann::json& j);
[[nodiscard]] LagSchedule schedule_from_json(const nlohmann::json& j);
/// Missing keys keep their defaults. `base_dir` resolves relative file paths.
[[nodiscard]] ExperimentConfig config_from_json(const nlohmann::json& j, const std::string& base_dir = ".");
[[nodiscard]] ExperimentConfig load_config(const std::string& path);

/// FNV-1a over the canonical JSON dump.
[[nodiscard]] std::string config_hash(const ExperimentConfig& config);

}  // namespace intermittent
