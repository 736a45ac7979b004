#pragma once

#include <cstdint>
#include <optional>

#include "intermittent/stopping.hpp"

namespace intermittent {

/// The k-th estimate, issued at time zeta_k.
struct PredictionEvent {
  Level k = 0;
  std::uint64_t eta = 0;
  std::uint64_t zeta = 0;
  double g = 0.0;
  std::uint64_t at_time = 0;
  /// Largest sample index that entered g (zeta_{k-1} + 1); never exceeds zeta.
  std::uint64_t last_target_index = 0;
};

struct Prediction {
  Level k = 0;
  double g = 0.0;
};

/// Online intermittent estimator: g_k = (1/k) sum_{j<k} x_{zeta_j + 1}.
///
/// The j = 0 term is x_1 because zeta_0 = 0. The running sum is kept in long
/// double; on integer-valued paths it is exact.
class Estimator {
 public:
  Estimator(PartitionFamily family, LagSchedule schedule);

  /// Feed the next sample. Emits the k-th prediction when the sample
  /// certifies zeta_k.
  std::optional<PredictionEvent> push(double x);

  /// Checked variant: `index` must equal samples_seen(), else std::logic_error.
  std::optional<PredictionEvent> push(std::uint64_t index, double x);

  /// Latest (k, g_k); nullopt before the first stopping time.
  [[nodiscard]] std::optional<Prediction> predict_at() const;

  [[nodiscard]] std::uint64_t samples_seen() const { return scanner_.samples_seen(); }
  [[nodiscard]] const Scanner& scanner() const { return scanner_; }

 private:
  Scanner scanner_;
  long double sum_targets_ = 0.0L;
  Level targets_ = 0;
  std::uint64_t awaited_target_ = 1;  // zeta_{k-1} + 1
  bool target_pending_ = true;
  std::optional<Prediction> last_;
};

}  // namespace intermittent
