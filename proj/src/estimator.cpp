#include "intermittent/estimator.hpp"

#include <stdexcept>
#include <string>

namespace intermittent {

Estimator::Estimator(PartitionFamily family, LagSchedule schedule)
    : scanner_(std::move(family), std::move(schedule)) {}

std::optional<PredictionEvent> Estimator::push(double x) {
  const std::uint64_t n = scanner_.samples_seen();
  if (target_pending_ && n == awaited_target_) {
    sum_targets_ += static_cast<long double>(x);
    ++targets_;
    target_pending_ = false;
  }
  const std::optional<ScanEvent> ev = scanner_.push(x);
  if (!ev) return std::nullopt;

  // zeta_{k-1} + 1 <= zeta_k, so the k-th target has already arrived.
  if (target_pending_ || targets_ != ev->k)
    throw std::logic_error("estimator: target bookkeeping out of step at k=" + std::to_string(ev->k));

  const double g = static_cast<double>(sum_targets_ / static_cast<long double>(ev->k));
  PredictionEvent out{ev->k, ev->eta, ev->zeta, g, ev->zeta, awaited_target_};
  last_ = Prediction{ev->k, g};
  awaited_target_ = ev->zeta + 1;
  target_pending_ = true;
  return out;
}

std::optional<PredictionEvent> Estimator::push(std::uint64_t index, double x) {
  if (index != scanner_.samples_seen())
    throw std::logic_error("estimator: expected sample " + std::to_string(scanner_.samples_seen()) +
                           ", got " + std::to_string(index));
  return push(x);
}

std::optional<Prediction> Estimator::predict_at() const { return last_; }

}  // namespace intermittent
