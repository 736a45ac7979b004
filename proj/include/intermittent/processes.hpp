#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace intermittent {

/// mt19937_64 behind a splitmix64 seed expansion, with distribution code
/// written out so streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t bits() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Box-Muller; one normal per call.
  double normal();
  std::size_t categorical(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Odometer (adding machine) on B-bit binary expansions r = sum r_i 2^-i.

class DegenerateState : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// r_1..r_B packed into the low B bits of an integer, r_1 most significant,
/// so value() == raw / 2^B exactly (B <= 53).
class OdometerState {
 public:
  OdometerState(std::uint64_t raw, unsigned bits);
  static OdometerState from_value(double r, unsigned bits);

  [[nodiscard]] std::uint64_t raw() const { return raw_; }
  [[nodiscard]] unsigned bits() const { return bits_; }
  [[nodiscard]] double value() const;
  /// r_i for i = 1..B.
  [[nodiscard]] bool digit(unsigned i) const;
  [[nodiscard]] bool is_zero() const { return raw_ == 0; }

  friend bool operator==(const OdometerState&, const OdometerState&) = default;

 private:
  std::uint64_t raw_;
  unsigned bits_;
};

/// Position of the first 1 digit. Throws DegenerateState on the all-zero state.
[[nodiscard]] unsigned tau(const OdometerState& s);

/// S by digits: r_1..r_{tau-1} become 1, r_tau becomes 0, the rest stay.
/// The all-zero state maps to itself.
[[nodiscard]] OdometerState odometer_step(const OdometerState& s);
/// S r = r - 2^-tau + sum_{l < tau} 2^-l, in integer arithmetic.
[[nodiscard]] OdometerState odometer_step_closed_form(const OdometerState& s);
/// S r = r - 1/2 on [1/2, 1), (1 + S(2r)) / 2 on [0, 1/2).
[[nodiscard]] OdometerState odometer_step_recursive(const OdometerState& s);

// ---------------------------------------------------------------------------
// Process models.

struct Bernoulli {
  double p = 0.5;
};
struct UniformReal {
  double lo = 0.0;
  double hi = 1.0;
};
struct Gaussian {
  double mean = 0.0;
  double variance = 1.0;
};

/// Order-d chain over a finite real alphabet. Row r of `transition` is the
/// law of the next symbol given the context whose base-|A| digits (oldest
/// first) are r. With no `initial` context the chain starts from its
/// stationary law.
struct MarkovFinite {
  std::size_t order = 1;
  std::vector<double> alphabet;
  std::vector<std::vector<double>> transition;
  std::optional<std::vector<double>> initial;
};

struct Odometer {
  unsigned bits = 48;
  std::optional<double> initial;
};

/// A fixed recorded path, replayed verbatim for every seed. No oracle.
struct Sequence {
  std::vector<double> values;
};

class ProcessModel {
 public:
  using Kind = std::variant<Bernoulli, UniformReal, Gaussian, MarkovFinite, Odometer, Sequence>;

  explicit ProcessModel(Kind kind);

  [[nodiscard]] const Kind& kind() const { return kind_; }
  [[nodiscard]] bool has_oracle() const;
  /// Samples of the prefix the oracle looks at (Markov order, else 1).
  [[nodiscard]] std::size_t memory() const;

  /// Stationary law over Markov contexts (lifted chain), in row order.
  [[nodiscard]] const Eigen::VectorXd& stationary() const { return stationary_; }

  /// Exact E(X_{n+1} | X_0..X_n) from the prefix x_0..x_n. Only the last
  /// memory() samples matter; a Markov prefix shorter than the order is
  /// taken to be the whole history.
  [[nodiscard]] double cond_exp(std::span<const double> prefix) const;

  /// Context row of the last `order` symbols of `tail` (Markov only).
  [[nodiscard]] std::size_t context_of(std::span<const double> tail) const;
  [[nodiscard]] std::size_t symbol_index(double x) const;

 private:
  [[nodiscard]] double short_prefix_cond_exp(const MarkovFinite& m, std::span<const double> prefix) const;

  Kind kind_;
  Eigen::VectorXd stationary_;
};

/// Deterministic per-(model, seed) stream of x_0, x_1, ...
class PathSampler {
 public:
  PathSampler(const ProcessModel& model, std::uint64_t seed);

  /// nullopt only when a Sequence model runs out.
  std::optional<double> next();
  /// Times S was applied to the all-zero odometer state.
  [[nodiscard]] std::uint64_t degeneracies() const { return degeneracies_; }

 private:
  const ProcessModel* model_;
  Rng rng_;
  std::uint64_t emitted_ = 0;
  std::uint64_t degeneracies_ = 0;
  std::optional<OdometerState> odometer_;
  std::vector<std::size_t> context_;  // Markov: last `order` symbol indices
};

[[nodiscard]] std::vector<double> sample_path(const ProcessModel& model, std::uint64_t seed, std::size_t n);

[[nodiscard]] inline double cond_exp(const ProcessModel& model, std::span<const double> prefix) {
  return model.cond_exp(prefix);
}

// Path persistence for replay.
void write_path_csv(std::ostream& out, std::span<const double> path);
[[nodiscard]] std::vector<double> read_path_csv(std::istream& in);
void write_path_binary(std::ostream& out, std::span<const double> path);
[[nodiscard]] std::vector<double> read_path_binary(std::istream& in);

}  // namespace intermittent
