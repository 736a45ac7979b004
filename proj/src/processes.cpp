#include "intermittent/processes.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>
#include <string>

namespace intermittent {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr double kRowTolerance = 1e-12;
constexpr double kStationaryTolerance = 1e-12;
constexpr int kStationaryMaxIterations = 10'000'000;
constexpr char kBinaryMagic[8] = {'I', 'P', 'A', 'T', 'H', '0', '1', '\0'};

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::size_t ipow(std::size_t base, std::size_t exp) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (r > (std::size_t{1} << 40) / std::max<std::size_t>(base, 1))
      throw std::invalid_argument("markov: context space too large");
    r *= base;
  }
  return r;
}

void validate_markov(const MarkovFinite& m) {
  if (m.order < 1) throw std::invalid_argument("markov: order must be >= 1");
  if (m.alphabet.empty()) throw std::invalid_argument("markov: empty alphabet");
  for (std::size_t i = 0; i < m.alphabet.size(); ++i) {
    if (!std::isfinite(m.alphabet[i])) throw std::invalid_argument("markov: non-finite symbol");
    if (i > 0 && !(m.alphabet[i - 1] < m.alphabet[i]))
      throw std::invalid_argument("markov: alphabet must be strictly increasing");
  }
  const std::size_t rows = ipow(m.alphabet.size(), m.order);
  if (m.transition.size() != rows)
    throw std::invalid_argument("markov: expected " + std::to_string(rows) + " transition rows");
  for (const auto& row : m.transition) {
    if (row.size() != m.alphabet.size())
      throw std::invalid_argument("markov: transition row width must equal alphabet size");
    double sum = 0.0;
    for (double p : row) {
      if (!(p >= 0.0) || !std::isfinite(p)) throw std::invalid_argument("markov: bad probability");
      sum += p;
    }
    if (std::fabs(sum - 1.0) > kRowTolerance)
      throw std::invalid_argument("markov: transition row does not sum to 1");
  }
  if (m.initial && m.initial->size() != m.order)
    throw std::invalid_argument("markov: initial context must have `order` symbols");
}

// Lazy power iteration pi <- (pi + pi P) / 2 on the lifted chain; the lazy
// step keeps periodic chains convergent and has the same fixed points.
Eigen::VectorXd stationary_law(const MarkovFinite& m) {
  const auto a = static_cast<Eigen::Index>(m.alphabet.size());
  const auto n = static_cast<Eigen::Index>(m.transition.size());
  Eigen::MatrixXd lifted = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index c = 0; c < n; ++c)
    for (Eigen::Index b = 0; b < a; ++b)
      lifted(c, (c * a + b) % n) += m.transition[static_cast<std::size_t>(c)][static_cast<std::size_t>(b)];

  Eigen::RowVectorXd pi = Eigen::RowVectorXd::Constant(n, 1.0 / static_cast<double>(n));
  for (int it = 0; it < kStationaryMaxIterations; ++it) {
    const Eigen::RowVectorXd next = 0.5 * (pi + pi * lifted);
    const double change = (next - pi).lpNorm<1>();
    pi = next;
    if (change < kStationaryTolerance) break;
  }
  pi /= pi.sum();
  return pi.transpose();
}

}  // namespace

// ---------------------------------------------------------------------------

Rng::Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::categorical(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  const double u = uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last_positive = i;
    acc += weights[i];
    if (u < acc) return i;
  }
  return last_positive;
}

// ---------------------------------------------------------------------------

OdometerState::OdometerState(std::uint64_t raw, unsigned bits) : raw_(raw), bits_(bits) {
  if (bits < 1 || bits > 53) throw std::invalid_argument("odometer: bits must be in [1, 53]");
  if (raw >> bits) throw std::invalid_argument("odometer: raw state wider than B bits");
}

OdometerState OdometerState::from_value(double r, unsigned bits) {
  if (!(r >= 0.0 && r < 1.0)) throw std::domain_error("odometer: value must lie in [0, 1)");
  if (bits < 1 || bits > 53) throw std::invalid_argument("odometer: bits must be in [1, 53]");
  const double scaled = std::ldexp(r, static_cast<int>(bits));
  if (scaled != std::floor(scaled)) throw std::domain_error("odometer: value is not on the B-bit grid");
  return OdometerState(static_cast<std::uint64_t>(scaled), bits);
}

double OdometerState::value() const {
  return std::ldexp(static_cast<double>(raw_), -static_cast<int>(bits_));
}

bool OdometerState::digit(unsigned i) const {
  if (i < 1 || i > bits_) throw std::out_of_range("odometer: digit index out of range");
  return ((raw_ >> (bits_ - i)) & 1U) != 0;
}

unsigned tau(const OdometerState& s) {
  if (s.is_zero()) throw DegenerateState("odometer: tau undefined on the all-zero state");
  return s.bits() - static_cast<unsigned>(std::bit_width(s.raw())) + 1;
}

OdometerState odometer_step(const OdometerState& s) {
  if (s.is_zero()) return s;
  const unsigned b = s.bits();
  const unsigned t = tau(s);
  std::uint64_t out = 0;
  for (unsigned i = 1; i <= b; ++i) {
    bool d;
    if (i < t)
      d = true;
    else if (i == t)
      d = false;
    else
      d = s.digit(i);
    out = (out << 1) | (d ? 1U : 0U);
  }
  return OdometerState(out, b);
}

OdometerState odometer_step_closed_form(const OdometerState& s) {
  if (s.is_zero()) return s;
  const unsigned b = s.bits();
  const unsigned t = tau(s);
  const std::uint64_t one = std::uint64_t{1} << b;
  const std::uint64_t drop = std::uint64_t{1} << (b - t);
  const std::uint64_t prefix_ones = one - (std::uint64_t{1} << (b - t + 1));
  return OdometerState(s.raw() - drop + prefix_ones, b);
}

namespace {

std::uint64_t step_recursive_raw(std::uint64_t raw, unsigned b) {
  const std::uint64_t half = std::uint64_t{1} << (b - 1);
  if (raw >= half) return raw - half;
  // 2r stays below 1; (1 + S(2r)) / 2 is exact since S keeps the last digit of 2r (a 0).
  return ((std::uint64_t{1} << b) + step_recursive_raw(raw << 1, b)) >> 1;
}

}  // namespace

OdometerState odometer_step_recursive(const OdometerState& s) {
  if (s.is_zero()) return s;
  return OdometerState(step_recursive_raw(s.raw(), s.bits()), s.bits());
}

// ---------------------------------------------------------------------------

ProcessModel::ProcessModel(Kind kind) : kind_(std::move(kind)) {
  if (const auto* b = std::get_if<Bernoulli>(&kind_)) {
    if (!(b->p >= 0.0 && b->p <= 1.0)) throw std::invalid_argument("bernoulli: p must be in [0, 1]");
  } else if (const auto* u = std::get_if<UniformReal>(&kind_)) {
    if (!std::isfinite(u->lo) || !std::isfinite(u->hi) || !(u->lo < u->hi))
      throw std::invalid_argument("uniform: need finite lo < hi");
  } else if (const auto* g = std::get_if<Gaussian>(&kind_)) {
    if (!std::isfinite(g->mean) || !std::isfinite(g->variance) || g->variance < 0.0)
      throw std::invalid_argument("gaussian: need finite mean and variance >= 0");
  } else if (const auto* m = std::get_if<MarkovFinite>(&kind_)) {
    validate_markov(*m);
    if (m->initial)
      for (double x : *m->initial) (void)symbol_index(x);
    stationary_ = stationary_law(*m);
  } else if (const auto* o = std::get_if<Odometer>(&kind_)) {
    if (o->bits < 1 || o->bits > 53) throw std::invalid_argument("odometer: bits must be in [1, 53]");
    if (o->initial) (void)OdometerState::from_value(*o->initial, o->bits);
  } else if (const auto* s = std::get_if<Sequence>(&kind_)) {
    if (s->values.empty()) throw std::invalid_argument("sequence: empty path");
    for (double x : s->values)
      if (!std::isfinite(x)) throw std::invalid_argument("sequence: non-finite value");
  }
}

bool ProcessModel::has_oracle() const { return !std::holds_alternative<Sequence>(kind_); }

std::size_t ProcessModel::memory() const {
  if (const auto* m = std::get_if<MarkovFinite>(&kind_)) return m->order;
  return 1;
}

std::size_t ProcessModel::symbol_index(double x) const {
  const auto* m = std::get_if<MarkovFinite>(&kind_);
  if (m == nullptr) throw std::logic_error("symbol_index: not a finite-alphabet model");
  const auto it = std::lower_bound(m->alphabet.begin(), m->alphabet.end(), x);
  if (it == m->alphabet.end() || *it != x)
    throw std::domain_error("markov: symbol " + format_double(x) + " outside the alphabet");
  return static_cast<std::size_t>(it - m->alphabet.begin());
}

std::size_t ProcessModel::context_of(std::span<const double> tail) const {
  const auto& m = std::get<MarkovFinite>(kind_);
  if (tail.size() < m.order) throw std::invalid_argument("markov: prefix shorter than the chain order");
  std::size_t row = 0;
  for (std::size_t i = tail.size() - m.order; i < tail.size(); ++i)
    row = row * m.alphabet.size() + symbol_index(tail[i]);
  return row;
}

// The first `order` symbols form one context drawn from the stationary law
// (or fixed by `initial`), so E(X_m | X_0..X_{m-1}) for m < order is a
// ratio of stationary masses over contexts sharing that leading prefix.
double ProcessModel::short_prefix_cond_exp(const MarkovFinite& m, std::span<const double> prefix) const {
  const std::size_t len = prefix.size();
  std::vector<std::size_t> lead(len);
  for (std::size_t i = 0; i < len; ++i) lead[i] = symbol_index(prefix[i]);
  if (m.initial) {
    for (std::size_t i = 0; i < len; ++i)
      if (symbol_index((*m.initial)[i]) != lead[i])
        throw std::domain_error("markov: prefix contradicts the fixed initial context");
    return (*m.initial)[len];
  }
  const std::size_t a = m.alphabet.size();
  std::vector<double> mass(a, 0.0);
  std::vector<std::size_t> digits(m.order);
  for (std::size_t row = 0; row < m.transition.size(); ++row) {
    std::size_t r = row;
    for (std::size_t i = m.order; i-- > 0;) {
      digits[i] = r % a;
      r /= a;
    }
    if (!std::equal(lead.begin(), lead.end(), digits.begin())) continue;
    mass[digits[len]] += stationary_(static_cast<Eigen::Index>(row));
  }
  double total = 0.0;
  double e = 0.0;
  for (std::size_t b = 0; b < a; ++b) {
    total += mass[b];
    e += mass[b] * m.alphabet[b];
  }
  if (!(total > 0.0)) throw std::domain_error("markov: prefix has zero stationary probability");
  return e / total;
}

double ProcessModel::cond_exp(std::span<const double> prefix) const {
  if (prefix.empty()) throw std::invalid_argument("cond_exp: empty prefix");
  if (const auto* b = std::get_if<Bernoulli>(&kind_)) return b->p;
  if (const auto* u = std::get_if<UniformReal>(&kind_)) return 0.5 * (u->lo + u->hi);
  if (const auto* g = std::get_if<Gaussian>(&kind_)) return g->mean;
  if (const auto* m = std::get_if<MarkovFinite>(&kind_)) {
    if (prefix.size() < m->order) return short_prefix_cond_exp(*m, prefix);
    const auto& row = m->transition[context_of(prefix)];
    double e = 0.0;
    for (std::size_t a = 0; a < row.size(); ++a) e += m->alphabet[a] * row[a];
    return e;
  }
  if (const auto* o = std::get_if<Odometer>(&kind_))
    return odometer_step(OdometerState::from_value(prefix.back(), o->bits)).value();
  throw std::logic_error("cond_exp: replayed sequences carry no oracle");
}

// ---------------------------------------------------------------------------

PathSampler::PathSampler(const ProcessModel& model, std::uint64_t seed) : model_(&model), rng_(seed) {}

std::optional<double> PathSampler::next() {
  const auto& kind = model_->kind();
  const std::uint64_t n = emitted_;
  std::optional<double> x;
  if (const auto* b = std::get_if<Bernoulli>(&kind)) {
    x = rng_.uniform() < b->p ? 1.0 : 0.0;
  } else if (const auto* u = std::get_if<UniformReal>(&kind)) {
    x = u->lo + (u->hi - u->lo) * rng_.uniform();
  } else if (const auto* g = std::get_if<Gaussian>(&kind)) {
    x = g->mean + std::sqrt(g->variance) * rng_.normal();
  } else if (const auto* m = std::get_if<MarkovFinite>(&kind)) {
    const std::size_t a = m->alphabet.size();
    if (n == 0) {
      context_.assign(m->order, 0);
      if (m->initial) {
        for (std::size_t i = 0; i < m->order; ++i) context_[i] = model_->symbol_index((*m->initial)[i]);
      } else {
        const Eigen::VectorXd& pi = model_->stationary();
        std::size_t row = rng_.categorical(std::span<const double>(pi.data(), static_cast<std::size_t>(pi.size())));
        for (std::size_t i = m->order; i-- > 0;) {
          context_[i] = row % a;
          row /= a;
        }
      }
    }
    if (n < m->order) {
      x = m->alphabet[context_[n]];
    } else {
      std::size_t row = 0;
      for (std::size_t s : context_) row = row * a + s;
      const std::size_t next = rng_.categorical(m->transition[row]);
      std::rotate(context_.begin(), context_.begin() + 1, context_.end());
      context_.back() = next;
      x = m->alphabet[next];
    }
  } else if (const auto* o = std::get_if<Odometer>(&kind)) {
    if (!odometer_) {
      odometer_ = o->initial ? OdometerState::from_value(*o->initial, o->bits)
                             : OdometerState(rng_.bits() >> (64 - o->bits), o->bits);
    } else {
      if (odometer_->is_zero()) ++degeneracies_;
      odometer_ = odometer_step_closed_form(*odometer_);
    }
    x = odometer_->value();
  } else if (const auto* s = std::get_if<Sequence>(&kind)) {
    if (n < s->values.size()) x = s->values[n];
  }
  if (x) ++emitted_;
  return x;
}

std::vector<double> sample_path(const ProcessModel& model, std::uint64_t seed, std::size_t n) {
  if (n < 1) throw std::invalid_argument("sample_path: n must be >= 1");
  PathSampler sampler(model, seed);
  std::vector<double> out;
  out.reserve(n);
  while (out.size() < n) {
    const auto x = sampler.next();
    if (!x) break;
    out.push_back(*x);
  }
  return out;
}

void write_path_csv(std::ostream& out, std::span<const double> path) {
  out << "x\n";
  for (double v : path) out << format_double(v) << '\n';
}

std::vector<double> read_path_csv(std::istream& in) {
  std::vector<double> out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line == "x") continue;
    }
    std::size_t used = 0;
    const double v = std::stod(line, &used);
    if (used != line.size() && line.find_first_not_of(" \t\r", used) != std::string::npos)
      throw std::invalid_argument("path csv: malformed line '" + line + "'");
    out.push_back(v);
  }
  return out;
}

void write_path_binary(std::ostream& out, std::span<const double> path) {
  out.write(kBinaryMagic, sizeof kBinaryMagic);
  const std::uint64_t n = path.size();
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(path.data()), static_cast<std::streamsize>(n * sizeof(double)));
}

std::vector<double> read_path_binary(std::istream& in) {
  char magic[sizeof kBinaryMagic];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kBinaryMagic, sizeof magic) != 0)
    throw std::invalid_argument("path binary: bad header");
  std::uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  std::vector<double> out(n);
  in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw std::invalid_argument("path binary: truncated payload");
  return out;
}

}  // namespace intermittent
