#include "intermittent/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace intermittent {

using nlohmann::json;

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

json json_num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void open_and_write(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  body(out);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

bool operator==(const SeedLog& a, const SeedLog& b) {
  if (a.seed != b.seed || a.scans != b.scans || a.truncated != b.truncated || a.stalled_at_k != b.stalled_at_k ||
      a.samples_consumed != b.samples_consumed || a.degeneracies != b.degeneracies ||
      a.predictions.size() != b.predictions.size())
    return false;
  for (std::size_t i = 0; i < a.predictions.size(); ++i) {
    const auto& p = a.predictions[i];
    const auto& q = b.predictions[i];
    if (p.k != q.k || p.zeta != q.zeta || p.g != q.g || p.oracle != q.oracle || p.next_value != q.next_value)
      return false;
  }
  return true;
}

bool RunReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

SeedLog run_seed(const ExperimentConfig& config, std::uint64_t seed) {
  SeedLog log;
  log.seed = seed;
  const ProcessModel& model = config.model;
  PathSampler sampler(model, seed);
  Estimator estimator(config.family, config.schedule);
  const bool has_oracle = model.has_oracle();
  const std::size_t memory = model.memory();

  std::deque<double> window;
  std::vector<double> prefix;
  bool awaiting_next = false;
  std::uint64_t n = 0;

  while (n < config.horizon) {
    const auto x = sampler.next();
    if (!x) break;
    if (awaiting_next) {
      log.predictions.back().next_value = *x;
      awaiting_next = false;
      if (log.predictions.size() >= config.k_max) {
        ++n;
        break;
      }
    }
    window.push_back(*x);
    if (window.size() > memory) window.pop_front();
    const auto ev = estimator.push(*x);
    ++n;
    if (!ev) continue;

    log.scans.push_back(ScanEvent{ev->k, ev->eta, ev->zeta});
    PredictionRecord rec;
    rec.k = ev->k;
    rec.zeta = ev->zeta;
    rec.g = ev->g;
    if (has_oracle) {
      prefix.assign(window.begin(), window.end());
      rec.oracle = model.cond_exp(prefix);
    }
    log.predictions.push_back(rec);
    awaiting_next = true;
  }

  log.samples_consumed = n;
  log.degeneracies = sampler.degeneracies();
  if (log.predictions.size() < config.k_max) {
    log.truncated = true;
    log.stalled_at_k = estimator.scanner().next_k();
  }
  return log;
}

RunReport run(const ExperimentConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();

  RunReport report;
  report.config = config;
  const std::size_t n_seeds = config.seeds.size();
  report.seeds.resize(n_seeds);

  std::size_t threads = config.threads == 0 ? std::max(1U, std::thread::hardware_concurrency()) : config.threads;
  threads = std::min(threads, n_seeds);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n_seeds; i = next++) {
      try {
        report.seeds[i] = run_seed(config, config.seeds[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n_seeds;
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<std::vector<PredictionRecord>> predictions;
  std::vector<std::vector<ScanEvent>> scans;
  predictions.reserve(n_seeds);
  scans.reserve(n_seeds);
  for (const SeedLog& s : report.seeds) {
    predictions.push_back(s.predictions);
    scans.push_back(s.scans);
    if (s.truncated) ++report.truncated_seeds;
    report.degeneracies += s.degeneracies;
    report.samples_total += s.samples_consumed;
    report.samples_max = std::max(report.samples_max, s.samples_consumed);
  }
  report.curve = error_curves(predictions, config.k_max);
  if (config.epsilon && config.family.finite()) {
    const GrowthBoundSpec spec(*config.epsilon, config.family, config.schedule);
    report.violations = bound_violation_rate(scans, spec, config.k_min, config.k_max, config.horizon);
  }

  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::uint64_t reference_seed(std::uint64_t seed) { return seed + (std::uint64_t{1} << 40); }

std::vector<DistRow> distribution_check(const RunReport& report) {
  const ExperimentConfig& config = report.config;
  std::vector<double> reference;
  for (std::uint64_t seed : config.seeds) {
    const auto path = sample_path(config.model, reference_seed(seed), 2);
    if (path.size() == 2) reference.push_back(path[1]);
  }
  std::vector<DistRow> rows;
  for (Level k : config.dist_k) {
    std::vector<double> stopped;
    for (const SeedLog& s : report.seeds)
      if (s.predictions.size() >= k && s.predictions[k - 1].next_value)
        stopped.push_back(*s.predictions[k - 1].next_value);
    DistRow row;
    row.k = k;
    row.n_stopped = stopped.size();
    row.n_reference = reference.size();
    row.threshold = config.ks_threshold;
    if (stopped.empty() || reference.empty()) {
      row.ks = std::numeric_limits<double>::quiet_NaN();
      row.critical = std::numeric_limits<double>::quiet_NaN();
      row.passed = false;
    } else {
      row.ks = ks_distance(stopped, reference);
      row.critical = ks_critical_value(stopped.size(), reference.size());
      row.passed = row.ks <= row.threshold;
    }
    rows.push_back(row);
  }
  return rows;
}

void write_events_csv(std::ostream& out, const RunReport& report) {
  out << "seed,k,eta,zeta,g,oracle,abs_err,next_value\n";
  for (const SeedLog& s : report.seeds) {
    for (std::size_t i = 0; i < s.predictions.size(); ++i) {
      const PredictionRecord& p = s.predictions[i];
      out << s.seed << ',' << p.k << ',' << s.scans[i].eta << ',' << p.zeta << ',' << num(p.g) << ','
          << opt_num(p.oracle) << ',' << (p.oracle ? num(std::fabs(p.g - *p.oracle)) : std::string()) << ','
          << opt_num(p.next_value) << '\n';
    }
  }
}

void write_scan_csv(std::ostream& out, const std::vector<ScanEvent>& events) {
  out << "k,eta,zeta\n";
  for (const ScanEvent& e : events) out << e.k << ',' << e.eta << ',' << e.zeta << '\n';
}

void write_curves_csv(std::ostream& out, const RunReport& report) {
  out << "k,n_seeds,median_abs_err,mean_sq_err,bayes_gap_sq,zeta_median,bound_log2,violation_rate,ceiling\n";
  for (const CurveRow& r : report.curve.rows) {
    const auto v = std::find_if(report.violations.begin(), report.violations.end(),
                                [&](const ViolationRow& row) { return row.k == r.k; });
    out << r.k << ',' << r.n_seeds << ',' << num(r.median_abs_err) << ',' << num(r.mean_sq_err) << ','
        << num(r.bayes_gap_sq) << ',' << num(r.zeta_median) << ',';
    if (v != report.violations.end())
      out << num(v->bound_log2) << ',' << num(v->rate) << ',' << num(v->ceiling);
    else
      out << ",,";
    out << '\n';
  }
}

void write_bound_csv(std::ostream& out, const RunReport& report) {
  out << "k,n_seeds,violations,censored,violation_rate,ceiling,std_error,bound_log2,within_tolerance\n";
  for (const ViolationRow& r : report.violations)
    out << r.k << ',' << r.n_seeds << ',' << r.violations << ',' << r.censored << ',' << num(r.rate) << ','
        << num(r.ceiling) << ',' << num(r.std_error) << ',' << num(r.bound_log2) << ','
        << (r.within_tolerance ? 1 : 0) << '\n';
}

void write_dist_csv(std::ostream& out, const RunReport& report) {
  out << "k,n_stopped,n_reference,ks,critical,threshold,passed\n";
  for (const DistRow& r : report.dist)
    out << r.k << ',' << r.n_stopped << ',' << r.n_reference << ',' << num(r.ks) << ',' << num(r.critical) << ','
        << num(r.threshold) << ',' << (r.passed ? 1 : 0) << '\n';
}

json summary_json(const RunReport& report, const std::string& subcommand) {
  json j;
  j["subcommand"] = subcommand;
  j["config"] = to_json(report.config);
  j["config_hash"] = config_hash(report.config);
  j["counters"] = {{"seeds", report.seeds.size()},
                   {"truncated_seeds", report.truncated_seeds},
                   {"degeneracies", report.degeneracies},
                   {"samples_total", report.samples_total},
                   {"samples_max", report.samples_max}};
  json checks = json::array();
  for (const Check& c : report.checks)
    checks.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"value", json_num(c.value)},
                      {"threshold", json_num(c.threshold)},
                      {"detail", c.detail}});
  j["checks"] = checks;
  if (!report.dist.empty()) {
    json dist = json::array();
    for (const DistRow& r : report.dist)
      dist.push_back({{"k", r.k},
                      {"n_stopped", r.n_stopped},
                      {"n_reference", r.n_reference},
                      {"ks", json_num(r.ks)},
                      {"critical", json_num(r.critical)},
                      {"passed", r.passed}});
    j["dist"] = dist;
  }
  j["passed"] = report.passed();
  j["timing"] = {{"wall_seconds", report.wall_seconds}};
  return j;
}

void write_report(const RunReport& report, const std::string& subcommand, const std::string& dir) {
  const std::filesystem::path root(dir);
  std::filesystem::create_directories(root);
  const OutputSpec& o = report.config.outputs;
  if (o.wants("csv")) {
    open_and_write(root / "events.csv", [&](std::ostream& out) { write_events_csv(out, report); });
    open_and_write(root / "curves.csv", [&](std::ostream& out) { write_curves_csv(out, report); });
    if (!report.violations.empty())
      open_and_write(root / "bound.csv", [&](std::ostream& out) { write_bound_csv(out, report); });
    if (!report.dist.empty())
      open_and_write(root / "dist.csv", [&](std::ostream& out) { write_dist_csv(out, report); });
  }
  if (o.wants("json"))
    open_and_write(root / "summary.json",
                   [&](std::ostream& out) { out << summary_json(report, subcommand).dump(2) << '\n'; });
}

}  // namespace intermittent
