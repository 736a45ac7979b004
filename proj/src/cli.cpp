#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "intermittent/harness.hpp"

namespace intermittent {

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seeds;
  std::optional<Level> k_max;
  std::optional<std::uint64_t> horizon;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
  bool assert_checks = false;
  // trace only
  std::optional<std::uint64_t> seed;
  std::string path;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON experiment config");
  cmd->add_option("--seeds", f.seeds, "number of seeds, counted from the config's seed base");
  cmd->add_option("--k-max", f.k_max, "largest stopping-time index");
  cmd->add_option("--horizon", f.horizon, "samples per path");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--threads", f.threads, "worker threads (0: all cores)");
  cmd->add_flag("--assert", f.assert_checks, "exit 1 when a check fails");
}

ExperimentConfig build_config(const Flags& f) {
  ExperimentConfig c = f.config.empty() ? ExperimentConfig{} : load_config(f.config);
  if (f.seeds) c.set_seed_count(*f.seeds);
  if (f.k_max) c.k_max = *f.k_max;
  if (f.horizon) c.horizon = *f.horizon;
  if (f.out) c.outputs.dir = *f.out;
  if (f.threads) c.threads = *f.threads;
  c.validate();
  return c;
}

std::vector<double> parse_path(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size() && item.find_first_not_of(" \t", used) != std::string::npos)
      throw std::invalid_argument("--path: bad number '" + item + "'");
    values.push_back(v);
  }
  if (values.empty()) throw std::invalid_argument("--path: empty");
  return values;
}

const CurveRow* row_at(const ErrorCurve& curve, Level k) {
  for (const auto& r : curve.rows)
    if (r.k == k) return &r;
  return nullptr;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Check mse_trend_check(const RunReport& report) {
  const Level hi = report.config.k_max;
  const Level lo = std::max<Level>(1, hi / 10);
  Check c;
  c.name = "mse_decreases";
  if (!report.curve.has_oracle) {
    c.detail = "model has no oracle";
    return c;
  }
  if (lo == hi) {
    c.passed = true;
    c.detail = "k_max too small for a trend";
    return c;
  }
  const CurveRow* a = row_at(report.curve, lo);
  const CurveRow* b = row_at(report.curve, hi);
  if (!a || !b) {
    c.detail = "no seed reached k=" + std::to_string(b ? lo : hi);
    return c;
  }
  c.value = b->mean_sq_err;
  c.threshold = a->mean_sq_err;
  c.passed = b->mean_sq_err < a->mean_sq_err;
  c.detail = "MSE(k=" + std::to_string(hi) + ") < MSE(k=" + std::to_string(lo) + ")";
  return c;
}

Check bound_check(const RunReport& report) {
  Check c;
  c.name = "violation_rate_within_ceiling";
  c.threshold = 0.0;
  double worst = -std::numeric_limits<double>::infinity();
  std::size_t failing = 0;
  for (const auto& r : report.violations) {
    if (!r.within_tolerance) ++failing;
    const double excess = r.n_seeds > 0 ? r.rate - r.ceiling - 3.0 * r.std_error : std::numeric_limits<double>::infinity();
    worst = std::max(worst, excess);
  }
  c.value = worst;
  c.passed = !report.violations.empty() && failing == 0;
  c.detail = std::to_string(failing) + " of " + std::to_string(report.violations.size()) +
             " levels above ceiling + 3 se";
  return c;
}

void print_checks(std::ostream& out, const RunReport& report) {
  for (const Check& c : report.checks)
    out << (c.passed ? "PASS " : "FAIL ") << c.name << " value=" << fmt(c.value) << " threshold=" << fmt(c.threshold)
        << (c.detail.empty() ? "" : "  (" + c.detail + ")") << '\n';
}

int finish(const RunReport& report, const std::string& sub, const Flags& f, std::ostream& out) {
  write_report(report, sub, report.config.outputs.dir);
  print_checks(out, report);
  out << "seeds=" << report.seeds.size() << " truncated=" << report.truncated_seeds
      << " samples_max=" << report.samples_max << " out=" << report.config.outputs.dir << '\n';
  return f.assert_checks && !report.passed() ? 1 : 0;
}

int cmd_simulate(const Flags& f, std::ostream& out) {
  RunReport report = run(build_config(f));
  report.checks.push_back(mse_trend_check(report));
  return finish(report, "simulate", f, out);
}

int cmd_verify_bound(const Flags& f, std::ostream& out) {
  ExperimentConfig c = build_config(f);
  if (!c.epsilon) throw std::invalid_argument("verify-bound: config needs epsilon");
  if (!c.family.finite()) throw std::invalid_argument("verify-bound: family must have finite partitions");
  RunReport report = run(c);
  report.checks.push_back(bound_check(report));
  return finish(report, "verify-bound", f, out);
}

int cmd_dist_check(const Flags& f, std::ostream& out) {
  ExperimentConfig c = build_config(f);
  if (c.dist_k.empty()) throw std::invalid_argument("dist-check: config needs dist_k");
  c.k_max = *std::max_element(c.dist_k.begin(), c.dist_k.end());
  RunReport report = run(c);
  report.dist = distribution_check(report);
  for (const DistRow& r : report.dist) {
    Check chk;
    chk.name = "ks_k" + std::to_string(r.k);
    chk.value = r.ks;
    chk.threshold = r.threshold;
    chk.passed = r.passed;
    chk.detail = "n=" + std::to_string(r.n_stopped) + " m=" + std::to_string(r.n_reference) +
                 " critical=" + fmt(r.critical);
    report.checks.push_back(chk);
  }
  return finish(report, "dist-check", f, out);
}

int cmd_trace(const Flags& f, std::ostream& out) {
  ExperimentConfig c = build_config(f);
  if (!f.path.empty()) c.model = ProcessModel(Sequence{parse_path(f.path)});
  const std::uint64_t seed = f.seed.value_or(c.seeds.front());
  const SeedLog log = run_seed(c, seed);
  out << "# seed=" << seed << " config_hash=" << config_hash(c) << '\n';
  out << "k,eta,zeta,g,oracle,abs_err\n";
  for (std::size_t i = 0; i < log.predictions.size(); ++i) {
    const PredictionRecord& p = log.predictions[i];
    out << p.k << ',' << log.scans[i].eta << ',' << p.zeta << ',' << fmt(p.g) << ',';
    if (p.oracle) out << fmt(*p.oracle) << ',' << fmt(std::fabs(p.g - *p.oracle));
    else out << ',';
    out << '\n';
  }
  if (log.truncated)
    out << "# truncated: zeta_" << log.stalled_at_k << " not found within " << log.samples_consumed
        << " samples\n";
  return 0;
}

}  // namespace

int cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Intermittent estimation of E(X_{n+1} | X_0..X_n) at recurrence stopping times"};
  app.require_subcommand(1);
  Flags f;
  auto* simulate = app.add_subcommand("simulate", "error curves over seeds");
  auto* verify = app.add_subcommand("verify-bound", "stopping-time growth bound violation rates");
  auto* dist = app.add_subcommand("dist-check", "KS test of X_{zeta_k+1} against X_1");
  auto* trace = app.add_subcommand("trace", "event-by-event log of one path");
  for (auto* cmd : {simulate, verify, dist, trace}) add_common(cmd, f);
  trace->add_option("--seed", f.seed, "seed to trace (default: first configured seed)");
  trace->add_option("--path", f.path, "literal path, comma separated, replacing the model");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (simulate->parsed()) return cmd_simulate(f, out);
    if (verify->parsed()) return cmd_verify_bound(f, out);
    if (dist->parsed()) return cmd_dist_check(f, out);
    return cmd_trace(f, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace intermittent
