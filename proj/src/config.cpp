#include "intermittent/config.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace intermittent {

using nlohmann::json;

namespace {

std::string kind_of(const json& j, const char* key, const char* what) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_string())
    throw std::invalid_argument(std::string(what) + ": missing \"" + key + "\"");
  return j.at(key).get<std::string>();
}

json exponent_to_json(const ExponentRule& rule) {
  if (const auto* r = std::get_if<LinearExponent>(&rule))
    return {{"kind", "linear"}, {"slope", r->slope}, {"offset", r->offset}};
  if (const auto* r = std::get_if<LogLogExponent>(&rule)) return {{"kind", "loglog"}, {"offset", r->offset}};
  return {{"kind", "table"}, {"values", std::get<TableExponent>(rule).values}};
}

ExponentRule exponent_from_json(const json& j) {
  const std::string kind = kind_of(j, "kind", "exponent");
  if (kind == "linear") return LinearExponent{j.value("slope", 1.0), j.value("offset", 0.0)};
  if (kind == "loglog") return LogLogExponent{j.value("offset", 1.0)};
  if (kind == "table") return TableExponent{j.at("values").get<std::vector<int>>()};
  throw std::invalid_argument("exponent: unknown kind '" + kind + "'");
}

std::vector<double> load_path_file(const std::string& path) {
  const bool binary = std::filesystem::path(path).extension() == ".bin";
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw std::runtime_error("cannot open path file " + path);
  return binary ? read_path_binary(in) : read_path_csv(in);
}

}  // namespace

bool OutputSpec::wants(const std::string& format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

std::vector<std::uint64_t> ExperimentConfig::default_seeds(std::uint64_t base, std::uint64_t count) {
  std::vector<std::uint64_t> out(count);
  for (std::uint64_t i = 0; i < count; ++i) out[i] = base + i;
  return out;
}

void ExperimentConfig::set_seed_count(std::uint64_t count) {
  seeds = default_seeds(seed_base, count);
  seeds_are_range = true;
}

void ExperimentConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("config: horizon must be >= 1");
  if (k_max < 1) throw std::invalid_argument("config: k_max must be >= 1");
  if (seeds.empty()) throw std::invalid_argument("config: need at least one seed");
  if (epsilon && !(*epsilon > 0.0)) throw std::invalid_argument("config: epsilon must be positive");
  if (!(ks_threshold > 0.0 && ks_threshold <= 1.0))
    throw std::invalid_argument("config: ks_threshold must be in (0, 1]");
  for (Level k : dist_k)
    if (k < 1) throw std::invalid_argument("config: dist_k entries must be >= 1");
}

json to_json(const ProcessModel& model) {
  const auto& kind = model.kind();
  if (const auto* b = std::get_if<Bernoulli>(&kind)) return {{"kind", "bernoulli"}, {"p", b->p}};
  if (const auto* u = std::get_if<UniformReal>(&kind)) return {{"kind", "uniform"}, {"lo", u->lo}, {"hi", u->hi}};
  if (const auto* g = std::get_if<Gaussian>(&kind))
    return {{"kind", "gaussian"}, {"mean", g->mean}, {"variance", g->variance}};
  if (const auto* m = std::get_if<MarkovFinite>(&kind)) {
    json j = {{"kind", "markov"}, {"order", m->order}, {"alphabet", m->alphabet}, {"transition", m->transition}};
    if (m->initial) j["initial"] = *m->initial;
    return j;
  }
  if (const auto* o = std::get_if<Odometer>(&kind)) {
    json j = {{"kind", "odometer"}, {"bits", o->bits}};
    if (o->initial) j["initial"] = *o->initial;
    return j;
  }
  return {{"kind", "sequence"}, {"values", std::get<Sequence>(kind).values}};
}

ProcessModel model_from_json(const json& j) {
  const std::string kind = kind_of(j, "kind", "model");
  if (kind == "bernoulli") return ProcessModel(Bernoulli{j.value("p", 0.5)});
  if (kind == "uniform") return ProcessModel(UniformReal{j.value("lo", 0.0), j.value("hi", 1.0)});
  if (kind == "gaussian") return ProcessModel(Gaussian{j.value("mean", 0.0), j.value("variance", 1.0)});
  if (kind == "markov") {
    MarkovFinite m;
    m.order = j.value("order", std::size_t{1});
    m.alphabet = j.at("alphabet").get<std::vector<double>>();
    m.transition = j.at("transition").get<std::vector<std::vector<double>>>();
    if (j.contains("initial") && !j.at("initial").is_null()) m.initial = j.at("initial").get<std::vector<double>>();
    return ProcessModel(std::move(m));
  }
  if (kind == "odometer") {
    Odometer o;
    o.bits = j.value("bits", 48U);
    if (j.contains("initial") && !j.at("initial").is_null()) o.initial = j.at("initial").get<double>();
    return ProcessModel(o);
  }
  if (kind == "sequence") {
    if (j.contains("values")) return ProcessModel(Sequence{j.at("values").get<std::vector<double>>()});
    return ProcessModel(Sequence{load_path_file(j.at("file").get<std::string>())});
  }
  throw std::invalid_argument("model: unknown kind '" + kind + "'");
}

json to_json(const PartitionFamily& family) {
  const auto& kind = family.kind();
  if (const auto* f = std::get_if<DyadicFinite>(&kind)) {
    json cells;
    if (const auto* p = std::get_if<Pow2Cells>(&f->cells))
      cells = {{"rule", "pow2"}, {"exponent", exponent_to_json(p->exponent)}};
    else
      cells = {{"rule", "table"}, {"counts", std::get<CountTable>(f->cells).counts}};
    return {{"kind", "dyadic_finite"}, {"lo", f->lo}, {"hi", f->hi}, {"cells", cells}};
  }
  if (const auto* f = std::get_if<DyadicInfinite>(&kind))
    return {{"kind", "dyadic_infinite"}, {"exponent", exponent_to_json(f->resolution)}};
  return {{"kind", "finite_alphabet"}, {"alphabet", std::get<FiniteAlphabetExact>(kind).alphabet}};
}

PartitionFamily family_from_json(const json& j) {
  if (j.is_string() && j.get<std::string>() == "example2") return PartitionFamily::example2();
  const std::string kind = kind_of(j, "kind", "family");
  if (kind == "dyadic_finite") {
    DyadicFinite f;
    f.lo = j.value("lo", 0.0);
    f.hi = j.value("hi", 1.0);
    if (j.contains("cells")) {
      const json& c = j.at("cells");
      const std::string rule = kind_of(c, "rule", "cells");
      if (rule == "pow2")
        f.cells = Pow2Cells{exponent_from_json(c.at("exponent"))};
      else if (rule == "table")
        f.cells = CountTable{c.at("counts").get<std::vector<std::uint64_t>>()};
      else
        throw std::invalid_argument("cells: unknown rule '" + rule + "'");
    }
    return PartitionFamily(std::move(f));
  }
  if (kind == "dyadic_infinite") {
    DyadicInfinite f;
    if (j.contains("exponent")) f.resolution = exponent_from_json(j.at("exponent"));
    return PartitionFamily(std::move(f));
  }
  if (kind == "finite_alphabet")
    return PartitionFamily(FiniteAlphabetExact{j.at("alphabet").get<std::vector<double>>()});
  throw std::invalid_argument("family: unknown kind '" + kind + "'");
}

json to_json(const LagSchedule& schedule) {
  const auto& rule = schedule.rule();
  if (std::holds_alternative<LinearLag>(rule)) return {{"rule", "linear"}};
  if (const auto* r = std::get_if<LogFloorLag>(&rule)) return {{"rule", "log_floor"}, {"c", r->c}};
  return {{"rule", "custom"}, {"table", std::get<CustomLag>(rule).table}};
}

LagSchedule schedule_from_json(const json& j) {
  const std::string rule = kind_of(j, "rule", "schedule");
  if (rule == "linear") return LagSchedule::linear();
  if (rule == "log_floor") return LagSchedule::log_floor(j.value("c", 3.0));
  if (rule == "custom") return LagSchedule(CustomLag{j.at("table").get<std::vector<std::uint64_t>>()});
  throw std::invalid_argument("schedule: unknown rule '" + rule + "'");
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["model"] = to_json(c.model);
  j["family"] = to_json(c.family);
  j["schedule"] = to_json(c.schedule);
  if (c.seeds_are_range)
    j["seeds"] = {{"base", c.seed_base}, {"count", c.seeds.size()}};
  else
    j["seeds"] = c.seeds;
  j["horizon"] = c.horizon;
  j["k_max"] = c.k_max;
  j["epsilon"] = c.epsilon ? json(*c.epsilon) : json(nullptr);
  j["k_min"] = c.k_min;
  j["dist_k"] = c.dist_k;
  j["ks_threshold"] = c.ks_threshold;
  j["threads"] = c.threads;
  j["outputs"] = {{"dir", c.outputs.dir}, {"formats", c.outputs.formats}};
  return j;
}

ExperimentConfig config_from_json(const json& j, const std::string& base_dir) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  ExperimentConfig c;
  if (j.contains("model")) {
    json m = j.at("model");
    if (m.contains("file")) {
      const std::filesystem::path p(m.at("file").get<std::string>());
      m["file"] = (p.is_absolute() ? p : std::filesystem::path(base_dir) / p).string();
    }
    c.model = model_from_json(m);
  }
  if (j.contains("family")) c.family = family_from_json(j.at("family"));
  if (j.contains("schedule")) c.schedule = schedule_from_json(j.at("schedule"));
  if (j.contains("seeds")) {
    const json& s = j.at("seeds");
    if (s.is_array()) {
      c.seeds = s.get<std::vector<std::uint64_t>>();
      c.seeds_are_range = false;
      c.seed_base = c.seeds.empty() ? 1 : c.seeds.front();
    } else {
      c.seed_base = s.value("base", std::uint64_t{1});
      c.set_seed_count(s.value("count", std::uint64_t{50}));
    }
  }
  c.horizon = j.value("horizon", c.horizon);
  c.k_max = j.value("k_max", c.k_max);
  if (j.contains("epsilon")) {
    if (j.at("epsilon").is_null())
      c.epsilon.reset();
    else
      c.epsilon = j.at("epsilon").get<double>();
  }
  c.k_min = j.value("k_min", c.k_min);
  if (j.contains("dist_k")) c.dist_k = j.at("dist_k").get<std::vector<Level>>();
  c.ks_threshold = j.value("ks_threshold", c.ks_threshold);
  c.threads = j.value("threads", c.threads);
  if (j.contains("outputs")) {
    const json& o = j.at("outputs");
    c.outputs.dir = o.value("dir", c.outputs.dir);
    if (o.contains("formats")) c.outputs.formats = o.at("formats").get<std::vector<std::string>>();
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config " + path + ": " + e.what());
  }
  return config_from_json(j, std::filesystem::path(path).parent_path().string());
}

std::string config_hash(const ExperimentConfig& config) {
  json j = to_json(config);
  j.erase("outputs");
  j.erase("threads");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace intermittent
