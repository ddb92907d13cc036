#include "evogrid/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace evogrid {

using nlohmann::json;

PayoffMatrix PayoffSpec::build() const {
  if (!entries.empty()) {
    if (entries.size() != 4) throw std::invalid_argument("payoff matrix needs four entries");
    return PayoffMatrix::from_strings(entries[0], entries[1], entries[2], entries[3]);
  }
  const Rational p = parse_rational(param);
  if (family == "snowdrift_classic") return snowdrift_classic(p);
  if (family == "hawk_dove") return hawk_dove(p);
  if (family == "chicken") return chicken(p);
  if (family == "stag_hunt") return stag_hunt(p);
  throw std::invalid_argument("unknown payoff family: " + family);
}

std::string PayoffSpec::describe() const {
  if (!entries.empty())
    return "(" + entries[0] + "," + entries[1] + "," + entries[2] + "," + entries[3] + ")";
  return family + "(" + param + ")";
}

FixedSet FixedSpec::build(const TorusDims& dims) const {
  if (rect) {
    if (kind != FixedKind::FixedC)
      throw std::invalid_argument("rectangle fixed sets pin cooperation");
    return rect->to_fixed_set(dims);
  }
  return FixedSet(kind, dims, nodes);
}

namespace {

RuleSpec rule_from_json(const json& j) {
  RuleSpec r;
  const std::string kind = j.value("kind", "deterministic");
  if (kind == "deterministic")
    r.kind = RuleKind::Deterministic;
  else if (kind == "fermi")
    r.kind = RuleKind::Fermi;
  else if (kind == "proportional")
    r.kind = RuleKind::Proportional;
  else
    throw std::invalid_argument("unknown rule kind: " + kind);
  r.kappa = j.value("kappa", 0.1);
  return r;
}

json rule_to_json(const RuleSpec& r) {
  json j;
  j["kind"] = to_string(r.kind);
  if (r.kind == RuleKind::Fermi) j["kappa"] = r.kappa;
  return j;
}

PayoffSpec payoff_from_json(const json& j) {
  PayoffSpec p;
  if (j.contains("matrix")) {
    for (const auto& e : j.at("matrix")) p.entries.push_back(e.get<std::string>());
  } else {
    p.family = j.at("family").get<std::string>();
    p.param = j.at("param").get<std::string>();
  }
  return p;
}

json payoff_to_json(const PayoffSpec& p) {
  json j;
  if (!p.entries.empty())
    j["matrix"] = p.entries;
  else {
    j["family"] = p.family;
    j["param"] = p.param;
  }
  return j;
}

std::vector<uint64_t> seeds_from_json(const json& j) {
  std::vector<uint64_t> out;
  if (j.is_array()) {
    for (const auto& e : j) out.push_back(e.get<uint64_t>());
  } else {
    const uint64_t from = j.at("from").get<uint64_t>();
    const uint64_t to = j.at("to").get<uint64_t>();
    if (to < from) throw std::invalid_argument("seed range is empty");
    for (uint64_t s = from; s <= to; ++s) out.push_back(s);
  }
  if (out.empty()) throw std::invalid_argument("at least one seed is required");
  return out;
}

InitKind init_from_json(const json& j, const char* key) {
  const std::string v = j.value(key, "random");
  if (v == "random") return InitKind::Random;
  if (v == "random_with_c_square") return InitKind::RandomWithCSquare;
  throw std::invalid_argument("unknown init kind: " + v);
}

uint64_t fnv1a(const std::string& text) {
  uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) h = (h ^ c) * 1099511628211ULL;
  return h;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  const json j = json::parse(text);
  ExperimentConfig c;
  c.dims = TorusDims(j.at("dims").at("rows").get<int>(), j.at("dims").at("cols").get<int>());
  c.payoff = payoff_from_json(j.at("payoff"));
  if (j.contains("rule")) c.rule = rule_from_json(j.at("rule"));
  c.seeds = seeds_from_json(j.at("seeds"));
  c.max_steps = j.value("max_steps", 1000000L);
  if (c.max_steps <= 0) throw std::invalid_argument("max_steps must be positive");
  if (j.contains("fixed")) {
    FixedSpec f;
    const json& jf = j.at("fixed");
    const std::string kind = jf.at("kind").get<std::string>();
    if (kind == "C")
      f.kind = FixedKind::FixedC;
    else if (kind == "D")
      f.kind = FixedKind::FixedD;
    else
      throw std::invalid_argument("fixed kind must be C or D");
    if (jf.contains("rect")) {
      FixedRect r;
      r.origin = {jf.at("rect").at("i0").get<int>(), jf.at("rect").at("j0").get<int>()};
      r.n1 = jf.at("rect").at("rows").get<int>();
      r.m1 = jf.at("rect").at("cols").get<int>();
      f.rect = r;
    } else {
      for (const auto& e : jf.at("nodes"))
        f.nodes.push_back({e.at(0).get<int>(), e.at(1).get<int>()});
    }
    c.fixed = f;
  }
  c.init = init_from_json(j, "init");
  c.payoff.build();  // reject unknown families and malformed entries up front
  if (j.contains("snapshots")) {
    c.snapshot_every = j.at("snapshots").value("every", 0L);
    const std::string fmt = j.at("snapshots").value("format", "ascii");
    if (fmt == "ascii")
      c.snapshot_format = SnapshotFormat::Ascii;
    else if (fmt == "pgm")
      c.snapshot_format = SnapshotFormat::Pgm;
    else if (fmt == "both")
      c.snapshot_format = SnapshotFormat::Both;
    else
      throw std::invalid_argument("unknown snapshot format: " + fmt);
  }
  c.out_dir = j.value("out", std::string("out"));
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  return from_json_text(slurp(path));
}

std::string ExperimentConfig::canonical_json() const {
  json j;
  j["dims"] = {{"rows", dims.rows}, {"cols", dims.cols}};
  j["payoff"] = payoff_to_json(payoff);
  j["rule"] = rule_to_json(rule);
  j["seeds"] = seeds;
  j["max_steps"] = max_steps;
  if (fixed) {
    json jf;
    jf["kind"] = fixed->kind == FixedKind::FixedC ? "C" : "D";
    if (fixed->rect) {
      jf["rect"] = {{"i0", fixed->rect->origin.i},
                    {"j0", fixed->rect->origin.j},
                    {"rows", fixed->rect->n1},
                    {"cols", fixed->rect->m1}};
    } else {
      json nodes = json::array();
      for (const NodeId& n : fixed->nodes) nodes.push_back({n.i, n.j});
      jf["nodes"] = nodes;
    }
    j["fixed"] = jf;
  }
  j["init"] = init == InitKind::Random ? "random" : "random_with_c_square";
  j["snapshots"] = {{"every", snapshot_every},
                    {"format", snapshot_format == SnapshotFormat::Ascii ? "ascii"
                               : snapshot_format == SnapshotFormat::Pgm ? "pgm"
                               : snapshot_format == SnapshotFormat::Both ? "both"
                                                                         : "none"}};
  return j.dump();
}

uint64_t ExperimentConfig::hash() const { return fnv1a(canonical_json()); }

SweepSpec SweepSpec::from_json_text(const std::string& text) {
  const json j = json::parse(text);
  SweepSpec s;
  s.dims = TorusDims(j.at("dims").at("rows").get<int>(), j.at("dims").at("cols").get<int>());
  s.family = j.at("family").get<std::string>();
  for (const auto& e : j.at("points")) {
    SweepPoint p;
    if (e.is_string()) {
      p.param = e.get<std::string>();
    } else {
      p.param = e.at("param").get<std::string>();
      p.max_steps = e.value("max_steps", 10000L);
    }
    s.points.push_back(p);
  }
  if (s.points.empty()) throw std::invalid_argument("sweep needs at least one point");
  for (const SweepPoint& p : s.points) {
    PayoffSpec spec;
    spec.family = s.family;
    spec.param = p.param;
    spec.build();  // reject unknown families and out-of-range parameters
  }
  if (j.contains("rule")) s.rule = rule_from_json(j.at("rule"));
  s.replications = j.value("replications", 100);
  if (s.replications <= 0) throw std::invalid_argument("replications must be positive");
  s.seed_base = j.value("seed_base", 1ULL);
  s.init = init_from_json(j, "init");
  s.out_dir = j.value("out", std::string("out"));
  return s;
}

SweepSpec SweepSpec::from_file(const std::string& path) {
  return from_json_text(slurp(path));
}

std::string SweepSpec::canonical_json() const {
  json j;
  j["dims"] = {{"rows", dims.rows}, {"cols", dims.cols}};
  j["family"] = family;
  json pts = json::array();
  for (const SweepPoint& p : points) pts.push_back({{"param", p.param}, {"max_steps", p.max_steps}});
  j["points"] = pts;
  j["rule"] = rule_to_json(rule);
  j["replications"] = replications;
  j["seed_base"] = seed_base;
  j["init"] = init == InitKind::Random ? "random" : "random_with_c_square";
  return j.dump();
}

uint64_t SweepSpec::hash() const { return fnv1a(canonical_json()); }

std::vector<std::string> preset_names() {
  return {"snowdrift-critical", "hawkdove-critical", "chicken-critical", "staghunt"};
}

// 10x10 deterministic-rule setups around the critical parameter values, with
// long budgets on the non-converging side.
SweepSpec preset(const std::string& name) {
  SweepSpec s;
  s.dims = TorusDims(10, 10);
  s.rule.kind = RuleKind::Deterministic;
  s.replications = 100;
  s.seed_base = 1;
  if (name == "snowdrift-critical") {
    s.family = "snowdrift_classic";
    s.points = {{"0.74", 1000000}, {"0.75", 10000}, {"0.76", 10000}};
  } else if (name == "hawkdove-critical") {
    s.family = "hawk_dove";
    s.points = {{"0.59", 1000000}, {"0.60", 1000000}, {"0.61", 10000}};
  } else if (name == "chicken-critical") {
    s.family = "chicken";
    s.points = {{"2.9", 1000000}, {"3.0", 10000}, {"3.1", 10000}};
  } else if (name == "staghunt") {
    s.family = "stag_hunt";
    s.points = {{"0.32", 10000}, {"1/3", 10000}, {"0.34", 10000}};
    s.init = InitKind::RandomWithCSquare;
  } else {
    throw std::invalid_argument("unknown preset: " + name);
  }
  return s;
}

}  // namespace evogrid
