#ifndef SRSLAB_EXPERIMENTS_HPP
#define SRSLAB_EXPERIMENTS_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "srslab/bass_serre.hpp"
#include "srslab/groups/symmetric.hpp"
#include "srslab/groups/thompson.hpp"
#include "srslab/hashing.hpp"
#include "srslab/measure_builder.hpp"
#include "srslab/oracles.hpp"
#include "srslab/records.hpp"
#include "srslab/walks.hpp"

#ifndef SRSLAB_VERSION
#define SRSLAB_VERSION "dev"
#endif

namespace srs {

using json = nlohmann::ordered_json;

inline constexpr const char* code_version = SRSLAB_VERSION;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Independent seed streams of one run. Trajectory i of the main stream uses
/// derive_seed(seed, i); auxiliary stream s uses derive_seed(substream(seed, s), i).
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t s) {
  return derive_seed(seed, 0x8000000000000000ULL | s);
}

// ---------------------------------------------------------------------------
// Configuration.

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> k{"records",     "wreath-srs", "permwreath-srs",
                                          "thompson-mu", "bs-tree",    "martingale"};
  return k;
}

namespace detail {

/// Counts and sizes are stored unsigned so that negative overrides are type
/// errors. The BS parameters keep their sign.
inline void unsigned_counts(json& j) {
  for (auto& [k, v] : j.items()) {
    if (v.is_structured()) {
      unsigned_counts(v);
    } else if (v.is_number_integer() && !v.is_number_unsigned() && k != "m" && k != "n" && v.get<std::int64_t>() >= 0) {
      v = v.get<std::uint64_t>();
    }
  }
}

}  // namespace detail

/// Full configuration with every key present. Defaults are the acceptance
/// settings.
inline json default_config(const std::string& kind) {
  json c;
  c["experiment"] = kind;
  c["seed"] = 1;
  if (kind == "records") {
    c["trials"] = 500;
    c["horizon"] = 10000;
    c["p"] = {{"kind", "telescoping"}};
    c["contrast_p"] = {{"kind", "geometric"}, {"ratio", "1/2"}};
    c["criterion_terms"] = 1000;
  } else if (kind == "thompson-mu" || kind == "permwreath-srs") {
    const bool thompson = kind == "thompson-mu";
    c["trials"] = thompson ? 200 : 20;
    c["horizon"] = thompson ? 10000 : 2000;
    c["p"] = {{"kind", "telescoping"}};
    if (!thompson) c["group"] = {{"lamp", "S3"}, {"a", "(12)"}, {"dim", 3}, {"sheets", 2}};
    BuilderConfig b;
    b.i_max = thompson ? 1024 : 24;
    if (!thompson) {
      b.delta_cap = 2000;
      b.q_conjugate_cap = 64;
    }
    c["builder"] = {{"i_max", b.i_max},
                    {"delta_cap", b.delta_cap},
                    {"materialize_levels", b.materialize_levels},
                    {"q_conjugate_cap", b.q_conjugate_cap},
                    {"q_block", b.q_block},
                    {"verify_delta", b.verify_delta},
                    {"verify_budget", b.verify_budget},
                    {"search_budget", b.search_budget}};
    c["windows"] = {{"stabilize_fraction", 0.8}};
  } else if (kind == "wreath-srs") {
    c["trials"] = 200;
    c["horizon"] = 10000;
    c["group"] = {{"lamp", "S3"}, {"a", "(12)"}, {"dim", 3}, {"control_lamp", "Z2"}, {"control_a", "1"}};
    c["windows"] = {{"guard", 0.2},
                    {"certify_radius", 2},
                    {"fingerprint_radius", 1},
                    {"equivariance_pairs", 100},
                    {"equivariance_radius", 1},
                    {"g_length", 6}};
  } else if (kind == "martingale") {
    c["trials"] = 100;
    c["horizon"] = 10000;
    c["group"] = {{"lamp", "S3"}, {"a", "(12)"}, {"dim", 3}};
    c["windows"] = {{"guard", 0.2}};
    c["martingale"] = {{"samples", 500},
                       {"checkpoints", {1000, 2500, 5000, 10000}},
                       {"tolerance", 0.05},
                       {"normalish_subgroups", 10},
                       {"normalish_radius", 5}};
  } else if (kind == "bs-tree") {
    c["trials"] = 0;
    c["horizon"] = 0;
    c["cases"] = json::array(
        {json{{"m", 2}, {"n", 4}, {"radius", 5}, {"elements", {"a2"}}, {"negative_subtree", true},
              {"index_elements", json::array()}, {"index_bound", 64}, {"export_radius", 2}},
         json{{"m", 2}, {"n", 3}, {"radius", 6}, {"elements", {"a2", "a4", "a6"}}, {"negative_subtree", false},
              {"index_elements", {"t", "t2"}}, {"index_bound", 64}, {"export_radius", 2}}});
  } else {
    throw ConfigError("unknown experiment '" + kind + "'");
  }
  detail::unsigned_counts(c);
  return c;
}

inline TailDistribution parse_tail(const json& j) {
  try {
    if (!j.is_object() || !j.contains("kind")) throw ConfigError("p needs a \"kind\"");
    auto kind = j.at("kind").get<std::string>();
    auto only = [&](std::initializer_list<const char*> keys) {
      for (const auto& [k, v] : j.items()) {
        bool ok = k == "kind";
        for (auto key : keys) ok = ok || k == key;
        if (!ok) throw ConfigError("unknown key p." + k);
      }
    };
    if (kind == "telescoping") {
      only({});
      return TailDistribution::telescoping();
    }
    if (kind == "zeta") {
      only({"s"});
      return TailDistribution::zeta(j.at("s").get<double>());
    }
    if (kind == "geometric") {
      only({"ratio"});
      mpq_class r(j.at("ratio").get<std::string>());
      r.canonicalize();
      return TailDistribution::geometric(r);
    }
    if (kind == "finite") {
      only({"masses"});
      std::vector<mpq_class> m;
      for (const auto& x : j.at("masses")) {
        mpq_class q(x.get<std::string>());
        q.canonicalize();
        m.push_back(q);
      }
      return TailDistribution::explicit_finite(std::move(m));
    }
    throw ConfigError("unknown p kind '" + kind + "'");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid p: ") + e.what());
  }
}

namespace detail {

inline bool same_type(const json& want, const json& got) {
  if (want.is_number_float()) return got.is_number();
  if (want.is_number_unsigned()) return got.is_number_unsigned() || (got.is_number_integer() && got.get<std::int64_t>() >= 0);
  if (want.is_number_integer()) return got.is_number_integer();
  return want.type() == got.type();
}

/// Overlays `user` onto `base`, rejecting unknown keys and type changes.
/// Keys in `whole` are replaced without recursion.
inline void overlay(json& base, const json& user, const std::string& path) {
  static const std::vector<std::string> whole{"p", "contrast_p", "cases", "checkpoints"};
  for (const auto& [k, v] : user.items()) {
    std::string at = path.empty() ? k : path + "." + k;
    if (!base.contains(k)) throw ConfigError("unknown key " + at);
    bool replace = std::find(whole.begin(), whole.end(), k) != whole.end();
    if (replace) {
      if (!(v.is_object() || v.is_array() || v.is_null())) throw ConfigError("wrong type for " + at);
      base[k] = v;
    } else if (base[k].is_object()) {
      if (!v.is_object()) throw ConfigError("wrong type for " + at);
      overlay(base[k], v, at);
    } else {
      if (!same_type(base[k], v)) throw ConfigError("wrong type for " + at);
      base[k] = v;
    }
  }
}

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace detail

/// Merged and validated configuration. `kind` may be empty when the config
/// names its experiment.
inline void validate_groups(const json& c);

inline json resolve_config(const json& user, std::string kind = "") {
  if (!user.is_object()) throw ConfigError("config must be a JSON object");
  if (user.contains("experiment")) {
    if (!user["experiment"].is_string()) throw ConfigError("wrong type for experiment");
    auto named = user["experiment"].get<std::string>();
    if (!kind.empty() && named != kind) throw ConfigError("config is for '" + named + "', not '" + kind + "'");
    kind = named;
  }
  if (kind.empty()) throw ConfigError("no experiment given");
  json c = default_config(kind);
  detail::overlay(c, user, "");
  using detail::require;
  if (c.contains("p")) parse_tail(c["p"]);
  if (c.contains("contrast_p") && !c["contrast_p"].is_null()) parse_tail(c["contrast_p"]);
  if (c.contains("builder")) {
    require(c["builder"]["i_max"].get<std::uint64_t>() >= 1, "builder.i_max must be positive");
    require(c["builder"]["verify_delta"].get<std::uint64_t>() >= 1, "builder.verify_delta must be positive");
  }
  if (c.contains("windows")) {
    const auto& w = c["windows"];
    if (w.contains("guard")) {
      double g = w["guard"].get<double>();
      require(g >= 0 && g < 1, "windows.guard must lie in [0,1)");
    }
    if (w.contains("stabilize_fraction")) {
      double f = w["stabilize_fraction"].get<double>();
      require(f > 0 && f <= 1, "windows.stabilize_fraction must lie in (0,1]");
    }
    for (const char* k : {"certify_radius", "fingerprint_radius", "equivariance_radius"}) {
      if (w.contains(k)) require(w[k].get<std::int64_t>() >= 0, std::string("windows.") + k + " must be >= 0");
    }
  }
  if (c.contains("group")) {
    const auto& g = c["group"];
    if (g.contains("dim")) require(g["dim"].get<std::int64_t>() >= 1, "group.dim must be positive");
    if (g.contains("sheets")) require(g["sheets"].get<std::int64_t>() >= 1, "group.sheets must be positive");
  }
  if (c.contains("martingale")) {
    const auto& m = c["martingale"];
    require(m["checkpoints"].is_array(), "martingale.checkpoints must be a list");
    for (const auto& x : m["checkpoints"]) {
      require(x.is_number_unsigned() || (x.is_number_integer() && x.get<std::int64_t>() >= 0),
              "martingale.checkpoints must be step counts");
      require(x.get<std::size_t>() <= c["horizon"].get<std::size_t>(), "martingale checkpoint beyond the horizon");
    }
  }
  if (c.contains("cases")) {
    require(c["cases"].is_array(), "cases must be a list");
    for (const auto& k : c["cases"]) {
      json base = default_config("bs-tree")["cases"][0];
      json merged = base;
      detail::overlay(merged, k, "cases[]");
      require(std::llabs(merged["m"].get<std::int64_t>()) >= 2 && std::llabs(merged["n"].get<std::int64_t>()) >= 2,
              "cases[]: |m|, |n| must be at least 2");
    }
  }
  validate_groups(c);
  return c;
}

inline json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Outputs.

/// JSON-lines events {seed, step, event_kind, payload}.
class EventLog {
 public:
  void add(std::uint64_t seed, std::size_t step, const std::string& kind, json payload) {
    json e;
    e["seed"] = seed;
    e["step"] = step;
    e["event_kind"] = kind;
    e["payload"] = std::move(payload);
    text_ += e.dump();
    text_ += '\n';
  }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : width_(header.size()) { row(std::move(header)); }
  void row(std::vector<std::string> cells) {
    if (cells.size() != width_) throw std::logic_error("csv row width");
    for (std::size_t i = 0; i < cells.size(); ++i) text_ += (i ? "," : "") + cells[i];
    text_ += '\n';
  }
  const std::string& text() const { return text_; }

 private:
  std::size_t width_;
  std::string text_;
};

inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}
template <class T>
std::string num(T x) requires std::is_integral_v<T> {
  return std::to_string(x);
}

struct RunResult {
  json config;
  std::string events;
  std::string summary;
  /// Further artifacts by file name.
  std::map<std::string, std::string> files;
  json metrics = json::object();
  std::vector<ArtifactCheck> checks;
  std::vector<std::string> warnings;

  void check(std::string name, bool ok, std::string detail = "") {
    checks.push_back({std::move(name), ok, std::move(detail)});
  }

  json manifest() const {
    json m;
    m["format"] = "srslab.run/1";
    m["experiment"] = config["experiment"];
    m["code_version"] = code_version;
    m["config"] = config;
    m["config_hash"] = hex64(fnv1a64(config.dump()));
    json a;
    a["events.jsonl"] = hex64(fnv1a64(events));
    a["summary.csv"] = hex64(fnv1a64(summary));
    for (const auto& [name, text] : files) a[name] = hex64(fnv1a64(text));
    m["artifacts"] = std::move(a);
    m["metrics"] = metrics;
    auto cs = json::array();
    for (const auto& c : checks) cs.push_back({{"name", c.name}, {"ok", c.ok}, {"detail", c.detail}});
    m["checks"] = std::move(cs);
    m["warnings"] = warnings;
    m["manifest_hash"] = hex64(fnv1a64(m.dump()));
    return m;
  }
};

inline std::string manifest_hash(json m) {
  m.erase("manifest_hash");
  return hex64(fnv1a64(m.dump()));
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("missing artifact " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_run(const RunResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "events.jsonl", r.events);
  write_text(dir / "summary.csv", r.summary);
  for (const auto& [name, text] : r.files) write_text(dir / name, text);
  write_text(dir / "manifest.json", r.manifest().dump(1) + "\n");
}

// ---------------------------------------------------------------------------
// Group parameters.

inline SymmetricGroup symmetric_from(const std::string& name) {
  if (name.size() < 2 || name[0] != 'S') throw ConfigError("not a symmetric group: " + name);
  return SymmetricGroup(static_cast<int>(detail::parse_int64(name.substr(1))));
}

inline CyclicGroup cyclic_from(const std::string& name) {
  if (name.size() < 2 || name[0] != 'Z') throw ConfigError("not a cyclic group: " + name);
  return CyclicGroup(detail::parse_int64(name.substr(1)));
}

inline std::vector<Perm> lamp_values(const SymmetricGroup& s) { return s.elements(); }
inline std::vector<std::int64_t> lamp_values(const CyclicGroup& c) {
  std::vector<std::int64_t> v;
  for (std::int64_t i = 0; i < c.order(); ++i) v.push_back(i);
  return v;
}

template <Group A>
element_t<A> parse_lamp(const A& group, const std::string& text) {
  try {
    auto a = group.parse(text);
    if (a == group.identity()) throw ConfigError("lamp element a must be non-trivial");
    return a;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("invalid lamp element '" + text + "': " + e.what());
  }
}

template <Group A>
LampExperiment<A> lamp_experiment(const A& lamps, const std::string& a, const json& c) {
  LampExperiment<A> ex;
  ex.group = std::make_shared<const LampWreath<A>>(lamps, LatticeGroup(c["group"]["dim"].get<std::size_t>()));
  ex.a = parse_lamp(lamps, a);
  ex.lamp_values = lamp_values(lamps);
  ex.horizon = c["horizon"].get<std::size_t>();
  ex.guard = c["windows"]["guard"].get<double>();
  ex.base_seed = c["seed"].get<std::uint64_t>();
  if (c["windows"].contains("certify_radius")) {
    ex.certify_radius = c["windows"]["certify_radius"].get<std::int64_t>();
    ex.fingerprint_radius = c["windows"]["fingerprint_radius"].get<std::int64_t>();
  }
  return ex;
}

/// Dispatches on the lamp group name: "S<k>" or "Z<q>".
template <class F>
auto with_lamp_group(const std::string& name, F&& f) {
  if (!name.empty() && name[0] == 'S') return f(symmetric_from(name));
  if (!name.empty() && name[0] == 'Z') return f(cyclic_from(name));
  throw ConfigError("unknown lamp group '" + name + "'");
}

inline std::uint64_t lamp_order(const SymmetricGroup& s) {
  std::uint64_t n = 1;
  for (int k = 2; k <= s.degree() && n <= 720; ++k) n *= static_cast<std::uint64_t>(k);
  return n;
}
inline std::uint64_t lamp_order(const CyclicGroup& c) { return static_cast<std::uint64_t>(c.order()); }

/// Lamp groups and elements parse, and are small enough to enumerate per site.
inline void validate_groups(const json& c) {
  if (!c.contains("group")) return;
  const auto& g = c["group"];
  auto check = [](const std::string& name, const std::string& a) {
    try {
      with_lamp_group(name, [&](const auto& lamps) {
        if (lamp_order(lamps) > 720) throw ConfigError("lamp group " + name + " has more than 720 elements");
        parse_lamp(lamps, a);
        return 0;
      });
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError("invalid lamp group '" + name + "': " + e.what());
    }
  };
  if (c["experiment"] == "permwreath-srs" && g["lamp"].get<std::string>().rfind('S', 0) != 0) {
    throw ConfigError("permwreath-srs needs a symmetric lamp group");
  }
  check(g["lamp"].get<std::string>(), g["a"].get<std::string>());
  if (g.contains("control_lamp") && !g["control_lamp"].get<std::string>().empty()) {
    check(g["control_lamp"].get<std::string>(), g["control_a"].get<std::string>());
  }
}

// ---------------------------------------------------------------------------
// records

inline json record_stats_json(const SimplicityStats& s, double gauge, const CriterionVerdict& v,
                              const TailDistribution& p) {
  json j;
  j["p"] = p.label();
  j["criterion"] = to_string(v.kind);
  j["partial_sum"] = static_cast<double>(v.partial_sum);
  j["fraction_simple_at_horizon"] = s.fraction_simple_at_horizon;
  j["fraction_nonsimple_steps"] = s.fraction_nonsimple_steps;
  j["mean_last_violation"] = s.mean_last_violation_index;
  j["gauge_validation"] = gauge;
  return j;
}

inline RunResult run_records(const json& c) {
  RunResult r;
  r.config = c;
  EventLog ev;
  CsvTable csv({"role", "p", "trials", "horizon", "criterion", "partial_sum", "fraction_simple_at_horizon",
                "fraction_nonsimple_steps", "mean_last_violation", "gauge_validation"});
  const auto seed = c["seed"].get<std::uint64_t>();
  const auto trials = c["trials"].get<std::size_t>();
  const auto horizon = c["horizon"].get<std::size_t>();
  auto one = [&](const std::string& role, const TailDistribution& p) {
    Gauge phi(p);
    std::vector<RecordRun> runs;
    std::size_t good = 0;
    for (std::size_t i = 0; i < trials; ++i) {
      auto run = record_run(p, phi, horizon, derive_seed(seed, i));
      ev.add(run.seed, horizon, "trajectory",
             {{"role", role},
              {"index", i},
              {"simple_at_horizon", run.simple_at_horizon},
              {"nonsimple_steps", run.nonsimple_steps},
              {"last_violation", run.last_violation},
              {"records", run.records},
              {"max", run.max},
              {"gauge_ok", run.gauge_ok}});
      good += run.gauge_ok;
      runs.push_back(run);
    }
    auto s = simplicity_stats(runs, horizon);
    double gauge = trials && horizon ? static_cast<double>(good) / static_cast<double>(trials) : 1.0;
    auto v = simple_records_criterion(p, c["criterion_terms"].get<std::uint64_t>());
    r.metrics[role] = record_stats_json(s, gauge, v, p);
    if (trials) {
      csv.row({role, p.label(), num(trials), num(horizon), to_string(v.kind), num(static_cast<double>(v.partial_sum)),
               num(s.fraction_simple_at_horizon), num(s.fraction_nonsimple_steps), num(s.mean_last_violation_index),
               num(gauge)});
    }
  };
  one("main", parse_tail(c["p"]));
  if (!c["contrast_p"].is_null()) one("contrast", parse_tail(c["contrast_p"]));
  r.events = ev.text();
  r.summary = csv.text();
  return r;
}

// ---------------------------------------------------------------------------
// Built measures: thompson-mu and permwreath-srs

inline BuilderConfig builder_config(const json& b) {
  BuilderConfig x;
  x.i_max = b["i_max"].get<std::uint64_t>();
  x.delta_cap = b["delta_cap"].get<std::size_t>();
  x.materialize_levels = b["materialize_levels"].get<std::size_t>();
  x.q_conjugate_cap = b["q_conjugate_cap"].get<std::size_t>();
  x.q_block = b["q_block"].get<std::size_t>();
  x.verify_delta = b["verify_delta"].get<std::size_t>();
  x.verify_budget = b["verify_budget"].get<std::size_t>();
  x.search_budget = b["search_budget"].get<std::size_t>();
  return x;
}

/// Exact invariants of the assembled masses, recomputed in memory.
template <Group G>
void measure_checks(RunResult& r, const G& grp, const BuiltMeasure<G>& m) {
  std::string bad_tile;
  for (std::size_t i = 0; i < m.tiles.size() && bad_tile.empty(); ++i) {
    if (m.tile_total(i) != m.tiles[i].p) bad_tile = std::to_string(i);
  }
  r.check("tile_sums", bad_tile.empty(), bad_tile.empty() ? "" : "tile " + bad_tile);
  auto masses = m.masses();
  std::string asym;
  std::size_t checked = 0;
  for (const auto& [g, q] : masses) {
    auto it = masses.find(grp.inv(g));
    ++checked;
    if (it == masses.end() || it->second != q) {
      asym = grp.format(g);
      break;
    }
  }
  r.check("symmetry", asym.empty(), asym);
  auto e = entropy_bound_check(m);
  r.check("entropy_bound", e.holds && e.slack() >= 0, "slack " + num(static_cast<double>(e.slack())));
  r.metrics["measure"] = {{"i_max", m.i_max},
                          {"support", masses.size()},
                          {"symmetric_pairs_checked", checked},
                          {"residual", rational_str(m.residual)},
                          {"entropy", static_cast<double>(e.h_mu)},
                          {"entropy_bound", static_cast<double>(e.bound)},
                          {"entropy_slack", static_cast<double>(e.slack())}};
}

template <Group G>
RunResult run_built_measure(const json& c, MeasureBuilder<G>& b) {
  RunResult r;
  r.config = c;
  const G& grp = b.subgroup().group();
  b.build();
  auto m = b.assemble();
  auto art = measure_artifact(b, m);
  art["content_hash"] = artifact_hash(art);
  r.files["measure.json"] = art.dump(1) + "\n";
  measure_checks(r, grp, m);

  std::size_t delta_capped = 0, q_capped = 0, sampled = 0;
  for (const auto& lv : b.levels()) {
    delta_capped += lv.delta_capped;
    q_capped += lv.q_capped;
    sampled += lv.verification == "sampled";
  }
  if (delta_capped) r.warnings.push_back("delta cap saturated at " + std::to_string(delta_capped) + " levels");
  if (q_capped) r.warnings.push_back("Q conjugate cap saturated at " + std::to_string(q_capped) + " levels");
  if (sampled) r.warnings.push_back("witness verification sampled at " + std::to_string(sampled) + " levels");
  r.metrics["builder"] = {{"artifact_hash", art["content_hash"]},
                          {"levels", b.levels().size()},
                          {"delta_capped_levels", delta_capped},
                          {"q_capped_levels", q_capped},
                          {"sampled_levels", sampled}};

  EventLog ev;
  CsvTable csv({"index", "seed", "abc", "t_k0", "records", "stabilized", "nontrivial", "stabilization_step",
                "truncations", "recomputations", "fingerprint", "residual", "delta_capped_levels",
                "q_capped_levels"});
  const auto seed = c["seed"].get<std::uint64_t>();
  const auto trials = c["trials"].get<std::size_t>();
  const auto horizon = c["horizon"].get<std::size_t>();
  const double frac = c["windows"]["stabilize_fraction"].get<double>();
  std::vector<SrsTrajectory> runs;
  for (std::size_t i = 0; i < trials; ++i) {
    auto t = srs_trajectory(b, m, horizon, i, seed, frac);
    std::size_t stab = 0;
    auto traces = json::array();
    for (const auto& tr : t.traces) {
      stab = std::max(stab, tr.stabilization_index());
      traces.push_back({{"window", tr.label},
                        {"changes", tr.changes.size()},
                        {"stabilization_index", tr.stabilization_index()},
                        {"final_mask", tr.final_mask()}});
    }
    auto tk0 = t.abc.t_k0();
    json payload{{"index", i},
                 {"abc", t.abc.k0.has_value()},
                 {"t_k0", tk0 ? json(*tk0) : json(nullptr)},
                 {"records", t.abc.records.size()},
                 {"stabilized", t.stabilized},
                 {"nontrivial", t.nontrivial},
                 {"truncations", t.truncations},
                 {"recomputations", t.recomputations},
                 {"fingerprint", hex64(t.fingerprint)},
                 {"traces", std::move(traces)}};
    ev.add(t.seed, horizon, "trajectory", std::move(payload));
    csv.row({num(i), num(t.seed), t.abc.k0 ? "1" : "0", tk0 ? num(*tk0) : "", num(t.abc.records.size()),
             t.stabilized ? "1" : "0", t.nontrivial ? "1" : "0", num(stab), num(t.truncations),
             num(t.recomputations), hex64(t.fingerprint), rational_str(m.residual), num(delta_capped),
             num(q_capped)});
    runs.push_back(std::move(t));
  }
  auto s = summarize(runs);
  if (s.truncations) {
    r.warnings.push_back(std::to_string(s.truncations) + " tile indices beyond i_max redrawn (residual mass " +
                         rational_str(m.residual) + ")");
  }
  r.metrics["trajectories"] = {{"seeds", s.seeds},
                               {"abc", s.abc},
                               {"stabilized", s.stabilized},
                               {"nontrivial_stabilized", s.nontrivial_stabilized},
                               {"truncations", s.truncations}};
  r.events = ev.text();
  r.summary = csv.text();
  return r;
}

inline RunResult run_thompson_mu(const json& c) {
  auto F = std::make_shared<const ThompsonGroup>();
  auto f = ThompsonGroup::default_f();
  MeasureBuilder<ThompsonGroup> b(thompson_h(F, f), f, parse_tail(c["p"]), builder_config(c["builder"]),
                                  thompson_analytic_witness);
  return run_built_measure(c, b);
}

using PermWreath = WreathProduct<SymmetricGroup, LatticeGroup, SheetAction>;

inline std::shared_ptr<const PermWreath> perm_wreath_from(const json& g) {
  return std::make_shared<const PermWreath>(symmetric_from(g["lamp"].get<std::string>()),
                                            LatticeGroup(g["dim"].get<std::size_t>()),
                                            SheetAction{g["sheets"].get<int>()});
}

inline RunResult run_permwreath(const json& c) {
  auto g = perm_wreath_from(c["group"]);
  auto a = parse_lamp(g->lamp_group(), c["group"]["a"].get<std::string>());
  const auto budget = c["builder"]["search_budget"].get<std::size_t>();
  MeasureBuilder<PermWreath> b(perm_wreath_sum(g, a), g->lamp(g->basepoint(), a), parse_tail(c["p"]),
                               builder_config(c["builder"]),
                               [g, budget](const WitnessQuery<PermWreath>& q) {
                                 return permwreath_footprint_witness(*g, q, budget);
                               });
  return run_built_measure(c, b);
}

// ---------------------------------------------------------------------------
// wreath-srs

/// Certified flag and value of a record at each site, keyed by the formatted
/// site.
template <class Base, class A, class Point>
json record_sites(const Base& base, const A& lamps, const LampRecord<Point, element_t<A>>& rec,
                  const std::vector<Point>& sites) {
  json j = json::object();
  for (const auto& s : sites) {
    auto it = rec.final_values.find(s);
    j[base.format(s)] = {rec.certified(s), lamps.format(it == rec.final_values.end() ? lamps.identity() : it->second)};
  }
  return j;
}

/// Inverse of record_sites: a record whose listed sites have the logged
/// state (certified sites changed at step 0, others at the horizon).
template <class Base, class A>
LampRecord<element_t<Base>, element_t<A>> record_from_sites(const Base& base, const A& lamps, const json& j,
                                                            std::size_t horizon, double guard) {
  LampRecord<element_t<Base>, element_t<A>> rec;
  rec.horizon = horizon;
  rec.guard = guard;
  for (const auto& [k, v] : j.items()) {
    auto site = base.parse(k);
    rec.last_change[site] = v.at(0).template get<bool>() ? 0 : horizon;
    auto val = lamps.parse(v.at(1).template get<std::string>());
    if (!(val == lamps.identity())) rec.final_values[site] = val;
  }
  return rec;
}

template <Group A>
json census_json(const FingerprintCensus& c) {
  json counts = json::object();
  for (const auto& [mask, n] : c.counts) counts[mask] = n;
  return {{"trials", c.trials}, {"excluded", c.excluded}, {"distinct", c.distinct()}, {"counts", counts}};
}

template <Group A>
void lamp_census(RunResult& r, EventLog& ev, CsvTable& csv, const LampExperiment<A>& ex, std::size_t trials,
                 const std::string& role) {
  std::vector<LampTrial> out;
  auto census = fingerprint_census(ex, trials, &out);
  std::size_t certified = 0, sites = 0;
  for (const auto& t : out) {
    certified += t.certified;
    sites += t.window_size;
    ev.add(t.seed, ex.horizon, "trial",
           {{"role", role},
            {"index", t.index},
            {"certified", t.certified},
            {"window", t.window_size},
            {"fingerprint", t.fingerprint ? json(t.fingerprint->mask) : json(nullptr)}});
    csv.row({role, ex.group->name(), num(t.index), num(t.seed), num(t.certified), num(t.window_size),
             t.fingerprint ? t.fingerprint->mask : "", t.fingerprint ? "0" : "1"});
  }
  json j = census_json<A>(census);
  j["group"] = ex.group->name();
  j["certified_sites"] = certified;
  j["window_sites"] = sites;
  j["certification"] = sites ? static_cast<double>(certified) / static_cast<double>(sites) : 1.0;
  r.metrics[role] = std::move(j);
  if (census.excluded) {
    r.warnings.push_back(role + ": " + std::to_string(census.excluded) +
                         " trials left out of the census (probe sites uncertified)");
  }
}

template <Group A>
void equivariance_pairs(RunResult& r, EventLog& ev, const LampExperiment<A>& ex, const json& c) {
  const auto& w = c["windows"];
  // Capped by trials, so that an empty run walks nothing.
  const auto pairs = std::min(w["equivariance_pairs"].get<std::size_t>(), c["trials"].get<std::size_t>());
  const auto len = w["g_length"].get<std::size_t>();
  const auto seed = c["seed"].get<std::uint64_t>();
  auto g = ex.group;
  auto moves = wreath_moves(*g);
  auto window = lattice_box(g->base_group(), w["equivariance_radius"].get<std::int64_t>());
  std::size_t yes = 0, no = 0, undetermined = 0, compared = 0;
  for (std::size_t j = 0; j < pairs; ++j) {
    std::uint64_t walk_seed = derive_seed(substream(seed, 1), j);
    auto traj = run_walk(*g, ex.sampler(), ex.horizon, walk_seed, false);
    Rng rng(derive_seed(substream(seed, 2), j));
    auto x = g->identity();
    for (std::size_t k = 0; k < len; ++k) x = g->mul(x, moves[rng.below(moves.size())]);
    auto rec_w = lamp_limit(*g, traj, {}, ex.guard);
    auto rec_gw = lamp_limit(*g, traj, {}, ex.guard, x);
    auto res = equivariance_from_records(g, rec_w, rec_gw, x, window, ex.lamp_values, ex.a);
    yes += res.verdict == Membership::yes;
    no += res.verdict == Membership::no;
    undetermined += res.verdict == Membership::undetermined;
    compared += res.compared;
    ev.add(walk_seed, ex.horizon, "equivariance",
           {{"index", j},
            {"g", g->format(x)},
            {"compared", res.compared},
            {"undetermined", res.undetermined},
            {"verdict", std::string(1, to_char(res.verdict))},
            {"mismatch", res.first_mismatch},
            {"gw_sites", record_sites(g->base_group(), g->lamp_group(), rec_gw, window)},
            {"w_sites", record_sites(g->base_group(), g->lamp_group(), rec_w,
                                     conjugated_sites(*g, x, window, ex.a))}});
  }
  r.metrics["equivariance"] = {{"pairs", pairs}, {"yes", yes}, {"undetermined", undetermined}, {"no", no},
                               {"compared", compared}};
  r.check("equivariance", no == 0, no ? std::to_string(no) + " pairs disagree" : "");
}

inline RunResult run_wreath_srs(const json& c) {
  RunResult r;
  r.config = c;
  EventLog ev;
  CsvTable csv({"role", "group", "index", "seed", "certified", "window", "fingerprint", "excluded"});
  const auto trials = c["trials"].get<std::size_t>();
  const auto& g = c["group"];
  with_lamp_group(g["lamp"].get<std::string>(), [&](const auto& lamps) {
    auto ex = lamp_experiment(lamps, g["a"].get<std::string>(), c);
    lamp_census(r, ev, csv, ex, trials, "main");
    equivariance_pairs(r, ev, ex, c);
    return 0;
  });
  if (!g["control_lamp"].get<std::string>().empty()) {
    with_lamp_group(g["control_lamp"].get<std::string>(), [&](const auto& lamps) {
      auto ex = lamp_experiment(lamps, g["control_a"].get<std::string>(), c);
      lamp_census(r, ev, csv, ex, trials, "control");
      return 0;
    });
  }
  r.events = ev.text();
  r.summary = csv.text();
  return r;
}

// ---------------------------------------------------------------------------
// martingale

template <Group A>
void martingale_run(RunResult& r, EventLog& ev, CsvTable& csv, const LampExperiment<A>& ex, const json& c) {
  const auto& mc = c["martingale"];
  const auto samples = mc["samples"].get<std::size_t>();
  const auto trials = c["trials"].get<std::size_t>();
  const double tol = mc["tolerance"].get<double>();
  const auto seed = c["seed"].get<std::uint64_t>();
  std::vector<std::size_t> checkpoints;
  for (const auto& x : mc["checkpoints"]) checkpoints.push_back(x.get<std::size_t>());
  auto g = ex.group;

  // One pool of eta samples, shared by every trajectory.
  std::vector<SubgroupOracle<LampWreath<A>>> pool;
  if (trials) {
    for (std::size_t k = 0; k < samples; ++k) pool.push_back(ex.subgroup(ex.record(derive_seed(substream(seed, 3), k))));
  }
  std::function<const SubgroupOracle<LampWreath<A>>&(std::size_t)> eta =
      [&pool](std::size_t k) -> const SubgroupOracle<LampWreath<A>>& { return pool[k]; };
  auto h = g->lamp(g->basepoint(), ex.a);
  std::size_t within = 0, undetermined = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    std::uint64_t s = derive_seed(seed, i);
    auto traj = run_walk(*g, ex.sampler(), ex.horizon, s, false);
    auto pts = martingale_mass(*g, traj, h, eta, samples, checkpoints);
    double gap = terminal_gap(pts);
    within += gap <= tol;
    auto arr = json::array();
    for (const auto& p : pts) {
      arr.push_back({p.step, p.estimate, p.used, p.undetermined});
      undetermined += p.undetermined;
    }
    ev.add(s, ex.horizon, "martingale", {{"index", i}, {"points", arr}, {"gap", gap}});
    csv.row({"trajectory", num(i), num(s), pts.empty() ? "" : num(pts.back().estimate), num(gap),
             gap <= tol ? "1" : "0", num(samples), ""});
  }
  if (undetermined) r.warnings.push_back(std::to_string(undetermined) + " undetermined eta answers left out");
  r.metrics["martingale"] = {{"trials", trials},
                             {"samples", samples},
                             {"within_tolerance", within},
                             {"fraction_within", trials ? static_cast<double>(within) / static_cast<double>(trials) : 1.0},
                             {"undetermined", undetermined}};

  auto z = wreath_moves(*g);
  z.push_back(g->identity());
  const auto nsub = std::min(mc["normalish_subgroups"].get<std::size_t>(), pool.size());
  const auto rmax = mc["normalish_radius"].get<std::int64_t>();
  bool monotone = true, lower = true;
  for (std::size_t k = 0; k < nsub; ++k) {
    auto prof = normalish_profile(pool[k], z, ex.lamp_values, rmax);
    std::string cells;
    for (std::size_t i = 0; i < prof.size(); ++i) {
      if (i && prof[i] < prof[i - 1]) monotone = false;
      if (prof[i] < i + 1) lower = false;
      cells += (i ? " " : "") + std::to_string(prof[i]);
    }
    ev.add(derive_seed(substream(seed, 3), k), ex.horizon, "normalish", {{"subgroup", k}, {"profile", prof}});
    csv.row({"normalish", num(k), num(derive_seed(substream(seed, 3), k)), "", "", "", "", cells});
  }
  r.metrics["normalish"] = {{"subgroups", nsub}, {"radius", rmax}, {"monotone", monotone}, {"at_least_radius", lower}};
}

inline RunResult run_martingale(const json& c) {
  RunResult r;
  r.config = c;
  EventLog ev;
  CsvTable csv({"kind", "index", "seed", "terminal_estimate", "gap", "within", "samples", "profile"});
  const auto& g = c["group"];
  with_lamp_group(g["lamp"].get<std::string>(), [&](const auto& lamps) {
    auto ex = lamp_experiment(lamps, g["a"].get<std::string>(), c);
    martingale_run(r, ev, csv, ex, c);
    return 0;
  });
  r.events = ev.text();
  r.summary = csv.text();
  return r;
}

// ---------------------------------------------------------------------------
// bs-tree

inline json bs_case(RunResult& r, EventLog& ev, CsvTable& csv, const json& k, std::uint64_t seed) {
  const auto m = k["m"].get<std::int64_t>(), n = k["n"].get<std::int64_t>();
  const auto radius = k["radius"].get<std::size_t>();
  BassSerreTree t(BaumslagSolitarGroup(m, n));
  const auto& g = t.group();
  const std::string tag = "BS(" + std::to_string(m) + "," + std::to_string(n) + ")";
  json out;
  out["group"] = tag;
  auto elements = json::array();
  for (const auto& e : k["elements"]) {
    auto x = g.parse(e.get<std::string>());
    auto fixed = t.fixed_subtree(x, radius);
    json j{{"element", g.format(x)}};
    std::string kind = fixed.loxodromic ? "loxodromic" : fixed.unknown ? "unknown" : "elliptic";
    j["kind"] = kind;
    auto verts = json::array();
    std::int64_t lo = 0, hi = 0;
    bool first = true;
    for (const auto& v : fixed.vertices) {
      std::int64_t h = t.height(v);
      lo = first ? h : std::min(lo, h);
      hi = first ? h : std::max(hi, h);
      first = false;
      verts.push_back({g.format(v), h, x == g.identity() ? 0 : t.zeta(x, v)});
    }
    j["fixed_vertices"] = fixed.vertices.size();
    j["height_range"] = {lo, hi};
    bool rel = kind == "elliptic" && t.zeta_relation_check(x, radius);
    j["zeta_relation"] = rel;
    r.check(tag + " zeta relation for " + g.format(x), rel);
    std::optional<std::pair<std::int64_t, std::int64_t>> bounds;
    if (!fixed.vertices.empty() && !(x == g.identity())) bounds = t.fixed_height_bounds(x, fixed.vertices.front());
    if (bounds) {
      bool ok = lo >= bounds->first && hi <= bounds->second;
      j["height_bounds"] = {bounds->first, bounds->second};
      r.check(tag + " bounded heights for " + g.format(x), ok,
              "observed [" + std::to_string(lo) + "," + std::to_string(hi) + "] bound [" +
                  std::to_string(bounds->first) + "," + std::to_string(bounds->second) + "]");
    } else {
      j["height_bounds"] = nullptr;
    }
    ev.add(seed, radius, "fixed_subtree",
           {{"m", m}, {"n", n}, {"element", g.format(x)}, {"radius", radius}, {"vertices", std::move(verts)}});
    csv.row({tag, g.format(x), num(radius), kind, num(fixed.vertices.size()), num(lo), num(hi),
             bounds ? num(bounds->first) : "", bounds ? num(bounds->second) : "", rel ? "1" : "0", ""});
    elements.push_back(std::move(j));
  }
  out["elements"] = std::move(elements);

  if (k["negative_subtree"].get<bool>() && !k["elements"].empty()) {
    auto x = g.parse(k["elements"][0].get<std::string>());
    auto rows = json::array();
    bool all_equal = true;
    std::string first_extra;
    for (std::size_t rr = 0; rr <= radius; ++rr) {
      std::set<std::string> fixed, neg;
      for (const auto& v : t.fixed_subtree(x, rr).vertices) fixed.insert(g.format(v));
      for (const auto& v : t.ball(t.root(), rr).vertices) {
        if (t.in_negative_subtree(v)) neg.insert(g.format(v));
      }
      bool contained = std::includes(fixed.begin(), fixed.end(), neg.begin(), neg.end());
      bool equal = fixed == neg;
      if (!equal && first_extra.empty()) {
        for (const auto& v : fixed) {
          if (!neg.count(v)) {
            first_extra = v;
            break;
          }
        }
      }
      all_equal = all_equal && equal;
      rows.push_back({{"radius", rr}, {"fixed", fixed.size()}, {"negative", neg.size()}, {"contained", contained},
                      {"equal", equal}});
      csv.row({tag, g.format(x), num(rr), "negative_subtree", num(fixed.size()), "", "", "", "", "",
               equal ? "1" : "0"});
    }
    out["negative_subtree"] = {{"element", g.format(x)}, {"radii", rows}, {"equal", all_equal},
                               {"first_extra", first_extra}};
    r.check(tag + " fixed set of " + g.format(x) + " equals the negative subtree", all_equal,
            all_equal ? "" : "also fixed: " + first_extra);
  }

  auto idx = json::object();
  for (const auto& e : k["index_elements"]) {
    auto x = g.parse(e.get<std::string>());
    auto w = t.intersection_index_witness(x, k["index_bound"].get<std::int64_t>());
    idx[g.format(x)] = w ? json(*w) : json(nullptr);
    csv.row({tag, g.format(x), "", "index", w ? num(*w) : "", "", "", "", "", "", ""});
  }
  out["intersection_index"] = std::move(idx);
  auto er = k["export_radius"].get<std::size_t>();
  r.files["ball_m" + std::to_string(m) + "_n" + std::to_string(n) + ".csv"] = t.ball_csv(t.ball(t.root(), er));
  return out;
}

inline RunResult run_bs_tree(const json& c) {
  RunResult r;
  r.config = c;
  EventLog ev;
  CsvTable csv({"group", "element", "radius", "kind", "count", "height_min", "height_max", "bound_min",
                "bound_max", "zeta_relation", "negative_subtree_equal"});
  auto cases = json::array();
  const json base = default_config("bs-tree")["cases"][0];
  for (const auto& k : c["cases"]) {
    json merged = base;
    detail::overlay(merged, k, "cases[]");
    cases.push_back(bs_case(r, ev, csv, merged, c["seed"].get<std::uint64_t>()));
  }
  r.metrics["cases"] = std::move(cases);
  r.events = ev.text();
  r.summary = csv.text();
  return r;
}

// ---------------------------------------------------------------------------

inline RunResult run_experiment(const json& config) {
  json c = resolve_config(config);
  const auto kind = c["experiment"].get<std::string>();
  if (kind == "records") return run_records(c);
  if (kind == "thompson-mu") return run_thompson_mu(c);
  if (kind == "permwreath-srs") return run_permwreath(c);
  if (kind == "wreath-srs") return run_wreath_srs(c);
  if (kind == "martingale") return run_martingale(c);
  return run_bs_tree(c);
}

// ---------------------------------------------------------------------------
// Verification from logged data.

inline std::vector<json> read_events(const std::string& text) {
  std::vector<json> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(json::parse(line));
  }
  return out;
}

template <Group A>
void verify_equivariance(std::vector<ArtifactCheck>& out, const A& lamps, const json& cfg,
                         const std::vector<json>& events) {
  auto g = std::make_shared<const LampWreath<A>>(lamps, LatticeGroup(cfg["group"]["dim"].get<std::size_t>()));
  auto a = lamps.parse(cfg["group"]["a"].get<std::string>());
  auto values = lamp_values(lamps);
  auto window = lattice_box(g->base_group(), cfg["windows"]["equivariance_radius"].get<std::int64_t>());
  const auto horizon = cfg["horizon"].get<std::size_t>();
  const double guard = cfg["windows"]["guard"].get<double>();
  ArtifactCheck c{"equivariance_replay", true, ""};
  std::size_t n = 0;
  for (const auto& e : events) {
    if (e["event_kind"] != "equivariance") continue;
    ++n;
    const auto& p = e["payload"];
    auto x = g->parse(p["g"].get<std::string>());
    auto rec_w = record_from_sites(g->base_group(), lamps, p["w_sites"], horizon, guard);
    auto rec_gw = record_from_sites(g->base_group(), lamps, p["gw_sites"], horizon, guard);
    auto res = equivariance_from_records(g, rec_w, rec_gw, x, window, values, a);
    std::string verdict(1, to_char(res.verdict));
    bool ok = res.verdict != Membership::no && verdict == p["verdict"].get<std::string>() &&
              res.compared == p["compared"].get<std::size_t>() &&
              res.undetermined == p["undetermined"].get<std::size_t>();
    if (!ok && c.ok) {
      c.ok = false;
      c.detail = "pair " + std::to_string(p["index"].get<std::size_t>());
    }
  }
  if (c.ok) c.detail = std::to_string(n) + " pairs";
  out.push_back(c);
}

inline void verify_zeta(std::vector<ArtifactCheck>& out, const std::vector<json>& events) {
  ArtifactCheck c{"zeta_replay", true, ""};
  std::size_t pairs = 0;
  for (const auto& e : events) {
    if (e["event_kind"] != "fixed_subtree") continue;
    const auto& p = e["payload"];
    const auto m = p["m"].get<std::int64_t>(), n = p["n"].get<std::int64_t>();
    BassSerreTree t(BaumslagSolitarGroup(m, n));
    const auto& g = t.group();
    auto x = g.parse(p["element"].get<std::string>());
    if (x == g.identity()) continue;
    std::vector<std::pair<std::int64_t, mpz_class>> hz;
    for (const auto& v : p["vertices"]) {
      auto vert = t.vertex(g.parse(v.at(0).get<std::string>()));
      std::int64_t h = v.at(1).get<std::int64_t>(), z = v.at(2).get<std::int64_t>();
      if (t.height(vert) != h || !t.fixes(x, vert) || t.zeta(x, vert) != z) {
        c.ok = false;
        c.detail = "vertex " + v.at(0).get<std::string>();
        break;
      }
      hz.emplace_back(h, mpz_class(static_cast<long>(z)));
    }
    const mpz_class mm(static_cast<long>(m)), nn(static_cast<long>(n));
    for (std::size_t i = 0; i < hz.size() && c.ok; ++i) {
      for (std::size_t j = 0; j < hz.size(); ++j) {
        std::int64_t dh = hz[j].first - hz[i].first;
        mpz_class pm, pn;
        mpz_pow_ui(pm.get_mpz_t(), mm.get_mpz_t(), static_cast<unsigned long>(std::llabs(dh)));
        mpz_pow_ui(pn.get_mpz_t(), nn.get_mpz_t(), static_cast<unsigned long>(std::llabs(dh)));
        bool ok = dh >= 0 ? hz[j].second * pn == pm * hz[i].second : hz[j].second * pm == pn * hz[i].second;
        ++pairs;
        if (!ok) {
          c.ok = false;
          c.detail = "relation fails for " + p["element"].get<std::string>();
          break;
        }
      }
    }
  }
  if (c.ok) c.detail = std::to_string(pairs) + " pairs";
  out.push_back(c);
}

inline void verify_records(std::vector<ArtifactCheck>& out, const json& metrics, const json& cfg,
                           const std::vector<json>& events) {
  ArtifactCheck c{"records_replay", true, ""};
  const auto horizon = cfg["horizon"].get<std::size_t>();
  for (const char* role : {"main", "contrast"}) {
    if (!metrics.contains(role)) continue;
    std::vector<RecordRun> runs;
    std::size_t good = 0;
    for (const auto& e : events) {
      const auto& p = e["payload"];
      if (e["event_kind"] != "trajectory" || p["role"] != role) continue;
      RecordRun r;
      r.simple_at_horizon = p["simple_at_horizon"].get<bool>();
      r.nonsimple_steps = p["nonsimple_steps"].get<std::size_t>();
      r.last_violation = p["last_violation"].get<std::size_t>();
      good += p["gauge_ok"].get<bool>();
      runs.push_back(r);
    }
    auto s = simplicity_stats(runs, horizon);
    double gauge = !runs.empty() && horizon ? static_cast<double>(good) / static_cast<double>(runs.size()) : 1.0;
    const auto& m = metrics[role];
    if (m["fraction_simple_at_horizon"].get<double>() != s.fraction_simple_at_horizon ||
        m["fraction_nonsimple_steps"].get<double>() != s.fraction_nonsimple_steps ||
        m["gauge_validation"].get<double>() != gauge) {
      c.ok = false;
      c.detail = std::string(role) + " statistics differ from the events";
    }
  }
  out.push_back(c);
}

/// Re-checks a run directory from its manifest: manifest and artifact
/// hashes, then the exact invariants recorded in the artifacts. Throws when
/// an artifact is missing.
inline std::vector<ArtifactCheck> verify_run(const std::filesystem::path& manifest_path) {
  const auto dir = manifest_path.parent_path();
  json m = json::parse(read_text(manifest_path));
  std::vector<ArtifactCheck> out;
  ArtifactCheck mh{"manifest_hash", m.contains("manifest_hash") && m["manifest_hash"] == manifest_hash(m), ""};
  out.push_back(mh);
  std::map<std::string, std::string> files;
  for (const auto& [name, hash] : m.at("artifacts").items()) {
    files[name] = read_text(dir / name);
    ArtifactCheck c{"hash " + name, hex64(fnv1a64(files[name])) == hash.get<std::string>(), ""};
    if (!c.ok) c.detail = "content changed";
    out.push_back(c);
  }
  const json& cfg = m.at("config");
  const auto kind = cfg.at("experiment").get<std::string>();
  auto events = read_events(files.at("events.jsonl"));
  if (kind == "thompson-mu") {
    auto art = json::parse(files.at("measure.json"));
    for (auto& c : verify_measure_artifact(ThompsonGroup(), art)) out.push_back(c);
  } else if (kind == "permwreath-srs") {
    auto art = json::parse(files.at("measure.json"));
    for (auto& c : verify_measure_artifact(*perm_wreath_from(cfg["group"]), art)) out.push_back(c);
  } else if (kind == "wreath-srs") {
    with_lamp_group(cfg["group"]["lamp"].get<std::string>(), [&](const auto& lamps) {
      verify_equivariance(out, lamps, cfg, events);
      return 0;
    });
  } else if (kind == "bs-tree") {
    verify_zeta(out, events);
  } else if (kind == "records") {
    verify_records(out, m.at("metrics"), cfg, events);
  } else if (kind == "martingale") {
    ArtifactCheck c{"martingale_replay", true, ""};
    std::size_t within = 0, n = 0;
    const double tol = cfg["martingale"]["tolerance"].get<double>();
    for (const auto& e : events) {
      if (e["event_kind"] != "martingale") continue;
      ++n;
      const auto& pts = e["payload"]["points"];
      double gap = 1.0;
      if (!pts.empty()) {
        double est = pts.back().at(1).get<double>();
        gap = std::min(est, 1.0 - est);
      }
      within += gap <= tol;
    }
    c.ok = m["metrics"]["martingale"]["within_tolerance"].get<std::size_t>() == within &&
           m["metrics"]["martingale"]["trials"].get<std::size_t>() == n;
    if (!c.ok) c.detail = "terminal estimates differ from the metrics";
    out.push_back(c);
  }
  return out;
}

}  // namespace srs

#endif  // SRSLAB_EXPERIMENTS_HPP
