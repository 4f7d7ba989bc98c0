#include "evosync/io/scenario_file.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

namespace evosync::io {
namespace {

using nlohmann::json;

std::uint64_t as_unsigned(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  throw SchemaError(path, "expected a nonnegative integer");
}

// Walks one JSON object, tracking its pointer path and which keys were read.
class ObjectReader {
 public:
  ObjectReader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw SchemaError(at(), "expected an object");
  }

  const std::string& path() const { return path_; }
  std::string child(std::string_view key) const { return path_ + "/" + std::string(key); }

  bool has(std::string_view key) const { return node_.contains(std::string(key)); }

  const json& get(std::string_view key) {
    seen_.insert(std::string(key));
    auto it = node_.find(std::string(key));
    if (it == node_.end()) throw SchemaError(child(key), "missing required key");
    return *it;
  }

  double number(std::string_view key) {
    const auto& v = get(key);
    if (!v.is_number()) throw SchemaError(child(key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw SchemaError(child(key), "expected a finite number");
    return d;
  }
  double number(std::string_view key, double fallback) {
    return has(key) ? number(key) : fallback;
  }

  std::uint64_t unsigned_int(std::string_view key) {
    const auto& v = get(key);
    return as_unsigned(v, child(key));
  }
  std::uint64_t unsigned_int(std::string_view key, std::uint64_t fallback) {
    return has(key) ? unsigned_int(key) : fallback;
  }

  std::string string(std::string_view key) {
    const auto& v = get(key);
    if (!v.is_string()) throw SchemaError(child(key), "expected a string");
    return v.get<std::string>();
  }

  // Reads `key` in meters or `key_km` in kilometers; exactly one must be given.
  template <class Convert>
  auto metric(std::string_view key, Convert convert) {
    const std::string km = std::string(key) + "_km";
    if (has(key) && has(km)) throw SchemaError(child(km), "give either meters or _km, not both");
    if (has(km)) return convert(get(km), child(km), 1000.0);
    return convert(get(key), child(key), 1.0);
  }

  // Rejects keys that were never read.
  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (!seen_.count(it.key())) throw SchemaError(child(it.key()), "unknown key");
    }
  }

 private:
  std::string at() const { return path_.empty() ? "/" : path_; }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw SchemaError(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SchemaError(path, "expected a finite number");
  return d;
}

std::size_t as_index(const json& v, const std::string& path) {
  return static_cast<std::size_t>(as_unsigned(v, path));
}

const json& as_array(const json& v, const std::string& path) {
  if (!v.is_array()) throw SchemaError(path, "expected an array");
  return v;
}

std::vector<double> number_list(const json& v, const std::string& path, double scale = 1.0) {
  std::vector<double> out;
  const auto& arr = as_array(v, path);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    out.push_back(scale * as_number(arr[i], path + "/" + std::to_string(i)));
  }
  return out;
}

std::vector<std::size_t> index_list(const json& v, const std::string& path) {
  std::vector<std::size_t> out;
  const auto& arr = as_array(v, path);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    out.push_back(as_index(arr[i], path + "/" + std::to_string(i)));
  }
  return out;
}

std::vector<std::vector<double>> matrix(const json& v, const std::string& path) {
  std::vector<std::vector<double>> out;
  const auto& arr = as_array(v, path);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    out.push_back(number_list(arr[i], path + "/" + std::to_string(i)));
  }
  return out;
}

Coordinate coordinate(const json& v, const std::string& path) {
  ObjectReader r(v, path);
  Coordinate c{r.unsigned_int("population"), r.unsigned_int("strategy")};
  r.finish();
  return c;
}

json coordinate_json(const Coordinate& c) {
  return {{"population", c.population}, {"strategy", c.strategy}};
}

std::string protocol_name(ProtocolChoice k) {
  switch (k) {
    case ProtocolChoice::Hybrid: return "hybrid";
    case ProtocolChoice::Replicator: return "replicator";
    case ProtocolChoice::Smith: return "smith";
  }
  return "hybrid";
}

std::vector<double> default_alpha(std::size_t populations) {
  static constexpr double kPattern[] = {0.2, 0.3, 0.0};
  std::vector<double> a;
  for (std::size_t p = 0; p < populations; ++p) a.push_back(kPattern[p % 3]);
  return a;
}

// Runs `fn` and rewrites evosync errors as schema errors at `path`.
template <class Fn>
auto at_path(const std::string& path, Fn fn) {
  try {
    return fn();
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    throw SchemaError(path, e.what());
  }
}

}  // namespace

Scenario ScenarioFile::scenario() const {
  auto pops = populations;
  for (std::size_t p = 0; p < pops.size(); ++p) {
    switch (protocol.kind) {
      case ProtocolChoice::Hybrid: pops[p].smith_probability = protocol.alpha.at(p); break;
      case ProtocolChoice::Replicator: pops[p].smith_probability = 0.0; break;
      case ProtocolChoice::Smith: pops[p].smith_probability = 1.0; break;
    }
  }
  return Scenario(regions, std::move(pops), denominator_floor);
}

RevisionProtocol ScenarioFile::revision_protocol() const {
  auto proto = RevisionProtocol::from_scenario(scenario());
  for (auto p : protocol.frozen) proto.freeze(p);
  return proto;
}

SocialState ScenarioFile::initial() const { return SocialState::from_blocks(initial_state); }

StochasticConfig ScenarioFile::stochastic_config() const {
  StochasticConfig c;
  c.seed = seed;
  c.clock_rate = stochastic.clock_rate;
  c.rate_bound = stochastic.rate_bound;
  c.horizon = stochastic.horizon;
  c.record_interval = stochastic.record_interval;
  return c;
}

DirectionFieldSpec ScenarioFile::field_spec() const {
  DirectionFieldSpec spec;
  spec.u = field.u;
  spec.v = field.v;
  spec.fixed = field.fixed.empty() ? initial() : SocialState::from_blocks(field.fixed);
  spec.resolution_u = field.resolution_u;
  spec.resolution_v = field.resolution_v;
  return spec;
}

EquilibriumConfig ScenarioFile::equilibrium_config() const {
  EquilibriumConfig c;
  c.integrator = integrator;
  c.residual_tolerance = equilibria.residual_tolerance;
  c.cluster_tolerance = equilibria.cluster_tolerance;
  c.refine_time = equilibria.refine_time;
  return c;
}

json to_json(const ScenarioFile& f) {
  json regions = json::array();
  for (const auto& r : f.regions) {
    regions.push_back({{"id", r.id}, {"route_length", r.route_length}, {"reward_pool", r.reward_pool}});
  }
  json pops = json::array();
  for (const auto& p : f.populations) {
    pops.push_back({{"id", p.id},
                    {"size", p.size},
                    {"strategies", p.strategies},
                    {"traversal_distance", p.traversal_distance},
                    {"unit_energy_cost", p.unit_energy_cost},
                    {"propulsion_power", p.propulsion_power},
                    {"hover_power", p.hover_power},
                    {"traversal_speed", p.traversal_speed},
                    {"sensing_speed", p.sensing_speed},
                    {"data_quality", p.data_quality}});
  }
  const auto& in = f.integrator;
  const auto& st = f.stochastic;
  json field = {{"u", coordinate_json(f.field.u)},
                {"v", coordinate_json(f.field.v)},
                {"resolution", {f.field.resolution_u, f.field.resolution_v}}};
  if (!f.field.fixed.empty()) field["fixed"] = f.field.fixed;
  return {
      {"regions", regions},
      {"populations", pops},
      {"denominator_floor", f.denominator_floor},
      {"protocol",
       {{"kind", protocol_name(f.protocol.kind)},
        {"alpha", f.protocol.alpha},
        {"frozen", f.protocol.frozen}}},
      {"initial_state", f.initial_state},
      {"integrator",
       {{"step_size", in.step_size},
        {"max_time", in.max_time},
        {"convergence_tau", in.convergence_tau},
        {"extinction_threshold", in.extinction_threshold},
        {"record_stride", in.record_stride}}},
      {"stochastic",
       {{"clock_rate", st.clock_rate},
        {"rate_bound", st.rate_bound},
        {"horizon", st.horizon},
        {"record_interval", st.record_interval},
        {"runs", st.runs}}},
      {"field", field},
      {"equilibria",
       {{"population", f.equilibria.population},
        {"grid", f.equilibria.grid},
        {"residual_tolerance", f.equilibria.residual_tolerance},
        {"cluster_tolerance", f.equilibria.cluster_tolerance},
        {"refine_time", f.equilibria.refine_time}}},
      {"sweep", {{"population", f.sweep.population}, {"alpha_values", f.sweep.alpha_values}}},
      {"seed", f.seed},
  };
}

ScenarioFile from_json(const json& tree) {
  ScenarioFile f;
  ObjectReader root(tree, "");

  {
    const auto& arr = as_array(root.get("regions"), "/regions");
    for (std::size_t m = 0; m < arr.size(); ++m) {
      ObjectReader r(arr[m], "/regions/" + std::to_string(m));
      RegionSpec spec;
      spec.id = r.unsigned_int("id", m);
      spec.route_length = r.metric("route_length", [](const json& v, const std::string& p, double s) {
        return s * as_number(v, p);
      });
      spec.reward_pool = r.number("reward_pool");
      r.finish();
      f.regions.push_back(spec);
    }
  }
  {
    const auto& arr = as_array(root.get("populations"), "/populations");
    for (std::size_t p = 0; p < arr.size(); ++p) {
      ObjectReader r(arr[p], "/populations/" + std::to_string(p));
      PopulationSpec spec;
      spec.id = r.unsigned_int("id", p);
      spec.size = r.unsigned_int("size");
      spec.strategies = index_list(r.get("strategies"), r.child("strategies"));
      spec.traversal_distance = r.metric(
          "traversal_distance",
          [](const json& v, const std::string& path, double s) { return number_list(v, path, s); });
      spec.unit_energy_cost = r.number("unit_energy_cost");
      spec.propulsion_power = r.number("propulsion_power");
      spec.hover_power = r.number("hover_power");
      spec.traversal_speed = r.number("traversal_speed");
      spec.sensing_speed = r.number("sensing_speed");
      spec.data_quality = number_list(r.get("data_quality"), r.child("data_quality"));
      r.finish();
      f.populations.push_back(std::move(spec));
    }
  }
  f.denominator_floor = root.number("denominator_floor", Scenario::kDefaultDenominatorFloor);
  const auto P = f.populations.size();

  if (root.has("protocol")) {
    ObjectReader r(root.get("protocol"), "/protocol");
    const auto kind = r.has("kind") ? r.string("kind") : std::string("hybrid");
    if (kind == "hybrid") {
      f.protocol.kind = ProtocolChoice::Hybrid;
    } else if (kind == "replicator") {
      f.protocol.kind = ProtocolChoice::Replicator;
    } else if (kind == "smith") {
      f.protocol.kind = ProtocolChoice::Smith;
    } else {
      throw SchemaError("/protocol/kind", "expected hybrid, replicator or smith");
    }
    f.protocol.alpha = r.has("alpha") ? number_list(r.get("alpha"), "/protocol/alpha") : default_alpha(P);
    if (r.has("frozen")) f.protocol.frozen = index_list(r.get("frozen"), "/protocol/frozen");
    r.finish();
  } else {
    f.protocol.alpha = default_alpha(P);
  }
  if (f.protocol.alpha.size() != P) {
    throw SchemaError("/protocol/alpha", "need one Smith probability per population");
  }
  for (std::size_t p = 0; p < P; ++p) {
    const double a = f.protocol.alpha[p];
    if (!(a >= 0.0 && a <= 1.0)) {
      throw SchemaError("/protocol/alpha/" + std::to_string(p), "must lie in [0, 1]");
    }
  }
  for (std::size_t i = 0; i < f.protocol.frozen.size(); ++i) {
    if (f.protocol.frozen[i] >= P) {
      throw SchemaError("/protocol/frozen/" + std::to_string(i), "unknown population");
    }
  }

  if (root.has("initial_state")) {
    f.initial_state = matrix(root.get("initial_state"), "/initial_state");
  }

  if (root.has("integrator")) {
    ObjectReader r(root.get("integrator"), "/integrator");
    auto& c = f.integrator;
    c.step_size = r.number("step_size", c.step_size);
    c.max_time = r.number("max_time", c.max_time);
    c.convergence_tau = r.number("convergence_tau", c.convergence_tau);
    c.extinction_threshold = r.number("extinction_threshold", c.extinction_threshold);
    c.record_stride = r.unsigned_int("record_stride", c.record_stride);
    r.finish();
  }
  at_path("/integrator", [&] { f.integrator.validate(); return 0; });

  if (root.has("stochastic")) {
    ObjectReader r(root.get("stochastic"), "/stochastic");
    auto& s = f.stochastic;
    s.clock_rate = r.number("clock_rate", s.clock_rate);
    s.rate_bound = r.number("rate_bound", s.rate_bound);
    s.horizon = r.number("horizon", s.horizon);
    s.record_interval = r.number("record_interval", s.record_interval);
    s.runs = r.unsigned_int("runs", s.runs);
    r.finish();
  }
  at_path("/stochastic", [&] { f.stochastic_config().validate(); return 0; });
  if (f.stochastic.runs == 0) throw SchemaError("/stochastic/runs", "must be >= 1");

  if (root.has("field")) {
    ObjectReader r(root.get("field"), "/field");
    if (r.has("u")) f.field.u = coordinate(r.get("u"), "/field/u");
    if (r.has("v")) f.field.v = coordinate(r.get("v"), "/field/v");
    if (r.has("resolution")) {
      const auto res = index_list(r.get("resolution"), "/field/resolution");
      if (res.size() != 2) throw SchemaError("/field/resolution", "expected [u, v]");
      f.field.resolution_u = res[0];
      f.field.resolution_v = res[1];
    }
    if (r.has("fixed")) f.field.fixed = matrix(r.get("fixed"), "/field/fixed");
    r.finish();
  } else if (P < 2) {
    f.field.v = {0, 1};
  }

  if (root.has("equilibria")) {
    ObjectReader r(root.get("equilibria"), "/equilibria");
    auto& e = f.equilibria;
    e.population = r.unsigned_int("population", e.population);
    e.grid = r.unsigned_int("grid", e.grid);
    e.residual_tolerance = r.number("residual_tolerance", e.residual_tolerance);
    e.cluster_tolerance = r.number("cluster_tolerance", e.cluster_tolerance);
    e.refine_time = r.number("refine_time", e.refine_time);
    r.finish();
  }
  if (f.equilibria.population >= P) throw SchemaError("/equilibria/population", "unknown population");

  f.sweep.population = P - 1;
  for (int i = 0; i <= 10; ++i) f.sweep.alpha_values.push_back(i / 10.0);
  if (root.has("sweep")) {
    ObjectReader r(root.get("sweep"), "/sweep");
    f.sweep.population = r.unsigned_int("population", f.sweep.population);
    if (r.has("alpha_values")) {
      f.sweep.alpha_values = number_list(r.get("alpha_values"), "/sweep/alpha_values");
    }
    r.finish();
  }
  if (f.sweep.population >= P) throw SchemaError("/sweep/population", "unknown population");
  for (std::size_t i = 0; i < f.sweep.alpha_values.size(); ++i) {
    const double a = f.sweep.alpha_values[i];
    if (!(a >= 0.0 && a <= 1.0)) {
      throw SchemaError("/sweep/alpha_values/" + std::to_string(i), "must lie in [0, 1]");
    }
  }

  f.seed = root.unsigned_int("seed", 0);
  root.finish();

  // Cross-section invariants, reported against the entry that owns them.
  for (std::size_t m = 0; m < f.regions.size(); ++m) {
    at_path("/regions/" + std::to_string(m), [&] { validate_region(f.regions[m], m); return 0; });
  }
  const auto scenario = at_path("/populations", [&] {
    for (std::size_t p = 0; p < P; ++p) {
      at_path("/populations/" + std::to_string(p), [&] {
        auto pop = f.populations[p];
        pop.smith_probability = 0.0;
        validate_population(pop, p, f.regions.size());
        return 0;
      });
    }
    return f.scenario();
  });
  if (f.initial_state.empty()) {
    const auto u = scenario.uniform_state();
    for (std::size_t p = 0; p < P; ++p) {
      const auto b = u.block(p);
      f.initial_state.emplace_back(b.begin(), b.end());
    }
  }
  at_path("/initial_state", [&] { scenario.check_state(f.initial()); return 0; });
  if (!f.field.fixed.empty()) {
    at_path("/field/fixed", [&] {
      if (!(SocialState::from_blocks(f.field.fixed).layout() == scenario.layout())) {
        throw ValidationError("fixed state does not match the strategy layout");
      }
      return 0;
    });
  }
  return f;
}

void apply_override(json& tree, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw SchemaError("/", "override must look like dotted.path=value: " + std::string(assignment));
  }
  const std::string path(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));

  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }

  json* node = &tree;
  std::string pointer;
  std::stringstream ss(path);
  std::string token;
  while (std::getline(ss, token, '.')) {
    if (token.empty()) throw SchemaError(pointer + "/", "empty path component in override");
    pointer += "/" + token;
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        std::size_t used = 0;
        idx = std::stoul(token, &used);
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        throw SchemaError(pointer, "expected an array index");
      }
      if (idx >= node->size()) throw SchemaError(pointer, "array index out of range");
      node = &(*node)[idx];
    } else if (node->is_object() || node->is_null()) {
      node = &(*node)[token];
    } else {
      throw SchemaError(pointer, "cannot descend into a scalar");
    }
  }
  *node = std::move(value);
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("/", "cannot open scenario file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("/", std::string("malformed JSON: ") + e.what());
  }
}

ScenarioFile load_scenario(const std::filesystem::path& path,
                           const std::vector<std::string>& overrides) {
  auto tree = read_json(path);
  for (const auto& o : overrides) apply_override(tree, o);
  return from_json(tree);
}

ScenarioFile generate_scenario(std::uint64_t seed, std::size_t populations, std::size_t regions) {
  if (populations == 0 || regions == 0) {
    throw ValidationError("need at least one population and one region");
  }
  Rng rng(seed);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  ScenarioFile f;
  for (std::size_t m = 0; m < regions; ++m) {
    RegionSpec r;
    r.id = m;
    r.route_length = uniform(1000.0, 1800.0);
    r.reward_pool = uniform(1000.0, 2000.0);
    f.regions.push_back(r);
  }
  for (std::size_t p = 0; p < populations; ++p) {
    PopulationSpec s;
    s.id = p;
    s.size = std::uniform_int_distribution<std::size_t>(50, 250)(rng);
    s.traversal_speed = uniform(3.0, 5.0);
    s.sensing_speed = uniform(3.0, 5.0);
    s.propulsion_power = uniform(16.0, 20.0);
    s.hover_power = uniform(16.0, 20.0);
    s.unit_energy_cost = 0.001;
    for (std::size_t m = 0; m < regions; ++m) {
      s.strategies.push_back(m);
      s.traversal_distance.push_back(uniform(300.0, 1000.0));
      s.data_quality.push_back(uniform(1.0, 5.0));
    }
    f.populations.push_back(std::move(s));
  }
  f.protocol.alpha = default_alpha(populations);
  if (populations == 3 && regions == 3) {
    f.initial_state = {{0.3, 0.3, 0.4}, {0.4, 0.4, 0.2}, {0.35, 0.35, 0.3}};
  } else {
    for (std::size_t p = 0; p < populations; ++p) {
      f.initial_state.emplace_back(regions, 1.0 / static_cast<double>(regions));
    }
  }
  if (populations < 2) f.field.v = {0, 1};
  f.sweep.population = populations - 1;
  for (int i = 0; i <= 10; ++i) f.sweep.alpha_values.push_back(i / 10.0);
  f.seed = seed;
  return f;
}

}  // namespace evosync::io
