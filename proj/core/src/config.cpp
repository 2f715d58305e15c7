#include "platelab/config.hpp"

#include <map>
#include <regex>
#include <set>

#include <fmt/format.h>

#include "platelab/errors.hpp"
#include "platelab/io.hpp"

namespace platelab {

using nlohmann::json;

std::string mode_label(const ModeKey& key) {
  return fmt::format("{}{}{}", key.m, key.parity == Parity::even ? 'e' : 'o', key.branch);
}

ModeKey parse_mode_label(const std::string& label, const std::string& path) {
  static const std::regex re("^([1-9][0-9]*)([eo])([1-9][0-9]*)$");
  std::smatch mt;
  if (!std::regex_match(label, mt, re)) throw ConfigError(path, "bad mode label '" + label + "' (want e.g. 1e1, 2o1)");
  return {std::stoi(mt[1]), mt[2] == "e" ? Parity::even : Parity::odd, std::stoi(mt[3])};
}

namespace {

enum class T { integer, number, boolean, string, int_array, number_array, object };

struct Field {
  const char* name;
  T type;
  json def;
};

using Schema = std::vector<Field>;

const std::map<std::string, Schema>& schemas() {
  static const std::map<std::string, Schema> s = {
      {"spectrum", {}},
      {"simulate", {{"t_final", T::number, 20.0}, {"nu", T::number, 0.0}}},
      {"stationary",
       {{"n_starts", T::integer, 100},
        {"max_iter", T::integer, 60},
        {"tol", T::number, 1e-10},
        {"radius", T::number, 0.0},
        {"unimodal_m", T::int_array, json::array()},
        {"mu_hi", T::number, 100.0}}},
      {"branch",
       {{"m", T::int_array, json::array({1, 2, 3, 4, 5})},
        {"mu_lo", T::number, 0.0},
        {"mu_hi", T::number, 100.0},
        {"n_out", T::integer, 101}}},
      {"duffing",
       {{"m", T::integer, 1},
        {"phi0", T::number, 0.5},
        {"dphi0", T::number, 0.0},
        {"t_final", T::number, 200.0},
        {"heteroclinic_n", T::int_array, json::array({1, 2, 3, 4, 5, 6, 7, 8, 9, 10})},
        {"cross_validate", T::boolean, false},
        {"cv_t_final", T::number, 50.0},
        {"mu_hi", T::number, 100.0}}},
      {"basin",
       {{"m", T::integer, 1},
        {"phi_lo", T::number, -2.0},
        {"phi_hi", T::number, 2.0},
        {"dphi_lo", T::number, -2.0},
        {"dphi_hi", T::number, 2.0},
        {"n_phi", T::integer, 201},
        {"n_dphi", T::integer, 201},
        {"t_final", T::number, 2000.0},
        {"mu_hi", T::number, 100.0}}},
      {"thresholds", {{"nu", T::number, 0.0}, {"delta", T::number, 0.0}}},
      {"absorb",
       {{"nu", T::number, 0.25},
        {"eta", T::number, 0.0},
        {"calibration_runs", T::integer, 12},
        {"battery_runs", T::integer, 20},
        {"norm_lo", T::number, 0.1},
        {"norm_hi", T::number, 100.0},
        {"cal_norm_lo", T::number, 0.1},
        {"cal_norm_hi", T::number, 100.0},
        {"t_final", T::number, 60.0},
        {"sup_starts", T::integer, 64}}},
      {"decay",
       {{"runs", T::integer, 4},
        {"norm", T::number, 3.0},
        {"t_final", T::number, 60.0},
        {"target", T::string, "auto"}}},
      {"determine",
       {{"ladder", T::int_array, json::array({1, 2, 3, 4, 5, 6})},
        {"n_pairs", T::integer, 8},
        {"norm", T::number, 5.0},
        {"restricted_pairs", T::integer, 0},
        {"restrict_m", T::int_array, json::array()},
        {"identical", T::boolean, false},
        {"decay_tol", T::number, 1e-6},
        {"t_final", T::number, 80.0},
        {"defect_depth", T::integer, 20}}},
      {"sweep",
       {{"inner", T::string, "stationary"},
        {"parameter", T::string, "alpha"},
        {"values", T::number_array, json::array()},
        {"experiment", T::object, json::object()}}},
  };
  return s;
}

bool type_ok(const json& v, T t) {
  switch (t) {
    case T::integer: return v.is_number_integer();
    case T::number: return v.is_number();
    case T::boolean: return v.is_boolean();
    case T::string: return v.is_string();
    case T::object: return v.is_object();
    case T::int_array:
      if (!v.is_array()) return false;
      for (const auto& e : v)
        if (!e.is_number_integer()) return false;
      return true;
    case T::number_array:
      if (!v.is_array()) return false;
      for (const auto& e : v)
        if (!e.is_number()) return false;
      return true;
  }
  return false;
}

const char* type_name(T t) {
  switch (t) {
    case T::integer: return "integer";
    case T::number: return "number";
    case T::boolean: return "boolean";
    case T::string: return "string";
    case T::object: return "object";
    case T::int_array: return "array of integers";
    case T::number_array: return "array of numbers";
  }
  return "?";
}

// Tracks which keys of an object were read, so leftovers can be reported.
class Reader {
public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "must be an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  template <class V>
  V get(const char* key, V def) {
    seen_.insert(key);
    if (!j_.contains(key)) return def;
    const json& v = j_.at(key);
    const std::string p = path_ + "." + key;
    if constexpr (std::is_same_v<V, bool>) {
      if (!v.is_boolean()) throw ConfigError(p, "expected boolean");
    } else if constexpr (std::is_integral_v<V>) {
      if (!v.is_number_integer()) throw ConfigError(p, "expected integer");
      if constexpr (std::is_unsigned_v<V>)
        if (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)
          throw ConfigError(p, "must be >= 0");
    } else if constexpr (std::is_floating_point_v<V>) {
      if (!v.is_number()) throw ConfigError(p, "expected number");
    } else {
      if (!v.is_string()) throw ConfigError(p, "expected string");
    }
    return v.get<V>();
  }

  const json& raw(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string path(const char* key) const { return path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(path_ + "." + it.key(), "unknown key");
  }

private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<std::pair<ModeKey, double>> parse_coefficients(const json& v, const std::string& path) {
  if (!v.is_object()) throw ConfigError(path, "must be an object of mode label -> value");
  std::vector<std::pair<ModeKey, double>> out;
  for (auto it = v.begin(); it != v.end(); ++it) {
    if (!it->is_number()) throw ConfigError(path + "." + it.key(), "expected number");
    out.emplace_back(parse_mode_label(it.key(), path + "." + it.key()), it->get<double>());
  }
  return out;
}

json coefficients_json(const std::vector<std::pair<ModeKey, double>>& c) {
  json j = json::object();
  for (const auto& [k, v] : c) j[mode_label(k)] = v;
  return j;
}

std::string initial_kind_name(InitialData::Kind k) {
  switch (k) {
    case InitialData::Kind::zero: return "zero";
    case InitialData::Kind::modal: return "modal";
    case InitialData::Kind::random: return "random";
    case InitialData::Kind::unimodal: return "unimodal";
  }
  return "zero";
}

std::vector<ModeKey> default_modes() {
  std::vector<ModeKey> k;
  for (int m = 1; m <= 3; ++m) {
    k.push_back({m, Parity::even, 1});
    k.push_back({m, Parity::odd, 1});
  }
  return k;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, _] : schemas()) v.push_back(k);
    return v;
  }();
  return names;
}

json experiment_defaults(const std::string& command) {
  auto it = schemas().find(command);
  if (it == schemas().end()) throw ConfigError("command", "unknown command '" + command + "'");
  json j = json::object();
  for (const Field& f : it->second) j[f.name] = f.def;
  return j;
}

json normalize_experiment(const std::string& command, const json& block, const std::string& path) {
  auto it = schemas().find(command);
  if (it == schemas().end()) throw ConfigError("command", "unknown command '" + command + "'");
  if (!block.is_object()) throw ConfigError(path, "must be an object");
  json out = json::object();
  for (const Field& f : it->second) {
    if (block.contains(f.name)) {
      const json& v = block.at(f.name);
      if (!type_ok(v, f.type)) throw ConfigError(path + "." + f.name, fmt::format("expected {}", type_name(f.type)));
      out[f.name] = v;
    } else {
      out[f.name] = f.def;
    }
  }
  for (auto b = block.begin(); b != block.end(); ++b)
    if (!out.contains(b.key())) throw ConfigError(path + "." + b.key(), "unknown key");
  if (command == "sweep") {
    const std::string inner = out["inner"];
    if (inner == "sweep") throw ConfigError(path + ".inner", "sweeps do not nest");
    out["experiment"] = normalize_experiment(inner, out["experiment"], path + ".experiment");
    static const std::set<std::string> params = {"alpha", "k", "P", "S", "forcing.c", "seed"};
    if (!params.count(out["parameter"].get<std::string>()))
      throw ConfigError(path + ".parameter", "one of alpha, k, P, S, forcing.c, seed");
  }
  if (command == "decay") {
    const std::string t = out["target"];
    if (t != "auto" && t != "zero") throw ConfigError(path + ".target", "must be 'auto' or 'zero'");
  }
  return out;
}

TruncationSpec ScenarioConfig::truncation(const SpectrumTable& table) const {
  TruncationSpec t;
  if (first_n > 0)
    t = TruncationSpec::first_n(table, first_n);
  else
    t.keys = modes.empty() ? default_modes() : modes;
  t.abs_tol = abs_tol;
  t.rel_tol = rel_tol;
  t.stride = stride;
  t.validate(table);
  return t;
}

ScenarioConfig parse_config(const json& j) {
  ScenarioConfig c;
  Reader top(j, "config");
  c.command = top.get<std::string>("command", c.command);
  c.seed = top.get<std::uint64_t>("seed", c.seed);
  c.threads = top.get<unsigned>("threads", c.threads);

  if (top.has("params")) {
    Reader p(top.raw("params"), "config.params");
    PlateParams& q = c.params;
    q.ell = p.get("ell", q.ell);
    q.sigma = p.get("sigma", q.sigma);
    q.S = p.get("S", q.S);
    q.P = p.get("P", q.P);
    q.k = p.get("k", q.k);
    q.alpha = p.get("alpha", q.alpha);
    if (p.has("forcing")) {
      Reader f(p.raw("forcing"), "config.params.forcing");
      try {
        q.forcing.kind = forcing_kind_from_string(f.get<std::string>("type", "none"));
      } catch (const InvalidParameter& e) {
        throw ConfigError("config.params.forcing.type", e.what());
      }
      q.forcing.c = f.get("c", 0.0);
      q.forcing.m = f.get("m", 1);
      if (f.has("coefficients"))
        q.forcing.coefficients = parse_coefficients(f.raw("coefficients"), "config.params.forcing.coefficients");
      f.finish();
    }
    p.finish();
    try {
      q.validate();
      q.forcing.validate();
    } catch (const InvalidParameter& e) {
      throw ConfigError("config.params." + e.field(), e.what());
    }
  }

  if (top.has("spectrum")) {
    Reader s(top.raw("spectrum"), "config.spectrum");
    c.spectrum.m_max = s.get("m_max", c.spectrum.m_max);
    c.spectrum.per_m = s.get("per_m", c.spectrum.per_m);
    c.spectrum.quad_nodes = s.get("quad_nodes", c.spectrum.quad_nodes);
    c.spectrum.sweep_refinement = s.get("sweep_refinement", c.spectrum.sweep_refinement);
    s.finish();
    if (c.spectrum.m_max < 1 || c.spectrum.per_m < 1 || c.spectrum.quad_nodes < 8 || c.spectrum.sweep_refinement < 1)
      throw ConfigError("config.spectrum", "need m_max >= 1, per_m >= 1, quad_nodes >= 8, sweep_refinement >= 1");
  }

  if (top.has("truncation")) {
    Reader t(top.raw("truncation"), "config.truncation");
    if (t.has("modes")) {
      const json& v = t.raw("modes");
      if (!v.is_array()) throw ConfigError("config.truncation.modes", "expected array of mode labels");
      for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string p = fmt::format("config.truncation.modes[{}]", i);
        if (!v[i].is_string()) throw ConfigError(p, "expected mode label");
        c.modes.push_back(parse_mode_label(v[i].get<std::string>(), p));
      }
    }
    c.first_n = t.get<std::size_t>("first_n", 0);
    c.abs_tol = t.get("abs_tol", c.abs_tol);
    c.rel_tol = t.get("rel_tol", c.rel_tol);
    c.stride = t.get("stride", c.stride);
    t.finish();
    if (!c.modes.empty() && c.first_n > 0) throw ConfigError("config.truncation", "give either modes or first_n");
    for (std::size_t a = 0; a < c.modes.size(); ++a)
      for (std::size_t b = a + 1; b < c.modes.size(); ++b)
        if (c.modes[a] == c.modes[b]) throw ConfigError("config.truncation.modes", "duplicate " + mode_label(c.modes[a]));
    if (!(c.abs_tol > 0 && c.rel_tol > 0 && c.stride > 0))
      throw ConfigError("config.truncation", "tolerances and stride must be > 0");
  }

  if (top.has("initial")) {
    Reader i(top.raw("initial"), "config.initial");
    const std::string kind = i.get<std::string>("kind", "zero");
    InitialData& d = c.initial;
    if (kind == "zero") {
      d.kind = InitialData::Kind::zero;
    } else if (kind == "modal") {
      d.kind = InitialData::Kind::modal;
      if (i.has("h")) d.h = parse_coefficients(i.raw("h"), "config.initial.h");
      if (i.has("hdot")) d.hdot = parse_coefficients(i.raw("hdot"), "config.initial.hdot");
    } else if (kind == "random") {
      d.kind = InitialData::Kind::random;
      d.norm = i.get("norm", d.norm);
      if (!(d.norm >= 0)) throw ConfigError("config.initial.norm", "must be >= 0");
    } else if (kind == "unimodal") {
      d.kind = InitialData::Kind::unimodal;
      d.m = i.get("m", d.m);
      d.phi0 = i.get("phi0", d.phi0);
      d.dphi0 = i.get("dphi0", d.dphi0);
      if (d.m < 1) throw ConfigError("config.initial.m", "must be >= 1");
    } else {
      throw ConfigError("config.initial.kind", "one of zero, modal, random, unimodal");
    }
    i.finish();
  }

  if (c.modes.empty() && c.first_n == 0) c.modes = default_modes();

  const json block = top.has("experiment") ? top.raw("experiment") : json::object();
  top.finish();
  c.experiment = normalize_experiment(c.command, block, "config.experiment");
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  json j;
  try {
    j = json::parse(io::read_text(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path, e.what());
  }
  // A run manifest carries the full config and can be fed back in.
  if (j.is_object() && j.contains("manifest_version") && j.contains("config")) j = j.at("config");
  return parse_config(j);
}

json to_json(const ScenarioConfig& c) {
  json j;
  j["command"] = c.command;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  const PlateParams& p = c.params;
  json f = {{"type", to_string(p.forcing.kind)}, {"c", p.forcing.c}, {"m", p.forcing.m}};
  if (!p.forcing.coefficients.empty()) f["coefficients"] = coefficients_json(p.forcing.coefficients);
  j["params"] = {{"ell", p.ell}, {"sigma", p.sigma}, {"S", p.S}, {"P", p.P}, {"k", p.k}, {"alpha", p.alpha}, {"forcing", f}};
  j["spectrum"] = {{"m_max", c.spectrum.m_max},
                   {"per_m", c.spectrum.per_m},
                   {"quad_nodes", c.spectrum.quad_nodes},
                   {"sweep_refinement", c.spectrum.sweep_refinement}};
  json t = {{"abs_tol", c.abs_tol}, {"rel_tol", c.rel_tol}, {"stride", c.stride}};
  if (c.first_n > 0) {
    t["first_n"] = c.first_n;
  } else {
    json modes = json::array();
    for (const ModeKey& k : c.modes.empty() ? default_modes() : c.modes) modes.push_back(mode_label(k));
    t["modes"] = modes;
  }
  j["truncation"] = t;
  const InitialData& d = c.initial;
  json i = {{"kind", initial_kind_name(d.kind)}};
  switch (d.kind) {
    case InitialData::Kind::zero: break;
    case InitialData::Kind::modal:
      i["h"] = coefficients_json(d.h);
      i["hdot"] = coefficients_json(d.hdot);
      break;
    case InitialData::Kind::random: i["norm"] = d.norm; break;
    case InitialData::Kind::unimodal:
      i["m"] = d.m;
      i["phi0"] = d.phi0;
      i["dphi0"] = d.dphi0;
      break;
  }
  j["initial"] = i;
  j["experiment"] = c.experiment;
  return j;
}

}  // namespace platelab
