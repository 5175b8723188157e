#pragma once

// Flat key=value run configuration.  One or more key=value tokens per line,
// '#' starts a comment.  Unknown keys, malformed numbers and violated
// constraints are reported with the offending key.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "jch/chain_model.hpp"
#include "jch/experiments.hpp"

namespace jch {

inline constexpr const char* kToolVersion = "0.1.0";

class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::invalid_argument(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

enum class ObjectiveKind { TimeToReach, SinkAtTime };

struct RunConfig {
  ChainConfig chain;
  double dt = 0.01;
  double t_max = 400.0;
  double target = 0.995;
  std::size_t sample_every = 100;
  std::optional<Axis> axis1;
  std::optional<Axis> axis2;
  ObjectiveKind objective = ObjectiveKind::TimeToReach;
  std::optional<double> objective_time;

  bool operator==(const RunConfig&) const = default;

  Objective make_objective() const {
    if (objective == ObjectiveKind::SinkAtTime) {
      if (!objective_time) throw ConfigError("objective_time", "required for objective=sink_at_time");
      return SinkAtTime{*objective_time};
    }
    return TimeToReach{target, t_max};
  }
};

struct ParsedConfig {
  RunConfig config;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_real(const std::string& key, std::string_view v) {
  double x = 0.0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end || !std::isfinite(x))
    throw ConfigError(key, "expected a real number, got '" + std::string(v) + "'");
  return x;
}

inline long parse_int(const std::string& key, std::string_view v) {
  long x = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end) throw ConfigError(key, "expected an integer, got '" + std::string(v) + "'");
  return x;
}

inline std::vector<double> parse_list(const std::string& key, std::string_view v) {
  std::vector<double> out;
  while (!v.empty()) {
    const auto comma = v.find(',');
    out.push_back(parse_real(key, trim(v.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  if (out.empty()) throw ConfigError(key, "empty value list");
  return out;
}

template <class E>
E parse_choice(const std::string& key, std::string_view v, std::initializer_list<std::pair<const char*, E>> choices) {
  std::string allowed;
  for (const auto& [name, e] : choices) {
    if (v == name) return e;
    allowed += allowed.empty() ? name : std::string("|") + name;
  }
  throw ConfigError(key, "expected one of " + allowed + ", got '" + std::string(v) + "'");
}

inline std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline const char* name_of(Dephasing d) {
  switch (d) {
    case Dephasing::None: return "none";
    case Dephasing::LindbladLike: return "lindblad";
    case Dephasing::UnitaryPhonon: return "unitary";
  }
  return "?";
}

inline const char* name_of(SinkCoupling s) { return s == SinkCoupling::PhotonOfLastCavity ? "photon" : "exciton"; }
inline const char* name_of(DephasingTarget t) { return t == DephasingTarget::PhotonNumber ? "photon" : "exciton"; }
inline const char* name_of(InitialState s) { return s == InitialState::Vacuum ? "vacuum" : "photon1"; }
inline const char* name_of(ObjectiveKind o) { return o == ObjectiveKind::TimeToReach ? "time_to_reach" : "sink_at_time"; }

}  // namespace detail

inline ParsedConfig parse_config(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    std::string_view l = line;
    if (const auto hash = l.find('#'); hash != std::string_view::npos) l = l.substr(0, hash);
    std::istringstream tokens{std::string(l)};
    std::string tok;
    while (tokens >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos || eq == 0) throw ConfigError("", "expected key=value, got '" + tok + "'");
      std::string key = tok.substr(0, eq);
      std::string value(detail::trim(std::string_view(tok).substr(eq + 1)));
      if (value.empty()) throw ConfigError(key, "missing value");
      if (!kv.emplace(key, value).second) throw ConfigError(key, "given more than once");
    }
  }

  static const std::set<std::string> known = {
      "n_atoms",      "k",           "mu",          "g",           "omega_a",       "omega_p",
      "omega_g",      "rate_in",     "rate_out",    "dephasing",   "sink_coupling", "dephasing_target",
      "cavity_loss",  "min_quanta",  "max_quanta",  "phonon_cap",  "initial_state", "axis1_param",
      "axis1_values", "axis2_param", "axis2_values", "objective",  "objective_time", "dt",
      "t_max",        "target",      "sample_every"};
  for (const auto& [key, value] : kv)
    if (!known.contains(key)) throw ConfigError(key, "unknown key");

  auto get = [&](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };
  auto real = [&](const std::string& key, double& field) {
    if (auto v = get(key)) field = detail::parse_real(key, *v);
  };

  ParsedConfig out;
  RunConfig& rc = out.config;
  ChainConfig& c = rc.chain;

  const auto n = get("n_atoms");
  if (!n) throw ConfigError("n_atoms", "required");
  const long n_atoms = detail::parse_int("n_atoms", *n);
  if (n_atoms < 1 || n_atoms > 64) throw ConfigError("n_atoms", "must be in [1, 64]");
  c.n_atoms = static_cast<int>(n_atoms);

  real("k", c.k);
  real("mu", c.mu);
  real("g", c.g);
  real("omega_a", c.omega_a);
  real("omega_p", c.omega_p);
  real("omega_g", c.omega_g);
  real("rate_in", c.rate_in);
  real("rate_out", c.rate_out);
  real("cavity_loss", c.cavity_loss);
  for (const auto& [key, v] : {std::pair<const char*, double>{"g", c.g},
                               {"rate_in", c.rate_in},
                               {"rate_out", c.rate_out},
                               {"cavity_loss", c.cavity_loss}})
    if (v < 0) throw ConfigError(key, "must be >= 0");

  if (auto v = get("dephasing"))
    c.dephasing = detail::parse_choice<Dephasing>(
        "dephasing", *v,
        {{"none", Dephasing::None}, {"lindblad", Dephasing::LindbladLike}, {"unitary", Dephasing::UnitaryPhonon}});
  if (auto v = get("sink_coupling"))
    c.sink_coupling = detail::parse_choice<SinkCoupling>(
        "sink_coupling", *v, {{"photon", SinkCoupling::PhotonOfLastCavity}, {"exciton", SinkCoupling::ExcitonOfLastAtom}});
  if (auto v = get("dephasing_target"))
    c.dephasing_target = detail::parse_choice<DephasingTarget>(
        "dephasing_target", *v,
        {{"photon", DephasingTarget::PhotonNumber}, {"exciton", DephasingTarget::ExcitonNumber}});

  // Input runs default to an empty chain with no quanta limit; no-input runs
  // start from a photon in the first cavity with at most one quantum.
  const bool pumped = c.rate_in > 0;
  c.initial_state = pumped ? InitialState::Vacuum : InitialState::PhotonInFirstCavity;
  if (auto v = get("initial_state"))
    c.initial_state = detail::parse_choice<InitialState>(
        "initial_state", *v, {{"vacuum", InitialState::Vacuum}, {"photon1", InitialState::PhotonInFirstCavity}});

  auto quanta = [&](const std::string& key, int fallback) {
    auto v = get(key);
    if (!v) return fallback;
    const long x = detail::parse_int(key, *v);
    if (x < 0 || x > 1000) throw ConfigError(key, "must be in [0, 1000]");
    return static_cast<int>(x);
  };
  c.window.min_quanta = quanta("min_quanta", 0);
  c.window.max_quanta = quanta("max_quanta", pumped ? natural_max_quanta(c.n_atoms) : 1);
  c.window.phonon_cap = quanta("phonon_cap", 1);
  if (c.window.max_quanta < c.window.min_quanta) throw ConfigError("max_quanta", "must be >= min_quanta");
  if (c.initial_state == InitialState::PhotonInFirstCavity && c.window.max_quanta < 1)
    throw ConfigError("max_quanta", "must be >= 1 for initial_state=photon1");

  try {
    validate(c);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("", e.what());
  }

  real("dt", rc.dt);
  if (!(rc.dt > 0)) throw ConfigError("dt", "must be > 0");
  real("t_max", rc.t_max);
  if (!(rc.t_max > 0)) throw ConfigError("t_max", "must be > 0");
  real("target", rc.target);
  if (!(rc.target > 0 && rc.target < 1)) throw ConfigError("target", "must lie in (0, 1)");
  if (auto v = get("sample_every")) {
    const long s = detail::parse_int("sample_every", *v);
    if (s < 1) throw ConfigError("sample_every", "must be >= 1");
    rc.sample_every = static_cast<std::size_t>(s);
  }

  auto axis = [&](const std::string& prefix) -> std::optional<Axis> {
    const auto param = get(prefix + "_param");
    const auto values = get(prefix + "_values");
    if (!param && !values) return std::nullopt;
    if (!param) throw ConfigError(prefix + "_param", "required when " + prefix + "_values is given");
    if (!values) throw ConfigError(prefix + "_values", "required when " + prefix + "_param is given");
    const auto p = parse_sweep_param(*param);
    if (!p) throw ConfigError(prefix + "_param", "expected one of rate_in|rate_out|k|mu|g, got '" + *param + "'");
    Axis a{*p, detail::parse_list(prefix + "_values", *values)};
    for (std::size_t i = 1; i < a.values.size(); ++i)
      if (!(a.values[i] > a.values[i - 1])) throw ConfigError(prefix + "_values", "must be strictly increasing");
    return a;
  };
  rc.axis1 = axis("axis1");
  rc.axis2 = axis("axis2");
  if (rc.axis2 && !rc.axis1) throw ConfigError("axis1_param", "required when axis2 is given");
  if (rc.axis1 && rc.axis2 && rc.axis1->param == rc.axis2->param)
    throw ConfigError("axis2_param", "must differ from axis1_param");

  if (auto v = get("objective"))
    rc.objective = detail::parse_choice<ObjectiveKind>(
        "objective", *v, {{"time_to_reach", ObjectiveKind::TimeToReach}, {"sink_at_time", ObjectiveKind::SinkAtTime}});
  if (auto v = get("objective_time")) {
    rc.objective_time = detail::parse_real("objective_time", *v);
    if (*rc.objective_time < 0) throw ConfigError("objective_time", "must be >= 0");
  }
  if (rc.objective == ObjectiveKind::SinkAtTime && !rc.objective_time)
    throw ConfigError("objective_time", "required for objective=sink_at_time");

  out.warnings = config_warnings(c);
  if (c.dephasing == Dephasing::UnitaryPhonon && !get("g"))
    out.warnings.insert(out.warnings.begin(), "g not given for dephasing=unitary; defaulting to 0");
  return out;
}

/// Every key written explicitly, in a fixed order, with round-trip precision.
inline std::string serialize(const RunConfig& rc) {
  using detail::format_real;
  const auto& c = rc.chain;
  std::ostringstream o;
  o << "n_atoms=" << c.n_atoms << '\n'
    << "k=" << format_real(c.k) << '\n'
    << "mu=" << format_real(c.mu) << '\n'
    << "g=" << format_real(c.g) << '\n'
    << "omega_a=" << format_real(c.omega_a) << '\n'
    << "omega_p=" << format_real(c.omega_p) << '\n'
    << "omega_g=" << format_real(c.omega_g) << '\n'
    << "rate_in=" << format_real(c.rate_in) << '\n'
    << "rate_out=" << format_real(c.rate_out) << '\n'
    << "dephasing=" << detail::name_of(c.dephasing) << '\n'
    << "sink_coupling=" << detail::name_of(c.sink_coupling) << '\n'
    << "dephasing_target=" << detail::name_of(c.dephasing_target) << '\n'
    << "cavity_loss=" << format_real(c.cavity_loss) << '\n'
    << "min_quanta=" << c.window.min_quanta << '\n'
    << "max_quanta=" << c.window.max_quanta << '\n'
    << "phonon_cap=" << c.window.phonon_cap << '\n'
    << "initial_state=" << detail::name_of(c.initial_state) << '\n'
    << "dt=" << format_real(rc.dt) << '\n'
    << "t_max=" << format_real(rc.t_max) << '\n'
    << "target=" << format_real(rc.target) << '\n'
    << "sample_every=" << rc.sample_every << '\n';
  auto axis = [&](const char* prefix, const std::optional<Axis>& a) {
    if (!a) return;
    o << prefix << "_param=" << to_string(a->param) << '\n' << prefix << "_values=";
    for (std::size_t i = 0; i < a->values.size(); ++i) o << (i ? "," : "") << format_real(a->values[i]);
    o << '\n';
  };
  axis("axis1", rc.axis1);
  axis("axis2", rc.axis2);
  o << "objective=" << detail::name_of(rc.objective) << '\n';
  if (rc.objective_time) o << "objective_time=" << format_real(*rc.objective_time) << '\n';
  return o.str();
}

/// Metadata that accompanies every CSV.  Written as '#' comments followed by
/// the resolved configuration, so parse_config reads a manifest back into the
/// configuration that produced it.
struct RunManifest {
  std::string command;
  RunConfig config;
  std::string tool_version = kToolVersion;
  double wall_seconds = 0.0;
  double max_trace_drift = 0.0;
  double min_eigenvalue = 1.0;
  bool positivity_violated = false;
  std::vector<std::string> warnings;

  std::string to_text() const {
    std::ostringstream o;
    o << "# jchsim run manifest\n"
      << "# command=" << command << '\n'
      << "# tool_version=" << tool_version << '\n'
      << "# wall_seconds=" << detail::format_real(wall_seconds) << '\n'
      << "# max_trace_drift=" << detail::format_real(max_trace_drift) << '\n'
      << "# min_eigenvalue=" << detail::format_real(min_eigenvalue) << '\n'
      << "# positivity_violated=" << (positivity_violated ? 1 : 0) << '\n';
    for (const auto& w : warnings) o << "# warning: " << w << '\n';
    o << serialize(config);
    return o.str();
  }
};

}  // namespace jch
