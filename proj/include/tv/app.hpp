#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <json.hpp>

#include "tv/tv.hpp"

#ifndef TV_VERSION
#define TV_VERSION "0.3.0"
#endif

namespace tv::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

// invalid configuration; always maps to exit code 2
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class KeyKind { Number, Integer, Choice, Flag };

struct KeySpec {
  std::string name;
  KeyKind kind = KeyKind::Number;
  std::string help;
  std::vector<std::string> choices;
};

struct ScenarioSpec {
  std::string name;
  std::string summary;
  std::string example;
  // key -> default; an empty default marks an optional or required key without one
  std::vector<std::pair<std::string, std::string>> keys;
  std::vector<std::string> required;
};

inline const std::vector<KeySpec>& model_keys() {
  static const std::vector<KeySpec> k = {
      {"kappa", KeyKind::Number, "cavity linewidth", {}},
      {"kappa1", KeyKind::Number, "linewidth of the preparation cavity", {}},
      {"kappa2", KeyKind::Number, "linewidth of the readout cavity", {}},
      {"gamma", KeyKind::Number, "mechanical linewidth", {}},
      {"omega_m", KeyKind::Number, "mechanical frequency", {}},
      {"omega", KeyKind::Number, "detection frequency", {}},
      {"C", KeyKind::Number, "cooperativity 4g^2/(kappa gamma); exclusive with g", {}},
      {"g", KeyKind::Number, "coupling rate", {}},
      {"C1", KeyKind::Number, "preparation cooperativity", {}},
      {"C2", KeyKind::Number, "readout cooperativity", {}},
      {"delta_c", KeyKind::Number, "cavity detuning", {}},
      {"mu", KeyKind::Number, "x^2 coefficient", {}},
      {"nu", KeyKind::Number, "p^2 coefficient", {}},
      {"xi", KeyKind::Number, "xp + px coefficient", {}},
      {"n_aux", KeyKind::Number, "ancilla occupation (defaults to n_m)", {}},
      {"conditioning", KeyKind::Choice, "CQNC conditioning",
       {"meter-only", "meter+ancilla", "meter+ancilla-simplified"}},
      {"order", KeyKind::Integer, "Floquet truncation order", {}},
      {"assembly", KeyKind::Choice, "Floquet sideband assembly", {"incoherent", "coherent"}},
      {"alpha", KeyKind::Number, "modulation depth", {}},
      {"alpha1", KeyKind::Number, "preparation modulation depth", {}},
      {"alpha2", KeyKind::Number, "readout modulation depth", {}},
      {"phi", KeyKind::Number, "tweezer phase", {}},
      {"Omega", KeyKind::Number, "modulation frequency (defaults to the QND value)", {}},
      {"omega_tr1", KeyKind::Number, "trap frequency of tweezer 1", {}},
      {"omega_tr2", KeyKind::Number, "trap frequency of tweezer 2", {}},
      {"dual_model", KeyKind::Choice, "dual tweezer evaluation", {"reduced", "full"}},
      {"V0", KeyKind::Number, "prepared variance (otherwise from the preparation steady state)", {}},
      {"prep_g", KeyKind::Number, "preparation coupling (defaults to g)", {}},
      {"prep_alpha", KeyKind::Number, "preparation modulation depth", {}},
      {"shape", KeyKind::Choice, "readout filter", {"exponential", "constant"}},
      {"tau", KeyKind::Number, "pulse duration", {}},
      {"n_m", KeyKind::Number, "mechanical bath occupation", {}},
      {"m_sq_re", KeyKind::Number, "real part of the bath squeezing", {}},
      {"m_sq_im", KeyKind::Number, "imaginary part of the bath squeezing", {}},
      {"n_c", KeyKind::Number, "optical bath occupation", {}},
      {"eta", KeyKind::Number, "detection efficiency", {}},
  };
  return k;
}

inline const std::vector<KeySpec>& control_keys() {
  static const std::vector<KeySpec> k = {
      {"scenario", KeyKind::Choice, "model family",
       {"displacement", "cqnc", "qnd-ideal", "qnd-imperfect", "qnd-floquet", "lev-single", "lev-dual", "lev-pulsed"}},
      {"command", KeyKind::Choice, "subcommand the config belongs to",
       {"sweep", "sql", "threshold", "optimize-frequency", "pulsed"}},
      {"param", KeyKind::Choice, "swept parameter", {}},
      {"grid", KeyKind::Choice, "grid of the swept parameter", {"log", "linear"}},
      {"lo", KeyKind::Number, "lower end of the sweep", {}},
      {"hi", KeyKind::Number, "upper end of the sweep", {}},
      {"n", KeyKind::Integer, "number of sweep points", {}},
      {"param2", KeyKind::Choice, "second (inner) swept parameter", {}},
      {"grid2", KeyKind::Choice, "grid of the second parameter", {"log", "linear"}},
      {"lo2", KeyKind::Number, "lower end of the second sweep", {}},
      {"hi2", KeyKind::Number, "upper end of the second sweep", {}},
      {"n2", KeyKind::Integer, "number of points of the second sweep", {}},
      {"optimize_frequency", KeyKind::Flag, "minimize V_c over the detection frequency", {}},
      {"omega_lo", KeyKind::Number, "lower frequency bound", {}},
      {"omega_hi", KeyKind::Number, "upper frequency bound", {}},
      {"omega_n", KeyKind::Integer, "frequency grid points", {}},
      {"opt_param", KeyKind::Choice, "parameter minimized by sql (default C)", {}},
      {"opt_lo", KeyKind::Number, "lower bound for sql", {}},
      {"opt_hi", KeyKind::Number, "upper bound for sql", {}},
      {"opt_n", KeyKind::Integer, "grid points for sql", {}},
      {"target", KeyKind::Choice, "thresholded quantity", {"Vc", "Tsum"}},
      {"level", KeyKind::Number, "threshold level", {}},
      {"inner", KeyKind::Choice, "evaluation inside threshold", {"none", "sql"}},
      {"rel_tol", KeyKind::Number, "relative tolerance of refinement", {}},
      {"format", KeyKind::Choice, "output format", {"csv", "json"}},
  };
  return k;
}

inline const std::vector<std::pair<std::string, std::string>>& bath_defaults(bool with_eta) {
  static const std::vector<std::pair<std::string, std::string>> full = {
      {"n_m", "1"}, {"m_sq_re", "0"}, {"m_sq_im", "0"}, {"n_c", "0"}, {"eta", "1"}};
  static const std::vector<std::pair<std::string, std::string>> no_eta(full.begin(), full.end() - 1);
  return with_eta ? full : no_eta;
}

inline std::vector<ScenarioSpec> build_scenarios() {
  auto with_bath = [](ScenarioSpec s, bool eta) {
    for (const auto& kv : bath_defaults(eta)) s.keys.push_back(kv);
    return s;
  };
  std::vector<ScenarioSpec> v;
  v.push_back(with_bath({"displacement", "position readout of a mechanical oscillator",
                         "tv sweep --scenario displacement --param C --log 1e-3 1e4 --n 200 --optimize-frequency",
                         {{"kappa", "10"}, {"gamma", "0.01"}, {"omega_m", "1"}, {"C", ""}, {"g", ""}, {"omega", ""}},
                         {"C|g"}},
                        true));
  v.push_back(with_bath({"cqnc", "coherent quantum noise cancellation with a negative-mass ancilla",
                         "tv optimize-frequency --scenario cqnc --C 1e8 --omega-lo 1e-3 --omega-hi 1e3",
                         {{"kappa", "10"},
                          {"gamma", "0.01"},
                          {"omega_m", "1"},
                          {"C", ""},
                          {"g", ""},
                          {"omega", ""},
                          {"n_aux", ""},
                          {"conditioning", "meter+ancilla"}},
                         {"C|g"}},
                        true));
  v.push_back(with_bath({"qnd-ideal", "ideal quantum nondemolition readout",
                         "tv sweep --scenario qnd-ideal --param C --log 1e-3 1e3 --n 200 --n-m 1",
                         {{"kappa", "10"}, {"gamma", "0.01"}, {"C", ""}, {"g", ""}, {"omega", "0"}},
                         {"C|g"}},
                        true));
  v.push_back(with_bath({"qnd-imperfect", "QND readout with detuning and quadratic mechanical terms",
                         "tv sql --scenario qnd-imperfect --gamma 1 --nu 0.1",
                         {{"kappa", "10"},
                          {"gamma", "0.01"},
                          {"C", ""},
                          {"g", ""},
                          {"omega", "0"},
                          {"delta_c", "0"},
                          {"mu", "0"},
                          {"nu", "0"},
                          {"xi", "0"}},
                         {"C|g"}},
                        true));
  v.push_back(with_bath({"qnd-floquet", "QND readout with counter-rotating terms (Floquet sidebands)",
                         "tv sweep --scenario qnd-floquet --kappa 0.5 --param C --log 1e-2 1e2 --n 100",
                         {{"kappa", "0.5"},
                          {"gamma", "0.01"},
                          {"omega_m", "1"},
                          {"C", ""},
                          {"g", ""},
                          {"omega", "0"},
                          {"order", "1"},
                          {"assembly", "incoherent"}},
                         {"C|g"}},
                        true));
  v.push_back(with_bath({"lev-single", "single-tweezer coherent-scattering QND readout",
                         "tv sweep --scenario lev-single --param g --log 1e-6 1e-3 --n 50 --alpha 0.2",
                         {{"kappa", "1"},
                          {"gamma", "1e-9"},
                          {"omega_m", "1"},
                          {"g", ""},
                          {"alpha", "0.2"},
                          {"phi", "0"},
                          {"Omega", ""},
                          {"omega", "1e-3"}},
                         {"g"}},
                        true));
  v.push_back(with_bath({"lev-dual", "dual-tweezer preparation and QND readout",
                         "tv sweep --scenario lev-dual --param C1 --log 1e4 1e9 --n 40 --param2 C2 --log2 1e4 1e9 "
                         "--n2 40 --n-m 1e7",
                         {{"kappa1", "1"},
                          {"kappa2", "1"},
                          {"gamma", "1e-9"},
                          {"omega_m", "1"},
                          {"C1", ""},
                          {"C2", ""},
                          {"alpha1", "0.2"},
                          {"alpha2", "0.2"},
                          {"omega_tr1", ""},
                          {"omega_tr2", ""},
                          {"omega", "0"},
                          {"dual_model", "reduced"}},
                         {"C1", "C2"}},
                        false));
  v.push_back(with_bath({"lev-pulsed", "pulsed readout after dissipative preparation",
                         "tv pulsed --scenario lev-pulsed --param tau --log 1e-2 1e3 --n 120 --n-m 1e7",
                         {{"kappa", "1"},
                          {"gamma", "1e-9"},
                          {"omega_m", "1"},
                          {"g", "0.6"},
                          {"alpha", "0.6"},
                          {"V0", ""},
                          {"prep_g", ""},
                          {"prep_alpha", "0.2"},
                          {"shape", "exponential"},
                          {"tau", ""}},
                         {"tau"}},
                        false));
  return v;
}

inline const std::vector<ScenarioSpec>& scenarios() {
  static const std::vector<ScenarioSpec> s = build_scenarios();
  return s;
}

inline const ScenarioSpec* find_scenario(const std::string& name) {
  for (const auto& s : scenarios())
    if (s.name == name) return &s;
  return nullptr;
}

inline const KeySpec* find_key(const std::string& name) {
  for (const auto* list : {&model_keys(), &control_keys()})
    for (const auto& k : *list)
      if (k.name == name) return &k;
  return nullptr;
}

inline bool scenario_has(const ScenarioSpec& s, const std::string& key) {
  return std::any_of(s.keys.begin(), s.keys.end(), [&](const auto& kv) { return kv.first == key; });
}

using Config = std::map<std::string, std::string>;

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// "key = value" lines; '#' starts a comment, except that "#@" lines of a previous
// output header are read back as settings
inline Config parse_config(std::istream& in, const std::string& origin) {
  Config cfg;
  std::string line;
  int lineno = 0;
  bool output_file = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string body = line;
    if (lineno == 1 && line.rfind("# tv ", 0) == 0) output_file = true;
    if (body.rfind("#@", 0) == 0) {
      body = body.substr(2);
    } else {
      if (output_file && !body.empty() && body[0] != '#') continue;
      body = body.substr(0, body.find('#'));
    }
    body = trim(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(body.substr(0, eq)), value = trim(body.substr(eq + 1));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": missing key");
    if (cfg.count(key)) throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    cfg[key] = value;
  }
  return cfg;
}

inline Config load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(f, path);
}

inline double parse_number(const std::string& key, const std::string& text) {
  const char* s = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(s, &end);
  if (text.empty() || end == s || *end != '\0')
    throw ConfigError("key '" + key + "': expected a number, got '" + text + "'");
  return v;
}

inline int parse_integer(const std::string& key, const std::string& text) {
  const double v = parse_number(key, text);
  if (v != std::floor(v) || std::abs(v) > 1e9)
    throw ConfigError("key '" + key + "': expected an integer, got '" + text + "'");
  return static_cast<int>(v);
}

inline bool parse_flag(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + text + "'");
}

// typed read access; every failure names the key
class Params {
 public:
  explicit Params(Config c) : cfg_(std::move(c)) {}

  const Config& config() const { return cfg_; }
  bool has(const std::string& k) const { return cfg_.count(k) > 0; }
  void set(const std::string& k, const std::string& v) { cfg_[k] = v; }

  std::string str(const std::string& k) const {
    auto it = cfg_.find(k);
    if (it == cfg_.end()) throw ConfigError("missing required key '" + k + "'");
    return it->second;
  }
  std::string str(const std::string& k, const std::string& dflt) const { return has(k) ? str(k) : dflt; }
  double num(const std::string& k) const { return parse_number(k, str(k)); }
  double num(const std::string& k, double dflt) const { return has(k) ? num(k) : dflt; }
  std::optional<double> opt(const std::string& k) const {
    if (!has(k)) return std::nullopt;
    return num(k);
  }
  int integer(const std::string& k, int dflt) const { return has(k) ? parse_integer(k, str(k)) : dflt; }
  bool flag(const std::string& k) const { return has(k) && parse_flag(k, str(k)); }

 private:
  Config cfg_;
};

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline const std::vector<std::string>& range_keys() {
  static const std::vector<std::string> k = {"param", "param2", "opt_param"};
  return k;
}

// rejects unknown keys, keys foreign to the scenario, and malformed values
inline const ScenarioSpec& validate_config(const Config& cfg, const std::string& command) {
  for (const auto& [k, v] : cfg)
    if (!find_key(k)) throw ConfigError("unknown key '" + k + "'");
  auto it = cfg.find("scenario");
  if (it == cfg.end()) throw ConfigError("missing required key 'scenario'");
  const ScenarioSpec* sc = find_scenario(it->second);
  if (!sc) throw ConfigError("key 'scenario': unknown scenario '" + it->second + "'");
  auto c = cfg.find("command");
  if (c != cfg.end() && c->second != command)
    throw ConfigError("key 'command': config is for '" + c->second + "', not '" + command + "'");

  for (const auto& [k, v] : cfg) {
    const KeySpec* ks = find_key(k);
    const bool is_model = std::any_of(model_keys().begin(), model_keys().end(),
                                      [&](const KeySpec& m) { return m.name == k; });
    if (is_model && !scenario_has(*sc, k))
      throw ConfigError("key '" + k + "' does not apply to scenario '" + sc->name + "'");
    const bool is_range = std::find(range_keys().begin(), range_keys().end(), k) != range_keys().end();
    if (is_range) {
      const KeySpec* target = find_key(v);
      if (!target || target->kind != KeyKind::Number || !scenario_has(*sc, v))
        throw ConfigError("key '" + k + "': '" + v + "' is not a numeric parameter of scenario '" + sc->name + "'");
      continue;
    }
    switch (ks->kind) {
      case KeyKind::Number: parse_number(k, v); break;
      case KeyKind::Integer: parse_integer(k, v); break;
      case KeyKind::Flag: parse_flag(k, v); break;
      case KeyKind::Choice:
        if (std::find(ks->choices.begin(), ks->choices.end(), v) == ks->choices.end())
          throw ConfigError("key '" + k + "': invalid value '" + v + "'");
        break;
    }
  }
  if (cfg.count("C") && cfg.count("g")) throw ConfigError("keys 'C' and 'g' are mutually exclusive");
  return *sc;
}

inline Config with_defaults(Config cfg, const ScenarioSpec& sc) {
  for (const auto& [k, d] : sc.keys)
    if (!d.empty() && !cfg.count(k)) cfg[k] = d;
  return cfg;
}

inline BathSpec bath_from(const Params& P) {
  BathSpec b;
  b.n_m = P.num("n_m", 0.0);
  b.m_sq = cplx(P.num("m_sq_re", 0.0), P.num("m_sq_im", 0.0));
  b.n_c = P.num("n_c", 0.0);
  b.eta = P.num("eta", 1.0);
  try {
    b.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("bath: ") + e.what());
  }
  return b;
}

inline Coupling coupling_from(const Params& P) {
  if (P.has("C") && P.has("g")) throw ConfigError("keys 'C' and 'g' are mutually exclusive");
  if (P.has("C")) {
    const double C = P.num("C");
    if (C < 0.0) throw ConfigError("key 'C': cooperativity must be nonnegative");
    return Coupling::from_C(C);
  }
  if (P.has("g")) return Coupling::from_g(P.num("g"));
  throw ConfigError("missing required key 'C' (or 'g')");
}

inline Conditioning conditioning_from(const std::string& s) {
  if (s == "meter-only") return Conditioning::MeterOnly;
  if (s == "meter+ancilla-simplified") return Conditioning::MeterAncillaSimplified;
  return Conditioning::MeterAncilla;
}

inline PulsedParams pulsed_params(const Params& P) {
  PulsedParams p;
  p.kappa = P.num("kappa");
  p.gamma = P.num("gamma");
  p.omega_m = P.num("omega_m");
  p.g = P.num("g");
  p.alpha = P.num("alpha");
  p.bath = bath_from(P);
  p.shape = P.str("shape") == "constant" ? PulseShape::Constant : PulseShape::Exponential;
  if (P.has("V0")) {
    p.V0 = P.num("V0");
  } else {
    PreparationParams pp{p.kappa, p.gamma, p.omega_m, P.num("prep_g", p.g), P.num("prep_alpha")};
    p.V0 = prepare_state_lyapunov(pp, p.bath).V0;
  }
  return p;
}

using FrequencyResponse = std::function<MeasurementFigures(double)>;

// model built once per parameter point, evaluated at any detection frequency
inline FrequencyResponse frequency_response(const Params& P) {
  const std::string s = P.str("scenario");
  const BathSpec bath = bath_from(P);
  if (s == "displacement" || s == "qnd-ideal") {
    const double wm = s == "displacement" ? P.num("omega_m") : 0.0;
    auto m = displacement_model({P.num("kappa"), P.num("gamma"), wm, coupling_from(P)}, bath);
    return [m](double w) { return evaluate(m, w); };
  }
  if (s == "cqnc") {
    CqncParams p{P.num("kappa"), P.num("gamma"), P.num("omega_m"), coupling_from(P), P.opt("n_aux")};
    auto m = cqnc_model(p, bath);
    const Conditioning c = conditioning_from(P.str("conditioning"));
    return [m, c](double w) { return evaluate(m, w, c, kCqncAncilla); };
  }
  if (s == "qnd-imperfect") {
    ImperfectQndParams p;
    p.kappa = P.num("kappa");
    p.gamma = P.num("gamma");
    p.coupling = coupling_from(P);
    p.delta_c = P.num("delta_c");
    p.mu = P.num("mu");
    p.nu = P.num("nu");
    p.xi = P.num("xi");
    auto m = imperfect_qnd_model(p, bath);
    return [m](double w) { return evaluate(m, w); };
  }
  if (s == "qnd-floquet") {
    FloquetParams p{P.num("kappa"), P.num("gamma"), P.num("omega_m"), coupling_from(P), P.integer("order", 1)};
    const auto a = P.str("assembly") == "coherent" ? FloquetAssembly::Coherent : FloquetAssembly::Incoherent;
    return [p, bath, a](double w) { return floquet_metrics(p, bath, w, a); };
  }
  if (s == "lev-single") {
    TweezerParams p;
    p.kappa = P.num("kappa");
    p.gamma = P.num("gamma");
    p.omega_m = P.num("omega_m");
    p.g = P.num("g");
    p.alpha = P.num("alpha");
    p.phi = P.num("phi");
    p.Omega = P.opt("Omega");
    auto m = single_tweezer_qnd_model(p, bath);
    return [m](double w) { return evaluate(m, w); };
  }
  if (s == "lev-dual") {
    DualTweezerParams p;
    p.kappa1 = P.num("kappa1");
    p.kappa2 = P.num("kappa2");
    p.gamma = P.num("gamma");
    p.omega_m = P.num("omega_m");
    p.alpha1 = P.num("alpha1");
    p.alpha2 = P.num("alpha2");
    p.omega_tr1 = P.opt("omega_tr1");
    p.omega_tr2 = P.opt("omega_tr2");
    const double C1 = P.num("C1"), C2 = P.num("C2");
    if (C1 < 0.0 || C2 < 0.0) throw ConfigError("keys 'C1', 'C2': cooperativities must be nonnegative");
    p.set_C1(C1);
    p.set_C2(C2);
    p.validate();
    if (P.str("dual_model") == "full") {
      auto m = dual_tweezer_model(p, bath);
      return [m](double w) { return evaluate(m, w); };
    }
    return [p, bath](double w) { return reduced_metrics(p, bath, w); };
  }
  throw ConfigError("scenario '" + s + "' has no frequency response");
}

inline double default_frequency(const Params& P) {
  const std::string s = P.str("scenario");
  if (P.has("omega")) return P.num("omega");
  if (s == "displacement" || s == "cqnc") return P.num("omega_m");
  return 0.0;
}

struct PointResult {
  MeasurementFigures figures;
  std::optional<bool> at_boundary;
  std::optional<double> argmin;
};

// figures at one parameter point, optionally minimized over frequency
inline PointResult evaluate_point(const Params& P) {
  if (P.str("scenario") == "lev-pulsed") {
    if (P.flag("optimize_frequency")) throw ConfigError("key 'optimize_frequency' does not apply to pulsed readout");
    const double tau = P.num("tau");
    if (!(tau > 0.0)) throw ConfigError("key 'tau': pulse duration must be positive");
    return {pulsed_metrics(pulsed_params(P), tau), std::nullopt, std::nullopt};
  }
  const FrequencyResponse resp = frequency_response(P);
  if (!P.flag("optimize_frequency")) return {resp(default_frequency(P)), std::nullopt, std::nullopt};
  const double wm = P.has("omega_m") ? P.num("omega_m") : 1.0;
  const double lo = P.num("omega_lo", 1e-3 * wm), hi = P.num("omega_hi", 1e3 * wm);
  const int n = P.integer("omega_n", 200);
  const GridKind kind = lo > 0.0 ? GridKind::Log : GridKind::Linear;
  try {
    const Optimum o = minimize_vc_over_frequency(resp, lo, hi, n, kind);
    return {o.figures, o.at_boundary, std::nullopt};
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidArgument) throw ConfigError(std::string("frequency search: ") + e.what());
    throw;
  }
}

inline SweepSpec range_spec(const Params& P, const std::string& suffix, const std::string& param_key) {
  SweepSpec s;
  s.param = P.str(param_key);
  s.kind = P.str("grid" + suffix, "log") == "linear" ? GridKind::Linear : GridKind::Log;
  s.lo = P.num("lo" + suffix);
  s.hi = P.num("hi" + suffix);
  s.count = P.integer("n" + suffix, 200);
  s.rel_tol = P.num("rel_tol", 1e-6);
  try {
    s.validate();
  } catch (const Error& e) {
    throw ConfigError("sweep of '" + s.param + "': " + e.what());
  }
  return s;
}

// minimum of V_c over opt_param (default C) at the current point
inline Optimum sql_point(const Params& P) {
  SweepSpec s;
  s.param = P.str("opt_param", "C");
  s.kind = GridKind::Log;
  s.lo = P.num("opt_lo", 1e-4);
  s.hi = P.num("opt_hi", 1e4);
  s.count = P.integer("opt_n", 200);
  s.rel_tol = P.num("rel_tol", 1e-6);
  try {
    s.validate();
  } catch (const Error& e) {
    throw ConfigError("sql range: " + std::string(e.what()));
  }
  Config base = P.config();
  if (s.param == "C") base.erase("g");
  if (s.param == "g") base.erase("C");
  auto eval = [&](double x) {
    Config c = base;
    c[s.param] = format_number(x);
    return evaluate_point(Params(c)).figures;
  };
  try {
    return minimize_vc(eval, s);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidArgument) throw ConfigError(std::string("sql: ") + e.what());
    throw;
  }
}

using Cell = std::variant<double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

inline int thread_count() {
  if (const char* s = std::getenv("TV_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(s, &end, 10);
    if (end != s && *end == '\0' && n >= 1 && n <= 1024) return static_cast<int>(n);
    throw ConfigError("TV_THREADS must be an integer in [1, 1024], got '" + std::string(s) + "'");
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

// rows land in pre-sized slots; the lowest failing index is reported
template <class F>
std::vector<std::vector<Cell>> compute_rows(std::size_t n, F row, int threads) {
  std::vector<std::vector<Cell>> out(n);
  std::vector<std::exception_ptr> err(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = row(i);
      } catch (...) {
        err[i] = std::current_exception();
      }
    }
  };
  const int t = static_cast<int>(std::min<std::size_t>(std::max(threads, 1), std::max<std::size_t>(n, 1)));
  std::vector<std::thread> pool;
  for (int k = 1; k < t; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& e : err)
    if (e) std::rethrow_exception(e);
  return out;
}

inline std::vector<std::string> figure_columns() {
  return {"omega", "Vc", "Ts", "Tm", "Ts+Tm", "ns_eq", "nm_eq", "regime"};
}

inline void append_figures(std::vector<Cell>& r, const MeasurementFigures& f) {
  r.insert(r.end(), {f.omega, f.Vc, f.Ts, f.Tm, f.T_sum(), f.ns_eq, f.nm_eq, std::string(to_string(f.regime))});
}

struct Grid {
  std::vector<std::string> names;
  std::vector<std::vector<double>> points;  // one entry per row
};

inline Grid build_grid(const Params& P) {
  Grid g;
  if (!P.has("param")) {
    g.points.emplace_back();
    return g;
  }
  const SweepSpec s1 = range_spec(P, "", "param");
  g.names.push_back(s1.param);
  std::vector<double> x2;
  if (P.has("param2")) {
    const SweepSpec s2 = range_spec(P, "2", "param2");
    if (s2.param == s1.param) throw ConfigError("key 'param2': must differ from 'param'");
    g.names.push_back(s2.param);
    x2 = s2.points();
  }
  for (double a : s1.points()) {
    if (x2.empty()) {
      g.points.push_back({a});
    } else {
      for (double b : x2) g.points.push_back({a, b});
    }
  }
  return g;
}

inline Params at_point(const Params& P, const Grid& g, std::size_t i) {
  Config c = P.config();
  for (std::size_t k = 0; k < g.names.size(); ++k) {
    const std::string& name = g.names[k];
    if (name == "C") c.erase("g");
    if (name == "g") c.erase("C");
    c[name] = format_number(g.points[i][k]);
  }
  return Params(c);
}

inline Table run_sweep(const Params& P, int threads) {
  const Grid g = build_grid(P);
  Table t;
  t.columns = g.names;
  const bool opt = P.flag("optimize_frequency");
  for (const auto& c : figure_columns()) t.columns.push_back(c);
  if (opt) t.columns.push_back("omega_at_boundary");
  t.rows = compute_rows(g.points.size(), [&](std::size_t i) {
    const PointResult r = evaluate_point(at_point(P, g, i));
    std::vector<Cell> row(g.points[i].begin(), g.points[i].end());
    append_figures(row, r.figures);
    if (opt) row.push_back(static_cast<double>(r.at_boundary.value_or(false)));
    return row;
  }, threads);
  return t;
}

inline Table run_sql(const Params& P, int threads) {
  const Grid g = build_grid(P);
  const std::string op = P.str("opt_param", "C");
  for (const auto& n : g.names)
    if (n == op) throw ConfigError("key 'param': cannot sweep the minimized parameter '" + op + "'");
  Table t;
  t.columns = g.names;
  t.columns.push_back(op + "_opt");
  for (const auto& c : figure_columns()) t.columns.push_back(c);
  t.columns.push_back("at_boundary");
  t.rows = compute_rows(g.points.size(), [&](std::size_t i) {
    const Optimum o = sql_point(at_point(P, g, i));
    std::vector<Cell> row(g.points[i].begin(), g.points[i].end());
    row.push_back(o.arg);
    append_figures(row, o.figures);
    row.push_back(static_cast<double>(o.at_boundary));
    return row;
  }, threads);
  return t;
}

inline Table run_threshold(const Params& P, int threads) {
  const SweepSpec s = range_spec(P, "", "param");
  const std::string target = P.str("target", "Vc");
  const double level = P.num("level", target == "Vc" ? 0.5 : 1.0);
  const bool sql = P.str("inner", "none") == "sql";
  Grid outer;
  if (P.has("param2")) {
    const SweepSpec s2 = range_spec(P, "2", "param2");
    if (s2.param == s.param) throw ConfigError("key 'param2': must differ from 'param'");
    outer.names.push_back(s2.param);
    for (double x : s2.points()) outer.points.push_back({x});
  } else {
    outer.points.emplace_back();
  }
  Table t;
  t.columns = outer.names;
  t.columns.insert(t.columns.end(), {s.param + "_cross", "target", "level"});
  for (const auto& c : figure_columns()) t.columns.push_back(c);
  t.rows = compute_rows(outer.points.size(), [&](std::size_t i) {
    const Params base = at_point(P, outer, i);
    auto figures_at = [&](double x) {
      Grid one{{s.param}, {{x}}};
      const Params Q = at_point(base, one, 0);
      return sql ? sql_point(Q).figures : evaluate_point(Q).figures;
    };
    auto curve = [&](double x) {
      const MeasurementFigures f = figures_at(x);
      return target == "Vc" ? f.Vc : f.T_sum();
    };
    const double x = find_threshold(curve, level, s.lo, s.hi, s.rel_tol, s.kind);
    std::vector<Cell> row(outer.points[i].begin(), outer.points[i].end());
    row.insert(row.end(), {x, target, level});
    append_figures(row, figures_at(x));
    return row;
  }, threads);
  return t;
}

inline std::string cell_text(const Cell& c) {
  if (const double* d = std::get_if<double>(&c)) return format_number(*d);
  return std::get<std::string>(c);
}

inline std::string render_csv(const Table& t, const std::string& command, const Config& echoed) {
  std::ostringstream os;
  os << "# tv " << TV_VERSION << "\n";
  os << "#@ command = " << command << "\n";
  for (const auto& [k, v] : echoed)
    if (k != "command") os << "#@ " << k << " = " << v << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << "\n";
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << cell_text(r[i]);
    os << "\n";
  }
  return os.str();
}

// numbers are written with 17 significant digits; non-finite values become null
inline std::string render_json(const Table& t) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    os << (i ? ",\n " : "\n ") << "{";
    for (std::size_t j = 0; j < t.columns.size(); ++j) {
      os << (j ? ", " : "") << nlohmann::json(t.columns[j]).dump() << ": ";
      const Cell& c = t.rows[i][j];
      if (const double* d = std::get_if<double>(&c)) {
        os << (std::isfinite(*d) ? format_number(*d) : "null");
      } else {
        os << nlohmann::json(std::get<std::string>(c)).dump();
      }
    }
    os << "}";
  }
  os << (t.rows.empty() ? "]\n" : "\n]\n");
  return os.str();
}

// validates, fills defaults, evaluates and renders
inline std::string run(const std::string& command, const Config& raw, int threads) {
  const ScenarioSpec& sc = validate_config(raw, command);
  if (command == "pulsed" && sc.name != "lev-pulsed")
    throw ConfigError("key 'scenario': the pulsed command needs scenario 'lev-pulsed'");
  if (command != "pulsed" && command != "sweep" && sc.name == "lev-pulsed")
    throw ConfigError("key 'scenario': use the pulsed or sweep command for 'lev-pulsed'");
  const Config cfg = with_defaults(raw, sc);
  Params P(cfg);
  if (command == "optimize-frequency") P.set("optimize_frequency", "true");
  if (command == "pulsed" && !P.has("param") && !P.has("tau")) throw ConfigError("missing required key 'tau' (or a sweep)");

  Table t;
  if (command == "sweep" || command == "optimize-frequency" || command == "pulsed") {
    t = run_sweep(P, threads);
  } else if (command == "sql") {
    t = run_sql(P, threads);
  } else if (command == "threshold") {
    t = run_threshold(P, threads);
  } else {
    throw ConfigError("unknown command '" + command + "'");
  }
  return P.str("format", "csv") == "json" ? render_json(t) : render_csv(t, command, cfg);
}

}  // namespace tv::app
