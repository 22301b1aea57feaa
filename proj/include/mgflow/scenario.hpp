// Scenario files: field specifications, ansatz coefficients, grids,
// tolerances, requested checks and trajectory requests.
//
// Field specs:
//   3.5                                   constant
//   {"modes": [{"m":1,"n":0,"re":0.5,"im":0}]}  trigonometric table
//   {"preset": "affine", "c0":0, "cx":0, "cy":-1}
//   {"preset": "random_trig", "modes":5, "amplitude":0.2, "offset":2, "stream":3}
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mgflow/ansatz.hpp"
#include "mgflow/fields.hpp"
#include "mgflow/flow.hpp"

namespace mgflow {

inline constexpr int kSchemaVersion = 1;

/// Malformed or schema-invalid scenario input.
class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Settings shared by every preset constructor.
struct FieldContext {
  TorusGeometry geometry;
  std::uint64_t seed = 0;
};

/// Random real trigonometric polynomial: `modes` distinct modes with
/// |m|, |n| <= max_wavenumber in a half-plane, coefficients uniform in
/// [−amplitude, amplitude], plus a constant offset.
inline Field random_trig_field(std::mt19937_64& rng, int modes, double amplitude, double offset,
                               TorusGeometry g = {}, int max_wavenumber = 3) {
  std::uniform_int_distribution<int> wave(-max_wavenumber, max_wavenumber);
  std::uniform_real_distribution<double> coef(-amplitude, amplitude);
  std::set<std::pair<int, int>> used;
  std::vector<FourierMode> table;
  const int available = 2 * max_wavenumber * (max_wavenumber + 1);
  while (static_cast<int>(table.size()) < std::min(modes, available)) {
    int m = wave(rng), n = wave(rng);
    if (m < 0 || (m == 0 && n <= 0)) continue;  // half-plane, excludes (0,0)
    if (!used.insert({m, n}).second) continue;
    const double re = coef(rng), im = coef(rng);
    table.push_back({m, n, {re, im}});
  }
  table.push_back({0, 0, {offset, 0.0}});
  return make_trig_field(table, g);
}

using PresetBuilder = std::function<Field(const nlohmann::json&, const FieldContext&)>;

namespace detail {

inline double num(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ScenarioError(std::string("field parameter '") + key + "' must be a number");
  return j.at(key).get<double>();
}

inline std::map<std::string, PresetBuilder>& preset_registry() {
  static std::map<std::string, PresetBuilder> reg = {
      {"constant",
       [](const nlohmann::json& j, const FieldContext& c) { return Field::constant(num(j, "value", 0.0), c.geometry); }},
      {"affine",
       [](const nlohmann::json& j, const FieldContext& c) {
         return affine_field(num(j, "c0", 0.0), num(j, "cx", 0.0), num(j, "cy", 0.0), c.geometry);
       }},
      {"random_trig",
       [](const nlohmann::json& j, const FieldContext& c) {
         const auto stream = static_cast<std::uint64_t>(num(j, "stream", 0.0));
         std::seed_seq seq{c.seed, stream, std::uint64_t{0x6d67666c6f77}};
         std::mt19937_64 rng(seq);
         return random_trig_field(rng, static_cast<int>(num(j, "modes", 5.0)), num(j, "amplitude", 0.2),
                                  num(j, "offset", 0.0), c.geometry, static_cast<int>(num(j, "max_wavenumber", 3.0)));
       }},
  };
  return reg;
}

}  // namespace detail

inline std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [k, _] : detail::preset_registry()) out.push_back(k);
  return out;
}

/// Parses a coefficient table [{m, n, re, im}, ...].
inline std::vector<FourierMode> parse_mode_table(const nlohmann::json& j) {
  if (!j.is_array()) throw ScenarioError("mode table must be an array");
  std::vector<FourierMode> out;
  for (const auto& e : j) {
    if (!e.is_object() || !e.contains("m") || !e.contains("n")) throw ScenarioError("mode record needs m and n");
    if (!e.at("m").is_number_integer() || !e.at("n").is_number_integer()) {
      throw ScenarioError("mode indices must be integers");
    }
    out.push_back({e.at("m").get<int>(), e.at("n").get<int>(), {detail::num(e, "re", 0.0), detail::num(e, "im", 0.0)}});
  }
  return out;
}

inline nlohmann::json mode_table_to_json(const std::vector<FourierMode>& modes) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& md : modes) arr.push_back({{"m", md.m}, {"n", md.n}, {"re", md.coeff.real()}, {"im", md.coeff.imag()}});
  return arr;
}

inline Field parse_field(const nlohmann::json& j, const FieldContext& ctx) {
  if (j.is_number()) return Field::constant(j.get<double>(), ctx.geometry);
  if (j.is_array()) return make_trig_field(parse_mode_table(j), ctx.geometry);
  if (!j.is_object()) throw ScenarioError("field spec must be a number, a mode table or an object");
  if (j.contains("modes") && j.at("modes").is_array()) {
    return make_trig_field(parse_mode_table(j.at("modes")), ctx.geometry);
  }
  if (!j.contains("preset") || !j.at("preset").is_string()) throw ScenarioError("field spec needs 'modes' or 'preset'");
  const auto name = j.at("preset").get<std::string>();
  auto& reg = detail::preset_registry();
  auto it = reg.find(name);
  if (it == reg.end()) throw ScenarioError("unknown field preset '" + name + "'");
  return it->second(j, ctx);
}

struct TrajectoryRequest {
  std::string name;
  PhaseState initial;
  double t_end = 1.0;
  StepControl control;
  std::vector<std::string> observables;  // beyond H and F
  std::optional<double> reference_B;     // closed form for Λ ≡ 1, Ω ≡ B
  std::optional<double> drift_tolerance;  // on relative drift of F
};

struct Scenario {
  int schema_version = kSchemaVersion;
  std::string name;
  TorusGeometry geometry;
  std::uint64_t seed = 0;
  int degree = 1;
  std::optional<Ansatz> ansatz;
  std::optional<Field> lambda;
  std::optional<ScalarEvaluator> omega;
  bool omega_derived = false;
  bool omega_periodic = true;
  int nx = 64, ny = 64;
  double tolerance = 1e-10;
  std::vector<std::string> checks;
  std::vector<TrajectoryRequest> trajectories;
  std::vector<std::vector<double>> assemble_points;
};

inline const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names = {"stationarity", "harmonics",         "constraint",   "conservation",
                                                 "certificate",  "omega_equivalence", "omega_consistency"};
  return names;
}

inline const std::vector<std::string>& known_observables() {
  static const std::vector<std::string> names = {"control_y_cos_phi"};
  return names;
}

/// y + cos φ: not conserved by any flow considered here; a control.
inline Observable control_observable() {
  return {"control_y_cos_phi", [](const PhaseState& s) { return s.y + std::cos(s.phi); }};
}

namespace detail {

inline TrajectoryRequest parse_trajectory(const nlohmann::json& j, std::size_t index) {
  if (!j.is_object()) throw ScenarioError("trajectory request must be an object");
  TrajectoryRequest t;
  t.name = j.value("name", "trajectory" + std::to_string(index));
  const auto& init = j.at("initial");
  if (!init.is_array() || init.size() != 3) throw ScenarioError("trajectory 'initial' must be [x, y, phi]");
  t.initial = PhaseState(init[0].get<double>(), init[1].get<double>(), init[2].get<double>());
  t.t_end = j.at("t_end").get<double>();
  if (!(t.t_end > 0.0)) throw ScenarioError("trajectory t_end must be positive");
  t.control.output_dt = num(j, "output_dt", 1e-2);
  if (j.contains("adaptive")) {
    t.control = StepControl::adaptive(j.at("adaptive").get<double>(), t.control.output_dt);
  } else {
    t.control.dt = num(j, "dt", 1e-2);
  }
  if (!(t.control.dt > 0.0) || !(t.control.atol > 0.0) || !(t.control.output_dt > 0.0)) {
    throw ScenarioError("trajectory step settings must be positive");
  }
  for (const auto& o : j.value("observables", nlohmann::json::array())) {
    const auto name = o.get<std::string>();
    const auto& known = known_observables();
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      throw ScenarioError("unknown observable '" + name + "'");
    }
    t.observables.push_back(name);
  }
  if (j.contains("reference")) {
    const auto& r = j.at("reference");
    if (r.value("kind", "") != "uniform_field") throw ScenarioError("unknown trajectory reference kind");
    t.reference_B = num(r, "B", 0.0);
  }
  if (j.contains("drift_tolerance")) t.drift_tolerance = j.at("drift_tolerance").get<double>();
  return t;
}

}  // namespace detail

/// Builds a scenario from parsed JSON. Schema problems raise ScenarioError;
/// a nonpositive Λ raises DomainError.
inline Scenario parse_scenario(const nlohmann::json& j, std::optional<std::uint64_t> seed_override = std::nullopt) {
  try {
    if (!j.is_object()) throw ScenarioError("scenario must be a JSON object");
    Scenario s;
    s.schema_version = j.value("schema_version", kSchemaVersion);
    if (s.schema_version != kSchemaVersion) {
      throw ScenarioError("unsupported schema_version " + std::to_string(s.schema_version));
    }
    s.name = j.value("name", std::string("unnamed"));
    if (j.contains("geometry")) {
      const auto& g = j.at("geometry");
      s.geometry = TorusGeometry(detail::num(g, "period_x", kTwoPi), detail::num(g, "period_y", kTwoPi));
    }
    s.seed = seed_override ? *seed_override : j.value("seed", std::uint64_t{0});
    const FieldContext ctx{s.geometry, s.seed};

    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      if (!g.is_array() || g.size() != 2) throw ScenarioError("grid must be [nx, ny]");
      s.nx = g[0].get<int>();
      s.ny = g[1].get<int>();
      if (s.nx < 4 || s.ny < 4) throw ScenarioError("grid needs at least 4 points per direction");
    }
    s.tolerance = detail::num(j, "tolerance", 1e-10);

    std::optional<Field> family_omega;
    if (j.contains("family")) {
      const auto& f = j.at("family");
      if (f.value("kind", "") != "linear") throw ScenarioError("unknown family kind");
      try {
        auto fam = build_linear_family(parse_field(f.at("lambda"), ctx), parse_field(f.at("A"), ctx));
        s.degree = 1;
        s.lambda = fam.ansatz.lambda();
        s.ansatz = fam.ansatz;
        family_omega = fam.omega;
      } catch (const ConstructionError& e) {
        throw ScenarioError(e.what());
      }
    } else if (j.contains("lambda")) {
      s.lambda = parse_field(j.at("lambda"), ctx);
      s.degree = j.value("N", 1);
      if (s.degree < 1) throw ScenarioError("N must be at least 1");
      if (j.contains("coefficients")) {
        std::vector<std::optional<Field>> u(s.degree), v(s.degree);
        for (const auto& c : j.at("coefficients")) {
          const int k = c.at("k").get<int>();
          if (k < 0 || k >= s.degree) throw ScenarioError("coefficient index k must be in 0..N-1");
          if (u[k]) throw ScenarioError("duplicate coefficient k=" + std::to_string(k));
          u[k] = c.contains("u") ? parse_field(c.at("u"), ctx) : Field::constant(0.0, s.geometry);
          v[k] = c.contains("v") ? parse_field(c.at("v"), ctx) : Field::constant(0.0, s.geometry);
          if (k == 0 && c.contains("v") && !(c.at("v").is_number() && c.at("v").get<double>() == 0.0)) {
            throw ScenarioError("a_0 is real: v for k=0 must be omitted or 0");
          }
        }
        std::vector<Field> uf, vf;
        for (int k = 0; k < s.degree; ++k) {
          uf.push_back(u[k] ? *u[k] : Field::constant(0.0, s.geometry));
          if (k >= 1) vf.push_back(v[k] ? *v[k] : Field::constant(0.0, s.geometry));
        }
        s.ansatz = Ansatz::normalized(*s.lambda, std::move(uf), std::move(vf));
      }
    } else if (j.contains("N")) {
      s.degree = j.at("N").get<int>();
      if (s.degree < 1) throw ScenarioError("N must be at least 1");
    }

    if (j.contains("omega")) {
      const auto& o = j.at("omega");
      if (o.is_string() && o.get<std::string>() == "derive") {
        if (!s.ansatz) throw ScenarioError("omega \"derive\" needs ansatz coefficients");
        s.omega = omega_rescaled(rescale(*s.ansatz));
        s.omega_derived = true;
      } else {
        s.omega = ScalarEvaluator(parse_field(o, ctx));
      }
    } else if (family_omega) {
      s.omega = ScalarEvaluator(*family_omega);
    } else if (s.ansatz) {
      s.omega = omega_rescaled(rescale(*s.ansatz));
      s.omega_derived = true;
    }

    if (j.contains("checks")) {
      for (const auto& c : j.at("checks")) {
        const auto name = c.get<std::string>();
        const auto& known = known_checks();
        if (std::find(known.begin(), known.end(), name) == known.end()) {
          throw ScenarioError("unknown check '" + name + "'");
        }
        s.checks.push_back(name);
      }
    } else if (s.ansatz) {
      s.checks = {"stationarity", "harmonics", "constraint", "conservation", "certificate", "omega_equivalence"};
      if (!s.omega_derived) s.checks.push_back("omega_consistency");
    }

    std::size_t idx = 0;
    for (const auto& t : j.value("trajectories", nlohmann::json::array())) {
      s.trajectories.push_back(detail::parse_trajectory(t, idx++));
    }
    if (j.contains("assemble")) {
      for (const auto& p : j.at("assemble").at("at")) s.assemble_points.push_back(p.get<std::vector<double>>());
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ScenarioError(std::string("scenario schema error: ") + e.what());
  } catch (const ConstructionError& e) {
    throw ScenarioError(e.what());
  }
}

}  // namespace mgflow
