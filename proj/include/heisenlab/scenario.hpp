#pragma once

#include <json.hpp>

#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "heisenlab/basis.hpp"
#include "heisenlab/classical.hpp"
#include "heisenlab/ehrenfest.hpp"
#include "heisenlab/error.hpp"
#include "heisenlab/evolution.hpp"
#include "heisenlab/hamiltonians.hpp"
#include "heisenlab/plot.hpp"
#include "heisenlab/polynomial.hpp"
#include "heisenlab/state.hpp"
#include "heisenlab/timeseries.hpp"
#include "heisenlab/verification.hpp"
#include "heisenlab/version.hpp"

namespace heisenlab {

/// Invalid scenario content; the message names the offending field.
class ScenarioError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Gap bound applied to scenarios whose equations of motion are linear.
inline constexpr double kLinearExactnessTolerance = 1e-8;

struct BasisConfig {
  std::size_t levels = 64;
  double hbar = 1.0;
  double mass = 1.0;
  /// One entry per dof; empty means 1 everywhere.
  std::vector<double> length_scales;
  double interior_fraction = 0.5;
  std::size_t memory_budget_mib = 64;
};

struct InitialStateConfig {
  enum class Kind { coherent, fock, phase_space };
  Kind kind = Kind::coherent;
  std::vector<complex> alphas;
  std::vector<std::size_t> occupations;
  std::vector<double> q;
  std::vector<double> p;
};

struct Scenario {
  std::string name = "scenario";
  std::string kind = "potential";
  std::size_t dofs = 1;
  BasisConfig basis;

  // potential
  std::vector<double> coefficients{0.0, 0.0, 0.5};
  double expansion_point = 0.0;
  // gravity_taylor
  double gravity_G = 1.0;
  double gravity_M = 1.0;
  double gravity_r0 = 1.0;
  unsigned gravity_order = 2;
  // em
  FieldConfig field{1.0, {0.0, 0.0, 1.0}, {0.0, 0.0, 0.0}};
  // rotating
  double omega = 0.0;
  // generic_hamiltonian
  Polynomial hamiltonian{1};

  InitialStateConfig initial;
  double t_final = 10.0;
  std::size_t n_samples = 101;
  Method method = Method::rk4;
  double dt = 1e-3;

  std::string out_dir = ".";
  std::string stem;
  bool plots = true;

  /// Also run the Hamilton-equation check on this scenario's Hamiltonian.
  bool checks = false;
  std::optional<double> tolerance;
};

inline const std::vector<std::string>& scenario_kinds() {
  static const std::vector<std::string> k{"potential", "gravity_taylor", "em", "rotating",
                                          "generic_hamiltonian"};
  return k;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace detail {

/// Reads an object field by field and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  [[noreturn]] static void fail(const std::string& field, const std::string& msg) {
    throw ScenarioError("scenario: field '" + field + "': " + msg);
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(const std::string& key) {
    seen_.push_back(key);
    return j_.contains(key);
  }

  const json& at(const std::string& key) {
    if (!has(key)) fail(field(key), "is required");
    return j_.at(key);
  }

  template <class T>
  T as(const json& v, const std::string& key) const {
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      fail(field(key), "has the wrong type");
    }
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    return has(key) ? as<T>(j_.at(key), key) : fallback;
  }

  template <class T>
  T required(const std::string& key) {
    return as<T>(at(key), key);
  }

  double positive(const std::string& key, double fallback) {
    const double v = get<double>(key, fallback);
    if (!(v > 0.0) || !std::isfinite(v)) fail(field(key), "must be positive and finite");
    return v;
  }

  double finite(const std::string& key, double fallback) {
    const double v = get<double>(key, fallback);
    if (!std::isfinite(v)) fail(field(key), "must be finite");
    return v;
  }

  Vec3 vec3(const std::string& key, const Vec3& fallback) {
    if (!has(key)) return fallback;
    const auto v = as<std::vector<double>>(j_.at(key), key);
    if (v.size() != 3) fail(field(key), "needs three components");
    for (double x : v)
      if (!std::isfinite(x)) fail(field(key), "components must be finite");
    return {v[0], v[1], v[2]};
  }

  void finish() const {
    for (const auto& [key, v] : j_.items())
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end())
        fail(field(key), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::vector<std::string> seen_;
};

inline complex parse_alpha(const json& v, const std::string& field) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  ObjectReader::fail(field, "expected a number or a [re, im] pair");
}

inline std::pair<std::size_t, std::size_t> line_and_column(const std::string& text,
                                                           std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline std::string method_name(Method m) {
  return m == Method::rk4 ? "rk4" : "velocity_verlet";
}

}  // namespace detail

/// Validates a parsed scenario document and fills in defaults.
inline Scenario scenario_from_json(const json& doc) {
  using detail::ObjectReader;
  ObjectReader root(doc, "");
  Scenario s;
  s.name = root.get<std::string>("name", s.name);
  if (s.name.empty()) ObjectReader::fail("name", "must not be empty");
  s.kind = root.required<std::string>("kind");
  if (std::find(scenario_kinds().begin(), scenario_kinds().end(), s.kind) ==
      scenario_kinds().end())
    ObjectReader::fail("kind", "unknown scenario kind '" + s.kind + "'");

  // kind-specific section; sections of other kinds are rejected
  const std::array<std::pair<const char*, const char*>, 5> sections{
      {{"potential", "potential"},
       {"gravity_taylor", "gravity"},
       {"em", "field"},
       {"rotating", "rotating"},
       {"generic_hamiltonian", "hamiltonian"}}};
  for (const auto& [kind, section] : sections)
    if (s.kind != kind && doc.contains(section))
      ObjectReader::fail(section, "not used by scenario kind '" + s.kind + "'");

  if (s.kind == "potential") {
    s.dofs = 1;
    if (root.has("potential")) {
      ObjectReader r(doc.at("potential"), "potential");
      s.coefficients = r.get<std::vector<double>>("coefficients", s.coefficients);
      for (double c : s.coefficients)
        if (!std::isfinite(c)) ObjectReader::fail("potential.coefficients", "must be finite");
      if (s.coefficients.size() > kDefaultMaxDegree + 1)
        ObjectReader::fail("potential.coefficients", "degree exceeds the cap");
      s.expansion_point = r.finite("expansion_point", s.expansion_point);
      r.finish();
    }
  } else if (s.kind == "gravity_taylor") {
    s.dofs = 1;
    ObjectReader r(root.at("gravity"), "gravity");
    s.gravity_G = r.positive("G", s.gravity_G);
    s.gravity_M = r.positive("M", s.gravity_M);
    s.gravity_r0 = r.positive("r0", s.gravity_r0);
    s.gravity_order = r.get<unsigned>("order", s.gravity_order);
    if (s.gravity_order < 1 || s.gravity_order > kDefaultMaxDegree)
      ObjectReader::fail("gravity.order", "must be between 1 and the degree cap");
    r.finish();
  } else if (s.kind == "em") {
    ObjectReader r(root.at("field"), "field");
    s.dofs = r.get<std::size_t>("dofs", 2);
    if (s.dofs != 2 && s.dofs != 3) ObjectReader::fail("field.dofs", "must be 2 or 3");
    s.field.charge = r.finite("charge", s.field.charge);
    s.field.magnetic = r.vec3("B", s.field.magnetic);
    s.field.electric = r.vec3("E", s.field.electric);
    if (s.dofs == 2 && (s.field.magnetic[0] != 0.0 || s.field.magnetic[1] != 0.0))
      ObjectReader::fail("field.B", "planar motion needs B along the third axis");
    if (s.dofs == 2 && s.field.electric[2] != 0.0)
      ObjectReader::fail("field.E", "planar motion needs E in the plane");
    r.finish();
  } else if (s.kind == "rotating") {
    s.dofs = 2;
    ObjectReader r(root.at("rotating"), "rotating");
    s.omega = r.finite("omega", s.omega);
    r.finish();
  } else {
    ObjectReader r(root.at("hamiltonian"), "hamiltonian");
    s.dofs = r.required<std::size_t>("dofs");
    if (s.dofs == 0 || s.dofs > 3) ObjectReader::fail("hamiltonian.dofs", "must be 1, 2 or 3");
    s.hamiltonian = Polynomial(s.dofs);
    const json& terms = r.at("terms");
    if (!terms.is_array()) ObjectReader::fail("hamiltonian.terms", "expected an array");
    for (std::size_t k = 0; k < terms.size(); ++k) {
      const std::string path = "hamiltonian.terms[" + std::to_string(k) + "]";
      ObjectReader t(terms[k], path);
      const double c = t.required<double>("coefficient");
      const std::string text = t.get<std::string>("factors", "");
      t.finish();
      MonomialKey key;
      std::istringstream in(text);
      std::string tok;
      try {
        while (in >> tok) key.push_back(factor_from_text(tok));
        s.hamiltonian.add_term(c, key);
      } catch (const InvalidArgument& e) {
        ObjectReader::fail(path, e.what());
      }
    }
    if (s.hamiltonian.degree() > kDefaultMaxDegree)
      ObjectReader::fail("hamiltonian.terms", "degree exceeds the cap");
    r.finish();
  }

  if (root.has("basis")) {
    ObjectReader r(doc.at("basis"), "basis");
    s.basis.levels = r.get<std::size_t>("levels", s.basis.levels);
    if (s.basis.levels < 2) ObjectReader::fail("basis.levels", "must be at least 2");
    s.basis.hbar = r.positive("hbar", s.basis.hbar);
    s.basis.mass = r.positive("mass", s.basis.mass);
    if (r.has("length_scale")) {
      const json& l = doc.at("basis").at("length_scale");
      if (l.is_number()) {
        s.basis.length_scales.assign(s.dofs, l.get<double>());
      } else {
        s.basis.length_scales = r.as<std::vector<double>>(l, "length_scale");
        if (s.basis.length_scales.size() != s.dofs)
          ObjectReader::fail("basis.length_scale", "needs one entry per dof");
      }
      for (double x : s.basis.length_scales)
        if (!(x > 0.0) || !std::isfinite(x))
          ObjectReader::fail("basis.length_scale", "must be positive and finite");
    }
    s.basis.interior_fraction = r.positive("interior_fraction", s.basis.interior_fraction);
    if (s.basis.interior_fraction > 1.0)
      ObjectReader::fail("basis.interior_fraction", "must not exceed 1");
    s.basis.memory_budget_mib = r.get<std::size_t>("memory_budget_mib", s.basis.memory_budget_mib);
    if (s.basis.memory_budget_mib == 0)
      ObjectReader::fail("basis.memory_budget_mib", "must be positive");
    r.finish();
  }
  if (s.basis.length_scales.empty()) s.basis.length_scales.assign(s.dofs, 1.0);

  s.initial.alphas.assign(s.dofs, complex{1.0, 0.0});
  if (root.has("initial_state")) {
    ObjectReader r(doc.at("initial_state"), "initial_state");
    const json& is = doc.at("initial_state");
    const int given = int(is.contains("coherent")) + int(is.contains("fock")) +
                      int(is.contains("phase_space"));
    if (given != 1)
      ObjectReader::fail("initial_state", "give exactly one of coherent, fock, phase_space");
    if (r.has("coherent")) {
      const json& a = is.at("coherent");
      if (!a.is_array() || a.size() != s.dofs)
        ObjectReader::fail("initial_state.coherent", "needs one alpha per dof");
      s.initial.alphas.clear();
      for (std::size_t d = 0; d < s.dofs; ++d)
        s.initial.alphas.push_back(
            detail::parse_alpha(a[d], "initial_state.coherent[" + std::to_string(d) + "]"));
    }
    if (r.has("fock")) {
      s.initial.kind = InitialStateConfig::Kind::fock;
      s.initial.occupations = r.as<std::vector<std::size_t>>(is.at("fock"), "fock");
      if (s.initial.occupations.size() != s.dofs)
        ObjectReader::fail("initial_state.fock", "needs one occupation per dof");
    }
    if (r.has("phase_space")) {
      s.initial.kind = InitialStateConfig::Kind::phase_space;
      ObjectReader ps(is.at("phase_space"), "initial_state.phase_space");
      s.initial.q = ps.required<std::vector<double>>("q");
      s.initial.p = ps.required<std::vector<double>>("p");
      if (s.initial.q.size() != s.dofs || s.initial.p.size() != s.dofs)
        ObjectReader::fail("initial_state.phase_space", "needs one q and one p per dof");
      ps.finish();
    }
    r.finish();
  }

  if (root.has("time")) {
    ObjectReader r(doc.at("time"), "time");
    s.t_final = r.positive("t_final", s.t_final);
    s.n_samples = r.get<std::size_t>("n_samples", s.n_samples);
    if (s.n_samples < 2) ObjectReader::fail("time.n_samples", "must be at least 2");
    r.finish();
  }

  if (root.has("classical")) {
    ObjectReader r(doc.at("classical"), "classical");
    s.dt = r.positive("dt", s.dt);
    const std::string m = r.get<std::string>("method", "rk4");
    if (m == "rk4") s.method = Method::rk4;
    else if (m == "velocity_verlet") s.method = Method::velocity_verlet;
    else ObjectReader::fail("classical.method", "must be rk4 or velocity_verlet");
    r.finish();
  }
  if (s.dt > s.t_final) ObjectReader::fail("classical.dt", "exceeds time.t_final");
  if (s.method == Method::velocity_verlet && s.kind != "potential" &&
      s.kind != "gravity_taylor")
    ObjectReader::fail("classical.method",
                       "velocity_verlet needs a velocity-independent force");

  if (root.has("output")) {
    ObjectReader r(doc.at("output"), "output");
    s.out_dir = r.get<std::string>("dir", s.out_dir);
    s.stem = r.get<std::string>("stem", s.stem);
    s.plots = r.get<bool>("plots", s.plots);
    r.finish();
  }
  if (s.stem.empty()) s.stem = s.name;
  if (s.stem.find('/') != std::string::npos)
    ObjectReader::fail("output.stem", "must be a plain file name");

  s.checks = root.get<bool>("checks", s.checks);
  if (root.has("tolerance")) {
    s.tolerance = root.positive("tolerance", 1.0);
  }
  root.finish();
  return s;
}

/// Parses scenario JSON text; syntax errors report line and column.
inline Scenario parse_scenario_text(const std::string& text, const std::string& source = "<input>") {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = detail::line_and_column(text, e.byte);
    throw ScenarioError(source + ":" + std::to_string(line) + ":" + std::to_string(col) +
                        ": JSON syntax error: " + e.what());
  }
  return scenario_from_json(doc);
}

inline Scenario parse_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot read scenario file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str(), path.string());
}

/// Canonical, fully defaulted form of a scenario. Parsing it gives back an
/// equivalent Scenario.
inline json to_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["kind"] = s.kind;
  j["basis"] = {{"levels", s.basis.levels},
                {"hbar", s.basis.hbar},
                {"mass", s.basis.mass},
                {"length_scale", s.basis.length_scales},
                {"interior_fraction", s.basis.interior_fraction},
                {"memory_budget_mib", s.basis.memory_budget_mib}};
  if (s.kind == "potential") {
    j["potential"] = {{"coefficients", s.coefficients}, {"expansion_point", s.expansion_point}};
  } else if (s.kind == "gravity_taylor") {
    j["gravity"] = {{"G", s.gravity_G},
                    {"M", s.gravity_M},
                    {"r0", s.gravity_r0},
                    {"order", s.gravity_order}};
  } else if (s.kind == "em") {
    j["field"] = {{"dofs", s.dofs},
                  {"charge", s.field.charge},
                  {"B", s.field.magnetic},
                  {"E", s.field.electric}};
  } else if (s.kind == "rotating") {
    j["rotating"] = {{"omega", s.omega}};
  } else {
    json terms = json::array();
    for (const Monomial& t : s.hamiltonian.terms())
      terms.push_back({{"coefficient", t.coefficient}, {"factors", key_to_text(t.factors)}});
    j["hamiltonian"] = {{"dofs", s.dofs}, {"terms", std::move(terms)}};
  }
  json init;
  switch (s.initial.kind) {
    case InitialStateConfig::Kind::coherent: {
      json a = json::array();
      for (complex c : s.initial.alphas) a.push_back({c.real(), c.imag()});
      init["coherent"] = std::move(a);
      break;
    }
    case InitialStateConfig::Kind::fock:
      init["fock"] = s.initial.occupations;
      break;
    case InitialStateConfig::Kind::phase_space:
      init["phase_space"] = {{"q", s.initial.q}, {"p", s.initial.p}};
      break;
  }
  j["initial_state"] = std::move(init);
  j["time"] = {{"t_final", s.t_final}, {"n_samples", s.n_samples}};
  j["classical"] = {{"method", detail::method_name(s.method)}, {"dt", s.dt}};
  j["output"] = {{"dir", s.out_dir}, {"stem", s.stem}, {"plots", s.plots}};
  j["checks"] = s.checks;
  if (s.tolerance) j["tolerance"] = *s.tolerance;
  return j;
}

/// 64-bit FNV-1a of a string, as 16 hex digits.
inline std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Hash of everything that determines the numbers of a run; output
/// locations are excluded.
inline std::string config_hash(const Scenario& s) {
  json j = to_json(s);
  j.erase("output");
  return fnv1a_hex(j.dump());
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

inline BasisSpec scenario_basis(const Scenario& s) {
  std::vector<double> lengths = s.basis.length_scales;
  if (lengths.empty()) lengths.assign(s.dofs, 1.0);
  return make_basis(s.basis.levels, s.dofs, s.basis.hbar,
                    std::vector<double>(s.dofs, s.basis.mass), lengths,
                    s.basis.memory_budget_mib << 20);
}

inline PolyHamiltonian scenario_hamiltonian(const Scenario& s, const BasisSpec& basis) {
  if (s.kind == "potential")
    return build_potential_hamiltonian(basis, s.coefficients, s.expansion_point);
  if (s.kind == "gravity_taylor")
    return build_gravity_taylor(basis, s.gravity_G, s.gravity_M, s.basis.mass, s.gravity_r0,
                                s.gravity_order);
  if (s.kind == "em") return build_em_hamiltonian(basis, s.field);
  if (s.kind == "rotating") return build_rotating_frame(basis, s.omega);
  return {basis, s.hamiltonian, {"generic", {}, {}}};
}

inline QuantumState scenario_initial_state(const Scenario& s, const BasisSpec& basis) {
  switch (s.initial.kind) {
    case InitialStateConfig::Kind::fock:
      return fock_state(basis, std::span<const std::size_t>(s.initial.occupations));
    case InitialStateConfig::Kind::phase_space: {
      std::vector<complex> a;
      for (std::size_t d = 0; d < s.dofs; ++d)
        a.push_back(coherent_alpha(basis, d, s.initial.q[d], s.initial.p[d]));
      return coherent_state(basis, a);
    }
    case InitialStateConfig::Kind::coherent:
    default:
      return coherent_state(basis, s.initial.alphas);
  }
}

/// Everything a run produces before files are written.
struct RunOutcome {
  json report;
  TimeSeries series;
  bool passed = true;
};

/**
 * Quantum expectation values next to the classical oracle started from the
 * initial means. Columns: t, mean_q_i, mean_p_i, delta_q_i, classical_q_i,
 * classical_p_i, then mean_pi_i and classical_pi_i for field scenarios,
 * then gap_i = |mean_q_i - classical_q_i|.
 */
inline RunOutcome simulate(const Scenario& s) {
  const BasisSpec basis = scenario_basis(s);
  const PolyHamiltonian h = scenario_hamiltonian(s, basis);
  const QuantumState psi0 = scenario_initial_state(s, basis);
  const Operator hm = evaluate(h);
  const SpectralPropagator prop(hm);
  const auto grid = uniform_grid(s.t_final, s.n_samples);
  const std::size_t n = s.dofs;
  const bool em = s.kind == "em";
  const double m = s.basis.mass;

  std::vector<Observable> obs;
  for (std::size_t i = 0; i < n; ++i)
    obs.push_back({"q_" + std::to_string(i), position_operator(basis, i), true});
  for (std::size_t i = 0; i < n; ++i)
    obs.push_back({"p_" + std::to_string(i), momentum_operator(basis, i), false});
  if (em)
    for (std::size_t i = 0; i < n; ++i)
      obs.push_back({"pi_" + std::to_string(i), kinetic_momentum_operator(h, i), false});
  const TimeSeries quantum = sample_expectations(prop, psi0, obs, grid);

  std::vector<double> q0(n), p0(n);
  for (std::size_t i = 0; i < n; ++i) {
    q0[i] = quantum.channel("mean_q_" + std::to_string(i))[0];
    p0[i] = quantum.channel("mean_p_" + std::to_string(i))[0];
  }
  const IntegratorConfig icfg{s.method, s.dt, s.t_final, s.n_samples};
  TimeSeries classical;
  if (s.kind == "potential" || s.kind == "gravity_taylor") {
    const Polynomial force = formal_partial(h.poly, 0, Variable::q);
    auto vp = [&force](double x) {
      const double zero = 0.0;
      return force.evaluate_at({&x, 1}, {&zero, 1});
    };
    classical = integrate_newton(vp, m, q0[0], p0[0] / m, icfg);
  } else if (em) {
    Vec3 r{}, v{};
    for (std::size_t i = 0; i < n; ++i) {
      r[i] = q0[i];
      v[i] = quantum.channel("mean_pi_" + std::to_string(i))[0] / m;
    }
    classical = integrate_lorentz(s.field.charge, m, s.field.electric, s.field.magnetic, r, v,
                                  icfg);
  } else if (s.kind == "rotating") {
    const std::array<double, 2> r{q0[0], q0[1]};
    const std::array<double, 2> v{p0[0] / m + s.omega * q0[1], p0[1] / m - s.omega * q0[0]};
    classical = integrate_rotating(s.omega, m, r, v, icfg);
  } else {
    classical = integrate_hamilton(h.poly, {q0, p0, 0.0}, icfg);
  }

  TimeSeries out(grid);
  auto copy = [&](const TimeSeries& src, const std::string& from, const std::string& to) {
    out.add_channel(to, src.channel(from));
  };
  for (std::size_t i = 0; i < n; ++i) copy(quantum, "mean_q_" + std::to_string(i), "mean_q_" + std::to_string(i));
  for (std::size_t i = 0; i < n; ++i) copy(quantum, "mean_p_" + std::to_string(i), "mean_p_" + std::to_string(i));
  for (std::size_t i = 0; i < n; ++i) copy(quantum, "delta_q_" + std::to_string(i), "delta_q_" + std::to_string(i));
  for (std::size_t i = 0; i < n; ++i) copy(classical, "q_" + std::to_string(i), "classical_q_" + std::to_string(i));
  for (std::size_t i = 0; i < n; ++i) copy(classical, "p_" + std::to_string(i), "classical_p_" + std::to_string(i));
  if (em) {
    for (std::size_t i = 0; i < n; ++i) copy(quantum, "mean_pi_" + std::to_string(i), "mean_pi_" + std::to_string(i));
    for (std::size_t i = 0; i < n; ++i) copy(classical, "pi_" + std::to_string(i), "classical_pi_" + std::to_string(i));
  }
  std::vector<std::pair<std::string, std::string>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string idx = std::to_string(i);
    const auto& a = out.channel("mean_q_" + idx);
    const auto& b = out.channel("classical_q_" + idx);
    std::vector<double> g(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) g[k] = std::abs(a[k] - b[k]);
    out.add_channel("gap_" + idx, std::move(g));
    pairs.emplace_back("mean_q_" + idx, "classical_q_" + idx);
  }

  const auto metrics = compare_trajectories(out, out, pairs);
  json divergence = json::array();
  for (const auto& mt : metrics)
    divergence.push_back({{"quantum_channel", mt.quantum_channel},
                          {"classical_channel", mt.classical_channel},
                          {"max_abs_gap", mt.max_abs_gap},
                          {"time_of_max", mt.time_of_max},
                          {"rms_gap", mt.rms_gap}});

  bool passed = true;
  json report;
  report["report"] = "heisenlab-run";
  report["version"] = kVersion;
  report["config_hash"] = config_hash(s);
  json echo = to_json(s);
  echo["dofs"] = n;
  // where files go does not change the numbers; keep reports relocatable
  echo["output"] = {{"stem", s.stem}};
  report["scenario"] = std::move(echo);
  report["hamiltonian"] = to_text(h.poly);
  report["divergence"] = std::move(divergence);
  report["max_gap"] = worst_gap(metrics);

  const bool linear = linear_scenario_exactness(h);
  report["linear_scenario_exactness"] = linear;
  if (linear) {
    const bool ok = worst_gap(metrics) <= kLinearExactnessTolerance;
    passed = passed && ok;
    report["exactness_check"] = {{"max_gap", worst_gap(metrics)},
                                 {"tolerance", kLinearExactnessTolerance},
                                 {"passed", ok}};
  }

  if (s.kind == "potential" || s.kind == "gravity_taylor") {
    json devs = json::array();
    for (double t : grid) {
      const DeviationReport d = ehrenfest_check(schrodinger_evolve(prop, psi0, t), h);
      devs.push_back({{"t", t},
                      {"mean_x", d.mean_x},
                      {"delta_x", d.delta_x},
                      {"mean_force", d.mean_force},
                      {"classical_force_at_mean", d.classical_force_at_mean},
                      {"residual", d.residual},
                      {"predicted_residual",
                       d.predicted_residual ? json(*d.predicted_residual) : json(nullptr)}});
    }
    report["deviation_reports"] = std::move(devs);
  }

  if (s.checks) {
    SuiteConfig cfg;
    cfg.interior_fraction = s.basis.interior_fraction;
    cfg.tolerance = s.tolerance;
    json checks = json::array();
    for (const auto& r : check_hamilton_operator(h, s.name, cfg)) {
      passed = passed && r.passed;
      checks.push_back(to_json(r));
    }
    report["checks"] = std::move(checks);
  }
  report["status"] = passed ? "pass" : "fail";
  return {std::move(report), std::move(out), passed};
}

struct RunArtifacts {
  RunOutcome outcome;
  std::filesystem::path csv;
  std::filesystem::path report;
  std::vector<std::string> plots;
};

/// simulate() followed by writing <stem>.csv, <stem>.json and, when enabled,
/// SVG plots into the output directory. Every file is written atomically.
inline RunArtifacts run(const Scenario& s) {
  RunArtifacts a{simulate(s), {}, {}, {}};
  const std::filesystem::path dir(s.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (!std::filesystem::is_directory(dir))
    throw Error("output directory '" + dir.string() + "' is not usable");
  a.csv = dir / (s.stem + ".csv");
  a.report = dir / (s.stem + ".json");
  a.outcome.report["outputs"] = {{"csv", a.csv.filename().string()}};
  write_file_atomic(a.csv, to_csv(a.outcome.series));
  if (s.plots) {
    a.plots = emit_plots(a.outcome.report, a.outcome.series, dir, s.stem);
    a.outcome.report["outputs"]["plots"] = a.plots;
  }
  write_file_atomic(a.report, a.outcome.report.dump(2) + "\n");
  return a;
}

/// Re-reads a run report and its CSV and renders the plots next to them.
inline std::vector<std::string> plot_report(const std::filesystem::path& report_path) {
  std::ifstream in(report_path, std::ios::binary);
  if (!in) throw Error("cannot read report '" + report_path.string() + "'");
  json report;
  try {
    report = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidArgument("report '" + report_path.string() + "': " + e.what());
  }
  const std::string csv_name = report.at("outputs").at("csv").get<std::string>();
  const std::filesystem::path dir = report_path.parent_path();
  std::ifstream cin(dir / csv_name, std::ios::binary);
  if (!cin) throw Error("cannot read trajectory '" + (dir / csv_name).string() + "'");
  std::ostringstream ss;
  ss << cin.rdbuf();
  const std::string stem = report.at("scenario").at("output").at("stem").get<std::string>();
  return emit_plots(report, parse_csv(ss.str()), dir, stem);
}

}  // namespace heisenlab
