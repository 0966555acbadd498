#pragma once

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "heisenlab/basis.hpp"
#include "heisenlab/ehrenfest.hpp"
#include "heisenlab/error.hpp"
#include "heisenlab/evolution.hpp"
#include "heisenlab/hamiltonians.hpp"
#include "heisenlab/operator.hpp"
#include "heisenlab/polynomial.hpp"
#include "heisenlab/state.hpp"
#include "heisenlab/timeseries.hpp"
#include "heisenlab/version.hpp"

namespace heisenlab {

using json = nlohmann::json;

/// Outcome of one operator identity compared on an interior block.
struct CheckResult {
  std::string name;
  /// The identity being checked, written out as a formula.
  std::string anchor;
  double measured_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  json parameters = json::object();
};

inline CheckResult make_result(std::string name, std::string anchor, double error,
                               double tolerance, json parameters = json::object()) {
  const bool ok = std::isfinite(error) && error <= tolerance;
  return {std::move(name), std::move(anchor), error, tolerance, ok, std::move(parameters)};
}

/// Check families run by run_all, in execution order.
inline const std::vector<std::string>& all_check_families() {
  static const std::vector<std::string> families{
      "power_commutator", "newton",  "hbar_independence", "gravity_taylor",
      "lorentz",          "rotating", "hamilton",         "ehrenfest_deviation"};
  return families;
}

struct SuiteConfig {
  std::size_t levels_1dof = 64;
  std::size_t levels_2dof = 32;
  std::size_t levels_random = 24;
  double interior_fraction = 0.5;
  /// Replaces every identity tolerance when set.
  std::optional<double> tolerance;
  std::uint64_t seed = 20250101;
  std::size_t random_hamiltonians = 20;
  unsigned random_degree = 4;
  unsigned power_max = 6;
  std::vector<double> hbar_values{0.1, 1.0, 10.0};
  std::size_t propagation_samples = 10;
  double propagation_t_final = 10.0;
  std::vector<std::string> families = all_check_families();

  double tol(double fallback) const { return tolerance.value_or(fallback); }
};

inline json to_json(const SuiteConfig& c) {
  json j;
  j["levels_1dof"] = c.levels_1dof;
  j["levels_2dof"] = c.levels_2dof;
  j["levels_random"] = c.levels_random;
  j["interior_fraction"] = c.interior_fraction;
  j["tolerance"] = c.tolerance ? json(*c.tolerance) : json(nullptr);
  j["seed"] = c.seed;
  j["random_hamiltonians"] = c.random_hamiltonians;
  j["random_degree"] = c.random_degree;
  j["power_max"] = c.power_max;
  j["hbar_values"] = c.hbar_values;
  j["propagation_samples"] = c.propagation_samples;
  j["propagation_t_final"] = c.propagation_t_final;
  j["families"] = c.families;
  return j;
}

/// Strict inverse of to_json: unknown keys are rejected, missing keys keep
/// their defaults.
inline SuiteConfig suite_config_from_json(const json& j) {
  if (!j.is_object()) throw InvalidArgument("suite config: expected a JSON object");
  SuiteConfig c;
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "levels_1dof") c.levels_1dof = v.get<std::size_t>();
      else if (key == "levels_2dof") c.levels_2dof = v.get<std::size_t>();
      else if (key == "levels_random") c.levels_random = v.get<std::size_t>();
      else if (key == "interior_fraction") c.interior_fraction = v.get<double>();
      else if (key == "tolerance") {
        if (v.is_null()) c.tolerance.reset();
        else c.tolerance = v.get<double>();
      } else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "random_hamiltonians") c.random_hamiltonians = v.get<std::size_t>();
      else if (key == "random_degree") c.random_degree = v.get<unsigned>();
      else if (key == "power_max") c.power_max = v.get<unsigned>();
      else if (key == "hbar_values") c.hbar_values = v.get<std::vector<double>>();
      else if (key == "propagation_samples") c.propagation_samples = v.get<std::size_t>();
      else if (key == "propagation_t_final") c.propagation_t_final = v.get<double>();
      else if (key == "families") c.families = v.get<std::vector<std::string>>();
      else throw InvalidArgument("suite config: unknown key '" + key + "'");
    } catch (const json::exception& e) {
      throw InvalidArgument("suite config: field '" + key + "': " + e.what());
    }
  }
  for (const auto& f : c.families)
    if (std::find(all_check_families().begin(), all_check_families().end(), f) ==
        all_check_families().end())
      throw InvalidArgument("suite config: unknown check family '" + f + "'");
  if (c.tolerance && !(*c.tolerance > 0.0))
    throw InvalidArgument("suite config: tolerance must be positive");
  return c;
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

namespace detail {

inline json block_params(const BasisSpec& basis, const InteriorBlock& block) {
  return {{"levels", basis.levels()},
          {"dofs", basis.dofs()},
          {"interior_levels", block.levels},
          {"hbar", basis.hbar()}};
}

/// Relative error of lhs against rhs on the interior block.
inline double block_error(const Operator& lhs, const Operator& rhs,
                          const InteriorBlock& block) {
  return relative_error(interior_project(lhs, block), interior_project(rhs, block));
}

/// f(A) for a one-variable polynomial f in q_0, by Horner's rule.
inline Operator polynomial_of(const Polynomial& f, const Operator& a) {
  const unsigned deg = f.degree();
  Operator acc = f.coefficient({q(0, deg)}) * Operator::identity(a.basis());
  for (unsigned k = deg; k-- > 0;)
    acc = with_hermiticity(acc * a, Hermiticity::general) +
          f.coefficient({q(0, k)}) * Operator::identity(a.basis());
  return with_hermiticity(acc, a.hermiticity());
}

inline double uniform_pm1(std::mt19937_64& rng) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return 2.0 * u - 1.0;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Power commutator
// ---------------------------------------------------------------------------

/// [x^n, p] = i hbar n x^(n-1) on the interior block, n = 1..n_max.
inline std::vector<CheckResult> check_power_commutator(unsigned n_max,
                                                       const SuiteConfig& cfg = {}) {
  if (n_max > kDefaultMaxDegree)
    throw InvalidArgument("power commutator: n_max exceeds the degree cap");
  const BasisSpec basis = make_uniform_basis(cfg.levels_1dof, 1);
  const InteriorBlock block = interior_block(basis, cfg.interior_fraction);
  require_safe_block(block, basis, n_max);
  const Operator x = position_operator(basis, 0);
  const Operator p = momentum_operator(basis, 0);
  std::vector<CheckResult> out;
  Operator xn_minus_1 = Operator::identity(basis);
  for (unsigned n = 1; n <= n_max; ++n) {
    const Operator xn = x.pow(n);
    const Operator lhs = commutator(xn, p);
    const Operator rhs = complex{0.0, basis.hbar() * n} * xn_minus_1;
    json params = detail::block_params(basis, block);
    params["n"] = n;
    out.push_back(make_result("power_commutator[n=" + std::to_string(n) + "]",
                              "[x^n, p] = i hbar n x^(n-1)",
                              detail::block_error(lhs, rhs, block), cfg.tol(1e-10),
                              std::move(params)));
    xn_minus_1 = xn;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Newton form of the Heisenberg equations for H = p^2/2m + V(q)
// ---------------------------------------------------------------------------

/**
 * m (i/hbar)^2 [H, [H, x(t)]] = -V'(x(t)) on the interior block, at t = 0
 * and, when `propagate` is set, at the sampled times x(t) = U x U^dagger.
 * The reported error is the worst over all times.
 */
inline CheckResult check_newton_operator(const PolyHamiltonian& h, const std::string& label,
                                         const SuiteConfig& cfg = {}, bool propagate = true,
                                         double tolerance = 1e-9) {
  require_potential_form(h.poly, "newton check");
  const BasisSpec& basis = h.basis;
  const InteriorBlock block = interior_block(basis, cfg.interior_fraction);
  require_safe_block(block, basis, h.poly.degree());
  const double m = basis.mass(0);
  const Operator hm = evaluate(h);
  const Polynomial force = formal_partial(h.poly, 0, Variable::q);
  const Operator x0 = position_operator(basis, 0);

  auto error_at = [&](const Operator& x) {
    const Operator lhs = m * heisenberg_rhs(hm, heisenberg_rhs(hm, x));
    const Operator rhs = -detail::polynomial_of(force, x);
    return detail::block_error(lhs, rhs, block);
  };

  std::vector<double> times{0.0};
  std::vector<double> errors{error_at(x0)};
  if (propagate) {
    const SpectralPropagator prop(hm);
    for (double t : uniform_grid(cfg.propagation_t_final, cfg.propagation_samples)) {
      if (t == 0.0) continue;
      times.push_back(t);
      errors.push_back(error_at(heisenberg_evolve(prop, x0, t)));
    }
  }
  json params = detail::block_params(basis, block);
  params["potential"] = label;
  params["mass"] = m;
  params["length_scale"] = basis.length_scale(0);
  params["times"] = times;
  params["errors"] = errors;
  return make_result("newton[" + label + "]", "m d^2x/dt^2 = -V'(x)",
                     *std::max_element(errors.begin(), errors.end()), cfg.tol(tolerance),
                     std::move(params));
}

/// Harmonic V = m w^2 q^2 / 2 on a basis matched to the oscillator length.
inline PolyHamiltonian suite_harmonic(std::size_t levels, double hbar = 1.0,
                                      double m = 1.0, double omega = 1.0) {
  const BasisSpec b = make_basis(levels, 1, hbar, {m}, {std::sqrt(hbar / (m * omega))});
  return build_potential_hamiltonian(b, {0.0, 0.0, 0.5 * m * omega * omega});
}

/// V = a q^2 / 2 + b q^3 / 3 with the basis length matched to the quadratic part.
inline PolyHamiltonian suite_cubic(std::size_t levels, double alpha, double beta,
                                   double hbar = 1.0, double m = 1.0) {
  const double omega = std::sqrt(alpha / m);
  const BasisSpec b = make_basis(levels, 1, hbar, {m}, {std::sqrt(hbar / (m * omega))});
  return build_potential_hamiltonian(b, {0.0, 0.0, 0.5 * alpha, beta / 3.0});
}

/// Cubic strength used for the propagated checks; small enough that the
/// truncated dynamics does not couple the interior block to the top levels.
inline constexpr double kSuiteCubicBeta = 0.005;

inline std::vector<CheckResult> check_newton_family(const SuiteConfig& cfg = {}) {
  std::vector<CheckResult> out;
  const std::size_t n = cfg.levels_1dof;
  const BasisSpec free_basis = make_uniform_basis(n, 1);
  // an unconfined packet spreads into the top levels, so the free particle
  // is only checked at t = 0
  out.push_back(check_newton_operator(build_potential_hamiltonian(free_basis, {}), "free",
                                      cfg, false));
  out.push_back(check_newton_operator(suite_harmonic(n), "harmonic", cfg));
  out.push_back(check_newton_operator(suite_cubic(n, 1.0, kSuiteCubicBeta), "cubic", cfg));
  out.push_back(check_newton_operator(suite_cubic(n, 1.0, 0.3), "cubic_strong", cfg, false));
  return out;
}

/**
 * Repeats the harmonic and cubic Newton checks for each hbar, then checks
 * that the spread of the measured errors stays below a factor of 10. Errors
 * under machine epsilon count as machine epsilon in the ratio.
 */
inline std::vector<CheckResult> check_hbar_independence(const SuiteConfig& cfg = {}) {
  std::vector<CheckResult> out;
  for (const char* kind : {"harmonic", "cubic"}) {
    std::vector<double> errors;
    for (double hbar : cfg.hbar_values) {
      const std::string k = kind;
      auto h = k == "harmonic" ? suite_harmonic(cfg.levels_1dof, hbar)
                               : suite_cubic(cfg.levels_1dof, 1.0, kSuiteCubicBeta, hbar);
      CheckResult r = check_newton_operator(h, k + ",hbar=" + format_real(hbar), cfg);
      r.parameters["hbar"] = hbar;
      errors.push_back(r.measured_error);
      out.push_back(std::move(r));
    }
    if (errors.empty()) continue;
    const double eps = std::numeric_limits<double>::epsilon();
    const double hi = std::max(*std::max_element(errors.begin(), errors.end()), eps);
    const double lo = std::max(*std::min_element(errors.begin(), errors.end()), eps);
    out.push_back(make_result(std::string("hbar_independence[") + kind + "]",
                              "max/min Newton-identity error over hbar < 10", hi / lo, 10.0,
                              {{"hbar_values", cfg.hbar_values}, {"errors", errors}}));
  }
  return out;
}

/// Newton check on the Taylor-expanded radial gravity Hamiltonian at t = 0.
inline std::vector<CheckResult> check_gravity_taylor(const SuiteConfig& cfg = {}) {
  const BasisSpec b = make_uniform_basis(cfg.levels_1dof, 1);
  std::vector<CheckResult> out;
  for (unsigned order : {2u, 4u}) {
    auto h = build_gravity_taylor(b, 1.0, 1.0, 1.0, 2.0, order);
    out.push_back(check_newton_operator(h, "gravity_taylor,order=" + std::to_string(order),
                                        cfg, false));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Charged particle in uniform fields
// ---------------------------------------------------------------------------

/// Planar basis with the oscillator length matched to the Larmor frequency.
inline BasisSpec em_basis(std::size_t levels, const FieldConfig& f, double hbar = 1.0,
                          double m = 1.0) {
  const double larmor = std::abs(f.charge * f.magnetic[2]) / (2.0 * m);
  const double l = larmor > 0.0 ? std::sqrt(hbar / (m * larmor)) : 1.0;
  return make_basis(levels, 2, hbar, {m, m}, {l, l});
}

/**
 * For planar uniform fields, on the interior block:
 *   (i/hbar)[H, r_i] = pi_i / m,
 *   [pi_1, pi_2] = i hbar q B_3,
 *   m (i/hbar)[H, v_i] = q (v x B)_i + q E_i with v_i = (i/hbar)[H, r_i].
 */
inline std::vector<CheckResult> check_lorentz_operator(const FieldConfig& field,
                                                       const std::string& label,
                                                       const SuiteConfig& cfg = {}) {
  const BasisSpec basis = em_basis(cfg.levels_2dof, field);
  const InteriorBlock block = interior_block(basis, cfg.interior_fraction);
  require_safe_block(block, basis, 2);
  const auto h = build_em_hamiltonian(basis, field);
  const Operator hm = evaluate(h);
  const double m = basis.mass(0);
  const double qc = field.charge;
  const double tol = cfg.tol(1e-10);
  json params = detail::block_params(basis, block);
  params["field"] = label;
  params["charge"] = qc;
  params["B"] = field.magnetic;
  params["E"] = field.electric;

  std::vector<CheckResult> out;
  std::vector<Operator> v, pi;
  for (std::size_t i = 0; i < 2; ++i) {
    v.push_back(heisenberg_rhs(hm, position_operator(basis, i)));
    pi.push_back(kinetic_momentum_operator(h, i));
    out.push_back(make_result("em_velocity[" + label + ",i=" + std::to_string(i + 1) + "]",
                              "(i/hbar)[H, r_i] = (p_i - q A_i)/m",
                              detail::block_error(v[i], (1.0 / m) * pi[i], block), tol,
                              params));
  }
  out.push_back(make_result("kinetic_commutator[" + label + "]",
                            "[pi_1, pi_2] = i hbar q B_3",
                            detail::block_error(commutator(pi[0], pi[1]),
                                                complex{0.0, basis.hbar() * qc *
                                                                 field.magnetic[2]} *
                                                    Operator::identity(basis),
                                                block),
                            tol, params));
  const double b3 = field.magnetic[2];
  for (std::size_t i = 0; i < 2; ++i) {
    const Operator lhs = m * heisenberg_rhs(hm, v[i]);
    // (v x B)_1 = v_2 B_3, (v x B)_2 = -v_1 B_3 for B along the third axis
    const Operator vxb = i == 0 ? b3 * v[1] : -b3 * v[0];
    const Operator rhs = qc * vxb + (qc * field.electric[i]) * Operator::identity(basis);
    out.push_back(make_result("lorentz[" + label + ",i=" + std::to_string(i + 1) + "]",
                              "m dv/dt = q v x B + q E",
                              detail::block_error(lhs, rhs, block), tol, params));
  }
  return out;
}

inline std::vector<CheckResult> check_lorentz_family(const SuiteConfig& cfg = {}) {
  std::vector<CheckResult> out;
  auto append = [&](std::vector<CheckResult> rs) {
    for (auto& r : rs) out.push_back(std::move(r));
  };
  append(check_lorentz_operator({1.0, {0.0, 0.0, 1.0}, {0.0, 0.0, 0.0}}, "uniform_B", cfg));
  append(check_lorentz_operator({1.0, {0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}}, "electric_only", cfg));
  append(check_lorentz_operator({1.0, {0.0, 0.0, 1.0}, {0.5, 0.0, 0.0}}, "crossed_ExB", cfg));
  return out;
}

// ---------------------------------------------------------------------------
// Rotating frame
// ---------------------------------------------------------------------------

/**
 * On the interior block, with v_i = (i/hbar)[H, r_i]:
 *   v_1 = (p_1 + m w r_2)/m, v_2 = (p_2 - m w r_1)/m,
 *   m (i/hbar)[H, v] = -2 m w x v - m w x (w x r).
 */
inline std::vector<CheckResult> check_rotating_operator(double omega,
                                                        const SuiteConfig& cfg = {}) {
  const BasisSpec basis = make_uniform_basis(cfg.levels_2dof, 2);
  const InteriorBlock block = interior_block(basis, cfg.interior_fraction);
  require_safe_block(block, basis, 2);
  const auto h = build_rotating_frame(basis, omega);
  const Operator hm = evaluate(h);
  const double m = basis.mass(0);
  const double tol = cfg.tol(1e-10);
  const std::string label = "omega=" + format_real(omega);
  json params = detail::block_params(basis, block);
  params["omega"] = omega;

  const Operator q1 = position_operator(basis, 0), q2 = position_operator(basis, 1);
  const Operator p1 = momentum_operator(basis, 0), p2 = momentum_operator(basis, 1);
  const Operator v1 = heisenberg_rhs(hm, q1), v2 = heisenberg_rhs(hm, q2);

  std::vector<CheckResult> out;
  out.push_back(make_result("rotating_velocity[" + label + ",i=1]",
                            "dr_1/dt = (p_1 + m w r_2)/m",
                            detail::block_error(v1, (1.0 / m) * (p1 + (m * omega) * q2), block),
                            tol, params));
  out.push_back(make_result("rotating_velocity[" + label + ",i=2]",
                            "dr_2/dt = (p_2 - m w r_1)/m",
                            detail::block_error(v2, (1.0 / m) * (p2 - (m * omega) * q1), block),
                            tol, params));
  const double w2 = omega * omega;
  // -2 m w x v = (2 m w v_2, -2 m w v_1); -m w x (w x r) = m w^2 r in the plane
  const Operator rhs1 = (2.0 * m * omega) * v2 + (m * w2) * q1;
  const Operator rhs2 = (-2.0 * m * omega) * v1 + (m * w2) * q2;
  out.push_back(make_result("rotating_acceleration[" + label + ",i=1]",
                            "m d^2r/dt^2 = -2m w x v - m w x (w x r)",
                            detail::block_error(m * heisenberg_rhs(hm, v1), rhs1, block), tol,
                            params));
  out.push_back(make_result("rotating_acceleration[" + label + ",i=2]",
                            "m d^2r/dt^2 = -2m w x v - m w x (w x r)",
                            detail::block_error(m * heisenberg_rhs(hm, v2), rhs2, block), tol,
                            params));
  return out;
}

inline std::vector<CheckResult> check_rotating_family(const SuiteConfig& cfg = {}) {
  auto out = check_rotating_operator(0.0, cfg);
  for (auto& r : check_rotating_operator(0.5, cfg)) out.push_back(std::move(r));
  return out;
}

// ---------------------------------------------------------------------------
// Generalized Hamilton equations
// ---------------------------------------------------------------------------

/**
 * Random polynomial in which no monomial mixes q and p of the same dof.
 * Every admissible monomial of degree 1..max_degree is kept with
 * probability 1/2 and given a coefficient uniform in [-1, 1]; a q_0 p_1 term
 * is added if no cross-dof q-p term was drawn.
 */
inline Polynomial random_distinct_dof_polynomial(std::size_t dofs, unsigned max_degree,
                                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  // per-dof choices: 0 = absent, (Variable, exponent) otherwise
  std::vector<std::vector<Factor>> choices(dofs);
  std::vector<MonomialKey> candidates{{}};
  for (std::size_t d = 0; d < dofs; ++d) {
    std::vector<MonomialKey> next;
    for (const auto& base : candidates) {
      next.push_back(base);
      for (Variable kind : {Variable::q, Variable::p})
        for (unsigned e = 1; e <= max_degree; ++e) {
          MonomialKey k = base;
          k.push_back({d, kind, e});
          if (key_degree(k) <= max_degree) next.push_back(std::move(k));
        }
    }
    candidates = std::move(next);
  }
  Polynomial h(dofs);
  bool mixed = false;
  for (const auto& key : candidates) {
    if (key.empty()) continue;
    const bool keep = (rng() >> 63) != 0;
    const double c = detail::uniform_pm1(rng);
    if (!keep || c == 0.0) continue;
    h.add_term(c, key);
    bool has_q = false, has_p = false;
    for (const Factor& f : key) (f.kind == Variable::q ? has_q : has_p) = true;
    mixed = mixed || (has_q && has_p);
  }
  if (!mixed && dofs > 1) h.add_term(detail::uniform_pm1(rng), {q(0), p(1)});
  return h;
}

/**
 * (i/hbar)[H, q_j] = dH/dp_j and (i/hbar)[H, p_j] = -dH/dq_j on the
 * interior block, derivatives taken formally and evaluated with the same
 * ordering rule as H. Monomials mixing q and p of one dof are Weyl ordered;
 * the result parameters flag them.
 */
inline std::vector<CheckResult> check_hamilton_operator(const PolyHamiltonian& h,
                                                        const std::string& label,
                                                        const SuiteConfig& cfg = {},
                                                        double tolerance = 1e-9) {
  const BasisSpec& basis = h.basis;
  const InteriorBlock block = interior_block(basis, cfg.interior_fraction);
  require_safe_block(block, basis, h.poly.degree());
  const Operator hm = evaluate(h);
  json params = detail::block_params(basis, block);
  params["hamiltonian"] = label;
  params["degree"] = h.poly.degree();
  params["terms"] = h.poly.size();
  params["weyl_ordered_terms"] = h.poly.has_mixed_same_dof();
  std::vector<CheckResult> out;
  for (std::size_t j = 0; j < basis.dofs(); ++j) {
    const std::string idx = std::to_string(j);
    const Operator dq = heisenberg_rhs(hm, position_operator(basis, j));
    const Operator dh_dp = evaluate(formal_partial(h.poly, j, Variable::p), basis);
    out.push_back(make_result("hamilton[" + label + ",dq" + idx + "/dt]",
                              "dq_j/dt = dH/dp_j", detail::block_error(dq, dh_dp, block),
                              cfg.tol(tolerance), params));
    const Operator dp = heisenberg_rhs(hm, momentum_operator(basis, j));
    const Operator dh_dq = evaluate(formal_partial(h.poly, j, Variable::q), basis);
    out.push_back(make_result("hamilton[" + label + ",dp" + idx + "/dt]",
                              "dp_j/dt = -dH/dq_j", detail::block_error(dp, -dh_dq, block),
                              cfg.tol(tolerance), params));
  }
  return out;
}

inline std::vector<CheckResult> check_hamilton_family(const SuiteConfig& cfg = {}) {
  std::vector<CheckResult> out;
  auto append = [&](std::vector<CheckResult> rs) {
    for (auto& r : rs) out.push_back(std::move(r));
  };
  append(check_hamilton_operator(suite_cubic(cfg.levels_1dof, 1.0, 0.3), "potential_cubic",
                                 cfg));
  const BasisSpec b = make_uniform_basis(cfg.levels_random, 2);
  for (std::size_t k = 0; k < cfg.random_hamiltonians; ++k) {
    const std::uint64_t seed = cfg.seed + k;
    PolyHamiltonian h{b, random_distinct_dof_polynomial(2, cfg.random_degree, seed),
                      {"random", {{"seed", static_cast<double>(seed)}}, {}}};
    auto rs = check_hamilton_operator(h, "random,seed=" + std::to_string(seed), cfg);
    for (auto& r : rs) r.parameters["seed"] = seed;
    append(std::move(rs));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ehrenfest deviation
// ---------------------------------------------------------------------------

/// Ten assorted states on a one-dof basis: Fock states, coherent states and
/// superpositions, plus seeded random low-lying vectors.
inline std::vector<std::pair<std::string, QuantumState>> assorted_states(const BasisSpec& b,
                                                                         std::uint64_t seed) {
  std::vector<std::pair<std::string, QuantumState>> out;
  const auto n = static_cast<Eigen::Index>(b.dimension());
  for (std::size_t k : {0u, 1u, 3u}) out.emplace_back("fock" + std::to_string(k), fock_state(b, {k}));
  const std::pair<const char*, complex> coherent[]{{"coherent(0.5)", {0.5, 0.0}},
                                                    {"coherent(1)", {1.0, 0.0}},
                                                    {"coherent(1.5+0.5i)", {1.5, 0.5}},
                                                    {"coherent(-0.7+1.2i)", {-0.7, 1.2}}};
  for (const auto& [name, a] : coherent) out.emplace_back(name, coherent_state(b, 0, a));
  Vector cat = Vector::Zero(n);
  cat(0) = 1.0;
  cat(3) = complex{0.0, 1.0};
  out.emplace_back("superposition0+i3", QuantumState::normalized(b, cat));
  std::mt19937_64 rng(seed);
  for (int r = 0; r < 2; ++r) {
    Vector v = Vector::Zero(n);
    for (Eigen::Index k = 0; k < std::min<Eigen::Index>(12, n); ++k)
      v(k) = complex{detail::uniform_pm1(rng), detail::uniform_pm1(rng)};
    out.emplace_back("random" + std::to_string(r), QuantumState::normalized(b, v));
  }
  return out;
}

/// |<V'(x)> - V'(<x>) - b (dx)^2| over assorted states for V' = a x + b x^2.
inline std::vector<CheckResult> check_ehrenfest_deviation(const SuiteConfig& cfg = {}) {
  const double alpha = 1.0, beta = 2.0;
  const BasisSpec b = make_uniform_basis(cfg.levels_1dof, 1);
  const auto h = build_potential_hamiltonian(b, {0.0, 0.0, 0.5 * alpha, beta / 3.0});
  std::vector<CheckResult> out;
  for (const auto& [name, psi] : assorted_states(b, cfg.seed)) {
    const DeviationReport r = ehrenfest_check(psi, h);
    const double err = std::abs(r.residual - r.predicted_residual.value());
    out.push_back(make_result("ehrenfest_deviation[" + name + "]",
                              "<V'(x)> - V'(<x>) = b (dx)^2", err, cfg.tol(1e-10),
                              {{"alpha", alpha},
                               {"beta", beta},
                               {"state", name},
                               {"residual", r.residual},
                               {"predicted_residual", *r.predicted_residual},
                               {"delta_x", r.delta_x}}));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

/// The identities covered by each check family.
inline const std::vector<std::pair<std::string, std::vector<std::string>>>& identity_manifest() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> m{
      {"power_commutator", {"[x^n, p] = i hbar n x^(n-1)"}},
      {"newton", {"m d^2x/dt^2 = -V'(x)"}},
      {"hbar_independence",
       {"m d^2x/dt^2 = -V'(x)", "max/min Newton-identity error over hbar < 10"}},
      {"gravity_taylor", {"m d^2x/dt^2 = -V'(x)"}},
      {"lorentz",
       {"(i/hbar)[H, r_i] = (p_i - q A_i)/m", "[pi_1, pi_2] = i hbar q B_3",
        "m dv/dt = q v x B + q E"}},
      {"rotating",
       {"dr_1/dt = (p_1 + m w r_2)/m", "dr_2/dt = (p_2 - m w r_1)/m",
        "m d^2r/dt^2 = -2m w x v - m w x (w x r)"}},
      {"hamilton", {"dq_j/dt = dH/dp_j", "dp_j/dt = -dH/dq_j"}},
      {"ehrenfest_deviation", {"<V'(x)> - V'(<x>) = b (dx)^2"}},
  };
  return m;
}

inline std::vector<CheckResult> run_family(const std::string& family, const SuiteConfig& cfg) {
  if (family == "power_commutator") return check_power_commutator(cfg.power_max, cfg);
  if (family == "newton") return check_newton_family(cfg);
  if (family == "hbar_independence") return check_hbar_independence(cfg);
  if (family == "gravity_taylor") return check_gravity_taylor(cfg);
  if (family == "lorentz") return check_lorentz_family(cfg);
  if (family == "rotating") return check_rotating_family(cfg);
  if (family == "hamilton") return check_hamilton_family(cfg);
  if (family == "ehrenfest_deviation") return check_ehrenfest_deviation(cfg);
  throw InvalidArgument("unknown check family '" + family + "'");
}

struct SuiteReport {
  SuiteConfig config;
  std::vector<CheckResult> results;

  std::size_t failures() const {
    return static_cast<std::size_t>(
        std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.passed; }));
  }
  bool passed() const { return failures() == 0; }
};

/// Runs the configured families in their canonical order.
inline SuiteReport run_all(const SuiteConfig& cfg) {
  SuiteReport report{cfg, {}};
  for (const auto& family : all_check_families()) {
    if (std::find(cfg.families.begin(), cfg.families.end(), family) == cfg.families.end())
      continue;
    for (auto& r : run_family(family, cfg)) report.results.push_back(std::move(r));
  }
  return report;
}

inline json to_json(const CheckResult& r) {
  return {{"name", r.name},
          {"anchor", r.anchor},
          {"measured_error", r.measured_error},
          {"tolerance", r.tolerance},
          {"passed", r.passed},
          {"parameters", r.parameters}};
}

inline json to_json(const SuiteReport& rep) {
  json checks = json::array();
  for (const auto& r : rep.results) checks.push_back(to_json(r));
  return {{"report", "heisenlab-verify"},
          {"version", kVersion},
          {"config", to_json(rep.config)},
          {"checks", std::move(checks)},
          {"summary",
           {{"total", rep.results.size()},
            {"passed", rep.results.size() - rep.failures()},
            {"failed", rep.failures()},
            {"status", rep.passed() ? "pass" : "fail"}}}};
}

}  // namespace heisenlab
