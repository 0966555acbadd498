#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "heisenlab/basis.hpp"
#include "heisenlab/error.hpp"
#include "heisenlab/operator.hpp"
#include "heisenlab/polynomial.hpp"

namespace heisenlab {

/// Builders refuse polynomials above this degree unless told otherwise.
inline constexpr unsigned kDefaultMaxDegree = 8;

/// Uniform electric and magnetic fields acting on a particle of charge `charge`.
struct FieldConfig {
  double charge = 1.0;
  std::array<double, 3> magnetic{0.0, 0.0, 0.0};
  std::array<double, 3> electric{0.0, 0.0, 0.0};

  friend bool operator==(const FieldConfig&, const FieldConfig&) = default;
};

enum class Gauge { symmetric, landau };

/// Scenario tag and the physical parameters a Hamiltonian was built from.
struct HamiltonianInfo {
  std::string scenario = "generic";
  std::map<std::string, double> parameters;
  std::optional<FieldConfig> field;

  friend bool operator==(const HamiltonianInfo&, const HamiltonianInfo&) = default;
};

/// Polynomial Hamiltonian bound to the basis it will be evaluated on.
struct PolyHamiltonian {
  BasisSpec basis;
  Polynomial poly;
  HamiltonianInfo info;

  friend bool operator==(const PolyHamiltonian& a, const PolyHamiltonian& b) {
    return a.basis == b.basis && a.basis.memory_budget() == b.basis.memory_budget() &&
           a.poly == b.poly && a.info == b.info;
  }
};

inline PolyHamiltonian formal_partial(const PolyHamiltonian& h, std::size_t dof,
                                      Variable kind) {
  return {h.basis, formal_partial(h.poly, dof, kind), h.info};
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace detail {

/// Powers of one single-dof matrix, grown on demand.
class PowerCache {
 public:
  explicit PowerCache(Matrix base) {
    powers_.push_back(Matrix::Identity(base.rows(), base.cols()));
    powers_.push_back(std::move(base));
  }

  const Matrix& operator[](unsigned n) {
    while (powers_.size() <= n) powers_.push_back(powers_.back() * powers_[1]);
    return powers_[n];
  }

 private:
  std::vector<Matrix> powers_;
};

}  // namespace detail

/**
 * Weyl-ordered q^a p^b on one dof:
 * 2^-a * sum_k C(a,k) q^k p^b q^(a-k), which is hermitian.
 */
inline Matrix weyl_ordered(detail::PowerCache& xs, detail::PowerCache& ps,
                           unsigned a, unsigned b) {
  Matrix sum = Matrix::Zero(xs[0].rows(), xs[0].cols());
  for (unsigned k = 0; k <= a; ++k) {
    Matrix t = xs[k] * ps[b];
    sum += binomial(a, k) * (t * xs[a - k]);
  }
  return std::ldexp(1.0, -static_cast<int>(a)) * sum;
}

/**
 * Matrix realization of a polynomial on `basis`.
 *
 * Factors on distinct dofs commute and become a plain tensor product. A dof
 * carrying both q^a and p^b is Weyl ordered. Powers are products of the
 * truncated single-dof matrices.
 */
inline Operator evaluate(const Polynomial& h, const BasisSpec& basis) {
  if (h.dofs() != basis.dofs())
    throw InvalidArgument("evaluate: polynomial has " + std::to_string(h.dofs()) +
                          " dofs but the basis has " +
                          std::to_string(basis.dofs()));
  if (matrix_bytes(static_cast<double>(basis.dimension())) >
      static_cast<double>(basis.memory_budget()))
    throw BudgetExceeded("evaluate: basis dimension exceeds the memory budget");

  std::vector<detail::PowerCache> xs, ps;
  for (std::size_t d = 0; d < basis.dofs(); ++d) {
    xs.emplace_back(position_matrix(basis, d));
    ps.emplace_back(momentum_matrix(basis, d));
  }
  const auto n = static_cast<Eigen::Index>(basis.levels());
  const auto dim = static_cast<Eigen::Index>(basis.dimension());
  Matrix total = Matrix::Zero(dim, dim);
  for (const Monomial& t : h.terms()) {
    std::vector<Matrix> factors(basis.dofs(), Matrix::Identity(n, n));
    for (std::size_t d = 0; d < basis.dofs(); ++d) {
      const unsigned a = t.exponent(d, Variable::q);
      const unsigned b = t.exponent(d, Variable::p);
      if (a > 0 && b > 0)
        factors[d] = weyl_ordered(xs[d], ps[d], a, b);
      else if (a > 0)
        factors[d] = xs[d][a];
      else if (b > 0)
        factors[d] = ps[d][b];
    }
    total += t.coefficient * kron(factors);
  }
  return {basis, std::move(total), Hermiticity::hermitian};
}

inline Operator evaluate(const PolyHamiltonian& h) { return evaluate(h.poly, h.basis); }

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

namespace detail {

inline void require_degree(const Polynomial& h, unsigned max_degree,
                           const char* what) {
  if (h.degree() > max_degree)
    throw InvalidArgument(std::string(what) + ": degree " +
                          std::to_string(h.degree()) + " exceeds the cap of " +
                          std::to_string(max_degree));
}

inline void require_equal_masses(const BasisSpec& basis, const char* what) {
  for (double m : basis.masses())
    if (m != basis.mass(0))
      throw InvalidArgument(std::string(what) + ": masses must be equal");
}

inline Polynomial kinetic_energy(const BasisSpec& basis) {
  Polynomial t(basis.dofs());
  for (std::size_t d = 0; d < basis.dofs(); ++d)
    t.add_term(0.5 / basis.mass(d), {p(d, 2)});
  return t;
}

}  // namespace detail

/**
 * p^2/2m + sum_n coeffs[n] (q - expansion_point)^n on a one-dof basis.
 * `coeffs` are Taylor coefficients V^(n)(x0)/n!; an empty list is a free
 * particle.
 */
inline PolyHamiltonian build_potential_hamiltonian(
    const BasisSpec& basis, const std::vector<double>& coeffs,
    double expansion_point = 0.0, unsigned max_degree = kDefaultMaxDegree) {
  if (basis.dofs() != 1)
    throw InvalidArgument("potential hamiltonian needs a one-dof basis");
  if (!std::isfinite(expansion_point))
    throw InvalidArgument("potential hamiltonian: non-finite expansion point");
  HamiltonianInfo info{"potential", {{"expansion_point", expansion_point}}, {}};
  Polynomial h = detail::kinetic_energy(basis);
  for (std::size_t n = 0; n < coeffs.size(); ++n) {
    if (!std::isfinite(coeffs[n]))
      throw InvalidArgument("potential hamiltonian: coefficient " +
                            std::to_string(n) + " is not finite");
    if (coeffs[n] == 0.0) continue;
    h = h + coeffs[n] * shifted_power(1, 0, Variable::q, expansion_point,
                                      static_cast<unsigned>(n));
    info.parameters["c" + std::to_string(n)] = coeffs[n];
  }
  detail::require_degree(h, max_degree, "potential hamiltonian");
  return {basis, std::move(h), std::move(info)};
}

/// Taylor coefficients of -G m M / r about r0, orders 0..order.
inline std::vector<double> gravity_taylor_coefficients(double gmm, double r0,
                                                       unsigned order) {
  std::vector<double> c(order + 1);
  for (unsigned n = 0; n <= order; ++n) {
    const double sign = (n % 2 == 0) ? -1.0 : 1.0;
    c[n] = sign * gmm / std::pow(r0, static_cast<double>(n + 1));
  }
  return c;
}

/**
 * Radial one-dimensional reduction of the two-body gravity problem:
 * p^2/2m plus the Taylor expansion of -G m M / r about r0 up to `order`.
 * The kinetic term uses the basis mass, which must equal `m`.
 */
inline PolyHamiltonian build_gravity_taylor(const BasisSpec& basis, double G,
                                            double M, double m, double r0,
                                            unsigned order,
                                            unsigned max_degree = kDefaultMaxDegree) {
  if (!(r0 > 0.0)) throw InvalidArgument("gravity: r0 must be positive");
  if (order < 1) throw InvalidArgument("gravity: order must be at least 1");
  if (order > max_degree)
    throw InvalidArgument("gravity: order exceeds the degree cap");
  if (basis.dofs() != 1) throw InvalidArgument("gravity: needs a one-dof basis");
  if (std::abs(basis.mass(0) - m) > 1e-12 * std::abs(m))
    throw InvalidArgument("gravity: basis mass differs from the orbiting mass");
  auto h = build_potential_hamiltonian(
      basis, gravity_taylor_coefficients(G * m * M, r0, order), r0, max_degree);
  h.info.scenario = "gravity_taylor";
  h.info.parameters = {{"G", G}, {"M", M}, {"m", m}, {"r0", r0},
                       {"order", static_cast<double>(order)}};
  return h;
}

/**
 * Symmetric-gauge vector potential A = B x r / 2 as polynomials in the
 * positions of `dofs` coordinates; coordinates beyond `dofs` are zero.
 */
inline std::array<Polynomial, 3> vector_potential(const FieldConfig& f,
                                                  std::size_t dofs) {
  std::array<Polynomial, 3> a{Polynomial(dofs), Polynomial(dofs), Polynomial(dofs)};
  const auto& b = f.magnetic;
  // (B x r)_i = B_j r_k - B_k r_j for cyclic (i, j, k)
  for (std::size_t i = 0; i < 3; ++i) {
    const std::size_t j = (i + 1) % 3, k = (i + 2) % 3;
    if (k < dofs) a[i].add_term(0.5 * b[j], {q(k)});
    if (j < dofs) a[i].add_term(-0.5 * b[k], {q(j)});
  }
  return a;
}

/// Symbolic curl of a vector potential over the first `dofs` coordinates.
inline std::array<Polynomial, 3> curl(const std::array<Polynomial, 3>& a) {
  const std::size_t dofs = a[0].dofs();
  auto d = [&](std::size_t comp, std::size_t coord) {
    return coord < dofs ? formal_partial(a[comp], coord, Variable::q)
                        : Polynomial(dofs);
  };
  return {d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1)};
}

/**
 * sum_i (p_i - q A_i)^2 / 2m - q E.r in the symmetric gauge.
 *
 * With two dofs the motion is planar: B must point along the third axis and
 * E must lie in the plane. A_i never contains r_i, so no term mixes q and p
 * of the same dof.
 */
inline PolyHamiltonian build_em_hamiltonian(const BasisSpec& basis,
                                            const FieldConfig& field,
                                            Gauge gauge = Gauge::symmetric) {
  if (gauge != Gauge::symmetric)
    throw InvalidArgument("em hamiltonian: only the symmetric gauge is supported");
  const std::size_t dofs = basis.dofs();
  if (dofs != 2 && dofs != 3)
    throw InvalidArgument("em hamiltonian: needs a two- or three-dof basis");
  detail::require_equal_masses(basis, "em hamiltonian");
  if (dofs == 2 && (field.magnetic[0] != 0.0 || field.magnetic[1] != 0.0 ||
                    field.electric[2] != 0.0))
    throw InvalidArgument(
        "em hamiltonian: planar motion needs B along the third axis and E in the plane");

  const auto a = vector_potential(field, dofs);
  const auto b = curl(a);
  for (std::size_t i = 0; i < 3; ++i) {
    const bool axis_present = dofs == 3 || i == 2;
    if (axis_present && !(b[i] == Polynomial::constant(dofs, field.magnetic[i])))
      throw NumericalFailure("em hamiltonian: gauge curl does not reproduce B");
  }

  const double m = basis.mass(0);
  Polynomial h(dofs);
  for (std::size_t i = 0; i < dofs; ++i) {
    const Polynomial pi =
        Polynomial::variable(dofs, i, Variable::p) - field.charge * a[i];
    h = h + (0.5 / m) * (pi * pi);
    h.add_term(-field.charge * field.electric[i], {q(i)});
  }
  HamiltonianInfo info{"em",
                       {{"charge", field.charge},
                        {"B1", field.magnetic[0]},
                        {"B2", field.magnetic[1]},
                        {"B3", field.magnetic[2]},
                        {"E1", field.electric[0]},
                        {"E2", field.electric[1]},
                        {"E3", field.electric[2]}},
                       field};
  return {basis, std::move(h), std::move(info)};
}

/// p_i - q A_i(r) as a polynomial.
inline Polynomial kinetic_momentum(const PolyHamiltonian& h_em, std::size_t dof) {
  if (!h_em.info.field)
    throw InvalidArgument("kinetic momentum: hamiltonian carries no field");
  if (dof >= h_em.basis.dofs())
    throw InvalidArgument("kinetic momentum: dof index out of range");
  const auto a = vector_potential(*h_em.info.field, h_em.basis.dofs());
  return Polynomial::variable(h_em.basis.dofs(), dof, Variable::p) -
         h_em.info.field->charge * a[dof];
}

inline Operator kinetic_momentum_operator(const PolyHamiltonian& h_em,
                                          std::size_t dof) {
  return evaluate(kinetic_momentum(h_em, dof), h_em.basis);
}

/**
 * [(p1 + m w q2)^2 + (p2 - m w q1)^2] / 2m - c m w^2 (q1^2 + q2^2).
 * c = 1/2 gives the rotating-frame Hamiltonian p^2/2m - w L_z.
 */
inline Polynomial rotating_frame_polynomial(double m, double omega,
                                            double centrifugal_coefficient) {
  const Polynomial p1 = Polynomial::variable(2, 0, Variable::p);
  const Polynomial p2 = Polynomial::variable(2, 1, Variable::p);
  const Polynomial q1 = Polynomial::variable(2, 0, Variable::q);
  const Polynomial q2 = Polynomial::variable(2, 1, Variable::q);
  const Polynomial a = p1 + (m * omega) * q2;
  const Polynomial b = p2 - (m * omega) * q1;
  return (0.5 / m) * (a * a + b * b) -
         (centrifugal_coefficient * m * omega * omega) * (q1 * q1 + q2 * q2);
}

/// Planar particle seen from a frame rotating at angular velocity omega.
inline PolyHamiltonian build_rotating_frame(const BasisSpec& basis, double omega) {
  if (basis.dofs() != 2)
    throw InvalidArgument("rotating frame: needs a two-dof basis");
  if (!std::isfinite(omega)) throw InvalidArgument("rotating frame: bad omega");
  detail::require_equal_masses(basis, "rotating frame");
  HamiltonianInfo info{"rotating", {{"omega", omega}}, {}};
  return {basis, rotating_frame_polynomial(basis.mass(0), omega, 0.5),
          std::move(info)};
}

// ---------------------------------------------------------------------------
// Canonical text form
// ---------------------------------------------------------------------------

namespace detail {

inline std::string join_reals(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ',';
    s += format_real(xs[i]);
  }
  return s;
}

inline std::vector<double> split_reals(std::string_view s, const char* what) {
  std::vector<double> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(parse_real(s.substr(0, comma), what));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

/// Splits "key=value" and checks the key.
inline std::string_view expect_pair(const std::string& tok, std::string_view key) {
  const auto eq = tok.find('=');
  if (eq == std::string::npos || std::string_view(tok).substr(0, eq) != key)
    throw InvalidArgument("hamiltonian text: expected '" + std::string(key) +
                          "=...', got '" + tok + "'");
  return std::string_view(tok).substr(eq + 1);
}

}  // namespace detail

inline constexpr std::string_view kHamiltonianHeader = "heisenlab-hamiltonian 1";

/**
 * Deterministic text form: header, scenario tag, basis line, sorted
 * parameters, optional field line and the canonical term list. Numbers use
 * 17 significant digits so parsing restores them exactly.
 */
inline std::string serialize(const PolyHamiltonian& h) {
  const BasisSpec& b = h.basis;
  std::string out(kHamiltonianHeader);
  out += "\nscenario " + h.info.scenario + "\n";
  out += "basis levels=" + std::to_string(b.levels()) +
         " dofs=" + std::to_string(b.dofs()) + " hbar=" + format_real(b.hbar()) +
         " masses=" + detail::join_reals(b.masses()) +
         " lengths=" + detail::join_reals(b.length_scales()) +
         " budget=" + std::to_string(b.memory_budget()) + "\n";
  for (const auto& [k, v] : h.info.parameters)
    out += "param " + k + " " + format_real(v) + "\n";
  if (h.info.field) {
    const FieldConfig& f = *h.info.field;
    out += "field charge=" + format_real(f.charge) + " B=" +
           detail::join_reals({f.magnetic.begin(), f.magnetic.end()}) + " E=" +
           detail::join_reals({f.electric.begin(), f.electric.end()}) + "\n";
  }
  out += to_text(h.poly);
  return out;
}

inline PolyHamiltonian parse_hamiltonian(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kHamiltonianHeader)
    throw InvalidArgument("hamiltonian text: missing header");
  std::string scenario;
  std::optional<BasisSpec> basis;
  std::map<std::string, double> params;
  std::optional<FieldConfig> field;
  std::string terms;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    if (word == "scenario") {
      ls >> scenario;
    } else if (word == "basis") {
      std::string t[6];
      for (auto& s : t)
        if (!(ls >> s)) throw InvalidArgument("hamiltonian text: short basis line");
      const auto levels = parse_count(detail::expect_pair(t[0], "levels"), "levels");
      const auto dofs = parse_count(detail::expect_pair(t[1], "dofs"), "dofs");
      const double hbar = parse_real(detail::expect_pair(t[2], "hbar"), "hbar");
      auto masses = detail::split_reals(detail::expect_pair(t[3], "masses"), "masses");
      auto lengths = detail::split_reals(detail::expect_pair(t[4], "lengths"), "lengths");
      const auto budget = parse_count(detail::expect_pair(t[5], "budget"), "budget");
      basis = make_basis(levels, dofs, hbar, std::move(masses), std::move(lengths),
                         budget);
    } else if (word == "param") {
      std::string k, v;
      if (!(ls >> k >> v)) throw InvalidArgument("hamiltonian text: bad param line");
      params[k] = parse_real(v, "param");
    } else if (word == "field") {
      std::string c, b, e;
      if (!(ls >> c >> b >> e)) throw InvalidArgument("hamiltonian text: bad field line");
      FieldConfig f;
      f.charge = parse_real(detail::expect_pair(c, "charge"), "charge");
      const auto bv = detail::split_reals(detail::expect_pair(b, "B"), "B");
      const auto ev = detail::split_reals(detail::expect_pair(e, "E"), "E");
      if (bv.size() != 3 || ev.size() != 3)
        throw InvalidArgument("hamiltonian text: field vectors need 3 components");
      std::copy(bv.begin(), bv.end(), f.magnetic.begin());
      std::copy(ev.begin(), ev.end(), f.electric.begin());
      field = f;
    } else if (word == "term") {
      terms += line + "\n";
    } else {
      throw InvalidArgument("hamiltonian text: unknown line '" + line + "'");
    }
  }
  if (!basis) throw InvalidArgument("hamiltonian text: missing basis line");
  Polynomial poly = polynomial_from_text(basis->dofs(), terms);
  return {*basis, std::move(poly), {scenario, std::move(params), field}};
}

}  // namespace heisenlab
