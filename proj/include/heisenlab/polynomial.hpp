#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <compare>
#include <cstdio>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "heisenlab/error.hpp"

namespace heisenlab {

/// Which canonical variable of a dof a factor refers to.
enum class Variable : unsigned char { q = 0, p = 1 };

inline char variable_letter(Variable v) { return v == Variable::q ? 'q' : 'p'; }

struct Factor {
  std::size_t dof = 0;
  Variable kind = Variable::q;
  unsigned exponent = 1;

  friend auto operator<=>(const Factor&, const Factor&) = default;
};

inline Factor q(std::size_t dof, unsigned exponent = 1) {
  return {dof, Variable::q, exponent};
}
inline Factor p(std::size_t dof, unsigned exponent = 1) {
  return {dof, Variable::p, exponent};
}

/// Factors sorted by (dof, kind) with positive exponents, one per variable.
using MonomialKey = std::vector<Factor>;

inline unsigned key_degree(const MonomialKey& key) {
  unsigned d = 0;
  for (const Factor& f : key) d += f.exponent;
  return d;
}

/// Sort, merge repeated variables and drop zero exponents.
inline MonomialKey canonical_key(MonomialKey factors) {
  std::sort(factors.begin(), factors.end(), [](const Factor& a, const Factor& b) {
    return std::tie(a.dof, a.kind) < std::tie(b.dof, b.kind);
  });
  MonomialKey out;
  for (const Factor& f : factors) {
    if (f.exponent == 0) continue;
    if (!out.empty() && out.back().dof == f.dof && out.back().kind == f.kind)
      out.back().exponent += f.exponent;
    else
      out.push_back(f);
  }
  return out;
}

/// Total degree first, then lexicographic on the factor list.
struct KeyOrder {
  bool operator()(const MonomialKey& a, const MonomialKey& b) const {
    const unsigned da = key_degree(a), db = key_degree(b);
    if (da != db) return da < db;
    return a < b;
  }
};

struct Monomial {
  double coefficient = 0.0;
  MonomialKey factors;

  unsigned degree() const { return key_degree(factors); }

  unsigned exponent(std::size_t dof, Variable kind) const {
    for (const Factor& f : factors)
      if (f.dof == dof && f.kind == kind) return f.exponent;
    return 0;
  }

  /// True when some dof appears with both q and p; such a term needs an
  /// ordering rule when it becomes an operator.
  bool mixed_same_dof() const {
    for (std::size_t i = 1; i < factors.size(); ++i)
      if (factors[i].dof == factors[i - 1].dof) return true;
    return false;
  }
};

/**
 * Commutative polynomial in the canonical variables q_d, p_d of `dofs`
 * degrees of freedom with real coefficients.
 *
 * Terms are kept in canonical order (see KeyOrder); exact cancellations are
 * removed, so two polynomials compare equal iff their coefficient maps do.
 */
class Polynomial {
 public:
  explicit Polynomial(std::size_t dofs = 1) : dofs_(dofs) {
    if (dofs == 0) throw InvalidArgument("polynomial: dofs must be positive");
  }

  static Polynomial constant(std::size_t dofs, double c) {
    Polynomial r(dofs);
    r.add_term(c, {});
    return r;
  }

  static Polynomial term(std::size_t dofs, double c, MonomialKey factors) {
    Polynomial r(dofs);
    r.add_term(c, std::move(factors));
    return r;
  }

  static Polynomial variable(std::size_t dofs, std::size_t dof, Variable kind) {
    return term(dofs, 1.0, {{dof, kind, 1}});
  }

  std::size_t dofs() const noexcept { return dofs_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool is_zero() const noexcept { return terms_.empty(); }

  void add_term(double coefficient, MonomialKey factors) {
    if (!std::isfinite(coefficient))
      throw InvalidArgument("polynomial: non-finite coefficient");
    for (const Factor& f : factors)
      if (f.dof >= dofs_)
        throw InvalidArgument("polynomial: factor refers to dof " +
                              std::to_string(f.dof) + " of " +
                              std::to_string(dofs_));
    if (coefficient == 0.0) return;
    MonomialKey key = canonical_key(std::move(factors));
    auto [it, inserted] = terms_.try_emplace(std::move(key), coefficient);
    if (!inserted) {
      it->second += coefficient;
      if (it->second == 0.0) terms_.erase(it);
    }
  }

  std::vector<Monomial> terms() const {
    std::vector<Monomial> out;
    out.reserve(terms_.size());
    for (const auto& [key, c] : terms_) out.push_back({c, key});
    return out;
  }

  double coefficient(const MonomialKey& factors) const {
    auto it = terms_.find(canonical_key(factors));
    return it == terms_.end() ? 0.0 : it->second;
  }

  unsigned degree() const {
    return terms_.empty() ? 0 : key_degree(std::prev(terms_.end())->first);
  }

  bool has_mixed_same_dof() const {
    for (const auto& t : terms())
      if (t.mixed_same_dof()) return true;
    return false;
  }

  /// Value at the classical phase-space point (q, p).
  double evaluate_at(std::span<const double> qs, std::span<const double> ps) const {
    if (qs.size() != dofs_ || ps.size() != dofs_)
      throw InvalidArgument("polynomial: phase-space point has wrong size");
    double sum = 0.0;
    for (const auto& [key, c] : terms_) {
      double v = c;
      for (const Factor& f : key) {
        const double x = f.kind == Variable::q ? qs[f.dof] : ps[f.dof];
        for (unsigned e = 0; e < f.exponent; ++e) v *= x;
      }
      sum += v;
    }
    return sum;
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    a.require_same_dofs(b);
    Polynomial r = a;
    for (const auto& [key, c] : b.terms_) r.add_term(c, key);
    return r;
  }

  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) {
    return a + (-1.0) * b;
  }

  friend Polynomial operator*(double s, const Polynomial& a) {
    Polynomial r(a.dofs_);
    for (const auto& [key, c] : a.terms_) r.add_term(s * c, key);
    return r;
  }

  /// Commutative product of the symbols.
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    a.require_same_dofs(b);
    Polynomial r(a.dofs_);
    for (const auto& [ka, ca] : a.terms_)
      for (const auto& [kb, cb] : b.terms_) {
        MonomialKey k = ka;
        k.insert(k.end(), kb.begin(), kb.end());
        r.add_term(ca * cb, std::move(k));
      }
    return r;
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.dofs_ == b.dofs_ && a.terms_ == b.terms_;
  }

 private:
  void require_same_dofs(const Polynomial& other) const {
    if (dofs_ != other.dofs_)
      throw InvalidArgument("polynomial: dof count mismatch");
  }

  std::size_t dofs_;
  std::map<MonomialKey, double, KeyOrder> terms_;
};

/// d/d(variable), treating every symbol as an ordinary commuting number.
inline Polynomial formal_partial(const Polynomial& h, std::size_t dof,
                                 Variable kind) {
  if (dof >= h.dofs())
    throw InvalidArgument("formal_partial: dof index out of range");
  Polynomial r(h.dofs());
  for (const Monomial& t : h.terms()) {
    const unsigned e = t.exponent(dof, kind);
    if (e == 0) continue;
    MonomialKey k = t.factors;
    for (Factor& f : k)
      if (f.dof == dof && f.kind == kind) f.exponent -= 1;
    r.add_term(t.coefficient * static_cast<double>(e), std::move(k));
  }
  return r;
}

/// Binomial coefficient as a double; exact for the small arguments used here.
inline double binomial(unsigned n, unsigned k) {
  double r = 1.0;
  for (unsigned i = 1; i <= k; ++i)
    r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return std::round(r);
}

/// (v - shift)^n expanded into powers of v.
inline Polynomial shifted_power(std::size_t dofs, std::size_t dof, Variable kind,
                                double shift, unsigned n) {
  Polynomial r(dofs);
  for (unsigned k = 0; k <= n; ++k) {
    const double c = binomial(n, k) * std::pow(-shift, static_cast<double>(n - k));
    r.add_term(c, {{dof, kind, k}});
  }
  return r;
}

// ---------------------------------------------------------------------------
// Text form
// ---------------------------------------------------------------------------

/// Shortest round-trip-safe decimal with 17 significant digits.
inline std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline double parse_real(std::string_view s, const char* what) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end)
    throw InvalidArgument(std::string(what) + ": cannot parse number '" +
                          std::string(s) + "'");
  return v;
}

inline std::size_t parse_count(std::string_view s, const char* what) {
  std::size_t v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end || s.empty())
    throw InvalidArgument(std::string(what) + ": cannot parse integer '" +
                          std::string(s) + "'");
  return v;
}

/// "q0^2 p1^1"; empty for the constant monomial.
inline std::string key_to_text(const MonomialKey& key) {
  std::string s;
  for (const Factor& f : key) {
    if (!s.empty()) s += ' ';
    s += variable_letter(f.kind);
    s += std::to_string(f.dof);
    s += '^';
    s += std::to_string(f.exponent);
  }
  return s;
}

/// Parses one factor token such as "q0^2", "p1" or "q12^3".
inline Factor factor_from_text(std::string_view tok) {
  if (tok.size() < 2 || (tok[0] != 'q' && tok[0] != 'p'))
    throw InvalidArgument("polynomial: bad factor '" + std::string(tok) + "'");
  const Variable kind = tok[0] == 'q' ? Variable::q : Variable::p;
  tok.remove_prefix(1);
  const auto caret = tok.find('^');
  const std::size_t dof = parse_count(tok.substr(0, caret), "polynomial factor");
  unsigned e = 1;
  if (caret != std::string_view::npos)
    e = static_cast<unsigned>(parse_count(tok.substr(caret + 1), "polynomial exponent"));
  return {dof, kind, e};
}

/// One "term <coefficient> <factors...>" line per monomial, canonical order.
inline std::string to_text(const Polynomial& h) {
  std::string out;
  for (const Monomial& t : h.terms()) {
    out += "term ";
    out += format_real(t.coefficient);
    const std::string k = key_to_text(t.factors);
    if (!k.empty()) {
      out += ' ';
      out += k;
    }
    out += '\n';
  }
  return out;
}

/// Inverse of to_text; lines that do not start with "term" are rejected.
inline Polynomial polynomial_from_text(std::size_t dofs, std::string_view text) {
  Polynomial r(dofs);
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    if (word != "term")
      throw InvalidArgument("polynomial: unexpected line '" + line + "'");
    std::string coef;
    if (!(ls >> coef)) throw InvalidArgument("polynomial: term without coefficient");
    MonomialKey key;
    while (ls >> word) key.push_back(factor_from_text(word));
    r.add_term(parse_real(coef, "polynomial coefficient"), std::move(key));
  }
  return r;
}

}  // namespace heisenlab
