#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "heisenlab/error.hpp"
#include "heisenlab/hamiltonians.hpp"
#include "heisenlab/state.hpp"
#include "heisenlab/timeseries.hpp"

namespace heisenlab {

/**
 * Gap between the mean force and the force at the mean position.
 *
 * residual = mean_force - classical_force_at_mean. When V' is at most
 * quadratic, V'(x) = a0 + a x + b x^2, the residual equals b (dx)^2 exactly
 * and is stored in predicted_residual; otherwise that field is empty.
 */
struct DeviationReport {
  double mean_force = 0.0;
  double classical_force_at_mean = 0.0;
  double residual = 0.0;
  std::optional<double> predicted_residual;
  double delta_x = 0.0;
  double mean_x = 0.0;
};

/// Throws unless every term of `h` is a pure power of q or of p.
inline void require_potential_form(const Polynomial& h, const char* what) {
  if (h.dofs() != 1)
    throw InvalidArgument(std::string(what) + ": needs a one-dof Hamiltonian");
  for (const Monomial& t : h.terms())
    if (t.mixed_same_dof())
      throw InvalidArgument(std::string(what) + ": Hamiltonian is not of the form T(p) + V(q)");
}

inline DeviationReport ehrenfest_check(const QuantumState& psi, const PolyHamiltonian& h) {
  require_potential_form(h.poly, "ehrenfest_check");
  require_same_basis(psi.basis(), h.basis, "ehrenfest_check");
  const Polynomial force = formal_partial(h.poly, 0, Variable::q);  // V'(q)
  const Operator x = position_operator(h.basis, 0);

  DeviationReport r;
  r.mean_force = expectation(psi, evaluate(force, h.basis)).real();
  r.mean_x = expectation(psi, x).real();
  const double zero = 0.0;
  r.classical_force_at_mean = force.evaluate_at({&r.mean_x, 1}, {&zero, 1});
  r.residual = r.mean_force - r.classical_force_at_mean;
  r.delta_x = uncertainty(psi, x);
  if (force.degree() <= 2) {
    const double beta = force.coefficient({q(0, 2)});
    r.predicted_residual = beta * r.delta_x * r.delta_x;
  }
  return r;
}

/// Gap statistics of one channel pair over a shared time grid.
struct DivergenceMetrics {
  std::string quantum_channel;
  std::string classical_channel;
  double max_abs_gap = 0.0;
  double time_of_max = 0.0;
  double rms_gap = 0.0;
};

/// Per-pair |quantum - classical| statistics. The grids must be identical.
inline std::vector<DivergenceMetrics> compare_trajectories(
    const TimeSeries& quantum, const TimeSeries& classical,
    const std::vector<std::pair<std::string, std::string>>& channel_pairs) {
  if (quantum.times() != classical.times())
    throw InvalidArgument("compare_trajectories: time grids differ");
  std::vector<DivergenceMetrics> out;
  for (const auto& [qn, cn] : channel_pairs) {
    const auto& a = quantum.channel(qn);
    const auto& b = classical.channel(cn);
    DivergenceMetrics m{qn, cn, 0.0, quantum.times().empty() ? 0.0 : quantum.times()[0], 0.0};
    double sq = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double g = std::abs(a[k] - b[k]);
      sq += g * g;
      if (g > m.max_abs_gap) {
        m.max_abs_gap = g;
        m.time_of_max = quantum.times()[k];
      }
    }
    m.rms_gap = a.empty() ? 0.0 : std::sqrt(sq / static_cast<double>(a.size()));
    out.push_back(std::move(m));
  }
  return out;
}

/// Largest max_abs_gap over a set of metrics; 0 for an empty set.
inline double worst_gap(const std::vector<DivergenceMetrics>& ms) {
  double w = 0.0;
  for (const auto& m : ms) w = std::max(w, m.max_abs_gap);
  return w;
}

/**
 * True when every first derivative of H has total degree at most 1. The
 * equations of motion are then linear in the canonical operators and
 * expectation values follow the classical trajectory exactly.
 */
inline bool linear_scenario_exactness(const Polynomial& h) {
  for (std::size_t j = 0; j < h.dofs(); ++j)
    for (Variable v : {Variable::q, Variable::p})
      if (formal_partial(h, j, v).degree() > 1) return false;
  return true;
}

inline bool linear_scenario_exactness(const PolyHamiltonian& h) {
  return linear_scenario_exactness(h.poly);
}

}  // namespace heisenlab
