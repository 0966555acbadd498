#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "heisenlab/basis.hpp"
#include "heisenlab/error.hpp"
#include "heisenlab/operator.hpp"

namespace heisenlab {

inline constexpr double kNormTolerance = 1e-12;

/// Truncated coherent states are rejected above this tail probability.
inline constexpr double kCoherentTailThreshold = 1e-10;

/// Unit vector in the basis. Construction enforces |psi| = 1 within 1e-12.
class QuantumState {
 public:
  QuantumState(BasisSpec basis, Vector amplitudes)
      : basis_(std::move(basis)), amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.size() != static_cast<Eigen::Index>(basis_.dimension()))
      throw InvalidArgument("state: vector length does not match the basis");
    if (!amplitudes_.allFinite())
      throw NumericalFailure("state: non-finite amplitude");
    if (std::abs(amplitudes_.norm() - 1.0) > kNormTolerance)
      throw InvalidArgument("state: vector is not normalized (norm " +
                            std::to_string(amplitudes_.norm()) + ")");
  }

  /// Rescales `v` to unit norm first.
  static QuantumState normalized(const BasisSpec& basis, const Vector& v) {
    const double n = v.norm();
    if (!(n > 0.0)) throw InvalidArgument("state: zero vector");
    return {basis, v / n};
  }

  const BasisSpec& basis() const noexcept { return basis_; }
  const Vector& amplitudes() const noexcept { return amplitudes_; }

 private:
  BasisSpec basis_;
  Vector amplitudes_;
};

/// Product state |n_0> ⊗ |n_1> ⊗ ... with one occupation number per dof.
inline QuantumState fock_state(const BasisSpec& basis,
                               std::span<const std::size_t> occupations) {
  if (occupations.size() != basis.dofs())
    throw InvalidArgument("fock_state: need one occupation per dof");
  std::size_t index = 0;
  for (std::size_t d = 0; d < basis.dofs(); ++d) {
    if (occupations[d] >= basis.levels())
      throw InvalidArgument("fock_state: occupation " +
                            std::to_string(occupations[d]) +
                            " outside the basis");
    index += occupations[d] * basis.stride(d);
  }
  Vector v = Vector::Zero(static_cast<Eigen::Index>(basis.dimension()));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return {basis, std::move(v)};
}

inline QuantumState fock_state(const BasisSpec& basis,
                               std::initializer_list<std::size_t> occupations) {
  return fock_state(basis, std::span<const std::size_t>(occupations.begin(),
                                                        occupations.size()));
}

/// Poisson probability mass of a coherent state above the truncation,
/// summed directly so small tails keep full relative precision.
inline double coherent_tail_probability(std::size_t levels, complex alpha) {
  const double mean = std::norm(alpha);
  if (mean == 0.0) return 0.0;
  const double n = static_cast<double>(levels);
  double term = std::exp(-mean + n * std::log(mean) - std::lgamma(n + 1.0));
  double sum = 0.0;
  for (double k = n; k < n + 10000.0; k += 1.0) {
    sum += term;
    term *= mean / (k + 1.0);
    if (k > mean && term < 1e-17 * sum) break;
  }
  return sum;
}

/// Renormalized single-dof coherent amplitudes on `levels` states.
inline Vector coherent_amplitudes(std::size_t levels, complex alpha) {
  const double tail = coherent_tail_probability(levels, alpha);
  if (tail > kCoherentTailThreshold)
    throw InvalidArgument("coherent_state: |alpha|^2 = " +
                          std::to_string(std::norm(alpha)) +
                          " leaves tail probability " + std::to_string(tail) +
                          " above the truncation");
  const auto n = static_cast<Eigen::Index>(levels);
  Vector v = Vector::Zero(n);
  const double r = std::abs(alpha);
  const double phase = std::arg(alpha);
  if (r == 0.0) {
    v(0) = 1.0;
    return v;
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    const double kd = static_cast<double>(k);
    const double logmag =
        -0.5 * r * r + kd * std::log(r) - 0.5 * std::lgamma(kd + 1.0);
    v(k) = std::polar(std::exp(logmag), kd * phase);
  }
  return v / v.norm();
}

/// Product of per-dof coherent states with the given eigenvalues of a.
inline QuantumState coherent_state(const BasisSpec& basis,
                                   std::span<const complex> alphas) {
  if (alphas.size() != basis.dofs())
    throw InvalidArgument("coherent_state: need one alpha per dof");
  std::vector<Matrix> factors;
  factors.reserve(alphas.size());
  for (complex a : alphas) factors.emplace_back(coherent_amplitudes(basis.levels(), a));
  const Matrix v = kron(factors);
  return QuantumState::normalized(basis, v.col(0));
}

/// Coherent state on `dof`, vacuum on every other dof.
inline QuantumState coherent_state(const BasisSpec& basis, std::size_t dof,
                                   complex alpha) {
  require_dof(basis, dof, "coherent_state");
  std::vector<complex> alphas(basis.dofs(), complex{0.0, 0.0});
  alphas[dof] = alpha;
  return coherent_state(basis, alphas);
}

/// Coherent-state label whose mean position and momentum are (q, p).
inline complex coherent_alpha(const BasisSpec& basis, std::size_t dof,
                              double q, double p) {
  const double l = basis.length_scale(dof);
  return complex{q / l, p * l / basis.hbar()} / std::sqrt(2.0);
}

/// <psi|A|psi>. The imaginary part is returned, not discarded.
inline complex expectation(const QuantumState& psi, const Operator& a) {
  require_same_basis(psi.basis(), a.basis(), "expectation");
  if (std::abs(psi.amplitudes().norm() - 1.0) > kNormTolerance)
    throw InvalidArgument("expectation: state is not normalized");
  const Vector av = a.matrix() * psi.amplitudes();
  return psi.amplitudes().dot(av);
}

/// sqrt(<A^2> - <A>^2) for hermitian A; clamps tiny negative variances.
inline double uncertainty(const QuantumState& psi, const Operator& a) {
  if (!a.is_hermitian())
    throw NotHermitian("uncertainty: operator is not hermitian");
  require_same_basis(psi.basis(), a.basis(), "uncertainty");
  // <A^2> = |A psi|^2 for hermitian A
  const Vector av = a.matrix() * psi.amplitudes();
  const double mean = psi.amplitudes().dot(av).real();
  const double second = av.squaredNorm();
  return std::sqrt(std::max(0.0, second - mean * mean));
}

}  // namespace heisenlab
