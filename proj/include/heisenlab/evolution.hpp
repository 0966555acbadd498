#pragma once

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "heisenlab/basis.hpp"
#include "heisenlab/error.hpp"
#include "heisenlab/operator.hpp"
#include "heisenlab/state.hpp"
#include "heisenlab/timeseries.hpp"

namespace heisenlab {

/**
 * Eigendecomposition H = V diag(E) V^dagger of a hermitian Hamiltonian,
 * used to apply functions of H exactly.
 *
 * Time evolution follows U_t = exp(+i H t / hbar) with operators evolving as
 * A(t) = U_t A U_t^dagger. The matching Schrodinger state is
 * U_t^dagger |psi> = exp(-i H t / hbar) |psi>, so both pictures give the same
 * expectation values.
 *
 * Each eigenvector is rotated so that its largest-magnitude component is real
 * and positive. Inside a degenerate eigenspace the vectors themselves are
 * still solver dependent; only functions of H are reproducible there.
 */
class SpectralPropagator {
 public:
  explicit SpectralPropagator(const Operator& h) : basis_(h.basis()) {
    const double defect = hermiticity_defect(h.matrix());
    if (h.hermiticity() == Hermiticity::anti_hermitian || defect > kHermiticityTolerance)
      throw NotHermitian("propagator: Hamiltonian is not hermitian (defect " +
                         std::to_string(defect) + ")");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h.matrix());
    if (solver.info() != Eigen::Success)
      throw NumericalFailure("propagator: eigensolver did not converge");
    energies_ = solver.eigenvalues();
    vectors_ = solver.eigenvectors();
    for (Eigen::Index j = 0; j < vectors_.cols(); ++j) {
      Eigen::Index imax = 0;
      vectors_.col(j).cwiseAbs().maxCoeff(&imax);
      const complex c = vectors_(imax, j);
      vectors_.col(j) *= std::conj(c) / std::abs(c);
    }
  }

  const BasisSpec& basis() const noexcept { return basis_; }
  double hbar() const noexcept { return basis_.hbar(); }
  const Eigen::VectorXd& eigenvalues() const noexcept { return energies_; }
  const Matrix& eigenvectors() const noexcept { return vectors_; }

  /// exp(sign * i E_j t / hbar) for every eigenvalue.
  Vector phases(double t, double sign) const {
    Vector ph(energies_.size());
    for (Eigen::Index j = 0; j < energies_.size(); ++j)
      ph(j) = std::polar(1.0, sign * energies_(j) * t / hbar());
    return ph;
  }

  /// U_t = exp(i H t / hbar).
  Matrix unitary(double t) const {
    return vectors_ * phases(t, +1.0).asDiagonal() * vectors_.adjoint();
  }

  /// V^dagger A V.
  Matrix to_eigenbasis(const Matrix& a) const {
    Matrix tmp(a.rows(), a.cols());
    tmp.noalias() = a * vectors_;
    Matrix out(a.rows(), a.cols());
    out.noalias() = vectors_.adjoint() * tmp;
    return out;
  }

  /// V A V^dagger.
  Matrix from_eigenbasis(const Matrix& a) const {
    Matrix tmp(a.rows(), a.cols());
    tmp.noalias() = a * vectors_.adjoint();
    Matrix out(a.rows(), a.cols());
    out.noalias() = vectors_ * tmp;
    return out;
  }

 private:
  BasisSpec basis_;
  Eigen::VectorXd energies_;
  Matrix vectors_;
};

inline SpectralPropagator make_propagator(const Operator& h) {
  return SpectralPropagator(h);
}

/// U_t A U_t^dagger; keeps the hermiticity tag of A.
inline Operator heisenberg_evolve(const SpectralPropagator& prop, const Operator& a,
                                  double t) {
  require_same_basis(prop.basis(), a.basis(), "heisenberg_evolve");
  Matrix tilde = prop.to_eigenbasis(a.matrix());
  const Vector ph = prop.phases(t, +1.0);
  for (Eigen::Index k = 0; k < tilde.cols(); ++k)
    for (Eigen::Index j = 0; j < tilde.rows(); ++j)
      tilde(j, k) *= ph(j) * std::conj(ph(k));
  return {a.basis(), prop.from_eigenbasis(tilde), a.hermiticity()};
}

/// exp(-i H t / hbar) |psi>.
inline QuantumState schrodinger_evolve(const SpectralPropagator& prop,
                                       const QuantumState& psi, double t) {
  require_same_basis(prop.basis(), psi.basis(), "schrodinger_evolve");
  const Matrix& v = prop.eigenvectors();
  Vector c = v.adjoint() * psi.amplitudes();
  c = c.cwiseProduct(prop.phases(t, -1.0));
  return {psi.basis(), v * c};
}

/// (i / hbar) [H, A], the Heisenberg time derivative of A.
inline Operator heisenberg_rhs(const Operator& h, const Operator& a) {
  require_same_basis(h.basis(), a.basis(), "heisenberg_rhs");
  return complex{0.0, 1.0 / h.basis().hbar()} * commutator(h, a);
}

struct Observable {
  std::string name;
  Operator op;
  bool with_uncertainty = false;
};

/**
 * Schrodinger-picture expectation values on a time grid. Produces a channel
 * "mean_<name>" per observable, followed by "delta_<name>" for observables
 * that request their uncertainty.
 *
 * Throws NumericalFailure when a hermitian observable yields an expectation
 * with a non-negligible imaginary part.
 */
inline TimeSeries sample_expectations(const SpectralPropagator& prop,
                                      const QuantumState& psi0,
                                      const std::vector<Observable>& observables,
                                      const std::vector<double>& t_grid) {
  require_increasing(t_grid, "sample_expectations");
  require_same_basis(prop.basis(), psi0.basis(), "sample_expectations");
  for (const auto& o : observables)
    require_same_basis(prop.basis(), o.op.basis(), "sample_expectations");

  const Matrix& v = prop.eigenvectors();
  const Vector c0 = v.adjoint() * psi0.amplitudes();
  std::vector<std::vector<double>> means(observables.size());
  std::vector<std::vector<double>> deltas(observables.size());
  for (double t : t_grid) {
    const Vector psi = v * c0.cwiseProduct(prop.phases(t, -1.0));
    for (std::size_t k = 0; k < observables.size(); ++k) {
      const Operator& a = observables[k].op;
      const Vector av = a.matrix() * psi;
      const complex mean = psi.dot(av);
      if (a.is_hermitian() &&
          std::abs(mean.imag()) > 1e-9 * std::max(1.0, std::abs(mean.real())))
        throw NumericalFailure("sample_expectations: <" + observables[k].name +
                               "> has imaginary part " + std::to_string(mean.imag()));
      means[k].push_back(mean.real());
      if (observables[k].with_uncertainty) {
        if (!a.is_hermitian())
          throw NotHermitian("sample_expectations: uncertainty of non-hermitian " +
                             observables[k].name);
        deltas[k].push_back(
            std::sqrt(std::max(0.0, av.squaredNorm() - mean.real() * mean.real())));
      }
    }
  }
  TimeSeries ts(t_grid);
  for (std::size_t k = 0; k < observables.size(); ++k)
    ts.add_channel("mean_" + observables[k].name, std::move(means[k]));
  for (std::size_t k = 0; k < observables.size(); ++k)
    if (observables[k].with_uncertainty)
      ts.add_channel("delta_" + observables[k].name, std::move(deltas[k]));
  return ts;
}

}  // namespace heisenlab
