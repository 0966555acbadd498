#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "heisenlab/error.hpp"

namespace heisenlab {

using complex = std::complex<double>;

/// Default cap on the size of one dense operator matrix, in bytes.
inline constexpr std::size_t kDefaultMemoryBudget = std::size_t{64} << 20;

/**
 * Truncated harmonic-oscillator (Fock) basis for a system of `dofs` degrees
 * of freedom, each truncated to the lowest `levels` states.
 *
 * The full space is the tensor product of the per-dof spaces with dof 0 as
 * the most significant index, so a basis index decomposes as
 * `index = sum_d digit_d * levels^(dofs-1-d)`.
 *
 * Each dof carries a length scale `l` that fixes its ladder operators through
 * x = l/sqrt(2) (a + a^dagger). The matching reference frequency is
 * hbar / (m l^2).
 */
class BasisSpec {
 public:
  std::size_t levels() const noexcept { return levels_; }
  std::size_t dofs() const noexcept { return masses_.size(); }
  std::size_t dimension() const noexcept { return dimension_; }
  double hbar() const noexcept { return hbar_; }
  double mass(std::size_t dof) const { return masses_.at(dof); }
  double length_scale(std::size_t dof) const { return lengths_.at(dof); }
  const std::vector<double>& masses() const noexcept { return masses_; }
  const std::vector<double>& length_scales() const noexcept { return lengths_; }
  std::size_t memory_budget() const noexcept { return budget_; }

  /// hbar / (m l^2) for the given dof.
  double reference_frequency(std::size_t dof) const {
    const double l = length_scale(dof);
    return hbar_ / (mass(dof) * l * l);
  }

  /// Distance between consecutive indices of `dof` in the flattened space.
  std::size_t stride(std::size_t dof) const {
    std::size_t s = 1;
    for (std::size_t d = dofs(); d-- > dof + 1;) s *= levels_;
    return s;
  }

  std::size_t digit(std::size_t index, std::size_t dof) const {
    return (index / stride(dof)) % levels_;
  }

  /// Same basis with every dof truncated to `levels` states.
  BasisSpec truncated(std::size_t levels) const {
    return BasisSpec(levels, hbar_, masses_, lengths_, budget_);
  }

  friend bool operator==(const BasisSpec& a, const BasisSpec& b) {
    return a.levels_ == b.levels_ && a.hbar_ == b.hbar_ &&
           a.masses_ == b.masses_ && a.lengths_ == b.lengths_;
  }

  friend BasisSpec make_basis(std::size_t, std::size_t, double,
                              std::vector<double>, std::vector<double>,
                              std::size_t);

 private:
  BasisSpec(std::size_t levels, double hbar, std::vector<double> masses,
            std::vector<double> lengths, std::size_t budget)
      : levels_(levels),
        hbar_(hbar),
        masses_(std::move(masses)),
        lengths_(std::move(lengths)),
        budget_(budget) {
    dimension_ = 1;
    for (std::size_t d = 0; d < masses_.size(); ++d) dimension_ *= levels_;
  }

  std::size_t levels_;
  double hbar_;
  std::vector<double> masses_;
  std::vector<double> lengths_;
  std::size_t budget_;
  std::size_t dimension_ = 1;
};

/// Bytes taken by one dense complex matrix of the given dimension.
inline double matrix_bytes(double dimension) {
  return dimension * dimension * static_cast<double>(sizeof(complex));
}

/**
 * Validated BasisSpec. Throws InvalidArgument on non-positive parameters or
 * list-length mismatches, BudgetExceeded when one dense operator matrix would
 * exceed `memory_budget` bytes.
 */
inline BasisSpec make_basis(std::size_t levels, std::size_t dofs, double hbar,
                            std::vector<double> masses,
                            std::vector<double> length_scales,
                            std::size_t memory_budget = kDefaultMemoryBudget) {
  if (levels == 0) throw InvalidArgument("basis: levels must be positive");
  if (dofs == 0) throw InvalidArgument("basis: dofs must be positive");
  if (!(hbar > 0.0) || !std::isfinite(hbar))
    throw InvalidArgument("basis: hbar must be positive and finite");
  if (masses.size() != dofs)
    throw InvalidArgument("basis: expected " + std::to_string(dofs) +
                          " masses, got " + std::to_string(masses.size()));
  if (length_scales.size() != dofs)
    throw InvalidArgument("basis: expected " + std::to_string(dofs) +
                          " length scales, got " +
                          std::to_string(length_scales.size()));
  for (double m : masses)
    if (!(m > 0.0) || !std::isfinite(m))
      throw InvalidArgument("basis: masses must be positive and finite");
  for (double l : length_scales)
    if (!(l > 0.0) || !std::isfinite(l))
      throw InvalidArgument("basis: length scales must be positive and finite");

  const double dim = std::pow(static_cast<double>(levels),
                              static_cast<double>(dofs));
  if (matrix_bytes(dim) > static_cast<double>(memory_budget))
    throw BudgetExceeded("basis: a " + std::to_string(levels) + "^" +
                         std::to_string(dofs) +
                         " operator matrix exceeds the memory budget of " +
                         std::to_string(memory_budget) + " bytes");
  return BasisSpec(levels, hbar, std::move(masses), std::move(length_scales),
                   memory_budget);
}

/// Convenience overload: identical mass and length scale on every dof.
inline BasisSpec make_uniform_basis(std::size_t levels, std::size_t dofs,
                                    double hbar = 1.0, double mass = 1.0,
                                    double length_scale = 1.0,
                                    std::size_t memory_budget =
                                        kDefaultMemoryBudget) {
  return make_basis(levels, dofs, hbar, std::vector<double>(dofs, mass),
                    std::vector<double>(dofs, length_scale), memory_budget);
}

inline void require_same_basis(const BasisSpec& a, const BasisSpec& b,
                               const char* what) {
  if (!(a == b)) throw BasisMismatch(std::string(what) + ": basis mismatch");
}

}  // namespace heisenlab
