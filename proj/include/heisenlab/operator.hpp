#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "heisenlab/basis.hpp"
#include "heisenlab/error.hpp"

namespace heisenlab {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr complex kI{0.0, 1.0};

/// Tolerance on max|A - A^dagger| relative to max|A| for hermitian operators.
inline constexpr double kHermiticityTolerance = 1e-12;

enum class Hermiticity { hermitian, anti_hermitian, general };

/// Largest elementwise |A - A^dagger| divided by the largest |A_ij|.
inline double hermiticity_defect(const Matrix& m) {
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() / scale;
}

/**
 * Dense complex matrix representing an observable on a BasisSpec.
 *
 * The hermiticity tag is propagated by the arithmetic below; it is never
 * inferred from the numbers. Operators are immutable values.
 */
class Operator {
 public:
  Operator(BasisSpec basis, Matrix matrix,
           Hermiticity kind = Hermiticity::general)
      : basis_(std::move(basis)), matrix_(std::move(matrix)), kind_(kind) {
    const auto n = static_cast<Eigen::Index>(basis_.dimension());
    if (matrix_.rows() != n || matrix_.cols() != n)
      throw InvalidArgument("operator: matrix is " +
                            std::to_string(matrix_.rows()) + "x" +
                            std::to_string(matrix_.cols()) +
                            " but the basis dimension is " +
                            std::to_string(n));
  }

  static Operator zero(const BasisSpec& basis) {
    const auto n = static_cast<Eigen::Index>(basis.dimension());
    return {basis, Matrix::Zero(n, n), Hermiticity::hermitian};
  }

  static Operator identity(const BasisSpec& basis) {
    const auto n = static_cast<Eigen::Index>(basis.dimension());
    return {basis, Matrix::Identity(n, n), Hermiticity::hermitian};
  }

  const BasisSpec& basis() const noexcept { return basis_; }
  const Matrix& matrix() const noexcept { return matrix_; }
  Hermiticity hermiticity() const noexcept { return kind_; }
  bool is_hermitian() const noexcept { return kind_ == Hermiticity::hermitian; }
  std::size_t dimension() const noexcept { return basis_.dimension(); }

  complex operator()(Eigen::Index i, Eigen::Index j) const {
    return matrix_(i, j);
  }

  double frobenius_norm() const { return matrix_.norm(); }

  Operator adjoint() const { return {basis_, matrix_.adjoint(), kind_}; }

  /// A^n by repeated multiplication; A^0 is the identity.
  Operator pow(unsigned n) const {
    if (n == 0) return identity(basis_);
    Matrix result = matrix_;
    for (unsigned k = 1; k < n; ++k) result = (result * matrix_).eval();
    Hermiticity kind = Hermiticity::general;
    if (kind_ == Hermiticity::hermitian) kind = Hermiticity::hermitian;
    if (kind_ == Hermiticity::anti_hermitian)
      kind = (n % 2 == 0) ? Hermiticity::hermitian : Hermiticity::anti_hermitian;
    return {basis_, std::move(result), kind};
  }

  friend Operator operator+(const Operator& a, const Operator& b) {
    require_same_basis(a.basis_, b.basis_, "operator +");
    return {a.basis_, a.matrix_ + b.matrix_, sum_kind(a.kind_, b.kind_)};
  }

  friend Operator operator-(const Operator& a, const Operator& b) {
    require_same_basis(a.basis_, b.basis_, "operator -");
    return {a.basis_, a.matrix_ - b.matrix_, sum_kind(a.kind_, b.kind_)};
  }

  friend Operator operator-(const Operator& a) {
    return {a.basis_, -a.matrix_, a.kind_};
  }

  friend Operator operator*(double s, const Operator& a) {
    return {a.basis_, s * a.matrix_, a.kind_};
  }

  friend Operator operator*(complex s, const Operator& a) {
    Hermiticity kind = Hermiticity::general;
    if (s.imag() == 0.0) {
      kind = a.kind_;
    } else if (s.real() == 0.0 && a.kind_ != Hermiticity::general) {
      kind = a.kind_ == Hermiticity::hermitian ? Hermiticity::anti_hermitian
                                               : Hermiticity::hermitian;
    }
    return {a.basis_, s * a.matrix_, kind};
  }

  /// Matrix product. The result is tagged general.
  friend Operator operator*(const Operator& a, const Operator& b) {
    require_same_basis(a.basis_, b.basis_, "operator *");
    Matrix m(a.matrix_.rows(), b.matrix_.cols());
    m.noalias() = a.matrix_ * b.matrix_;
    return {a.basis_, std::move(m), Hermiticity::general};
  }

 private:
  static Hermiticity sum_kind(Hermiticity a, Hermiticity b) {
    return a == b ? a : Hermiticity::general;
  }

  BasisSpec basis_;
  Matrix matrix_;
  Hermiticity kind_;
};

/// Retag an operator whose symmetry is known from the way it was built.
inline Operator with_hermiticity(Operator a, Hermiticity kind) {
  return {a.basis(), a.matrix(), kind};
}

/// Kronecker product of a list of square matrices, first factor outermost.
inline Matrix kron(std::span<const Matrix> factors) {
  Matrix result = Matrix::Ones(1, 1);
  for (const Matrix& f : factors) {
    Matrix next(result.rows() * f.rows(), result.cols() * f.cols());
    for (Eigen::Index i = 0; i < result.rows(); ++i)
      for (Eigen::Index j = 0; j < result.cols(); ++j)
        next.block(i * f.rows(), j * f.cols(), f.rows(), f.cols()) =
            result(i, j) * f;
    result = std::move(next);
  }
  return result;
}

/// Embed a single-dof matrix as identity ⊗ ... ⊗ m ⊗ ... ⊗ identity.
inline Matrix embed(const BasisSpec& basis, std::size_t dof, const Matrix& m) {
  const auto n = static_cast<Eigen::Index>(basis.levels());
  std::vector<Matrix> factors(basis.dofs(), Matrix::Identity(n, n));
  factors.at(dof) = m;
  return kron(factors);
}

/// Lowering operator a on one dof: a|k> = sqrt(k)|k-1>.
inline Matrix lowering_matrix(std::size_t levels) {
  const auto n = static_cast<Eigen::Index>(levels);
  Matrix a = Matrix::Zero(n, n);
  for (Eigen::Index k = 1; k < n; ++k)
    a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

/// Single-dof position matrix l/sqrt(2) (a + a^dagger).
inline Matrix position_matrix(const BasisSpec& basis, std::size_t dof) {
  const Matrix a = lowering_matrix(basis.levels());
  return (basis.length_scale(dof) / std::sqrt(2.0)) * (a + a.adjoint());
}

/// Single-dof momentum matrix i hbar/(l sqrt(2)) (a^dagger - a).
inline Matrix momentum_matrix(const BasisSpec& basis, std::size_t dof) {
  const Matrix a = lowering_matrix(basis.levels());
  return (kI * basis.hbar() / (basis.length_scale(dof) * std::sqrt(2.0))) *
         (a.adjoint() - a);
}

inline void require_dof(const BasisSpec& basis, std::size_t dof,
                        const char* what) {
  if (dof >= basis.dofs())
    throw InvalidArgument(std::string(what) + ": dof index " +
                          std::to_string(dof) + " out of range for " +
                          std::to_string(basis.dofs()) + " dofs");
}

inline Operator position_operator(const BasisSpec& basis, std::size_t dof) {
  require_dof(basis, dof, "position_operator");
  return {basis, embed(basis, dof, position_matrix(basis, dof)),
          Hermiticity::hermitian};
}

inline Operator momentum_operator(const BasisSpec& basis, std::size_t dof) {
  require_dof(basis, dof, "momentum_operator");
  return {basis, embed(basis, dof, momentum_matrix(basis, dof)),
          Hermiticity::hermitian};
}

/// AB - BA. Anti-hermitian when both inputs are hermitian.
inline Operator commutator(const Operator& a, const Operator& b) {
  require_same_basis(a.basis(), b.basis(), "commutator");
  Matrix m(a.matrix().rows(), a.matrix().cols());
  m.noalias() = a.matrix() * b.matrix();
  m.noalias() -= b.matrix() * a.matrix();
  Hermiticity kind = Hermiticity::general;
  if (a.hermiticity() != Hermiticity::general &&
      b.hermiticity() != Hermiticity::general)
    kind = a.hermiticity() == b.hermiticity() ? Hermiticity::anti_hermitian
                                              : Hermiticity::hermitian;
  return {a.basis(), std::move(m), kind};
}

/// (AB + BA)/2; hermitian for hermitian inputs.
inline Operator symmetrized_product(const Operator& a, const Operator& b) {
  require_same_basis(a.basis(), b.basis(), "symmetrized_product");
  Matrix m(a.matrix().rows(), a.matrix().cols());
  m.noalias() = a.matrix() * b.matrix();
  m.noalias() += b.matrix() * a.matrix();
  m *= 0.5;
  const bool herm = a.is_hermitian() && b.is_hermitian();
  return {a.basis(), std::move(m),
          herm ? Hermiticity::hermitian : Hermiticity::general};
}

/**
 * Keep the lowest `levels` basis states of every dof.
 *
 * The canonical commutation relation has no finite-dimensional
 * representation, so truncated operators only satisfy it away from the top
 * of the basis; identities are compared on such an interior block.
 */
struct InteriorBlock {
  std::size_t levels;
};

/// Minimum number of top levels kept out of an identity check.
inline std::size_t safety_margin(unsigned max_degree) {
  return std::max<std::size_t>(4, max_degree);
}

/// Interior block of size floor(fraction * levels), at least 1.
inline InteriorBlock interior_block(const BasisSpec& basis,
                                    double fraction = 0.5) {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw InvalidArgument("interior fraction must lie in (0, 1]");
  const auto m = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(basis.levels())));
  return {std::max<std::size_t>(m, 1)};
}

/// Throws unless `block` is usable for an identity check involving
/// polynomials up to `max_degree`.
inline void require_safe_block(const InteriorBlock& block,
                               const BasisSpec& basis, unsigned max_degree) {
  const std::size_t margin = safety_margin(max_degree);
  if (block.levels < 2)
    throw InvalidArgument("interior block must keep at least 2 levels");
  if (block.levels + margin > basis.levels())
    throw InvalidArgument("interior block of " + std::to_string(block.levels) +
                          " levels leaves less than the safety margin of " +
                          std::to_string(margin) + " out of " +
                          std::to_string(basis.levels()));
}

/// Flattened indices of the block, in increasing order.
inline std::vector<Eigen::Index> interior_indices(const BasisSpec& basis,
                                                  const InteriorBlock& block) {
  std::vector<Eigen::Index> idx;
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    bool inside = true;
    for (std::size_t d = 0; d < basis.dofs() && inside; ++d)
      inside = basis.digit(i, d) < block.levels;
    if (inside) idx.push_back(static_cast<Eigen::Index>(i));
  }
  return idx;
}

/// Sub-matrix of `a` on the interior block, as an operator on the reduced
/// basis with `block.levels` states per dof.
inline Operator interior_project(const Operator& a, const InteriorBlock& block) {
  const BasisSpec& basis = a.basis();
  if (block.levels == 0 || block.levels > basis.levels())
    throw InvalidArgument("interior block of " + std::to_string(block.levels) +
                          " levels is invalid for a basis of " +
                          std::to_string(basis.levels()));
  const auto idx = interior_indices(basis, block);
  const auto n = static_cast<Eigen::Index>(idx.size());
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = a.matrix()(idx[i], idx[j]);
  return {basis.truncated(block.levels), std::move(m), a.hermiticity()};
}

/**
 * ||measured - expected||_F / ||expected||_F, or the absolute norm of
 * `measured` when `expected` vanishes.
 */
inline double relative_error(const Matrix& measured, const Matrix& expected) {
  const double diff = (measured - expected).norm();
  const double ref = expected.norm();
  return ref > 0.0 ? diff / ref : diff;
}

inline double relative_error(const Operator& measured,
                             const Operator& expected) {
  require_same_basis(measured.basis(), expected.basis(), "relative_error");
  return relative_error(measured.matrix(), expected.matrix());
}

}  // namespace heisenlab
