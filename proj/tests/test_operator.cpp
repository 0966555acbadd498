#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "heisenlab/operator.hpp"
#include "heisenlab/state.hpp"

using namespace heisenlab;
using Catch::Approx;

namespace {

// Independent ladder construction: explicit sqrt(k+1) on the superdiagonal of
// a^dagger, built without lowering_matrix.
Matrix raising_oracle(std::size_t n) {
  Matrix a = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k + 1 < n; ++k)
    a(static_cast<Eigen::Index>(k + 1), static_cast<Eigen::Index>(k)) = std::sqrt(k + 1.0);
  return a;
}

Operator random_hermitian(const BasisSpec& b, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto n = static_cast<Eigen::Index>(b.dimension());
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = complex{u(rng), u(rng)};
  return {b, 0.5 * (m + m.adjoint()), Hermiticity::hermitian};
}

}  // namespace

TEST_CASE("make_basis dimensions and guards") {
  CHECK(make_basis(64, 1, 1.0, {1.0}, {1.0}).dimension() == 64);
  CHECK(make_basis(32, 2, 1.0, {1.0, 1.0}, {1.0, 1.0}).dimension() == 1024);
  CHECK_THROWS_AS(make_basis(2048, 2, 1.0, {1.0, 1.0}, {1.0, 1.0}), BudgetExceeded);
  CHECK_THROWS_AS(make_basis(8, 1, 0.0, {1.0}, {1.0}), InvalidArgument);
  CHECK_THROWS_AS(make_basis(8, 1, 1.0, {-1.0}, {1.0}), InvalidArgument);
  CHECK_THROWS_AS(make_basis(8, 1, 1.0, {1.0}, {0.0}), InvalidArgument);
  CHECK_THROWS_AS(make_basis(8, 2, 1.0, {1.0}, {1.0, 1.0}), InvalidArgument);
  CHECK_THROWS_AS(make_basis(0, 1, 1.0, {1.0}, {1.0}), InvalidArgument);
  // a larger budget admits the same basis
  CHECK(make_basis(2048, 2, 1.0, {1.0, 1.0}, {1.0, 1.0}, std::size_t{1} << 50).dimension() ==
        2048u * 2048u);
}

TEST_CASE("tensor index layout puts dof 0 first") {
  const auto b = make_uniform_basis(3, 2);
  CHECK(b.stride(0) == 3);
  CHECK(b.stride(1) == 1);
  CHECK(b.digit(7, 0) == 2);
  CHECK(b.digit(7, 1) == 1);
}

TEST_CASE("position and momentum match the ladder oracle") {
  const double hbar = 0.7, l = 1.3;
  const auto b = make_basis(6, 1, hbar, {2.0}, {l});
  const Matrix ad = raising_oracle(6);
  const Matrix a = ad.adjoint();
  const Matrix x = (l / std::sqrt(2.0)) * (a + ad);
  const Matrix p = complex{0.0, hbar / (l * std::sqrt(2.0))} * (ad - a);
  CHECK((position_operator(b, 0).matrix() - x).norm() < 1e-15);
  CHECK((momentum_operator(b, 0).matrix() - p).norm() < 1e-15);
}

TEST_CASE("position matrix is real symmetric tridiagonal with zero diagonal") {
  const auto b = make_uniform_basis(4, 1);
  const Matrix x = position_operator(b, 0).matrix();
  CHECK(x.imag().norm() == 0.0);
  CHECK((x - x.transpose()).norm() == 0.0);
  for (Eigen::Index i = 0; i < 4; ++i)
    for (Eigen::Index j = 0; j < 4; ++j)
      if (std::abs(i - j) != 1) CHECK(x(i, j) == complex{0.0, 0.0});
}

TEST_CASE("vacuum moments match the ground-state Gaussian") {
  const double hbar = 1.5, m = 2.0, l = 0.8;
  const auto b = make_basis(16, 1, hbar, {m}, {l});
  const double w0 = hbar / (m * l * l);
  CHECK(b.reference_frequency(0) == Approx(w0));
  const auto vac = fock_state(b, {0});
  const Operator x = position_operator(b, 0), p = momentum_operator(b, 0);
  CHECK(std::abs(expectation(vac, x)) < 1e-15);
  CHECK(std::abs(expectation(vac, p)) < 1e-15);
  CHECK(expectation(vac, x * x).real() == Approx(hbar / (2 * m * w0)).epsilon(1e-13));
  CHECK(expectation(vac, p * p).real() == Approx(hbar * m * w0 / 2).epsilon(1e-13));
  CHECK(uncertainty(vac, x) == Approx(std::sqrt(hbar / (2 * m * w0))).epsilon(1e-13));
  const auto one = fock_state(b, {1});
  CHECK(uncertainty(one, x) == Approx(std::sqrt(3 * hbar / (2 * m * w0))).epsilon(1e-13));
}

TEST_CASE("momentum is hermitian within tolerance") {
  const auto b = make_uniform_basis(32, 2);
  const Operator p = momentum_operator(b, 1);
  CHECK(p.is_hermitian());
  CHECK(hermiticity_defect(p.matrix()) <= 1e-12);
}

TEST_CASE("dof index out of range") {
  const auto b = make_uniform_basis(4, 2);
  CHECK_THROWS_AS(position_operator(b, 2), InvalidArgument);
  CHECK_THROWS_AS(momentum_operator(b, 5), InvalidArgument);
}

TEST_CASE("commutator basics") {
  const auto b = make_uniform_basis(64, 1);
  const Operator x = position_operator(b, 0), p = momentum_operator(b, 0);
  CHECK(commutator(x, x).frobenius_norm() == 0.0);
  CHECK(commutator(x, p).hermiticity() == Hermiticity::anti_hermitian);

  const InteriorBlock blk = interior_block(b);
  CHECK(blk.levels == 32);
  const Operator xp = interior_project(commutator(x, p), blk);
  const Matrix expect = complex{0.0, 1.0} * Matrix::Identity(32, 32);
  CHECK((xp.matrix() - expect).cwiseAbs().maxCoeff() < 1e-10);

  const Operator x2p = interior_project(commutator(x * x, p), blk);
  const Operator two_ihx = interior_project(complex{0.0, 2.0} * x, blk);
  CHECK(relative_error(x2p, two_ihx) < 1e-10);
}

TEST_CASE("truncation breaks the canonical relation only at the top level") {
  const auto b = make_uniform_basis(10, 1, 0.5);
  const Matrix c = commutator(position_operator(b, 0), momentum_operator(b, 0)).matrix();
  const Matrix expect = complex{0.0, 0.5} * Matrix::Identity(10, 10);
  const Matrix diff = c - expect;
  // only the (n-1, n-1) entry differs, by -i hbar n
  CHECK(diff.topLeftCorner(9, 9).norm() < 1e-14);
  CHECK(std::abs(diff(9, 9) - complex{0.0, -0.5 * 10}) < 1e-13);
}

TEST_CASE("commutator antisymmetry is exact") {
  std::mt19937_64 rng(7);
  const auto b = make_uniform_basis(12, 1);
  const Operator a = random_hermitian(b, rng), c = random_hermitian(b, rng);
  const Matrix lhs = commutator(a, c).matrix();
  const Matrix rhs = -commutator(c, a).matrix();
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Jacobi identity on random hermitian triples") {
  std::mt19937_64 rng(11);
  const auto b = make_uniform_basis(5, 2);
  for (int trial = 0; trial < 5; ++trial) {
    const Operator a = random_hermitian(b, rng), bb = random_hermitian(b, rng),
                   c = random_hermitian(b, rng);
    const Operator j = commutator(a, commutator(bb, c)) + commutator(bb, commutator(c, a)) +
                       commutator(c, commutator(a, bb));
    CHECK(j.frobenius_norm() <=
          1e-10 * a.frobenius_norm() * bb.frobenius_norm() * c.frobenius_norm());
  }
}

TEST_CASE("operators on different dofs commute") {
  const auto b = make_uniform_basis(16, 2);
  CHECK(commutator(position_operator(b, 0), momentum_operator(b, 1)).frobenius_norm() <=
        1e-12);
  CHECK(commutator(momentum_operator(b, 0), momentum_operator(b, 1)).frobenius_norm() <=
        1e-12);
}

TEST_CASE("interior projection") {
  const auto b = make_uniform_basis(6, 1);
  const Operator x = position_operator(b, 0);
  SECTION("full block leaves the operator unchanged") {
    const Operator full = interior_project(x, {6});
    CHECK(full.matrix() == x.matrix());
  }
  SECTION("one level keeps the (0,0) element") {
    const Operator one = interior_project(x * x, {1});
    REQUIRE(one.dimension() == 1);
    CHECK(one(0, 0) == (x * x)(0, 0));
  }
  SECTION("two dofs keep the product block") {
    const auto b2 = make_uniform_basis(4, 2);
    const auto idx = interior_indices(b2, {2});
    CHECK(idx == std::vector<Eigen::Index>{0, 1, 4, 5});
  }
  SECTION("safety margin") {
    const auto b64 = make_uniform_basis(64, 1);
    CHECK_NOTHROW(require_safe_block({32}, b64, 6));
    CHECK_THROWS_AS(require_safe_block({60}, b64, 6), InvalidArgument);
    CHECK_THROWS_AS(require_safe_block({1}, b64, 2), InvalidArgument);
    CHECK(safety_margin(2) == 4);
    CHECK(safety_margin(7) == 7);
  }
}

TEST_CASE("arithmetic propagates hermiticity tags") {
  const auto b = make_uniform_basis(8, 1);
  const Operator x = position_operator(b, 0), p = momentum_operator(b, 0);
  CHECK((x + p).is_hermitian());
  CHECK((2.0 * x).is_hermitian());
  CHECK((complex{0.0, 1.0} * x).hermiticity() == Hermiticity::anti_hermitian);
  CHECK((x * p).hermiticity() == Hermiticity::general);
  CHECK(symmetrized_product(x, p).is_hermitian());
  CHECK((complex{0.0, 1.0} * commutator(x, p)).is_hermitian());
  CHECK(x.pow(3).is_hermitian());
  CHECK(x.pow(0).matrix() == Matrix::Identity(8, 8));
}

TEST_CASE("mismatched bases are rejected") {
  const auto a = make_uniform_basis(8, 1);
  const auto b = make_uniform_basis(8, 1, 2.0);
  CHECK_THROWS_AS(position_operator(a, 0) + position_operator(b, 0), BasisMismatch);
  CHECK_THROWS_AS(commutator(position_operator(a, 0), position_operator(b, 0)), BasisMismatch);
  CHECK_THROWS_AS(Operator(a, Matrix::Zero(3, 3)), InvalidArgument);
}

TEST_CASE("relative error falls back to the absolute norm") {
  const Matrix z = Matrix::Zero(2, 2);
  Matrix m = z;
  m(0, 0) = 3.0;
  m(1, 1) = 4.0;
  CHECK(relative_error(m, z) == Approx(5.0));
  CHECK(relative_error(m, m) == 0.0);
  CHECK(relative_error(2.0 * m, m) == Approx(1.0));
}
