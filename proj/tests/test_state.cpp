#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "heisenlab/operator.hpp"
#include "heisenlab/state.hpp"

using namespace heisenlab;
using Catch::Approx;

TEST_CASE("coherent state amplitudes follow the Poisson envelope") {
  const auto b = make_uniform_basis(40, 1);
  const complex alpha{0.8, -0.6};
  const auto psi = coherent_state(b, 0, alpha);
  // oracle: c_k = e^{-|a|^2/2} a^k / sqrt(k!) by direct recursion
  complex c = std::exp(-0.5 * std::norm(alpha));
  for (Eigen::Index k = 0; k < 40; ++k) {
    CHECK(std::abs(psi.amplitudes()(k) - c) < 1e-14);
    c *= alpha / std::sqrt(static_cast<double>(k + 1));
  }
}

TEST_CASE("coherent state edge cases") {
  const auto b = make_uniform_basis(32, 1);
  const auto vac = coherent_state(b, 0, complex{0.0, 0.0});
  CHECK((vac.amplitudes() - fock_state(b, {0}).amplitudes()).norm() == 0.0);
  CHECK_THROWS_AS(coherent_state(b, 0, complex{std::sqrt(32.0), 0.0}), InvalidArgument);
  CHECK_NOTHROW(coherent_state(b, 0, complex{2.0, 0.0}));
  CHECK(coherent_tail_probability(32, complex{std::sqrt(32.0), 0.0}) > 1e-10);
  CHECK(coherent_tail_probability(32, complex{0.0, 0.0}) == 0.0);
}

TEST_CASE("coherent tail probability matches a direct Poisson sum") {
  const double mean = 4.0;
  double oracle = 0.0;
  for (int k = 30; k < 200; ++k)
    oracle += std::exp(-mean + k * std::log(mean) - std::lgamma(k + 1.0));
  CHECK(coherent_tail_probability(30, complex{2.0, 0.0}) == Approx(oracle).epsilon(1e-12));
}

TEST_CASE("coherent expectation values") {
  const double l = 1.7, hbar = 0.9;
  const auto b = make_basis(48, 1, hbar, {1.0}, {l});
  const Operator x = position_operator(b, 0), p = momentum_operator(b, 0);
  const auto psi = coherent_state(b, 0, complex{1.0, 0.0});
  CHECK(expectation(psi, x).real() == Approx(l * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(std::abs(expectation(psi, x).imag()) < 1e-14);
  CHECK(std::abs(expectation(psi, Operator::identity(b)) - 1.0) < 1e-14);

  const auto psi2 = coherent_state(b, 0, coherent_alpha(b, 0, 0.4, -1.1));
  CHECK(expectation(psi2, x).real() == Approx(0.4).epsilon(1e-12));
  CHECK(expectation(psi2, p).real() == Approx(-1.1).epsilon(1e-12));
  // minimum uncertainty
  CHECK(uncertainty(psi2, x) * uncertainty(psi2, p) == Approx(hbar / 2).epsilon(1e-10));
}

TEST_CASE("two-dof product states") {
  const auto b = make_uniform_basis(16, 2);
  const auto f = fock_state(b, {2, 3});
  CHECK(f.amplitudes()(2 * 16 + 3) == complex{1.0, 0.0});
  const std::vector<complex> alphas{{0.5, 0.0}, {0.0, -0.3}};
  const auto c = coherent_state(b, alphas);
  CHECK(expectation(c, position_operator(b, 0)).real() == Approx(0.5 * std::sqrt(2.0)));
  CHECK(std::abs(expectation(c, position_operator(b, 1)).real()) < 1e-14);
  CHECK(expectation(c, momentum_operator(b, 1)).real() == Approx(-0.3 * std::sqrt(2.0)));
  CHECK_THROWS_AS(fock_state(b, {16, 0}), InvalidArgument);
  CHECK_THROWS_AS(fock_state(b, {1}), InvalidArgument);
}

TEST_CASE("state construction validates the norm") {
  const auto b = make_uniform_basis(4, 1);
  Vector v = Vector::Zero(4);
  v(1) = 2.0;
  CHECK_THROWS_AS(QuantumState(b, v), InvalidArgument);
  CHECK(QuantumState::normalized(b, v).amplitudes()(1) == complex{1.0, 0.0});
  CHECK_THROWS_AS(QuantumState::normalized(b, Vector::Zero(4)), InvalidArgument);
  CHECK_THROWS_AS(QuantumState(b, Vector::Zero(3)), InvalidArgument);
}

TEST_CASE("uncertainty of an eigenstate vanishes and needs a hermitian operator") {
  const auto b = make_uniform_basis(8, 1);
  const Operator x = position_operator(b, 0), p = momentum_operator(b, 0);
  const Operator n = (0.5 * (x * x + p * p) - 0.5 * Operator::identity(b));
  const Operator number = with_hermiticity(n, Hermiticity::hermitian);
  CHECK(uncertainty(fock_state(b, {3}), number) < 1e-7);
  CHECK_THROWS_AS(uncertainty(fock_state(b, {0}), x * p), NotHermitian);
}

TEST_CASE("Robertson bound on interior-safe packets") {
  const auto b = make_uniform_basis(64, 1, 0.6);
  const Operator x = position_operator(b, 0), p = momentum_operator(b, 0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Vector v = Vector::Zero(64);
    for (Eigen::Index k = 0; k < 16; ++k) v(k) = complex{u(rng), u(rng)};
    const auto psi = QuantumState::normalized(b, v);
    const double dx = uncertainty(psi, x), dp = uncertainty(psi, p);
    CHECK(dx >= 0.0);
    CHECK(dx * dp >= 0.3 - 1e-10);
  }
}
