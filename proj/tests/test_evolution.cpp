#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "heisenlab/evolution.hpp"
#include "heisenlab/hamiltonians.hpp"
#include "heisenlab/state.hpp"

using namespace heisenlab;
using Catch::Approx;

namespace {

Operator harmonic(const BasisSpec& b, double m_w2 = 1.0) {
  return evaluate(build_potential_hamiltonian(b, {0.0, 0.0, 0.5 * m_w2}));
}

QuantumState random_low_state(const BasisSpec& b, std::size_t span, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector v = Vector::Zero(static_cast<Eigen::Index>(b.dimension()));
  for (std::size_t k = 0; k < span; ++k) v(static_cast<Eigen::Index>(k)) = complex{u(rng), u(rng)};
  return QuantumState::normalized(b, v);
}

}  // namespace

TEST_CASE("propagator of a diagonal Hamiltonian") {
  const auto b = make_uniform_basis(3, 1);
  Matrix d = Matrix::Zero(3, 3);
  d(1, 1) = 1.0;
  d(2, 2) = 2.0;
  const SpectralPropagator prop(Operator(b, d, Hermiticity::hermitian));
  CHECK(prop.eigenvalues()(0) == Approx(0.0).margin(1e-15));
  CHECK(prop.eigenvalues()(1) == Approx(1.0));
  CHECK(prop.eigenvalues()(2) == Approx(2.0));
  const double t = 0.7;
  const Matrix u = prop.unitary(t);
  for (Eigen::Index k = 0; k < 3; ++k)
    CHECK(std::abs(u(k, k) - std::polar(1.0, static_cast<double>(k) * t)) < 1e-14);
  CHECK((prop.unitary(0.0) - Matrix::Identity(3, 3)).norm() < 1e-14);
}

TEST_CASE("eigendecomposition reconstructs H and the propagator is unitary") {
  const auto b = make_uniform_basis(24, 1, 0.8);
  const Operator h = evaluate(build_potential_hamiltonian(b, {0.0, 0.1, 0.5, 0.05, 0.02}));
  const SpectralPropagator prop(h);
  const Matrix& v = prop.eigenvectors();
  const Matrix rebuilt = v * prop.eigenvalues().cast<complex>().asDiagonal() * v.adjoint();
  CHECK((rebuilt - h.matrix()).norm() <= 1e-10 * h.frobenius_norm());
  for (double t : {0.0, 0.3, 5.0, 40.0}) {
    const Matrix u = prop.unitary(t);
    CHECK((u * u.adjoint() - Matrix::Identity(24, 24)).norm() < 1e-12);
  }
  // U(t1) U(t2) = U(t1 + t2)
  CHECK((prop.unitary(0.4) * prop.unitary(1.1) - prop.unitary(1.5)).norm() < 1e-12);
}

TEST_CASE("eigenvector phases are fixed") {
  const auto b = make_uniform_basis(12, 1);
  const SpectralPropagator prop(harmonic(b));
  const Matrix& v = prop.eigenvectors();
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    Eigen::Index imax = 0;
    v.col(j).cwiseAbs().maxCoeff(&imax);
    CHECK(std::abs(v(imax, j).imag()) < 1e-15);
    CHECK(v(imax, j).real() > 0.0);
  }
}

TEST_CASE("harmonic Heisenberg position operator") {
  const auto b = make_uniform_basis(64, 1);
  const SpectralPropagator prop(harmonic(b));
  const Operator x = position_operator(b, 0), p = momentum_operator(b, 0);
  const InteriorBlock blk = interior_block(b);
  for (double t : {0.5, 1.0, 2.5, 10.0}) {
    const Operator xt = heisenberg_evolve(prop, x, t);
    const Operator oracle = std::cos(t) * x + std::sin(t) * p;
    CHECK((interior_project(xt, blk).matrix() - interior_project(oracle, blk).matrix())
              .cwiseAbs()
              .maxCoeff() < 1e-9);
    CHECK(xt.is_hermitian());
  }
}

TEST_CASE("Schrodinger evolution preserves the norm and stationary states") {
  const auto b = make_uniform_basis(32, 1);
  const Operator h = evaluate(build_potential_hamiltonian(b, {0.0, 0.0, 0.5, 0.0, 0.1}));
  const SpectralPropagator prop(h);
  const auto psi = random_low_state(b, 10, 4);
  for (double t : {0.1, 3.0, 25.0})
    CHECK(std::abs(schrodinger_evolve(prop, psi, t).amplitudes().norm() - 1.0) < 1e-12);

  const QuantumState eig(b, prop.eigenvectors().col(3));
  const auto later = schrodinger_evolve(prop, eig, 2.0);
  CHECK(std::abs(std::abs(eig.amplitudes().dot(later.amplitudes())) - 1.0) < 1e-12);
  const complex phase = eig.amplitudes().dot(later.amplitudes());
  CHECK(std::arg(phase) == Approx(std::remainder(-prop.eigenvalues()(3) * 2.0, 2 * std::numbers::pi)).margin(1e-10));
}

TEST_CASE("coherent state follows the classical ellipse") {
  const double l = 1.0;
  const auto b = make_uniform_basis(64, 1);
  const SpectralPropagator prop(harmonic(b));
  const complex alpha{1.2, 0.6};
  const auto psi = coherent_state(b, 0, alpha);
  const std::vector<double> grid = uniform_grid(10.0, 41);
  const TimeSeries ts = sample_expectations(
      prop, psi, {{"x", position_operator(b, 0), true}}, grid);
  const auto& mean = ts.channel("mean_x");
  const auto& delta = ts.channel("delta_x");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double oracle = l * std::sqrt(2.0) * std::abs(alpha) * std::cos(grid[k] - std::arg(alpha));
    CHECK(std::abs(mean[k] - oracle) < 1e-10);
    CHECK(delta[k] == Approx(l / std::sqrt(2.0)).epsilon(1e-9));
  }
}

TEST_CASE("Heisenberg and Schrodinger pictures agree") {
  const auto b = make_uniform_basis(32, 1);
  const Operator h = evaluate(build_potential_hamiltonian(b, {0.0, 0.0, 0.5, 0.1, 0.05}));
  const SpectralPropagator prop(h);
  const Operator x = position_operator(b, 0), p = momentum_operator(b, 0);
  const auto psi = random_low_state(b, 8, 9);
  for (double t : {0.3, 2.0, 7.5})
    for (const Operator* a : {&x, &p}) {
      const complex heis = expectation(psi, heisenberg_evolve(prop, *a, t));
      const complex schr = expectation(schrodinger_evolve(prop, psi, t), *a);
      CHECK(std::abs(heis - schr) < 1e-12);
    }
}

TEST_CASE("energy is conserved and the identity channel stays at one") {
  const auto b = make_uniform_basis(32, 1);
  const Operator h = evaluate(build_potential_hamiltonian(b, {0.0, 0.0, 0.5, 0.0, 0.1}));
  const SpectralPropagator prop(h);
  const auto psi = coherent_state(b, 0, complex{1.0, 0.5});
  const TimeSeries ts =
      sample_expectations(prop, psi, {{"h", h, false}, {"one", Operator::identity(b), false}},
                          uniform_grid(20.0, 21));
  const auto& e = ts.channel("mean_h");
  for (std::size_t k = 0; k < ts.size(); ++k) {
    CHECK(std::abs(e[k] - e[0]) < 1e-10);
    CHECK(std::abs(ts.channel("mean_one")[k] - 1.0) < 1e-12);
  }
  CHECK_FALSE(ts.has_channel("delta_h"));
}

TEST_CASE("time derivative of A(t) matches the commutator") {
  const auto b = make_uniform_basis(24, 1, 0.7);
  const Operator h = evaluate(build_potential_hamiltonian(b, {0.0, 0.0, 0.5, 0.2}));
  const SpectralPropagator prop(h);
  const Operator x = position_operator(b, 0);
  const Matrix rhs = heisenberg_rhs(h, x).matrix();
  auto central_error = [&](double dt) {
    const Matrix d =
        (heisenberg_evolve(prop, x, dt).matrix() - heisenberg_evolve(prop, x, -dt).matrix()) /
        (2.0 * dt);
    return (d - rhs).norm();
  };
  const double e1 = central_error(2e-4), e2 = central_error(1e-4);
  CHECK(std::log2(e1 / e2) >= 1.9);
  CHECK(e2 < 1e-4 * rhs.norm());
}

TEST_CASE("non-hermitian input is rejected") {
  const auto b = make_uniform_basis(8, 1);
  const Operator xp = position_operator(b, 0) * momentum_operator(b, 0);
  CHECK_THROWS_AS(SpectralPropagator(xp), NotHermitian);
  const SpectralPropagator prop(harmonic(b));
  CHECK_THROWS_AS(sample_expectations(prop, fock_state(b, {0}), {{"xp", xp, true}}, {0.0, 1.0}),
                  NotHermitian);
  CHECK_THROWS_AS(heisenberg_evolve(prop, position_operator(make_uniform_basis(9, 1), 0), 1.0),
                  BasisMismatch);
}
