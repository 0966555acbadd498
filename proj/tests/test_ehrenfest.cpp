#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "heisenlab/ehrenfest.hpp"
#include "heisenlab/hamiltonians.hpp"
#include "heisenlab/state.hpp"

using namespace heisenlab;
using Catch::Approx;

namespace {

// V(x) = a x^2 / 2 + b x^3 / 3, so V'(x) = a x + b x^2.
PolyHamiltonian cubic(const BasisSpec& basis, double a, double b, double linear = 0.0) {
  return build_potential_hamiltonian(basis, {0.0, linear, 0.5 * a, b / 3.0});
}

}  // namespace

TEST_CASE("cubic force residual on the vacuum") {
  const auto basis = make_basis(32, 1, 1.0, {1.0}, {1.0 / std::sqrt(2.0)});
  const auto r = ehrenfest_check(fock_state(basis, {0}), cubic(basis, 1.0, 2.0));
  CHECK(r.delta_x == Approx(0.5).epsilon(1e-13));
  CHECK(r.mean_x == Approx(0.0).margin(1e-15));
  CHECK(r.residual == Approx(0.5).epsilon(1e-13));
  REQUIRE(r.predicted_residual.has_value());
  CHECK(*r.predicted_residual == Approx(0.5).epsilon(1e-13));
  CHECK(r.classical_force_at_mean == Approx(0.0).margin(1e-15));
}

TEST_CASE("residual equals b (dx)^2 for assorted states") {
  const auto basis = make_uniform_basis(48, 1);
  const auto h = cubic(basis, 1.0, 0.7, 0.3);
  std::vector<QuantumState> states{fock_state(basis, {2}), coherent_state(basis, 0, {0.8, -0.4})};
  Vector v = Vector::Zero(48);
  v(0) = 1.0;
  v(1) = complex{0.0, 1.0};
  v(4) = 0.5;
  states.push_back(QuantumState::normalized(basis, v));
  for (const auto& psi : states) {
    const auto r = ehrenfest_check(psi, h);
    CHECK(std::abs(r.residual - 0.7 * r.delta_x * r.delta_x) < 1e-12);
    CHECK(std::abs(r.residual - *r.predicted_residual) < 1e-12);
  }
}

TEST_CASE("harmonic and linear terms leave no residual") {
  const auto basis = make_uniform_basis(32, 1);
  const auto psi = coherent_state(basis, 0, {1.0, 0.3});
  const auto r = ehrenfest_check(psi, cubic(basis, 2.0, 0.0));
  CHECK(std::abs(r.residual) < 1e-13);
  const auto a = ehrenfest_check(psi, cubic(basis, 1.0, 0.5));
  const auto b = ehrenfest_check(psi, cubic(basis, 1.0, 0.5, 0.9));
  CHECK(std::abs(a.residual - b.residual) < 1e-13);
}

TEST_CASE("residual grows with the width of the packet") {
  double previous = -1.0;
  for (double l : {0.3, 0.6, 0.9, 1.2}) {
    const auto basis = make_basis(32, 1, 1.0, {1.0}, {l});
    const auto r = ehrenfest_check(fock_state(basis, {0}), cubic(basis, 1.0, 0.4));
    CHECK(r.residual == Approx(0.4 * l * l / 2.0).epsilon(1e-12));
    CHECK(r.residual > previous);
    previous = r.residual;
  }
}

TEST_CASE("no prediction above a quadratic force") {
  const auto basis = make_uniform_basis(32, 1);
  const auto h = build_potential_hamiltonian(basis, {0.0, 0.0, 0.5, 0.0, 0.1});
  const auto r = ehrenfest_check(fock_state(basis, {1}), h);
  CHECK_FALSE(r.predicted_residual.has_value());
  // <x^3> on a Fock state vanishes by parity, so the residual is zero here
  CHECK(std::abs(r.residual) < 1e-13);
  const auto rc = ehrenfest_check(coherent_state(basis, 0, {1.0, 0.0}), h);
  CHECK(std::abs(rc.residual) > 1e-3);
}

TEST_CASE("ehrenfest check input validation") {
  const auto b2 = make_uniform_basis(6, 2);
  CHECK_THROWS_AS(ehrenfest_check(fock_state(b2, {0, 0}), build_rotating_frame(b2, 0.1)),
                  InvalidArgument);
  const auto b1 = make_uniform_basis(8, 1);
  PolyHamiltonian mixed{b1, Polynomial::term(1, 1.0, {q(0), p(0)}), {}};
  CHECK_THROWS_AS(ehrenfest_check(fock_state(b1, {0}), mixed), InvalidArgument);
  CHECK_THROWS_AS(ehrenfest_check(fock_state(make_uniform_basis(9, 1), {0}), cubic(b1, 1, 1)),
                  BasisMismatch);
}

TEST_CASE("trajectory comparison") {
  TimeSeries a({0.0, 1.0, 2.0, 3.0});
  a.add_channel("x", {0.0, 1.0, 2.0, 3.0});
  TimeSeries b({0.0, 1.0, 2.0, 3.0});
  b.add_channel("x", {0.0, 1.5, 2.0, 2.0});
  const auto same = compare_trajectories(a, a, {{"x", "x"}});
  CHECK(same[0].max_abs_gap == 0.0);
  CHECK(same[0].rms_gap == 0.0);

  const auto m = compare_trajectories(a, b, {{"x", "x"}});
  CHECK(m[0].max_abs_gap == 1.0);
  CHECK(m[0].time_of_max == 3.0);
  CHECK(m[0].rms_gap == Approx(std::sqrt((0.25 + 1.0) / 4.0)));
  CHECK(m[0].rms_gap <= m[0].max_abs_gap);
  CHECK(worst_gap(m) == 1.0);
  CHECK(worst_gap({}) == 0.0);

  TimeSeries c({0.0, 1.0, 2.0, 4.0});
  c.add_channel("x", {0.0, 0.0, 0.0, 0.0});
  CHECK_THROWS_AS(compare_trajectories(a, c, {{"x", "x"}}), InvalidArgument);
  CHECK_THROWS_AS(compare_trajectories(a, b, {{"x", "y"}}), InvalidArgument);
}

TEST_CASE("linear scenario exactness flag") {
  const auto b1 = make_uniform_basis(8, 1);
  const auto b2 = make_uniform_basis(6, 2);
  CHECK(linear_scenario_exactness(build_potential_hamiltonian(b1, {0.0, 0.3, 0.5})));
  CHECK(linear_scenario_exactness(build_potential_hamiltonian(b1, {})));
  CHECK_FALSE(linear_scenario_exactness(cubic(b1, 1.0, 0.1)));
  CHECK_FALSE(linear_scenario_exactness(build_potential_hamiltonian(b1, {0, 0, 0.5, 0, 0.1})));
  CHECK(linear_scenario_exactness(build_em_hamiltonian(b2, {1.0, {0.0, 0.0, 1.0}, {0.5, 0.0, 0.0}})));
  CHECK(linear_scenario_exactness(build_rotating_frame(b2, 0.5)));
  CHECK_FALSE(linear_scenario_exactness(build_gravity_taylor(b1, 1.0, 1.0, 1.0, 5.0, 3)));
}
