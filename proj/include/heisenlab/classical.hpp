#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "heisenlab/error.hpp"
#include "heisenlab/hamiltonians.hpp"
#include "heisenlab/polynomial.hpp"
#include "heisenlab/timeseries.hpp"

namespace heisenlab {

using Vec3 = std::array<double, 3>;

enum class Method { rk4, velocity_verlet };

struct IntegratorConfig {
  Method method = Method::rk4;
  double dt = 1e-3;
  double t_final = 10.0;
  /// Number of output samples on uniform_grid(t_final, samples); 0 records
  /// every step.
  std::size_t samples = 0;
};

struct ClassicalState {
  std::vector<double> q;
  std::vector<double> p;
  double t = 0.0;
};

inline void validate(const IntegratorConfig& cfg) {
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt))
    throw InvalidArgument("integrator: dt must be positive");
  if (!(cfg.t_final > 0.0) || !std::isfinite(cfg.t_final))
    throw InvalidArgument("integrator: t_final must be positive");
  if (cfg.dt > cfg.t_final) throw InvalidArgument("integrator: dt exceeds t_final");
  if (cfg.samples == 1) throw InvalidArgument("integrator: need 0 or >= 2 samples");
}

/// Times at which an integrator reports its state.
inline std::vector<double> output_grid(const IntegratorConfig& cfg) {
  validate(cfg);
  if (cfg.samples >= 2) return uniform_grid(cfg.t_final, cfg.samples);
  const auto steps = static_cast<std::size_t>(std::llround(cfg.t_final / cfg.dt));
  return uniform_grid(cfg.t_final, std::max<std::size_t>(steps, 1) + 1);
}

namespace detail {

using State = Eigen::VectorXd;

/// Number of equal substeps no longer than dt covering `span`.
inline std::size_t substeps(double span, double dt) {
  return std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(span / dt - 1e-9)));
}

inline void require_finite(const State& y, const char* what) {
  if (!y.allFinite())
    throw NumericalFailure(std::string(what) + ": non-finite state encountered");
}

/**
 * Classical fourth-order Runge-Kutta over the output grid. Between grid
 * points the interval is split into equal substeps no longer than dt, so
 * samples land exactly on the grid times.
 */
template <class Rhs, class Record>
void rk4_drive(Rhs&& f, State y, const std::vector<double>& grid, double dt,
               double t0, Record&& record, const char* what) {
  record(y);
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double span = grid[k] - grid[k - 1];
    const std::size_t n = substeps(span, dt);
    const double h = span / static_cast<double>(n);
    for (std::size_t s = 0; s < n; ++s) {
      const double t = t0 + grid[k - 1] + static_cast<double>(s) * h;
      const State k1 = f(t, y);
      const State k2 = f(t + 0.5 * h, State(y + 0.5 * h * k1));
      const State k3 = f(t + 0.5 * h, State(y + 0.5 * h * k2));
      const State k4 = f(t + h, State(y + h * k3));
      y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      require_finite(y, what);
    }
    record(y);
  }
}

/// Collects named channels from successive states.
class Recorder {
 public:
  explicit Recorder(std::vector<std::string> names) : names_(std::move(names)), values_(names_.size()) {}

  void push(const std::vector<double>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) values_[i].push_back(row[i]);
  }

  TimeSeries finish(std::vector<double> times) && {
    TimeSeries ts(std::move(times));
    for (std::size_t i = 0; i < names_.size(); ++i)
      ts.add_channel(names_[i], std::move(values_[i]));
    return ts;
  }

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<double>> values_;
};

inline std::vector<std::string> indexed(const std::string& prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

inline std::vector<std::string> concat(std::vector<std::vector<std::string>> parts) {
  std::vector<std::string> out;
  for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}

}  // namespace detail

/**
 * m x'' = -V'(x) in one dimension. Channels: q_0, p_0 (= m v).
 * Velocity Verlet is available because the force does not depend on v.
 */
inline TimeSeries integrate_newton(const std::function<double(double)>& potential_derivative,
                                   double m, double x0, double v0,
                                   const IntegratorConfig& cfg) {
  if (!(m > 0.0)) throw InvalidArgument("integrate_newton: mass must be positive");
  const auto grid = output_grid(cfg);
  detail::Recorder rec({"q_0", "p_0"});
  auto record = [&](const detail::State& y) { rec.push({y(0), m * y(1)}); };
  detail::State y(2);
  y << x0, v0;

  if (cfg.method == Method::rk4) {
    auto f = [&](double, const detail::State& s) {
      detail::State d(2);
      d << s(1), -potential_derivative(s(0)) / m;
      return d;
    };
    detail::rk4_drive(f, y, grid, cfg.dt, 0.0, record, "integrate_newton");
  } else {
    record(y);
    double a = -potential_derivative(y(0)) / m;
    for (std::size_t k = 1; k < grid.size(); ++k) {
      const double span = grid[k] - grid[k - 1];
      const std::size_t n = detail::substeps(span, cfg.dt);
      const double h = span / static_cast<double>(n);
      for (std::size_t s = 0; s < n; ++s) {
        y(0) += y(1) * h + 0.5 * a * h * h;
        const double a_next = -potential_derivative(y(0)) / m;
        y(1) += 0.5 * (a + a_next) * h;
        a = a_next;
        detail::require_finite(y, "integrate_newton");
      }
      record(y);
    }
  }
  return std::move(rec).finish(grid);
}

/**
 * m v' = q (v x B + E) for uniform fields. Channels per axis i:
 * q_i, then p_i (canonical momentum in the symmetric gauge, m v + q B x r / 2),
 * then pi_i (kinetic momentum m v).
 */
inline TimeSeries integrate_lorentz(double charge, double m, const Vec3& e, const Vec3& b,
                                    const Vec3& r0, const Vec3& v0,
                                    const IntegratorConfig& cfg) {
  if (cfg.method != Method::rk4)
    throw InvalidArgument("integrate_lorentz: the Lorentz force depends on velocity; use rk4");
  if (!(m > 0.0)) throw InvalidArgument("integrate_lorentz: mass must be positive");
  const auto grid = output_grid(cfg);
  detail::Recorder rec(detail::concat(
      {detail::indexed("q_", 3), detail::indexed("p_", 3), detail::indexed("pi_", 3)}));
  auto record = [&](const detail::State& y) {
    const Vec3 r{y(0), y(1), y(2)};
    const Vec3 bxr = detail::cross(b, r);
    std::vector<double> row(9);
    for (int i = 0; i < 3; ++i) {
      row[i] = y(i);
      row[6 + i] = m * y(3 + i);
      row[3 + i] = row[6 + i] + 0.5 * charge * bxr[i];
    }
    rec.push(row);
  };
  auto f = [&](double, const detail::State& s) {
    const Vec3 v{s(3), s(4), s(5)};
    const Vec3 vxb = detail::cross(v, b);
    detail::State d(6);
    for (int i = 0; i < 3; ++i) {
      d(i) = v[i];
      d(3 + i) = charge / m * (vxb[i] + e[i]);
    }
    return d;
  };
  detail::State y(6);
  y << r0[0], r0[1], r0[2], v0[0], v0[1], v0[2];
  detail::rk4_drive(f, y, grid, cfg.dt, 0.0, record, "integrate_lorentz");
  return std::move(rec).finish(grid);
}

/**
 * Planar motion seen from a frame rotating at omega about the third axis:
 * m r'' = -2 m w x v - m w x (w x r).
 * Channels: q_0, q_1, p_0, p_1 (canonical, p = m (v + w x r)), v_0, v_1.
 */
inline TimeSeries integrate_rotating(double omega, double m, const std::array<double, 2>& r0,
                                     const std::array<double, 2>& v0,
                                     const IntegratorConfig& cfg) {
  if (cfg.method != Method::rk4)
    throw InvalidArgument("integrate_rotating: the Coriolis force depends on velocity; use rk4");
  if (!(m > 0.0)) throw InvalidArgument("integrate_rotating: mass must be positive");
  const auto grid = output_grid(cfg);
  detail::Recorder rec({"q_0", "q_1", "p_0", "p_1", "v_0", "v_1"});
  auto record = [&](const detail::State& y) {
    rec.push({y(0), y(1), m * (y(2) - omega * y(1)), m * (y(3) + omega * y(0)), y(2), y(3)});
  };
  auto f = [&](double, const detail::State& s) {
    detail::State d(4);
    const double w2 = omega * omega;
    d << s(2), s(3), 2.0 * omega * s(3) + w2 * s(0), -2.0 * omega * s(2) + w2 * s(1);
    return d;
  };
  detail::State y(4);
  y << r0[0], r0[1], v0[0], v0[1];
  detail::rk4_drive(f, y, grid, cfg.dt, 0.0, record, "integrate_rotating");
  return std::move(rec).finish(grid);
}

/**
 * q_j' = dH/dp_j, p_j' = -dH/dq_j with the derivatives taken symbolically
 * and evaluated at the classical point. Channels: q_0.., p_0...
 */
inline TimeSeries integrate_hamilton(const Polynomial& h, const ClassicalState& s0,
                                     const IntegratorConfig& cfg) {
  if (cfg.method != Method::rk4)
    throw InvalidArgument("integrate_hamilton: only rk4 is supported");
  const std::size_t n = h.dofs();
  if (s0.q.size() != n || s0.p.size() != n)
    throw InvalidArgument("integrate_hamilton: state size does not match the Hamiltonian");
  std::vector<Polynomial> dh_dp, dh_dq;
  for (std::size_t j = 0; j < n; ++j) {
    dh_dp.push_back(formal_partial(h, j, Variable::p));
    dh_dq.push_back(formal_partial(h, j, Variable::q));
  }
  const auto grid = output_grid(cfg);
  detail::Recorder rec(detail::concat({detail::indexed("q_", n), detail::indexed("p_", n)}));
  auto record = [&](const detail::State& y) {
    rec.push(std::vector<double>(y.data(), y.data() + y.size()));
  };
  std::vector<double> qs(n), ps(n);
  auto f = [&](double, const detail::State& y) {
    for (std::size_t j = 0; j < n; ++j) {
      qs[j] = y(static_cast<Eigen::Index>(j));
      ps[j] = y(static_cast<Eigen::Index>(n + j));
    }
    detail::State d(2 * n);
    for (std::size_t j = 0; j < n; ++j) {
      d(static_cast<Eigen::Index>(j)) = dh_dp[j].evaluate_at(qs, ps);
      d(static_cast<Eigen::Index>(n + j)) = -dh_dq[j].evaluate_at(qs, ps);
    }
    if (!d.allFinite()) throw NumericalFailure("integrate_hamilton: non-finite derivative");
    return d;
  };
  detail::State y(2 * n);
  for (std::size_t j = 0; j < n; ++j) {
    y(static_cast<Eigen::Index>(j)) = s0.q[j];
    y(static_cast<Eigen::Index>(n + j)) = s0.p[j];
  }
  detail::rk4_drive(f, y, grid, cfg.dt, s0.t, record, "integrate_hamilton");
  std::vector<double> times = grid;
  for (double& t : times) t += s0.t;
  return std::move(rec).finish(std::move(times));
}

}  // namespace heisenlab
