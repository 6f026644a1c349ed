#ifndef BIOT_TIMESTEP_HPP
#define BIOT_TIMESTEP_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "assembly.hpp"
#include "cases.hpp"
#include "linalg.hpp"

namespace biot {

/// Coefficients (U, Z, P) at one time level.
struct SystemState {
  double t = 0.0;
  DenseVector u, z, p;

  static SystemState zero(const DiscreteOperators& ops, double t = 0.0) {
    return {t, DenseVector::Zero(static_cast<Eigen::Index>(ops.num_u())),
            DenseVector::Zero(static_cast<Eigen::Index>(ops.num_z())),
            DenseVector::Zero(static_cast<Eigen::Index>(ops.num_p()))};
  }

  bool finite() const { return u.allFinite() && z.allFinite() && p.allFinite(); }

  /// max-abs over all coefficients.
  double max_abs() const {
    double m = 0.0;
    for (const auto* v : {&u, &z, &p})
      if (v->size() > 0) m = std::max(m, v->cwiseAbs().maxCoeff());
    return m;
  }
};

using Trajectory = std::vector<SystemState>;

/// Uniform grid t_j = j T0 / N.
class TimeGrid {
 public:
  TimeGrid(double final_time, std::size_t steps) : final_time_(final_time), steps_(steps) {
    if (steps == 0) throw std::invalid_argument("time grid needs N >= 1");
    if (!(final_time > 0.0 && std::isfinite(final_time))) throw std::invalid_argument("T0 must be positive");
  }

  double final_time() const { return final_time_; }
  std::size_t steps() const { return steps_; }
  double dt() const { return final_time_ / static_cast<double>(steps_); }
  double time(std::size_t j) const {
    return j == steps_ ? final_time_ : final_time_ * static_cast<double>(j) / static_cast<double>(steps_);
  }

 private:
  double final_time_;
  std::size_t steps_;
};

/// Load vectors F(t) = (f(t), phi_i) and G(t) = (g(t), chi_i).
struct Forcing {
  std::function<DenseVector(double)> load;
  std::function<DenseVector(double)> source;

  static Forcing from_case(const Discretization& d, const ManufacturedCase& c) {
    return {[&d, &c](double t) { return assemble_load(d, [&c](Point x, double s) { return c.f(x, s); }, t); },
            [&d, &c](double t) { return assemble_source(d, [&c](Point x, double s) { return c.g(x, s); }, t); }};
  }

  static Forcing none(const DiscreteOperators& ops) {
    const auto nu = static_cast<Eigen::Index>(ops.num_u()), np = static_cast<Eigen::Index>(ops.num_p());
    return {[nu](double) { return DenseVector::Zero(nu); }, [np](double) { return DenseVector::Zero(np); }};
  }
};

namespace detail {

inline DenseVector stack(const DenseVector& a, const DenseVector& b, const DenseVector& c) {
  DenseVector x(a.size() + b.size() + c.size());
  x << a, b, c;
  return x;
}

inline SystemState unstack(const DiscreteOperators& ops, const DenseVector& x, double t) {
  const auto nu = static_cast<Eigen::Index>(ops.num_u()), nz = static_cast<Eigen::Index>(ops.num_z());
  const auto np = static_cast<Eigen::Index>(ops.num_p());
  return {t, x.head(nu), x.segment(nu, nz), x.tail(np)};
}

}  // namespace detail

/// [A_uu, 0, -B_up^T; 0, A_zz, B_zp^T; B_up, -theta B_zp, A_pp].
inline CsrMatrix step_matrix(const DiscreteOperators& ops, double theta) {
  const std::vector<std::size_t> sizes{ops.num_u(), ops.num_z(), ops.num_p()};
  return assemble_blocks(sizes, sizes,
                         {{0, 0, &ops.a_uu},
                          {0, 2, &ops.b_up, -1.0, true},
                          {1, 1, &ops.a_zz},
                          {1, 2, &ops.b_zp, 1.0, true},
                          {2, 0, &ops.b_up},
                          {2, 1, &ops.b_zp, -theta},
                          {2, 2, &ops.a_pp}});
}

/// P0 = Q_h p(0); U0 and Z0 from the two algebraic equations at t = 0.
template <class Pressure, class Force>
SystemState compatible_initial_data(const DiscreteOperators& ops, Pressure&& p_at_0, Force&& f_at_0) {
  const Discretization& d = *ops.disc;
  SystemState s;
  s.t = 0.0;
  s.p = project_p0(d.mesh, p_at_0);
  const DenseVector f0 = assemble_load(d, [&](Point x, double) { return f_at_0(x); }, 0.0);
  const DenseVector rhs_u = f0 + spmv(ops.b_up.transpose(), s.p);
  const DenseVector rhs_z = -spmv(ops.b_zp.transpose(), s.p);
  s.u = rhs_u.norm() == 0.0 ? DenseVector::Zero(rhs_u.size()) : LuFactorization(ops.a_uu).solve(rhs_u);
  s.z = rhs_z.norm() == 0.0 ? DenseVector::Zero(rhs_z.size()) : LuFactorization(ops.a_zz).solve(rhs_z);
  return s;
}

inline SystemState compatible_initial_data(const DiscreteOperators& ops, const ManufacturedCase& c) {
  return compatible_initial_data(
      ops, [&c](Point x) { return c.p(x, 0.0); }, [&c](Point x) { return c.f(x, 0.0); });
}

/// Backward Euler stepper; the step matrix is factorized once per dt.
class BackwardEuler {
 public:
  BackwardEuler(const DiscreteOperators& ops, double dt) : ops_(&ops), dt_(dt), lu_(checked(ops, dt)) {}

  double dt() const { return dt_; }

  SystemState step(const SystemState& prev, const DenseVector& load_next, const DenseVector& source_next) const {
    const DenseVector rhs3 = spmv(ops_->a_pp, prev.p) + spmv(ops_->b_up, prev.u) + dt_ * source_next;
    const DenseVector rhs = detail::stack(load_next, DenseVector::Zero(static_cast<Eigen::Index>(ops_->num_z())), rhs3);
    if (rhs.norm() == 0.0) return SystemState::zero(*ops_, prev.t + dt_);
    return detail::unstack(*ops_, lu_.solve(rhs), prev.t + dt_);
  }

 private:
  static CsrMatrix checked(const DiscreteOperators& ops, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    return step_matrix(ops, dt);
  }

  const DiscreteOperators* ops_;
  double dt_;
  LuFactorization lu_;
};

/// Trapezoidal stepper: non-derivative terms averaged over both levels.
class CrankNicolson {
 public:
  CrankNicolson(const DiscreteOperators& ops, double dt) : ops_(&ops), dt_(dt), lu_(checked(ops, dt)) {}

  double dt() const { return dt_; }

  SystemState step(const SystemState& prev, const DenseVector& load_prev, const DenseVector& load_next,
                   const DenseVector& source_mid) const {
    const DenseVector rhs1 = load_next + load_prev - spmv(ops_->a_uu, prev.u) + spmv(ops_->b_up.transpose(), prev.p);
    const DenseVector rhs2 = -spmv(ops_->a_zz, prev.z) - spmv(ops_->b_zp.transpose(), prev.p);
    const DenseVector rhs3 = spmv(ops_->a_pp, prev.p) + spmv(ops_->b_up, prev.u) + 0.5 * dt_ * spmv(ops_->b_zp, prev.z) +
                             dt_ * source_mid;
    const DenseVector rhs = detail::stack(rhs1, rhs2, rhs3);
    if (rhs.norm() == 0.0) return SystemState::zero(*ops_, prev.t + dt_);
    return detail::unstack(*ops_, lu_.solve(rhs), prev.t + dt_);
  }

 private:
  static CsrMatrix checked(const DiscreteOperators& ops, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    return step_matrix(ops, 0.5 * dt);
  }

  const DiscreteOperators* ops_;
  double dt_;
  LuFactorization lu_;
};

/// Single backward Euler step from state_j with assembled F^{j+1}, G^{j+1}.
inline SystemState backward_euler_step(const DiscreteOperators& ops, const SystemState& state, double dt,
                                       const DenseVector& load_next, const DenseVector& source_next) {
  return BackwardEuler(ops, dt).step(state, load_next, source_next);
}

inline SystemState crank_nicolson_step(const DiscreteOperators& ops, const SystemState& state, double dt,
                                       const DenseVector& load_prev, const DenseVector& load_next,
                                       const DenseVector& source_mid) {
  return CrankNicolson(ops, dt).step(state, load_prev, load_next, source_mid);
}

enum class Integrator { backward_euler, crank_nicolson };

/// Time loop from `initial` over `grid`. The returned trajectory holds the
/// initial state followed by the N computed states.
inline Trajectory run_transient(const DiscreteOperators& ops, const TimeGrid& grid, const Forcing& forcing,
                                const SystemState& initial, Integrator method = Integrator::backward_euler) {
  Trajectory traj;
  traj.reserve(grid.steps() + 1);
  traj.push_back(initial);
  traj.back().t = grid.time(0);
  const double dt = grid.dt();
  auto fail = [](std::size_t j, const std::exception& e) {
    return NumericalError("time step " + std::to_string(j) + " failed: " + e.what());
  };
  if (method == Integrator::backward_euler) {
    const BackwardEuler be(ops, dt);
    for (std::size_t j = 0; j < grid.steps(); ++j) {
      try {
        const double t = grid.time(j + 1);
        auto next = be.step(traj.back(), forcing.load(t), forcing.source(t));
        next.t = t;
        if (!next.finite()) throw NumericalError("non-finite state");
        traj.push_back(std::move(next));
      } catch (const std::exception& e) {
        throw fail(j + 1, e);
      }
    }
  } else {
    const CrankNicolson cn(ops, dt);
    DenseVector load_prev = forcing.load(grid.time(0));
    for (std::size_t j = 0; j < grid.steps(); ++j) {
      try {
        const double t = grid.time(j + 1);
        const DenseVector load_next = forcing.load(t);
        auto next = cn.step(traj.back(), load_prev, load_next, forcing.source(0.5 * (grid.time(j) + t)));
        next.t = t;
        if (!next.finite()) throw NumericalError("non-finite state");
        traj.push_back(std::move(next));
        load_prev = load_next;
      } catch (const std::exception& e) {
        throw fail(j + 1, e);
      }
    }
  }
  return traj;
}

/// Compatible initial data followed by the time loop for a manufactured case.
inline Trajectory run_transient(const DiscreteOperators& ops, const TimeGrid& grid, const ManufacturedCase& c,
                                Integrator method = Integrator::backward_euler) {
  return run_transient(ops, grid, Forcing::from_case(*ops.disc, c), compatible_initial_data(ops, c), method);
}

}  // namespace biot

#endif  // BIOT_TIMESTEP_HPP
