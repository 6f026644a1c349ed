#ifndef BIOT_VERIFY_HPP
#define BIOT_VERIFY_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "assembly.hpp"
#include "cases.hpp"
#include "linalg.hpp"
#include "timestep.hpp"

namespace biot {

/// Errors of one state against the exact solution at the state's time.
struct StateErrors {
  double u_1h = 0.0;  // broken H1 seminorm of u - U
  double p_l2 = 0.0;
  double z_l2 = 0.0;
};

inline StateErrors state_errors(const Discretization& d, const SystemState& s, const ManufacturedCase& c) {
  const auto rule = quadrature(data_degree);
  double eu = 0.0, ep = 0.0, ez = 0.0;
  for (std::size_t t = 0; t < d.mesh.num_triangles(); ++t) {
    const auto pq = map_rule(d.mesh, t, rule);
    const auto cu = local_sigma(d, s.u, t);
    const auto cz = local_rt(d, s.z, t);
    const double ph = s.p[static_cast<Eigen::Index>(t)];
    for (std::size_t q = 0; q < pq.points.size(); ++q) {
      const Point x = pq.points[q];
      const auto ev = d.mtw[t].eval(x);
      Mat2 gh = Mat2::Zero();
      for (int j = 0; j < 9; ++j) gh += cu[j] * ev.grad[j];
      Vec2 zh = Vec2::Zero();
      for (int k = 0; k < 3; ++k) zh += cz[k] * d.rt[t].value(k, x);
      eu += pq.weights[q] * (c.grad_u(x, s.t) - gh).squaredNorm();
      ep += pq.weights[q] * std::pow(c.p(x, s.t) - ph, 2);
      ez += pq.weights[q] * (c.z(x, s.t) - zh).squaredNorm();
    }
  }
  return {std::sqrt(eu), std::sqrt(ep), std::sqrt(ez)};
}

/// Per-state errors of a trajectory.
inline std::vector<StateErrors> trajectory_errors(const Discretization& d, const Trajectory& traj,
                                                  const ManufacturedCase& c) {
  std::vector<StateErrors> out;
  out.reserve(traj.size());
  for (const auto& s : traj) out.push_back(state_errors(d, s, c));
  return out;
}

/// Maxima over all states, the initial one included.
inline StateErrors error_norms(const Discretization& d, const Trajectory& traj, const ManufacturedCase& c) {
  StateErrors m;
  for (const auto& e : trajectory_errors(d, traj, c)) {
    m.u_1h = std::max(m.u_1h, e.u_1h);
    m.p_l2 = std::max(m.p_l2, e.p_l2);
    m.z_l2 = std::max(m.z_l2, e.z_l2);
  }
  return m;
}

/// L2 distance between two scalar fields by degree-10 quadrature.
template <class A, class B>
double l2_distance(const Mesh& mesh, A&& a, B&& b) {
  const auto rule = quadrature(data_degree);
  double s = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto pq = map_rule(mesh, t, rule);
    for (std::size_t q = 0; q < pq.points.size(); ++q) s += pq.weights[q] * std::pow(a(pq.points[q]) - b(pq.points[q]), 2);
  }
  return std::sqrt(s);
}

/// log2 of consecutive error ratios; NaN when either error is not positive.
inline double observed_rate(double coarse, double fine) {
  if (!(coarse > 0.0 && fine > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return std::log2(coarse / fine);
}

struct LevelResult {
  std::size_t n = 0;
  std::size_t steps = 0;
  double h = 0.0;
  double dt = 0.0;
  StateErrors errors;
  std::string failure;  // empty on success

  bool ok() const { return failure.empty(); }
};

struct Rates {
  double u = std::numeric_limits<double>::quiet_NaN();
  double p = std::numeric_limits<double>::quiet_NaN();
  double z = std::numeric_limits<double>::quiet_NaN();
};

struct ConvergenceReport {
  std::string case_name;
  MaterialParams params;
  double final_time = 0.0;
  std::vector<LevelResult> levels;
  /// rates[i] compares levels[i] and levels[i + 1].
  std::vector<Rates> rates;

  const Rates& finest_rates() const { return rates.back(); }
};

inline std::vector<Rates> compute_rates(const std::vector<LevelResult>& levels) {
  std::vector<Rates> r;
  for (std::size_t i = 0; i + 1 < levels.size(); ++i) {
    const auto& a = levels[i].errors;
    const auto& b = levels[i + 1].errors;
    if (!levels[i].ok() || !levels[i + 1].ok()) {
      r.emplace_back();
      continue;
    }
    r.push_back({observed_rate(a.u_1h, b.u_1h), observed_rate(a.p_l2, b.p_l2), observed_rate(a.z_l2, b.z_l2)});
  }
  return r;
}

/// Levels must be increasing and each one double the previous.
inline void validate_levels(const std::vector<std::size_t>& levels) {
  if (levels.empty()) throw std::invalid_argument("levels must not be empty");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] == 0) throw std::invalid_argument("levels must be positive");
    if (i > 0 && levels[i] != 2 * levels[i - 1]) throw std::invalid_argument("levels must double");
  }
}

/// Full pipeline on an n x n mesh with `steps` backward Euler steps to T0.
inline LevelResult run_level(const std::string& case_name, const MaterialParams& params, std::size_t n,
                             std::size_t steps, double final_time) {
  LevelResult r;
  r.n = n;
  r.steps = steps;
  r.dt = final_time / static_cast<double>(steps);
  try {
    const auto c = builtin_case(case_name, params);
    const auto d = Discretization::structured(n);
    r.h = d.h();
    const auto ops = assemble_operators(d, params);
    const auto traj = run_transient(ops, TimeGrid(final_time, steps), c);
    r.errors = error_norms(d, traj, c);
    if (!(std::isfinite(r.errors.u_1h) && std::isfinite(r.errors.p_l2) && std::isfinite(r.errors.z_l2)))
      r.failure = "non-finite error norm";
  } catch (const std::exception& e) {
    r.failure = std::string("level n=") + std::to_string(n) + ": " + e.what();
  }
  return r;
}

/// Convergence study with dt = T0 / n on each level. A failing level is
/// recorded and the study continues.
inline ConvergenceReport convergence_study(const std::string& case_name, const MaterialParams& params,
                                           const std::vector<std::size_t>& levels, double final_time) {
  validate_levels(levels);
  builtin_case(case_name, params);
  ConvergenceReport rep{case_name, params, final_time, {}, {}};
  for (std::size_t n : levels) rep.levels.push_back(run_level(case_name, params, n, n, final_time));
  rep.rates = compute_rates(rep.levels);
  return rep;
}

namespace detail {

/// sqrt of the smallest eigenvalue of B K^{-1} B^T against the pressure mass.
/// With `deflate_constants` the constant pressure is lifted out of the
/// spectrum (it lies in the kernel of B^T when no DOF touches the boundary).
inline double inf_sup(const CsrMatrix& b, const CsrMatrix& gram, const DenseVector& areas, bool deflate_constants) {
  const DenseMatrix bd = b.to_dense();
  Eigen::LLT<DenseMatrix> llt(gram.to_dense());
  if (llt.info() != Eigen::Success) throw NumericalError("Gram matrix is singular (boundary conditions?)");
  DenseMatrix schur = bd * llt.solve(bd.transpose());
  schur = 0.5 * (schur + schur.transpose());
  const DenseMatrix mass = areas.asDiagonal();
  if (deflate_constants) {
    const DenseVector m1 = areas;
    const double total = areas.sum();
    const double shift = 10.0 * std::max(1.0, schur.cwiseAbs().maxCoeff() / areas.minCoeff());
    schur += shift * (m1 * m1.transpose()) / total;
  }
  const auto es = eig_generalized(schur, mass);
  return std::sqrt(std::max(0.0, es.eigenvalues()[0]));
}

inline DenseVector triangle_areas(const Mesh& mesh) {
  DenseVector a(static_cast<Eigen::Index>(mesh.num_triangles()));
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) a[static_cast<Eigen::Index>(t)] = mesh.area(t);
  return a;
}

}  // namespace detail

/// Discrete inf-sup constant of (q, div v) on W_h x Sigma_h with the broken
/// H1 norm. When Gamma_t is empty every admissible v has zero mean
/// divergence, so the constant is taken over mean-free pressures.
inline double estimate_inf_sup_sigma(const Discretization& d) {
  const bool closed = d.tags.count(d.tags.on_gamma_t) == 0;
  return detail::inf_sup(assemble_div_coupling_u(d), assemble_broken_h1_gram(d), detail::triangle_areas(d.mesh),
                         closed);
}

/// Discrete inf-sup constant of (q, div w) on W_h x V_h with the H(div) norm.
inline double estimate_inf_sup_rt(const Discretization& d) {
  const bool closed = d.tags.count(d.tags.on_gamma_p) == 0;
  return detail::inf_sup(assemble_div_coupling_z(d), assemble_hdiv_gram(d), detail::triangle_areas(d.mesh), closed);
}

struct KornEstimate {
  double constant = 0.0;    // 1 / sqrt(lambda_min)
  double lambda_min = 0.0;  // of ||eps_h v||^2 / ||v||_{1,h}^2
  double lambda_max = 0.0;
};

inline KornEstimate korn_constant(const Discretization& d) {
  const auto es = eig_generalized(assemble_strain_gram(d).to_dense(), assemble_broken_h1_gram(d).to_dense());
  const auto& ev = es.eigenvalues();
  KornEstimate k;
  k.lambda_min = ev[0];
  k.lambda_max = ev[ev.size() - 1];
  if (!(k.lambda_min > 0.0)) throw NumericalError("Korn eigenvalue is not positive");
  k.constant = 1.0 / std::sqrt(k.lambda_min);
  return k;
}

/// Broken H1 seminorm of a Sigma_h function.
inline double broken_h1_norm(const Discretization& d, const DenseVector& v) {
  return std::sqrt(std::max(0.0, v.dot(spmv(assemble_broken_h1_gram(d), v))));
}

/// E_h(tau, v) = sum over edges of <tau n_E, [[v]]>_E; the jump is v itself
/// on boundary edges.
template <class Tensor>
double consistency_functional(const Discretization& d, Tensor&& tau, const DenseVector& v) {
  double total = 0.0;
  for (std::size_t e = 0; e < d.mesh.num_edges(); ++e) {
    const auto q = edge_rule(d.mesh, e, data_degree);
    const auto& adj = d.mesh.edge_triangles[e];
    const std::size_t t1 = *adj[0];
    int sign1 = 0;
    for (const auto& le : d.mesh.triangle_edges[t1])
      if (le.edge == e) sign1 = le.sign;
    const Point nE = d.mesh.edge_normal(e);
    const Vec2 n_out = sign1 * Vec2(nE.x, nE.y);
    for (std::size_t i = 0; i < q.points.size(); ++i) {
      const Point x = q.points[i];
      Vec2 jump = sigma_value(d, v, t1, x);
      if (adj[1]) jump -= sigma_value(d, v, *adj[1], x);
      total += q.weights[i] * (tau(x) * n_out).dot(jump);
    }
  }
  return total;
}

/// E_h(sigma(t), v) with sigma = C eps(u(t)) - p(t) I from the case.
inline double consistency_diagnostic(const Discretization& d, const ManufacturedCase& c, double t,
                                     const DenseVector& v) {
  return consistency_functional(d, [&](Point x) { return c.stress(x, t); }, v);
}

/// a_i = E_h(tau, phi_i), so E_h(tau, v) = a . v.
template <class Tensor>
DenseVector consistency_vector(const Discretization& d, Tensor&& tau) {
  DenseVector a = DenseVector::Zero(static_cast<Eigen::Index>(d.dofs.num_sigma));
  for (std::size_t e = 0; e < d.mesh.num_edges(); ++e) {
    const auto q = edge_rule(d.mesh, e, data_degree);
    const auto& adj = d.mesh.edge_triangles[e];
    const std::size_t t1 = *adj[0];
    int sign1 = 0;
    for (const auto& le : d.mesh.triangle_edges[t1])
      if (le.edge == e) sign1 = le.sign;
    const Point nE = d.mesh.edge_normal(e);
    const Vec2 n_out = sign1 * Vec2(nE.x, nE.y);
    for (std::size_t i = 0; i < q.points.size(); ++i) {
      const Point x = q.points[i];
      const Vec2 tn = tau(x) * n_out;
      auto scatter = [&](std::size_t t, double s) {
        const Eigen::Matrix<double, 1, 9> row = tn.transpose() * d.mtw[t].eval(x).value;
        for (int j = 0; j < 9; ++j) {
          const auto g = d.dofs.mtw_local_to_global[t][j];
          if (g != DofMap::eliminated) a[g] += s * q.weights[i] * row[j];
        }
      };
      scatter(t1, 1.0);
      if (adj[1]) scatter(*adj[1], -1.0);
    }
  }
  return a;
}

struct ConsistencyMeasure {
  double rms_ratio = 0.0;  // RMS of |E_h(sigma, v)| / ||v||_{1,h} over seeded random v
  double dual_norm = 0.0;  // sup over v of the same ratio
};

/// Random v has coefficients uniform in [-1, 1] from mt19937_64(seed).
inline ConsistencyMeasure consistency_measure(const Discretization& d, const ManufacturedCase& c, double t,
                                              const std::vector<std::uint64_t>& seeds) {
  const DenseVector a = consistency_vector(d, [&](Point x) { return c.stress(x, t); });
  const CsrMatrix gram = assemble_broken_h1_gram(d);
  ConsistencyMeasure m;
  double s2 = 0.0;
  for (auto seed : seeds) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    DenseVector v(a.size());
    for (auto& x : v) x = unif(rng);
    const double r = std::abs(a.dot(v)) / std::sqrt(v.dot(spmv(gram, v)));
    s2 += r * r;
  }
  m.rms_ratio = seeds.empty() ? 0.0 : std::sqrt(s2 / static_cast<double>(seeds.size()));
  m.dual_norm = std::sqrt(std::max(0.0, a.dot(solve_direct(gram, a))));
  return m;
}

struct SweepCell {
  double c0 = 0.0;
  double lambda = 0.0;
  ConvergenceReport report;
};

inline const std::vector<double>& default_sweep_c0() {
  static const std::vector<double> v{0.0, 1e-8, 1.0};
  return v;
}
inline const std::vector<double>& default_sweep_lambda() {
  static const std::vector<double> v{1.0, 1e2, 1e6};
  return v;
}

/// Convergence study for every (c0, lambda) pair on the divergence-free case.
/// Cells are ordered by c0 then lambda.
inline std::vector<SweepCell> locking_sweep(const std::vector<std::size_t>& levels, double mu, double final_time,
                                            const std::vector<double>& c0s = default_sweep_c0(),
                                            const std::vector<double>& lambdas = default_sweep_lambda(),
                                            const std::string& case_name = "divfree") {
  std::vector<SweepCell> cells;
  for (double c0 : c0s)
    for (double lam : lambdas) {
      MaterialParams p{mu, lam, c0};
      cells.push_back({c0, lam, convergence_study(case_name, p, levels, final_time)});
    }
  return cells;
}

/// Outcome of one integrator in the compatibility experiment.
struct CompatibilityRun {
  double pressure_increment = 0.0;  // ||P^1 - P^0||_0
  double max_state_norm = 0.0;      // max over steps of the coefficient max-norm
  double final_p_error = 0.0;
  StateErrors max_errors;
};

struct CompatibilityReport {
  std::size_t n = 0;
  std::size_t steps = 0;
  bool incompatible = false;
  CompatibilityRun be_compatible, be_initial, cn_compatible, cn_initial;
};

namespace detail {

inline CompatibilityRun summarize(const Discretization& d, const Trajectory& traj, const ManufacturedCase& c) {
  CompatibilityRun r;
  const DenseVector dp = traj[1].p - traj[0].p;
  r.pressure_increment = std::sqrt(dp.dot(triangle_areas(d.mesh).asDiagonal() * dp));
  for (const auto& s : traj) r.max_state_norm = std::max(r.max_state_norm, s.max_abs());
  const auto errs = trajectory_errors(d, traj, c);
  for (const auto& e : errs) {
    r.max_errors.u_1h = std::max(r.max_errors.u_1h, e.u_1h);
    r.max_errors.p_l2 = std::max(r.max_errors.p_l2, e.p_l2);
    r.max_errors.z_l2 = std::max(r.max_errors.z_l2, e.z_l2);
  }
  r.final_p_error = errs.back().p_l2;
  return r;
}

}  // namespace detail

/// Runs backward Euler and Crank-Nicolson from compatible initial data and,
/// when `incompatible`, also from P0 = Q_h p(0), Z0 compatible, U0 = 0.
/// Without `incompatible` the second pair repeats the compatible start.
inline CompatibilityReport compatibility_experiment(const std::string& case_name, const MaterialParams& params,
                                                    std::size_t n, std::size_t steps, double final_time,
                                                    bool incompatible) {
  const auto c = builtin_case(case_name, params);
  const auto d = Discretization::structured(n);
  const auto ops = assemble_operators(d, params);
  const TimeGrid grid(final_time, steps);
  const auto forcing = Forcing::from_case(d, c);
  const auto compatible = compatible_initial_data(ops, c);
  SystemState start = compatible;
  if (incompatible) start.u.setZero();

  CompatibilityReport rep;
  rep.n = n;
  rep.steps = steps;
  rep.incompatible = incompatible;
  rep.be_compatible = detail::summarize(d, run_transient(ops, grid, forcing, compatible), c);
  rep.cn_compatible =
      detail::summarize(d, run_transient(ops, grid, forcing, compatible, Integrator::crank_nicolson), c);
  rep.be_initial = detail::summarize(d, run_transient(ops, grid, forcing, start), c);
  rep.cn_initial = detail::summarize(d, run_transient(ops, grid, forcing, start, Integrator::crank_nicolson), c);
  return rep;
}

}  // namespace biot

#endif  // BIOT_VERIFY_HPP
