#ifndef BIOT_ASSEMBLY_HPP
#define BIOT_ASSEMBLY_HPP

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "elements.hpp"
#include "linalg.hpp"

namespace biot {

/// Lame parameters and storage coefficient. Biot-Willis coefficient and
/// permeability are fixed to 1 and the identity.
struct MaterialParams {
  double mu = 1.0;
  double lambda = 1.0;
  double c0 = 1.0;

  void validate() const {
    if (!(std::isfinite(mu) && mu > 0.0)) throw std::invalid_argument("mu must be positive and finite");
    if (!(std::isfinite(lambda) && lambda > 0.0)) throw std::invalid_argument("lambda must be positive and finite");
    if (!(std::isfinite(c0) && c0 >= 0.0)) throw std::invalid_argument("c0 must be nonnegative and finite");
  }
};

/// Visits triangles in `order` (all triangles when empty) and collects the
/// triplets produced by `kernel(t, out)`.
template <class Kernel>
CsrMatrix assemble_matrix(const Discretization& d, std::size_t rows, std::size_t cols, Kernel&& kernel,
                          std::span<const std::size_t> order = {}) {
  std::vector<Triplet> triplets;
  if (order.empty()) {
    for (std::size_t t = 0; t < d.mesh.num_triangles(); ++t) kernel(t, triplets);
  } else {
    for (std::size_t t : order) kernel(t, triplets);
  }
  return CsrMatrix::from_triplets(rows, cols, std::move(triplets));
}

namespace detail {

template <int N, class Local>
void scatter(const std::array<std::int64_t, N>& l2g, const Local& local, std::vector<Triplet>& out) {
  for (int i = 0; i < N; ++i) {
    if (l2g[i] == DofMap::eliminated) continue;
    for (int j = 0; j < N; ++j) {
      if (l2g[j] == DofMap::eliminated) continue;
      out.push_back({static_cast<std::size_t>(l2g[i]), static_cast<std::size_t>(l2g[j]), local(i, j)});
    }
  }
}

inline Mat2 sym(const Mat2& g) { return 0.5 * (g + g.transpose()); }

inline double frobenius(const Mat2& a, const Mat2& b) { return (a.array() * b.array()).sum(); }

/// Local 9x9 Sigma_h matrix of a bilinear form given pointwise on gradients.
template <class Form>
CsrMatrix assemble_sigma_form(const Discretization& d, Form&& form, std::span<const std::size_t> order) {
  const auto rule = quadrature(assembly_degree);
  return assemble_matrix(
      d, d.dofs.num_sigma, d.dofs.num_sigma,
      [&](std::size_t t, std::vector<Triplet>& out) {
        const auto& basis = d.mtw[t];
        const double jac = 2.0 * d.mesh.area(t);
        Eigen::Matrix<double, 9, 9> local = Eigen::Matrix<double, 9, 9>::Zero();
        for (std::size_t q = 0; q < rule.size(); ++q) {
          const auto& ev = basis.cached()[q];
          const double w = rule.weights[q] * jac;
          for (int i = 0; i < 9; ++i)
            for (int j = 0; j < 9; ++j) local(i, j) += w * form(ev.grad[j], ev.grad[i]);
        }
        scatter<9>(d.dofs.mtw_local_to_global[t], local, out);
      },
      order);
}

}  // namespace detail

/// a_h(u, v) = 2 mu (eps_h u, eps_h v) + lambda (div u, div v) on Sigma_h.
inline CsrMatrix assemble_elasticity(const Discretization& d, const MaterialParams& p,
                                     std::span<const std::size_t> order = {}) {
  p.validate();
  return detail::assemble_sigma_form(
      d,
      [&](const Mat2& gu, const Mat2& gv) {
        return 2.0 * p.mu * detail::frobenius(detail::sym(gu), detail::sym(gv)) + p.lambda * gu.trace() * gv.trace();
      },
      order);
}

/// Gram matrix of the broken H1 seminorm sum_T (grad u, grad v)_T.
inline CsrMatrix assemble_broken_h1_gram(const Discretization& d, std::span<const std::size_t> order = {}) {
  return detail::assemble_sigma_form(d, [](const Mat2& gu, const Mat2& gv) { return detail::frobenius(gu, gv); },
                                     order);
}

/// Gram matrix of (eps_h u, eps_h v).
inline CsrMatrix assemble_strain_gram(const Discretization& d, std::span<const std::size_t> order = {}) {
  return detail::assemble_sigma_form(
      d, [](const Mat2& gu, const Mat2& gv) { return detail::frobenius(detail::sym(gu), detail::sym(gv)); }, order);
}

namespace detail {

template <class Form>
CsrMatrix assemble_rt_form(const Discretization& d, Form&& form, std::span<const std::size_t> order) {
  const auto rule = quadrature(assembly_degree);
  return assemble_matrix(
      d, d.dofs.num_rt, d.dofs.num_rt,
      [&](std::size_t t, std::vector<Triplet>& out) {
        const auto& basis = d.rt[t];
        const auto pq = map_rule(d.mesh, t, rule);
        Eigen::Matrix3d local = Eigen::Matrix3d::Zero();
        for (std::size_t q = 0; q < pq.points.size(); ++q) {
          std::array<Vec2, 3> v;
          for (int k = 0; k < 3; ++k) v[k] = basis.value(k, pq.points[q]);
          for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
              local(i, j) += pq.weights[q] * form(v[j], basis.divergence(j), v[i], basis.divergence(i));
        }
        scatter<3>(d.dofs.rt_local_to_global[t], local, out);
      },
      order);
}

}  // namespace detail

/// L2 Gram matrix of V_h.
inline CsrMatrix assemble_rt_mass(const Discretization& d, std::span<const std::size_t> order = {}) {
  return detail::assemble_rt_form(
      d, [](const Vec2& a, double, const Vec2& b, double) { return a.dot(b); }, order);
}

/// Gram matrix of the H(div) norm (w, w) + (div w, div w).
inline CsrMatrix assemble_hdiv_gram(const Discretization& d, std::span<const std::size_t> order = {}) {
  return detail::assemble_rt_form(
      d, [](const Vec2& a, double da, const Vec2& b, double db) { return a.dot(b) + da * db; }, order);
}

/// (c0 p, q) on W_h: diagonal with entries c0 |T|.
inline CsrMatrix assemble_pressure_mass(const Discretization& d, double c0) {
  if (!(std::isfinite(c0) && c0 >= 0.0)) throw std::invalid_argument("c0 must be nonnegative and finite");
  std::vector<Triplet> t;
  if (c0 > 0.0)
    for (std::size_t k = 0; k < d.mesh.num_triangles(); ++k) t.push_back({k, k, c0 * d.mesh.area(k)});
  return CsrMatrix::from_triplets(d.dofs.num_pressure, d.dofs.num_pressure, std::move(t));
}

/// B_up(i, j) = (chi_i, div phi_j): rows W_h, columns Sigma_h.
inline CsrMatrix assemble_div_coupling_u(const Discretization& d, std::span<const std::size_t> order = {}) {
  return assemble_matrix(
      d, d.dofs.num_pressure, d.dofs.num_sigma,
      [&](std::size_t t, std::vector<Triplet>& out) {
        const double area = d.mesh.area(t);
        for (int j = 0; j < 9; ++j) {
          const auto g = d.dofs.mtw_local_to_global[t][j];
          if (g == DofMap::eliminated) continue;
          out.push_back({t, static_cast<std::size_t>(g), area * d.mtw[t].divergence()[j]});
        }
      },
      order);
}

/// B_zp(i, j) = (chi_i, div psi_j): rows W_h, columns V_h.
inline CsrMatrix assemble_div_coupling_z(const Discretization& d, std::span<const std::size_t> order = {}) {
  return assemble_matrix(
      d, d.dofs.num_pressure, d.dofs.num_rt,
      [&](std::size_t t, std::vector<Triplet>& out) {
        const double area = d.mesh.area(t);
        for (int k = 0; k < 3; ++k) {
          const auto g = d.dofs.rt_local_to_global[t][k];
          if (g == DofMap::eliminated) continue;
          out.push_back({t, static_cast<std::size_t>(g), area * d.rt[t].divergence(k)});
        }
      });
}

/// (f(t), phi_i) for a vector field f(x, t).
template <class Field>
DenseVector assemble_load(const Discretization& d, Field&& f, double time) {
  const auto rule = quadrature(data_degree);
  DenseVector b = DenseVector::Zero(static_cast<Eigen::Index>(d.dofs.num_sigma));
  for (std::size_t t = 0; t < d.mesh.num_triangles(); ++t) {
    const auto pq = map_rule(d.mesh, t, rule);
    Eigen::Matrix<double, 9, 1> local = Eigen::Matrix<double, 9, 1>::Zero();
    for (std::size_t q = 0; q < pq.points.size(); ++q) {
      const Vec2 fv = f(pq.points[q], time);
      local += pq.weights[q] * (d.mtw[t].eval(pq.points[q]).value.transpose() * fv);
    }
    for (int j = 0; j < 9; ++j) {
      const auto g = d.dofs.mtw_local_to_global[t][j];
      if (g != DofMap::eliminated) b[g] += local[j];
    }
  }
  return b;
}

/// (g(t), chi_i) for a scalar field g(x, t).
template <class Field>
DenseVector assemble_source(const Discretization& d, Field&& g, double time) {
  const auto rule = quadrature(data_degree);
  DenseVector b(static_cast<Eigen::Index>(d.dofs.num_pressure));
  for (std::size_t t = 0; t < d.mesh.num_triangles(); ++t) {
    const auto pq = map_rule(d.mesh, t, rule);
    double s = 0.0;
    for (std::size_t q = 0; q < pq.points.size(); ++q) s += pq.weights[q] * g(pq.points[q], time);
    b[static_cast<Eigen::Index>(t)] = s;
  }
  return b;
}

/// The five matrices of the semidiscrete system.
struct DiscreteOperators {
  const Discretization* disc = nullptr;
  MaterialParams params;
  CsrMatrix a_uu, a_zz, a_pp, b_up, b_zp;

  std::size_t num_u() const { return a_uu.rows(); }
  std::size_t num_z() const { return a_zz.rows(); }
  std::size_t num_p() const { return a_pp.rows(); }
};

inline DiscreteOperators assemble_operators(const Discretization& d, const MaterialParams& p) {
  p.validate();
  return {&d,
          p,
          assemble_elasticity(d, p),
          assemble_rt_mass(d),
          assemble_pressure_mass(d, p.c0),
          assemble_div_coupling_u(d),
          assemble_div_coupling_z(d)};
}

}  // namespace biot

#endif  // BIOT_ASSEMBLY_HPP
