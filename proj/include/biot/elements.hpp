#ifndef BIOT_ELEMENTS_HPP
#define BIOT_ELEMENTS_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "mesh.hpp"
#include "quadrature.hpp"

namespace biot {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Quadrature degree for polynomial stiffness, mass and coupling integrals.
inline constexpr int assembly_degree = 6;
/// Quadrature degree for loads, interpolation moments and error norms.
inline constexpr int data_degree = 10;

namespace detail {

// Cubic monomials xi^a eta^b ordered by total degree.
inline constexpr std::array<std::array<int, 2>, 10> cubic_exponents{{
    {0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}, {3, 0}, {2, 1}, {1, 2}, {0, 3}}};

inline int monomial_index(int a, int b) {
  for (int k = 0; k < 10; ++k)
    if (cubic_exponents[k][0] == a && cubic_exponents[k][1] == b) return k;
  return -1;
}

struct MonomialEval {
  Eigen::Matrix<double, 10, 1> value, d_xi, d_eta;
};

inline MonomialEval eval_monomials(double xi, double eta) {
  std::array<double, 4> px{1.0, xi, xi * xi, xi * xi * xi};
  std::array<double, 4> py{1.0, eta, eta * eta, eta * eta * eta};
  MonomialEval m;
  for (int k = 0; k < 10; ++k) {
    const int a = cubic_exponents[k][0], b = cubic_exponents[k][1];
    m.value[k] = px[a] * py[b];
    m.d_xi[k] = a > 0 ? a * px[a - 1] * py[b] : 0.0;
    m.d_eta[k] = b > 0 ? b * px[a] * py[b - 1] : 0.0;
  }
  return m;
}

inline double legendre(int q, double s) {
  switch (q) {
    case 0: return 1.0;
    case 1: return s;
    case 2: return 0.5 * (3.0 * s * s - 1.0);
    case 3: return 0.5 * (5.0 * s * s * s - 3.0 * s);
  }
  return 0.0;
}

}  // namespace detail

/// Values and gradients of the 9 MTW shape functions at one point.
/// grad[j](r, c) = d(phi_j)_r / dx_c.
struct MtwEval {
  Eigen::Matrix<double, 2, 9> value;
  std::array<Mat2, 9> grad;
};

/// Mardal-Tai-Winther shape functions on one physical triangle.
///
/// Each shape function is a pair of cubics in the scaled local coordinates
/// (x - centroid) / diameter. The space is the nullspace of the constraints
/// div v in P0 and v.n|_E in P1; the basis is dual to the edge functionals
///   3k+0: int_E v.n_E ds,  3k+1: int_E v.n_E s ds,  3k+2: int_E v.t_E ds
/// on local edge k, where n_E, t_E and s in [-1, 1] follow the global edge
/// frame so neighbouring triangles evaluate identical functionals.
class MtwLocalBasis {
 public:
  static constexpr int num_dofs = 9;
  using Coefficients = Eigen::Matrix<double, 20, 9>;

  MtwLocalBasis() = default;

  MtwLocalBasis(const Mesh& mesh, std::size_t t) : triangle_(t) {
    center_ = mesh.centroid(t);
    scale_ = mesh.diameter(t);

    Eigen::Matrix<double, 11, 20> constraints = Eigen::Matrix<double, 11, 20>::Zero();
    // div v has no linear or quadratic part.
    const std::array<std::array<int, 2>, 5> div_targets{{{1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}}};
    for (int r = 0; r < 5; ++r) {
      const auto [ta, tb] = div_targets[r];
      const int from_x = detail::monomial_index(ta + 1, tb);
      const int from_y = detail::monomial_index(ta, tb + 1);
      if (from_x >= 0) constraints(r, from_x) = ta + 1;
      if (from_y >= 0) constraints(r, 10 + from_y) = tb + 1;
    }
    // v.n on each edge has no degree-2 or degree-3 Legendre component.
    const auto gl = gauss_legendre(4);
    for (int k = 0; k < 3; ++k) {
      const std::size_t e = mesh.triangle_edges[t][k].edge;
      const Point a = mesh.edge_start(e), b = mesh.edge_end(e);
      const Point n = mesh.edge_normal(e);
      for (int q = 0; q < 2; ++q) {
        const int row = 5 + 2 * k + q;
        for (std::size_t i = 0; i < gl.points.size(); ++i) {
          const double s = gl.points[i];
          const Point x = 0.5 * (1.0 - s) * a + 0.5 * (1.0 + s) * b;
          const auto m = monomials_at(x);
          const double w = gl.weights[i] * detail::legendre(q + 2, s);
          constraints.block<1, 10>(row, 0) += w * n.x * m.value.transpose();
          constraints.block<1, 10>(row, 10) += w * n.y * m.value.transpose();
        }
      }
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd{Eigen::MatrixXd(constraints), Eigen::ComputeFullV};
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv[i] > 1e-10 * sv[0]) ++rank;
    if (rank != 11)
      throw NumericalError("MTW constraint matrix has rank " + std::to_string(rank) +
                           " on triangle " + std::to_string(t));
    const Eigen::Matrix<double, 20, 9> nullspace = svd.matrixV().rightCols<9>();

    Eigen::Matrix<double, 9, 9> dof_matrix;
    for (int j = 0; j < 9; ++j) {
      const Eigen::Matrix<double, 20, 1> c = nullspace.col(j);
      dof_matrix.col(j) = functionals_of(mesh, [&](Point x) { return eval_coefficients(c, x); });
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> dsvd{Eigen::MatrixXd(dof_matrix)};
    const auto& dsv = dsvd.singularValues();
    condition_ = dsv[0] / dsv[dsv.size() - 1];
    if (!(condition_ <= 1e8))
      throw NumericalError("MTW DOF matrix condition " + std::to_string(condition_) +
                           " on triangle " + std::to_string(t) + " (degenerate triangle)");
    coeffs_ = nullspace * dof_matrix.inverse();

    const auto c = monomials_at(center_);
    for (int j = 0; j < 9; ++j)
      divergence_[j] = (coeffs_.col(j).head<10>().dot(c.d_xi) + coeffs_.col(j).tail<10>().dot(c.d_eta)) / scale_;

    const auto rule = quadrature(assembly_degree);
    const auto q = map_rule(mesh, t, rule);
    cached_.reserve(q.points.size());
    for (const auto& p : q.points) cached_.push_back(eval(p));
  }

  std::size_t triangle() const { return triangle_; }
  const Coefficients& coefficients() const { return coeffs_; }
  double dof_condition() const { return condition_; }

  /// Elementwise constant divergence of each shape function.
  const std::array<double, 9>& divergence() const { return divergence_; }

  /// Evaluations at the points of quadrature(assembly_degree) mapped to this triangle.
  const std::vector<MtwEval>& cached() const { return cached_; }

  MtwEval eval(Point x) const {
    const auto m = monomials_at(x);
    MtwEval r;
    r.value.row(0) = m.value.transpose() * coeffs_.topRows<10>();
    r.value.row(1) = m.value.transpose() * coeffs_.bottomRows<10>();
    const Eigen::Matrix<double, 1, 9> ux = m.d_xi.transpose() * coeffs_.topRows<10>() / scale_;
    const Eigen::Matrix<double, 1, 9> uy = m.d_eta.transpose() * coeffs_.topRows<10>() / scale_;
    const Eigen::Matrix<double, 1, 9> vx = m.d_xi.transpose() * coeffs_.bottomRows<10>() / scale_;
    const Eigen::Matrix<double, 1, 9> vy = m.d_eta.transpose() * coeffs_.bottomRows<10>() / scale_;
    for (int j = 0; j < 9; ++j) r.grad[j] << ux[j], uy[j], vx[j], vy[j];
    return r;
  }

  /// Applies the 9 local DOF functionals to a vector field.
  template <class Field>
  Eigen::Matrix<double, 9, 1> functionals_of(const Mesh& mesh, Field&& v, int degree = 4) const {
    Eigen::Matrix<double, 9, 1> out;
    for (int k = 0; k < 3; ++k) {
      const std::size_t e = mesh.triangle_edges[triangle_][k].edge;
      const auto dofs = edge_functionals(mesh, e, v, degree);
      out.segment<3>(3 * k) = dofs;
    }
    return out;
  }

  /// The three global-frame functionals of edge e applied to v.
  template <class Field>
  static Eigen::Vector3d edge_functionals(const Mesh& mesh, std::size_t e, Field&& v, int degree) {
    const auto q = edge_rule(mesh, e, degree);
    const Point n = mesh.edge_normal(e), tg = mesh.edge_tangent(e);
    Eigen::Vector3d out = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < q.points.size(); ++i) {
      const Vec2 val = v(q.points[i]);
      const double vn = val[0] * n.x + val[1] * n.y;
      const double vt = val[0] * tg.x + val[1] * tg.y;
      out[0] += q.weights[i] * vn;
      out[1] += q.weights[i] * vn * q.params[i];
      out[2] += q.weights[i] * vt;
    }
    return out;
  }

 private:
  detail::MonomialEval monomials_at(Point x) const {
    return detail::eval_monomials((x.x - center_.x) / scale_, (x.y - center_.y) / scale_);
  }

  Vec2 eval_coefficients(const Eigen::Matrix<double, 20, 1>& c, Point x) const {
    const auto m = monomials_at(x);
    return {c.head<10>().dot(m.value), c.tail<10>().dot(m.value)};
  }

  std::size_t triangle_ = 0;
  Point center_{};
  double scale_ = 1.0;
  double condition_ = 0.0;
  Coefficients coeffs_ = Coefficients::Zero();
  std::array<double, 9> divergence_{};
  std::vector<MtwEval> cached_;
};

/// Lowest-order Raviart-Thomas functions phi_k = a_k + b_k x, dual to the
/// edge fluxes int_E phi.n_E ds with global normals.
class Rt0LocalBasis {
 public:
  Rt0LocalBasis() = default;

  Rt0LocalBasis(const Mesh& mesh, std::size_t t) : triangle_(t) {
    const double area = mesh.area(t);
    if (!(area > 1e-14 * mesh.diameter(t) * mesh.diameter(t)))
      throw NumericalError("degenerate triangle " + std::to_string(t));
    const auto c = mesh.corners(t);
    for (int k = 0; k < 3; ++k) {
      const double s = mesh.triangle_edges[t][k].sign;
      scale_[k] = s / (2.0 * area);
      shift_[k] = Vec2(-scale_[k] * c[k].x, -scale_[k] * c[k].y);
    }
  }

  std::size_t triangle() const { return triangle_; }

  Vec2 value(int k, Point x) const { return shift_[k] + scale_[k] * Vec2(x.x, x.y); }
  double divergence(int k) const { return 2.0 * scale_[k]; }

 private:
  std::size_t triangle_ = 0;
  std::array<double, 3> scale_{};
  std::array<Vec2, 3> shift_{};
};

/// Global numbering of the three discrete spaces. Eliminated DOFs map to -1.
struct DofMap {
  static constexpr std::int64_t eliminated = -1;

  std::vector<std::int64_t> sigma_edge;  // first of the 3 MTW DOFs of each edge
  std::vector<std::int64_t> rt_edge;
  std::vector<std::array<std::int64_t, 9>> mtw_local_to_global;
  std::vector<std::array<std::int64_t, 3>> rt_local_to_global;
  std::size_t num_sigma = 0, num_rt = 0, num_pressure = 0;
};

inline DofMap build_dofmap(const Mesh& mesh, const BoundaryTags& tags) {
  DofMap d;
  d.sigma_edge.assign(mesh.num_edges(), DofMap::eliminated);
  d.rt_edge.assign(mesh.num_edges(), DofMap::eliminated);
  std::int64_t ns = 0, nr = 0;
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    if (!tags.on_gamma_d[e]) {
      d.sigma_edge[e] = ns;
      ns += 3;
    }
    if (!tags.on_gamma_f[e]) d.rt_edge[e] = nr++;
  }
  d.num_sigma = static_cast<std::size_t>(ns);
  d.num_rt = static_cast<std::size_t>(nr);
  d.num_pressure = mesh.num_triangles();
  d.mtw_local_to_global.resize(mesh.num_triangles());
  d.rt_local_to_global.resize(mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    for (int k = 0; k < 3; ++k) {
      const std::size_t e = mesh.triangle_edges[t][k].edge;
      for (int m = 0; m < 3; ++m)
        d.mtw_local_to_global[t][3 * k + m] =
            d.sigma_edge[e] == DofMap::eliminated ? DofMap::eliminated : d.sigma_edge[e] + m;
      d.rt_local_to_global[t][k] = d.rt_edge[e];
    }
  }
  return d;
}

/// Mesh, boundary partition, numbering and per-triangle bases in one bundle.
struct Discretization {
  Mesh mesh;
  BoundaryTags tags;
  DofMap dofs;
  std::vector<MtwLocalBasis> mtw;
  std::vector<Rt0LocalBasis> rt;

  Discretization(Mesh m, const BoundarySpec& spec) : mesh(std::move(m)) {
    tags = tag_boundary(mesh, spec);
    dofs = build_dofmap(mesh, tags);
    mtw.reserve(mesh.num_triangles());
    rt.reserve(mesh.num_triangles());
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
      mtw.emplace_back(mesh, t);
      rt.emplace_back(mesh, t);
    }
  }

  static Discretization structured(std::size_t n, const BoundarySpec& spec = BoundarySpec::whole_boundary()) {
    return Discretization(build_structured_mesh(n), spec);
  }

  double h() const { return mesh_size(mesh); }
};

inline MtwLocalBasis build_mtw_basis(const Mesh& mesh, std::size_t t) { return MtwLocalBasis(mesh, t); }
inline Rt0LocalBasis build_rt0_basis(const Mesh& mesh, std::size_t t) { return Rt0LocalBasis(mesh, t); }

/// Local coefficients of a global vector on triangle t (zeros where eliminated).
inline Eigen::Matrix<double, 9, 1> local_sigma(const Discretization& d, const Eigen::VectorXd& u, std::size_t t) {
  Eigen::Matrix<double, 9, 1> c;
  for (int j = 0; j < 9; ++j) {
    const auto g = d.dofs.mtw_local_to_global[t][j];
    c[j] = g == DofMap::eliminated ? 0.0 : u[g];
  }
  return c;
}

inline Eigen::Vector3d local_rt(const Discretization& d, const Eigen::VectorXd& z, std::size_t t) {
  Eigen::Vector3d c;
  for (int k = 0; k < 3; ++k) {
    const auto g = d.dofs.rt_local_to_global[t][k];
    c[k] = g == DofMap::eliminated ? 0.0 : z[g];
  }
  return c;
}

/// Value of a Sigma_h function at a point of triangle t.
inline Vec2 sigma_value(const Discretization& d, const Eigen::VectorXd& u, std::size_t t, Point x) {
  return d.mtw[t].eval(x).value * local_sigma(d, u, t);
}

inline Mat2 sigma_gradient(const Discretization& d, const Eigen::VectorXd& u, std::size_t t, Point x) {
  const auto ev = d.mtw[t].eval(x);
  const auto c = local_sigma(d, u, t);
  Mat2 g = Mat2::Zero();
  for (int j = 0; j < 9; ++j) g += c[j] * ev.grad[j];
  return g;
}

inline double sigma_divergence(const Discretization& d, const Eigen::VectorXd& u, std::size_t t) {
  const auto c = local_sigma(d, u, t);
  double div = 0.0;
  for (int j = 0; j < 9; ++j) div += c[j] * d.mtw[t].divergence()[j];
  return div;
}

inline Vec2 rt_value(const Discretization& d, const Eigen::VectorXd& z, std::size_t t, Point x) {
  const auto c = local_rt(d, z, t);
  Vec2 v = Vec2::Zero();
  for (int k = 0; k < 3; ++k) v += c[k] * d.rt[t].value(k, x);
  return v;
}

inline double rt_divergence(const Discretization& d, const Eigen::VectorXd& z, std::size_t t) {
  const auto c = local_rt(d, z, t);
  double div = 0.0;
  for (int k = 0; k < 3; ++k) div += c[k] * d.rt[t].divergence(k);
  return div;
}

/// Pi_h: evaluates the edge functionals of v; Gamma_d DOFs are zero.
template <class Field>
Eigen::VectorXd interpolate_mtw(const Discretization& d, Field&& v) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d.dofs.num_sigma));
  for (std::size_t e = 0; e < d.mesh.num_edges(); ++e) {
    const auto g = d.dofs.sigma_edge[e];
    if (g == DofMap::eliminated) continue;
    out.segment<3>(g) = MtwLocalBasis::edge_functionals(d.mesh, e, v, data_degree);
  }
  return out;
}

/// Canonical RT interpolant: edge fluxes of w; Gamma_f DOFs are zero.
template <class Field>
Eigen::VectorXd interpolate_rt(const Discretization& d, Field&& w) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d.dofs.num_rt));
  for (std::size_t e = 0; e < d.mesh.num_edges(); ++e) {
    const auto g = d.dofs.rt_edge[e];
    if (g == DofMap::eliminated) continue;
    const auto q = edge_rule(d.mesh, e, data_degree);
    const Point n = d.mesh.edge_normal(e);
    double flux = 0.0;
    for (std::size_t i = 0; i < q.points.size(); ++i) {
      const Vec2 val = w(q.points[i]);
      flux += q.weights[i] * (val[0] * n.x + val[1] * n.y);
    }
    out[g] = flux;
  }
  return out;
}

/// Q_h: elementwise mean of q.
template <class Scalar>
Eigen::VectorXd project_p0(const Mesh& mesh, Scalar&& q) {
  const auto rule = quadrature(data_degree);
  Eigen::VectorXd out(static_cast<Eigen::Index>(mesh.num_triangles()));
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto pq = map_rule(mesh, t, rule);
    double s = 0.0;
    for (std::size_t i = 0; i < pq.points.size(); ++i) s += pq.weights[i] * q(pq.points[i]);
    out[t] = s / mesh.area(t);
  }
  return out;
}

}  // namespace biot

#endif  // BIOT_ELEMENTS_HPP
