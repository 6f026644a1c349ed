#ifndef BIOT_QUADRATURE_HPP
#define BIOT_QUADRATURE_HPP

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "mesh.hpp"

namespace biot {

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
  std::vector<double> points;
  std::vector<double> weights;
};

inline GaussLegendre gauss_legendre(int npoints) {
  if (npoints < 1) throw std::invalid_argument("Gauss-Legendre needs at least one point");
  GaussLegendre rule;
  rule.points.resize(npoints);
  rule.weights.resize(npoints);
  const int n = npoints;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.points[i] = -x;
    rule.points[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.points[n / 2] = 0.0;
  return rule;
}

/// Number of Gauss-Legendre points that integrates degree `degree` exactly.
inline int gauss_points_for_degree(int degree) { return degree / 2 + 1; }

/// Quadrature on the reference triangle {(0,0), (1,0), (0,1)}, stored in
/// barycentric coordinates; weights sum to 1/2.
struct QuadRule {
  int degree = 0;
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
};

inline constexpr int max_quadrature_degree = 10;

/// Collapsed (Duffy) tensor product of Gauss-Legendre rules. The collapsed
/// direction carries the extra Jacobian factor, so it takes one more degree.
inline QuadRule quadrature(int degree) {
  if (degree < 1 || degree > max_quadrature_degree)
    throw std::invalid_argument("unsupported quadrature degree " + std::to_string(degree));
  const auto gx = gauss_legendre(gauss_points_for_degree(degree));
  const auto gy = gauss_legendre(gauss_points_for_degree(degree + 1));
  QuadRule rule;
  rule.degree = degree;
  for (std::size_t i = 0; i < gx.points.size(); ++i) {
    const double u = 0.5 * (gx.points[i] + 1.0);
    for (std::size_t j = 0; j < gy.points.size(); ++j) {
      const double v = 0.5 * (gy.points[j] + 1.0);
      // (u, v) in the unit square -> (x, y) = (u (1 - v), v).
      const double x = u * (1.0 - v);
      const double y = v;
      rule.points.push_back({1.0 - x - y, x, y});
      rule.weights.push_back(0.25 * gx.weights[i] * gy.weights[j] * (1.0 - v));
    }
  }
  return rule;
}

/// Physical point of a barycentric coordinate in triangle t.
inline Point map_point(const std::array<Point, 3>& c, const std::array<double, 3>& bary) {
  return {bary[0] * c[0].x + bary[1] * c[1].x + bary[2] * c[2].x,
          bary[0] * c[0].y + bary[1] * c[1].y + bary[2] * c[2].y};
}

/// Quadrature points and weights mapped onto a physical triangle.
struct PhysicalQuad {
  std::vector<Point> points;
  std::vector<double> weights;
};

inline PhysicalQuad map_rule(const Mesh& mesh, std::size_t t, const QuadRule& rule) {
  const auto c = mesh.corners(t);
  const double jac = 2.0 * mesh.area(t);
  PhysicalQuad q;
  q.points.reserve(rule.size());
  q.weights.reserve(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) {
    q.points.push_back(map_point(c, rule.points[i]));
    q.weights.push_back(rule.weights[i] * jac);
  }
  return q;
}

/// Edge quadrature in the global edge parameter s in [-1, 1], running along
/// the global tangent. Weights include the length Jacobian |E|/2.
struct EdgeQuad {
  std::vector<double> params;
  std::vector<Point> points;
  std::vector<double> weights;
};

inline EdgeQuad edge_rule(const Mesh& mesh, std::size_t e, int degree) {
  const auto g = gauss_legendre(gauss_points_for_degree(degree));
  const Point a = mesh.edge_start(e), b = mesh.edge_end(e);
  const double half = 0.5 * mesh.edge_length(e);
  EdgeQuad q;
  for (std::size_t i = 0; i < g.points.size(); ++i) {
    const double s = g.points[i];
    q.params.push_back(s);
    q.points.push_back(0.5 * (1.0 - s) * a + 0.5 * (1.0 + s) * b);
    q.weights.push_back(g.weights[i] * half);
  }
  return q;
}

}  // namespace biot

#endif  // BIOT_QUADRATURE_HPP
