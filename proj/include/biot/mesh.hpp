#ifndef BIOT_MESH_HPP
#define BIOT_MESH_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace biot {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }

/// Reference to a mesh edge as seen from one triangle. `sign` is +1 when the
/// global edge normal points out of the triangle, -1 otherwise.
struct LocalEdge {
  std::size_t edge = 0;
  int sign = 1;
};

/// Sides of the unit square, used for boundary tagging.
enum class Side { bottom = 0, right = 1, top = 2, left = 3 };

inline const char* side_name(Side s) {
  switch (s) {
    case Side::bottom: return "bottom";
    case Side::right: return "right";
    case Side::top: return "top";
    case Side::left: return "left";
  }
  return "?";
}

/// Triangulation with full edge topology.
///
/// Triangles are counterclockwise. Local edge k of a triangle is the edge
/// opposite local vertex k. Edges store the lower vertex index first; the
/// global tangent runs from the first to the second vertex and the global
/// normal is the tangent rotated by -90 degrees.
struct Mesh {
  std::vector<Point> vertices;
  std::vector<std::array<std::size_t, 3>> triangles;
  std::vector<std::array<std::size_t, 2>> edges;
  std::vector<std::array<LocalEdge, 3>> triangle_edges;
  /// Adjacent triangles per edge; second entry empty on the boundary.
  std::vector<std::array<std::optional<std::size_t>, 2>> edge_triangles;
  /// Boundary edge indices, each with the side of the unit square it lies on.
  std::vector<std::pair<std::size_t, Side>> boundary_edges;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_triangles() const { return triangles.size(); }
  std::size_t num_edges() const { return edges.size(); }

  std::array<Point, 3> corners(std::size_t t) const {
    const auto& tri = triangles[t];
    return {vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]};
  }

  double signed_area(std::size_t t) const {
    const auto [a, b, c] = corners(t);
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
  }

  double area(std::size_t t) const { return std::abs(signed_area(t)); }

  Point edge_start(std::size_t e) const { return vertices[edges[e][0]]; }
  Point edge_end(std::size_t e) const { return vertices[edges[e][1]]; }
  Point edge_midpoint(std::size_t e) const { return 0.5 * (edge_start(e) + edge_end(e)); }
  double edge_length(std::size_t e) const { return norm(edge_end(e) - edge_start(e)); }

  Point edge_tangent(std::size_t e) const {
    const Point d = edge_end(e) - edge_start(e);
    return (1.0 / norm(d)) * d;
  }

  Point edge_normal(std::size_t e) const {
    const Point t = edge_tangent(e);
    return {t.y, -t.x};
  }

  bool is_boundary_edge(std::size_t e) const { return !edge_triangles[e][1].has_value(); }

  Point centroid(std::size_t t) const {
    const auto [a, b, c] = corners(t);
    return (1.0 / 3.0) * (a + b + c);
  }

  double diameter(std::size_t t) const {
    double d = 0.0;
    for (const auto& le : triangle_edges[t]) d = std::max(d, edge_length(le.edge));
    return d;
  }
};

namespace detail {

inline std::optional<Side> side_of_segment(Point a, Point b) {
  constexpr double tol = 1e-12;
  if (std::abs(a.y) < tol && std::abs(b.y) < tol) return Side::bottom;
  if (std::abs(a.x - 1.0) < tol && std::abs(b.x - 1.0) < tol) return Side::right;
  if (std::abs(a.y - 1.0) < tol && std::abs(b.y - 1.0) < tol) return Side::top;
  if (std::abs(a.x) < tol && std::abs(b.x) < tol) return Side::left;
  return std::nullopt;
}

}  // namespace detail

/// Builds edge topology and boundary lists for a mesh whose vertices and
/// counterclockwise triangles are already set. Boundary edges must lie on
/// the sides of the unit square.
inline void build_topology(Mesh& mesh) {
  mesh.edges.clear();
  mesh.triangle_edges.assign(mesh.triangles.size(), {});
  mesh.edge_triangles.clear();
  mesh.boundary_edges.clear();

  std::map<std::pair<std::size_t, std::size_t>, std::size_t> lookup;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    if (!(mesh.signed_area(t) > 0.0))
      throw std::invalid_argument("triangle " + std::to_string(t) + " is not counterclockwise");
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      const std::size_t a = tri[(k + 1) % 3];
      const std::size_t b = tri[(k + 2) % 3];
      const auto key = std::minmax(a, b);
      auto [it, inserted] = lookup.try_emplace({key.first, key.second}, mesh.edges.size());
      if (inserted) {
        mesh.edges.push_back({key.first, key.second});
        mesh.edge_triangles.push_back({t, std::nullopt});
      } else {
        auto& adj = mesh.edge_triangles[it->second];
        if (adj[1].has_value())
          throw std::invalid_argument("edge shared by more than two triangles");
        adj[1] = t;
      }
      // Walking a -> b counterclockwise, the outward normal is the walk
      // direction rotated by -90 degrees; it agrees with the global normal
      // exactly when the walk follows the global tangent.
      mesh.triangle_edges[t][k] = {it->second, a < b ? 1 : -1};
    }
  }

  for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
    if (!mesh.is_boundary_edge(e)) continue;
    const auto side = detail::side_of_segment(mesh.edge_start(e), mesh.edge_end(e));
    if (!side) throw std::invalid_argument("boundary edge " + std::to_string(e) + " is off the unit square");
    mesh.boundary_edges.emplace_back(e, *side);
  }
}

/// Uniform n x n grid on the unit square, each cell split by its
/// lower-left to upper-right diagonal.
inline Mesh build_structured_mesh(std::size_t n) {
  if (n == 0) throw std::invalid_argument("structured mesh needs n >= 1");
  Mesh mesh;
  mesh.vertices.reserve((n + 1) * (n + 1));
  for (std::size_t j = 0; j <= n; ++j)
    for (std::size_t i = 0; i <= n; ++i)
      mesh.vertices.push_back({static_cast<double>(i) / static_cast<double>(n),
                               static_cast<double>(j) / static_cast<double>(n)});
  const auto vid = [n](std::size_t i, std::size_t j) { return i + j * (n + 1); };
  mesh.triangles.reserve(2 * n * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t v0 = vid(i, j), v1 = vid(i + 1, j), v2 = vid(i + 1, j + 1), v3 = vid(i, j + 1);
      mesh.triangles.push_back({v0, v1, v2});
      mesh.triangles.push_back({v0, v2, v3});
    }
  }
  build_topology(mesh);
  return mesh;
}

/// Longest edge over all triangles.
inline double mesh_size(const Mesh& mesh) {
  double h = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) h = std::max(h, mesh.diameter(t));
  return h;
}

enum class PressureBC { pressure, flux };          // Gamma_p / Gamma_f
enum class DisplacementBC { displacement, traction };  // Gamma_d / Gamma_t

/// Per-side assignment of the two boundary partitions. Sides left unset are
/// untagged and rejected by tag_boundary.
struct BoundarySpec {
  std::array<std::optional<PressureBC>, 4> pressure{};
  std::array<std::optional<DisplacementBC>, 4> displacement{};

  static BoundarySpec whole_boundary() {
    BoundarySpec s;
    s.pressure.fill(PressureBC::pressure);
    s.displacement.fill(DisplacementBC::displacement);
    return s;
  }

  bool is_default() const {
    return std::all_of(pressure.begin(), pressure.end(),
                       [](auto p) { return p == PressureBC::pressure; }) &&
           std::all_of(displacement.begin(), displacement.end(),
                       [](auto d) { return d == DisplacementBC::displacement; });
  }
};

struct BoundaryTags {
  /// Indexed by edge; false for interior edges.
  std::vector<bool> on_gamma_p, on_gamma_f, on_gamma_d, on_gamma_t;

  std::size_t count(const std::vector<bool>& flags) const {
    return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true));
  }
};

inline BoundaryTags tag_boundary(const Mesh& mesh, const BoundarySpec& spec) {
  const std::size_t ne = mesh.num_edges();
  BoundaryTags tags{std::vector<bool>(ne), std::vector<bool>(ne), std::vector<bool>(ne),
                    std::vector<bool>(ne)};
  for (const auto& [e, side] : mesh.boundary_edges) {
    const auto s = static_cast<std::size_t>(side);
    const auto& p = spec.pressure[s];
    const auto& d = spec.displacement[s];
    if (!p || !d)
      throw std::invalid_argument(std::string("boundary side '") + side_name(side) + "' is untagged");
    (*p == PressureBC::pressure ? tags.on_gamma_p : tags.on_gamma_f)[e] = true;
    (*d == DisplacementBC::displacement ? tags.on_gamma_d : tags.on_gamma_t)[e] = true;
  }
  if (tags.count(tags.on_gamma_p) == 0) throw std::invalid_argument("Gamma_p must be nonempty");
  if (tags.count(tags.on_gamma_d) == 0) throw std::invalid_argument("Gamma_d must be nonempty");
  return tags;
}

/// Plain-text dump with VERTICES / TRIANGLES / EDGES / TAGS sections. Tags
/// list `edge p|f d|t` per boundary edge.
inline void write_mesh(std::ostream& os, const Mesh& mesh, const BoundaryTags& tags) {
  os.precision(17);
  os << "VERTICES " << mesh.num_vertices() << "\n";
  for (const auto& v : mesh.vertices) os << v.x << " " << v.y << "\n";
  os << "TRIANGLES " << mesh.num_triangles() << "\n";
  for (const auto& t : mesh.triangles) os << t[0] << " " << t[1] << " " << t[2] << "\n";
  os << "EDGES " << mesh.num_edges() << "\n";
  for (const auto& e : mesh.edges) os << e[0] << " " << e[1] << "\n";
  os << "TAGS " << mesh.boundary_edges.size() << "\n";
  for (const auto& [e, side] : mesh.boundary_edges)
    os << e << " " << (tags.on_gamma_p[e] ? 'p' : 'f') << " " << (tags.on_gamma_d[e] ? 'd' : 't') << "\n";
}

}  // namespace biot

#endif  // BIOT_MESH_HPP
