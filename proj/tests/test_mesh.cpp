#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "biot/mesh.hpp"

using namespace biot;

namespace {

BoundarySpec spec_with(std::optional<PressureBC> top_p, std::optional<DisplacementBC> top_d) {
  auto s = BoundarySpec::whole_boundary();
  s.pressure[static_cast<int>(Side::top)] = top_p;
  s.displacement[static_cast<int>(Side::top)] = top_d;
  return s;
}

}  // namespace

TEST(StructuredMesh, SingleCellCounts) {
  const auto m = build_structured_mesh(1);
  EXPECT_EQ(m.num_vertices(), 4u);
  EXPECT_EQ(m.num_triangles(), 2u);
  EXPECT_EQ(m.num_edges(), 5u);
  for (std::size_t t = 0; t < 2; ++t) EXPECT_DOUBLE_EQ(m.area(t), 0.5);
}

TEST(StructuredMesh, FourByFourCounts) {
  const auto m = build_structured_mesh(4);
  EXPECT_EQ(m.num_vertices(), 25u);
  EXPECT_EQ(m.num_triangles(), 32u);
  EXPECT_EQ(m.num_edges(), 56u);
}

TEST(StructuredMesh, CountsAndEulerRelationUpTo16) {
  for (std::size_t n = 1; n <= 16; ++n) {
    const auto m = build_structured_mesh(n);
    const long V = static_cast<long>(m.num_vertices()), E = static_cast<long>(m.num_edges()),
               F = static_cast<long>(m.num_triangles());
    EXPECT_EQ(V, static_cast<long>((n + 1) * (n + 1)));
    EXPECT_EQ(F, static_cast<long>(2 * n * n));
    EXPECT_EQ(E, static_cast<long>(3 * n * n + 2 * n));
    EXPECT_EQ(V - E + (F + 1), 2) << "n=" << n;
    EXPECT_EQ(m.boundary_edges.size(), 4 * n);
  }
}

TEST(StructuredMesh, ZeroRejected) { EXPECT_THROW(build_structured_mesh(0), std::invalid_argument); }

TEST(StructuredMesh, TopologyInvariants) {
  for (std::size_t n : {1u, 2u, 3u, 8u}) {
    const auto m = build_structured_mesh(n);
    for (std::size_t t = 0; t < m.num_triangles(); ++t) EXPECT_GT(m.signed_area(t), 0.0);
    std::vector<int> uses(m.num_edges(), 0);
    for (std::size_t t = 0; t < m.num_triangles(); ++t)
      for (const auto& le : m.triangle_edges[t]) ++uses[le.edge];
    for (std::size_t e = 0; e < m.num_edges(); ++e) {
      EXPECT_LT(m.edges[e][0], m.edges[e][1]);
      EXPECT_EQ(uses[e], m.is_boundary_edge(e) ? 1 : 2);
      // normal = tangent rotated by -90 degrees
      const Point tg = m.edge_tangent(e), nr = m.edge_normal(e);
      EXPECT_NEAR(nr.x, tg.y, 1e-15);
      EXPECT_NEAR(nr.y, -tg.x, 1e-15);
      EXPECT_NEAR(norm(tg), 1.0, 1e-15);
    }
  }
}

TEST(StructuredMesh, InducedNormalsOpposeAcrossInteriorEdges) {
  const auto m = build_structured_mesh(5);
  for (std::size_t e = 0; e < m.num_edges(); ++e) {
    if (m.is_boundary_edge(e)) continue;
    int signs = 0;
    // Independent outward normal: points from the triangle centroid across the edge.
    for (auto t : {*m.edge_triangles[e][0], *m.edge_triangles[e][1]}) {
      int sign = 0;
      for (const auto& le : m.triangle_edges[t])
        if (le.edge == e) sign = le.sign;
      const Point out = m.edge_midpoint(e) - m.centroid(t);
      const double dir = dot(out, m.edge_normal(e)) > 0 ? 1 : -1;
      EXPECT_EQ(sign, dir);
      signs += sign;
    }
    EXPECT_EQ(signs, 0);
  }
}

TEST(StructuredMesh, BoundaryNormalsPointOutward) {
  const auto m = build_structured_mesh(3);
  for (const auto& [e, side] : m.boundary_edges) {
    const auto t = *m.edge_triangles[e][0];
    int sign = 0;
    for (const auto& le : m.triangle_edges[t])
      if (le.edge == e) sign = le.sign;
    const Point n = m.edge_normal(e);
    const Point outward = side == Side::bottom  ? Point{0, -1}
                          : side == Side::right ? Point{1, 0}
                          : side == Side::top   ? Point{0, 1}
                                                : Point{-1, 0};
    EXPECT_NEAR(sign * dot(n, outward), 1.0, 1e-15);
  }
}

TEST(MeshSize, Examples) {
  EXPECT_DOUBLE_EQ(mesh_size(build_structured_mesh(1)), std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(mesh_size(build_structured_mesh(4)), std::sqrt(2.0) / 4.0);
  EXPECT_DOUBLE_EQ(mesh_size(build_structured_mesh(3)), std::sqrt(2.0) / 3.0);
}

TEST(MeshSize, RefinementHalvesExactly) {
  for (std::size_t n : {1u, 2u, 4u, 8u}) EXPECT_EQ(mesh_size(build_structured_mesh(2 * n)), mesh_size(build_structured_mesh(n)) / 2);
}

TEST(BuildTopology, RejectsClockwiseTriangle) {
  Mesh m;
  m.vertices = {{0, 0}, {1, 0}, {0, 1}};
  m.triangles = {{0, 2, 1}};
  EXPECT_THROW(build_topology(m), std::invalid_argument);
}

TEST(TagBoundary, DefaultSpecOnSingleCell) {
  const auto m = build_structured_mesh(1);
  const auto tags = tag_boundary(m, BoundarySpec::whole_boundary());
  EXPECT_EQ(tags.count(tags.on_gamma_d), 4u);
  EXPECT_EQ(tags.count(tags.on_gamma_p), 4u);
  EXPECT_EQ(tags.count(tags.on_gamma_t), 0u);
  EXPECT_EQ(tags.count(tags.on_gamma_f), 0u);
  EXPECT_TRUE(BoundarySpec::whole_boundary().is_default());
}

TEST(TagBoundary, FluxOnTopSide) {
  const auto m = build_structured_mesh(2);
  const auto tags = tag_boundary(m, spec_with(PressureBC::flux, DisplacementBC::displacement));
  EXPECT_EQ(tags.count(tags.on_gamma_f), 2u);
  EXPECT_EQ(tags.count(tags.on_gamma_p), 6u);
  for (std::size_t e = 0; e < m.num_edges(); ++e) {
    if (m.is_boundary_edge(e)) {
      EXPECT_NE(tags.on_gamma_p[e], tags.on_gamma_f[e]);
      EXPECT_NE(tags.on_gamma_d[e], tags.on_gamma_t[e]);
    } else {
      EXPECT_FALSE(tags.on_gamma_p[e] || tags.on_gamma_f[e] || tags.on_gamma_d[e] || tags.on_gamma_t[e]);
    }
    if (tags.on_gamma_f[e]) {
      EXPECT_DOUBLE_EQ(m.edge_start(e).y, 1.0);
      EXPECT_DOUBLE_EQ(m.edge_end(e).y, 1.0);
    }
  }
}

TEST(TagBoundary, EmptyDisplacementPartRejected) {
  BoundarySpec s;
  s.pressure.fill(PressureBC::pressure);
  s.displacement.fill(DisplacementBC::traction);
  EXPECT_THROW(tag_boundary(build_structured_mesh(2), s), std::invalid_argument);
}

TEST(TagBoundary, EmptyPressurePartRejected) {
  BoundarySpec s;
  s.pressure.fill(PressureBC::flux);
  s.displacement.fill(DisplacementBC::displacement);
  EXPECT_THROW(tag_boundary(build_structured_mesh(2), s), std::invalid_argument);
}

TEST(TagBoundary, UntaggedSideRejected) {
  EXPECT_THROW(tag_boundary(build_structured_mesh(2), spec_with(std::nullopt, DisplacementBC::displacement)),
               std::invalid_argument);
  EXPECT_THROW(tag_boundary(build_structured_mesh(2), spec_with(PressureBC::pressure, std::nullopt)),
               std::invalid_argument);
}

TEST(WriteMesh, Sections) {
  const auto m = build_structured_mesh(1);
  std::ostringstream os;
  write_mesh(os, m, tag_boundary(m, BoundarySpec::whole_boundary()));
  const auto s = os.str();
  EXPECT_NE(s.find("VERTICES 4\n"), std::string::npos);
  EXPECT_NE(s.find("TRIANGLES 2\n0 1 3\n0 3 2\n"), std::string::npos);
  EXPECT_NE(s.find("EDGES 5\n"), std::string::npos);
  EXPECT_NE(s.find("TAGS 4\n"), std::string::npos);
}
