#include "support.hpp"

using namespace fsislip;

namespace {

bool has_node(const Mesh& m, const Vec2& p)
{
  for (const auto& y : m.nodes)
    if ((y - p).norm() < 1e-14)
      return true;
  return false;
}

std::size_t edge_near(const Mesh& m, const Vec2& p)
{
  std::size_t best = 0;
  double dist = 1e300;
  for (std::size_t e = 0; e < m.boundary_edges.size(); ++e) {
    const auto& n = m.boundary_edges[e].nodes;
    const double d = (0.5 * (m.nodes[n[0]] + m.nodes[n[1]]) - p).norm();
    if (d < dist) {
      dist = d;
      best = e;
    }
  }
  return best;
}

} // namespace

TEST(Geometry, SmallAnnulusCounts)
{
  const Mesh m = generate_annulus_mesh(0.5, 2.0, 4, 16, Vec2::Zero());
  EXPECT_EQ(m.num_nodes(), 80u);
  EXPECT_EQ(m.num_triangles(), 128u);
  EXPECT_EQ(m.boundary_edges.size(), 32u);
}

TEST(Geometry, SeamNodesOnBothCircles)
{
  const Mesh m = generate_annulus_mesh(0.5, 2.0, 4, 16, Vec2::Zero());
  EXPECT_TRUE(has_node(m, Vec2(0.5, 0.0)));
  EXPECT_TRUE(has_node(m, Vec2(2.0, 0.0)));
}

TEST(Geometry, RejectsBodyLargerThanContainer)
{
  try {
    generate_annulus_mesh(2.0, 0.5, 4, 16, Vec2::Zero());
    FAIL() << "expected a parameter error";
  } catch (const ParameterError& e) {
    EXPECT_EQ(e.field(), "r_body");
    EXPECT_NE(std::string(e.what()).find("r_body >= R_outer"), std::string::npos);
  }
}

TEST(Geometry, RejectsBadCountsAndPlacement)
{
  EXPECT_THROW(generate_annulus_mesh(0.5, 2.0, 1, 16, Vec2::Zero()), ParameterError);
  EXPECT_THROW(generate_annulus_mesh(0.5, 2.0, 4, 7, Vec2::Zero()), ParameterError);
  EXPECT_THROW(generate_annulus_mesh(0.5, 2.0, 4, 16, Vec2(0.0, -1.6)), ParameterError);
}

TEST(Geometry, BoundaryNormalsFollowOrientation)
{
  const Mesh m = generate_annulus_mesh(0.5, 2.0, 4, 16, Vec2::Zero());
  const double h = 0.2; // facet normals of a 16-gon deviate by pi/16 at most
  EXPECT_LT((boundary_normal(m, edge_near(m, Vec2(0.5, 0.0))) - Vec2(-1.0, 0.0)).norm(), h);
  EXPECT_LT((boundary_normal(m, edge_near(m, Vec2(2.0, 0.0))) - Vec2(1.0, 0.0)).norm(), h);
  EXPECT_LT((boundary_normal(m, edge_near(m, Vec2(0.0, 0.5))) - Vec2(0.0, -1.0)).norm(), h);
}

TEST(Geometry, InteriorEdgeIsIndexError)
{
  const Mesh m = generate_annulus_mesh(0.5, 2.0, 4, 16, Vec2::Zero());
  EXPECT_THROW(boundary_normal(m, m.boundary_edges.size()), IndexError);
  // ring 1 to ring 2 along a ray is interior
  EXPECT_THROW(boundary_normal(m, 16, 32), IndexError);
}

TEST(Geometry, FreshMeshValidates)
{
  EXPECT_TRUE(validate_mesh(generate_annulus_mesh(0.5, 2.0, 4, 16, Vec2::Zero())).empty());
  EXPECT_TRUE(validate_mesh(generate_annulus_mesh(AnnulusParams{})).empty());
  EXPECT_TRUE(validate_mesh(generate_annulus_mesh(0.5, 2.0, 16, 64, Vec2(0.3, -1.1))).empty());
}

TEST(Geometry, SwappedTriangleIsReported)
{
  Mesh m = generate_annulus_mesh(0.5, 2.0, 4, 16, Vec2::Zero());
  std::swap(m.triangles[7][1], m.triangles[7][2]);
  const auto rep = validate_mesh(m);
  ASSERT_EQ(rep.size(), 1u);
  EXPECT_EQ(rep[0].invariant, "positive-area");
  EXPECT_EQ(rep[0].entity, "triangle");
  EXPECT_EQ(rep[0].index, 7u);
}

TEST(Geometry, ScaledNormalIsReported)
{
  Mesh m = generate_annulus_mesh(0.5, 2.0, 4, 16, Vec2::Zero());
  m.edge_normals[5] *= 2.0;
  const auto rep = validate_mesh(m);
  ASSERT_EQ(rep.size(), 1u);
  EXPECT_EQ(rep[0].invariant, "unit-normal");
  EXPECT_EQ(rep[0].entity, "edge");
  EXPECT_EQ(rep[0].index, 5u);
}

TEST(Geometry, FlippedNormalIsReported)
{
  Mesh m = generate_annulus_mesh(0.5, 2.0, 4, 16, Vec2::Zero());
  m.edge_normals[20] = -m.edge_normals[20];
  const auto rep = validate_mesh(m);
  ASSERT_EQ(rep.size(), 1u);
  EXPECT_EQ(rep[0].invariant, "normal-orientation");
  EXPECT_EQ(rep[0].index, 20u);
}

TEST(Geometry, AreaMatchesInscribedPolygons)
{
  for (std::size_t n : {16u, 32u}) {
    const Mesh m = generate_annulus_mesh(0.5, 2.0, n, 4 * n, Vec2::Zero());
    double area = 0.0;
    for (std::size_t t = 0; t < m.num_triangles(); ++t)
      area += m.signed_area(t);
    const double k = static_cast<double>(4 * n);
    const double polygon = 0.5 * k * std::sin(2.0 * std::numbers::pi / k) * (4.0 - 0.25);
    EXPECT_NEAR(area, polygon, 1e-12 * polygon) << "n = " << n;
  }
}

TEST(Geometry, AreaApproachesAnnulus)
{
  // the inscribed k-gon loses about (2 pi / k)^2 / 6 of the disk area
  const Mesh m = generate_annulus_mesh(0.5, 2.0, 16, 128, Vec2::Zero());
  double area = 0.0;
  for (std::size_t t = 0; t < m.num_triangles(); ++t)
    area += m.signed_area(t);
  const double exact = std::numbers::pi * (4.0 - 0.25);
  EXPECT_LT(std::abs(area - exact) / exact, 1e-3);
}

TEST(Geometry, NodeNormalsConvergeQuadratically)
{
  double prev = 0.0;
  for (std::size_t na : {32u, 64u, 128u}) {
    const Mesh m = generate_annulus_mesh(0.5, 2.0, 8, na, Vec2(0.2, 0.1));
    double worst = 0.0;
    for (std::size_t a = 0; a < m.num_nodes(); ++a) {
      if (m.node_kind[a] == NodeKind::BodyInterface)
        worst = std::max(worst, (m.node_normals[a] - m.body_normal_at(m.nodes[a])).norm());
      else if (m.node_kind[a] == NodeKind::OuterWall)
        worst = std::max(worst, (m.node_normals[a] - m.nodes[a].normalized()).norm());
    }
    if (prev > 0.0) {
      EXPECT_GT(prev / worst, 3.0) << "n_angular = " << na;
    }
    prev = worst;
  }
}

TEST(Geometry, GradingThickensTowardWall)
{
  const Mesh m = generate_annulus_mesh(0.5, 2.0, 6, 16, Vec2::Zero());
  // ray j = 0 runs along +x
  for (std::size_t i = 1; i < 6; ++i) {
    const double inner = m.nodes[i * 16].x() - m.nodes[(i - 1) * 16].x();
    const double outer = m.nodes[(i + 1) * 16].x() - m.nodes[i * 16].x();
    EXPECT_NEAR(inner / outer, 0.8, 1e-12);
  }
}

TEST(Geometry, MirrorSymmetricTriangulation)
{
  const Mesh m = generate_annulus_mesh(0.5, 2.0, 6, 32, Vec2(0.0, -0.4));
  // every node has a mirror image about x = 0
  for (const auto& p : m.nodes) {
    EXPECT_TRUE(has_node(m, Vec2(-p.x(), p.y())) || std::abs(p.x()) < 1e-15);
  }
}

TEST(Geometry, LocatorReproducesLinearFields)
{
  const Mesh from = generate_annulus_mesh(0.5, 2.0, 8, 32, Vec2(0.0, -0.3));
  const Mesh to = generate_annulus_mesh(0.5, 2.0, 8, 32, Vec2(0.01, -0.32));
  std::vector<double> f(from.num_nodes());
  for (std::size_t a = 0; a < f.size(); ++a)
    f[a] = 1.5 + 2.0 * from.nodes[a].x() - 0.7 * from.nodes[a].y();
  const auto g = transfer_nodal(from, to, f);
  const PointLocator loc(from);
  for (std::size_t a = 0; a < to.num_nodes(); ++a) {
    if (!loc.locate(to.nodes[a], a).inside)
      continue; // clamped onto the polygon, linear reproduction does not apply
    EXPECT_NEAR(g[a], 1.5 + 2.0 * to.nodes[a].x() - 0.7 * to.nodes[a].y(), 1e-12);
  }
}

TEST(Geometry, TransferIdentityOnSameMesh)
{
  const Mesh m = generate_annulus_mesh(0.5, 2.0, 6, 16, Vec2::Zero());
  std::vector<Vec2> v(m.num_nodes());
  for (std::size_t a = 0; a < v.size(); ++a)
    v[a] = Vec2(std::sin(3.0 * m.nodes[a].x()), std::cos(m.nodes[a].y()));
  const auto w = transfer_nodal(m, m, v);
  for (std::size_t a = 0; a < v.size(); ++a)
    EXPECT_LT((w[a] - v[a]).norm(), 1e-14);
}

TEST(Geometry, LocatorClampsOutsidePoints)
{
  const Mesh m = generate_annulus_mesh(0.5, 2.0, 4, 16, Vec2::Zero());
  const PointLocator loc(m);
  const auto hit = loc.locate(Vec2(2.5, 0.0), 0);
  EXPECT_FALSE(hit.inside);
  const auto& tri = m.triangles[hit.triangle];
  const Vec2 p = hit.bary[0] * m.nodes[tri[0]] + hit.bary[1] * m.nodes[tri[1]] + hit.bary[2] * m.nodes[tri[2]];
  EXPECT_NEAR(p.x(), 2.0, 1e-12);
  EXPECT_NEAR(p.y(), 0.0, 1e-12);
}
