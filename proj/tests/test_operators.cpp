#include "support.hpp"

#include <random>

using namespace fsislip;
using fixtures::max_norm;
using fixtures::nodal;
using fixtures::rectangle_mesh;
using fixtures::shear_state;

namespace {

/// int phi_a f with the 7-point rule; independent of the operators' 3-point assembly.
VectorField weak_oracle(const Mesh& mesh, const std::function<Vec2(const Vec2&)>& f)
{
  VectorField out(mesh.num_nodes(), Vec2::Zero());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const P1Element e(mesh, t);
    for (const auto& qp : kTriangleRule7)
      for (int a = 0; a < 3; ++a)
        out[e.v[a]] += qp.weight * e.area * qp.bary[a] * f(e.point(qp.bary));
  }
  return out;
}

double max_diff(const VectorField& a, const VectorField& b)
{
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    m = std::max(m, (a[k] - b[k]).cwiseAbs().maxCoeff());
  return m;
}

VectorField random_field(std::size_t n, unsigned seed)
{
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  VectorField v(n);
  for (auto& x : v)
    x = Vec2(u(rng), u(rng));
  return v;
}

TransformState flow_state(const Mesh& mesh)
{
  const auto cut = CutoffProfile::for_domain(0.5, 2.0, 0.05);
  const auto field = [&](double t) { return LambdaField(Vec2(0.4, -0.3), 0.9, Vec2(0.0, 0.1) + t * Vec2(0.4, -0.3), cut); };
  auto s = TransformState::identity(mesh);
  for (int k = 0; k < 10; ++k)
    s = advance_flow_map(s, field, 0.01 * k, 0.01);
  return s;
}

/// Max lumped-projected value at interior nodes of a rectangle mesh.
double interior_max(const Mesh& mesh, const VectorField& image, const VectorField& expected)
{
  const auto p = lumped_projection(mesh, image);
  double m = 0.0;
  for (std::size_t a = 0; a < mesh.num_nodes(); ++a) {
    // two layers in from the edge the one-sided lumped patch is still symmetric
    const Vec2& y = mesh.nodes[a];
    if (std::abs(y.x()) > 0.75 || y.y() < 0.25 || y.y() > 1.75)
      continue;
    m = std::max(m, (p[a] - expected[a]).cwiseAbs().maxCoeff());
  }
  return m;
}

} // namespace

// ---------------------------------------------------------------------------
// Identity collapse
// ---------------------------------------------------------------------------

class IdentityCollapse : public ::testing::Test {
protected:
  Mesh mesh = generate_annulus_mesh(AnnulusParams{});
  TransformState id = TransformState::identity(mesh);
  VectorField u = random_field(mesh.num_nodes(), 1);
};

TEST_F(IdentityCollapse, MVanishes)
{
  EXPECT_EQ(max_norm(apply_M(mesh, u, id)), 0.0);
}

TEST_F(IdentityCollapse, NIsConvection)
{
  const auto n = apply_N(mesh, u, id);
  EXPECT_LE(max_diff(n, apply_convection(mesh, u)), 1e-12 * max_norm(n));
}

TEST_F(IdentityCollapse, GIsGradient)
{
  ScalarField p(mesh.num_nodes());
  for (std::size_t a = 0; a < p.size(); ++a)
    p[a] = std::sin(mesh.nodes[a].x()) * mesh.nodes[a].y();
  const auto g = apply_G(mesh, p, id);
  EXPECT_LE(max_diff(g, apply_gradient(mesh, p)), 1e-12 * max_norm(g));
}

TEST_F(IdentityCollapse, LIsDirichletForm)
{
  VectorField v = u;
  for (std::size_t a = 0; a < v.size(); ++a)
    if (mesh.node_kind[a] != NodeKind::Interior)
      v[a] = Vec2::Zero();
  const auto l = apply_L(mesh, v, id);
  EXPECT_LE(max_diff(l, apply_laplacian(mesh, v)), 1e-12 * max_norm(l));
  double dirichlet = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Vec2 &p0 = mesh.nodes[tri[0]], &p1 = mesh.nodes[tri[1]], &p2 = mesh.nodes[tri[2]];
    Mat2 dy, du;
    dy << p1 - p0, p2 - p0;
    du << v[tri[1]] - v[tri[0]], v[tri[2]] - v[tri[0]];
    const Mat2 grad = du * dy.inverse();
    dirichlet += 0.5 * std::abs(dy.determinant()) * grad.squaredNorm();
  }
  EXPECT_NEAR(weak_pairing(v, l), -dirichlet, 1e-12 * dirichlet);
}

TEST_F(IdentityCollapse, ConstantFieldsGiveZero)
{
  const VectorField c(mesh.num_nodes(), Vec2(0.3, -1.2));
  EXPECT_LT(max_norm(apply_L(mesh, c, id)), 1e-13);
  EXPECT_LT(max_norm(apply_N(mesh, c, id)), 1e-13);
  EXPECT_LT(max_norm(apply_G(mesh, ScalarField(mesh.num_nodes(), 4.0), id)), 1e-13);
}

TEST_F(IdentityCollapse, MWithConstantYdotIsAdvection)
{
  TransformState s = id;
  const Vec2 c(0.7, -0.4);
  for (auto& n : s.nodes)
    n.Y_dot = c;
  const auto m = apply_M(mesh, u, s);
  EXPECT_LE(max_diff(m, apply_advection(mesh, u, c)), 1e-12 * max_norm(m));
}

// ---------------------------------------------------------------------------
// Shear map X = (y1 + a y2^2, y2), a = 0.1, da/dt = 0.5
// ---------------------------------------------------------------------------

TEST(ShearMap, MOfConstantVerticalField)
{
  // Ydot = (-adot y2^2, 0), J_Y grad Xdot = [[0, 2 adot y2], [0, 0]] so M (0, 1) = (2 adot y2, 0)
  const Mesh mesh = rectangle_mesh(-1.0, 1.0, 0.0, 2.0, 8, 8);
  const auto s = shear_state(mesh, 0.1, 0.5);
  const auto m = apply_M(mesh, VectorField(mesh.num_nodes(), Vec2(0.0, 1.0)), s);
  const auto oracle = weak_oracle(mesh, [](const Vec2& y) { return Vec2(y.y(), 0.0); });
  EXPECT_LE(max_diff(m, oracle), 1e-10 * max_norm(oracle));
}

TEST(ShearMap, MOfHorizontalShearFlowVanishes)
{
  const Mesh mesh = rectangle_mesh(-1.0, 1.0, 0.0, 2.0, 8, 8);
  const auto s = shear_state(mesh, 0.1, 0.5);
  const auto m = apply_M(mesh, nodal(mesh, [](const Vec2& y) { return Vec2(y.y(), 0.0); }), s);
  EXPECT_LT(max_norm(m), 1e-15);
}

TEST(ShearMap, NOfConstantFields)
{
  const Mesh mesh = rectangle_mesh(-1.0, 1.0, 0.0, 2.0, 8, 8);
  const auto s = shear_state(mesh, 0.1);
  EXPECT_LT(max_norm(apply_N(mesh, VectorField(mesh.num_nodes(), Vec2(1.0, 0.0)), s)), 1e-15);
  const auto n = lumped_projection(mesh, apply_N(mesh, VectorField(mesh.num_nodes(), Vec2(0.0, 1.0)), s));
  for (const auto& v : n) {
    EXPECT_NEAR(v.x(), 0.2, 1e-13);
    EXPECT_NEAR(v.y(), 0.0, 1e-15);
  }
}

TEST(ShearMap, GOfFirstCoordinate)
{
  const Mesh mesh = rectangle_mesh(-1.0, 1.0, 0.0, 2.0, 20, 20);
  const auto s = shear_state(mesh, 0.1);
  ScalarField p(mesh.num_nodes());
  for (std::size_t a = 0; a < p.size(); ++a)
    p[a] = mesh.nodes[a].x();
  const auto g = apply_G(mesh, p, s);
  // g^21 = -2 a y2 is linear, so its weak image is exact
  const auto oracle = weak_oracle(mesh, [](const Vec2& y) { return Vec2(0.0, -0.2 * y.y()); });
  for (std::size_t a = 0; a < g.size(); ++a)
    EXPECT_NEAR(g[a].y(), oracle[a].y(), 1e-14);
  // g^11 = 1 + 4 a^2 y2^2 is interpolated; the lumped hat average of y2^2 is y2^2 + h^2 / 3
  const double h = 0.1;
  const auto proj = lumped_projection(mesh, g);
  for (std::size_t a = 0; a < mesh.num_nodes(); ++a) {
    const Vec2& y = mesh.nodes[a];
    if (std::abs(y.y() - 1.0) < 1e-12 && std::abs(y.x()) < 0.5) {
      EXPECT_NEAR(proj[a].x(), 1.04 + 0.04 * h * h / 3.0, 1e-12);
      EXPECT_NEAR(proj[a].y(), -0.2, 1e-12);
    }
  }
}

TEST(ShearMap, LAnnihilatesPulledBackHarmonicField)
{
  // u(x) = (x1, -x2) is harmonic, so L(J_Y u o X) = J_Y (Laplacian u) o X = 0,
  // while the classical Laplacian of the reference field is (6 a, 0)
  for (std::size_t n : {8u, 16u, 32u}) {
    const Mesh mesh = rectangle_mesh(-1.0, 1.0, 0.0, 2.0, n, n);
    const auto s = shear_state(mesh, 0.1);
    VectorField ut(mesh.num_nodes());
    for (std::size_t a = 0; a < ut.size(); ++a)
      ut[a] = s.nodes[a].J_Y * Vec2(s.nodes[a].X.x(), -s.nodes[a].X.y());
    const VectorField zero(mesh.num_nodes(), Vec2::Zero());
    const VectorField six_a(mesh.num_nodes(), Vec2(0.6, 0.0));
    EXPECT_LT(interior_max(mesh, apply_laplacian(mesh, ut), six_a), 1e-10);
    EXPECT_LT(interior_max(mesh, apply_L(mesh, ut, s), zero), 1e-10) << "n = " << n;
  }
}

TEST(ShearMap, LMatchesTransformedLaplacian)
{
  // u(x) = (0, x1^2): Laplacian u = (0, 2), so L u~ = J_Y (0, 2) = (-4 a y2, 2)
  double prev = 0.0;
  for (std::size_t n : {8u, 16u, 32u}) {
    const Mesh mesh = rectangle_mesh(-1.0, 1.0, 0.0, 2.0, n, n);
    const auto s = shear_state(mesh, 0.1);
    VectorField ut(mesh.num_nodes()), expected(mesh.num_nodes());
    for (std::size_t a = 0; a < ut.size(); ++a) {
      const double x1 = s.nodes[a].X.x();
      ut[a] = s.nodes[a].J_Y * Vec2(0.0, x1 * x1);
      expected[a] = s.nodes[a].J_Y * Vec2(0.0, 2.0);
    }
    const double err = interior_max(mesh, apply_L(mesh, ut, s), expected);
    if (prev > 0.0) {
      EXPECT_LT(err, 0.6 * prev) << "n = " << n;
    }
    prev = err;
  }
  EXPECT_LT(prev, 0.02);
}

// ---------------------------------------------------------------------------
// Algebraic properties on a general transform
// ---------------------------------------------------------------------------

class GeneralTransform : public ::testing::Test {
protected:
  Mesh mesh = generate_annulus_mesh(0.5, 2.0, 12, 48, Vec2(0.0, 0.1));
  TransformState s = flow_state(mesh);
  VectorField u = random_field(mesh.num_nodes(), 2);
  VectorField v = random_field(mesh.num_nodes(), 3);
};

TEST_F(GeneralTransform, TransformIsNontrivial)
{
  double gamma = 0.0;
  for (const auto& n : s.nodes)
    gamma = std::max(gamma, n.gamma[0].cwiseAbs().maxCoeff());
  EXPECT_GT(gamma, 1e-3);
}

TEST_F(GeneralTransform, LinearOperatorsSuperpose)
{
  const double alpha = 1.7, beta = -0.6;
  VectorField w(u.size());
  for (std::size_t a = 0; a < u.size(); ++a)
    w[a] = alpha * u[a] + beta * v[a];
  for (const auto& op : {std::function<VectorField(const VectorField&)>(
                             [&](const VectorField& f) { return apply_M(mesh, f, s); }),
                         std::function<VectorField(const VectorField&)>(
                             [&](const VectorField& f) { return apply_L(mesh, f, s); })}) {
    const auto lw = op(w), lu = op(u), lv = op(v);
    VectorField comb(u.size());
    for (std::size_t a = 0; a < u.size(); ++a)
      comb[a] = alpha * lu[a] + beta * lv[a];
    EXPECT_LE(max_diff(lw, comb), 1e-12 * max_norm(lw));
  }
  ScalarField p(u.size()), q(u.size()), r(u.size());
  for (std::size_t a = 0; a < u.size(); ++a) {
    p[a] = u[a].x();
    q[a] = v[a].y();
    r[a] = alpha * p[a] + beta * q[a];
  }
  const auto gr = apply_G(mesh, r, s), gp = apply_G(mesh, p, s), gq = apply_G(mesh, q, s);
  VectorField comb(u.size());
  for (std::size_t a = 0; a < u.size(); ++a)
    comb[a] = alpha * gp[a] + beta * gq[a];
  EXPECT_LE(max_diff(gr, comb), 1e-12 * max_norm(gr));
}

TEST_F(GeneralTransform, NIsQuadratic)
{
  const double alpha = -2.3;
  VectorField au(u.size());
  for (std::size_t a = 0; a < u.size(); ++a)
    au[a] = alpha * u[a];
  const auto n1 = apply_N(mesh, u, s), n2 = apply_N(mesh, au, s);
  VectorField scaled(u.size());
  for (std::size_t a = 0; a < u.size(); ++a)
    scaled[a] = alpha * alpha * n1[a];
  EXPECT_LE(max_diff(n2, scaled), 1e-12 * max_norm(n2));
  // both parts separately
  const auto c1 = apply_convection(mesh, u), c2 = apply_convection(mesh, au);
  VectorField g1(u.size()), g2(u.size()), gs(u.size()), cs(u.size());
  for (std::size_t a = 0; a < u.size(); ++a) {
    g1[a] = n1[a] - c1[a];
    g2[a] = n2[a] - c2[a];
    gs[a] = alpha * alpha * g1[a];
    cs[a] = alpha * alpha * c1[a];
  }
  EXPECT_LE(max_diff(g2, gs), 1e-12 * max_norm(n2));
  EXPECT_LE(max_diff(c2, cs), 1e-12 * max_norm(n2));
}

TEST_F(GeneralTransform, SizeMismatchIsParameterError)
{
  const VectorField short_field(3, Vec2::Zero());
  EXPECT_THROW(apply_M(mesh, short_field, s), ParameterError);
  EXPECT_THROW(apply_L(mesh, short_field, s), ParameterError);
  EXPECT_THROW(apply_N(mesh, short_field, s), ParameterError);
  EXPECT_THROW(apply_G(mesh, ScalarField(3, 0.0), s), ParameterError);
}
