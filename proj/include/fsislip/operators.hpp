#pragma once

// Transformed operators M, L, N, G on P1 nodal fields.
//
// Every apply_* returns a weak image: entry a is the integral of the operator
// result against the hat function of node a. Transform coefficients are
// interpolated linearly from their nodal values at each quadrature point.

#include "fsislip/quadrature.hpp"
#include "fsislip/transform.hpp"

namespace fsislip {

using VectorField = std::vector<Vec2>;
using ScalarField = std::vector<double>;

namespace detail {

struct QuadCoeffs {
  Vec2 y_dot = Vec2::Zero();
  Mat2 j_y = Mat2::Zero();
  Mat2 grad_x_dot = Mat2::Zero();
  Mat2 g_con = Mat2::Zero();
  Tensor3 gamma = zero_tensor3();
};

inline QuadCoeffs interpolate_coeffs(const TransformState& s, const P1Element& e,
                                     const std::array<double, 3>& b)
{
  QuadCoeffs c;
  for (int a = 0; a < 3; ++a) {
    const auto& n = s.nodes[e.v[a]];
    c.y_dot += b[a] * n.Y_dot;
    c.j_y += b[a] * n.J_Y;
    c.grad_x_dot += b[a] * n.grad_X_dot;
    c.g_con += b[a] * n.g_con;
    for (int k = 0; k < 2; ++k)
      c.gamma[k] += b[a] * n.gamma[k];
  }
  return c;
}

inline void check_sizes(const Mesh& mesh, std::size_t field, const TransformState* s = nullptr)
{
  if (field != mesh.num_nodes())
    throw ParameterError("field", "field length does not match the mesh node count");
  if (s && s->nodes.size() != mesh.num_nodes())
    throw ParameterError("state", "transform state does not match the mesh node count");
}

/// Accumulate w * area * phi_a(b) * value into out[a].
inline void scatter(VectorField& out, const P1Element& e, const std::array<double, 3>& b, double w,
                    const Vec2& value)
{
  for (int a = 0; a < 3; ++a)
    out[e.v[a]] += (w * e.area * b[a]) * value;
}

/// Gamma-part of the convection: sum_jk Gamma^i_jk u_j u_k.
inline Vec2 gamma_uu(const Tensor3& gamma, const Vec2& u)
{
  return {u.dot(gamma[0] * u), u.dot(gamma[1] * u)};
}

} // namespace detail

/// (Mu)_i = Ydot_j d_j u_i + (Gamma^i_jk Ydot_k + (J_Y grad Xdot)_ij) u_j.
inline VectorField apply_M(const Mesh& mesh, const VectorField& u, const TransformState& s)
{
  detail::check_sizes(mesh, u.size(), &s);
  VectorField out(mesh.num_nodes(), Vec2::Zero());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const P1Element e(mesh, t);
    const Mat2 gu = e.vector_gradient(u);
    for (const auto& qp : kTriangleRule3) {
      const auto c = detail::interpolate_coeffs(s, e, qp.bary);
      const Vec2 uq = e.interpolate<Vec2>(u, qp.bary);
      Mat2 coef = c.j_y * c.grad_x_dot;
      for (int i = 0; i < 2; ++i)
        coef.row(i) += (c.gamma[i] * c.y_dot).transpose();
      detail::scatter(out, e, qp.bary, qp.weight, gu * c.y_dot + coef * uq);
    }
  }
  return out;
}

/// Weak transformed Laplacian: -int g^jk d_k u_i d_j phi plus the lower-order
/// terms integrated against phi. No boundary term is added; g = I near both
/// boundaries.
inline VectorField apply_L(const Mesh& mesh, const VectorField& u, const TransformState& s)
{
  detail::check_sizes(mesh, u.size(), &s);
  const std::size_t n = mesh.num_nodes();
  // P[k](i, j) = sum_l g^kl Gamma^i_jl, whose divergence in k enters the zero-order term.
  std::vector<Tensor3> p(n);
  for (std::size_t a = 0; a < n; ++a) {
    const auto& nd = s.nodes[a];
    for (int k = 0; k < 2; ++k)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          p[a][k](i, j) = nd.g_con(k, 0) * nd.gamma[i](j, 0) + nd.g_con(k, 1) * nd.gamma[i](j, 1);
  }

  VectorField out(n, Vec2::Zero());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const P1Element e(mesh, t);
    const Mat2 gu = e.vector_gradient(u);
    Mat2 div_p = Mat2::Zero();
    for (int a = 0; a < 3; ++a)
      div_p += e.grad[a](0) * p[e.v[a]][0] + e.grad[a](1) * p[e.v[a]][1];

    for (const auto& qp : kTriangleRule3) {
      const auto c = detail::interpolate_coeffs(s, e, qp.bary);
      const Vec2 uq = e.interpolate<Vec2>(u, qp.bary);
      const double wa = qp.weight * e.area;

      const Mat2 flux = gu * c.g_con; // (i, j) = sum_k g^jk d_k u_i
      for (int a = 0; a < 3; ++a)
        out[e.v[a]] -= wa * flux * e.grad[a];

      Vec2 lo = Vec2::Zero();
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          double first = 0.0, zero = div_p(i, j);
          for (int k = 0; k < 2; ++k)
            for (int l = 0; l < 2; ++l) {
              first += c.g_con(k, l) * c.gamma[i](j, k) * gu(j, l);
              for (int m = 0; m < 2; ++m)
                zero += c.g_con(k, l) * c.gamma[m](j, l) * c.gamma[i](k, m);
            }
          lo(i) += 2.0 * first + zero * uq(j);
        }
      detail::scatter(out, e, qp.bary, qp.weight, lo);
    }
  }
  return out;
}

/// (Nu)_i = u_j d_j u_i + Gamma^i_jk u_j u_k.
inline VectorField apply_N(const Mesh& mesh, const VectorField& u, const TransformState& s)
{
  detail::check_sizes(mesh, u.size(), &s);
  VectorField out(mesh.num_nodes(), Vec2::Zero());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const P1Element e(mesh, t);
    const Mat2 gu = e.vector_gradient(u);
    for (const auto& qp : kTriangleRule3) {
      const auto c = detail::interpolate_coeffs(s, e, qp.bary);
      const Vec2 uq = e.interpolate<Vec2>(u, qp.bary);
      detail::scatter(out, e, qp.bary, qp.weight, gu * uq + detail::gamma_uu(c.gamma, uq));
    }
  }
  return out;
}

/// (Gp)_i = g^ij d_j p.
inline VectorField apply_G(const Mesh& mesh, const ScalarField& p, const TransformState& s)
{
  detail::check_sizes(mesh, p.size(), &s);
  VectorField out(mesh.num_nodes(), Vec2::Zero());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const P1Element e(mesh, t);
    const Vec2 gp = e.scalar_gradient(p);
    for (const auto& qp : kTriangleRule3) {
      const auto c = detail::interpolate_coeffs(s, e, qp.bary);
      detail::scatter(out, e, qp.bary, qp.weight, c.g_con * gp);
    }
  }
  return out;
}

// -----------------------------------------------------------------------------
// Classical counterparts on the same quadrature
// -----------------------------------------------------------------------------

/// Weak Laplacian: -int grad u_i . grad phi.
inline VectorField apply_laplacian(const Mesh& mesh, const VectorField& u)
{
  detail::check_sizes(mesh, u.size());
  VectorField out(mesh.num_nodes(), Vec2::Zero());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const P1Element e(mesh, t);
    const Mat2 gu = e.vector_gradient(u);
    for (int a = 0; a < 3; ++a)
      out[e.v[a]] -= e.area * gu * e.grad[a];
  }
  return out;
}

/// Weak convection (u . grad) u.
inline VectorField apply_convection(const Mesh& mesh, const VectorField& u)
{
  detail::check_sizes(mesh, u.size());
  VectorField out(mesh.num_nodes(), Vec2::Zero());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const P1Element e(mesh, t);
    const Mat2 gu = e.vector_gradient(u);
    for (const auto& qp : kTriangleRule3)
      detail::scatter(out, e, qp.bary, qp.weight, gu * e.interpolate<Vec2>(u, qp.bary));
  }
  return out;
}

/// Weak advection (c . grad) u by a constant vector.
inline VectorField apply_advection(const Mesh& mesh, const VectorField& u, const Vec2& c)
{
  detail::check_sizes(mesh, u.size());
  VectorField out(mesh.num_nodes(), Vec2::Zero());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const P1Element e(mesh, t);
    const Vec2 v = e.vector_gradient(u) * c;
    for (const auto& qp : kTriangleRule3)
      detail::scatter(out, e, qp.bary, qp.weight, v);
  }
  return out;
}

/// Weak gradient: int grad p phi.
inline VectorField apply_gradient(const Mesh& mesh, const ScalarField& p)
{
  detail::check_sizes(mesh, p.size());
  VectorField out(mesh.num_nodes(), Vec2::Zero());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const P1Element e(mesh, t);
    const Vec2 gp = e.scalar_gradient(p);
    for (int a = 0; a < 3; ++a)
      out[e.v[a]] += (e.area / 3.0) * gp;
  }
  return out;
}

/// Sum over nodes of u_a . image_a; the quadratic form of a weak operator.
inline double weak_pairing(const VectorField& u, const VectorField& image)
{
  double s = 0.0;
  for (std::size_t a = 0; a < u.size(); ++a)
    s += u[a].dot(image[a]);
  return s;
}

/// Lumped-mass projection of a weak image to nodal values.
inline VectorField lumped_projection(const Mesh& mesh, const VectorField& image)
{
  std::vector<double> lumped(mesh.num_nodes(), 0.0);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
    for (auto v : mesh.triangles[t])
      lumped[v] += mesh.signed_area(t) / 3.0;
  VectorField out(image.size());
  for (std::size_t a = 0; a < image.size(); ++a)
    out[a] = image[a] / lumped[a];
  return out;
}

} // namespace fsislip
