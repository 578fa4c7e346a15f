#pragma once

#include "fsislip/fsislip.hpp"

#include <gtest/gtest.h>

namespace fsislip::fixtures {

/// Uniform right-triangle mesh of [x0, x1] x [y0, y1]; only nodes and triangles
/// are filled, which is all the operators read.
inline Mesh rectangle_mesh(double x0, double x1, double y0, double y1, std::size_t nx, std::size_t ny)
{
  Mesh m;
  for (std::size_t j = 0; j <= ny; ++j)
    for (std::size_t i = 0; i <= nx; ++i)
      m.nodes.emplace_back(x0 + (x1 - x0) * static_cast<double>(i) / static_cast<double>(nx),
                           y0 + (y1 - y0) * static_cast<double>(j) / static_cast<double>(ny));
  const auto id = [nx](std::size_t i, std::size_t j) { return j * (nx + 1) + i; };
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  m.node_kind.assign(m.nodes.size(), NodeKind::Interior);
  return m;
}

inline bool on_rectangle_edge(const Mesh& m, std::size_t a)
{
  double x0 = m.nodes[0].x(), x1 = x0, y0 = m.nodes[0].y(), y1 = y0;
  for (const auto& p : m.nodes) {
    x0 = std::min(x0, p.x());
    x1 = std::max(x1, p.x());
    y0 = std::min(y0, p.y());
    y1 = std::max(y1, p.y());
  }
  const Vec2& p = m.nodes[a];
  return p.x() == x0 || p.x() == x1 || p.y() == y0 || p.y() == y1;
}

/// Shear map X = (y1 + a y2^2, y2) moving with da/dt = a_dot, so the carrier
/// field is Lambda(x) = (a_dot x2^2, 0).
inline TransformState shear_state(const Mesh& mesh, double a, double a_dot = 0.0)
{
  TransformState s = TransformState::identity(mesh);
  for (std::size_t k = 0; k < mesh.num_nodes(); ++k) {
    const Vec2& y = mesh.nodes[k];
    auto& n = s.nodes[k];
    n.X = Vec2(y.x() + a * y.y() * y.y(), y.y());
    n.J_X << 1.0, 2.0 * a * y.y(), 0.0, 1.0;
    n.H_X = zero_tensor3();
    n.H_X[0](1, 1) = 2.0 * a;
    FieldSample f;
    f.value = Vec2(a_dot * n.X.y() * n.X.y(), 0.0);
    f.grad << 0.0, 2.0 * a_dot * n.X.y(), 0.0, 0.0;
    f.hess[0](1, 1) = 2.0 * a_dot;
    finalize_node(n, f);
  }
  return s;
}

inline double max_norm(const VectorField& v)
{
  double m = 0.0;
  for (const auto& x : v)
    m = std::max(m, x.cwiseAbs().maxCoeff());
  return m;
}

inline VectorField nodal(const Mesh& mesh, const std::function<Vec2(const Vec2&)>& f)
{
  VectorField out(mesh.num_nodes());
  for (std::size_t a = 0; a < mesh.num_nodes(); ++a)
    out[a] = f(mesh.nodes[a]);
  return out;
}

/// Velocity field of the rotation x -> omega0 (-x2, x1), valid everywhere.
struct RotationField {
  double omega0 = 1.0;
  FieldSample sample(const Vec2& x) const
  {
    FieldSample s;
    s.value = Vec2(-omega0 * x.y(), omega0 * x.x());
    s.grad << 0.0, -omega0, omega0, 0.0;
    return s;
  }
};

struct ConstantField {
  Vec2 c = Vec2(1.0, 0.0);
  FieldSample sample(const Vec2&) const
  {
    FieldSample s;
    s.value = c;
    return s;
  }
};

inline SimulationConfig small_config()
{
  SimulationConfig c;
  c.n_radial = 8;
  c.n_angular = 32;
  c.dt = 1e-3;
  c.t_end = 0.01;
  return c;
}

} // namespace fsislip::fixtures
