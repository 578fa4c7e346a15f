#pragma once

// P1 element kinematics and the quadrature rules shared by all assembly code.

#include "fsislip/geometry.hpp"

namespace fsislip {

struct QuadPoint {
  std::array<double, 3> bary; ///< barycentric coordinates = P1 basis values
  double weight;              ///< fraction of the triangle area
};

/// Three-point interior rule, exact for quadratics.
inline constexpr std::array<QuadPoint, 3> kTriangleRule3{{
    {{2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0}, 1.0 / 3.0},
    {{1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0}, 1.0 / 3.0},
    {{1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0}, 1.0 / 3.0},
}};

namespace detail {
inline constexpr double kA1 = 0.059715871789770, kB1 = 0.470142064105115;
inline constexpr double kA2 = 0.797426985353087, kB2 = 0.101286507323456;
inline constexpr double kW1 = 0.132394152788506, kW2 = 0.125939180544827;
} // namespace detail

/// Seven-point degree-5 rule (Strang-Fix); used by error norms, not assembly.
inline constexpr std::array<QuadPoint, 7> kTriangleRule7{{
    {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, 0.225},
    {{detail::kA1, detail::kB1, detail::kB1}, detail::kW1},
    {{detail::kB1, detail::kA1, detail::kB1}, detail::kW1},
    {{detail::kB1, detail::kB1, detail::kA1}, detail::kW1},
    {{detail::kA2, detail::kB2, detail::kB2}, detail::kW2},
    {{detail::kB2, detail::kA2, detail::kB2}, detail::kW2},
    {{detail::kB2, detail::kB2, detail::kA2}, detail::kW2},
}};

/// Two-point Gauss rule on [0, 1]: (parameter, weight fraction of edge length).
inline const std::array<std::array<double, 2>, 2>& edge_gauss2()
{
  static const std::array<std::array<double, 2>, 2> rule{{
      {0.5 - 0.5 / std::sqrt(3.0), 0.5},
      {0.5 + 0.5 / std::sqrt(3.0), 0.5},
  }};
  return rule;
}

/// Geometry of one P1 triangle: area, vertex coordinates, constant basis gradients.
struct P1Element {
  std::array<std::size_t, 3> v;
  std::array<Vec2, 3> x;
  std::array<Vec2, 3> grad;
  double area;
  double h; ///< longest edge

  P1Element(const Mesh& mesh, std::size_t t) : v(mesh.triangles[t])
  {
    for (int k = 0; k < 3; ++k)
      x[k] = mesh.nodes[v[k]];
    const double two_a = cross(x[1] - x[0], x[2] - x[0]);
    area = 0.5 * two_a;
    for (int k = 0; k < 3; ++k) {
      const Vec2& p = x[(k + 1) % 3];
      const Vec2& q = x[(k + 2) % 3];
      grad[k] = Vec2(p.y() - q.y(), q.x() - p.x()) / two_a;
    }
    h = std::max({(x[0] - x[1]).norm(), (x[1] - x[2]).norm(), (x[2] - x[0]).norm()});
  }

  Vec2 point(const std::array<double, 3>& b) const { return b[0] * x[0] + b[1] * x[1] + b[2] * x[2]; }

  template <class T, class Field>
  T interpolate(const Field& nodal, const std::array<double, 3>& b) const
  {
    return b[0] * nodal[v[0]] + b[1] * nodal[v[1]] + b[2] * nodal[v[2]];
  }

  /// Gradient of a nodal vector field: G(k, i) = d u_k / d y_i.
  Mat2 vector_gradient(const std::vector<Vec2>& u) const
  {
    Mat2 g = Mat2::Zero();
    for (int a = 0; a < 3; ++a)
      g += u[v[a]] * grad[a].transpose();
    return g;
  }

  Vec2 scalar_gradient(const std::vector<double>& p) const
  {
    return p[v[0]] * grad[0] + p[v[1]] * grad[1] + p[v[2]] * grad[2];
  }
};

} // namespace fsislip
