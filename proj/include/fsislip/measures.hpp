#pragma once

// Direct measurements on states. These quadratures are written separately from
// the solver assembly so they can serve as an independent check on it.

#include "fsislip/solver.hpp"

namespace fsislip {

struct GapInfo {
  double distance = 0.0;
  bool contact = false;
};

/// R_outer - |x_c| - r_body for a disk inside a disk centered at the origin.
inline GapInfo gap_distance(const RigidState& rigid, double r_body, double r_outer)
{
  GapInfo g;
  g.distance = r_outer - rigid.x_c.norm() - r_body;
  g.contact = !(g.distance > 0.0);
  return g;
}

/// 2 mu sum_T |T| |D(z_F)|^2 with D the symmetric part of the element gradient.
inline double strain_dissipation(const Mesh& mesh, const VectorField& z, double mu)
{
  double s = 0.0;
  for (const auto& tri : mesh.triangles) {
    const Vec2 &p0 = mesh.nodes[tri[0]], &p1 = mesh.nodes[tri[1]], &p2 = mesh.nodes[tri[2]];
    Mat2 dy;
    dy << p1.x() - p0.x(), p2.x() - p0.x(), p1.y() - p0.y(), p2.y() - p0.y();
    Mat2 du;
    du.col(0) = z[tri[1]] - z[tri[0]];
    du.col(1) = z[tri[2]] - z[tri[0]];
    const Mat2 grad = du * dy.inverse();
    const Mat2 d = 0.5 * (grad + grad.transpose());
    s += 0.5 * std::abs(dy.determinant()) * d.squaredNorm();
  }
  return 2.0 * mu * s;
}

/// beta times the body-boundary integral of |z_F - xi - w x (y - c)|^2 (Simpson's rule,
/// exact for the quadratic integrand on straight edges).
inline double slip_dissipation(const Mesh& mesh, const CoupledState& z, double beta)
{
  double s = 0.0;
  for (const auto& be : mesh.boundary_edges) {
    if (be.tag != BoundaryTag::BodyInterface)
      continue;
    const Vec2 &a = mesh.nodes[be.nodes[0]], &b = mesh.nodes[be.nodes[1]];
    const auto rel = [&](double t) {
      const Vec2 y = (1.0 - t) * a + t * b;
      const Vec2 zf = (1.0 - t) * z.z_F[be.nodes[0]] + t * z.z_F[be.nodes[1]];
      return (zf - z.rigid_velocity(y, mesh.body_center)).squaredNorm();
    };
    s += (b - a).norm() / 6.0 * (rel(0.0) + 4.0 * rel(0.5) + rel(1.0));
  }
  return beta * s;
}

inline double dissipation_rate(const Mesh& mesh, const CoupledState& z, double mu, double beta)
{
  return strain_dissipation(mesh, z.z_F, mu) + slip_dissipation(mesh, z, beta);
}

} // namespace fsislip
