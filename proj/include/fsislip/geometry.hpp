#pragma once

/**
 * @file geometry.hpp
 * @brief Reference fluid domain: the annulus between the body disk and the
 * container disk, triangulated on a structured polar grid.
 *
 * Node (ring i, ray j) has index i * n_angular + j. Ring 0 lies on the body
 * circle, ring n_radial on the container wall. Rays start at the body center;
 * when the body is off-center each ray is cut at its own intersection with the
 * wall, so the same construction covers eccentric placements.
 */

#include "fsislip/common.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

namespace fsislip {

enum class BoundaryTag { OuterWall, BodyInterface };

enum class NodeKind { Interior, OuterWall, BodyInterface };

struct BoundaryEdge {
  std::array<std::size_t, 2> nodes;
  BoundaryTag tag;
  std::size_t triangle; ///< the triangle owning this edge
};

struct Mesh {
  std::vector<Vec2> nodes;
  std::vector<std::array<std::size_t, 3>> triangles;
  std::vector<BoundaryEdge> boundary_edges;
  std::vector<Vec2> edge_normals; ///< one per boundary edge
  /// Averaged boundary normals, indexed by node (zero for interior nodes).
  std::vector<Vec2> node_normals;
  std::vector<NodeKind> node_kind;
  double h_max = 0.0;

  double r_body = 0.0;
  double r_outer = 0.0;
  Vec2 body_center = Vec2::Zero();
  Vec2 domain_center = Vec2::Zero();
  std::size_t n_radial = 0;
  std::size_t n_angular = 0;

  std::size_t num_nodes() const { return nodes.size(); }
  std::size_t num_triangles() const { return triangles.size(); }

  double signed_area(std::size_t t) const
  {
    const auto& tri = triangles[t];
    return 0.5 * cross(nodes[tri[1]] - nodes[tri[0]], nodes[tri[2]] - nodes[tri[0]]);
  }

  /// Exact unit normal of the body circle at y, pointing into the body.
  Vec2 body_normal_at(const Vec2& y) const { return (body_center - y).normalized(); }
};

struct AnnulusParams {
  double r_body = 0.5;
  double r_outer = 2.0;
  std::size_t n_radial = 32;
  std::size_t n_angular = 64;
  Vec2 body_center = Vec2::Zero();
  /// Thickness ratio between consecutive radial layers, moving toward the body.
  double grading = 0.8;
};

namespace detail {

inline double ray_to_wall(const Vec2& c, const Vec2& e, double r_outer)
{
  const double ce = c.dot(e);
  return -ce + std::sqrt(ce * ce - c.squaredNorm() + r_outer * r_outer);
}

/// Cumulative layer fractions s_0 = 0 ... s_n = 1 for geometric grading.
inline std::vector<double> graded_fractions(std::size_t n, double ratio)
{
  std::vector<double> thickness(n);
  for (std::size_t k = 0; k < n; ++k)
    thickness[k] = std::pow(ratio, static_cast<double>(n - 1 - k));
  double total = 0.0;
  for (double h : thickness)
    total += h;
  std::vector<double> s(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k)
    s[k + 1] = s[k] + thickness[k] / total;
  s[n] = 1.0;
  return s;
}

} // namespace detail

namespace detail {

/// Boundary normals and h_max from node positions and boundary edges.
inline void finish_mesh(Mesh& mesh)
{
  // Edges run counterclockwise on both circles: the left normal points to the
  // body center, the right normal points out of the container.
  mesh.edge_normals.clear();
  mesh.node_normals.assign(mesh.nodes.size(), Vec2::Zero());
  for (const auto& e : mesh.boundary_edges) {
    const Vec2 t = (mesh.nodes[e.nodes[1]] - mesh.nodes[e.nodes[0]]).normalized();
    const Vec2 n = e.tag == BoundaryTag::BodyInterface ? Vec2(-t.y(), t.x()) : Vec2(t.y(), -t.x());
    mesh.edge_normals.push_back(n);
    mesh.node_normals[e.nodes[0]] += n;
    mesh.node_normals[e.nodes[1]] += n;
  }
  for (std::size_t k = 0; k < mesh.nodes.size(); ++k)
    if (mesh.node_kind[k] != NodeKind::Interior)
      mesh.node_normals[k].normalize();

  mesh.h_max = 0.0;
  for (const auto& tri : mesh.triangles)
    for (int k = 0; k < 3; ++k)
      mesh.h_max = std::max(mesh.h_max, (mesh.nodes[tri[k]] - mesh.nodes[tri[(k + 1) % 3]]).norm());
}

} // namespace detail

inline Mesh generate_annulus_mesh(const AnnulusParams& p)
{
  if (!(p.r_body > 0.0))
    throw ParameterError("r_body", "r_body must be positive");
  if (!(p.r_body < p.r_outer))
    throw ParameterError("r_body", "r_body >= R_outer");
  if (p.n_radial < 2)
    throw ParameterError("n_radial", "n_radial must be at least 2");
  if (p.n_angular < 8)
    throw ParameterError("n_angular", "n_angular must be at least 8");
  if (!(p.grading > 0.0))
    throw ParameterError("grading", "grading ratio must be positive");
  if (!(p.body_center.norm() + p.r_body < p.r_outer))
    throw ParameterError("body_center", "body circle is not strictly inside the outer circle");

  const std::size_t nr = p.n_radial;
  const std::size_t na = p.n_angular;
  Mesh mesh;
  mesh.r_body = p.r_body;
  mesh.r_outer = p.r_outer;
  mesh.body_center = p.body_center;
  mesh.n_radial = nr;
  mesh.n_angular = na;

  const auto frac = detail::graded_fractions(nr, p.grading);
  mesh.nodes.resize((nr + 1) * na);
  mesh.node_kind.assign(mesh.nodes.size(), NodeKind::Interior);
  for (std::size_t j = 0; j < na; ++j) {
    const double phi = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(na);
    const Vec2 e(std::cos(phi), std::sin(phi));
    const double s_wall = detail::ray_to_wall(p.body_center, e, p.r_outer);
    for (std::size_t i = 0; i <= nr; ++i) {
      const double rho = p.r_body + frac[i] * (s_wall - p.r_body);
      Vec2 y = p.body_center + rho * e;
      if (i == nr)
        y = p.r_outer * y.normalized(); // land exactly on the wall circle
      mesh.nodes[i * na + j] = y;
    }
    mesh.node_kind[j] = NodeKind::BodyInterface;
    mesh.node_kind[nr * na + j] = NodeKind::OuterWall;
  }

  // Diagonals flip between the right and left half-planes so the triangulation
  // is mirror-symmetric about the vertical axis when n_angular % 4 == 0.
  auto id = [na](std::size_t i, std::size_t j) { return i * na + (j % na); };
  mesh.triangles.reserve(2 * nr * na);
  std::vector<std::size_t> inner_owner(na), outer_owner(na);
  for (std::size_t i = 0; i < nr; ++i) {
    for (std::size_t j = 0; j < na; ++j) {
      const std::size_t a = id(i, j), b = id(i, j + 1), c = id(i + 1, j + 1), d = id(i + 1, j);
      const double mid =
          2.0 * std::numbers::pi * (static_cast<double>(j) + 0.5) / static_cast<double>(na);
      const bool right_half = std::cos(mid) >= 0.0;
      const std::size_t t0 = mesh.triangles.size();
      if (right_half) {
        mesh.triangles.push_back({a, d, c});
        mesh.triangles.push_back({a, c, b});
        if (i == 0)
          inner_owner[j] = t0 + 1;
        if (i + 1 == nr)
          outer_owner[j] = t0;
      } else {
        mesh.triangles.push_back({a, d, b});
        mesh.triangles.push_back({d, c, b});
        if (i == 0)
          inner_owner[j] = t0;
        if (i + 1 == nr)
          outer_owner[j] = t0 + 1;
      }
    }
  }

  for (std::size_t j = 0; j < na; ++j)
    mesh.boundary_edges.push_back({{id(0, j), id(0, j + 1)}, BoundaryTag::BodyInterface, inner_owner[j]});
  for (std::size_t j = 0; j < na; ++j)
    mesh.boundary_edges.push_back({{id(nr, j), id(nr, j + 1)}, BoundaryTag::OuterWall, outer_owner[j]});

  detail::finish_mesh(mesh);
  return mesh;
}

inline Mesh generate_annulus_mesh(double r_body, double r_outer, std::size_t n_radial,
                                  std::size_t n_angular, const Vec2& body_center)
{
  AnnulusParams p;
  p.r_body = r_body;
  p.r_outer = r_outer;
  p.n_radial = n_radial;
  p.n_angular = n_angular;
  p.body_center = body_center;
  return generate_annulus_mesh(p);
}

/// Same topology with new node positions and body center; normals and h_max
/// are recomputed.
inline Mesh moved_mesh(const Mesh& mesh, std::vector<Vec2> positions, const Vec2& body_center)
{
  if (positions.size() != mesh.nodes.size())
    throw ParameterError("positions", "position count does not match the mesh");
  Mesh m = mesh;
  m.nodes = std::move(positions);
  m.body_center = body_center;
  detail::finish_mesh(m);
  return m;
}

// =============================================================================
// Point location and field transfer
// =============================================================================

/// Barycentric location of points in a triangulation by walking across edges.
class PointLocator {
public:
  struct Hit {
    std::size_t triangle = 0;
    std::array<double, 3> bary{};
    bool inside = false; ///< false when the point was clamped onto the boundary
  };

  explicit PointLocator(const Mesh& mesh) : mesh_(&mesh)
  {
    const std::size_t nt = mesh.num_triangles();
    neighbor_.assign(nt, {kNone, kNone, kNone});
    node_triangle_.assign(mesh.num_nodes(), kNone);
    std::map<std::pair<std::size_t, std::size_t>, std::pair<std::size_t, int>> open;
    for (std::size_t t = 0; t < nt; ++t)
      for (int k = 0; k < 3; ++k) {
        const std::size_t a = mesh.triangles[t][(k + 1) % 3], b = mesh.triangles[t][(k + 2) % 3];
        if (node_triangle_[mesh.triangles[t][k]] == kNone)
          node_triangle_[mesh.triangles[t][k]] = t;
        const auto key = std::minmax(a, b);
        if (auto it = open.find(key); it != open.end()) {
          neighbor_[t][k] = it->second.first;
          neighbor_[it->second.first][it->second.second] = t;
          open.erase(it);
        } else {
          open.emplace(key, std::make_pair(t, k));
        }
      }
  }

  /// Locate y starting from a triangle that touches node `hint`.
  Hit locate(const Vec2& y, std::size_t hint) const
  {
    std::size_t t = node_triangle_.at(hint);
    const std::size_t max_steps = 4 * mesh_->num_triangles() + 8;
    for (std::size_t step = 0; step < max_steps; ++step) {
      const auto b = barycentric(t, y);
      if (std::min({b[0], b[1], b[2]}) >= -kSlack)
        return {t, b, true};
      // cross the most violated edge that has a neighbor; the hole makes the domain nonconvex
      int next_k = -1;
      for (int k = 0; k < 3; ++k)
        if (b[k] < -kSlack && neighbor_[t][k] != kNone && (next_k < 0 || b[k] < b[next_k]))
          next_k = k;
      if (next_k < 0)
        break;
      t = neighbor_[t][static_cast<std::size_t>(next_k)];
    }
    for (std::size_t u = 0; u < mesh_->num_triangles(); ++u) {
      const auto b = barycentric(u, y);
      if (std::min({b[0], b[1], b[2]}) >= -kSlack)
        return {u, b, true};
    }
    return clamp(y);
  }

private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  static constexpr double kSlack = 1e-12;

  std::array<double, 3> barycentric(std::size_t t, const Vec2& y) const
  {
    const auto& tri = mesh_->triangles[t];
    const Vec2 &p0 = mesh_->nodes[tri[0]], &p1 = mesh_->nodes[tri[1]], &p2 = mesh_->nodes[tri[2]];
    const double area = cross(p1 - p0, p2 - p0);
    const double b1 = cross(y - p0, p2 - p0) / area;
    const double b2 = cross(p1 - p0, y - p0) / area;
    return {1.0 - b1 - b2, b1, b2};
  }

  /// Closest point on the mesh boundary, for points that fall outside the
  /// polygonal domain (arcs between boundary nodes).
  Hit clamp(const Vec2& y) const
  {
    Hit best;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& be : mesh_->boundary_edges) {
      const Vec2 &a = mesh_->nodes[be.nodes[0]], &b = mesh_->nodes[be.nodes[1]];
      const double s = std::clamp((y - a).dot(b - a) / (b - a).squaredNorm(), 0.0, 1.0);
      const double d = (a + s * (b - a) - y).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best.triangle = be.triangle;
        best.bary = {0.0, 0.0, 0.0};
        const auto& tri = mesh_->triangles[be.triangle];
        for (int k = 0; k < 3; ++k) {
          if (tri[k] == be.nodes[0])
            best.bary[k] = 1.0 - s;
          if (tri[k] == be.nodes[1])
            best.bary[k] = s;
        }
      }
    }
    return best;
  }

  const Mesh* mesh_;
  std::vector<std::array<std::size_t, 3>> neighbor_; ///< across the edge opposite vertex k
  std::vector<std::size_t> node_triangle_;
};

/// Piecewise-linear interpolation of nodal values of `from` at the nodes of
/// `to`. Both meshes must share node numbering, which seeds the search.
template <class T>
std::vector<T> transfer_nodal(const Mesh& from, const Mesh& to, const std::vector<T>& values)
{
  if (values.size() != from.num_nodes() || from.num_nodes() != to.num_nodes())
    throw ParameterError("values", "field transfer needs matching node counts");
  const PointLocator loc(from);
  std::vector<T> out(to.num_nodes());
  for (std::size_t a = 0; a < to.num_nodes(); ++a) {
    const auto hit = loc.locate(to.nodes[a], a);
    const auto& tri = from.triangles[hit.triangle];
    out[a] = hit.bary[0] * values[tri[0]] + hit.bary[1] * values[tri[1]] + hit.bary[2] * values[tri[2]];
  }
  return out;
}

/// Facet normal of a boundary edge: into the body on the interface, outward on the wall.
inline Vec2 boundary_normal(const Mesh& mesh, std::size_t edge_index)
{
  if (edge_index >= mesh.boundary_edges.size())
    throw IndexError("edge " + std::to_string(edge_index) + " is not a boundary edge");
  return mesh.edge_normals[edge_index];
}

/// Same, addressed by the edge's endpoints (either order).
inline Vec2 boundary_normal(const Mesh& mesh, std::size_t a, std::size_t b)
{
  for (std::size_t e = 0; e < mesh.boundary_edges.size(); ++e) {
    const auto& n = mesh.boundary_edges[e].nodes;
    if ((n[0] == a && n[1] == b) || (n[0] == b && n[1] == a))
      return mesh.edge_normals[e];
  }
  throw IndexError("edge (" + std::to_string(a) + ", " + std::to_string(b) + ") is not a boundary edge");
}

// =============================================================================
// Validation
// =============================================================================

struct MeshIssue {
  std::string invariant; ///< e.g. "positive-area", "unit-normal"
  std::string entity;    ///< "triangle", "edge" or "node"
  std::size_t index = 0;
  std::string detail;
};

using MeshReport = std::vector<MeshIssue>;

inline MeshReport validate_mesh(const Mesh& mesh)
{
  MeshReport report;
  auto issue = [&report](std::string inv, std::string ent, std::size_t idx, double value) {
    std::ostringstream os;
    os.precision(17);
    os << value;
    report.push_back({std::move(inv), std::move(ent), idx, os.str()});
  };

  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const double a = mesh.signed_area(t);
    if (!(a > 0.0))
      issue("positive-area", "triangle", t, a);
  }

  std::vector<int> wall_count(mesh.nodes.size(), 0), body_count(mesh.nodes.size(), 0);
  for (const auto& e : mesh.boundary_edges)
    for (std::size_t n : e.nodes)
      ++(e.tag == BoundaryTag::BodyInterface ? body_count : wall_count)[n];
  for (std::size_t n = 0; n < mesh.nodes.size(); ++n) {
    const int total = wall_count[n] + body_count[n];
    if (total == 0)
      continue;
    if (!((wall_count[n] == 2 && body_count[n] == 0) || (body_count[n] == 2 && wall_count[n] == 0)))
      issue("closed-boundary", "node", n, total);
  }

  for (std::size_t e = 0; e < mesh.boundary_edges.size(); ++e) {
    const Vec2& n = mesh.edge_normals[e];
    if (std::abs(n.norm() - 1.0) > 1e-12)
      issue("unit-normal", "edge", e, n.norm());
    const auto& be = mesh.boundary_edges[e];
    const Vec2 mid = 0.5 * (mesh.nodes[be.nodes[0]] + mesh.nodes[be.nodes[1]]);
    const double s = be.tag == BoundaryTag::BodyInterface ? n.dot(mesh.body_center - mid)
                                                          : n.dot(mid - mesh.domain_center);
    if (!(s > 0.0))
      issue("normal-orientation", "edge", e, s);
  }

  for (std::size_t k = 0; k < mesh.nodes.size(); ++k) {
    if (mesh.node_kind[k] == NodeKind::Interior)
      continue;
    const Vec2& n = mesh.node_normals[k];
    if (std::abs(n.norm() - 1.0) > 1e-12)
      issue("unit-normal", "node", k, n.norm());
    const double s = mesh.node_kind[k] == NodeKind::BodyInterface
                         ? n.dot(mesh.body_center - mesh.nodes[k])
                         : n.dot(mesh.nodes[k] - mesh.domain_center);
    if (!(s > 0.0))
      issue("normal-orientation", "node", k, s);
  }
  return report;
}

} // namespace fsislip
