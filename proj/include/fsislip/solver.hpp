#pragma once

// One implicit step of the linearized fluid/rigid-body problem.
//
// P1 velocity, P1 pressure with Brezzi-Pitkaranta stabilization. Velocity
// unknowns live in the discrete space V: interior nodes carry two Cartesian
// dofs, body nodes carry only the tangential component (the normal component
// follows the rigid motion), wall nodes carry nothing, and (xi, w) are either
// unknowns or prescribed. The reduced velocity u maps to the full Cartesian
// vector by z = E u + e0.

#include "fsislip/operators.hpp"

#include <Eigen/Sparse>
#include <Eigen/UmfPackSupport>

#include <memory>
#include <optional>

namespace fsislip {

using SpMat = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;

// =============================================================================
// Coupled state
// =============================================================================

struct CoupledState {
  VectorField z_F;
  ScalarField q_F;
  Vec2 xi = Vec2::Zero();
  double w = 0.0;

  static CoupledState zero(std::size_t n_nodes)
  {
    CoupledState s;
    s.z_F.assign(n_nodes, Vec2::Zero());
    s.q_F.assign(n_nodes, 0.0);
    return s;
  }

  std::size_t num_nodes() const { return z_F.size(); }

  /// Cartesian velocity vector [z_F (x, y interleaved); xi; w].
  Eigen::VectorXd full_velocity() const
  {
    const std::size_t n = z_F.size();
    Eigen::VectorXd v(2 * n + 3);
    for (std::size_t a = 0; a < n; ++a)
      v.segment<2>(2 * a) = z_F[a];
    v.segment<2>(2 * n) = xi;
    v(2 * n + 2) = w;
    return v;
  }

  void set_full_velocity(const Eigen::VectorXd& v)
  {
    const std::size_t n = (static_cast<std::size_t>(v.size()) - 3) / 2;
    z_F.resize(n);
    for (std::size_t a = 0; a < n; ++a)
      z_F[a] = v.segment<2>(2 * a);
    xi = v.segment<2>(2 * n);
    w = v(2 * n + 2);
  }

  /// Rigid boundary velocity z_B(y) = xi + w x (y - c).
  Vec2 rigid_velocity(const Vec2& y, const Vec2& c) const { return xi + perp(w, y - c); }
};

inline bool all_finite(const CoupledState& s)
{
  for (const auto& v : s.z_F)
    if (!v.allFinite())
      return false;
  for (double q : s.q_F)
    if (!std::isfinite(q))
      return false;
  return s.xi.allFinite() && std::isfinite(s.w);
}

// =============================================================================
// Dof map
// =============================================================================

enum class RigidMode { Free, Prescribed };

struct DofMap {
  std::size_t n_nodes = 0;
  std::vector<long> first;  ///< reduced index of a node's first dof, -1 on the wall
  std::vector<Vec2> normal; ///< body-node normals (zero elsewhere)
  std::vector<Vec2> tangent;
  long xi_dof = -1; ///< -1 when prescribed
  long w_dof = -1;
  std::size_t n_velocity = 0;
  SpMat E;            ///< (2N + 3) x n_velocity
  Eigen::VectorXd e0; ///< prescribed part of the full velocity

  std::size_t full_size() const { return 2 * n_nodes + 3; }
  std::size_t xi_full() const { return 2 * n_nodes; }
  std::size_t w_full() const { return 2 * n_nodes + 2; }
};

inline DofMap build_dof_map(const Mesh& mesh, RigidMode mode = RigidMode::Free,
                            const Vec2& xi_fixed = Vec2::Zero(), double w_fixed = 0.0)
{
  DofMap d;
  const std::size_t n = mesh.num_nodes();
  d.n_nodes = n;
  d.first.assign(n, -1);
  d.normal.assign(n, Vec2::Zero());
  d.tangent.assign(n, Vec2::Zero());
  long next = 0;
  for (std::size_t a = 0; a < n; ++a) {
    switch (mesh.node_kind[a]) {
    case NodeKind::Interior:
      d.first[a] = next;
      next += 2;
      break;
    case NodeKind::BodyInterface:
      d.first[a] = next++;
      d.normal[a] = mesh.node_normals[a];
      d.tangent[a] = Vec2(-d.normal[a].y(), d.normal[a].x());
      break;
    case NodeKind::OuterWall:
      break;
    }
  }
  if (mode == RigidMode::Free) {
    d.xi_dof = next;
    d.w_dof = next + 2;
    next += 3;
  }
  d.n_velocity = static_cast<std::size_t>(next);

  Triplets tr;
  d.e0 = Eigen::VectorXd::Zero(static_cast<long>(d.full_size()));
  const auto xf = static_cast<long>(d.xi_full());
  const auto wf = static_cast<long>(d.w_full());
  for (std::size_t a = 0; a < n; ++a) {
    const long r = 2 * static_cast<long>(a);
    if (mesh.node_kind[a] == NodeKind::Interior) {
      tr.emplace_back(r, d.first[a], 1.0);
      tr.emplace_back(r + 1, d.first[a] + 1, 1.0);
    } else if (mesh.node_kind[a] == NodeKind::BodyInterface) {
      const Vec2& nn = d.normal[a];
      const Vec2& tt = d.tangent[a];
      const double lever = cross(mesh.nodes[a] - mesh.body_center, nn);
      for (int i = 0; i < 2; ++i) {
        tr.emplace_back(r + i, d.first[a], tt(i));
        if (mode == RigidMode::Free) {
          tr.emplace_back(r + i, d.xi_dof, nn(i) * nn.x());
          tr.emplace_back(r + i, d.xi_dof + 1, nn(i) * nn.y());
          tr.emplace_back(r + i, d.w_dof, nn(i) * lever);
        } else {
          d.e0(r + i) = nn(i) * (nn.dot(xi_fixed) + w_fixed * lever);
        }
      }
    }
  }
  if (mode == RigidMode::Free) {
    tr.emplace_back(xf, d.xi_dof, 1.0);
    tr.emplace_back(xf + 1, d.xi_dof + 1, 1.0);
    tr.emplace_back(wf, d.w_dof, 1.0);
  } else {
    d.e0.segment<2>(xf) = xi_fixed;
    d.e0(wf) = w_fixed;
  }
  d.E.resize(static_cast<long>(d.full_size()), static_cast<long>(d.n_velocity));
  d.E.setFromTriplets(tr.begin(), tr.end());
  return d;
}

// =============================================================================
// Full-space matrices
// =============================================================================

namespace detail {

inline SpMat from_triplets(std::size_t rows, std::size_t cols, const Triplets& tr)
{
  SpMat m(static_cast<long>(rows), static_cast<long>(cols));
  m.setFromTriplets(tr.begin(), tr.end());
  return m;
}

/// Fluid consistent mass on the 2N Cartesian dofs (embedded in 2N + 3).
inline SpMat fluid_mass(const Mesh& mesh)
{
  Triplets tr;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const P1Element e(mesh, t);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const double v = e.area / 12.0 * (a == b ? 2.0 : 1.0);
        for (int i = 0; i < 2; ++i)
          tr.emplace_back(2 * e.v[a] + i, 2 * e.v[b] + i, v);
      }
  }
  const std::size_t n = 2 * mesh.num_nodes() + 3;
  return from_triplets(n, n, tr);
}

/// 2 mu int D(u) : D(v).
inline SpMat viscous_stiffness(const Mesh& mesh, double mu)
{
  Triplets tr;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const P1Element e(mesh, t);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const double gg = e.grad[a].dot(e.grad[b]);
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) {
            const double v = mu * e.area * ((i == j ? gg : 0.0) + e.grad[a](j) * e.grad[b](i));
            tr.emplace_back(2 * e.v[a] + i, 2 * e.v[b] + j, v);
          }
      }
  }
  const std::size_t n = 2 * mesh.num_nodes() + 3;
  return from_triplets(n, n, tr);
}

/// int over the body boundary of |z_F - xi - w x (y - c)|^2, as a matrix.
inline SpMat slip_boundary(const Mesh& mesh)
{
  Triplets tr;
  const std::size_t nn = mesh.num_nodes();
  const long xf = 2 * static_cast<long>(nn), wf = xf + 2;
  for (const auto& be : mesh.boundary_edges) {
    if (be.tag != BoundaryTag::BodyInterface)
      continue;
    const Vec2 p0 = mesh.nodes[be.nodes[0]], p1 = mesh.nodes[be.nodes[1]];
    const double len = (p1 - p0).norm();
    for (const auto& [s, wt] : edge_gauss2()) {
      const Vec2 d = (1.0 - s) * p0 + s * p1 - mesh.body_center;
      // rows of the relative velocity in terms of full dofs
      std::array<std::array<std::pair<long, double>, 4>, 2> row{{
          {{{2 * static_cast<long>(be.nodes[0]), 1.0 - s},
            {2 * static_cast<long>(be.nodes[1]), s},
            {xf, -1.0},
            {wf, d.y()}}},
          {{{2 * static_cast<long>(be.nodes[0]) + 1, 1.0 - s},
            {2 * static_cast<long>(be.nodes[1]) + 1, s},
            {xf + 1, -1.0},
            {wf, -d.x()}}},
      }};
      for (const auto& r : row)
        for (const auto& [ci, cv] : r)
          for (const auto& [cj, cw] : r)
            tr.emplace_back(ci, cj, wt * len * cv * cw);
    }
  }
  const std::size_t n = 2 * nn + 3;
  return from_triplets(n, n, tr);
}

/// Row s: -int phi_s div z.
inline SpMat divergence(const Mesh& mesh)
{
  Triplets tr;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const P1Element e(mesh, t);
    for (int s = 0; s < 3; ++s)
      for (int b = 0; b < 3; ++b)
        for (int j = 0; j < 2; ++j)
          tr.emplace_back(e.v[s], 2 * e.v[b] + j, -e.area / 3.0 * e.grad[b](j));
  }
  return from_triplets(mesh.num_nodes(), 2 * mesh.num_nodes() + 3, tr);
}

/// sum_T delta h_T^2 / mu int_T grad q . grad s.
inline SpMat pressure_stabilization(const Mesh& mesh, double delta, double mu)
{
  Triplets tr;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const P1Element e(mesh, t);
    const double f = delta * e.h * e.h / mu * e.area;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        tr.emplace_back(e.v[a], e.v[b], f * e.grad[a].dot(e.grad[b]));
  }
  return from_triplets(mesh.num_nodes(), mesh.num_nodes(), tr);
}

inline Eigen::VectorXd pressure_gauge(const Mesh& mesh)
{
  Eigen::VectorXd m = Eigen::VectorXd::Zero(static_cast<long>(mesh.num_nodes()));
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const double a3 = mesh.signed_area(t) / 3.0;
    for (auto v : mesh.triangles[t])
      m(static_cast<long>(v)) += a3;
  }
  return m;
}

} // namespace detail

// =============================================================================
// Operator A
// =============================================================================

/// Stiffness part of the coupled problem on full Cartesian vectors:
/// <Az, v> = 2 mu int D(z_F):D(v_F) + beta int_body (z_F - z_B).(v_F - v_B).
struct OperatorA {
  SpMat matrix;

  Eigen::VectorXd apply(const Eigen::VectorXd& z) const { return matrix * z; }
  Eigen::VectorXd apply(const CoupledState& z) const { return matrix * z.full_velocity(); }
};

inline OperatorA build_operator_A(const Mesh& mesh, double mu, double beta)
{
  if (!(mu > 0.0))
    throw ParameterError("mu", "mu must be positive");
  if (!(beta >= 0.0))
    throw ParameterError("beta", "beta must be nonnegative");
  OperatorA a;
  a.matrix = detail::viscous_stiffness(mesh, mu);
  if (beta > 0.0)
    a.matrix += beta * detail::slip_boundary(mesh);
  return a;
}

inline Eigen::VectorXd apply_operator_A(const CoupledState& z, const Mesh& mesh, double mu, double beta)
{
  return build_operator_A(mesh, mu, beta).apply(z);
}

/// int z1_F . z2_F + m xi1 . xi2 + I w1 w2, with the consistent P1 mass.
inline double energy_inner_product(const Mesh& mesh, const CoupledState& z1, const CoupledState& z2,
                                   const RigidState& rigid)
{
  double s = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    Vec2 s1 = Vec2::Zero(), s2 = Vec2::Zero();
    double diag = 0.0;
    for (auto v : tri) {
      s1 += z1.z_F[v];
      s2 += z2.z_F[v];
      diag += z1.z_F[v].dot(z2.z_F[v]);
    }
    s += mesh.signed_area(t) / 12.0 * (diag + s1.dot(s2));
  }
  return s + rigid.m * z1.xi.dot(z2.xi) + rigid.I_moment * z1.w * z2.w;
}

// =============================================================================
// Saddle operator and system
// =============================================================================

struct SaddleParams {
  double inv_dt = 0.0; ///< 1/dt; zero gives the steady problem
  double mu = 1.0;
  double beta = 1.0;
  double mass = 1.0;
  double inertia = 1.0;
  double stab_delta = 0.05;
  double stab_mu = 0.0; ///< viscosity used in the stabilization scale; <= 0 means mu
  RigidMode mode = RigidMode::Free;
  Vec2 xi_fixed = Vec2::Zero();
  double w_fixed = 0.0;
};

struct SolveReport {
  double residual = 0.0;
  std::vector<double> history;
  double lagrange = 0.0;
};

/// Assembled and factorized saddle-point matrix for a fixed configuration:
///   [ E'AE   E'B'   0 ] [u]   [E'(b - A e0)]
///   [ BE     -C     m ] [q] = [-B e0       ]
///   [ 0      m'     0 ] [l]   [0           ]
class SaddleOperator {
public:
  SaddleOperator(const Mesh& mesh, const SaddleParams& p) : params_(p), n_nodes_(mesh.num_nodes())
  {
    if (!(p.mu >= 0.0))
      throw ParameterError("mu", "mu must be nonnegative");
    if (!(p.beta >= 0.0))
      throw ParameterError("beta", "beta must be nonnegative");
    if (!(p.inv_dt >= 0.0) || !std::isfinite(p.inv_dt))
      throw ParameterError("dt", "dt must be positive");
    if (!(p.mass > 0.0) || !(p.inertia > 0.0))
      throw ParameterError("mass", "rigid mass and inertia must be positive");
    const double stab_mu = p.stab_mu > 0.0 ? p.stab_mu : p.mu;
    if (!(stab_mu > 0.0))
      throw ParameterError("mu", "stabilization needs a positive viscosity scale");

    dofs_ = build_dof_map(mesh, p.mode, p.xi_fixed, p.w_fixed);
    const std::size_t nf = dofs_.full_size();
    mass_ = detail::fluid_mass(mesh);
    {
      Triplets rig{{static_cast<int>(dofs_.xi_full()), static_cast<int>(dofs_.xi_full()), p.mass},
                   {static_cast<int>(dofs_.xi_full() + 1), static_cast<int>(dofs_.xi_full() + 1), p.mass},
                   {static_cast<int>(dofs_.w_full()), static_cast<int>(dofs_.w_full()), p.inertia}};
      mass_ += detail::from_triplets(nf, nf, rig);
    }
    stiffness_ = detail::viscous_stiffness(mesh, p.mu);
    if (p.beta > 0.0)
      stiffness_ += p.beta * detail::slip_boundary(mesh);
    div_ = detail::divergence(mesh);
    stab_ = detail::pressure_stabilization(mesh, p.stab_delta, stab_mu);
    gauge_ = detail::pressure_gauge(mesh);
    a_full_ = p.inv_dt * mass_ + stiffness_;

    const SpMat& E = dofs_.E;
    const SpMat auu = E.transpose() * a_full_ * E;
    const SpMat bu = div_ * E;
    const long nu = static_cast<long>(dofs_.n_velocity);
    const long np = static_cast<long>(n_nodes_);
    Triplets tr;
    tr.reserve(static_cast<std::size_t>(auu.nonZeros() + 2 * bu.nonZeros() + stab_.nonZeros() + 2 * np));
    for (long k = 0; k < auu.outerSize(); ++k)
      for (SpMat::InnerIterator it(auu, k); it; ++it)
        tr.emplace_back(it.row(), it.col(), it.value());
    for (long k = 0; k < bu.outerSize(); ++k)
      for (SpMat::InnerIterator it(bu, k); it; ++it) {
        tr.emplace_back(nu + it.row(), it.col(), it.value());
        tr.emplace_back(it.col(), nu + it.row(), it.value());
      }
    for (long k = 0; k < stab_.outerSize(); ++k)
      for (SpMat::InnerIterator it(stab_, k); it; ++it)
        tr.emplace_back(nu + it.row(), nu + it.col(), -it.value());
    for (long s = 0; s < np; ++s) {
      tr.emplace_back(nu + s, nu + np, gauge_(s));
      tr.emplace_back(nu + np, nu + s, gauge_(s));
    }
    const auto n = static_cast<std::size_t>(nu + np + 1);
    matrix_ = detail::from_triplets(n, n, tr);
    matrix_.makeCompressed();

    lu_ = std::make_shared<Eigen::UmfPackLU<SpMat>>();
    lu_->compute(matrix_);
    if (lu_->info() != Eigen::Success)
      throw SolverError("saddle-point factorization failed (singular or ill-posed system)", {});
  }

  const SaddleParams& params() const { return params_; }
  const DofMap& dofs() const { return dofs_; }
  std::size_t num_nodes() const { return n_nodes_; }
  std::size_t size() const { return static_cast<std::size_t>(matrix_.rows()); }
  const SpMat& matrix() const { return matrix_; }
  const SpMat& mass_full() const { return mass_; }
  const SpMat& stiffness_full() const { return stiffness_; }
  const SpMat& a_full() const { return a_full_; }
  const SpMat& divergence_full() const { return div_; }
  const SpMat& stabilization() const { return stab_; }
  const Eigen::VectorXd& gauge() const { return gauge_; }

  /// Reduced right-hand side for the full-space load b.
  Eigen::VectorXd reduced_rhs(const Eigen::VectorXd& b) const
  {
    const long nu = static_cast<long>(dofs_.n_velocity);
    const long np = static_cast<long>(n_nodes_);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(nu + np + 1);
    r.head(nu) = dofs_.E.transpose() * (b - a_full_ * dofs_.e0);
    r.segment(nu, np) = -(div_ * dofs_.e0);
    return r;
  }

  /// Direct solve with residual check and up to three refinement sweeps.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs, double tol, SolveReport* report = nullptr) const
  {
    std::vector<double> history;
    const double bnorm = rhs.norm();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(rhs.size());
    if (bnorm == 0.0) {
      if (report)
        *report = SolveReport{0.0, {0.0}, 0.0};
      return x;
    }
    x = lu_->solve(rhs);
    for (int sweep = 0;; ++sweep) {
      const Eigen::VectorXd r = rhs - matrix_ * x;
      const double rel = r.norm() / bnorm;
      history.push_back(rel);
      if (!std::isfinite(rel))
        throw SolverError("saddle-point solve produced non-finite values", history);
      if (rel <= tol) {
        if (report)
          *report = SolveReport{rel, history, x(x.size() - 1)};
        return x;
      }
      if (sweep == 3)
        throw SolverError("saddle-point solve missed its residual target", history);
      x += lu_->solve(r);
    }
  }

private:
  SaddleParams params_;
  std::size_t n_nodes_;
  DofMap dofs_;
  SpMat mass_, stiffness_, a_full_, div_, stab_, matrix_;
  Eigen::VectorXd gauge_;
  std::shared_ptr<Eigen::UmfPackLU<SpMat>> lu_;
};

/// Fluid load F0 (weak image) and rigid loads, packed as a full vector.
inline Eigen::VectorXd pack_load(const VectorField& F0, const Vec2& F1, double F2)
{
  const std::size_t n = F0.size();
  Eigen::VectorXd f(2 * n + 3);
  for (std::size_t a = 0; a < n; ++a)
    f.segment<2>(2 * a) = F0[a];
  f.segment<2>(2 * n) = F1;
  f(2 * n + 2) = F2;
  return f;
}

struct SaddleSystem {
  std::shared_ptr<const SaddleOperator> op;
  Eigen::VectorXd load; ///< full-space b = M z_prev / dt + F
  Eigen::VectorXd rhs;  ///< reduced right-hand side
};

inline SaddleSystem assemble_coupled_system(std::shared_ptr<const SaddleOperator> op,
                                            const CoupledState& z_prev, const VectorField& F0,
                                            const Vec2& F1, double F2)
{
  if (F0.size() != op->num_nodes() || z_prev.num_nodes() != op->num_nodes())
    throw ParameterError("F0", "load or previous state does not match the mesh");
  SaddleSystem s;
  s.load = pack_load(F0, F1, F2);
  if (op->params().inv_dt > 0.0)
    s.load += op->params().inv_dt * (op->mass_full() * z_prev.full_velocity());
  s.rhs = op->reduced_rhs(s.load);
  s.op = std::move(op);
  return s;
}

inline SaddleSystem assemble_coupled_system(const Mesh& mesh, double dt, double mu, double beta,
                                            const RigidState& rigid, const CoupledState& z_prev,
                                            const VectorField& F0, const Vec2& F1, double F2)
{
  if (!(dt > 0.0))
    throw ParameterError("dt", "dt must be positive");
  if (!(mu > 0.0))
    throw ParameterError("mu", "mu must be positive");
  if (!(beta >= 0.0))
    throw ParameterError("beta", "beta must be nonnegative");
  SaddleParams p;
  p.inv_dt = 1.0 / dt;
  p.mu = mu;
  p.beta = beta;
  p.mass = rigid.m;
  p.inertia = rigid.I_moment;
  return assemble_coupled_system(std::make_shared<const SaddleOperator>(mesh, p), z_prev, F0, F1, F2);
}

inline CoupledState solve_coupled(const SaddleSystem& sys, double tol = 1e-10, SolveReport* report = nullptr)
{
  const auto& op = *sys.op;
  const Eigen::VectorXd x = op.solve(sys.rhs, tol, report);
  const auto& d = op.dofs();
  const long nu = static_cast<long>(d.n_velocity);
  const long np = static_cast<long>(op.num_nodes());
  CoupledState z;
  z.set_full_velocity(d.E * x.head(nu) + d.e0);
  z.q_F.resize(op.num_nodes());
  for (long s = 0; s < np; ++s)
    z.q_F[static_cast<std::size_t>(s)] = x(nu + s);
  return z;
}

/// Residual of the stabilized constraint rows, B z - C q + lambda m, relative
/// to |B| |z|.
inline double constraint_residual(const SaddleOperator& op, const CoupledState& z, double lagrange)
{
  const Eigen::VectorXd v = z.full_velocity();
  Eigen::VectorXd q(static_cast<long>(z.q_F.size()));
  for (std::size_t s = 0; s < z.q_F.size(); ++s)
    q(static_cast<long>(s)) = z.q_F[s];
  const Eigen::VectorXd bz = op.divergence_full() * v;
  const Eigen::VectorXd r = bz - op.stabilization() * q + lagrange * op.gauge();
  const double scale = std::max(bz.cwiseAbs().maxCoeff(), (op.stabilization() * q).cwiseAbs().maxCoeff());
  return scale > 0.0 ? r.cwiseAbs().maxCoeff() / scale : r.cwiseAbs().maxCoeff();
}

/// Mass-weighted projection of arbitrary velocity data onto the discrete
/// constrained space (one Stokes-type solve with zero viscosity).
inline CoupledState project_to_constraints(const Mesh& mesh, const CoupledState& z, const RigidState& rigid)
{
  SaddleParams p;
  p.inv_dt = 1.0;
  p.mu = 0.0;
  p.beta = 0.0;
  p.mass = rigid.m;
  p.inertia = rigid.I_moment;
  p.stab_mu = 1.0;
  const SaddleOperator op(mesh, p);
  const Eigen::VectorXd b = op.mass_full() * z.full_velocity();
  SaddleSystem sys;
  sys.op = std::shared_ptr<const SaddleOperator>(&op, [](const SaddleOperator*) {});
  sys.load = b;
  sys.rhs = op.reduced_rhs(b);
  auto out = solve_coupled(sys);
  std::fill(out.q_F.begin(), out.q_F.end(), 0.0);
  return out;
}

} // namespace fsislip
