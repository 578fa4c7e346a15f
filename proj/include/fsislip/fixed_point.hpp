#pragma once

// Per-step Picard iteration and the time loop.
//
// Inside each step the transformed-operator corrections are evaluated on the
// previous iterate and fed as loads into the linear coupled solve. Every step
// restarts the flow map from the identity on the current configuration.

#include "fsislip/measures.hpp"

#include <functional>
#include <optional>

namespace fsislip {

// =============================================================================
// Configuration
// =============================================================================

struct SimulationConfig {
  // geometry
  double r_body = 0.5;
  double r_outer = 2.0;
  Vec2 center = Vec2::Zero();
  std::size_t n_radial = 32;
  std::size_t n_angular = 64;
  double grading = 0.8;
  // physics
  double mu = 0.1;
  double beta = 1.0;
  double rho_b = 2.0;
  Vec2 gravity = Vec2::Zero(); ///< acceleration of gravity; the fluid part is carried by the hydrostatic pressure
  Vec2 force = Vec2::Zero();   ///< extra force on the body
  double torque = 0.0;
  // initial
  Vec2 eta0 = Vec2::Zero();
  double omega0 = 0.0;
  // time
  double t_end = 0.5;
  double dt = 1e-3;
  double picard_tol = 1e-9;
  std::size_t picard_max_iter = 50;
  double solver_tol = 1e-10;
  // transform
  double delta0 = 0.05;
  double tol_vol = 1e-5;
  // output
  std::string out_dir = "out";
  std::size_t snapshot_stride = 0; ///< 0 disables snapshots
  unsigned threads = 1;

  /// Every violated constraint as (key, message).
  std::vector<std::pair<std::string, std::string>> validate() const
  {
    std::vector<std::pair<std::string, std::string>> e;
    const auto need = [&](bool ok, const char* key, const char* msg) {
      if (!ok)
        e.emplace_back(key, msg);
    };
    need(r_body > 0.0, "r_body", "must be positive");
    need(r_outer > r_body, "r_outer", "must exceed r_body");
    need(n_radial >= 2, "n_radial", "must be at least 2");
    need(n_angular >= 8, "n_angular", "must be at least 8");
    need(grading > 0.0, "grading", "must be positive");
    need(mu > 0.0, "mu", "must be positive");
    need(beta >= 0.0, "beta", "must be nonnegative");
    need(rho_b > 0.0, "rho_b", "must be positive");
    need(t_end > 0.0, "t_end", "must be positive");
    need(dt > 0.0 && std::isfinite(dt), "dt", "must be positive and finite");
    need(picard_tol > solver_tol, "picard_tol", "must exceed solver_tol");
    need(solver_tol > 0.0, "solver_tol", "must be positive");
    need(picard_max_iter >= 1, "picard_max_iter", "must be at least 1");
    need(delta0 > 0.0, "delta0", "must be positive");
    need(tol_vol > 0.0, "tol_vol", "must be positive");
    need(threads >= 1, "threads", "must be at least 1");
    if (r_body > 0.0 && r_outer > r_body && delta0 > 0.0) {
      const double gap = r_outer - center.norm() - r_body;
      need(gap > 2.0 * delta0, "delta0", "initial gap must exceed 2 * delta0");
    }
    return e;
  }

  AnnulusParams mesh_params() const { return {r_body, r_outer, n_radial, n_angular, center, grading}; }
};

// =============================================================================
// Forcing
// =============================================================================

/// Gravity acts on the body through its mass less the displaced fluid mass
/// (unit fluid density); the rest of the fluid's weight sits in the pressure.
/// fluid_force is a uniform force density on the fluid, zero by default.
struct ExternalLoad {
  Vec2 gravity = Vec2::Zero();
  Vec2 force = Vec2::Zero();
  double torque = 0.0;
  double displaced_mass = 0.0;
  Vec2 fluid_force = Vec2::Zero();

  Vec2 body_force(double m) const { return (m - displaced_mass) * gravity + force; }
};

struct Forcing {
  VectorField F0;
  Vec2 F1 = Vec2::Zero();
  double F2 = 0.0;
  VectorField f0_tilde; ///< weak image of the external fluid load alone
  Vec2 f1_tilde = Vec2::Zero();
  double f2_tilde = 0.0;
};

namespace detail {

/// Weak image of a nodal field against the hat functions (3-point rule).
inline VectorField weak_load(const Mesh& mesh, const VectorField& f)
{
  VectorField out(mesh.num_nodes(), Vec2::Zero());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const P1Element e(mesh, t);
    for (const auto& qp : kTriangleRule3)
      scatter(out, e, qp.bary, qp.weight, e.interpolate<Vec2>(f, qp.bary));
  }
  return out;
}

/// Body-boundary integrals of (T - Ttilde) n, returning (force, torque).
inline std::pair<Vec2, double> stress_difference(const Mesh& mesh, const CoupledState& hat,
                                                 const TransformState& s, const Mat2& Q, double mu)
{
  Vec2 force = Vec2::Zero();
  double torque = 0.0;
  for (const auto& be : mesh.boundary_edges) {
    if (be.tag != BoundaryTag::BodyInterface)
      continue;
    const P1Element e(mesh, be.triangle);
    const Mat2 gu = e.vector_gradient(hat.z_F);
    const std::size_t a = be.nodes[0], b = be.nodes[1];
    const Vec2 &pa = mesh.nodes[a], &pb = mesh.nodes[b];
    const double len = (pb - pa).norm();
    for (const auto& [sp, wt] : edge_gauss2()) {
      const double ra = 1.0 - sp, rb = sp;
      const Vec2 y = ra * pa + rb * pb;
      const Vec2 n = mesh.body_normal_at(y);
      const double q = ra * hat.q_F[a] + rb * hat.q_F[b];
      const Vec2 u = ra * hat.z_F[a] + rb * hat.z_F[b];
      const auto& na = s.nodes[a];
      const auto& nb = s.nodes[b];
      const Mat2 jx = ra * na.J_X + rb * nb.J_X;
      const Mat2 jy = ra * na.J_Y + rb * nb.J_Y;
      Mat2 du = jx * gu; // d(J_X u)_k / dy_i
      for (int k = 0; k < 2; ++k) {
        const Mat2 h = ra * na.H_X[k] + rb * nb.H_X[k];
        du.row(k) += (h * u).transpose();
      }
      const Mat2 gx = du * jy;
      const Mat2 tx = mu * (gx + gx.transpose()) - q * Mat2::Identity();
      const Mat2 t_ref = mu * (gu + gu.transpose()) - q * Mat2::Identity();
      const Vec2 traction = (t_ref - Q.transpose() * tx * Q) * n;
      force += wt * len * traction;
      torque += wt * len * cross(y - mesh.body_center, traction);
    }
  }
  return {force, torque};
}

} // namespace detail

/// F0 = -M z + mu (L - Lap) z + (grad - G) q - N z + f0~,
/// F1 = f1~ + m w x xi + int (T - Ttilde) n, F2 = f2~ + int (y - c) x (T - Ttilde) n.
inline Forcing compute_forcing(const Mesh& mesh, const CoupledState& hat, const TransformState& s,
                               const RigidState& rigid, double mu, const ExternalLoad& ext)
{
  const std::size_t n = mesh.num_nodes();
  Forcing f;
  VectorField g_nodal(n);
  for (std::size_t a = 0; a < n; ++a)
    g_nodal[a] = s.nodes[a].J_Y * ext.fluid_force;
  f.f0_tilde = detail::weak_load(mesh, g_nodal);
  const Mat2 Q = rigid.Q();
  f.f1_tilde = Q.transpose() * ext.body_force(rigid.m);
  f.f2_tilde = ext.torque;

  const auto m_img = apply_M(mesh, hat.z_F, s);
  const auto l_img = apply_L(mesh, hat.z_F, s);
  const auto lap_img = apply_laplacian(mesh, hat.z_F);
  const auto grad_img = apply_gradient(mesh, hat.q_F);
  const auto g_img = apply_G(mesh, hat.q_F, s);
  const auto n_img = apply_N(mesh, hat.z_F, s);
  f.F0.resize(n);
  for (std::size_t a = 0; a < n; ++a)
    f.F0[a] = -m_img[a] + mu * (l_img[a] - lap_img[a]) + (grad_img[a] - g_img[a]) - n_img[a] + f.f0_tilde[a];

  const auto [sf, st] = detail::stress_difference(mesh, hat, s, Q, mu);
  f.F1 = f.f1_tilde + rigid.m * perp(hat.w, hat.xi) + sf;
  f.F2 = f.f2_tilde + st;
  return f;
}

// =============================================================================
// One time step
// =============================================================================

struct PicardStats {
  std::size_t iterations = 0;
  std::vector<double> residuals;
  double final_residual() const { return residuals.empty() ? 0.0 : residuals.back(); }
};

struct StepResult {
  CoupledState z;
  PicardStats stats;
  Forcing forcing; ///< forcing of the final solve
  double lagrange = 0.0;
};

struct StepOptions {
  double mu = 0.1;
  double picard_tol = 1e-9;
  std::size_t picard_max_iter = 50;
  double solver_tol = 1e-10;
  ExternalLoad load;
};

/// Picard loop for the step ending at the time of `s`; `op` carries dt.
inline StepResult advance_time_step(const Mesh& mesh, const std::shared_ptr<const SaddleOperator>& op,
                                    const CoupledState& prev, const TransformState& s,
                                    const RigidState& rigid, const StepOptions& opt)
{
  StepResult out;
  CoupledState hat = prev;
  for (std::size_t k = 1; k <= opt.picard_max_iter; ++k) {
    Forcing f = compute_forcing(mesh, hat, s, rigid, opt.mu, opt.load);
    const auto sys = assemble_coupled_system(op, prev, f.F0, f.F1, f.F2);
    SolveReport rep;
    CoupledState z;
    try {
      z = solve_coupled(sys, opt.solver_tol, &rep);
    } catch (const SolverError& e) {
      if (k == 1)
        throw;
      throw PicardNonconvergenceError(std::string("Picard iteration diverged (") + e.what() + "); reduce dt",
                                      out.stats.residuals);
    }

    CoupledState diff = z;
    for (std::size_t a = 0; a < z.z_F.size(); ++a)
      diff.z_F[a] -= hat.z_F[a];
    diff.xi -= hat.xi;
    diff.w -= hat.w;
    const double r = std::sqrt(std::max(0.0, energy_inner_product(mesh, diff, diff, rigid)));
    const double znorm = std::sqrt(std::max(0.0, energy_inner_product(mesh, z, z, rigid)));
    out.stats.residuals.push_back(r);
    out.stats.iterations = k;
    if (!std::isfinite(r) || !all_finite(z))
      throw PicardNonconvergenceError("Picard iteration diverged (non-finite iterate); reduce dt",
                                      out.stats.residuals);
    if (r <= opt.picard_tol * (1.0 + znorm)) {
      out.z = std::move(z);
      out.forcing = std::move(f);
      out.lagrange = rep.lagrange;
      return out;
    }
    hat = std::move(z);
  }
  throw PicardNonconvergenceError("Picard iteration did not converge in " + std::to_string(opt.picard_max_iter) +
                                      " iterations; reduce dt",
                                  out.stats.residuals);
}

// =============================================================================
// Simulation
// =============================================================================

struct TrajectoryRow {
  double t = 0.0;
  Vec2 x_c = Vec2::Zero();
  double theta = 0.0;
  Vec2 eta = Vec2::Zero();
  double omega = 0.0;
  double gap = 0.0;
  double energy = 0.0;
  double dissipation = 0.0;
  std::size_t picard_iters = 0;
  double picard_residual = 0.0;
  double detJ_min = 1.0;
  double detJ_max = 1.0;
  // in-memory only; energies in the inner product of the step's reference frame
  double dt = 0.0;
  double window_start_energy = 0.0;
  double window_end_energy = 0.0;
  double increment_energy = 0.0; ///< 1/2 |z - z_prev|^2
  double window_dissipation = 0.0;
  double external_power = 0.0;
  double total_power = 0.0;
  double stab_dissipation = 0.0;
  Vec2 hydro_force = Vec2::Zero(); ///< m d(eta)/dt minus the external force
  std::vector<double> picard_residuals;
};

using TrajectoryRecord = std::vector<TrajectoryRow>;

enum class StopReason { TEnd, ContactThreshold, TransformDegeneracy };

inline const char* to_string(StopReason r)
{
  switch (r) {
  case StopReason::TEnd:
    return "t-end";
  case StopReason::ContactThreshold:
    return "contact-threshold";
  case StopReason::TransformDegeneracy:
    return "transform-degeneracy";
  }
  return "unknown";
}

struct PhysicalFields {
  std::vector<Vec2> positions;
  VectorField velocity;
  ScalarField pressure;
  std::vector<double> detJ;
  Vec2 eta = Vec2::Zero();
  double omega = 0.0;
  Vec2 x_c = Vec2::Zero();
  double theta = 0.0;
};

/// Physical fields at the mapped nodes X(y): u = J_X z_F, eta = Q xi, omega = w.
inline PhysicalFields reconstruct_physical(const CoupledState& z, const TransformState& s, const RigidState& rigid)
{
  PhysicalFields p;
  p.velocity = pullback_velocity(z.z_F, s);
  p.pressure = z.q_F;
  p.positions.resize(s.nodes.size());
  p.detJ.resize(s.nodes.size());
  for (std::size_t a = 0; a < s.nodes.size(); ++a) {
    p.positions[a] = s.nodes[a].X;
    p.detJ[a] = s.nodes[a].J_X.determinant();
  }
  p.eta = rigid.Q() * z.xi;
  p.omega = z.w;
  p.x_c = rigid.x_c;
  p.theta = rigid.theta;
  return p;
}

struct SnapshotView {
  std::size_t step;
  double t;
  const Mesh& mesh; ///< current configuration
  const CoupledState& z;
  const std::vector<double>& detJ;
};

struct SimulationResult {
  Mesh initial_mesh;
  Mesh mesh; ///< final configuration
  TrajectoryRecord rows;
  StopReason stop = StopReason::TEnd;
  std::string stop_detail;
  CoupledState final_state;
  RigidState final_rigid;
};

/// Initial fluid velocity: the carrier field of the initial rigid motion,
/// projected onto the discrete constraints when it misses them.
inline CoupledState initial_state(const Mesh& mesh, const SimulationConfig& cfg, const RigidState& rigid)
{
  CoupledState z = CoupledState::zero(mesh.num_nodes());
  z.xi = cfg.eta0;
  z.w = cfg.omega0;
  if (cfg.eta0.isZero(0.0) && cfg.omega0 == 0.0)
    return z;
  const LambdaField lam(cfg.eta0, cfg.omega0, rigid.x_c, CutoffProfile::for_domain(cfg.r_body, cfg.r_outer, cfg.delta0));
  for (std::size_t a = 0; a < mesh.num_nodes(); ++a)
    z.z_F[a] = lam.sample(mesh.nodes[a]).value;
  const Eigen::VectorXd bz = detail::divergence(mesh) * z.full_velocity();
  if (bz.cwiseAbs().maxCoeff() > 1e-10)
    z = project_to_constraints(mesh, z, rigid);
  return z;
}

namespace detail {

inline TrajectoryRow make_row(const Mesh& mesh, const SimulationConfig& cfg, double t, const CoupledState& z,
                              const RigidState& rigid)
{
  TrajectoryRow r;
  r.t = t;
  r.x_c = rigid.x_c;
  r.theta = rigid.theta;
  r.eta = z.xi;
  r.omega = z.w;
  r.gap = gap_distance(rigid, cfg.r_body, cfg.r_outer).distance;
  r.energy = 0.5 * energy_inner_product(mesh, z, z, rigid);
  r.dissipation = dissipation_rate(mesh, z, cfg.mu, cfg.beta);
  r.dt = cfg.dt;
  return r;
}

inline CoupledState difference(const CoupledState& a, const CoupledState& b)
{
  CoupledState d = a;
  for (std::size_t k = 0; k < d.z_F.size(); ++k)
    d.z_F[k] -= b.z_F[k];
  d.xi -= b.xi;
  d.w -= b.w;
  return d;
}

} // namespace detail

using SnapshotCallback = std::function<void(const SnapshotView&)>;

/// Time loop. Each step takes the current configuration as its reference
/// domain, integrates the flow map from the identity over [t, t + dt], runs
/// the Picard iteration there, and maps the result back to physical fields on
/// a grid regenerated around the advanced body position. Node numbering and
/// topology never change.
inline SimulationResult simulate(const SimulationConfig& cfg, const SnapshotCallback& on_snapshot = {})
{
  if (const auto errs = cfg.validate(); !errs.empty())
    throw ParameterError(errs.front().first, errs.front().first + ": " + errs.front().second);

  SimulationResult res;
  res.initial_mesh = generate_annulus_mesh(cfg.mesh_params());
  Mesh mesh = res.initial_mesh;
  RigidState rigid = RigidState::homogeneous_disk(cfg.rho_b, cfg.r_body, cfg.center);
  CoupledState z = initial_state(mesh, cfg, rigid);
  rigid.eta = z.xi;
  rigid.omega = z.w;

  SaddleParams sp;
  sp.inv_dt = 1.0 / cfg.dt;
  sp.mu = cfg.mu;
  sp.beta = cfg.beta;
  sp.mass = rigid.m;
  sp.inertia = rigid.I_moment;
  std::shared_ptr<const SaddleOperator> op;
  bool mesh_moved = false;

  StepOptions so;
  so.mu = cfg.mu;
  so.picard_tol = cfg.picard_tol;
  so.picard_max_iter = cfg.picard_max_iter;
  so.solver_tol = cfg.solver_tol;
  so.load = {cfg.gravity, cfg.force, cfg.torque, std::numbers::pi * cfg.r_body * cfg.r_body, Vec2::Zero()};
  const Vec2 external_force = so.load.body_force(rigid.m);

  double t = 0.0;
  std::vector<double> det_field(mesh.num_nodes(), 1.0);
  res.rows.push_back(detail::make_row(mesh, cfg, t, z, rigid));
  if (on_snapshot && cfg.snapshot_stride > 0)
    on_snapshot({0, t, mesh, z, det_field});

  const auto n_steps = static_cast<std::size_t>(std::ceil(cfg.t_end / cfg.dt - 1e-9));
  res.stop = StopReason::TEnd;
  for (std::size_t step = 1; step <= n_steps; ++step) {
    const double gap = gap_distance(rigid, cfg.r_body, cfg.r_outer).distance;
    const Vec2 eta = rotation(0.5 * cfg.dt * z.w) * z.xi;
    const double omega = z.w;
    RigidState moved = rigid;
    moved.x_c += cfg.dt * eta;
    const double gap_next = gap_distance(moved, cfg.r_body, cfg.r_outer).distance;
    if (gap <= cfg.delta0 || gap_next <= cfg.delta0) {
      res.stop = StopReason::ContactThreshold;
      res.stop_detail = "gap " + std::to_string(std::min(gap, gap_next)) + " <= delta0 at t = " + std::to_string(t);
      break;
    }

    const CutoffProfile cutoff = CutoffProfile::for_domain(cfg.r_body, cfg.r_outer, cfg.delta0);
    const Vec2 x0 = rigid.x_c;
    const double t0 = t;
    const auto lambda_at = [&](double s) { return LambdaField(eta, omega, x0 + (s - t0) * eta, cutoff); };
    TransformState state;
    try {
      state = advance_flow_map(TransformState::identity(mesh, t), lambda_at, t, cfg.dt, {cfg.tol_vol, cfg.threads});
    } catch (const TransformDegeneracyError& e) {
      res.stop = StopReason::TransformDegeneracy;
      res.stop_detail = e.what();
      break;
    }

    rigid.eta = eta;
    rigid.omega = omega;
    rigid.x_c = moved.x_c;
    rigid.theta += cfg.dt * omega;
    t = static_cast<double>(step) * cfg.dt;
    RigidState window = rigid;
    window.theta = cfg.dt * omega;

    if (!op || mesh_moved)
      op = std::make_shared<const SaddleOperator>(mesh, sp);
    const bool advect = !(eta.isZero(0.0) && omega == 0.0);
    mesh_moved = !eta.isZero(0.0);

    StepResult sr;
    try {
      sr = advance_time_step(mesh, op, z, state, window, so);
    } catch (const PicardNonconvergenceError& e) {
      throw SimulationError(std::string(e.what()) + " (step " + std::to_string(step) + ", t = " + std::to_string(t) +
                                ")",
                            step, true);
    } catch (const SolverError& e) {
      throw SimulationError(std::string(e.what()) + " (step " + std::to_string(step) + ")", step, false);
    }

    // energy bookkeeping in the step's reference frame
    const Eigen::VectorXd v = sr.z.full_velocity();
    Eigen::VectorXd q(static_cast<long>(mesh.num_nodes()));
    for (std::size_t a = 0; a < mesh.num_nodes(); ++a)
      q(static_cast<long>(a)) = sr.z.q_F[a];
    const Eigen::VectorXd fl = pack_load(sr.forcing.F0, sr.forcing.F1, sr.forcing.F2);
    const Eigen::VectorXd fe = pack_load(sr.forcing.f0_tilde, sr.forcing.f1_tilde, sr.forcing.f2_tilde);
    const CoupledState dz = detail::difference(sr.z, z);
    const double e_start = 0.5 * energy_inner_product(mesh, z, z, window);
    const double e_end = 0.5 * energy_inner_product(mesh, sr.z, sr.z, window);
    const double inc = 0.5 * energy_inner_product(mesh, dz, dz, window);
    const double d_win = dissipation_rate(mesh, sr.z, cfg.mu, cfg.beta);

    // back to physical fields on the advanced configuration
    const PhysicalFields phys = reconstruct_physical(sr.z, state, window);
    CoupledState next = CoupledState::zero(mesh.num_nodes());
    next.xi = phys.eta;
    next.w = phys.omega;
    if (advect) {
      // fresh grid around the new body position, fields carried over from the advected nodes
      const Mesh advected = moved_mesh(mesh, phys.positions, rigid.x_c);
      AnnulusParams mp = cfg.mesh_params();
      mp.body_center = rigid.x_c;
      mesh = generate_annulus_mesh(mp);
      next.z_F = transfer_nodal(advected, mesh, phys.velocity);
      next.q_F = transfer_nodal(advected, mesh, phys.pressure);
      for (std::size_t a = 0; a < mesh.num_nodes(); ++a)
        if (mesh.node_kind[a] == NodeKind::OuterWall)
          next.z_F[a] = Vec2::Zero();
    } else {
      next.z_F = phys.velocity;
      next.q_F = phys.pressure;
    }

    TrajectoryRow row = detail::make_row(mesh, cfg, t, next, rigid);
    const auto [lo, hi] = state.det_extrema();
    row.detJ_min = lo;
    row.detJ_max = hi;
    row.picard_iters = sr.stats.iterations;
    row.picard_residual = sr.stats.final_residual();
    row.picard_residuals = sr.stats.residuals;
    row.window_start_energy = e_start;
    row.window_end_energy = e_end;
    row.increment_energy = inc;
    row.window_dissipation = d_win;
    row.total_power = fl.dot(v);
    row.external_power = fe.dot(v);
    row.stab_dissipation = q.dot(op->stabilization() * q);
    row.hydro_force = rigid.m * (next.xi - z.xi) / cfg.dt - external_force;
    res.rows.push_back(std::move(row));

    z = std::move(next);
    if (on_snapshot && cfg.snapshot_stride > 0 && step % cfg.snapshot_stride == 0)
      on_snapshot({step, t, mesh, z, phys.detJ});
  }
  res.mesh = std::move(mesh);
  res.final_state = std::move(z);
  res.final_rigid = rigid;
  return res;
}

} // namespace fsislip
