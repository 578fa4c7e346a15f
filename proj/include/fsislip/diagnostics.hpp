#pragma once

// Energy bookkeeping, operator self-checks, and the Taylor-Couette study.

#include "fsislip/fixed_point.hpp"

#include <random>

namespace fsislip {

// =============================================================================
// Energy balance
// =============================================================================

struct EnergyReport {
  double t = 0.0;
  double kinetic = 0.0;
  double dissipation_rate = 0.0;
  double external_power = 0.0;
  double balance_residual = 0.0;
};

/// Per step, in the inner product of the step's reference configuration:
/// E_end - E_start + 1/2 |z_n - z_{n-1}|^2 - dt (P - D - S), where P is the
/// power of the full load of the final solve, D the physical dissipation and S
/// the pressure-stabilization dissipation. Energy units.
inline std::vector<EnergyReport> energy_balance(const TrajectoryRecord& traj)
{
  std::vector<EnergyReport> out;
  out.reserve(traj.size());
  for (std::size_t n = 0; n < traj.size(); ++n) {
    const auto& r = traj[n];
    EnergyReport e;
    e.t = r.t;
    e.kinetic = r.energy;
    e.dissipation_rate = r.dissipation;
    e.external_power = r.external_power;
    if (n > 0) {
      const double dt = r.t - traj[n - 1].t;
      e.balance_residual = (r.window_end_energy - r.window_start_energy + r.increment_energy) -
                           dt * (r.total_power - r.window_dissipation - r.stab_dissipation);
    }
    out.push_back(e);
  }
  return out;
}

// =============================================================================
// Operator self-check
// =============================================================================

struct SelfCheckReport {
  std::size_t samples = 0;
  double symmetry = 0.0;        ///< max |<Az,v> - <Av,z>| / (|Az||v| + |Av||z|)
  double positivity = 0.0;      ///< max of -<Az,z> / |A||z|^2, clipped at zero
  double energy_identity = 0.0; ///< max |<Az,z> - D(z)| / D(z)
  double min_quadratic = 0.0;   ///< smallest <Az,z> seen
};

using OperatorApply = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Seeded random states in the constrained space (free rigid mode).
inline std::vector<CoupledState> random_states(const Mesh& mesh, std::size_t count, std::uint64_t seed)
{
  const DofMap d = build_dof_map(mesh);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<CoupledState> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Eigen::VectorXd u(static_cast<long>(d.n_velocity));
    for (long i = 0; i < u.size(); ++i)
      u(i) = uni(rng);
    CoupledState z = CoupledState::zero(mesh.num_nodes());
    z.set_full_velocity(d.E * u + d.e0);
    out.push_back(std::move(z));
  }
  return out;
}

inline SelfCheckReport operator_selfcheck(const Mesh& mesh, double mu, double beta, std::uint64_t seed,
                                          std::size_t samples = 100, OperatorApply apply = {})
{
  const OperatorA a = build_operator_A(mesh, mu, beta);
  if (!apply)
    apply = [&a](const Eigen::VectorXd& z) { return a.apply(z); };
  const double a_norm = Eigen::VectorXd(a.matrix.cwiseAbs() * Eigen::VectorXd::Ones(a.matrix.cols())).maxCoeff();

  const auto zs = random_states(mesh, samples, seed);
  const auto vs = random_states(mesh, samples, seed ^ 0x9e3779b97f4a7c15ULL);
  SelfCheckReport rep;
  rep.samples = samples;
  rep.min_quadratic = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < samples; ++k) {
    const Eigen::VectorXd z = zs[k].full_velocity();
    const Eigen::VectorXd v = vs[k].full_velocity();
    const Eigen::VectorXd az = apply(z);
    const Eigen::VectorXd av = apply(v);
    const double azv = az.dot(v), avz = av.dot(z);
    const double scale = az.norm() * v.norm() + av.norm() * z.norm();
    if (scale > 0.0)
      rep.symmetry = std::max(rep.symmetry, std::abs(azv - avz) / scale);

    const double azz = az.dot(z);
    rep.min_quadratic = std::min(rep.min_quadratic, azz);
    if (azz < 0.0)
      rep.positivity = std::max(rep.positivity, -azz / (a_norm * z.squaredNorm()));

    const double d = dissipation_rate(mesh, zs[k], mu, beta);
    if (d > 0.0)
      rep.energy_identity = std::max(rep.energy_identity, std::abs(azz - d) / d);
    else
      rep.energy_identity = std::max(rep.energy_identity, std::abs(azz));
  }
  return rep;
}

// =============================================================================
// Taylor-Couette with Navier slip
// =============================================================================

struct CouetteParams {
  double r_body = 0.5;
  double r_outer = 2.0;
  double mu = 1.0;
  double beta = 1.0; ///< negative means no-slip
  double w0 = 1.0;
  std::size_t base_radial = 8;
  std::size_t base_angular = 32;
  double base_grading = 0.8;
};

/// u_theta(r) = A r + B / r: zero at R, and 2 mu B / r^2 = beta (w0 r - u_theta(r))
/// at the body (the no-slip limit when beta < 0).
inline std::pair<double, double> couette_constants(const CouetteParams& p)
{
  const double r = p.r_body, R = p.r_outer;
  const double B = p.beta < 0.0 ? p.w0 * r / (1.0 / r - r / (R * R))
                                : p.beta * p.w0 * r / (2.0 * p.mu / (r * r) + p.beta * (1.0 / r - r / (R * R)));
  return {-B / (R * R), B};
}

inline Vec2 couette_velocity(const Vec2& y, const CouetteParams& p)
{
  const auto [A, B] = couette_constants(p);
  const double r = y.norm();
  const double ut = A * r + B / r;
  return Vec2(-y.y(), y.x()) * (ut / r);
}

inline AnnulusParams couette_mesh_params(const CouetteParams& p, std::size_t level)
{
  const double f = std::pow(2.0, static_cast<double>(level));
  AnnulusParams m;
  m.r_body = p.r_body;
  m.r_outer = p.r_outer;
  m.n_radial = p.base_radial << level;
  m.n_angular = p.base_angular << level;
  m.grading = std::pow(p.base_grading, 1.0 / f);
  return m;
}

/// Steady solve with the body held in place and spinning at w0.
inline CoupledState solve_couette(const Mesh& mesh, const CouetteParams& p)
{
  SaddleParams sp;
  sp.inv_dt = 0.0;
  sp.mu = p.mu;
  sp.beta = p.beta < 0.0 ? 0.0 : p.beta;
  sp.mode = RigidMode::Prescribed;
  sp.w_fixed = p.w0;
  if (p.beta < 0.0)
    throw ParameterError("beta", "the discrete Couette solve needs a finite beta");
  const auto op = std::make_shared<const SaddleOperator>(mesh, sp);
  const auto zero = CoupledState::zero(mesh.num_nodes());
  const auto sys = assemble_coupled_system(op, zero, VectorField(mesh.num_nodes(), Vec2::Zero()), Vec2::Zero(), 0.0);
  return solve_coupled(sys);
}

/// L2 norm of (u_h - u_exact) with the 7-point rule, and of u_exact.
inline std::pair<double, double> couette_l2(const Mesh& mesh, const VectorField& u, const CouetteParams& exact)
{
  double err = 0.0, ref = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const P1Element e(mesh, t);
    for (const auto& qp : kTriangleRule7) {
      const Vec2 ue = couette_velocity(e.point(qp.bary), exact);
      const Vec2 uh = e.interpolate<Vec2>(u, qp.bary);
      err += qp.weight * e.area * (uh - ue).squaredNorm();
      ref += qp.weight * e.area * ue.squaredNorm();
    }
  }
  return {std::sqrt(err), std::sqrt(ref)};
}

struct CouetteLevel {
  std::size_t level = 0;
  std::size_t n_radial = 0;
  std::size_t n_angular = 0;
  double h_max = 0.0;
  double l2_error = 0.0;
  double relative_error = 0.0;
  double order = std::numeric_limits<double>::quiet_NaN(); ///< vs the previous level
};

inline std::vector<CouetteLevel> taylor_couette_study(std::size_t levels, const CouetteParams& p = {})
{
  if (levels < 1)
    throw ParameterError("levels", "need at least one level");
  std::vector<CouetteLevel> out;
  for (std::size_t l = 0; l < levels; ++l) {
    const auto mp = couette_mesh_params(p, l);
    const Mesh mesh = generate_annulus_mesh(mp);
    const CoupledState z = solve_couette(mesh, p);
    const auto [err, ref] = couette_l2(mesh, z.z_F, p);
    CouetteLevel lv;
    lv.level = l;
    lv.n_radial = mp.n_radial;
    lv.n_angular = mp.n_angular;
    lv.h_max = mesh.h_max;
    lv.l2_error = err;
    lv.relative_error = err / ref;
    if (!out.empty())
      lv.order = std::log(out.back().l2_error / err) / std::log(out.back().h_max / lv.h_max);
    out.push_back(lv);
  }
  return out;
}

} // namespace fsislip
