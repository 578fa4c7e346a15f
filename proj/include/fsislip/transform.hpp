#pragma once

/**
 * @file transform.hpp
 * @brief Local volume-preserving change of variables that carries the fixed
 * reference annulus onto the current fluid domain.
 *
 * The carrier velocity field is the perpendicular gradient of a cut-off rigid
 * stream function, so it is divergence free by construction and coincides
 * with the rigid motion next to the body and vanishes next to the wall. The
 * flow map X and its first and second spatial derivatives are integrated per
 * node with classical RK4 (the derivatives through the variational
 * equations); metric tensors and Christoffel symbols follow algebraically.
 */

#include "fsislip/geometry.hpp"
#include "fsislip/jet.hpp"

#include <concepts>
#include <functional>
#include <thread>

namespace fsislip {

// =============================================================================
// Rigid body state
// =============================================================================

struct RigidState {
  Vec2 eta = Vec2::Zero(); ///< translation velocity [m/s]
  double omega = 0.0;      ///< angular velocity [rad/s]
  double theta = 0.0;      ///< accumulated rotation angle of Q(t) [rad]
  Vec2 x_c = Vec2::Zero(); ///< body center [m]
  double m = 1.0;          ///< mass [kg]
  double I_moment = 1.0;   ///< scalar moment of inertia [kg m^2]

  static RigidState homogeneous_disk(double rho_b, double r_body, const Vec2& center)
  {
    if (!(rho_b > 0.0))
      throw ParameterError("rho_b", "body density must be positive");
    if (!(r_body > 0.0))
      throw ParameterError("r_body", "r_body must be positive");
    RigidState s;
    s.x_c = center;
    s.m = rho_b * std::numbers::pi * r_body * r_body;
    s.I_moment = 0.5 * s.m * r_body * r_body;
    return s;
  }

  Mat2 Q() const { return rotation(theta); }

  /// Rigid velocity eta + omega x (x - x_c).
  Vec2 velocity_at(const Vec2& x) const { return eta + perp(omega, x - x_c); }
};

// =============================================================================
// Cutoff and carrier field
// =============================================================================

/// Degree-5 smoothstep in the relative position s = A / (A + B) between the
/// body band (A = |x - x_c| - r_body - delta0/4) and the wall band
/// (B = (R^2 - |x - w|^2) / 2R - b0, zero exactly delta0/4 inside the wall).
/// The cutoff is 1 where A <= 0 and 0 where B <= 0. Where the gap is wide the
/// transition spreads over the whole fluid instead of a thin shell.
struct CutoffProfile {
  double delta0 = 0.0;
  double body_radius = 0.0;
  double wall_radius = 1.0;
  Vec2 wall_center = Vec2::Zero();
  double inner_radius = 0.0; ///< body_radius + delta0 / 4
  double wall_offset = 0.0;  ///< b0
  int degree = 5;

  static CutoffProfile for_domain(double r_body, double r_outer, double delta0)
  {
    if (!(delta0 > 0.0))
      throw ParameterError("delta0", "delta0 must be positive");
    if (!(r_body > 0.0) || !(r_outer > r_body))
      throw ParameterError("r_outer", "need 0 < r_body < r_outer");
    CutoffProfile c;
    c.delta0 = delta0;
    c.body_radius = r_body;
    c.wall_radius = r_outer;
    c.inner_radius = r_body + 0.25 * delta0;
    const double d = 0.25 * delta0;
    c.wall_offset = d - d * d / (2.0 * r_outer);
    return c;
  }

  /// Smoothstep p(s) = 10 s^3 - 15 s^4 + 6 s^5 and its first three derivatives.
  static std::array<double, 4> smoothstep(double s)
  {
    const double s2 = s * s;
    return {s2 * s * (10.0 - 15.0 * s + 6.0 * s2), 30.0 * s2 * (1.0 - s) * (1.0 - s),
            60.0 * s - 180.0 * s2 + 120.0 * s2 * s, 60.0 - 360.0 * s + 360.0 * s2};
  }

  double body_distance(const Vec2& x, const Vec2& body_center) const
  {
    return (x - body_center).norm() - inner_radius;
  }

  double wall_distance(const Vec2& x) const
  {
    return (wall_radius * wall_radius - (x - wall_center).squaredNorm()) / (2.0 * wall_radius) - wall_offset;
  }

  /// Cutoff with derivatives up to third order at x.
  Jet jet(const Vec2& x, const Vec2& body_center) const
  {
    const double a0 = body_distance(x, body_center);
    if (a0 <= 0.0)
      return Jet::constant(1.0);
    const double b0 = wall_distance(x);
    if (b0 <= 0.0)
      return Jet::constant(0.0);

    const Vec2 d = x - body_center;
    Jet r2;
    r2.v = d.squaredNorm();
    r2.d1 = 2.0 * d;
    r2.d2 = 2.0 * Mat2::Identity();
    const double r = std::sqrt(r2.v);
    Jet a = compose(r2, r, 0.5 / r, -0.25 / (r * r2.v), 0.375 / (r2.v * r2.v * r));
    a.v = a0;

    Jet b;
    b.v = b0;
    b.d1 = -(x - wall_center) / wall_radius;
    b.d2 = -Mat2::Identity() / wall_radius;

    const Jet sum = a + b;
    const double q = 1.0 / sum.v;
    const Jet s = a * compose(sum, q, -q * q, 2.0 * q * q * q, -6.0 * q * q * q * q);
    const auto p = smoothstep(s.v);
    return compose(s, 1.0 - p[0], -p[1], -p[2], -p[3]);
  }

  double value(const Vec2& x, const Vec2& body_center) const
  {
    const double a0 = body_distance(x, body_center);
    if (a0 <= 0.0)
      return 1.0;
    const double b0 = wall_distance(x);
    if (b0 <= 0.0)
      return 0.0;
    return 1.0 - smoothstep(a0 / (a0 + b0))[0];
  }
};

/// Point sample of a velocity field: value, grad(k, l) = d_l v_k, hess[k](l, m).
struct FieldSample {
  Vec2 value = Vec2::Zero();
  Mat2 grad = Mat2::Zero();
  Tensor3 hess = zero_tensor3();
};

template <class F>
concept VelocityField = requires(const F& f, const Vec2& x) {
  { f.sample(x) } -> std::convertible_to<FieldSample>;
};

/// Perpendicular gradient of chi(x) * psi_rigid(x).
class LambdaField {
public:
  LambdaField(const Vec2& eta, double omega, const Vec2& center, const CutoffProfile& cutoff)
      : eta_(eta), omega_(omega), center_(center), cutoff_(cutoff) {}

  FieldSample sample(const Vec2& x) const
  {
    FieldSample s;
    const Vec2 d = x - center_;
    if (cutoff_.body_distance(x, center_) <= 0.0) {
      s.value = eta_ + perp(omega_, d);
      s.grad << 0.0, -omega_, omega_, 0.0;
      return s;
    }
    if (cutoff_.wall_distance(x) <= 0.0)
      return s;

    Jet psi;
    psi.v = eta_.x() * d.y() - eta_.y() * d.x() - 0.5 * omega_ * d.squaredNorm();
    psi.d1 = Vec2(-eta_.y() - omega_ * d.x(), eta_.x() - omega_ * d.y());
    psi.d2 = -omega_ * Mat2::Identity();
    const Jet phi = cutoff_.jet(x, center_) * psi;

    // Lambda = (d_2 phi, -d_1 phi)
    s.value = Vec2(phi.d1(1), -phi.d1(0));
    for (int l = 0; l < 2; ++l) {
      s.grad(0, l) = phi.d2(1, l);
      s.grad(1, l) = -phi.d2(0, l);
    }
    s.hess[0] = phi.d3[1];
    s.hess[1] = -phi.d3[0];
    return s;
  }

  const Vec2& eta() const { return eta_; }
  double omega() const { return omega_; }
  const Vec2& center() const { return center_; }
  const CutoffProfile& cutoff() const { return cutoff_; }

private:
  Vec2 eta_;
  double omega_;
  Vec2 center_;
  CutoffProfile cutoff_;
};

inline LambdaField build_lambda(const RigidState& rigid, const CutoffProfile& cutoff)
{
  return LambdaField(rigid.eta, rigid.omega, rigid.x_c, cutoff);
}

// =============================================================================
// Flow map state
// =============================================================================

struct NodeTransform {
  Vec2 X = Vec2::Zero();
  Mat2 J_X = Mat2::Identity();     ///< dX_k / dy_i
  Tensor3 H_X = zero_tensor3();    ///< H_X[l](i, j) = d^2 X_l / dy_i dy_j
  Mat2 J_Y = Mat2::Identity();     ///< inverse Jacobian at X
  Vec2 Y_dot = Vec2::Zero();       ///< -J_Y Lambda(X)
  Mat2 grad_X_dot = Mat2::Zero();  ///< (k, j) = d_j Xdot_k = grad Lambda(X) J_X
  Mat2 g_cov = Mat2::Identity();
  Mat2 g_con = Mat2::Identity();
  Tensor3 gamma = zero_tensor3();  ///< gamma[k](i, j) = Gamma^k_ij
};

struct TransformState {
  double t = 0.0;
  std::vector<NodeTransform> nodes;

  static TransformState identity(const Mesh& mesh, double t = 0.0)
  {
    TransformState s;
    s.t = t;
    s.nodes.resize(mesh.num_nodes());
    for (std::size_t k = 0; k < mesh.num_nodes(); ++k)
      s.nodes[k].X = mesh.nodes[k];
    return s;
  }

  std::pair<double, double> det_extrema() const
  {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& n : nodes) {
      const double d = n.J_X.determinant();
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    return {lo, hi};
  }
};

struct MetricData {
  Mat2 g_cov;
  Mat2 g_con;
  Tensor3 gamma;
};

inline Mat2 checked_inverse(const Mat2& j)
{
  const double det = j.determinant();
  if (!std::isfinite(det) || std::abs(det) < 1e-300)
    throw TransformDegeneracyError("singular flow-map Jacobian", 0, det);
  return j.inverse();
}

/// Christoffel symbols by the direct identity Gamma^k_ij = Y_k,l X_l,ij.
/// H_X is symmetrized first so the lower-index symmetry is exact.
inline MetricData metric_and_christoffel(const Mat2& J_X, const Tensor3& H_X, const Mat2& J_Y)
{
  checked_inverse(J_X);
  MetricData m;
  m.g_cov = J_X.transpose() * J_X;
  m.g_con = J_Y * J_Y.transpose();
  Tensor3 hs;
  for (int l = 0; l < 2; ++l)
    hs[l] = 0.5 * (H_X[l] + H_X[l].transpose());
  for (int k = 0; k < 2; ++k)
    m.gamma[k] = J_Y(k, 0) * hs[0] + J_Y(k, 1) * hs[1];
  return m;
}

inline MetricData metric_and_christoffel(const Mat2& J_X, const Tensor3& H_X)
{
  return metric_and_christoffel(J_X, H_X, checked_inverse(J_X));
}

/// Verification route: Gamma^k_ij = 1/2 g^kl (g_il,j + g_jl,i - g_ij,l), with
/// the metric derivatives g_ij,l = X_k,il X_k,j + X_k,i X_k,jl taken from H_X.
inline Tensor3 christoffel_from_metric(const Mat2& J_X, const Tensor3& H_X)
{
  const Mat2 g = J_X.transpose() * J_X;
  const Mat2 g_inv = checked_inverse(g);
  // dg[l](i, j) = d g_ij / dy_l
  Tensor3 dg = zero_tensor3();
  for (int l = 0; l < 2; ++l)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k)
          dg[l](i, j) += H_X[k](i, l) * J_X(k, j) + J_X(k, i) * H_X[k](j, l);
  Tensor3 gamma = zero_tensor3();
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int l = 0; l < 2; ++l)
          gamma[k](i, j) += 0.5 * g_inv(k, l) * (dg[j](i, l) + dg[i](j, l) - dg[l](i, j));
  return gamma;
}

/// Max |Gamma_direct - Gamma_metric| over all components.
inline double christoffel_discrepancy(const Mat2& J_X, const Tensor3& H_X)
{
  const auto direct = metric_and_christoffel(J_X, H_X).gamma;
  const auto metric = christoffel_from_metric(J_X, H_X);
  double worst = 0.0;
  for (int k = 0; k < 2; ++k)
    worst = std::max(worst, (direct[k] - metric[k]).cwiseAbs().maxCoeff());
  return worst;
}

/// Recompute everything derived from (X, J_X, H_X) given the field sample at X.
inline void finalize_node(NodeTransform& n, const FieldSample& at_X)
{
  n.J_Y = checked_inverse(n.J_X);
  n.Y_dot = -n.J_Y * at_X.value;
  n.grad_X_dot = at_X.grad * n.J_X;
  const auto md = metric_and_christoffel(n.J_X, n.H_X, n.J_Y);
  n.g_cov = md.g_cov;
  n.g_con = md.g_con;
  n.gamma = md.gamma;
}

struct FlowMapOptions {
  double tol_vol = 1e-5;
  unsigned threads = 1;
};

namespace detail {

struct FlowVars {
  Vec2 X;
  Mat2 J;
  Tensor3 H;
};

inline FlowVars flow_rhs(const FlowVars& s, const FieldSample& f)
{
  FlowVars r;
  r.X = f.value;
  r.J = f.grad * s.J;
  for (int k = 0; k < 2; ++k)
    r.H[k] = s.J.transpose() * f.hess[k] * s.J + f.grad(k, 0) * s.H[0] + f.grad(k, 1) * s.H[1];
  return r;
}

inline FlowVars axpy(const FlowVars& s, double a, const FlowVars& d)
{
  return {s.X + a * d.X, s.J + a * d.J, {s.H[0] + a * d.H[0], s.H[1] + a * d.H[1]}};
}

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn)
{
  if (threads <= 1 || n < 2 * threads) {
    for (std::size_t i = 0; i < n; ++i)
      fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi)
      break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i)
        fn(i);
    });
  }
  for (auto& th : pool)
    th.join();
}

} // namespace detail

/// Advance X, J_X, H_X from t to t + dt with RK4. `lambda_at(s)` must return
/// the carrier field at time s. Each node is independent, so threading never
/// changes the result.
template <class LambdaAt>
  requires VelocityField<std::invoke_result_t<const LambdaAt&, double>>
TransformState advance_flow_map(const TransformState& state, const LambdaAt& lambda_at, double t,
                                double dt, const FlowMapOptions& opt = {})
{
  if (!(dt > 0.0))
    throw ParameterError("dt", "dt must be positive");
  const auto f0 = lambda_at(t);
  const auto fh = lambda_at(t + 0.5 * dt);
  const auto f1 = lambda_at(t + dt);

  TransformState next;
  next.t = t + dt;
  next.nodes.resize(state.nodes.size());
  detail::parallel_for(state.nodes.size(), opt.threads, [&](std::size_t i) {
    const auto& n = state.nodes[i];
    const detail::FlowVars s{n.X, n.J_X, n.H_X};
    const auto k1 = detail::flow_rhs(s, f0.sample(s.X));
    const auto s2 = detail::axpy(s, 0.5 * dt, k1);
    const auto k2 = detail::flow_rhs(s2, fh.sample(s2.X));
    const auto s3 = detail::axpy(s, 0.5 * dt, k2);
    const auto k3 = detail::flow_rhs(s3, fh.sample(s3.X));
    const auto s4 = detail::axpy(s, dt, k3);
    const auto k4 = detail::flow_rhs(s4, f1.sample(s4.X));

    auto& out = next.nodes[i];
    out.X = n.X + dt / 6.0 * (k1.X + 2.0 * k2.X + 2.0 * k3.X + k4.X);
    out.J_X = n.J_X + dt / 6.0 * (k1.J + 2.0 * k2.J + 2.0 * k3.J + k4.J);
    for (int k = 0; k < 2; ++k)
      out.H_X[k] = n.H_X[k] + dt / 6.0 * (k1.H[k] + 2.0 * k2.H[k] + 2.0 * k3.H[k] + k4.H[k]);
  });

  std::size_t worst = 0;
  double worst_dev = -1.0;
  for (std::size_t i = 0; i < next.nodes.size(); ++i) {
    const double dev = std::abs(next.nodes[i].J_X.determinant() - 1.0);
    if (!(dev <= worst_dev)) {
      worst_dev = dev;
      worst = i;
    }
  }
  if (!(worst_dev <= opt.tol_vol)) {
    const double det = next.nodes[worst].J_X.determinant();
    throw TransformDegeneracyError("flow map lost volume preservation at node " + std::to_string(worst) +
                                       " (det J_X = " + std::to_string(det) + ")",
                                   worst, det);
  }

  detail::parallel_for(next.nodes.size(), opt.threads,
                       [&](std::size_t i) { finalize_node(next.nodes[i], f1.sample(next.nodes[i].X)); });
  return next;
}

// =============================================================================
// Velocity change of variables
// =============================================================================

/// u~(y) = J_Y(X(y)) u(X(y)), with u sampled at the reference nodes.
inline std::vector<Vec2> pushforward_velocity(const std::vector<Vec2>& u_physical, const TransformState& s)
{
  std::vector<Vec2> out(u_physical.size());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = s.nodes[k].J_Y * u_physical[k];
  return out;
}

/// u(X(y)) = J_X(y) u~(y).
inline std::vector<Vec2> pullback_velocity(const std::vector<Vec2>& u_reference, const TransformState& s)
{
  std::vector<Vec2> out(u_reference.size());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = s.nodes[k].J_X * u_reference[k];
  return out;
}

} // namespace fsislip
