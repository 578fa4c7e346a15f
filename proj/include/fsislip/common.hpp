#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsislip {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Third-order tensor stored as two 2x2 slices: t[k](i, j).
using Tensor3 = std::array<Mat2, 2>;

inline Tensor3 zero_tensor3() { return {Mat2::Zero(), Mat2::Zero()}; }

/// 2D cross product of an out-of-plane scalar with an in-plane vector, w e_z x v.
inline Vec2 perp(double w, const Vec2& v) { return {-w * v.y(), w * v.x()}; }

/// Scalar 2D cross product a x b.
inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

inline Mat2 rotation(double theta)
{
  Mat2 q;
  q << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return q;
}

// =============================================================================
// Errors
// =============================================================================

/// Invalid input parameter; field() names the offending parameter.
class ParameterError : public std::invalid_argument {
public:
  ParameterError(std::string field, const std::string& what)
      : std::invalid_argument(what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

class IndexError : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

/// The flow map lost invertibility or volume preservation.
class TransformDegeneracyError : public std::runtime_error {
public:
  TransformDegeneracyError(const std::string& what, std::size_t node, double det)
      : std::runtime_error(what), node_(node), det_(det) {}
  std::size_t worst_node() const noexcept { return node_; }
  double det() const noexcept { return det_; }

private:
  std::size_t node_;
  double det_;
};

/// Linear solve failed to reach its residual target.
class SolverError : public std::runtime_error {
public:
  SolverError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), history_(std::move(history)) {}
  const std::vector<double>& residual_history() const noexcept { return history_; }

private:
  std::vector<double> history_;
};

/// Picard iteration hit its iteration cap (or blew up) inside one time step.
class PicardNonconvergenceError : public std::runtime_error {
public:
  PicardNonconvergenceError(const std::string& what, std::vector<double> residuals)
      : std::runtime_error(what), residuals_(std::move(residuals)) {}
  const std::vector<double>& residuals() const noexcept { return residuals_; }

private:
  std::vector<double> residuals_;
};

/// Error raised inside the time loop, tagged with the step it happened in.
class SimulationError : public std::runtime_error {
public:
  SimulationError(const std::string& what, std::size_t step, bool nonconvergence)
      : std::runtime_error(what), step_(step), nonconvergence_(nonconvergence) {}
  std::size_t step() const noexcept { return step_; }
  bool is_nonconvergence() const noexcept { return nonconvergence_; }

private:
  std::size_t step_;
  bool nonconvergence_;
};

} // namespace fsislip
