#pragma once

#include <Eigen/Core>
#include <memory>
#include <vector>

#include "driftsim/types.hpp"

namespace driftsim {

/// A point on the reference path.
struct ReferencePoint {
  double s = 0.0;         ///< arc length [m]
  Eigen::Vector2d position{0.0, 0.0};
  double heading = 0.0;   ///< path tangent angle [rad]
  double curvature = 0.0; ///< signed curvature, see ReferencePath
  double speed = 0.0;     ///< reference speed [m/s]
};

/// Immutable reference path parameterized by arc length.
///
/// Sign convention: heading'(s) = -curvature(s), so curvature > 0 describes a
/// clockwise (right-turning) path. With the lateral error measured positive to
/// the left of the tangent, the yaw-rate feedback law is stabilizing for both
/// turn directions.
class ReferencePath {
 public:
  virtual ~ReferencePath() = default;

  virtual double length() const = 0;
  virtual double curvature(double s) const = 0;
  virtual double heading(double s) const = 0;
  virtual Eigen::Vector2d position(double s) const = 0;
  virtual double speed(double s) const = 0;

  ReferencePoint point(double s) const {
    return {s, position(s), heading(s), curvature(s), speed(s)};
  }
};

/// Straight line from an anchor pose.
std::shared_ptr<const ReferencePath> make_line_path(Eigen::Vector2d origin, double heading0,
                                                    double length, double speed);

/// Constant-curvature path. curvature > 0 turns clockwise; the nominal length
/// may exceed one revolution (the parameterization just keeps winding).
std::shared_ptr<const ReferencePath> make_circle_path(Eigen::Vector2d origin, double heading0,
                                                      double curvature, double length,
                                                      double speed);

/// Curvature varying linearly from kappa_start to kappa_end over arc_length,
/// then held at kappa_end (circular continuation) up to the total length.
std::shared_ptr<const ReferencePath> make_linear_curvature_path(
    Eigen::Vector2d origin, double heading0, double kappa_start, double kappa_end,
    double arc_length, double total_length, double speed);

/// Nearest path point to `position`, searched within +/-20 m of s_hint and
/// polished by parabolic refinement of the squared distance.
/// Throws std::runtime_error when the local search fails to bracket a minimum
/// away from the path endpoints.
ReferencePoint project(const Eigen::Vector2d& position, const ReferencePath& path,
                       double s_hint);

/// Signed lateral offset of `position` from `ref`: positive left of the tangent.
double lateral_offset(const Eigen::Vector2d& position, const ReferencePoint& ref);

}  // namespace driftsim
