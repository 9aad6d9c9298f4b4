#pragma once

#include <string>

#include "deltailc/kinematics.hpp"
#include "deltailc/robot_params.hpp"
#include "deltailc/types.hpp"

namespace deltailc {

/// Joint-space reference on a uniform grid, samples in rows.
struct ReferenceTrajectory {
  double dt = 1e-3;
  Mat theta;       // N x 3 [rad]
  Mat theta_dot;   // N x 3 [rad/s]
  Mat theta_ddot;  // N x 3 [rad/s^2]
  Mat p;           // N x 3 task-space path [m], may be empty for imported references
  Vec3 origin = Vec3::Zero();

  int size() const { return static_cast<int>(theta.rows()); }
  double duration() const { return size() > 0 ? (size() - 1) * dt : 0.0; }
  double time(int k) const { return k * dt; }
  JointSample sample(int k) const;
  double max_speed() const;
  /// Throws InvalidArgument when the columns disagree in length or dt <= 0.
  void validate() const;
};

/// Minimum-jerk time scaling s(tau) on [0,1] and its first two derivatives in tau.
struct Scaling {
  double s, ds, dds;
};
Scaling quintic_scaling(double tau);

/// Door-shaped path: up by lift, across by span along +x, down again.
ReferenceTrajectory pick_and_place(const RobotParams& params, double span, double lift,
                                   double cycle_time, double z_plane, double dt = 1e-3);

/// Closed square of the given side centred on the axis, starting at a corner.
ReferenceTrajectory square_trajectory(const RobotParams& params, double side, double z_plane,
                                      double cycle_time, double dt = 1e-3);

/// Polar butterfly curve r = e^cos(phi) - 2 cos(4 phi) over one period, scaled
/// so that one unit of r is `scale` metres, traversed once with a rest-to-rest
/// quintic speed profile along arc length.
ReferenceTrajectory butterfly_trajectory(const RobotParams& params, double scale, double z_plane,
                                         double cycle_time, double dt = 1e-3);

/// Butterfly curve point in curve units for phi in [0, 2 pi].
Eigen::Vector2d butterfly_point(double phi);

/// Builds a joint reference from a task-space path sampled with its derivatives.
ReferenceTrajectory from_task_space(const RobotParams& params, const Mat& p, const Mat& p_dot,
                                    const Mat& p_ddot, double dt);

/// CSV with header t,theta1,theta2,theta3,dtheta1..3,ddtheta1..3.
void write_trajectory_csv(const ReferenceTrajectory& ref, const std::string& path);
ReferenceTrajectory read_trajectory_csv(const std::string& path);

}  // namespace deltailc
