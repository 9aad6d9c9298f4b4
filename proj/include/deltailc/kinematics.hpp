#pragma once

#include <vector>

#include "deltailc/robot_params.hpp"
#include "deltailc/types.hpp"

namespace deltailc {

/// Center of the moving platform. The platform only translates.
struct MpPose {
  Vec3 p = Vec3::Zero();
};

struct JointState {
  Vec3 theta = Vec3::Zero();
  Vec3 theta_dot = Vec3::Zero();
};

/// Normalised discriminant below which a chain counts as fully stretched.
inline constexpr double kSingularTolerance = 1e-10;
inline constexpr double kDefaultMaxCondition = 1e6;

// Chain i (0,1,2) lies in the vertical plane at azimuth base_yaw + i*120deg.
// Joint angle 0 is a horizontal upper arm, positive rotates the elbow down.
Mat3 chain_rotation(int chain, const RobotParams& params);
Vec3 base_joint(int chain, const RobotParams& params);
Vec3 joint_axis(int chain, const RobotParams& params);
Vec3 elbow_point(int chain, double theta, const RobotParams& params);
Vec3 elbow_velocity_gain(int chain, double theta, const RobotParams& params);   // dE/dtheta
Vec3 elbow_curvature_gain(int chain, double theta, const RobotParams& params);  // d2E/dtheta2
/// Vector from platform center to the chain's (mid-pair) attachment point.
Vec3 platform_offset(int chain, const RobotParams& params);

/// Elbow-out inverse kinematics.
/// Throws UnreachablePose or SingularConfiguration.
Vec3 inverse_kinematics(const MpPose& pose, const RobotParams& params);

/// Lower intersection of the three elbow spheres. Throws NoIntersection.
MpPose forward_kinematics(const Vec3& theta, const RobotParams& params);

/// J with pdot = J * theta_dot. Throws SingularJacobian when cond(J) > max_condition.
Mat3 jacobian(const Vec3& theta, const RobotParams& params,
              double max_condition = kDefaultMaxCondition);

double condition_number(const Mat3& m);

/// Position, Jacobian and its time derivative at one state, sharing a single FK.
struct KinematicTerms {
  Vec3 p;
  Mat3 J;
  Mat3 J_dot;
};
KinematicTerms kinematic_terms(const Vec3& theta, const Vec3& theta_dot, const RobotParams& params,
                               double max_condition = kDefaultMaxCondition);

/// Maps a task-space sample (p, pdot, pddot) to joint space exactly.
struct JointSample {
  Vec3 theta;
  Vec3 theta_dot;
  Vec3 theta_ddot;
};
JointSample task_to_joint(const Vec3& p, const Vec3& p_dot, const Vec3& p_ddot,
                          const RobotParams& params);

struct GridSpec {
  double half_width = 0.4;  // square [-hw, hw]^2 per plane [m]
  double spacing = 0.02;    // [m]
  std::vector<double> z_planes{-1.05, -0.95, -0.85, -0.75, -0.65};
};

struct WorkspaceSample {
  MpPose pose;
  double weight = 0.0;  // area represented by the sample [m^2]
};

/// Throws InvalidArgument for a non-positive spacing and EmptyWorkspace when
/// nothing is reachable.
std::vector<WorkspaceSample> sample_workspace(const RobotParams& params, const GridSpec& grid);

/// Evenly spaced plane list covering [z_min, z_max].
std::vector<double> z_plane_range(double z_min, double z_max, int count);

}  // namespace deltailc
