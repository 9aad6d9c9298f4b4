#pragma once

#include "deltailc/kinematics.hpp"
#include "deltailc/robot_params.hpp"
#include "deltailc/types.hpp"

namespace deltailc {

/// Relative deviations applied to the true plant (0.05 means +5%).
struct Perturbation {
  double m_p = 0.0;
  double rho_r = 0.0;
  double m_lump = 0.0;
  double I_M = 0.0;

  bool is_zero() const { return m_p == 0.0 && rho_r == 0.0 && m_lump == 0.0 && I_M == 0.0; }
};

/// Lumped rigid model of the robot with geared motors. Each lower arm is split
/// half to the elbow and half to the platform.
struct RigidModel {
  RobotParams params;
  Perturbation perturbation;
  bool include_motor_damping = false;

  /// Model used by the controllers: no perturbation, no damping.
  static RigidModel nominal(const RobotParams& params);
  /// Default mismatched plant: +5% platform mass, +5% arm density, rotor damping on.
  static RigidModel true_plant(const RobotParams& params);

  /// Parameters with the perturbation applied.
  RobotParams effective_params() const;
  void validate() const;
};

/// Motor-side terms of M(theta) thetaddot + (C + B) thetadot + G = u.
struct DynamicsTerms {
  Mat3 M = Mat3::Zero();
  Mat3 C = Mat3::Zero();
  Vec3 G = Vec3::Zero();
  Mat3 B = Mat3::Zero();
};

/// Scalar inertial constants of the lumped model.
struct LumpedConstants {
  double arm_inertia = 0.0;     // per upper arm about its joint, elbow mass included [kg m^2]
  double moving_mass = 0.0;     // platform plus half of every lower arm [kg]
  double arm_gravity = 0.0;     // gravity moment coefficient of one arm [N m]
};
LumpedConstants lumped_constants(const RobotParams& params);

inline constexpr double kMassConditionBound = 1e8;

DynamicsTerms compute_terms(const RigidModel& model, const JointState& state);
/// Same, reusing kinematics already evaluated at this state (the geometry is
/// never perturbed, so nominal and true models can share it).
DynamicsTerms compute_terms(const RigidModel& model, const JointState& state,
                            const KinematicTerms& kin);

/// thetaddot = M^-1 (u - C thetadot - B thetadot - G). Throws SingularMass.
Vec3 forward_dynamics(const RigidModel& model, const JointState& state, const Vec3& u);
Vec3 forward_dynamics(const DynamicsTerms& terms, const JointState& state, const Vec3& u);

/// u = M thetaddot + C thetadot + B thetadot + G.
Vec3 inverse_dynamics(const RigidModel& model, const JointState& state, const Vec3& theta_ddot);
Vec3 inverse_dynamics(const DynamicsTerms& terms, const JointState& state, const Vec3& theta_ddot);

/// Kinetic plus potential energy referred to the motor side.
double mechanical_energy(const RigidModel& model, const JointState& state);

}  // namespace deltailc
