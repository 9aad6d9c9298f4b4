#pragma once

#include <string>

namespace deltailc {

/// Geometric, inertial and material constants of the Delta robot plus the
/// geared servo drive. Defaults reproduce the reference machine; quantities
/// that the reference table leaves open (drive constants, servo stiffness,
/// lower-arm pair spacing) carry documented representative values.
struct RobotParams {
  double l1 = 0.375;    // upper arm length [m]
  double l2 = 0.95;     // lower arm length [m]
  double D1 = 0.058;    // upper arm outer diameter [m]
  double d1 = 0.048;    // upper arm inner diameter [m]
  double D2 = 0.016;    // lower arm outer diameter [m]
  double d2 = 0.012;    // lower arm inner diameter [m]
  double e_a = 0.164;   // fixed base radius [m]
  double e_b = 0.051;   // moving platform radius [m]
  double E_r = 71e9;    // elastic modulus [Pa]
  double rho_r = 2770;  // arm density [kg/m^3]
  double nu_r = 0.3;    // Poisson ratio
  double m_p = 0.676;   // moving platform mass [kg]
  double m_lump = 0.157;  // lumped elbow mass [kg]
  double I_px = 2.25e-6;  // platform inertia [kg m^2]
  double I_py = 2.25e-6;
  double I_pz = 4.39e-6;
  double n_gear = 15;

  double I_M = 8.0e-3;   // rotor inertia per motor [kg m^2]
  double B_damp = 0.05;  // rotor viscous damping [N m s/rad]
  double K_t = 1.6;      // torque constant [N m/A]

  double servo_stiffness = 0.0;   // joint-side drive stiffness [N m/rad]; 0 = default
  double pair_half_width = 0.04;  // half spacing of each lower-arm pair [m]
  double base_yaw = 0.0;          // rotation of the whole assembly about z [rad]
  double gravity = 9.81;

  /// Throws InvalidArgument when an invariant is broken.
  void validate() const;

  double upper_arm_area() const;
  double lower_arm_area() const;
  double upper_arm_mass() const;
  /// Mass of one lower arm (six in total).
  double lower_arm_mass() const;
  double effective_servo_stiffness() const;
};

/// Calibrated joint-side drive stiffness placing the first natural frequency
/// of the central pose (z = -0.8151 m) at 20 Hz.
inline constexpr double kDefaultServoStiffness = 6127.056267;

}  // namespace deltailc
