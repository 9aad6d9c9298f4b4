#include "deltailc/robot_params.hpp"

#include <cmath>

#include "deltailc/errors.hpp"
#include "deltailc/types.hpp"

namespace deltailc {

namespace {
void require(bool ok, const char* what) {
  if (!ok) fail(ErrorKind::InvalidArgument, std::string("RobotParams: ") + what);
}
}  // namespace

void RobotParams::validate() const {
  require(l1 > 0 && l2 > 0, "arm lengths must be positive");
  require(D1 > 0 && d1 > 0 && D2 > 0 && d2 > 0, "diameters must be positive");
  require(d1 < D1 && d2 < D2, "inner diameter must be below outer diameter");
  require(e_a > 0 && e_b > 0, "base/platform radii must be positive");
  require(E_r > 0 && rho_r > 0, "modulus and density must be positive");
  require(nu_r > -1.0 && nu_r < 0.5, "Poisson ratio out of range");
  require(m_p > 0 && m_lump > 0, "masses must be positive");
  require(I_px > 0 && I_py > 0 && I_pz > 0, "platform inertia must be positive");
  require(n_gear >= 1, "gear ratio must be >= 1");
  require(I_M > 0, "rotor inertia must be positive");
  require(B_damp >= 0, "rotor damping must be nonnegative");
  require(K_t > 0, "torque constant must be positive");
  require(servo_stiffness >= 0, "servo stiffness must be nonnegative");
  require(pair_half_width > 0, "lower-arm pair half width must be positive");
  require(gravity >= 0, "gravity must be nonnegative");
  require(std::isfinite(base_yaw), "base yaw must be finite");
}

double RobotParams::upper_arm_area() const { return kPi / 4.0 * (D1 * D1 - d1 * d1); }
double RobotParams::lower_arm_area() const { return kPi / 4.0 * (D2 * D2 - d2 * d2); }
double RobotParams::upper_arm_mass() const { return rho_r * upper_arm_area() * l1; }
double RobotParams::lower_arm_mass() const { return rho_r * lower_arm_area() * l2; }

double RobotParams::effective_servo_stiffness() const {
  return servo_stiffness > 0 ? servo_stiffness : kDefaultServoStiffness;
}

}  // namespace deltailc
