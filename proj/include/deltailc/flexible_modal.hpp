#pragma once

#include <optional>
#include <string>
#include <vector>

#include "deltailc/kinematics.hpp"
#include "deltailc/robot_params.hpp"
#include "deltailc/types.hpp"

namespace deltailc {

// Unconstrained coordinate layout (48):
//   [0,3)   rigid joint angles theta_ri
//   [3,6)   servo deflections theta_fl
//   [6,42)  six lower-arm tip nodes, 6 each: translation(3), rotation(3)
//   [42,48) platform small displacement: translation xi(3), rotation delta_p(3)
// Tip t belongs to chain t / 2.
// Reduced coordinates (30): [theta_ri(3), theta_fl(3), tip rotations(18), platform(6)].
inline constexpr int kUnconstrainedDofs = 48;
inline constexpr int kReducedDofs = 30;
inline constexpr int kClampedDofs = 3;
inline constexpr int kTipCount = 6;
inline constexpr int kPlatformOffset = 42;
inline constexpr int tip_offset(int tip) { return 6 + 6 * tip; }

struct BeamElement {
  double length = 0.0;
  double area = 0.0;
  double Iy = 0.0;
  double Iz = 0.0;
  double J = 0.0;  // polar moment
  double density = 0.0;
  double modulus = 0.0;
  double poisson = 0.3;
  Mat3 orientation = Mat3::Identity();  // columns: local x (axis), y, z in global frame

  /// 12x12 matrices in local coordinates, node order [u1, r1, u2, r2].
  Mat local_mass() const;
  Mat local_stiffness() const;
  /// Same matrices rotated into the global frame.
  Mat global_mass() const;
  Mat global_stiffness() const;
};

/// Tube lower-arm element between two points.
BeamElement lower_arm_element(const RobotParams& params, const Vec3& from, const Vec3& to);

struct UnconstrainedModel {
  Mat M_u;  // 48x48
  Mat K_u;  // 48x48
};

/// Throws InvalidArgument for a non-positive servo stiffness.
UnconstrainedModel assemble_unconstrained(const RobotParams& params, const Vec3& theta,
                                          double servo_stiffness);

/// Attachment point of tip t on the platform relative to its center.
Vec3 tip_attachment(int tip, const RobotParams& params);

/// 48x30 deformation compatibility matrix. Throws RankDeficiency.
Mat build_compatibility(const RobotParams& params, const Vec3& theta);

struct ModalModel {
  Vec frequencies;      // ascending [Hz]
  Mat mode_shapes;      // free coordinates x modes, mass normalised
  Mat participation;    // modes x 3, coupling to clamped joint accelerations
  Vec modal_damping;    // per mode
  Mat connection_z;     // 6 x free coordinates, tip z translation rows

  int size() const { return static_cast<int>(frequencies.size()); }
  /// Keeps the first n modes.
  ModalModel truncated(int n) const;
};

inline constexpr double kRigidLeakageHz = 0.1;
inline constexpr double kDefaultModalDamping = 0.075;

/// Reduces with T_dc, clamps the first kClampedDofs reduced coordinates and
/// solves the generalized symmetric eigenproblem. Throws IndefiniteMass.
ModalModel modal_analysis(const Mat& M_u, const Mat& K_u, const Mat& T_dc,
                          double damping = kDefaultModalDamping);

/// Full pipeline at one pose.
ModalModel modal_at_pose(const RobotParams& params, const MpPose& pose,
                         double damping = kDefaultModalDamping);
double first_frequency(const RobotParams& params, const MpPose& pose);

struct FrequencySample {
  MpPose pose;
  double weight = 0.0;
  double f1_hz = 0.0;
  bool ok = false;
  std::string error;
};

/// One first-mode frequency per sample. Failures are recorded per sample.
std::vector<FrequencySample> frequency_map(const RobotParams& params,
                                           const std::vector<WorkspaceSample>& samples,
                                           int parallel = 1);

/// Servo stiffness giving first natural frequency target_hz at pose.
double calibrate_servo_stiffness(const RobotParams& params, const MpPose& pose, double target_hz);

struct ResidualResponse {
  double dt = 0.0;
  double t_end = 0.0;
  Mat modal_displacement;    // samples x modes
  Vec residual_envelope;     // per mode, envelope at t_end (its peak after t_end)
  Vec residual_peak;         // per mode, max |eta| over [t_end, t_end + 3/(zeta w)]
  Vec connection_peak;       // per tip, max |z| over the longest window
};

/// Integrates every mode as eta'' + 2 zeta w eta' + w^2 eta = -L thetaddot(t).
/// joint_accel is samples x 3 on a uniform grid with step dt; after t_end the
/// excitation is zero. Throws NumericalDivergence on overflow.
ResidualResponse residual_oscillator_response(const ModalModel& modal, const Mat& joint_accel,
                                              double dt, double t_end);

}  // namespace deltailc
