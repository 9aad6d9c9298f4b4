#include "deltailc/rigid_dynamics.hpp"

#include <cmath>

#include "deltailc/errors.hpp"

namespace deltailc {

RigidModel RigidModel::nominal(const RobotParams& params) {
  RigidModel m;
  m.params = params;
  return m;
}

RigidModel RigidModel::true_plant(const RobotParams& params) {
  RigidModel m;
  m.params = params;
  m.perturbation.m_p = 0.05;
  m.perturbation.rho_r = 0.05;
  m.include_motor_damping = true;
  return m;
}

RobotParams RigidModel::effective_params() const {
  RobotParams p = params;
  p.m_p *= 1.0 + perturbation.m_p;
  p.rho_r *= 1.0 + perturbation.rho_r;
  p.m_lump *= 1.0 + perturbation.m_lump;
  p.I_M *= 1.0 + perturbation.I_M;
  return p;
}

void RigidModel::validate() const {
  params.validate();
  for (double d : {perturbation.m_p, perturbation.rho_r, perturbation.m_lump, perturbation.I_M}) {
    if (!(std::abs(d) < 0.5)) {
      fail(ErrorKind::InvalidArgument, "perturbation magnitudes must be below 0.5");
    }
  }
}

LumpedConstants lumped_constants(const RobotParams& p) {
  const double m_ua = p.upper_arm_mass();
  // Two lower arms per chain, each split half to the elbow and half to the platform.
  const double m_pair_half = p.lower_arm_mass();
  LumpedConstants c;
  c.arm_inertia = m_ua * p.l1 * p.l1 / 3.0 + (p.m_lump + m_pair_half) * p.l1 * p.l1;
  c.moving_mass = p.m_p + 3.0 * m_pair_half;
  c.arm_gravity = (0.5 * m_ua * p.l1 + (p.m_lump + m_pair_half) * p.l1) * p.gravity;
  return c;
}

DynamicsTerms compute_terms(const RigidModel& model, const JointState& state) {
  return compute_terms(model, state, kinematic_terms(state.theta, state.theta_dot, model.params));
}

DynamicsTerms compute_terms(const RigidModel& model, const JointState& state,
                            const KinematicTerms& k) {
  const RobotParams p = model.effective_params();
  const LumpedConstants c = lumped_constants(p);
  const double n = p.n_gear;

  const Mat3 M_rr = c.arm_inertia * Mat3::Identity() + c.moving_mass * k.J.transpose() * k.J;
  const Mat3 C_rr = c.moving_mass * k.J.transpose() * k.J_dot;
  Vec3 G_rr;
  for (int i = 0; i < 3; ++i) {
    G_rr[i] = -c.arm_gravity * std::cos(state.theta[i]) + c.moving_mass * p.gravity * k.J(2, i);
  }

  DynamicsTerms t;
  t.M = M_rr / n + p.I_M * n * Mat3::Identity();
  t.C = C_rr / n;
  t.G = G_rr / n;
  if (model.include_motor_damping) t.B = p.B_damp * n * Mat3::Identity();
  return t;
}

Vec3 forward_dynamics(const DynamicsTerms& t, const JointState& s, const Vec3& u) {
  Eigen::LLT<Mat3> llt(t.M);
  if (llt.info() != Eigen::Success || condition_number(t.M) > kMassConditionBound) {
    fail(ErrorKind::SingularMass, "inertia matrix is not safely invertible");
  }
  return llt.solve(u - (t.C + t.B) * s.theta_dot - t.G);
}

Vec3 forward_dynamics(const RigidModel& model, const JointState& state, const Vec3& u) {
  return forward_dynamics(compute_terms(model, state), state, u);
}

Vec3 inverse_dynamics(const DynamicsTerms& t, const JointState& s, const Vec3& theta_ddot) {
  return t.M * theta_ddot + (t.C + t.B) * s.theta_dot + t.G;
}

Vec3 inverse_dynamics(const RigidModel& model, const JointState& state, const Vec3& theta_ddot) {
  return inverse_dynamics(compute_terms(model, state), state, theta_ddot);
}

double mechanical_energy(const RigidModel& model, const JointState& state) {
  const RobotParams p = model.effective_params();
  const LumpedConstants c = lumped_constants(p);
  const DynamicsTerms t = compute_terms(model, state);
  const Vec3 pos = forward_kinematics(state.theta, p).p;
  double v = c.moving_mass * p.gravity * pos.z();
  for (int i = 0; i < 3; ++i) v -= c.arm_gravity * std::sin(state.theta[i]);
  return 0.5 * state.theta_dot.dot(t.M * state.theta_dot) + v / p.n_gear;
}

}  // namespace deltailc
