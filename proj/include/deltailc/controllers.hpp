#pragma once

#include <string>

#include "deltailc/fls.hpp"
#include "deltailc/rigid_dynamics.hpp"
#include "deltailc/types.hpp"

namespace deltailc {

struct AMCILCGains {
  double sigma = 1.0;
  Vec3 k = Vec3::Constant(15.0);
  double v_c = 0.1;
  Mat gamma;  // rules x 3, diagonal of Gamma_i in column i
  Vec3 nu = Vec3::Constant(0.01);

  /// k = I, Gamma = I, nu = 0.01.
  static AMCILCGains case1(int rules = 9);
  /// k = diag(15, 15, 15), Gamma = I, nu = 0.01.
  static AMCILCGains case2(int rules = 9);
  /// Adaptive fuzzy baseline: k = 10 I, Gamma = 20 I, nu = 0.1.
  static AMCILCGains afc(int rules = 9);

  /// Throws InvalidArgument.
  void validate(int rules) const;
};

struct PIDGains {
  Vec3 kp = Vec3::Ones();
  Vec3 ki = Vec3::Ones();
  Vec3 kd = Vec3::Ones();

  static PIDGains bootstrap();  // kp 20, ki 20, kd 10
  static PIDGains learning();   // all ones
};

Vec3 auxiliary_error(const Vec3& e, const Vec3& e_dot, double sigma);

inline constexpr double kBarrierMargin = 1e-6;

struct BarrierTerms {
  Vec3 V_b;
  Vec3 Psi;
};
/// Throws BarrierViolation when |eta_i| >= v_c (1 - kBarrierMargin).
BarrierTerms barrier_terms(const Vec3& eta, double v_c);

/// Lambda_i = Psi^T m_{:,i} with m the inverse nominal inertia.
Vec3 barrier_gradient(const Vec3& psi, const Mat3& M_inv);

/// Model-based feedback law shared by AMCILC and the adaptive fuzzy baseline,
/// with the estimate vartheta^T phi + eps already evaluated.
Vec3 compensated_control(const DynamicsTerms& nominal, const JointSample& state,
                         const JointSample& ref, const Vec3& estimate, double sigma, const Vec3& k);

/// Full AMCILC law with nominal terms evaluated at the measured state.
Vec3 amcilc_control(const RigidModel& nominal, const JointState& state, const JointSample& ref,
                    const FLSWeights& weights, const FLSConfig& config, const AMCILCGains& gains);

/// Samples of one ILC iteration on the shared grid.
struct IterationMemory {
  Mat vartheta;  // N x (3 rules), joint i occupies columns [i rules, (i + 1) rules)
  Mat eps;       // N x 3
  Mat u;         // N x 3
  Mat e;
  Mat e_dot;
  Mat eta;

  static IterationMemory zeros(int samples, int rules);
  int samples() const { return static_cast<int>(u.rows()); }
  int rules() const { return static_cast<int>(vartheta.cols() / 3); }
  /// vartheta at sample n as rules x 3.
  Mat weights_at(int n) const;
  void set_weights(int n, const Mat& w);
};

/// Pointwise learning step: sat(prev + Gamma_i phi Lambda_i), prev_eps + nu Lambda.
struct LearningStep {
  Mat vartheta;
  Vec3 eps;
};
LearningStep learning_step(const Mat& prev_vartheta, const Vec3& prev_eps, const Vec& phi,
                           const Vec3& lambda, const AMCILCGains& gains, double lower,
                           double upper);

/// Batch form of the update laws over a finished iteration. x is N x 6,
/// eta N x 3, m_inv N x 9 (row-major 3x3). Throws GridMismatch.
IterationMemory update_laws(const IterationMemory& prev, const Mat& x, const Mat& eta,
                            const Mat& m_inv, const AMCILCGains& gains, const FLSConfig& config,
                            double lower, double upper);

Vec3 pid_bootstrap(const Vec3& e, const Vec3& e_dot, const Vec3& int_e, const PIDGains& gains);
Vec3 pidilc_control(const Vec3& u_prev, const Vec3& e, const Vec3& e_dot, const Vec3& int_e,
                    const PIDGains& gains);

/// Continuous-time adaptation rates of the adaptive fuzzy baseline.
struct AFCRates {
  Mat d_vartheta;
  Vec3 d_eps;
};
AFCRates afc_update_rates(const Vec& phi, const Vec3& lambda, const AMCILCGains& gains);

}  // namespace deltailc
