#include "deltailc/controllers.hpp"

#include <cmath>
#include <sstream>

#include "deltailc/errors.hpp"

namespace deltailc {

AMCILCGains AMCILCGains::case1(int rules) {
  AMCILCGains g;
  g.k = Vec3::Ones();
  g.gamma = Mat::Ones(rules, 3);
  g.nu = Vec3::Constant(0.01);
  return g;
}

AMCILCGains AMCILCGains::case2(int rules) {
  AMCILCGains g = case1(rules);
  g.k = Vec3::Constant(15.0);
  return g;
}

AMCILCGains AMCILCGains::afc(int rules) {
  AMCILCGains g;
  g.k = Vec3::Constant(10.0);
  g.gamma = Mat::Constant(rules, 3, 20.0);
  g.nu = Vec3::Constant(0.1);
  return g;
}

void AMCILCGains::validate(int rules) const {
  if (!(sigma > 0.0) || !(v_c > 0.0)) fail(ErrorKind::InvalidArgument, "sigma and v_c must be > 0");
  if (!(k.minCoeff() > 0.0) || !(nu.minCoeff() > 0.0)) {
    fail(ErrorKind::InvalidArgument, "feedback and eps gains must be > 0");
  }
  if (gamma.rows() != rules || gamma.cols() != 3 || !(gamma.minCoeff() > 0.0)) {
    fail(ErrorKind::InvalidArgument, "Gamma must be positive with one diagonal per joint");
  }
}

PIDGains PIDGains::bootstrap() {
  return {Vec3::Constant(20.0), Vec3::Constant(20.0), Vec3::Constant(10.0)};
}

PIDGains PIDGains::learning() { return {Vec3::Ones(), Vec3::Ones(), Vec3::Ones()}; }

Vec3 auxiliary_error(const Vec3& e, const Vec3& e_dot, double sigma) { return e_dot + sigma * e; }

BarrierTerms barrier_terms(const Vec3& eta, double v_c) {
  BarrierTerms b;
  const double vc2 = v_c * v_c;
  for (int i = 0; i < 3; ++i) {
    if (!(std::abs(eta[i]) < v_c * (1.0 - kBarrierMargin))) {
      std::ostringstream os;
      os << "joint " << i + 1 << " eta = " << eta[i] << " reached the bound " << v_c;
      fail(ErrorKind::BarrierViolation, os.str());
    }
    const double arg = kPi * eta[i] * eta[i] / (2.0 * vc2);
    const double c = std::cos(arg);
    b.V_b[i] = vc2 / kPi * std::tan(arg);
    b.Psi[i] = eta[i] / (c * c);
  }
  return b;
}

Vec3 barrier_gradient(const Vec3& psi, const Mat3& M_inv) { return M_inv.transpose() * psi; }

Vec3 compensated_control(const DynamicsTerms& nominal, const JointSample& state,
                         const JointSample& ref, const Vec3& estimate, double sigma, const Vec3& k) {
  const Vec3 e = state.theta - ref.theta;
  const Vec3 e_dot = state.theta_dot - ref.theta_dot;
  const Vec3 eta = auxiliary_error(e, e_dot, sigma);
  return nominal.C * state.theta_dot + nominal.G - estimate +
         nominal.M * (ref.theta_ddot - sigma * e_dot - k.cwiseProduct(eta));
}

Vec3 amcilc_control(const RigidModel& nominal, const JointState& state, const JointSample& ref,
                    const FLSWeights& weights, const FLSConfig& config, const AMCILCGains& gains) {
  const DynamicsTerms t = compute_terms(nominal, state);
  const Vec3 eta = auxiliary_error(state.theta - ref.theta, state.theta_dot - ref.theta_dot, gains.sigma);
  barrier_terms(eta, gains.v_c);
  Vec x(6);
  x << state.theta, state.theta_dot;
  const Vec3 estimate = approximate(weights, config, x);
  return compensated_control(t, {state.theta, state.theta_dot, Vec3::Zero()}, ref, estimate,
                             gains.sigma, gains.k);
}

IterationMemory IterationMemory::zeros(int samples, int rules) {
  IterationMemory m;
  m.vartheta = Mat::Zero(samples, 3 * rules);
  m.eps = Mat::Zero(samples, 3);
  m.u = Mat::Zero(samples, 3);
  m.e = Mat::Zero(samples, 3);
  m.e_dot = Mat::Zero(samples, 3);
  m.eta = Mat::Zero(samples, 3);
  return m;
}

Mat IterationMemory::weights_at(int n) const {
  const int l = rules();
  Mat w(l, 3);
  for (int i = 0; i < 3; ++i) w.col(i) = vartheta.row(n).segment(i * l, l).transpose();
  return w;
}

void IterationMemory::set_weights(int n, const Mat& w) {
  const int l = rules();
  for (int i = 0; i < 3; ++i) vartheta.row(n).segment(i * l, l) = w.col(i).transpose();
}

LearningStep learning_step(const Mat& prev_vartheta, const Vec3& prev_eps, const Vec& phi,
                           const Vec3& lambda, const AMCILCGains& gains, double lower,
                           double upper) {
  LearningStep s;
  Mat raw = prev_vartheta;
  for (int i = 0; i < 3; ++i) raw.col(i) += gains.gamma.col(i).cwiseProduct(phi) * lambda[i];
  s.vartheta = saturate(raw, lower, upper);
  s.eps = prev_eps + gains.nu.cwiseProduct(lambda);
  return s;
}

IterationMemory update_laws(const IterationMemory& prev, const Mat& x, const Mat& eta,
                            const Mat& m_inv, const AMCILCGains& gains, const FLSConfig& config,
                            double lower, double upper) {
  const int n = prev.samples();
  if (x.rows() != n || eta.rows() != n || m_inv.rows() != n) {
    fail(ErrorKind::GridMismatch, "iteration samples do not match the memory grid");
  }
  IterationMemory next = prev;
  for (int s = 0; s < n; ++s) {
    const BarrierTerms b = barrier_terms(eta.row(s).transpose(), gains.v_c);
    const Mat3 Minv = Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(m_inv.row(s).data());
    const Vec3 lambda = barrier_gradient(b.Psi, Minv);
    const Vec phi = basis(config, x.row(s).transpose());
    const LearningStep step =
        learning_step(prev.weights_at(s), prev.eps.row(s).transpose(), phi, lambda, gains, lower, upper);
    next.set_weights(s, step.vartheta);
    next.eps.row(s) = step.eps.transpose();
    next.eta.row(s) = eta.row(s);
  }
  return next;
}

Vec3 pid_bootstrap(const Vec3& e, const Vec3& e_dot, const Vec3& int_e, const PIDGains& g) {
  return -(g.kp.cwiseProduct(e) + g.kd.cwiseProduct(e_dot) + g.ki.cwiseProduct(int_e));
}

Vec3 pidilc_control(const Vec3& u_prev, const Vec3& e, const Vec3& e_dot, const Vec3& int_e,
                    const PIDGains& g) {
  return u_prev + pid_bootstrap(e, e_dot, int_e, g);
}

AFCRates afc_update_rates(const Vec& phi, const Vec3& lambda, const AMCILCGains& gains) {
  AFCRates r;
  r.d_vartheta.resize(phi.size(), 3);
  for (int i = 0; i < 3; ++i) r.d_vartheta.col(i) = gains.gamma.col(i).cwiseProduct(phi) * lambda[i];
  r.d_eps = gains.nu.cwiseProduct(lambda);
  return r;
}

}  // namespace deltailc
