#include "deltailc/flexible_modal.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "deltailc/errors.hpp"

namespace deltailc {

namespace {

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return s;
}

// Platform rotation coordinates are stored in reversed order.
Mat3 reversal() {
  Mat3 r;
  r << 0, 0, 1, 0, 1, 0, 1, 0, 0;
  return r;
}

void add_bending(Mat& m, int a, int b, int c, int d, double s, const double (&k)[4][4]) {
  const int idx[4] = {a, b, c, d};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(idx[i], idx[j]) += s * k[i][j];
}

void add_bar(Mat& m, int a, int b, double s) {
  m(a, a) += 2.0 * s;
  m(b, b) += 2.0 * s;
  m(a, b) += s;
  m(b, a) += s;
}

Mat rotate_element(const Mat& local, const Mat3& R) {
  Mat T = Mat::Zero(12, 12);
  for (int b = 0; b < 4; ++b) T.block<3, 3>(3 * b, 3 * b) = R.transpose();
  return T.transpose() * local * T;
}

Mat3 frame_from_axis(const Vec3& axis) {
  const Vec3 x = axis.normalized();
  Vec3 helper = Vec3::UnitZ();
  if (std::abs(x.dot(helper)) > 0.9) helper = Vec3::UnitX();
  const Vec3 y = helper.cross(x).normalized();
  const Vec3 z = x.cross(y);
  Mat3 R;
  R.col(0) = x;
  R.col(1) = y;
  R.col(2) = z;
  return R;
}

}  // namespace

Mat BeamElement::local_stiffness() const {
  const double L = length;
  Mat k = Mat::Zero(12, 12);
  const double ea = modulus * area / L;
  k(0, 0) = k(6, 6) = ea;
  k(0, 6) = k(6, 0) = -ea;
  const double shear = modulus / (2.0 * (1.0 + poisson));
  const double gj = shear * J / L;
  k(3, 3) = k(9, 9) = gj;
  k(3, 9) = k(9, 3) = -gj;

  const double L2 = L * L;
  // v / theta_z plane
  const double kv[4][4] = {{12, 6 * L, -12, 6 * L},
                           {6 * L, 4 * L2, -6 * L, 2 * L2},
                           {-12, -6 * L, 12, -6 * L},
                           {6 * L, 2 * L2, -6 * L, 4 * L2}};
  add_bending(k, 1, 5, 7, 11, modulus * Iz / (L2 * L), kv);
  // w / theta_y plane
  const double kw[4][4] = {{12, -6 * L, -12, -6 * L},
                           {-6 * L, 4 * L2, 6 * L, 2 * L2},
                           {-12, 6 * L, 12, 6 * L},
                           {-6 * L, 2 * L2, 6 * L, 4 * L2}};
  add_bending(k, 2, 4, 8, 10, modulus * Iy / (L2 * L), kw);
  return k;
}

Mat BeamElement::local_mass() const {
  const double L = length;
  const double L2 = L * L;
  const double m = density * area * L;
  Mat mm = Mat::Zero(12, 12);
  add_bar(mm, 0, 6, m / 6.0);
  add_bar(mm, 3, 9, density * J * L / 6.0);
  const double mv[4][4] = {{156, 22 * L, 54, -13 * L},
                           {22 * L, 4 * L2, 13 * L, -3 * L2},
                           {54, 13 * L, 156, -22 * L},
                           {-13 * L, -3 * L2, -22 * L, 4 * L2}};
  add_bending(mm, 1, 5, 7, 11, m / 420.0, mv);
  const double mw[4][4] = {{156, -22 * L, 54, 13 * L},
                           {-22 * L, 4 * L2, -13 * L, -3 * L2},
                           {54, -13 * L, 156, 22 * L},
                           {13 * L, -3 * L2, 22 * L, 4 * L2}};
  add_bending(mm, 2, 4, 8, 10, m / 420.0, mw);
  return mm;
}

Mat BeamElement::global_mass() const { return rotate_element(local_mass(), orientation); }
Mat BeamElement::global_stiffness() const { return rotate_element(local_stiffness(), orientation); }

BeamElement lower_arm_element(const RobotParams& p, const Vec3& from, const Vec3& to) {
  BeamElement b;
  const Vec3 axis = to - from;
  b.length = axis.norm();
  if (!(b.length > 0.0)) fail(ErrorKind::InvalidArgument, "zero-length beam");
  b.area = p.lower_arm_area();
  b.Iy = b.Iz = kPi / 64.0 * (std::pow(p.D2, 4) - std::pow(p.d2, 4));
  b.J = b.Iy + b.Iz;
  b.density = p.rho_r;
  b.modulus = p.E_r;
  b.poisson = p.nu_r;
  b.orientation = frame_from_axis(axis);
  return b;
}

Vec3 tip_attachment(int tip, const RobotParams& p) {
  const int chain = tip / 2;
  const double side = (tip % 2 == 0) ? 1.0 : -1.0;
  return chain_rotation(chain, p) * Vec3(p.e_b, side * p.pair_half_width, 0.0);
}

UnconstrainedModel assemble_unconstrained(const RobotParams& p, const Vec3& theta,
                                          double servo_stiffness) {
  if (!(servo_stiffness > 0.0)) fail(ErrorKind::InvalidArgument, "servo stiffness must be > 0");
  const int n = kUnconstrainedDofs;
  UnconstrainedModel out{Mat::Zero(n, n), Mat::Zero(n, n)};
  const Vec3 P = forward_kinematics(theta, p).p;
  const Mat3 J = jacobian(theta, p);

  const double I_ua = p.upper_arm_mass() * p.l1 * p.l1 / 3.0;
  for (int i = 0; i < 3; ++i) {
    // Upper arm moves with the total angle, the rotor only with the rigid one.
    Eigen::Matrix<double, 1, 48> arm = Eigen::Matrix<double, 1, 48>::Zero();
    arm(i) = 1.0;
    arm(3 + i) = 1.0;
    out.M_u += I_ua * arm.transpose() * arm;
    out.M_u(i, i) += p.I_M * p.n_gear * p.n_gear;

    Eigen::Matrix<double, 3, 48> elbow = Eigen::Matrix<double, 3, 48>::Zero();
    const Vec3 dE = elbow_velocity_gain(i, theta[i], p);
    elbow.col(i) = dE;
    elbow.col(3 + i) = dE;
    out.M_u += p.m_lump * elbow.transpose() * elbow;

    out.K_u(3 + i, 3 + i) += servo_stiffness;
  }

  {
    Eigen::Matrix<double, 3, 48> mp = Eigen::Matrix<double, 3, 48>::Zero();
    mp.leftCols<3>() = J;
    mp.block<3, 3>(0, kPlatformOffset) = Mat3::Identity();
    out.M_u += p.m_p * mp.transpose() * mp;
    Eigen::Matrix<double, 3, 48> rot = Eigen::Matrix<double, 3, 48>::Zero();
    rot.block<3, 3>(0, kPlatformOffset + 3) = reversal();
    const Mat3 Ip = Vec3(p.I_px, p.I_py, p.I_pz).asDiagonal();
    out.M_u += rot.transpose() * Ip * rot;
  }

  for (int t = 0; t < kTipCount; ++t) {
    const int i = t / 2;
    const Vec3 E = elbow_point(i, theta[i], p);
    const Vec3 dE = elbow_velocity_gain(i, theta[i], p);
    const Vec3 lateral = tip_attachment(t, p) - platform_offset(i, p);
    const Vec3 from = E + lateral;
    const Vec3 to = P + tip_attachment(t, p);
    const BeamElement beam = lower_arm_element(p, from, to);
    const Vec3 axis = beam.orientation.col(0);

    // Rigid rotation rate of the arm per unit joint rate. The elbow end follows
    // the total arm angle, so a rigid motion of the whole loop is strain free.
    Mat3 rel = J;
    rel.col(i) -= dE;
    const Mat3 omega = skew(axis) * rel / beam.length;

    Eigen::Matrix<double, 12, 48> H = Eigen::Matrix<double, 12, 48>::Zero();
    H.block<3, 1>(0, i) = dE;
    H.block<3, 1>(0, 3 + i) = dE;
    H.block<3, 3>(3, 0) = omega;
    H.block<3, 3>(3, 3) = omega;
    H.block<3, 3>(6, 0) = J;
    H.block<3, 3>(6, tip_offset(t)) = Mat3::Identity();
    H.block<3, 3>(9, 0) = omega;
    H.block<3, 3>(9, tip_offset(t) + 3) = Mat3::Identity();

    out.M_u += H.transpose() * beam.global_mass() * H;
    out.K_u += H.transpose() * beam.global_stiffness() * H;
  }
  out.M_u = 0.5 * (out.M_u + out.M_u.transpose()).eval();
  out.K_u = 0.5 * (out.K_u + out.K_u.transpose()).eval();
  return out;
}

Mat build_compatibility(const RobotParams& p, const Vec3& theta) {
  // theta only selects the configuration; the map is linear in small motions.
  forward_kinematics(theta, p);
  Mat T = Mat::Zero(kUnconstrainedDofs, kReducedDofs);
  T.block<6, 6>(0, 0) = Mat::Identity(6, 6);
  const int mp_col = 6 + 3 * kTipCount;
  for (int t = 0; t < kTipCount; ++t) {
    const int row = tip_offset(t);
    T.block<3, 3>(row, mp_col) = Mat3::Identity();
    T.block<3, 3>(row, mp_col + 3) = -skew(tip_attachment(t, p)) * reversal();
    T.block<3, 3>(row + 3, 6 + 3 * t) = Mat3::Identity();
  }
  T.block<6, 6>(kPlatformOffset, mp_col) = Mat::Identity(6, 6);

  Eigen::ColPivHouseholderQR<Mat> qr(T);
  qr.setThreshold(1e-10);
  if (qr.rank() < kReducedDofs) {
    fail(ErrorKind::RankDeficiency,
         "compatibility matrix rank " + std::to_string(qr.rank()) + " < 30");
  }
  return T;
}

ModalModel ModalModel::truncated(int n) const {
  n = std::min(n, size());
  ModalModel m;
  m.frequencies = frequencies.head(n);
  m.mode_shapes = mode_shapes.leftCols(n);
  m.participation = participation.topRows(n);
  m.modal_damping = modal_damping.head(n);
  m.connection_z = connection_z;
  return m;
}

ModalModel modal_analysis(const Mat& M_u, const Mat& K_u, const Mat& T, double damping) {
  if (M_u.rows() != kUnconstrainedDofs || K_u.rows() != kUnconstrainedDofs ||
      T.rows() != kUnconstrainedDofs || T.cols() != kReducedDofs) {
    fail(ErrorKind::InvalidArgument, "modal_analysis expects 48x48 matrices and a 48x30 map");
  }
  const Mat M = T.transpose() * M_u * T;
  const Mat K = T.transpose() * K_u * T;
  const int nf = kReducedDofs - kClampedDofs;
  const Mat Mff = M.bottomRightCorner(nf, nf);
  const Mat Kff = K.bottomRightCorner(nf, nf);
  const Mat Mfr = M.bottomLeftCorner(nf, kClampedDofs);

  Eigen::LLT<Mat> llt(Mff);
  if (llt.info() != Eigen::Success) {
    fail(ErrorKind::IndefiniteMass, "reduced mass matrix is not positive definite");
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> solver(Kff, Mff);
  if (solver.info() != Eigen::Success) {
    fail(ErrorKind::IndefiniteMass, "generalized eigen-solve failed");
  }

  std::vector<int> keep;
  const Vec& lambda = solver.eigenvalues();
  for (int j = 0; j < nf; ++j) {
    const double w = std::sqrt(std::max(lambda[j], 0.0));
    if (w / (2.0 * kPi) >= kRigidLeakageHz) keep.push_back(j);
  }

  ModalModel out;
  const int m = static_cast<int>(keep.size());
  out.frequencies.resize(m);
  out.mode_shapes.resize(nf, m);
  for (int c = 0; c < m; ++c) {
    out.frequencies[c] = std::sqrt(lambda[keep[c]]) / (2.0 * kPi);
    out.mode_shapes.col(c) = solver.eigenvectors().col(keep[c]);
  }
  out.participation = out.mode_shapes.transpose() * Mfr;
  out.modal_damping = Vec::Constant(m, damping);

  out.connection_z.resize(kTipCount, nf);
  for (int t = 0; t < kTipCount; ++t) {
    out.connection_z.row(t) = T.row(tip_offset(t) + 2).tail(nf);
  }
  return out;
}

ModalModel modal_at_pose(const RobotParams& params, const MpPose& pose, double damping) {
  const Vec3 theta = inverse_kinematics(pose, params);
  const UnconstrainedModel u =
      assemble_unconstrained(params, theta, params.effective_servo_stiffness());
  return modal_analysis(u.M_u, u.K_u, build_compatibility(params, theta), damping);
}

double first_frequency(const RobotParams& params, const MpPose& pose) {
  const ModalModel m = modal_at_pose(params, pose);
  if (m.size() == 0) fail(ErrorKind::IndefiniteMass, "no elastic mode found");
  return m.frequencies[0];
}

std::vector<FrequencySample> frequency_map(const RobotParams& params,
                                           const std::vector<WorkspaceSample>& samples,
                                           int parallel) {
  std::vector<FrequencySample> out(samples.size());
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t k = begin; k < samples.size(); k += stride) {
      FrequencySample& s = out[k];
      s.pose = samples[k].pose;
      s.weight = samples[k].weight;
      try {
        s.f1_hz = first_frequency(params, s.pose);
        s.ok = true;
      } catch (const Error& e) {
        s.error = e.what();
      }
    }
  };
  const std::size_t threads =
      static_cast<std::size_t>(std::max(1, std::min<int>(parallel, static_cast<int>(samples.size()))));
  if (threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    for (auto& th : pool) th.join();
  }
  return out;
}

double calibrate_servo_stiffness(const RobotParams& params, const MpPose& pose, double target_hz) {
  if (!(target_hz > 0.0)) fail(ErrorKind::InvalidArgument, "target frequency must be > 0");
  RobotParams p = params;
  auto f_at = [&](double k) {
    p.servo_stiffness = k;
    return first_frequency(p, pose);
  };
  double lo = 1.0, hi = 1e8;
  if (f_at(lo) > target_hz || f_at(hi) < target_hz) {
    fail(ErrorKind::InvalidArgument, "target frequency outside the reachable stiffness range");
  }
  for (int it = 0; it < 200 && hi / lo > 1.0 + 1e-13; ++it) {
    const double mid = std::sqrt(lo * hi);
    (f_at(mid) < target_hz ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

ResidualResponse residual_oscillator_response(const ModalModel& modal, const Mat& joint_accel,
                                              double dt, double t_end) {
  if (!(dt > 0.0)) fail(ErrorKind::InvalidArgument, "dt must be > 0");
  if (joint_accel.cols() != 3) fail(ErrorKind::InvalidArgument, "acceleration trace needs 3 columns");
  const int nm = modal.size();
  const int ns = static_cast<int>(joint_accel.rows());

  Vec omega(nm), zeta(nm), window(nm);
  double longest = 0.0;
  for (int m = 0; m < nm; ++m) {
    omega[m] = 2.0 * kPi * modal.frequencies[m];
    zeta[m] = modal.modal_damping[m];
    window[m] = zeta[m] > 0.0 ? 3.0 / (zeta[m] * omega[m]) : 20.0 * 2.0 * kPi / omega[m];
    longest = std::max(longest, window[m]);
  }
  const int n_end = static_cast<int>(std::llround(t_end / dt));
  const int total = n_end + static_cast<int>(std::ceil(longest / dt)) + 1;

  auto accel = [&](double t) -> Vec3 {
    if (t > t_end + 1e-12 || ns == 0) return Vec3::Zero();
    const double s = std::clamp(t / dt, 0.0, static_cast<double>(ns - 1));
    const int k = std::min(static_cast<int>(s), ns - 1);
    if (k + 1 >= ns) return joint_accel.row(ns - 1).transpose();
    const double a = s - k;
    return ((1.0 - a) * joint_accel.row(k) + a * joint_accel.row(k + 1)).transpose();
  };

  ResidualResponse r;
  r.dt = dt;
  r.t_end = t_end;
  r.modal_displacement = Mat::Zero(total, nm);
  r.residual_envelope = Vec::Zero(nm);
  r.residual_peak = Vec::Zero(nm);
  r.connection_peak = Vec::Zero(modal.connection_z.rows());

  Vec x = Vec::Zero(nm), v = Vec::Zero(nm);
  auto deriv = [&](double t, const Vec& xs, const Vec& vs, Vec& dx, Vec& dv) {
    const Vec f = -modal.participation * accel(t);
    dx = vs;
    dv = f - (2.0 * zeta.cwiseProduct(omega)).cwiseProduct(vs) - omega.cwiseAbs2().cwiseProduct(xs);
  };
  Vec k1x, k1v, k2x, k2v, k3x, k3v, k4x, k4v;
  for (int n = 0; n < total; ++n) {
    const double t = n * dt;
    r.modal_displacement.row(n) = x.transpose();
    if (n == n_end) {
      for (int m = 0; m < nm; ++m) {
        const double wd = omega[m] * std::sqrt(std::max(1.0 - zeta[m] * zeta[m], 1e-12));
        const double c = (v[m] + zeta[m] * omega[m] * x[m]) / wd;
        r.residual_envelope[m] = std::sqrt(x[m] * x[m] + c * c);
      }
    }
    if (n >= n_end) {
      for (int m = 0; m < nm; ++m) {
        if (t - n_end * dt <= window[m] + 1e-12) {
          r.residual_peak[m] = std::max(r.residual_peak[m], std::abs(x[m]));
        }
      }
      if (r.connection_peak.size() > 0 && modal.mode_shapes.size() > 0) {
        const Vec z = modal.connection_z * (modal.mode_shapes * x);
        r.connection_peak = r.connection_peak.cwiseMax(z.cwiseAbs());
      }
    }
    if (n + 1 == total) break;
    deriv(t, x, v, k1x, k1v);
    deriv(t + 0.5 * dt, x + 0.5 * dt * k1x, v + 0.5 * dt * k1v, k2x, k2v);
    deriv(t + 0.5 * dt, x + 0.5 * dt * k2x, v + 0.5 * dt * k2v, k3x, k3v);
    deriv(t + dt, x + dt * k3x, v + dt * k3v, k4x, k4v);
    x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    if (!x.allFinite() || !v.allFinite()) {
      fail(ErrorKind::NumericalDivergence, "modal oscillator state overflowed");
    }
  }
  return r;
}

}  // namespace deltailc
