#include "deltailc/kinematics.hpp"

#include <cmath>
#include <sstream>

#include "deltailc/errors.hpp"

namespace deltailc {

namespace {

double chain_azimuth(int chain, const RobotParams& params) {
  return params.base_yaw + chain * 2.0 * kPi / 3.0;
}

std::string describe(const Vec3& v) {
  std::ostringstream os;
  os << "(" << v.x() << ", " << v.y() << ", " << v.z() << ")";
  return os.str();
}

}  // namespace

Mat3 chain_rotation(int chain, const RobotParams& params) {
  return Eigen::AngleAxisd(chain_azimuth(chain, params), Vec3::UnitZ()).toRotationMatrix();
}

Vec3 base_joint(int chain, const RobotParams& params) {
  return chain_rotation(chain, params) * Vec3(params.e_a, 0.0, 0.0);
}

Vec3 joint_axis(int chain, const RobotParams& params) {
  return chain_rotation(chain, params) * Vec3::UnitY();
}

Vec3 elbow_point(int chain, double theta, const RobotParams& params) {
  const Vec3 local(params.e_a + params.l1 * std::cos(theta), 0.0, -params.l1 * std::sin(theta));
  return chain_rotation(chain, params) * local;
}

Vec3 elbow_velocity_gain(int chain, double theta, const RobotParams& params) {
  const Vec3 local(-params.l1 * std::sin(theta), 0.0, -params.l1 * std::cos(theta));
  return chain_rotation(chain, params) * local;
}

Vec3 elbow_curvature_gain(int chain, double theta, const RobotParams& params) {
  const Vec3 local(-params.l1 * std::cos(theta), 0.0, params.l1 * std::sin(theta));
  return chain_rotation(chain, params) * local;
}

Vec3 platform_offset(int chain, const RobotParams& params) {
  return chain_rotation(chain, params) * Vec3(params.e_b, 0.0, 0.0);
}

Vec3 inverse_kinematics(const MpPose& pose, const RobotParams& params) {
  Vec3 theta;
  for (int i = 0; i < 3; ++i) {
    const Vec3 local = chain_rotation(i, params).transpose() * pose.p;
    const double dx = local.x() - (params.e_a - params.e_b);
    const double dy = local.y();
    const double dz = local.z();
    // A cos(theta) + B sin(theta) = C
    const double a = -2.0 * params.l1 * dx;
    const double b = 2.0 * params.l1 * dz;
    const double c = params.l2 * params.l2 - params.l1 * params.l1 - dx * dx - dy * dy - dz * dz;
    const double r = std::hypot(a, b);
    if (r == 0.0) fail(ErrorKind::UnreachablePose, "pose on a base joint " + describe(pose.p));
    const double ratio = c / r;
    const double disc = 1.0 - ratio * ratio;
    if (disc < 0.0) {
      fail(ErrorKind::UnreachablePose,
           "chain " + std::to_string(i) + " cannot reach " + describe(pose.p));
    }
    if (disc < kSingularTolerance) {
      fail(ErrorKind::SingularConfiguration,
           "chain " + std::to_string(i) + " fully stretched at " + describe(pose.p));
    }
    double t = std::atan2(b, a) + std::acos(ratio);
    t = std::remainder(t, 2.0 * kPi);
    theta[i] = t;
  }
  return theta;
}

MpPose forward_kinematics(const Vec3& theta, const RobotParams& params) {
  // Sphere centers: elbows shifted back by the platform offsets.
  Vec3 c[3];
  for (int i = 0; i < 3; ++i) c[i] = elbow_point(i, theta[i], params) - platform_offset(i, params);

  const Vec3 d21 = c[1] - c[0];
  const double d = d21.norm();
  if (d < 1e-12) fail(ErrorKind::NoIntersection, "coincident sphere centers");
  const Vec3 ex = d21 / d;
  const Vec3 d31 = c[2] - c[0];
  const double i = ex.dot(d31);
  Vec3 ey = d31 - i * ex;
  const double ey_norm = ey.norm();
  if (ey_norm < 1e-12) fail(ErrorKind::NoIntersection, "collinear sphere centers");
  ey /= ey_norm;
  const Vec3 ez = ex.cross(ey);
  const double j = ey.dot(d31);

  // Equal radii simplify the usual trilateration formulas.
  const double x = d / 2.0;
  const double y = (i * i + j * j - 2.0 * i * x) / (2.0 * j);
  const double h2 = params.l2 * params.l2 - x * x - y * y;
  if (h2 < 0.0) {
    fail(ErrorKind::NoIntersection, "elbow spheres do not meet for theta " + describe(theta));
  }
  const double h = std::sqrt(h2);
  const Vec3 base = c[0] + x * ex + y * ey;
  const Vec3 p1 = base + h * ez;
  const Vec3 p2 = base - h * ez;
  return MpPose{p1.z() < p2.z() ? p1 : p2};
}

double condition_number(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m);
  const Vec3 s = svd.singularValues();
  if (s[2] <= 0.0) return std::numeric_limits<double>::infinity();
  return s[0] / s[2];
}

namespace {

struct ConstraintRows {
  Mat3 A;       // rows (P_i - E_i)^T
  Vec3 b;       // (P_i - E_i) . dE_i/dtheta_i
  Vec3 diff[3];  // P_i - E_i
  Vec3 dE[3];
};

ConstraintRows constraint_rows(const Vec3& theta, const Vec3& p, const RobotParams& params) {
  ConstraintRows rows;
  for (int i = 0; i < 3; ++i) {
    rows.diff[i] = p + platform_offset(i, params) - elbow_point(i, theta[i], params);
    rows.dE[i] = elbow_velocity_gain(i, theta[i], params);
    rows.A.row(i) = rows.diff[i].transpose();
    rows.b[i] = rows.diff[i].dot(rows.dE[i]);
  }
  return rows;
}

Mat3 jacobian_from_rows(const ConstraintRows& rows, const Vec3& theta, double max_condition) {
  if (condition_number(rows.A) > max_condition) {
    fail(ErrorKind::SingularJacobian, "parallel singularity near theta " + describe(theta));
  }
  const Mat3 J = rows.A.partialPivLu().solve(Mat3(rows.b.asDiagonal()));
  if (!J.allFinite() || condition_number(J) > max_condition) {
    fail(ErrorKind::SingularJacobian, "ill-conditioned Jacobian at theta " + describe(theta));
  }
  return J;
}

}  // namespace

Mat3 jacobian(const Vec3& theta, const RobotParams& params, double max_condition) {
  const MpPose pose = forward_kinematics(theta, params);
  return jacobian_from_rows(constraint_rows(theta, pose.p, params), theta, max_condition);
}

KinematicTerms kinematic_terms(const Vec3& theta, const Vec3& theta_dot, const RobotParams& params,
                               double max_condition) {
  KinematicTerms out;
  out.p = forward_kinematics(theta, params).p;
  const ConstraintRows rows = constraint_rows(theta, out.p, params);
  out.J = jacobian_from_rows(rows, theta, max_condition);
  const Vec3 p_dot = out.J * theta_dot;

  // Differentiate A J = diag(b) once in time.
  Mat3 A_dot;
  Vec3 b_dot;
  for (int i = 0; i < 3; ++i) {
    const Vec3 rel_vel = p_dot - rows.dE[i] * theta_dot[i];
    A_dot.row(i) = rel_vel.transpose();
    const Vec3 ddE = elbow_curvature_gain(i, theta[i], params);
    b_dot[i] = rel_vel.dot(rows.dE[i]) + rows.diff[i].dot(ddE) * theta_dot[i];
  }
  out.J_dot = rows.A.partialPivLu().solve(Mat3(b_dot.asDiagonal()) - A_dot * out.J);
  return out;
}

JointSample task_to_joint(const Vec3& p, const Vec3& p_dot, const Vec3& p_ddot,
                          const RobotParams& params) {
  JointSample s;
  s.theta = inverse_kinematics(MpPose{p}, params);
  const ConstraintRows rows = constraint_rows(s.theta, p, params);
  // Row i of A pdot = b_i thetadot_i.
  const Vec3 lhs = rows.A * p_dot;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(rows.b[i]) < 1e-12) {
      fail(ErrorKind::SingularJacobian, "serial singularity at " + describe(p));
    }
    s.theta_dot[i] = lhs[i] / rows.b[i];
  }
  // Second derivative of |P_i - E_i|^2 = l2^2.
  for (int i = 0; i < 3; ++i) {
    const Vec3 rel_vel = p_dot - rows.dE[i] * s.theta_dot[i];
    const Vec3 ddE = elbow_curvature_gain(i, s.theta[i], params);
    const double rhs = rows.diff[i].dot(p_ddot) + rel_vel.squaredNorm() -
                       rows.diff[i].dot(ddE) * s.theta_dot[i] * s.theta_dot[i];
    s.theta_ddot[i] = rhs / rows.b[i];
  }
  return s;
}

std::vector<double> z_plane_range(double z_min, double z_max, int count) {
  if (count < 1) fail(ErrorKind::InvalidArgument, "plane count must be >= 1");
  std::vector<double> planes;
  if (count == 1) {
    planes.push_back(0.5 * (z_min + z_max));
    return planes;
  }
  for (int k = 0; k < count; ++k) planes.push_back(z_min + (z_max - z_min) * k / (count - 1));
  return planes;
}

std::vector<WorkspaceSample> sample_workspace(const RobotParams& params, const GridSpec& grid) {
  if (!(grid.spacing > 0.0)) fail(ErrorKind::InvalidArgument, "grid spacing must be positive");
  if (!(grid.half_width >= 0.0)) fail(ErrorKind::InvalidArgument, "grid half width must be >= 0");
  const int n = static_cast<int>(std::floor(2.0 * grid.half_width / grid.spacing + 1e-9)) + 1;
  const double start = -0.5 * (n - 1) * grid.spacing;
  const double cell = grid.spacing * grid.spacing;

  std::vector<WorkspaceSample> out;
  for (double z : grid.z_planes) {
    for (int ix = 0; ix < n; ++ix) {
      for (int iy = 0; iy < n; ++iy) {
        const MpPose pose{Vec3(start + ix * grid.spacing, start + iy * grid.spacing, z)};
        try {
          inverse_kinematics(pose, params);
        } catch (const Error&) {
          continue;
        }
        out.push_back({pose, cell});
      }
    }
  }
  if (out.empty()) fail(ErrorKind::EmptyWorkspace, "no reachable sample on the requested grid");
  return out;
}

}  // namespace deltailc
