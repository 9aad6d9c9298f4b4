#include "deltailc/trajectory.hpp"

#include <algorithm>
#include <cmath>

#include "deltailc/csv.hpp"
#include "deltailc/errors.hpp"

namespace deltailc {

JointSample ReferenceTrajectory::sample(int k) const {
  return {theta.row(k).transpose(), theta_dot.row(k).transpose(), theta_ddot.row(k).transpose()};
}

double ReferenceTrajectory::max_speed() const {
  return theta_dot.size() ? theta_dot.cwiseAbs().maxCoeff() : 0.0;
}

void ReferenceTrajectory::validate() const {
  if (!(dt > 0.0)) fail(ErrorKind::InvalidArgument, "trajectory dt must be > 0");
  if (theta.cols() != 3 || theta_dot.cols() != 3 || theta_ddot.cols() != 3 ||
      theta_dot.rows() != theta.rows() || theta_ddot.rows() != theta.rows()) {
    fail(ErrorKind::InvalidArgument, "trajectory arrays must be N x 3 with equal N");
  }
  if (theta.rows() < 2) fail(ErrorKind::InvalidArgument, "trajectory needs at least two samples");
}

Scaling quintic_scaling(double tau) {
  tau = std::clamp(tau, 0.0, 1.0);
  const double t2 = tau * tau, t3 = t2 * tau;
  return {t3 * (10.0 - 15.0 * tau + 6.0 * t2), 30.0 * t2 * (1.0 - 2.0 * tau + t2),
          60.0 * tau * (1.0 - 3.0 * tau + 2.0 * t2)};
}

namespace {

int sample_count(double duration, double dt) {
  if (!(dt > 0.0)) fail(ErrorKind::InvalidArgument, "dt must be > 0");
  if (!(duration > 0.0)) fail(ErrorKind::InvalidArgument, "cycle time must be > 0");
  const double steps = duration / dt;
  const long n = std::lround(steps);
  if (std::abs(steps - n) > 1e-6) fail(ErrorKind::InvalidArgument, "cycle time must be a multiple of dt");
  return static_cast<int>(n) + 1;
}

// Straight segments between waypoints, each with its own quintic profile.
ReferenceTrajectory polyline(const RobotParams& params, const std::vector<Vec3>& pts,
                             const std::vector<double>& durations, double dt) {
  double total = 0.0;
  for (double d : durations) total += d;
  const int n = sample_count(total, dt);
  Mat p(n, 3), v(n, 3), a(n, 3);
  std::vector<double> ends(durations.size());
  double acc = 0.0;
  for (std::size_t s = 0; s < durations.size(); ++s) ends[s] = (acc += durations[s]);
  for (int k = 0; k < n; ++k) {
    const double t = k * dt;
    std::size_t s = 0;
    while (s + 1 < durations.size() && t > ends[s]) ++s;
    const double start = ends[s] - durations[s];
    const Scaling q = quintic_scaling((t - start) / durations[s]);
    const Vec3 d = pts[s + 1] - pts[s];
    p.row(k) = (pts[s] + q.s * d).transpose();
    v.row(k) = (q.ds / durations[s] * d).transpose();
    a.row(k) = (q.dds / (durations[s] * durations[s]) * d).transpose();
  }
  return from_task_space(params, p, v, a, dt);
}

}  // namespace

ReferenceTrajectory from_task_space(const RobotParams& params, const Mat& p, const Mat& p_dot,
                                    const Mat& p_ddot, double dt) {
  ReferenceTrajectory r;
  r.dt = dt;
  const int n = static_cast<int>(p.rows());
  r.theta.resize(n, 3);
  r.theta_dot.resize(n, 3);
  r.theta_ddot.resize(n, 3);
  r.p = p;
  for (int k = 0; k < n; ++k) {
    const JointSample s =
        task_to_joint(p.row(k).transpose(), p_dot.row(k).transpose(), p_ddot.row(k).transpose(), params);
    r.theta.row(k) = s.theta.transpose();
    r.theta_dot.row(k) = s.theta_dot.transpose();
    r.theta_ddot.row(k) = s.theta_ddot.transpose();
  }
  if (n > 0) r.origin = p.row(0).transpose();
  return r;
}

ReferenceTrajectory pick_and_place(const RobotParams& params, double span, double lift,
                                   double cycle_time, double z_plane, double dt) {
  if (!(span > 0.0) || !(lift > 0.0)) fail(ErrorKind::InvalidArgument, "span and lift must be > 0");
  const std::vector<Vec3> pts{Vec3(-0.5 * span, 0.0, z_plane), Vec3(-0.5 * span, 0.0, z_plane + lift),
                              Vec3(0.5 * span, 0.0, z_plane + lift), Vec3(0.5 * span, 0.0, z_plane)};
  // Segment time grows with the square root of its length.
  const double wl = std::sqrt(lift), ws = std::sqrt(span);
  const double unit = cycle_time / (2.0 * wl + ws);
  return polyline(params, pts, {unit * wl, unit * ws, unit * wl}, dt);
}

ReferenceTrajectory square_trajectory(const RobotParams& params, double side, double z_plane,
                                      double cycle_time, double dt) {
  if (!(side > 0.0)) fail(ErrorKind::InvalidArgument, "square side must be > 0");
  const double h = 0.5 * side;
  const std::vector<Vec3> pts{Vec3(-h, -h, z_plane), Vec3(h, -h, z_plane), Vec3(h, h, z_plane),
                              Vec3(-h, h, z_plane), Vec3(-h, -h, z_plane)};
  const double seg = cycle_time / 4.0;
  return polyline(params, pts, {seg, seg, seg, seg}, dt);
}

namespace {

struct CurveDerivs {
  Eigen::Vector2d c, d1, d2;
};

CurveDerivs butterfly_derivs(double phi) {
  // One period of the polar butterfly. The slow sin^5(phi/12) term only matters across the
  // 12-pi repetition (whose near-cusps are not trackable), so it is left out to keep the loop closed.
  const double ec = std::exp(std::cos(phi));
  const double r = ec - 2.0 * std::cos(4.0 * phi);
  const double r1 = -std::sin(phi) * ec + 8.0 * std::sin(4.0 * phi);
  const double r2 = (std::sin(phi) * std::sin(phi) - std::cos(phi)) * ec + 32.0 * std::cos(4.0 * phi);
  const double sp = std::sin(phi), cp = std::cos(phi);
  CurveDerivs d;
  d.c = {r * sp, r * cp};
  d.d1 = {r1 * sp + r * cp, r1 * cp - r * sp};
  d.d2 = {r2 * sp + 2.0 * r1 * cp - r * sp, r2 * cp - 2.0 * r1 * sp - r * cp};
  return d;
}

double speed(double phi) { return butterfly_derivs(phi).d1.norm(); }

// Five-point Gauss-Legendre integral of the curve speed.
double arc_piece(double a, double b) {
  static const double x[5] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                              0.9061798459386640};
  static const double w[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                              0.2369268850561891, 0.2369268850561891};
  const double h = 0.5 * (b - a), m = 0.5 * (a + b);
  double s = 0.0;
  for (int i = 0; i < 5; ++i) s += w[i] * speed(m + h * x[i]);
  return s * h;
}

struct ArcTable {
  std::vector<double> phi, arc;

  explicit ArcTable(int intervals) {
    const double end = 2.0 * kPi;
    phi.resize(intervals + 1);
    arc.resize(intervals + 1);
    arc[0] = 0.0;
    for (int i = 0; i <= intervals; ++i) phi[i] = end * i / intervals;
    for (int i = 0; i < intervals; ++i) arc[i + 1] = arc[i] + arc_piece(phi[i], phi[i + 1]);
  }

  double total() const { return arc.back(); }

  double invert(double sigma) const {
    sigma = std::clamp(sigma, 0.0, total());
    const auto it = std::upper_bound(arc.begin(), arc.end(), sigma);
    const std::size_t i = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - arc.begin() - 1, 0),
                                                arc.size() - 2);
    const double span = arc[i + 1] - arc[i];
    double ph = phi[i] + (span > 0 ? (sigma - arc[i]) / span : 0.0) * (phi[i + 1] - phi[i]);
    for (int it_n = 0; it_n < 8; ++it_n) {
      const double sp = speed(ph);
      if (sp < 1e-12) break;
      const double step = (arc[i] + arc_piece(phi[i], ph) - sigma) / sp;
      ph -= step;
      if (std::abs(step) < 1e-15) break;
    }
    return ph;
  }
};

}  // namespace

Eigen::Vector2d butterfly_point(double phi) { return butterfly_derivs(phi).c; }

ReferenceTrajectory butterfly_trajectory(const RobotParams& params, double scale, double z_plane,
                                         double cycle_time, double dt) {
  if (!(scale > 0.0)) fail(ErrorKind::InvalidArgument, "butterfly scale must be > 0");
  const int n = sample_count(cycle_time, dt);
  static const ArcTable table(20000);
  const double L = table.total();
  Mat p(n, 3), v(n, 3), a(n, 3);
  for (int k = 0; k < n; ++k) {
    const Scaling q = quintic_scaling(k * dt / cycle_time);
    const double sigma_dot = L * q.ds / cycle_time;
    const double sigma_ddot = L * q.dds / (cycle_time * cycle_time);
    const CurveDerivs d = butterfly_derivs(table.invert(L * q.s));
    const double g = d.d1.norm();
    Eigen::Vector2d tangent = Eigen::Vector2d::Zero(), bend = Eigen::Vector2d::Zero();
    if (g > 1e-12) {
      tangent = d.d1 / g;
      bend = (d.d2 * g * g - d.d1 * d.d1.dot(d.d2)) / (g * g * g * g);
    }
    const Eigen::Vector2d vel = scale * tangent * sigma_dot;
    const Eigen::Vector2d acc = scale * (tangent * sigma_ddot + bend * sigma_dot * sigma_dot);
    p.row(k) << scale * d.c.x(), scale * d.c.y(), z_plane;
    v.row(k) << vel.x(), vel.y(), 0.0;
    a.row(k) << acc.x(), acc.y(), 0.0;
  }
  return from_task_space(params, p, v, a, dt);
}

void write_trajectory_csv(const ReferenceTrajectory& ref, const std::string& path) {
  CsvWriter w(path, {"t", "theta1", "theta2", "theta3", "dtheta1", "dtheta2", "dtheta3", "ddtheta1",
                     "ddtheta2", "ddtheta3"});
  for (int k = 0; k < ref.size(); ++k) {
    std::vector<double> row{ref.time(k)};
    for (const Mat* m : {&ref.theta, &ref.theta_dot, &ref.theta_ddot})
      for (int j = 0; j < 3; ++j) row.push_back((*m)(k, j));
    w.row(row);
  }
  w.close();
}

ReferenceTrajectory read_trajectory_csv(const std::string& path) {
  const CsvTable t = read_csv(path);
  if (t.rows.size() < 2) fail(ErrorKind::IoError, path + ": trajectory needs at least two rows");
  const int n = static_cast<int>(t.rows.size());
  ReferenceTrajectory r;
  r.theta.resize(n, 3);
  r.theta_dot.resize(n, 3);
  r.theta_ddot.resize(n, 3);
  const int ct = t.column("t");
  const char* names[3][3] = {{"theta1", "theta2", "theta3"},
                             {"dtheta1", "dtheta2", "dtheta3"},
                             {"ddtheta1", "ddtheta2", "ddtheta3"}};
  Mat* dst[3] = {&r.theta, &r.theta_dot, &r.theta_ddot};
  for (int g = 0; g < 3; ++g)
    for (int j = 0; j < 3; ++j) {
      const int c = t.column(names[g][j]);
      for (int k = 0; k < n; ++k) (*dst[g])(k, j) = t.rows[k][c];
    }
  r.dt = t.rows[1][ct] - t.rows[0][ct];
  for (int k = 1; k < n; ++k) {
    if (std::abs(t.rows[k][ct] - t.rows[0][ct] - k * r.dt) > 1e-9) {
      fail(ErrorKind::GridMismatch, path + ": time column is not uniform");
    }
  }
  r.validate();
  return r;
}

}  // namespace deltailc
