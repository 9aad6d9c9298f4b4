#include <doctest.h>

#include <random>

#include "deltailc/errors.hpp"
#include "deltailc/kinematics.hpp"

using namespace deltailc;

namespace {

const RobotParams P;

Vec3 random_pose(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> xy(-0.25, 0.25), z(-1.0, -0.7);
  return {xy(rng), xy(rng), z(rng)};
}

Mat3 rot_z(double a) {
  return Eigen::AngleAxisd(a, Vec3::UnitZ()).toRotationMatrix();
}

}  // namespace

TEST_CASE("axis poses give equal joint angles and FK returns to the axis") {
  for (double z : {-0.7, -0.8151, -1.0}) {
    const Vec3 th = inverse_kinematics({Vec3(0, 0, z)}, P);
    CHECK(th(0) == doctest::Approx(th(1)).epsilon(1e-12));
    CHECK(th(1) == doctest::Approx(th(2)).epsilon(1e-12));
    const Vec3 p = forward_kinematics(th, P).p;
    CHECK(std::abs(p.x()) < 1e-12);
    CHECK(std::abs(p.y()) < 1e-12);
    CHECK(p.z() == doctest::Approx(z).epsilon(1e-12));
  }
}

TEST_CASE("IK and FK invert each other") {
  std::mt19937_64 rng(7);
  double worst_p = 0.0, worst_th = 0.0;
  for (int n = 0; n < 500; ++n) {
    const Vec3 p = random_pose(rng);
    const Vec3 th = inverse_kinematics({p}, P);
    worst_p = std::max(worst_p, (forward_kinematics(th, P).p - p).norm());
    worst_th = std::max(worst_th, (inverse_kinematics(forward_kinematics(th, P), P) - th).norm());
  }
  CHECK(worst_p < 1e-9);
  CHECK(worst_th < 1e-9);
}

TEST_CASE("every elbow sits l2 away from its platform attachment") {
  const Vec3 p(0.1, -0.05, -0.9);
  const Vec3 th = inverse_kinematics({p}, P);
  for (int i = 0; i < 3; ++i) {
    const Vec3 link = p + platform_offset(i, P) - elbow_point(i, th(i), P);
    CHECK(link.norm() == doctest::Approx(P.l2).epsilon(1e-12));
  }
}

TEST_CASE("rotating a pose by 120 degrees permutes the joint angles") {
  const Vec3 p(0.12, 0.04, -0.85);
  const Vec3 a = inverse_kinematics({p}, P);
  const Vec3 b = inverse_kinematics({rot_z(2.0 * kPi / 3.0) * p}, P);
  // Chain i at the rotated pose sees what chain i-1 saw before.
  CHECK(b(1) == doctest::Approx(a(0)).epsilon(1e-10));
  CHECK(b(2) == doctest::Approx(a(1)).epsilon(1e-10));
  CHECK(b(0) == doctest::Approx(a(2)).epsilon(1e-10));
}

TEST_CASE("unreachable and singular poses are reported") {
  CHECK_THROWS_AS(inverse_kinematics({Vec3(0, 0, -3.0)}, P), Error);
  try {
    inverse_kinematics({Vec3(2.0, 0, -0.5)}, P);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnreachablePose);
  }
  // With the default arms the elbow spheres always meet; a short lower arm
  // leaves them apart.
  RobotParams short_arm = P;
  short_arm.l2 = 0.2;
  try {
    forward_kinematics(Vec3::Zero(), short_arm);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoIntersection);
  }
}

TEST_CASE("Jacobian matches central differences of FK") {
  std::mt19937_64 rng(11);
  for (int n = 0; n < 50; ++n) {
    const Vec3 th = inverse_kinematics({random_pose(rng)}, P);
    const Mat3 J = jacobian(th, P);
    Mat3 fd;
    const double h = 1e-6;
    for (int j = 0; j < 3; ++j) {
      Vec3 a = th, b = th;
      a(j) += h;
      b(j) -= h;
      fd.col(j) = (forward_kinematics(a, P).p - forward_kinematics(b, P).p) / (2 * h);
    }
    CHECK((J - fd).norm() / J.norm() < 1e-6);
  }
}

TEST_CASE("symmetric pose Jacobian has equal column norms") {
  const Mat3 J = jacobian(inverse_kinematics({Vec3(0, 0, -0.8151)}, P), P);
  CHECK(J.col(0).norm() == doctest::Approx(J.col(1).norm()).epsilon(1e-12));
  CHECK(J.col(1).norm() == doctest::Approx(J.col(2).norm()).epsilon(1e-12));
}

TEST_CASE("J_dot matches the time derivative of J along a motion") {
  const Vec3 th = inverse_kinematics({Vec3(0.05, 0.02, -0.85)}, P);
  const Vec3 w(0.3, -0.2, 0.5);
  const KinematicTerms k = kinematic_terms(th, w, P);
  const double h = 1e-6;
  const Mat3 fd = (jacobian(th + h * w, P) - jacobian(th - h * w, P)) / (2 * h);
  CHECK((k.J_dot - fd).norm() / fd.norm() < 1e-6);
}

TEST_CASE("task_to_joint reproduces IK, J and the second derivative") {
  const Vec3 p(0.03, -0.04, -0.82), v(0.1, 0.05, -0.02), a(-0.3, 0.2, 0.1);
  const JointSample s = task_to_joint(p, v, a, P);
  CHECK((s.theta - inverse_kinematics({p}, P)).norm() < 1e-12);
  CHECK((jacobian(s.theta, P) * s.theta_dot - v).norm() < 1e-12);
  const double h = 1e-5;
  const Vec3 thp = task_to_joint(p + h * v + 0.5 * h * h * a, v + h * a, a, P).theta_dot;
  const Vec3 thm = task_to_joint(p - h * v + 0.5 * h * h * a, v - h * a, a, P).theta_dot;
  CHECK(((thp - thm) / (2 * h) - s.theta_ddot).norm() < 1e-6);
}

TEST_CASE("condition number grows towards the workspace edge") {
  double prev = 0.0;
  for (double r = 0.0; r <= 0.5; r += 0.1) {
    const double c = condition_number(jacobian(inverse_kinematics({Vec3(r, 0, -0.8151)}, P), P, 1e12));
    CHECK(c > prev);
    prev = c;
  }
}

TEST_CASE("workspace sampling") {
  GridSpec g;
  g.half_width = 0.1;
  g.spacing = 0.05;
  g.z_planes = {-0.8151};
  const auto s = sample_workspace(P, g);
  CHECK(s.size() == 25);  // coarse 5x5 grid is fully reachable
  double area = 0.0;
  for (const auto& w : s) area += w.weight;
  CHECK(area == doctest::Approx(25 * 0.05 * 0.05));

  GridSpec above = g;
  above.z_planes = {0.2};
  try {
    sample_workspace(P, above);
    FAIL("expected EmptyWorkspace");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyWorkspace);
  }

  // Refinement changes the reachable area estimate by little.
  GridSpec coarse;
  coarse.half_width = 1.0;
  coarse.spacing = 0.04;
  coarse.z_planes = {-0.9};
  GridSpec fine = coarse;
  fine.spacing = 0.02;
  double a1 = 0.0, a2 = 0.0;
  for (const auto& w : sample_workspace(P, coarse)) a1 += w.weight;
  for (const auto& w : sample_workspace(P, fine)) a2 += w.weight;
  CHECK(std::abs(a1 - a2) / a2 < 0.05);

  CHECK_THROWS_AS(sample_workspace(P, GridSpec{0.1, 0.0, {-0.8}}), Error);
}

TEST_CASE("z_plane_range is evenly spaced and inclusive") {
  const auto z = z_plane_range(-1.0, -0.6, 5);
  REQUIRE(z.size() == 5);
  CHECK(z.front() == doctest::Approx(-1.0));
  CHECK(z.back() == doctest::Approx(-0.6));
  CHECK(z[1] - z[0] == doctest::Approx(0.1));
}
