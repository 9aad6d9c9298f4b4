#include <doctest.h>

#include <filesystem>

#include "deltailc/simulation.hpp"

using namespace deltailc;

namespace {

const RobotParams P;

const ReferenceTrajectory& ref() {
  static const ReferenceTrajectory r = pick_and_place(P, 0.06, 0.03, 6.0, -0.8151);
  return r;
}

RigidModel plant() {
  RigidModel m = RigidModel::true_plant(P);
  return m;
}

double worst(const IterationTrace& t) { return t.max_abs_e.maxCoeff(); }

}  // namespace

TEST_CASE("controller names") {
  for (ControllerKind k : {ControllerKind::AMCILC, ControllerKind::PIDILC, ControllerKind::AFC}) {
    CHECK(controller_from_string(to_string(k)) == k);
  }
  try {
    controller_from_string("lqr");
    FAIL("expected ConfigError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConfigError);
  }
  SimConfig bad;
  bad.iterations = -1;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("exact model tracks without learning") {
  SimConfig c;
  c.iterations = 0;
  const RigidModel nominal = RigidModel::nominal(P);
  const SimResult r = run_ilc(nominal, nominal, ref(), c);
  REQUIRE(r.iterations.size() == 1);
  CHECK_FALSE(r.aborted);
  CHECK(worst(r.iterations[0]) < 1e-6);
  // No mismatch means the ideal weights and residual are zero.
  CHECK(r.projection.f.norm() == 0.0);
  CHECK(r.projection.vartheta.norm() == 0.0);
}

TEST_CASE("AMCILC learns across iterations") {
  SimConfig c;
  c.iterations = 4;
  const SimResult r = run_ilc(plant(), RigidModel::nominal(P), ref(), c);
  REQUIRE_FALSE(r.aborted);
  REQUIRE(r.iterations.size() == 5);
  REQUIRE(r.bcef.size() == 5);
  for (int k = 1; k < 5; ++k) CHECK(worst(r.iterations[k]) < worst(r.iterations[k - 1]));
  CHECK(worst(r.iterations[4]) < 0.3 * worst(r.iterations[0]));
  for (const auto& it : r.iterations) {
    CHECK(it.max_abs_eta.maxCoeff() < c.gains.v_c);
    CHECK(it.velocity_violations == 0);
  }
  for (const auto& b : r.bcef) {
    CHECK(std::isfinite(b.E_T));
    CHECK(b.E_T >= 0.0);
  }
  CHECK(r.projection.f.norm() > 0.0);
  CHECK(r.theta_dot_max == doctest::Approx(default_theta_dot_max(ref(), c.gains.v_c)));
}

TEST_CASE("resuming from a memory checkpoint reproduces the run") {
  SimConfig c;
  c.iterations = 3;
  const RigidModel pl = plant(), nominal = RigidModel::nominal(P);
  const SimResult full = run_ilc(pl, nominal, ref(), c);

  SimConfig first = c;
  first.iterations = 1;
  const SimResult head = run_ilc(pl, nominal, ref(), first);
  const auto path = std::filesystem::temp_directory_path() / "deltailc_memory_test.csv";
  write_memory_csv(head.memory, ref().dt, path.string());
  const IterationMemory back = read_memory_csv(path.string(), c.fls.rules);
  CHECK(back.vartheta == head.memory.vartheta);
  CHECK(back.eps == head.memory.eps);
  CHECK(back.u == head.memory.u);
  CHECK_THROWS_AS(read_memory_csv(path.string(), 7), Error);
  std::filesystem::remove(path);

  const SimResult tail = resume_ilc(pl, nominal, ref(), c, back, 2);
  REQUIRE(tail.iterations.size() == 2);
  CHECK(tail.iterations[1].iteration == 3);
  CHECK(tail.iterations[1].e == full.iterations[3].e);
  CHECK(tail.memory.vartheta == full.memory.vartheta);

  try {
    resume_ilc(pl, nominal, ref(), c, IterationMemory::zeros(10, 9), 1);
    FAIL("expected GridMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::GridMismatch);
  }
}

TEST_CASE("baselines") {
  SimConfig c;
  c.iterations = 3;
  c.controller = ControllerKind::PIDILC;
  const SimResult pid = run_ilc(plant(), RigidModel::nominal(P), ref(), c);
  REQUIRE_FALSE(pid.aborted);
  REQUIRE(pid.iterations.size() == 4);
  CHECK(pid.bcef.empty());
  CHECK(worst(pid.iterations[3]) < worst(pid.iterations[0]));

  c.controller = ControllerKind::AFC;
  const SimResult afc = run_ilc(plant(), RigidModel::nominal(P), ref(), c);
  CHECK_FALSE(afc.aborted);
  CHECK(afc.iterations.size() == 1);
}

TEST_CASE("measurement noise is reproducible from the seed") {
  SimConfig c;
  c.iterations = 0;
  c.noise_std = 1e-5;
  const RigidModel pl = plant(), nominal = RigidModel::nominal(P);
  const SimResult a = run_ilc(pl, nominal, ref(), c);
  const SimResult b = run_ilc(pl, nominal, ref(), c);
  c.seed = 2;
  const SimResult d = run_ilc(pl, nominal, ref(), c);
  CHECK(a.iterations[0].e == b.iterations[0].e);
  CHECK(a.iterations[0].e != d.iterations[0].e);
}

TEST_CASE("residual report follows the modal response") {
  const ModalModel m = modal_at_pose(P, {Vec3(0, 0, -0.8151)}).truncated(3);
  const ResidualReport none = residual_vibration_report(Mat::Zero(50, 3), 1e-3, m, false);
  CHECK(none.mode_envelope.norm() == 0.0);
  CHECK(none.mode_frequency.size() == 3);
  CHECK(none.t_end == doctest::Approx(0.049));

  Mat acc = Mat::Zero(50, 3);
  acc.col(0).setConstant(1.0);
  const ResidualReport r = residual_vibration_report(acc, 1e-3, m, true);
  CHECK(r.shaped);
  CHECK(r.mode_envelope.maxCoeff() > 0.0);
  CHECK(r.connection_peak.size() == 6);
}
