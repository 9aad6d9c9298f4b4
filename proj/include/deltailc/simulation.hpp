#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "deltailc/controllers.hpp"
#include "deltailc/errors.hpp"
#include "deltailc/flexible_modal.hpp"
#include "deltailc/fls.hpp"
#include "deltailc/rigid_dynamics.hpp"
#include "deltailc/trajectory.hpp"

namespace deltailc {

enum class ControllerKind { AMCILC, PIDILC, AFC };

const char* to_string(ControllerKind kind);
/// Accepts "amcilc", "pidilc", "afc". Throws ConfigError.
ControllerKind controller_from_string(const std::string& name);

struct SimConfig {
  int iterations = 20;  // learning iterations after iteration 0
  ControllerKind controller = ControllerKind::AMCILC;
  AMCILCGains gains = AMCILCGains::case2();
  AMCILCGains afc_gains = AMCILCGains::afc();
  PIDGains pid_bootstrap = PIDGains::bootstrap();
  PIDGains pid_learning = PIDGains::learning();
  FLSConfig fls = FLSConfig::defaults();
  double weight_lower = -50.0;
  double weight_upper = 50.0;
  double theta_dot_max = 0.0;  // 0 derives 1.1 (v_c + max reference rate)
  double noise_std = 0.0;      // measurement noise on theta and theta_dot
  std::uint64_t seed = 1;
  double bcef_ridge = 1e-6;

  void validate() const;
};

/// One closed-loop run on the reference grid.
struct IterationTrace {
  int iteration = 0;
  int samples = 0;  // valid rows (less than the grid on abort)
  bool aborted = false;
  ErrorKind error_kind = ErrorKind::InvalidArgument;
  std::string error;

  Mat theta, theta_dot, theta_ddot, e, e_dot, eta, u;  // N x 3

  Vec3 max_abs_e = Vec3::Zero();
  Vec3 e_dot_norm = Vec3::Zero();
  Vec3 max_abs_eta = Vec3::Zero();
  Vec3 max_abs_theta_dot = Vec3::Zero();
  int velocity_violations = 0;
};

/// Ideal weights standing in for the unknown vartheta, plus the residual eps*(t),
/// both taken from the injected mismatch along the reference.
struct MismatchProjection {
  Mat vartheta;  // rules x 3, inside the weight bounds
  Mat f;         // N x 3 mismatch
  Mat eps;       // N x 3
};

MismatchProjection project_mismatch(const RigidModel& nominal, const RigidModel& plant,
                                    const ReferenceTrajectory& ref, const FLSConfig& fls,
                                    double lower, double upper, double ridge = 1e-6);

struct BCEFIteration {
  Vec V_eta, V_vartheta, V_eps, E;  // on the grid
  double E_T = 0.0;
};

BCEFIteration bcef_monitor(const IterationTrace& trace, const IterationMemory& memory,
                           const MismatchProjection& projection, const AMCILCGains& gains, double dt);

struct SimResult {
  ControllerKind controller = ControllerKind::AMCILC;
  double theta_dot_max = 0.0;
  std::vector<IterationTrace> iterations;
  std::vector<BCEFIteration> bcef;  // AMCILC only
  MismatchProjection projection;
  IterationMemory memory;  // memory after the last completed iteration
  bool aborted = false;
  std::string error;
  int barrier_violations = 0;
};

/// Runs one iteration. The next memory (estimates or applied input) is written to
/// `next`. Errors abort the run and are reported in the trace.
IterationTrace simulate_iteration(const RigidModel& plant, const RigidModel& nominal,
                                  const ReferenceTrajectory& ref, const IterationMemory& prev,
                                  const SimConfig& config, int iteration, double theta_dot_max,
                                  IterationMemory& next);

using IterationCallback = std::function<void(const IterationTrace&, const IterationMemory&)>;

/// Iterations 0..config.iterations with memory threading. The adaptive fuzzy
/// baseline does not learn across runs and is simulated once.
SimResult run_ilc(const RigidModel& plant, const RigidModel& nominal, const ReferenceTrajectory& ref,
                  const SimConfig& config, const IterationCallback& on_iteration = {});

/// Continues a run from a checkpointed memory: iterations first_iteration..config.iterations.
/// Throws GridMismatch when the memory does not match the reference grid.
SimResult resume_ilc(const RigidModel& plant, const RigidModel& nominal, const ReferenceTrajectory& ref,
                     const SimConfig& config, const IterationMemory& memory, int first_iteration,
                     const IterationCallback& on_iteration = {});

double default_theta_dot_max(const ReferenceTrajectory& ref, double v_c);

struct ResidualReport {
  bool shaped = false;
  double t_end = 0.0;
  Vec mode_frequency;
  Vec mode_envelope;    // per mode
  Vec mode_peak;        // per mode
  Vec connection_peak;  // per lower-arm connection point, z
};

ResidualReport residual_vibration_report(const Mat& joint_accel, double dt, const ModalModel& modal,
                                         bool shaped);

void write_memory_csv(const IterationMemory& memory, double dt, const std::string& path);
IterationMemory read_memory_csv(const std::string& path, int rules);

}  // namespace deltailc
