#include "deltailc/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "deltailc/csv.hpp"

namespace deltailc {

const char* to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::AMCILC: return "amcilc";
    case ControllerKind::PIDILC: return "pidilc";
    case ControllerKind::AFC: return "afc";
  }
  return "unknown";
}

ControllerKind controller_from_string(const std::string& name) {
  if (name == "amcilc") return ControllerKind::AMCILC;
  if (name == "pidilc") return ControllerKind::PIDILC;
  if (name == "afc") return ControllerKind::AFC;
  fail(ErrorKind::ConfigError, "unknown controller '" + name + "'");
}

void SimConfig::validate() const {
  if (iterations < 0) fail(ErrorKind::InvalidArgument, "iterations must be >= 0");
  fls.validate();
  gains.validate(fls.rules);
  afc_gains.validate(fls.rules);
  if (!(weight_lower <= weight_upper)) fail(ErrorKind::InvalidArgument, "weight bounds are not ordered");
  if (!(theta_dot_max >= 0.0)) fail(ErrorKind::InvalidArgument, "theta_dot_max must be >= 0");
  if (!(noise_std >= 0.0)) fail(ErrorKind::InvalidArgument, "noise std must be >= 0");
  if (!(bcef_ridge >= 0.0)) fail(ErrorKind::InvalidArgument, "ridge must be >= 0");
}

double default_theta_dot_max(const ReferenceTrajectory& ref, double v_c) {
  return 1.1 * (v_c + ref.max_speed());
}

namespace {

// Quintic Hermite interpolation inside one grid step, s in [0, 1].
JointSample hermite(const ReferenceTrajectory& ref, int n, double s) {
  if (s <= 0.0) return ref.sample(n);
  if (s >= 1.0) return ref.sample(n + 1);
  const double h = ref.dt;
  const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
  const double h0 = 1 - 10 * s3 + 15 * s4 - 6 * s5, h1 = s - 6 * s3 + 8 * s4 - 3 * s5;
  const double h2 = 0.5 * (s2 - 3 * s3 + 3 * s4 - s5), h3 = 0.5 * (s3 - 2 * s4 + s5);
  const double h4 = -4 * s3 + 7 * s4 - 3 * s5, h5 = 10 * s3 - 15 * s4 + 6 * s5;
  const double d0 = -30 * s2 + 60 * s3 - 30 * s4, d1 = 1 - 18 * s2 + 32 * s3 - 15 * s4;
  const double d2 = 0.5 * (2 * s - 9 * s2 + 12 * s3 - 5 * s4), d3 = 0.5 * (3 * s2 - 8 * s3 + 5 * s4);
  const double d4 = -12 * s2 + 28 * s3 - 15 * s4;
  const double a0 = -60 * s + 180 * s2 - 120 * s3, a1 = -36 * s + 96 * s2 - 60 * s3;
  const double a2 = 0.5 * (2 - 18 * s + 36 * s2 - 20 * s3), a3 = 0.5 * (6 * s - 24 * s2 + 20 * s3);
  const double a4 = -24 * s + 84 * s2 - 60 * s3;
  const JointSample p = ref.sample(n), q = ref.sample(n + 1);
  JointSample r;
  r.theta = h0 * p.theta + h1 * h * p.theta_dot + h2 * h * h * p.theta_ddot + h3 * h * h * q.theta_ddot +
            h4 * h * q.theta_dot + h5 * q.theta;
  r.theta_dot = (d0 * (p.theta - q.theta)) / h + d1 * p.theta_dot + d2 * h * p.theta_ddot +
                d3 * h * q.theta_ddot + d4 * q.theta_dot;
  r.theta_ddot = (a0 * (p.theta - q.theta)) / (h * h) + a1 * p.theta_dot / h + a2 * p.theta_ddot +
                 a3 * q.theta_ddot + a4 * q.theta_dot / h;
  return r;
}

Eigen::RowVectorXd lerp_row(const Mat& m, int n, double s) {
  if (s <= 0.0) return m.row(n);
  return (1.0 - s) * m.row(n) + s * m.row(n + 1);
}

struct StageOutput {
  Vec3 u, theta_ddot, e, e_dot, eta;
  Mat weights;  // current estimate (AMCILC)
  Vec3 eps = Vec3::Zero();
};

}  // namespace

IterationTrace simulate_iteration(const RigidModel& plant, const RigidModel& nominal,
                                  const ReferenceTrajectory& ref, const IterationMemory& prev,
                                  const SimConfig& cfg, int iteration, double theta_dot_max,
                                  IterationMemory& next) {
  ref.validate();
  const int N = ref.size();
  const int l = cfg.fls.rules;
  if (prev.samples() != N || prev.rules() != l) {
    fail(ErrorKind::GridMismatch, "iteration memory does not match the reference grid");
  }
  const double dt = ref.dt;
  const bool learn = iteration > 0;
  const ControllerKind kind = cfg.controller;
  const AMCILCGains& gains = kind == ControllerKind::AFC ? cfg.afc_gains : cfg.gains;

  int aux = 0;
  if (kind == ControllerKind::PIDILC) aux = 3;
  if (kind == ControllerKind::AFC) aux = 3 * l + 3;

  IterationTrace tr;
  tr.iteration = iteration;
  for (Mat* m : {&tr.theta, &tr.theta_dot, &tr.theta_ddot, &tr.e, &tr.e_dot, &tr.eta, &tr.u})
    *m = Mat::Zero(N, 3);
  next = IterationMemory::zeros(N, l);

  std::mt19937_64 rng(cfg.seed + 7919ULL * static_cast<std::uint64_t>(iteration));
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec noise = Vec::Zero(6);

  // Assumption 1: every iteration starts on the reference.
  Vec y = Vec::Zero(6 + aux);
  y.head<3>() = ref.theta.row(0).transpose();
  y.segment<3>(3) = ref.theta_dot.row(0).transpose();

  auto stage = [&](int n, double s, const Vec& ys, Vec& ydot, StageOutput* out) {
    const JointSample r = hermite(ref, n, s);
    const JointState truth{ys.head<3>(), ys.segment<3>(3)};
    const JointState meas{truth.theta + noise.head<3>(), truth.theta_dot + noise.tail<3>()};
    const KinematicTerms kin_true = kinematic_terms(truth.theta, truth.theta_dot, plant.params);
    const KinematicTerms kin_meas = cfg.noise_std > 0.0
                                        ? kinematic_terms(meas.theta, meas.theta_dot, nominal.params)
                                        : kin_true;
    const Vec3 e = meas.theta - r.theta;
    const Vec3 e_dot = meas.theta_dot - r.theta_dot;
    const Vec3 eta = auxiliary_error(e, e_dot, gains.sigma);
    ydot.resize(ys.size());
    Vec3 u;
    Mat weights;
    Vec3 eps = Vec3::Zero();

    if (kind == ControllerKind::PIDILC) {
      const Vec3 int_e = ys.segment<3>(6);
      if (!learn) {
        u = pid_bootstrap(e, e_dot, int_e, cfg.pid_bootstrap);
      } else {
        u = pidilc_control(lerp_row(prev.u, n, s).transpose(), e, e_dot, int_e, cfg.pid_learning);
      }
      ydot.segment<3>(6) = e;
    } else {
      const DynamicsTerms nom = compute_terms(nominal, meas, kin_meas);
      const BarrierTerms b = barrier_terms(eta, gains.v_c);
      const Vec3 lambda = barrier_gradient(b.Psi, nom.M.inverse());
      Vec x(6);
      x << meas.theta, meas.theta_dot;
      const Vec phi = basis(cfg.fls, x);
      if (kind == ControllerKind::AMCILC) {
        if (learn) {
          const Eigen::RowVectorXd row = lerp_row(prev.vartheta, n, s);
          Mat w_prev(l, 3);
          for (int i = 0; i < 3; ++i) w_prev.col(i) = row.segment(i * l, l).transpose();
          const LearningStep st = learning_step(w_prev, lerp_row(prev.eps, n, s).transpose(), phi,
                                                lambda, gains, cfg.weight_lower, cfg.weight_upper);
          weights = st.vartheta;
          eps = st.eps;
        } else {
          weights = Mat::Zero(l, 3);
        }
      } else {
        weights.resize(l, 3);
        for (int i = 0; i < 3; ++i) weights.col(i) = ys.segment(6 + i * l, l);
        eps = ys.segment<3>(6 + 3 * l);
        const AFCRates rates = afc_update_rates(phi, lambda, gains);
        for (int i = 0; i < 3; ++i) ydot.segment(6 + i * l, l) = rates.d_vartheta.col(i);
        ydot.segment<3>(6 + 3 * l) = rates.d_eps;
      }
      const Vec3 estimate = weights.transpose() * phi + eps;
      u = compensated_control(nom, {meas.theta, meas.theta_dot, Vec3::Zero()}, r, estimate,
                              gains.sigma, gains.k);
    }

    const DynamicsTerms tru = compute_terms(plant, truth, kin_true);
    const Vec3 acc = forward_dynamics(tru, truth, u);
    ydot.head<3>() = truth.theta_dot;
    ydot.segment<3>(3) = acc;
    if (out) {
      out->u = u;
      out->theta_ddot = acc;
      out->e = e;
      out->e_dot = e_dot;
      out->eta = eta;
      out->weights = weights;
      out->eps = eps;
    }
  };

  Vec k1, k2, k3, k4;
  try {
    for (int n = 0; n < N; ++n) {
      if (cfg.noise_std > 0.0) {
        for (int j = 0; j < 6; ++j) noise[j] = cfg.noise_std * gauss(rng);
      }
      StageOutput out;
      stage(n, 0.0, y, k1, &out);
      tr.theta.row(n) = y.head<3>().transpose();
      tr.theta_dot.row(n) = y.segment<3>(3).transpose();
      tr.theta_ddot.row(n) = out.theta_ddot.transpose();
      tr.e.row(n) = (y.head<3>() - ref.theta.row(n).transpose()).transpose();
      tr.e_dot.row(n) = (y.segment<3>(3) - ref.theta_dot.row(n).transpose()).transpose();
      tr.eta.row(n) = auxiliary_error(tr.e.row(n).transpose(), tr.e_dot.row(n).transpose(), gains.sigma).transpose();
      tr.u.row(n) = out.u.transpose();
      next.u.row(n) = out.u.transpose();
      next.e.row(n) = out.e.transpose();
      next.e_dot.row(n) = out.e_dot.transpose();
      next.eta.row(n) = out.eta.transpose();
      if (kind == ControllerKind::AMCILC) {
        next.set_weights(n, out.weights);
        next.eps.row(n) = out.eps.transpose();
      } else if (kind == ControllerKind::AFC) {
        next.set_weights(n, out.weights);
        next.eps.row(n) = out.eps.transpose();
      }
      tr.samples = n + 1;
      if (n + 1 == N) break;

      stage(n, 0.5, y + 0.5 * dt * k1, k2, nullptr);
      stage(n, 0.5, y + 0.5 * dt * k2, k3, nullptr);
      stage(n, 1.0, y + dt * k3, k4, nullptr);
      y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (!y.allFinite()) {
        fail(ErrorKind::NumericalDivergence, "state diverged at t = " + std::to_string((n + 1) * dt));
      }
    }
  } catch (const Error& err) {
    tr.aborted = true;
    tr.error_kind = err.kind();
    tr.error = err.what();
  }

  const int m = tr.samples;
  if (m > 0) {
    tr.max_abs_e = tr.e.topRows(m).cwiseAbs().colwise().maxCoeff().transpose();
    tr.e_dot_norm = tr.e_dot.topRows(m).colwise().norm().transpose();
    tr.max_abs_eta = tr.eta.topRows(m).cwiseAbs().colwise().maxCoeff().transpose();
    tr.max_abs_theta_dot = tr.theta_dot.topRows(m).cwiseAbs().colwise().maxCoeff().transpose();
    tr.velocity_violations = static_cast<int>((tr.theta_dot.topRows(m).cwiseAbs().array() >= theta_dot_max).count());
  }
  return tr;
}

MismatchProjection project_mismatch(const RigidModel& nominal, const RigidModel& plant,
                                    const ReferenceTrajectory& ref, const FLSConfig& fls,
                                    double lower, double upper, double ridge) {
  ref.validate();
  const int N = ref.size();
  MismatchProjection p;
  p.f = Mat::Zero(N, 3);
  Mat Phi(N, fls.rules);
  for (int n = 0; n < N; ++n) {
    const JointSample r = ref.sample(n);
    const JointState s{r.theta, r.theta_dot};
    const KinematicTerms kin = kinematic_terms(s.theta, s.theta_dot, nominal.params);
    const DynamicsTerms a = compute_terms(nominal, s, kin);
    const DynamicsTerms b = compute_terms(plant, s, kin);
    p.f.row(n) = ((a.M - b.M) * r.theta_ddot + (a.C - b.C) * r.theta_dot + (a.G - b.G) -
                  b.B * r.theta_dot).transpose();
    Vec x(6);
    x << r.theta, r.theta_dot;
    Phi.row(n) = basis(fls, x).transpose();
  }
  Mat A = Phi.transpose() * Phi;
  const double lambda = ridge * std::max(A.trace() / fls.rules, 1e-300);
  A.diagonal().array() += lambda;
  const Eigen::LDLT<Mat> ldlt(A);
  p.vartheta = saturate(Mat(ldlt.solve(Phi.transpose() * p.f)), lower, upper);
  p.eps = p.f - Phi * p.vartheta;
  return p;
}

BCEFIteration bcef_monitor(const IterationTrace& trace, const IterationMemory& memory,
                           const MismatchProjection& projection, const AMCILCGains& gains, double dt) {
  const int N = trace.samples;
  if (memory.samples() < N || projection.eps.rows() < N) {
    fail(ErrorKind::GridMismatch, "BCEF inputs do not cover the iteration");
  }
  BCEFIteration b;
  b.V_eta = Vec::Zero(N);
  b.V_vartheta = Vec::Zero(N);
  b.V_eps = Vec::Zero(N);
  const double vc2 = gains.v_c * gains.v_c;
  double prev_w = 0.0, prev_e = 0.0;
  for (int n = 0; n < N; ++n) {
    for (int i = 0; i < 3; ++i) {
      const double eta = trace.eta(n, i);
      b.V_eta[n] += vc2 / kPi * std::tan(kPi * eta * eta / (2.0 * vc2));
    }
    const Mat w = memory.weights_at(n);
    double iw = 0.0, ie = 0.0;
    for (int i = 0; i < 3; ++i) {
      const Vec diff = projection.vartheta.col(i) - w.col(i);
      iw += 0.5 * (diff.array().square() / gains.gamma.col(i).array()).sum();
      const double de = projection.eps(n, i) - memory.eps(n, i);
      ie += de * de / (2.0 * gains.nu[i]);
    }
    if (n > 0) {
      b.V_vartheta[n] = b.V_vartheta[n - 1] + 0.5 * dt * (prev_w + iw);
      b.V_eps[n] = b.V_eps[n - 1] + 0.5 * dt * (prev_e + ie);
    }
    prev_w = iw;
    prev_e = ie;
  }
  b.E = b.V_eta + b.V_vartheta + b.V_eps;
  b.E_T = N > 0 ? b.E[N - 1] : 0.0;
  return b;
}

SimResult run_ilc(const RigidModel& plant, const RigidModel& nominal, const ReferenceTrajectory& ref,
                  const SimConfig& cfg, const IterationCallback& on_iteration) {
  return resume_ilc(plant, nominal, ref, cfg, IterationMemory::zeros(ref.size(), cfg.fls.rules), 0,
                    on_iteration);
}

SimResult resume_ilc(const RigidModel& plant, const RigidModel& nominal, const ReferenceTrajectory& ref,
                     const SimConfig& cfg, const IterationMemory& start, int first_iteration,
                     const IterationCallback& on_iteration) {
  cfg.validate();
  plant.validate();
  nominal.validate();
  ref.validate();
  SimResult res;
  res.controller = cfg.controller;
  const AMCILCGains& gains = cfg.controller == ControllerKind::AFC ? cfg.afc_gains : cfg.gains;
  res.theta_dot_max = cfg.theta_dot_max > 0.0 ? cfg.theta_dot_max : default_theta_dot_max(ref, gains.v_c);
  if (cfg.controller == ControllerKind::AMCILC) {
    res.projection = project_mismatch(nominal, plant, ref, cfg.fls, cfg.weight_lower, cfg.weight_upper,
                                      cfg.bcef_ridge);
  }

  if (start.samples() != ref.size() || start.rules() != cfg.fls.rules) {
    fail(ErrorKind::GridMismatch, "checkpoint memory does not match the reference grid or rule count");
  }
  if (first_iteration < 0) fail(ErrorKind::InvalidArgument, "first iteration must be >= 0");
  IterationMemory memory = start;
  const int last = cfg.controller == ControllerKind::AFC ? 0 : cfg.iterations;
  for (int k = first_iteration; k <= last; ++k) {
    IterationMemory next;
    IterationTrace tr = simulate_iteration(plant, nominal, ref, memory, cfg, k, res.theta_dot_max, next);
    if (tr.aborted) {
      res.aborted = true;
      res.error = "iteration " + std::to_string(k) + ": " + tr.error;
      if (tr.error_kind == ErrorKind::BarrierViolation) ++res.barrier_violations;
      res.iterations.push_back(std::move(tr));
      break;
    }
    if (cfg.controller == ControllerKind::AMCILC) {
      res.bcef.push_back(bcef_monitor(tr, next, res.projection, gains, ref.dt));
    }
    if (on_iteration) on_iteration(tr, next);
    res.iterations.push_back(std::move(tr));
    memory = std::move(next);
  }
  res.memory = std::move(memory);
  return res;
}

ResidualReport residual_vibration_report(const Mat& joint_accel, double dt, const ModalModel& modal,
                                         bool shaped) {
  ResidualReport r;
  r.shaped = shaped;
  r.t_end = joint_accel.rows() > 0 ? (joint_accel.rows() - 1) * dt : 0.0;
  const ResidualResponse resp = residual_oscillator_response(modal, joint_accel, dt, r.t_end);
  r.mode_frequency = modal.frequencies;
  r.mode_envelope = resp.residual_envelope;
  r.mode_peak = resp.residual_peak;
  r.connection_peak = resp.connection_peak;
  return r;
}

void write_memory_csv(const IterationMemory& memory, double dt, const std::string& path) {
  const int l = memory.rules();
  std::vector<std::string> header{"t"};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < l; ++j) header.push_back("w" + std::to_string(i + 1) + "_" + std::to_string(j + 1));
  for (const char* g : {"eps", "u", "e", "edot", "eta"})
    for (int i = 0; i < 3; ++i) header.push_back(std::string(g) + std::to_string(i + 1));
  CsvWriter w(path, header);
  for (int n = 0; n < memory.samples(); ++n) {
    std::vector<double> row{n * dt};
    for (int c = 0; c < 3 * l; ++c) row.push_back(memory.vartheta(n, c));
    for (const Mat* m : {&memory.eps, &memory.u, &memory.e, &memory.e_dot, &memory.eta})
      for (int i = 0; i < 3; ++i) row.push_back((*m)(n, i));
    w.row(row);
  }
  w.close();
}

IterationMemory read_memory_csv(const std::string& path, int rules) {
  const CsvTable t = read_csv(path);
  const int N = static_cast<int>(t.rows.size());
  if (static_cast<int>(t.header.size()) != 1 + 3 * rules + 15) {
    fail(ErrorKind::GridMismatch, path + ": column count does not match the rule count");
  }
  IterationMemory m = IterationMemory::zeros(N, rules);
  for (int n = 0; n < N; ++n) {
    int c = 1;
    for (int k = 0; k < 3 * rules; ++k) m.vartheta(n, k) = t.rows[n][c++];
    for (Mat* g : {&m.eps, &m.u, &m.e, &m.e_dot, &m.eta})
      for (int i = 0; i < 3; ++i) (*g)(n, i) = t.rows[n][c++];
  }
  return m;
}

}  // namespace deltailc
