// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <complex>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "deltailc/config.hpp"
#include "deltailc/pipeline.hpp"

using namespace deltailc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("[%s] %2d %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), s);
  std::fflush(stdout);
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ExperimentConfig defaults() { return config_from_json(default_config_json()); }

// Damped oscillator x'' + 2 zeta w x' + w^2 x = 0 hit by unit-area impulses
// (velocity jumps), integrated with RK4 between impulses. Returns the free
// vibration envelope right after the last impulse.
double simulated_envelope(const ShaperSpec& s, double w, double zeta) {
  const double period = 2 * kPi / w;
  double x = 0.0, v = 0.0;
  auto rk4 = [&](double h) {
    auto acc = [&](double xx, double vv) { return -2 * zeta * w * vv - w * w * xx; };
    const double k1x = v, k1v = acc(x, v);
    const double k2x = v + 0.5 * h * k1v, k2v = acc(x + 0.5 * h * k1x, v + 0.5 * h * k1v);
    const double k3x = v + 0.5 * h * k2v, k3v = acc(x + 0.5 * h * k2x, v + 0.5 * h * k2v);
    const double k4x = v + h * k3v, k4v = acc(x + h * k3x, v + h * k3v);
    x += h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x);
    v += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
  };
  for (int j = 0; j < 3; ++j) {
    if (j > 0) {
      const double gap = s.t[j] - s.t[j - 1];
      const int steps = std::max(50, static_cast<int>(std::ceil(gap / (period / 2000))));
      for (int n = 0; n < steps; ++n) rk4(gap / steps);
    }
    v += s.A[j];
  }
  const double wd = w * std::sqrt(1 - zeta * zeta);
  const double c = (v + zeta * w * x) / wd;
  return std::sqrt(x * x + c * c);
}

// Residual ratio written out independently of the library.
double reference_residual(double f_n, double zeta_d, double k_t, double w, double zeta) {
  if (k_t == 0.0) return 1.0;
  const double wn = 2 * kPi * f_n, wdn = wn * std::sqrt(1 - zeta_d * zeta_d);
  const double T = k_t * kPi / wdn;
  const double K = std::exp(-zeta_d * wn * T), c = std::cos(wdn * T);
  const double den = 1 - 2 * K * c + K * K;
  const double A[3] = {1 / den, -2 * K * c / den, K * K / den};
  const double wd = w * std::sqrt(1 - zeta * zeta);
  std::complex<double> sum = 0.0;
  for (int j = 0; j < 3; ++j) sum += A[j] * std::exp(std::complex<double>(zeta * w * j * T, wd * j * T));
  return std::exp(-zeta * w * 2 * T) * std::abs(sum);
}

struct ScanResult {
  double f_n = 0, k_t = 0, J = 1e300;
};

ScanResult brute_force_scan(double f_min, double f_max, double zeta, double step) {
  const int nf = static_cast<int>(std::floor((f_max - f_min) / step + 1e-9)) + 1;
  const int nk = static_cast<int>(std::floor(1.0 / step + 1e-9)) + 1;
  std::vector<double> w(nf);
  for (int i = 0; i < nf; ++i) w[i] = 2 * kPi * (f_min + i * step);
  ScanResult best;
  for (int i = 0; i < nf; ++i) {
    const double f = f_min + i * step;
    for (int j = 0; j < nk; ++j) {
      const double k = std::min(j * step, 1.0);
      double worst = 0.0, sum = 0.0;
      for (double wi : w) {
        const double v = reference_residual(f, zeta, k, wi, zeta);
        worst = std::max(worst, v);
        sum += v;
      }
      const double J = 0.5 * worst + 0.5 * sum / nf;
      if (J < best.J) best = {f, k, J};  // strict: first (lowest f, then k) wins ties
    }
  }
  return best;
}

struct ControllerRuns {
  SimResult amcilc, pidilc;
};

ControllerRuns run_pair(TrajectoryKind kind) {
  ExperimentConfig c = defaults();
  c.trajectory.kind = kind;
  const ReferenceTrajectory ref = build_reference(c);
  ControllerRuns r;
  SimConfig s = c.sim;
  s.controller = ControllerKind::AMCILC;
  r.amcilc = run_ilc(c.plant(), c.nominal(), ref, s);
  s.controller = ControllerKind::PIDILC;
  r.pidilc = run_ilc(c.plant(), c.nominal(), ref, s);
  return r;
}

double max_err(const IterationTrace& t) { return t.max_abs_e.maxCoeff(); }

}  // namespace

int main() {
  std::mt19937_64 rng(20240501);
  auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };

  criterion(1, "shaper unit gain", [&] {
    double worst = 0.0;
    for (int n = 0; n < 1000; ++n) {
      const double f_n = uni(1.0, 100.0), zeta = uni(0.0, 0.5);
      double k = uni(0.0, 1.0);
      if (k == 0.0) k = 1.0;
      const ShaperSpec s = make_shaper(f_n, zeta, k);
      worst = std::max(worst, std::abs(s.A[0] + s.A[1] + s.A[2] - 1.0));
    }
    return Outcome{worst <= 1e-12, fmt("max |sum A - 1| = %.3g over 1000 shapers", worst)};
  });

  criterion(2, "residual ratio vs time-domain oscillator", [&] {
    double worst = 0.0;
    for (int n = 0; n < 100; ++n) {
      const double f_n = uni(1.0, 100.0), zd = uni(0.0, 0.5);
      double k = uni(0.0, 1.0);
      if (k == 0.0) k = 1.0;
      const ShaperSpec s = make_shaper(f_n, zd, k);
      const double w = 2 * kPi * f_n * uni(0.5, 2.0), zeta = uni(0.0, 0.3);
      const double V = residual_percentage(s, w, zeta);
      // A single unit impulse at time 0 has envelope 1 / w_d.
      const double single = 1.0 / (w * std::sqrt(1 - zeta * zeta));
      const double sim = simulated_envelope(s, w, zeta) / single;
      worst = std::max(worst, std::abs(sim - V) / std::max(V, 1e-12));
    }
    return Outcome{worst <= 0.02, fmt("max relative difference %.3g over 100 draws", worst)};
  });

  ShaperDesign design;
  criterion(3, "shaper optimum (uniform weighting, 16-24 Hz)", [&] {
    ObjectiveSettings s;
    s.f_min = 16.0;
    s.f_max = 24.0;
    s.zeta_design = 0.075;
    s.grid = 0.01;
    SearchGrid g;
    g.step = 0.01;
    design = optimize_shaper(uniform_weighting(s.f_min, s.f_max, s.grid), s, g);
    const ScanResult b = brute_force_scan(s.f_min, s.f_max, s.zeta_design, 0.01);
    const bool same = design.shaper.f_n == b.f_n && design.shaper.k_t == b.k_t &&
                      std::abs(design.best.J - b.J) <= 1e-12 * b.J;
    const bool near = std::abs(design.shaper.f_n - 16.4) <= 0.5 && std::abs(design.shaper.k_t - 0.83) <= 0.05;
    return Outcome{same && near,
                   fmt("optimum (%.2f Hz, %.2f), J = %.6f; brute force (%.2f Hz, %.2f) %s; "
                       "target (16.4 +- 0.5 Hz, 0.83 +- 0.05) %s",
                       design.shaper.f_n, design.shaper.k_t, design.best.J, b.f_n, b.k_t,
                       same ? "identical" : "DIFFERENT", near ? "met" : "NOT met")};
  });

  criterion(4, "FLS partition of unity", [&] {
    const FLSConfig c = FLSConfig::defaults();
    double worst = 0.0;
    for (int n = 0; n < 100000; ++n) {
      Vec x(6);
      for (int i = 0; i < 6; ++i) {
        const auto [lo, hi] = std::minmax_element(c.centers[i].begin(), c.centers[i].end());
        const double pad = 0.5 * (*hi - *lo);
        x[i] = uni(*lo - pad, *hi + pad);
      }
      worst = std::max(worst, std::abs(basis(c, x).sum() - 1.0));
    }
    return Outcome{worst <= 1e-9, fmt("max |sum phi - 1| = %.3g over 1e5 inputs", worst)};
  });

  criterion(5, "saturation inequality", [&] {
    double worst = -1e300;
    for (int n = 0; n < 10000; ++n) {
      const double lower = uni(-100.0, 0.0), upper = uni(0.0, 100.0);
      Vec v(9), raw(9), gamma(9);
      for (int j = 0; j < 9; ++j) {
        v[j] = uni(lower, upper);
        raw[j] = uni(2 * lower, 2 * upper);
        gamma[j] = uni(0.01, 50.0);
      }
      worst = std::max(worst, saturation_inequality(v, raw, gamma, lower, upper));
    }
    return Outcome{worst <= 0.0, fmt("max value %.3g over 1e4 draws", worst)};
  });

  criterion(6, "exact-model tracking", [&] {
    const ExperimentConfig c = defaults();
    SimConfig s = c.sim;
    s.iterations = 0;
    const RigidModel nominal = c.nominal();
    const SimResult r = run_ilc(nominal, nominal, build_reference(c), s);
    if (r.aborted) return Outcome{false, r.error};
    const double e = max_err(r.iterations[0]);
    return Outcome{e < 1e-6, fmt("max|e| = %.3g rad on pick-and-place", e)};
  });

  const ExperimentConfig base = defaults();
  ControllerRuns se, by;
  bool ran = false;
  criterion(7, "AMCILC convergence on square and butterfly", [&] {
    se = run_pair(TrajectoryKind::Square);
    by = run_pair(TrajectoryKind::Butterfly);
    ran = true;
    std::ostringstream os;
    bool ok = true;
    for (const auto& [name, r] : {std::pair<const char*, const SimResult*>{"square", &se.amcilc},
                                  {"butterfly", &by.amcilc}}) {
      if (r->aborted || static_cast<int>(r->iterations.size()) != base.sim.iterations + 1) {
        ok = false;
        os << name << " aborted: " << r->error << "; ";
        continue;
      }
      const double e0 = max_err(r->iterations.front()), e20 = max_err(r->iterations.back());
      ok = ok && e20 <= 0.01 * e0 && e20 <= 1e-3;
      os << fmt("%s %.3g -> %.3g rad (%.2f%%); ", name, e0, e20, 100 * e20 / e0);
    }
    return Outcome{ok, os.str()};
  });

  criterion(8, "AMCILC beats PIDILC at the last iteration", [&] {
    if (!ran) return Outcome{false, "criterion 7 runs missing"};
    std::ostringstream os;
    bool ok = true;
    for (const auto& [name, r] : {std::pair<const char*, const ControllerRuns*>{"square", &se}, {"butterfly", &by}}) {
      if (r->amcilc.aborted || r->pidilc.aborted) {
        ok = false;
        os << name << " aborted; ";
        continue;
      }
      const double a = max_err(r->amcilc.iterations.back()), p = max_err(r->pidilc.iterations.back());
      ok = ok && a < p;
      os << fmt("%s AMCILC %.3g vs PIDILC %.3g rad; ", name, a, p);
    }
    return Outcome{ok, os.str()};
  });

  criterion(9, "state constraints", [&] {
    if (!ran) return Outcome{false, "criterion 7 runs missing"};
    std::ostringstream os;
    bool ok = true;
    for (const auto& [name, r] : {std::pair<const char*, const SimResult*>{"square", &se.amcilc},
                                  {"butterfly", &by.amcilc}}) {
      double eta = 0.0, thd = 0.0;
      int vel = 0;
      for (const auto& t : r->iterations) {
        eta = std::max(eta, t.max_abs_eta.maxCoeff());
        thd = std::max(thd, t.max_abs_theta_dot.maxCoeff());
        vel += t.velocity_violations;
      }
      ok = ok && !r->aborted && eta < base.sim.gains.v_c && thd < r->theta_dot_max && vel == 0 &&
           r->barrier_violations == 0;
      os << fmt("%s max|eta| %.3g < %.3g, max|dtheta| %.3g < %.3g, barrier events %d; ", name, eta,
                base.sim.gains.v_c, thd, r->theta_dot_max, r->barrier_violations);
    }
    return Outcome{ok, os.str()};
  });

  criterion(10, "BCEF non-increasing", [&] {
    if (!ran) return Outcome{false, "criterion 7 runs missing"};
    std::ostringstream os;
    bool ok = true;
    for (const auto& [name, r] : {std::pair<const char*, const SimResult*>{"square", &se.amcilc},
                                  {"butterfly", &by.amcilc}}) {
      if (static_cast<int>(r->bcef.size()) != base.sim.iterations + 1) {
        ok = false;
        os << name << " incomplete; ";
        continue;
      }
      const double e0 = r->bcef[0].E_T;
      double worst = -1e300;
      for (std::size_t k = 1; k < r->bcef.size(); ++k) worst = std::max(worst, r->bcef[k].E_T - r->bcef[k - 1].E_T);
      ok = ok && worst <= 1e-3 * e0;
      os << fmt("%s E_0 %.6g, E_20 %.6g, max increase %.3g (allowed %.3g); ", name, e0, r->bcef.back().E_T,
                worst, 1e-3 * e0);
    }
    return Outcome{ok, os.str()};
  });

  criterion(11, "residual vibration suppression", [&] {
    if (design.best_index < 0) return Outcome{false, "criterion 3 design missing"};
    ExperimentConfig c = defaults();
    const ReferenceTrajectory ref = build_reference(c);
    const ReferenceTrajectory shaped = shape_trajectory(design.shaper, ref);
    const ResidualComparison cmp = compare_residuals(c, ref, shaped);
    std::ostringstream os;
    bool ok = true;
    for (int m = 0; m < cmp.unshaped.mode_envelope.size(); ++m) {
      const double u = cmp.unshaped.mode_envelope[m], s = cmp.shaped.mode_envelope[m];
      ok = ok && s < u;
      os << fmt("mode %d %.2f Hz %.3g -> %.3g; ", m + 1, cmp.unshaped.mode_frequency[m], u, s);
    }

    // Pure tones: one mode driven by a short acceleration pulse.
    const double dt = 1e-4, zeta = c.modal.damping;
    double worst = 0.0;
    for (double f : {16.0, 20.0, 22.0, 24.0}) {
      ModalModel tone;
      tone.frequencies = Vec::Constant(1, f);
      tone.modal_damping = Vec::Constant(1, zeta);
      tone.participation = Mat::Zero(1, 3);
      tone.participation(0, 0) = 1.0;
      tone.mode_shapes = Mat::Identity(1, 1);
      tone.connection_z = Mat::Zero(0, 1);
      // Starts and ends at rest like a real reference.
      Mat pulse = Mat::Zero(51, 3);
      pulse.block(1, 0, 10, 1).setConstant(1.0);
      const Mat pulse_shaped = shape_samples(design.shaper, pulse, dt);
      const double u = residual_vibration_report(pulse, dt, tone, false).mode_envelope[0];
      const double s = residual_vibration_report(pulse_shaped, dt, tone, true).mode_envelope[0];
      const double V = residual_percentage(design.shaper, 2 * kPi * f, zeta);
      worst = std::max(worst, std::abs(s / u - V) / V);
      os << fmt("tone %.0f Hz ratio %.4f vs V %.4f; ", f, s / u, V);
    }
    ok = ok && worst <= 0.2;
    return Outcome{ok, os.str()};
  });

  criterion(12, "kinematics and dynamics oracles", [&] {
    const RobotParams P;
    double ik = 0.0, jac = 0.0;
    for (int n = 0; n < 1000; ++n) {
      const double x = uni(-0.25, 0.25), y = uni(-0.25, 0.25), z = uni(-1.0, -0.7);
      const Vec3 p(x, y, z);
      const Vec3 th = inverse_kinematics({p}, P);
      ik = std::max(ik, (forward_kinematics(th, P).p - p).norm());
      const Mat3 J = jacobian(th, P);
      Mat3 fd;
      const double h = 1e-6;
      for (int j = 0; j < 3; ++j) {
        Vec3 a = th, b = th;
        a[j] += h;
        b[j] -= h;
        fd.col(j) = (forward_kinematics(a, P).p - forward_kinematics(b, P).p) / (2 * h);
      }
      jac = std::max(jac, (J - fd).norm() / J.norm());
    }
    const RigidModel m = RigidModel::nominal(P);
    JointState s{inverse_kinematics({Vec3(0.03, -0.02, -0.8151)}, P), Vec3(0.3, -0.2, 0.1)};
    const double e0 = mechanical_energy(m, s), dt = 1e-3;
    double drift = 0.0;
    auto f = [&](const JointState& x) { return forward_dynamics(m, x, Vec3::Zero()); };
    for (int n = 0; n < 1000; ++n) {
      const Vec3 a1 = f(s);
      const JointState s2{s.theta + 0.5 * dt * s.theta_dot, s.theta_dot + 0.5 * dt * a1};
      const Vec3 a2 = f(s2);
      const JointState s3{s.theta + 0.5 * dt * s2.theta_dot, s.theta_dot + 0.5 * dt * a2};
      const Vec3 a3 = f(s3);
      const JointState s4{s.theta + dt * s3.theta_dot, s.theta_dot + dt * a3};
      const Vec3 a4 = f(s4);
      s = {s.theta + dt / 6 * (s.theta_dot + 2 * s2.theta_dot + 2 * s3.theta_dot + s4.theta_dot),
           s.theta_dot + dt / 6 * (a1 + 2 * a2 + 2 * a3 + a4)};
      drift = std::max(drift, std::abs(mechanical_energy(m, s) - e0) / std::abs(e0));
    }
    return Outcome{ik < 1e-9 && jac < 1e-5 && drift < 1e-5,
                   fmt("FK(IK) %.3g m, Jacobian %.3g relative, energy drift %.3g relative", ik, jac, drift)};
  });

  criterion(13, "first mode falls along the axis", [&] {
    const RobotParams P;
    std::ostringstream os;
    bool ok = true;
    double prev = 1e300;
    auto planes = z_plane_range(-1.05, -0.65, 9);
    std::reverse(planes.begin(), planes.end());  // top plane first
    for (double z : planes) {
      const double f1 = first_frequency(P, {Vec3(0, 0, z)});
      ok = ok && f1 < prev;
      prev = f1;
      os << fmt("%.3f:%.2f ", z, f1);
    }
    os << "(z m : f1 Hz)";
    return Outcome{ok, os.str()};
  });

  std::printf("%d of 13 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
