#include "deltailc/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <thread>

#include "deltailc/csv.hpp"
#include "deltailc/errors.hpp"

namespace deltailc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::IoError, "cannot create " + dir + ": " + ec.message());
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) fail(ErrorKind::IoError, "write failed for " + path);
}

json vec_json(const Vec3& v) { return json::array({v(0), v(1), v(2)}); }

std::vector<std::string> joint_columns(const std::vector<std::string>& stems) {
  std::vector<std::string> h;
  for (const auto& s : stems)
    for (int i = 1; i <= 3; ++i) h.push_back(s + std::to_string(i));
  return h;
}

void write_trace_csv(const IterationTrace& tr, double dt, const std::string& path) {
  std::vector<std::string> header{"t"};
  for (const auto& c : joint_columns({"theta", "dtheta", "e", "edot", "eta", "u"})) header.push_back(c);
  CsvWriter w(path, header);
  for (int n = 0; n < tr.samples; ++n) {
    std::vector<double> row{n * dt};
    for (const Mat* m : {&tr.theta, &tr.theta_dot, &tr.e, &tr.e_dot, &tr.eta, &tr.u})
      for (int i = 0; i < 3; ++i) row.push_back((*m)(n, i));
    w.row(row);
  }
  w.close();
}

std::string iteration_file(const std::string& dir, int k) {
  char name[32];
  std::snprintf(name, sizeof name, "iter_%02d.csv", k);
  return (fs::path(dir) / name).string();
}

std::vector<double> metric_values(const IterationTrace& tr) {
  std::vector<double> v{static_cast<double>(tr.iteration)};
  for (const Vec3* m : {&tr.max_abs_e, &tr.e_dot_norm, &tr.max_abs_eta, &tr.max_abs_theta_dot})
    for (int i = 0; i < 3; ++i) v.push_back((*m)(i));
  v.push_back(tr.velocity_violations);
  v.push_back(tr.aborted ? 1.0 : 0.0);
  return v;
}

std::vector<std::string> metric_header() {
  std::vector<std::string> h{"iteration"};
  for (const auto& c : joint_columns({"max_abs_e", "edot_norm", "max_abs_eta", "max_abs_dtheta"})) h.push_back(c);
  h.push_back("velocity_violations");
  h.push_back("aborted");
  return h;
}

void write_bcef_csv(const SimResult& r, const std::string& path) {
  CsvWriter w(path, {"iteration", "V_eta_T", "V_vartheta_T", "V_eps_T", "E_T"});
  for (std::size_t k = 0; k < r.bcef.size(); ++k) {
    const BCEFIteration& b = r.bcef[k];
    const Eigen::Index last = b.E.size() - 1;
    if (last < 0) continue;
    w.row({static_cast<double>(k), b.V_eta[last], b.V_vartheta[last], b.V_eps[last], b.E_T});
  }
  w.close();
}

bool invariants_hold(const SimResult& r) {
  if (r.aborted) return false;
  if (r.controller != ControllerKind::AMCILC) return true;
  for (const auto& tr : r.iterations)
    if (tr.velocity_violations > 0) return false;
  return r.barrier_violations == 0;
}

json result_json(const SimResult& r, double seconds) {
  int vel = 0;
  Vec3 eta = Vec3::Zero(), thd = Vec3::Zero();
  for (const auto& tr : r.iterations) {
    vel += tr.velocity_violations;
    eta = eta.cwiseMax(tr.max_abs_eta);
    thd = thd.cwiseMax(tr.max_abs_theta_dot);
  }
  json j{{"controller", to_string(r.controller)},
         {"iterations_completed", static_cast<int>(r.iterations.size())},
         {"aborted", r.aborted},
         {"error", r.error},
         {"theta_dot_max", r.theta_dot_max},
         {"barrier_violations", r.barrier_violations},
         {"velocity_violations", vel},
         {"max_abs_eta", vec_json(eta)},
         {"max_abs_dtheta", vec_json(thd)},
         {"wall_seconds", seconds}};
  if (!r.iterations.empty()) {
    j["first_max_abs_e"] = vec_json(r.iterations.front().max_abs_e);
    j["last_max_abs_e"] = vec_json(r.iterations.back().max_abs_e);
  }
  return j;
}

// Runs one controller and streams its traces into dir.
SimResult run_controller(const ExperimentConfig& config, ControllerKind kind, const ReferenceTrajectory& ref,
                         const std::string& dir, double& seconds) {
  ensure_dir((fs::path(dir) / "iterations").string());
  SimConfig sim = config.sim;
  sim.controller = kind;
  const auto t0 = std::chrono::steady_clock::now();
  const IterationCallback stream = [&](const IterationTrace& tr, const IterationMemory&) {
    write_trace_csv(tr, ref.dt, iteration_file((fs::path(dir) / "iterations").string(), tr.iteration));
  };
  SimResult r;
  if (config.resume_memory.empty()) {
    r = run_ilc(config.plant(), config.nominal(), ref, sim, stream);
  } else {
    const IterationMemory start = read_memory_csv(config.resume_memory, sim.fls.rules);
    r = resume_ilc(config.plant(), config.nominal(), ref, sim, start, config.resume_iteration, stream);
  }
  // The aborted iteration never reaches the callback.
  if (r.aborted && !r.iterations.empty()) {
    const IterationTrace& tr = r.iterations.back();
    write_trace_csv(tr, ref.dt, iteration_file((fs::path(dir) / "iterations").string(), tr.iteration));
  }
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_summary_csv(r, (fs::path(dir) / "summary.csv").string());
  if (!r.bcef.empty()) write_bcef_csv(r, (fs::path(dir) / "bcef.csv").string());
  if (r.memory.samples() > 0) write_memory_csv(r.memory, ref.dt, (fs::path(dir) / "memory_final.csv").string());
  write_json(result_json(r, seconds), (fs::path(dir) / "result.json").string());
  return r;
}

template <typename F>
int guarded(const char* name, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    std::cerr << "deltailc " << name << ": " << to_string(e.kind()) << ": " << e.what() << '\n';
    return e.kind() == ErrorKind::ConfigError ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "deltailc " << name << ": " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

FrequencyMapResult compute_frequency_map(const ExperimentConfig& config) {
  FrequencyMapResult r;
  const auto poses = sample_workspace(config.robot, config.freq_map);
  r.samples = frequency_map(config.robot, poses, config.parallel);
  r.f_min = std::numeric_limits<double>::infinity();
  r.f_max = -std::numeric_limits<double>::infinity();
  for (const auto& s : r.samples) {
    if (!s.ok) {
      ++r.failures;
      continue;
    }
    r.f_min = std::min(r.f_min, s.f1_hz);
    r.f_max = std::max(r.f_max, s.f1_hz);
  }
  if (r.failures == static_cast<int>(r.samples.size())) {
    fail(ErrorKind::EmptyWorkspace, "modal analysis failed at every workspace sample");
  }
  return r;
}

std::vector<FrequencyWeight> map_weighting(const FrequencyMapResult& map, const ObjectiveSettings& settings) {
  std::vector<FrequencyWeight> raw;
  raw.reserve(map.samples.size());
  for (const auto& s : map.samples)
    if (s.ok) raw.push_back({s.f1_hz, s.weight});
  return binned_weighting(raw, settings.f_min, settings.f_max, settings.grid);
}

ShaperDesign design_shaper(const ExperimentConfig& config, const FrequencyMapResult* map) {
  const ObjectiveSettings& o = config.shaper.objective;
  std::vector<FrequencyWeight> weighting;
  if (config.shaper.weighting == WeightingKind::Uniform) {
    weighting = uniform_weighting(o.f_min, o.f_max, o.grid);
  } else if (map) {
    weighting = map_weighting(*map, o);
  } else {
    weighting = map_weighting(compute_frequency_map(config), o);
  }
  return optimize_shaper(weighting, o, config.shaper.grid, config.parallel);
}

std::optional<ShaperSpec> resolve_shaper(const ExperimentConfig& config) {
  if (!config.shaper.enabled) return std::nullopt;
  if (config.shaper.fixed_f_n > 0.0) {
    return make_shaper(config.shaper.fixed_f_n, config.shaper.objective.zeta_design, config.shaper.fixed_k_t);
  }
  return design_shaper(config).shaper;
}

ReferenceTrajectory build_reference(const ExperimentConfig& config) {
  const TrajectoryConfig& t = config.trajectory;
  switch (t.kind) {
    case TrajectoryKind::PickAndPlace:
      return pick_and_place(config.robot, t.span, t.lift, t.pick_time, t.z_plane, t.dt);
    case TrajectoryKind::Square:
      return square_trajectory(config.robot, t.square_side, t.z_plane, t.square_time, t.dt);
    case TrajectoryKind::Butterfly:
      return butterfly_trajectory(config.robot, t.butterfly_scale, t.z_plane, t.butterfly_time, t.dt);
    case TrajectoryKind::File: {
      ReferenceTrajectory r = read_trajectory_csv(t.file);
      if (std::abs(r.dt - t.dt) > 1e-12 * t.dt) {
        fail(ErrorKind::GridMismatch, t.file + ": sample step differs from trajectory.dt");
      }
      return r;
    }
  }
  fail(ErrorKind::ConfigError, "unknown trajectory kind");
}

void write_frequency_map(const FrequencyMapResult& map, const std::string& dir) {
  ensure_dir(dir);
  CsvWriter w((fs::path(dir) / "freq_map.csv").string(), {"x", "y", "z", "f1_Hz", "weight"});
  for (const auto& s : map.samples)
    if (s.ok) w.row({s.pose.p.x(), s.pose.p.y(), s.pose.p.z(), s.f1_hz, s.weight});
  w.close();
  json summary{{"samples", map.samples.size()},
               {"failures", map.failures},
               {"f1_min_Hz", map.f_min},
               {"f1_max_Hz", map.f_max}};
  json errors = json::array();
  for (const auto& s : map.samples)
    if (!s.ok && errors.size() < 20) errors.push_back({{"pose", vec_json(s.pose.p)}, {"error", s.error}});
  summary["first_errors"] = errors;
  write_json(summary, (fs::path(dir) / "freq_map_summary.json").string());
}

void write_shaper_design(const ShaperDesign& design, const ExperimentConfig& config, const std::string& dir) {
  ensure_dir(dir);
  const ShaperSpec& s = design.shaper;
  json j{{"f_n", s.f_n},
         {"zeta_d", s.zeta_d},
         {"k_t", s.k_t},
         {"A", {s.A[0], s.A[1], s.A[2]}},
         {"t", {s.t[0], s.t[1], s.t[2]}},
         {"degenerate", s.degenerate},
         {"J1", design.best.J1},
         {"J2", design.best.J2},
         {"J", design.best.J},
         {"weighting", config.shaper.weighting == WeightingKind::Uniform ? "uniform" : "frequency_map"},
         {"f_count", design.f_count},
         {"k_count", design.k_count}};
  write_json(j, (fs::path(dir) / "shaper.json").string());
  CsvWriter w((fs::path(dir) / "j_surface.csv").string(), {"f_n", "k_t", "J1", "J2", "J"});
  for (const auto& p : design.surface) w.row({p.f_n, p.k_t, p.J1, p.J2, p.J});
  w.close();
}

void write_manifest(const ExperimentConfig& config, const std::string& dir) {
  ensure_dir(dir);
  write_json(config.resolved, (fs::path(dir) / "manifest.json").string());
}

void write_summary_csv(const SimResult& result, const std::string& path) {
  std::vector<std::string> header = metric_header();
  header.push_back("E_T");
  CsvWriter w(path, header);
  for (std::size_t k = 0; k < result.iterations.size(); ++k) {
    std::vector<double> row = metric_values(result.iterations[k]);
    row.push_back(k < result.bcef.size() ? result.bcef[k].E_T : 0.0);
    w.row(row);
  }
  w.close();
}

ResidualComparison compare_residuals(const ExperimentConfig& config, const ReferenceTrajectory& unshaped,
                                     const ReferenceTrajectory& shaped) {
  const MpPose start = forward_kinematics(unshaped.theta.row(0).transpose(), config.robot);
  const ModalModel modal = modal_at_pose(config.robot, start, config.modal.damping).truncated(config.modal.modes);
  ResidualComparison c;
  c.unshaped = residual_vibration_report(unshaped.theta_ddot, unshaped.dt, modal, false);
  c.shaped = residual_vibration_report(shaped.theta_ddot, shaped.dt, modal, true);
  return c;
}

void write_residual_csv(const ResidualComparison& cmp, const std::string& path) {
  std::vector<std::string> header{"mode", "f_Hz", "unshaped_envelope", "shaped_envelope", "envelope_ratio",
                                  "unshaped_peak", "shaped_peak"};
  if (cmp.achieved) {
    header.push_back("achieved_envelope");
    header.push_back("achieved_peak");
  }
  CsvWriter w(path, header);
  const Vec& f = cmp.unshaped.mode_frequency;
  for (Eigen::Index m = 0; m < f.size(); ++m) {
    const double u = cmp.unshaped.mode_envelope[m], s = cmp.shaped.mode_envelope[m];
    std::vector<double> row{static_cast<double>(m + 1), f[m], u, s, u > 0.0 ? s / u : 0.0,
                            cmp.unshaped.mode_peak[m], cmp.shaped.mode_peak[m]};
    if (cmp.achieved) {
      row.push_back(cmp.achieved->mode_envelope[m]);
      row.push_back(cmp.achieved->mode_peak[m]);
    }
    w.row(row);
  }
  w.close();
}

int cmd_freq_map(const ExperimentConfig& config) {
  return guarded("freq-map", [&] {
    write_manifest(config, config.out_dir);
    const FrequencyMapResult map = compute_frequency_map(config);
    write_frequency_map(map, config.out_dir);
    std::cerr << "freq-map: " << map.samples.size() - map.failures << " samples, f1 in [" << map.f_min << ", "
              << map.f_max << "] Hz\n";
    return 0;
  });
}

int cmd_design_shaper(const ExperimentConfig& config) {
  return guarded("design-shaper", [&] {
    write_manifest(config, config.out_dir);
    std::optional<FrequencyMapResult> map;
    if (config.shaper.weighting == WeightingKind::FrequencyMap) {
      map = compute_frequency_map(config);
      write_frequency_map(*map, config.out_dir);
    }
    const ShaperDesign d = design_shaper(config, map ? &*map : nullptr);
    write_shaper_design(d, config, config.out_dir);
    std::cerr << "design-shaper: f_n = " << d.shaper.f_n << " Hz, k_t = " << d.shaper.k_t << ", J = " << d.best.J
              << '\n';
    return 0;
  });
}

int cmd_run(const ExperimentConfig& config) {
  return guarded("run", [&] {
    const std::string& dir = config.out_dir;
    write_manifest(config, dir);
    const ReferenceTrajectory base = build_reference(config);
    ReferenceTrajectory ref = base;
    if (const auto shaper = resolve_shaper(config)) {
      ref = shape_trajectory(*shaper, base);
      write_json({{"f_n", shaper->f_n},
                  {"zeta_d", shaper->zeta_d},
                  {"k_t", shaper->k_t},
                  {"A", {shaper->A[0], shaper->A[1], shaper->A[2]}},
                  {"t", {shaper->t[0], shaper->t[1], shaper->t[2]}}},
                 (fs::path(dir) / "shaper.json").string());
    }
    write_trajectory_csv(ref, (fs::path(dir) / "reference.csv").string());

    double seconds = 0.0;
    const SimResult r = run_controller(config, config.sim.controller, ref, dir, seconds);

    ResidualComparison cmp = compare_residuals(config, base, ref);
    if (!r.iterations.empty() && !r.aborted) {
      const MpPose start = forward_kinematics(base.theta.row(0).transpose(), config.robot);
      const ModalModel modal =
          modal_at_pose(config.robot, start, config.modal.damping).truncated(config.modal.modes);
      cmp.achieved = residual_vibration_report(r.iterations.back().theta_ddot, ref.dt, modal, config.shaper.enabled);
    }
    write_residual_csv(cmp, (fs::path(dir) / "residual.csv").string());

    std::cerr << "run: " << to_string(r.controller) << ", " << r.iterations.size() << " iterations in " << seconds
              << " s";
    if (!r.iterations.empty()) {
      const IterationTrace& last = r.iterations.back();
      std::cerr << ", final max|e| = " << last.max_abs_e.maxCoeff() << " rad";
    }
    std::cerr << '\n';
    if (r.aborted) std::cerr << "run aborted: " << r.error << '\n';
    return invariants_hold(r) ? 0 : 1;
  });
}

int cmd_compare(const ExperimentConfig& config) {
  return guarded("compare", [&] {
    if (config.compare.size() < 2) fail(ErrorKind::ConfigError, "controller.compare needs at least two controllers");
    const std::string& dir = config.out_dir;
    write_manifest(config, dir);
    ReferenceTrajectory ref = build_reference(config);
    if (const auto shaper = resolve_shaper(config)) ref = shape_trajectory(*shaper, ref);
    write_trajectory_csv(ref, (fs::path(dir) / "reference.csv").string());

    const std::size_t n = config.compare.size();
    std::vector<SimResult> results(n);
    std::vector<double> seconds(n, 0.0);
    std::vector<std::string> errors(n);
    auto work = [&](std::size_t i) {
      try {
        const std::string sub = (fs::path(dir) / to_string(config.compare[i])).string();
        results[i] = run_controller(config, config.compare[i], ref, sub, seconds[i]);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    };
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(config.parallel));
    if (workers <= 1) {
      for (std::size_t i = 0; i < n; ++i) work(i);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
          for (std::size_t i = w; i < n; i += workers) work(i);
        });
      for (auto& t : pool) t.join();
    }

    std::vector<std::string> header{"controller"};
    for (const auto& h : metric_header()) header.push_back(h);
    CsvWriter w((fs::path(dir) / "comparison.csv").string(), header);
    bool ok = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (!errors[i].empty()) {
        std::cerr << "compare: " << to_string(config.compare[i]) << " failed: " << errors[i] << '\n';
        ok = false;
        continue;
      }
      for (const auto& tr : results[i].iterations) w.row({to_string(config.compare[i])}, metric_values(tr));
      if (!invariants_hold(results[i])) ok = false;
      const auto& it = results[i].iterations;
      std::cerr << "compare: " << to_string(config.compare[i]) << " final max|e| = "
                << (it.empty() ? 0.0 : it.back().max_abs_e.maxCoeff()) << " rad ("
                << seconds[i] << " s)\n";
    }
    w.close();
    return ok ? 0 : 1;
  });
}

}  // namespace deltailc
