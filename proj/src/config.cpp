#include "deltailc/config.hpp"

#include <fstream>

#include "deltailc/errors.hpp"

namespace deltailc {

using nlohmann::json;

const char* to_string(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::PickAndPlace: return "pick_and_place";
    case TrajectoryKind::Square: return "square";
    case TrajectoryKind::Butterfly: return "butterfly";
    case TrajectoryKind::File: return "file";
  }
  return "?";
}

RigidModel ExperimentConfig::plant() const {
  RigidModel m{robot, perturbation, motor_damping};
  m.validate();
  return m;
}

RigidModel ExperimentConfig::nominal() const { return RigidModel::nominal(robot); }

namespace {

json vec3_json(const Vec3& v) {
  if (v(0) == v(1) && v(1) == v(2)) return v(0);
  return json::array({v(0), v(1), v(2)});
}

json gains_json(const AMCILCGains& g) {
  return {{"sigma", g.sigma},
          {"k", vec3_json(g.k)},
          {"v_c", g.v_c},
          {"gamma", g.gamma(0, 0)},
          {"nu", vec3_json(g.nu)}};
}

json pid_json(const PIDGains& g) {
  return {{"kp", vec3_json(g.kp)}, {"ki", vec3_json(g.ki)}, {"kd", vec3_json(g.kd)}};
}

json robot_json(const RobotParams& p) {
  return {{"l1", p.l1},
          {"l2", p.l2},
          {"D1", p.D1},
          {"d1", p.d1},
          {"D2", p.D2},
          {"d2", p.d2},
          {"e_a", p.e_a},
          {"e_b", p.e_b},
          {"E_r", p.E_r},
          {"rho_r", p.rho_r},
          {"nu_r", p.nu_r},
          {"m_p", p.m_p},
          {"m_lump", p.m_lump},
          {"I_px", p.I_px},
          {"I_py", p.I_py},
          {"I_pz", p.I_pz},
          {"n_gear", p.n_gear},
          {"I_M", p.I_M},
          {"B_damp", p.B_damp},
          {"K_t", p.K_t},
          {"servo_stiffness", p.servo_stiffness},
          {"pair_half_width", p.pair_half_width},
          {"base_yaw", p.base_yaw},
          {"gravity", p.gravity}};
}

[[noreturn]] void config_fail(const std::string& msg) { fail(ErrorKind::ConfigError, msg); }

double num(const json& j, const char* key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_number()) config_fail(where + key + " must be a number");
  return v.get<double>();
}

int integer(const json& j, const char* key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_number_integer() && !v.is_number_unsigned()) config_fail(where + key + " must be an integer");
  return v.get<int>();
}

bool boolean(const json& j, const char* key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_boolean()) config_fail(where + key + " must be true or false");
  return v.get<bool>();
}

std::string text(const json& j, const char* key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_string()) config_fail(where + key + " must be a string");
  return v.get<std::string>();
}

// A scalar applies to all three joints.
Vec3 vec3(const json& j, const char* key, const std::string& where) {
  const json& v = j.at(key);
  if (v.is_number()) return Vec3::Constant(v.get<double>());
  if (v.is_array() && v.size() == 3 && v[0].is_number() && v[1].is_number() && v[2].is_number()) {
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
  }
  config_fail(where + key + " must be a number or a list of three numbers");
}

AMCILCGains gains_from(const json& j, const std::string& where, int rules) {
  AMCILCGains g = AMCILCGains::case2(rules);
  g.sigma = num(j, "sigma", where);
  g.k = vec3(j, "k", where);
  g.v_c = num(j, "v_c", where);
  const Vec3 gamma = vec3(j, "gamma", where);
  g.gamma.resize(rules, 3);
  for (int i = 0; i < 3; ++i) g.gamma.col(i).setConstant(gamma(i));
  g.nu = vec3(j, "nu", where);
  return g;
}

PIDGains pid_from(const json& j, const std::string& where) {
  PIDGains g;
  g.kp = vec3(j, "kp", where);
  g.ki = vec3(j, "ki", where);
  g.kd = vec3(j, "kd", where);
  return g;
}

// Object-valued keys are sections whose children must already exist; "z_planes"
// and the vector-valued gains are leaves that the patch replaces wholesale.
bool is_section(const json& v) { return v.is_object(); }

json* resolve_path(json& doc, const std::string& dotted, std::string& leaf) {
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted.find('.', start);
    const std::string part = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) config_fail("malformed key '" + dotted + "'");
    if (dot == std::string::npos) {
      leaf = part;
      return node;
    }
    if (!node->contains(part) || !is_section((*node)[part])) {
      config_fail("unknown config section '" + dotted.substr(0, dot) + "'");
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

}  // namespace

json default_config_json() {
  const ExperimentConfig d;
  const SimConfig& s = d.sim;
  const TrajectoryConfig& t = d.trajectory;
  const ShaperConfig& sh = d.shaper;
  json compare = json::array();
  for (ControllerKind c : d.compare) compare.push_back(to_string(c));
  return {
      {"seed", s.seed},
      {"parallel", d.parallel},
      {"out_dir", d.out_dir},
      {"robot", robot_json(d.robot)},
      {"plant",
       {{"m_p", d.perturbation.m_p},
        {"rho_r", d.perturbation.rho_r},
        {"m_lump", d.perturbation.m_lump},
        {"I_M", d.perturbation.I_M},
        {"motor_damping", d.motor_damping}}},
      {"trajectory",
       {{"kind", to_string(t.kind)},
        {"dt", t.dt},
        {"z_plane", t.z_plane},
        {"pick_and_place", {{"span", t.span}, {"lift", t.lift}, {"cycle_time", t.pick_time}}},
        {"square", {{"side", t.square_side}, {"cycle_time", t.square_time}}},
        {"butterfly", {{"scale", t.butterfly_scale}, {"cycle_time", t.butterfly_time}}},
        {"file", t.file}}},
      {"controller",
       {{"kind", to_string(s.controller)},
        {"compare", compare},
        {"amcilc", gains_json(s.gains)},
        {"afc", gains_json(s.afc_gains)},
        {"pid_bootstrap", pid_json(s.pid_bootstrap)},
        {"pid_learning", pid_json(s.pid_learning)},
        {"weight_lower", s.weight_lower},
        {"weight_upper", s.weight_upper},
        {"fls", {{"psi", s.fls.psi}, {"sigmoid_slope", s.fls.sigmoid_slope}, {"centers", s.fls.centers}}}}},
      {"simulation",
       {{"iterations", s.iterations},
        {"theta_dot_max", s.theta_dot_max},
        {"noise_std", s.noise_std},
        {"bcef_ridge", s.bcef_ridge},
        {"resume_memory", d.resume_memory},
        {"resume_iteration", d.resume_iteration}}},
      {"shaper",
       {{"enabled", sh.enabled},
        {"weighting", sh.weighting == WeightingKind::Uniform ? "uniform" : "frequency_map"},
        {"f_min", sh.objective.f_min},
        {"f_max", sh.objective.f_max},
        {"zeta_design", sh.objective.zeta_design},
        {"w1", sh.objective.w1},
        {"w2", sh.objective.w2},
        {"grid", sh.objective.grid},
        {"k_min", sh.grid.k_min},
        {"k_max", sh.grid.k_max},
        {"k_step", sh.grid.step},
        {"f_n", sh.fixed_f_n},
        {"k_t", sh.fixed_k_t}}},
      {"freq_map",
       {{"half_width", d.freq_map.half_width},
        {"spacing", d.freq_map.spacing},
        {"z_planes", d.freq_map.z_planes}}},
      {"modal", {{"modes", d.modal.modes}, {"damping", d.modal.damping}}},
  };
}

void merge_config(json& base, const json& patch, const std::string& where) {
  if (!patch.is_object()) config_fail((where.empty() ? "config" : where) + " must be an object");
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    const std::string key = where.empty() ? it.key() : where + "." + it.key();
    if (!base.contains(it.key())) config_fail("unknown config key '" + key + "'");
    json& target = base[it.key()];
    if (is_section(target)) {
      merge_config(target, it.value(), key);
    } else {
      target = it.value();
    }
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) config_fail("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  std::string leaf;
  json* parent = resolve_path(doc, key, leaf);
  if (!parent->contains(leaf)) config_fail("unknown config key '" + key + "'");
  if (is_section((*parent)[leaf])) {
    merge_config((*parent)[leaf], value, key);
  } else {
    (*parent)[leaf] = value;
  }
}

ExperimentConfig config_from_json(const json& doc) {
  ExperimentConfig c;
  try {
    c.sim.seed = doc.at("seed").get<std::uint64_t>();
    c.parallel = integer(doc, "parallel", "");
    if (c.parallel < 1) config_fail("parallel must be >= 1");
    c.out_dir = text(doc, "out_dir", "");

    const json& r = doc.at("robot");
    RobotParams& p = c.robot;
    const std::string rw = "robot.";
    for (auto [key, field] : std::initializer_list<std::pair<const char*, double*>>{
             {"l1", &p.l1},         {"l2", &p.l2},
             {"D1", &p.D1},         {"d1", &p.d1},
             {"D2", &p.D2},         {"d2", &p.d2},
             {"e_a", &p.e_a},       {"e_b", &p.e_b},
             {"E_r", &p.E_r},       {"rho_r", &p.rho_r},
             {"nu_r", &p.nu_r},     {"m_p", &p.m_p},
             {"m_lump", &p.m_lump}, {"I_px", &p.I_px},
             {"I_py", &p.I_py},     {"I_pz", &p.I_pz},
             {"n_gear", &p.n_gear}, {"I_M", &p.I_M},
             {"B_damp", &p.B_damp}, {"K_t", &p.K_t},
             {"servo_stiffness", &p.servo_stiffness},
             {"pair_half_width", &p.pair_half_width},
             {"base_yaw", &p.base_yaw},
             {"gravity", &p.gravity}}) {
      *field = num(r, key, rw);
    }
    p.validate();

    const json& pl = doc.at("plant");
    c.perturbation.m_p = num(pl, "m_p", "plant.");
    c.perturbation.rho_r = num(pl, "rho_r", "plant.");
    c.perturbation.m_lump = num(pl, "m_lump", "plant.");
    c.perturbation.I_M = num(pl, "I_M", "plant.");
    c.motor_damping = boolean(pl, "motor_damping", "plant.");
    c.plant();

    const json& t = doc.at("trajectory");
    const std::string kind = text(t, "kind", "trajectory.");
    if (kind == "pick_and_place") c.trajectory.kind = TrajectoryKind::PickAndPlace;
    else if (kind == "square") c.trajectory.kind = TrajectoryKind::Square;
    else if (kind == "butterfly") c.trajectory.kind = TrajectoryKind::Butterfly;
    else if (kind == "file") c.trajectory.kind = TrajectoryKind::File;
    else config_fail("trajectory.kind must be pick_and_place, square, butterfly or file");
    c.trajectory.dt = num(t, "dt", "trajectory.");
    if (!(c.trajectory.dt > 0.0)) config_fail("trajectory.dt must be > 0");
    c.trajectory.z_plane = num(t, "z_plane", "trajectory.");
    c.trajectory.span = num(t.at("pick_and_place"), "span", "trajectory.pick_and_place.");
    c.trajectory.lift = num(t.at("pick_and_place"), "lift", "trajectory.pick_and_place.");
    c.trajectory.pick_time = num(t.at("pick_and_place"), "cycle_time", "trajectory.pick_and_place.");
    c.trajectory.square_side = num(t.at("square"), "side", "trajectory.square.");
    c.trajectory.square_time = num(t.at("square"), "cycle_time", "trajectory.square.");
    c.trajectory.butterfly_scale = num(t.at("butterfly"), "scale", "trajectory.butterfly.");
    c.trajectory.butterfly_time = num(t.at("butterfly"), "cycle_time", "trajectory.butterfly.");
    c.trajectory.file = text(t, "file", "trajectory.");
    if (c.trajectory.kind == TrajectoryKind::File && c.trajectory.file.empty()) {
      config_fail("trajectory.file is required when trajectory.kind is file");
    }

    const json& ct = doc.at("controller");
    c.sim.controller = controller_from_string(text(ct, "kind", "controller."));
    if (!ct.at("compare").is_array()) config_fail("controller.compare must be a list");
    c.compare.clear();
    for (const json& v : ct.at("compare")) {
      if (!v.is_string()) config_fail("controller.compare entries must be strings");
      c.compare.push_back(controller_from_string(v.get<std::string>()));
    }
    c.sim.fls.psi = num(ct.at("fls"), "psi", "controller.fls.");
    c.sim.fls.sigmoid_slope = num(ct.at("fls"), "sigmoid_slope", "controller.fls.");
    const json& centers = ct.at("fls").at("centers");
    if (!centers.is_array() || centers.empty()) config_fail("controller.fls.centers must be a list of lists");
    c.sim.fls.centers.clear();
    for (const json& row : centers) {
      if (!row.is_array()) config_fail("controller.fls.centers must be a list of lists");
      std::vector<double> r;
      for (const json& v : row) {
        if (!v.is_number()) config_fail("controller.fls.centers entries must be numbers");
        r.push_back(v.get<double>());
      }
      c.sim.fls.centers.push_back(std::move(r));
    }
    c.sim.fls.inputs = static_cast<int>(c.sim.fls.centers.size());
    c.sim.fls.rules = static_cast<int>(c.sim.fls.centers.front().size());
    if (c.sim.fls.inputs != 6) config_fail("controller.fls.centers needs one row per input (6: theta, theta_dot)");
    c.sim.fls.validate();
    const int rules = c.sim.fls.rules;
    c.sim.gains = gains_from(ct.at("amcilc"), "controller.amcilc.", rules);
    c.sim.afc_gains = gains_from(ct.at("afc"), "controller.afc.", rules);
    c.sim.pid_bootstrap = pid_from(ct.at("pid_bootstrap"), "controller.pid_bootstrap.");
    c.sim.pid_learning = pid_from(ct.at("pid_learning"), "controller.pid_learning.");
    c.sim.weight_lower = num(ct, "weight_lower", "controller.");
    c.sim.weight_upper = num(ct, "weight_upper", "controller.");

    const json& s = doc.at("simulation");
    c.sim.iterations = integer(s, "iterations", "simulation.");
    c.sim.theta_dot_max = num(s, "theta_dot_max", "simulation.");
    c.sim.noise_std = num(s, "noise_std", "simulation.");
    c.sim.bcef_ridge = num(s, "bcef_ridge", "simulation.");
    c.resume_memory = text(s, "resume_memory", "simulation.");
    c.resume_iteration = integer(s, "resume_iteration", "simulation.");
    if (c.resume_iteration < 0) config_fail("simulation.resume_iteration must be >= 0");
    c.sim.validate();

    const json& sh = doc.at("shaper");
    c.shaper.enabled = boolean(sh, "enabled", "shaper.");
    const std::string weighting = text(sh, "weighting", "shaper.");
    if (weighting == "uniform") c.shaper.weighting = WeightingKind::Uniform;
    else if (weighting == "frequency_map") c.shaper.weighting = WeightingKind::FrequencyMap;
    else config_fail("shaper.weighting must be uniform or frequency_map");
    ObjectiveSettings& o = c.shaper.objective;
    o.f_min = num(sh, "f_min", "shaper.");
    o.f_max = num(sh, "f_max", "shaper.");
    o.zeta_design = num(sh, "zeta_design", "shaper.");
    o.w1 = num(sh, "w1", "shaper.");
    o.w2 = num(sh, "w2", "shaper.");
    o.grid = num(sh, "grid", "shaper.");
    if (!(o.f_min > 0.0 && o.f_max >= o.f_min && o.grid > 0.0)) config_fail("shaper frequency range is invalid");
    if (!(o.zeta_design >= 0.0 && o.zeta_design < 1.0)) config_fail("shaper.zeta_design must be in [0,1)");
    c.shaper.grid.k_min = num(sh, "k_min", "shaper.");
    c.shaper.grid.k_max = num(sh, "k_max", "shaper.");
    c.shaper.grid.step = num(sh, "k_step", "shaper.");
    if (!(c.shaper.grid.k_min >= 0.0 && c.shaper.grid.k_max <= 1.0 && c.shaper.grid.k_max >= c.shaper.grid.k_min &&
          c.shaper.grid.step > 0.0)) {
      config_fail("shaper k_t range must lie in [0,1] with a positive step");
    }
    c.shaper.fixed_f_n = num(sh, "f_n", "shaper.");
    c.shaper.fixed_k_t = num(sh, "k_t", "shaper.");
    if (c.shaper.fixed_f_n > 0.0) make_shaper(c.shaper.fixed_f_n, o.zeta_design, c.shaper.fixed_k_t);

    const json& fm = doc.at("freq_map");
    c.freq_map.half_width = num(fm, "half_width", "freq_map.");
    c.freq_map.spacing = num(fm, "spacing", "freq_map.");
    if (!fm.at("z_planes").is_array() || fm.at("z_planes").empty()) config_fail("freq_map.z_planes must be a non-empty list");
    c.freq_map.z_planes.clear();
    for (const json& z : fm.at("z_planes")) {
      if (!z.is_number()) config_fail("freq_map.z_planes entries must be numbers");
      c.freq_map.z_planes.push_back(z.get<double>());
    }
    if (!(c.freq_map.half_width > 0.0 && c.freq_map.spacing > 0.0)) config_fail("freq_map grid must be positive");

    c.modal.modes = integer(doc.at("modal"), "modes", "modal.");
    c.modal.damping = num(doc.at("modal"), "damping", "modal.");
    if (c.modal.modes < 1) config_fail("modal.modes must be >= 1");
    if (!(c.modal.damping >= 0.0 && c.modal.damping < 1.0)) config_fail("modal.damping must be in [0,1)");
  } catch (const json::exception& ex) {
    config_fail(std::string("config: ") + ex.what());
  } catch (const Error& ex) {
    if (ex.kind() == ErrorKind::ConfigError) throw;
    config_fail(ex.what());
  }
  c.resolved = doc;
  return c;
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  json doc = default_config_json();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::IoError, "cannot open config " + path);
    const json user = json::parse(in, nullptr, false);
    if (user.is_discarded()) config_fail(path + ": not valid JSON");
    merge_config(doc, user);
  }
  for (const std::string& o : overrides) apply_override(doc, o);
  return config_from_json(doc);
}

}  // namespace deltailc
