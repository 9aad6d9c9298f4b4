#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "deltailc/config.hpp"
#include "deltailc/errors.hpp"
#include "deltailc/flexible_modal.hpp"
#include "deltailc/fls.hpp"
#include "deltailc/input_shaper.hpp"
#include "deltailc/kinematics.hpp"
#include "deltailc/pipeline.hpp"
#include "deltailc/rigid_dynamics.hpp"
#include "deltailc/trajectory.hpp"

namespace py = pybind11;
using namespace deltailc;

namespace {

ExperimentConfig config_from_string(const std::string& text) {
  nlohmann::json doc = default_config_json();
  if (!text.empty()) {
    const nlohmann::json user = nlohmann::json::parse(text, nullptr, false);
    if (user.is_discarded()) fail(ErrorKind::ConfigError, "config is not valid JSON");
    merge_config(doc, user);
  }
  return config_from_json(doc);
}

py::dict trajectory_dict(const ReferenceTrajectory& r) {
  py::dict d;
  d["dt"] = r.dt;
  d["theta"] = r.theta;
  d["theta_dot"] = r.theta_dot;
  d["theta_ddot"] = r.theta_ddot;
  d["p"] = r.p;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Delta robot kinematics, modal analysis, input shaping and iterative learning control";

  static py::exception<Error> error(m, "DeltaError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (std::string(to_string(e.kind())) + ": " + e.what()).c_str());
    }
  });

  py::class_<RobotParams>(m, "RobotParams")
      .def(py::init<>())
      .def_readwrite("l1", &RobotParams::l1)
      .def_readwrite("l2", &RobotParams::l2)
      .def_readwrite("e_a", &RobotParams::e_a)
      .def_readwrite("e_b", &RobotParams::e_b)
      .def_readwrite("m_p", &RobotParams::m_p)
      .def_readwrite("rho_r", &RobotParams::rho_r)
      .def_readwrite("n_gear", &RobotParams::n_gear)
      .def_readwrite("I_M", &RobotParams::I_M)
      .def_readwrite("B_damp", &RobotParams::B_damp)
      .def_readwrite("servo_stiffness", &RobotParams::servo_stiffness)
      .def("validate", &RobotParams::validate);

  m.def(
      "inverse_kinematics", [](const Vec3& p, const RobotParams& rp) { return inverse_kinematics({p}, rp); },
      py::arg("p"), py::arg("params") = RobotParams{});
  m.def(
      "forward_kinematics", [](const Vec3& theta, const RobotParams& rp) { return forward_kinematics(theta, rp).p; },
      py::arg("theta"), py::arg("params") = RobotParams{});
  m.def(
      "jacobian", [](const Vec3& theta, const RobotParams& rp) { return jacobian(theta, rp); }, py::arg("theta"),
      py::arg("params") = RobotParams{});

  m.def(
      "dynamics_terms",
      [](const Vec3& theta, const Vec3& theta_dot, bool true_plant, const RobotParams& rp) {
        const RigidModel model = true_plant ? RigidModel::true_plant(rp) : RigidModel::nominal(rp);
        const DynamicsTerms t = compute_terms(model, {theta, theta_dot});
        py::dict d;
        d["M"] = t.M;
        d["C"] = t.C;
        d["G"] = t.G;
        d["B"] = t.B;
        return d;
      },
      py::arg("theta"), py::arg("theta_dot"), py::arg("true_plant") = false, py::arg("params") = RobotParams{});

  m.def(
      "natural_frequencies",
      [](const Vec3& p, int modes, const RobotParams& rp) {
        const ModalModel mm = modal_at_pose(rp, {p});
        return Vec(mm.frequencies.head(std::min<Eigen::Index>(modes, mm.frequencies.size())));
      },
      py::arg("p"), py::arg("modes") = 4, py::arg("params") = RobotParams{});

  py::class_<ShaperSpec>(m, "ShaperSpec")
      .def_readonly("A", &ShaperSpec::A)
      .def_readonly("t", &ShaperSpec::t)
      .def_readonly("f_n", &ShaperSpec::f_n)
      .def_readonly("zeta_d", &ShaperSpec::zeta_d)
      .def_readonly("k_t", &ShaperSpec::k_t)
      .def_readonly("degenerate", &ShaperSpec::degenerate);
  m.def("make_shaper", &make_shaper, py::arg("f_n"), py::arg("zeta_d"), py::arg("k_t"));
  m.def("residual_percentage", &residual_percentage, py::arg("shaper"), py::arg("omega_n"), py::arg("zeta"));
  m.def(
      "shaper_objective",
      [](double f_n, double k_t, double f_min, double f_max, double zeta_design) {
        ObjectiveSettings s;
        s.f_min = f_min;
        s.f_max = f_max;
        s.zeta_design = zeta_design;
        const ShaperObjective o = objective(f_n, k_t, uniform_weighting(f_min, f_max, s.grid), s);
        return py::make_tuple(o.J1, o.J2, o.J);
      },
      py::arg("f_n"), py::arg("k_t"), py::arg("f_min") = 16.0, py::arg("f_max") = 24.0,
      py::arg("zeta_design") = 0.075);

  m.def(
      "fls_basis", [](const Vec& x) { return basis(FLSConfig::defaults(), x); }, py::arg("x"));

  m.def(
      "pick_and_place",
      [](double span, double lift, double cycle_time, double z, double dt) {
        return trajectory_dict(pick_and_place(RobotParams{}, span, lift, cycle_time, z, dt));
      },
      py::arg("span") = 0.06, py::arg("lift") = 0.03, py::arg("cycle_time") = 6.0, py::arg("z_plane") = -0.8151,
      py::arg("dt") = 1e-3);
  m.def(
      "square",
      [](double side, double z, double cycle_time, double dt) {
        return trajectory_dict(square_trajectory(RobotParams{}, side, z, cycle_time, dt));
      },
      py::arg("side") = 0.05, py::arg("z_plane") = -0.8151, py::arg("cycle_time") = 8.0, py::arg("dt") = 1e-3);
  m.def(
      "butterfly",
      [](double scale, double z, double cycle_time, double dt) {
        return trajectory_dict(butterfly_trajectory(RobotParams{}, scale, z, cycle_time, dt));
      },
      py::arg("scale") = 0.01, py::arg("z_plane") = -0.8151, py::arg("cycle_time") = 20.0, py::arg("dt") = 1e-3);

  m.def(
      "default_config", [] { return default_config_json().dump(2); },
      "Complete default experiment configuration as a JSON string.");
  m.def(
      "run_command",
      [](const std::string& command, const std::string& config_json) {
        const ExperimentConfig c = config_from_string(config_json);
        py::gil_scoped_release release;
        if (command == "freq-map") return cmd_freq_map(c);
        if (command == "design-shaper") return cmd_design_shaper(c);
        if (command == "run") return cmd_run(c);
        if (command == "compare") return cmd_compare(c);
        fail(ErrorKind::InvalidArgument, "unknown command " + command);
      },
      py::arg("command"), py::arg("config_json") = "",
      "Runs a pipeline command with a JSON config patch and returns its exit code.");
}
