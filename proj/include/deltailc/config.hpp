#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "deltailc/input_shaper.hpp"
#include "deltailc/kinematics.hpp"
#include "deltailc/rigid_dynamics.hpp"
#include "deltailc/simulation.hpp"

namespace deltailc {

enum class TrajectoryKind { PickAndPlace, Square, Butterfly, File };

const char* to_string(TrajectoryKind kind);

struct TrajectoryConfig {
  TrajectoryKind kind = TrajectoryKind::PickAndPlace;
  double dt = 1e-3;
  double z_plane = -0.8151;
  double span = 0.06;
  double lift = 0.03;
  double pick_time = 6.0;
  double square_side = 0.05;
  double square_time = 8.0;
  double butterfly_scale = 0.01;
  double butterfly_time = 20.0;
  std::string file;  // joint-space CSV for kind == File
};

enum class WeightingKind { Uniform, FrequencyMap };

struct ShaperConfig {
  bool enabled = true;
  WeightingKind weighting = WeightingKind::FrequencyMap;
  ObjectiveSettings objective;
  SearchGrid grid;
  /// Use this design instead of searching when f_n > 0.
  double fixed_f_n = 0.0;
  double fixed_k_t = 0.0;
};

struct ModalConfig {
  int modes = 3;
  double damping = kDefaultModalDamping;
};

/// Fully resolved experiment description. `resolved` keeps the merged JSON
/// document that produced it and is written as the run manifest.
struct ExperimentConfig {
  RobotParams robot;
  Perturbation perturbation{0.05, 0.05, 0.0, 0.0};
  bool motor_damping = true;
  TrajectoryConfig trajectory;
  SimConfig sim;
  std::vector<ControllerKind> compare{ControllerKind::AMCILC, ControllerKind::PIDILC,
                                      ControllerKind::AFC};
  ShaperConfig shaper;
  GridSpec freq_map;
  ModalConfig modal;
  int parallel = 1;
  std::string out_dir = "out";
  /// Memory checkpoint (memory_final.csv of an earlier run) to continue from.
  std::string resume_memory;
  int resume_iteration = 0;

  nlohmann::json resolved;

  RigidModel plant() const;
  RigidModel nominal() const;
};

/// Every recognised key with its default value.
nlohmann::json default_config_json();

/// Recursively merges `patch` into `base`. Keys absent from `base` are
/// rejected with ConfigError; `where` prefixes the message.
void merge_config(nlohmann::json& base, const nlohmann::json& patch, const std::string& where = "");

/// Applies a dotted override "a.b.c=value". The value is parsed as JSON and
/// falls back to a plain string. Throws ConfigError.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Converts and validates a merged document. Throws ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& doc);

/// Defaults, then the optional file, then overrides in order.
ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides);

}  // namespace deltailc
