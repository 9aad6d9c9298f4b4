#pragma once

#include <optional>
#include <string>
#include <vector>

#include "deltailc/config.hpp"
#include "deltailc/flexible_modal.hpp"
#include "deltailc/input_shaper.hpp"
#include "deltailc/simulation.hpp"

namespace deltailc {

struct FrequencyMapResult {
  std::vector<FrequencySample> samples;
  double f_min = 0.0;
  double f_max = 0.0;
  int failures = 0;
};

FrequencyMapResult compute_frequency_map(const ExperimentConfig& config);

/// Area weights of the map binned onto the shaper's frequency grid.
std::vector<FrequencyWeight> map_weighting(const FrequencyMapResult& map, const ObjectiveSettings& settings);

/// Searches the (f_n, k_t) grid with the configured weighting. The map is
/// computed on demand when the weighting needs it and `map` is null.
ShaperDesign design_shaper(const ExperimentConfig& config, const FrequencyMapResult* map = nullptr);

/// The shaper used by `run`: the fixed design when configured, otherwise a search.
std::optional<ShaperSpec> resolve_shaper(const ExperimentConfig& config);

ReferenceTrajectory build_reference(const ExperimentConfig& config);

/// Writes freq_map.csv and freq_map_summary.json.
void write_frequency_map(const FrequencyMapResult& map, const std::string& dir);
/// Writes shaper.json and j_surface.csv.
void write_shaper_design(const ShaperDesign& design, const ExperimentConfig& config, const std::string& dir);
void write_manifest(const ExperimentConfig& config, const std::string& dir);

/// Per-iteration metric rows (one per iteration, joints in columns).
void write_summary_csv(const SimResult& result, const std::string& path);

struct ResidualComparison {
  ResidualReport unshaped;
  ResidualReport shaped;
  std::optional<ResidualReport> achieved;  // from the last closed-loop iteration
};

/// Modal bank at the reference's start pose driven by the unshaped and shaped
/// reference accelerations.
ResidualComparison compare_residuals(const ExperimentConfig& config, const ReferenceTrajectory& unshaped,
                                     const ReferenceTrajectory& shaped);
void write_residual_csv(const ResidualComparison& cmp, const std::string& path);

/// Subcommands. Each writes into config.out_dir and returns the process exit code.
int cmd_freq_map(const ExperimentConfig& config);
int cmd_design_shaper(const ExperimentConfig& config);
int cmd_run(const ExperimentConfig& config);
int cmd_compare(const ExperimentConfig& config);

}  // namespace deltailc
