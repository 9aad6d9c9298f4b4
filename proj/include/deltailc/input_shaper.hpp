#pragma once

#include <array>
#include <vector>

#include "deltailc/trajectory.hpp"
#include "deltailc/types.hpp"

namespace deltailc {

/// Three-impulse shaper. With k_t = 0 all impulses coincide and the shaper is
/// returned as a single unit impulse with `degenerate` set.
struct ShaperSpec {
  std::array<double, 3> A{1.0, 0.0, 0.0};
  std::array<double, 3> t{0.0, 0.0, 0.0};
  double f_n = 0.0;
  double zeta_d = 0.0;
  double k_t = 0.0;
  bool degenerate = true;
};

ShaperSpec make_shaper(double f_n, double zeta_d, double k_t);

/// Residual vibration ratio of an oscillator (omega_n [rad/s], zeta) excited by the
/// shaper's impulses, relative to a single unit impulse.
double residual_percentage(const ShaperSpec& shaper, double omega_n, double zeta);

struct FrequencyWeight {
  double f_hz = 0.0;
  double weight = 0.0;
};

/// Equal weights on the grid f_min, f_min + step, ..., f_max.
std::vector<FrequencyWeight> uniform_weighting(double f_min, double f_max, double step = 0.01);

/// Accumulates raw (frequency, area) pairs onto the nearest point of the same
/// grid. Entries outside [f_min, f_max] are dropped.
std::vector<FrequencyWeight> binned_weighting(const std::vector<FrequencyWeight>& raw, double f_min,
                                              double f_max, double step = 0.01);

struct ObjectiveSettings {
  double f_min = 16.0;
  double f_max = 24.0;
  double zeta_design = 0.075;
  double w1 = 0.5;
  double w2 = 0.5;
  double grid = 0.01;  // frequency grid of the inner max [Hz]
};

struct ShaperObjective {
  double J1 = 0.0;
  double J2 = 0.0;
  double J = 0.0;
};

/// Throws EmptyWeighting when the weighting has no positive mass.
ShaperObjective objective(double f_n, double k_t, const std::vector<FrequencyWeight>& weighting,
                          const ObjectiveSettings& settings = {});

struct SurfacePoint {
  double f_n, k_t, J1, J2, J;
};

struct ShaperDesign {
  ShaperSpec shaper;
  ShaperObjective best;
  int best_index = -1;
  int f_count = 0;
  int k_count = 0;
  std::vector<SurfacePoint> surface;  // f_n major, k_t minor
};

struct SearchGrid {
  double k_min = 0.0;
  double k_max = 1.0;
  double step = 0.01;
};

/// Exhaustive grid search over [f_min, f_max] x [k_min, k_max]. Ties go to the
/// lowest f_n, then the lowest k_t.
ShaperDesign optimize_shaper(const std::vector<FrequencyWeight>& weighting,
                             const ObjectiveSettings& settings = {}, const SearchGrid& grid = {},
                             int parallel = 1);

/// Number of points of a closed grid [lo, hi] with the given step.
int grid_count(double lo, double hi, double step);

/// Convolves each column with the impulse train. Samples before the start and
/// after the end hold the boundary values. Output has N + round(t3 / dt) rows.
/// Throws ImpulseAliasing when t2 < dt.
Mat shape_samples(const ShaperSpec& shaper, const Mat& samples, double dt);

ReferenceTrajectory shape_trajectory(const ShaperSpec& shaper, const ReferenceTrajectory& ref);

}  // namespace deltailc
