#pragma once

#include <vector>

#include "deltailc/types.hpp"

namespace deltailc {

/// Rule base of the fuzzy approximator. Rules 1 and l use the edge sigmoid
/// 1 / (1 + exp(5 (x - kappa))), the others exp(-(x - kappa)^2 / psi^2).
struct FLSConfig {
  int rules = 9;
  int inputs = 6;
  double psi = 1.4142135623730951;
  double sigmoid_slope = 5.0;
  std::vector<std::vector<double>> centers;  // inputs x rules

  /// Default centers for x = [theta; theta_dot].
  static FLSConfig defaults();
  /// Throws InvalidArgument.
  void validate() const;
  double membership(int input, int rule, double x) const;
};

struct FLSWeights {
  Mat vartheta;  // rules x 3 [N m]
  Vec3 eps = Vec3::Zero();
  double lower = -50.0;
  double upper = 50.0;

  static FLSWeights zeros(int rules, double lower = -50.0, double upper = 50.0);
};

/// Normalised rule strengths. Throws DegenerateBasis when every rule underflows.
Vec basis(const FLSConfig& config, const Vec& x);

/// vartheta^T phi(x) + eps.
Vec3 approximate(const FLSWeights& weights, const FLSConfig& config, const Vec& x);

/// Componentwise clamp into [lower, upper].
Mat saturate(const Mat& raw, double lower, double upper);
FLSWeights saturate(const FLSWeights& raw);

/// (vartheta - sat(raw))^T Gamma^-1 (raw - sat(raw)) for one column, Gamma diagonal.
double saturation_inequality(const Vec& vartheta, const Vec& raw, const Vec& gamma_diag,
                             double lower, double upper);

}  // namespace deltailc
