#include "deltailc/fls.hpp"

#include <algorithm>
#include <cmath>

#include "deltailc/errors.hpp"

namespace deltailc {

FLSConfig FLSConfig::defaults() {
  FLSConfig c;
  const std::vector<double> k1{-0.3, -0.25, -0.2, -0.15, -0.1, -0.05, 0.0, -0.01, 0.05};
  const std::vector<double> k2{-0.2, -0.15, -0.1, -0.05, -0.03, -0.01, 0.0, -0.01, 0.05};
  const std::vector<double> k3{-0.15, -0.05, 0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
  const std::vector<double> k4{-1.0, -0.7, -0.4, -0.1, 0.0, 0.1, 0.4, 0.7, 1.0};
  c.centers = {k1, k2, k3, k4, k4, k4};
  return c;
}

void FLSConfig::validate() const {
  if (rules < 2) fail(ErrorKind::InvalidArgument, "FLS needs at least two rules");
  if (inputs < 1) fail(ErrorKind::InvalidArgument, "FLS needs at least one input");
  if (!(psi > 0.0)) fail(ErrorKind::InvalidArgument, "FLS width must be > 0");
  if (static_cast<int>(centers.size()) != inputs) {
    fail(ErrorKind::InvalidArgument, "FLS needs one center list per input");
  }
  for (const auto& row : centers) {
    if (static_cast<int>(row.size()) != rules) {
      fail(ErrorKind::InvalidArgument, "FLS center list length must equal the rule count");
    }
    for (double v : row)
      if (!std::isfinite(v)) fail(ErrorKind::InvalidArgument, "FLS centers must be finite");
  }
}

double FLSConfig::membership(int input, int rule, double x) const {
  const double k = centers[input][rule];
  if (rule == 0 || rule == rules - 1) return 1.0 / (1.0 + std::exp(sigmoid_slope * (x - k)));
  const double d = (x - k) / psi;
  return std::exp(-d * d);
}

Vec basis(const FLSConfig& config, const Vec& x) {
  if (x.size() != config.inputs) fail(ErrorKind::InvalidArgument, "FLS input has the wrong size");
  Vec phi(config.rules);
  for (int j = 0; j < config.rules; ++j) {
    double prod = 1.0;
    for (int i = 0; i < config.inputs; ++i) prod *= config.membership(i, j, x[i]);
    phi[j] = prod;
  }
  const double sum = phi.sum();
  if (!(sum > 1e-300) || !std::isfinite(sum)) {
    fail(ErrorKind::DegenerateBasis, "fuzzy rule strengths underflow at this input");
  }
  return phi / sum;
}

FLSWeights FLSWeights::zeros(int rules, double lower, double upper) {
  if (!(lower <= upper)) fail(ErrorKind::InvalidArgument, "weight bounds are not ordered");
  FLSWeights w;
  w.vartheta = Mat::Zero(rules, 3);
  w.lower = lower;
  w.upper = upper;
  return w;
}

Vec3 approximate(const FLSWeights& weights, const FLSConfig& config, const Vec& x) {
  return weights.vartheta.transpose() * basis(config, x) + weights.eps;
}

Mat saturate(const Mat& raw, double lower, double upper) {
  if (!(lower <= upper)) fail(ErrorKind::InvalidArgument, "weight bounds are not ordered");
  return raw.cwiseMax(lower).cwiseMin(upper);
}

FLSWeights saturate(const FLSWeights& raw) {
  FLSWeights w = raw;
  w.vartheta = saturate(raw.vartheta, raw.lower, raw.upper);
  return w;
}

double saturation_inequality(const Vec& vartheta, const Vec& raw, const Vec& gamma_diag,
                             double lower, double upper) {
  const Vec sat = saturate(raw, lower, upper);
  return ((vartheta - sat).array() * (raw - sat).array() / gamma_diag.array()).sum();
}

}  // namespace deltailc
