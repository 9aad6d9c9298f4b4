#include "deltailc/input_shaper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "deltailc/errors.hpp"

namespace deltailc {

ShaperSpec make_shaper(double f_n, double zeta_d, double k_t) {
  if (!(f_n > 0.0)) fail(ErrorKind::InvalidArgument, "shaper frequency must be > 0");
  if (!(zeta_d >= 0.0 && zeta_d < 1.0)) fail(ErrorKind::InvalidArgument, "zeta_d must be in [0,1)");
  if (!(k_t >= 0.0 && k_t <= 1.0)) fail(ErrorKind::InvalidArgument, "k_t must be in [0,1]");
  ShaperSpec s;
  s.f_n = f_n;
  s.zeta_d = zeta_d;
  s.k_t = k_t;
  if (k_t == 0.0) return s;

  const double wn = 2.0 * kPi * f_n;
  const double wd = wn * std::sqrt(1.0 - zeta_d * zeta_d);
  const double T = k_t * (2.0 * kPi / wd) / 2.0;
  const double decay = std::exp(-zeta_d * wn * T);
  // 1 - 2 d cos + d^2 written without cancellation; for small k_t the
  // amplitudes grow like 1 / k_t^2.
  const double half = std::sin(0.5 * wd * T);
  const double xi = (1.0 - decay) * (1.0 - decay) + 4.0 * decay * half * half;
  double a0 = 1.0 / xi, a2 = decay * decay / xi;
  // Round the outer amplitudes onto a power-of-two grid coarse enough for the
  // largest partial sum. The middle one then follows from the unit-gain
  // identity and every sum is exact, so the shaper has unit gain in floating
  // point too. The rounding moves each amplitude by about one ulp.
  const double q = std::ldexp(1.0, std::ilogb(a0 + a2 + 1.0) + 2 - std::numeric_limits<double>::digits);
  a0 = std::nearbyint(a0 / q) * q;
  a2 = std::nearbyint(a2 / q) * q;
  const double a1 = (1.0 - a0) - a2;
  s.A = {a0, a1, a2};
  s.t = {0.0, T, 2.0 * T};
  s.degenerate = false;
  return s;
}

double residual_percentage(const ShaperSpec& shaper, double omega_n, double zeta) {
  if (!(omega_n > 0.0)) fail(ErrorKind::InvalidArgument, "omega_n must be > 0");
  const double wd = omega_n * std::sqrt(std::max(1.0 - zeta * zeta, 0.0));
  double C = 0.0, S = 0.0;
  for (int j = 0; j < 3; ++j) {
    const double g = shaper.A[j] * std::exp(zeta * omega_n * shaper.t[j]);
    C += g * std::cos(wd * shaper.t[j]);
    S += g * std::sin(wd * shaper.t[j]);
  }
  return std::exp(-zeta * omega_n * shaper.t[2]) * std::sqrt(C * C + S * S);
}

int grid_count(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) fail(ErrorKind::InvalidArgument, "invalid grid range");
  return static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
}

std::vector<FrequencyWeight> uniform_weighting(double f_min, double f_max, double step) {
  const int n = grid_count(f_min, f_max, step);
  std::vector<FrequencyWeight> w(n);
  for (int i = 0; i < n; ++i) w[i] = {f_min + i * step, 1.0};
  return w;
}

std::vector<FrequencyWeight> binned_weighting(const std::vector<FrequencyWeight>& raw, double f_min,
                                              double f_max, double step) {
  const int n = grid_count(f_min, f_max, step);
  std::vector<FrequencyWeight> w(n);
  for (int i = 0; i < n; ++i) w[i] = {f_min + i * step, 0.0};
  for (const auto& fw : raw) {
    if (!(fw.weight > 0.0) || !std::isfinite(fw.f_hz)) continue;
    const long i = std::lround((fw.f_hz - f_min) / step);
    if (i < 0 || i >= n) continue;
    w[static_cast<std::size_t>(i)].weight += fw.weight;
  }
  return w;
}

namespace {

struct PreparedWeights {
  std::vector<double> omega;
  std::vector<double> weight;
  double total = 0.0;
};

PreparedWeights prepare(const std::vector<FrequencyWeight>& weighting) {
  PreparedWeights p;
  for (const auto& fw : weighting) {
    if (!(fw.f_hz > 0.0) || !(fw.weight >= 0.0)) {
      fail(ErrorKind::InvalidArgument, "weighting entries need f > 0 and weight >= 0");
    }
    if (fw.weight == 0.0) continue;
    p.omega.push_back(2.0 * kPi * fw.f_hz);
    p.weight.push_back(fw.weight);
    p.total += fw.weight;
  }
  if (p.omega.empty() || !(p.total > 0.0)) fail(ErrorKind::EmptyWeighting, "frequency weighting is empty");
  return p;
}

void check_settings(const ObjectiveSettings& s) {
  if (!(s.f_min > 0.0) || !(s.f_max >= s.f_min)) fail(ErrorKind::InvalidArgument, "invalid f_range");
  if (!(s.grid > 0.0)) fail(ErrorKind::InvalidArgument, "grid must be > 0");
  if (!(s.w1 >= 0.0 && s.w2 >= 0.0) || std::abs(s.w1 + s.w2 - 1.0) > 1e-12) {
    fail(ErrorKind::InvalidArgument, "objective weights must be nonnegative and sum to 1");
  }
}

ShaperObjective evaluate(const ShaperSpec& shaper, const std::vector<double>& range_omega,
                         const PreparedWeights& weights, const ObjectiveSettings& s) {
  ShaperObjective o;
  for (double w : range_omega) o.J1 = std::max(o.J1, residual_percentage(shaper, w, s.zeta_design));
  double acc = 0.0;
  for (std::size_t k = 0; k < weights.omega.size(); ++k) {
    acc += weights.weight[k] * residual_percentage(shaper, weights.omega[k], s.zeta_design);
  }
  o.J2 = acc / weights.total;
  o.J = s.w1 * o.J1 + s.w2 * o.J2;
  return o;
}

std::vector<double> range_omegas(const ObjectiveSettings& s) {
  const int n = grid_count(s.f_min, s.f_max, s.grid);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = 2.0 * kPi * (s.f_min + i * s.grid);
  return out;
}

}  // namespace

ShaperObjective objective(double f_n, double k_t, const std::vector<FrequencyWeight>& weighting,
                          const ObjectiveSettings& settings) {
  check_settings(settings);
  const PreparedWeights w = prepare(weighting);
  return evaluate(make_shaper(f_n, settings.zeta_design, k_t), range_omegas(settings), w, settings);
}

ShaperDesign optimize_shaper(const std::vector<FrequencyWeight>& weighting,
                             const ObjectiveSettings& settings, const SearchGrid& grid,
                             int parallel) {
  check_settings(settings);
  if (!(grid.k_min >= 0.0 && grid.k_max <= 1.0)) fail(ErrorKind::InvalidArgument, "k range outside [0,1]");
  const PreparedWeights w = prepare(weighting);
  const std::vector<double> omegas = range_omegas(settings);

  ShaperDesign d;
  d.f_count = grid_count(settings.f_min, settings.f_max, grid.step);
  d.k_count = grid_count(grid.k_min, grid.k_max, grid.step);
  d.surface.resize(static_cast<std::size_t>(d.f_count) * d.k_count);

  auto row = [&](int fi) {
    const double f = settings.f_min + fi * grid.step;
    for (int ki = 0; ki < d.k_count; ++ki) {
      const double k = std::min(grid.k_min + ki * grid.step, 1.0);
      const ShaperObjective o = evaluate(make_shaper(f, settings.zeta_design, k), omegas, w, settings);
      d.surface[static_cast<std::size_t>(fi) * d.k_count + ki] = {f, k, o.J1, o.J2, o.J};
    }
  };
  const int threads = std::max(1, std::min(parallel, d.f_count));
  if (threads == 1) {
    for (int fi = 0; fi < d.f_count; ++fi) row(fi);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (int fi = t; fi < d.f_count; fi += threads) row(fi);
      });
    }
    for (auto& th : pool) th.join();
  }

  // Sequential reduction in grid order keeps the tie-break deterministic.
  for (std::size_t i = 0; i < d.surface.size(); ++i) {
    if (d.best_index < 0 || d.surface[i].J < d.surface[d.best_index].J) d.best_index = static_cast<int>(i);
  }
  const SurfacePoint& b = d.surface[d.best_index];
  d.best = {b.J1, b.J2, b.J};
  d.shaper = make_shaper(b.f_n, settings.zeta_design, b.k_t);
  return d;
}

Mat shape_samples(const ShaperSpec& shaper, const Mat& samples, double dt) {
  if (!(dt > 0.0)) fail(ErrorKind::InvalidArgument, "dt must be > 0");
  if (shaper.degenerate) return samples;
  if (shaper.t[1] < dt) {
    fail(ErrorKind::ImpulseAliasing, "impulse spacing is below the sample step");
  }
  const int n = static_cast<int>(samples.rows());
  if (n == 0) return samples;
  const int n2 = static_cast<int>(std::llround(shaper.t[1] / dt));
  const int offsets[3] = {0, n2, 2 * n2};
  const int out_rows = n + offsets[2];
  Mat out = Mat::Zero(out_rows, samples.cols());
  for (int k = 0; k < out_rows; ++k) {
    for (int j = 0; j < 3; ++j) {
      const int src = std::clamp(k - offsets[j], 0, n - 1);
      out.row(k) += shaper.A[j] * samples.row(src);
    }
  }
  return out;
}

ReferenceTrajectory shape_trajectory(const ShaperSpec& shaper, const ReferenceTrajectory& ref) {
  ref.validate();
  ReferenceTrajectory out;
  out.dt = ref.dt;
  out.origin = ref.origin;
  out.theta = shape_samples(shaper, ref.theta, ref.dt);
  out.theta_dot = shape_samples(shaper, ref.theta_dot, ref.dt);
  out.theta_ddot = shape_samples(shaper, ref.theta_ddot, ref.dt);
  if (ref.p.rows() == ref.theta.rows()) out.p = shape_samples(shaper, ref.p, ref.dt);
  return out;
}

}  // namespace deltailc
