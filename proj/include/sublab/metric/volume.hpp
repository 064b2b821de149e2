#pragma once

/// @file
/// Monte Carlo volumes of CC-balls (Lebesgue measure in privileged
/// coordinates) and the Ball-Box scaling report.

#include "sublab/metric/sphere.hpp"

namespace sublab {

class DegenerateSamplingError : public Error
{
public:
  using Error::Error;
};

struct BallVolumeOptions
{
  long samples = 100000;
  std::uint64_t seed = 0;
  int workers = 1;
  /// Per-coordinate box half-widths are C_i·r^{w_i}; empty = estimate from
  /// sphere samples with a safety factor.
  std::vector<double> box_constants;
  double safety = 1.25;
  int sphere_samples = 64;
  DistanceOptions distance = fast_distance_options();
  /// Restarts are skipped for points whose first distance estimate exceeds
  /// this multiple of r.
  double restart_ceiling = 1.5;
};

struct VolumeEstimate
{
  double volume = 0.0;
  double std_error = 0.0;
  long hits = 0;
  long samples = 0;
  double box_volume = 0.0;
};

namespace detail {

inline constexpr long kVolumeChunk = 4096;

/// Box constants from the extent of sampled sphere points in privileged coordinates.
inline std::vector<double> estimate_box_constants(const HorizontalFrame& frame, const PrivilegedChart& chart, const Vec& p, double r,
                                                  const BallVolumeOptions& opt)
{
  SphereOptions so;
  so.mode = SphereMode::Full;
  so.distance = opt.distance;
  const auto sphere = cc_sphere_sample(frame, p, r, opt.sphere_samples, so);
  if (sphere.points.empty()) throw DegenerateSamplingError("no sphere points to size the sampling box");
  const int n = frame.dim();
  std::vector<double> c(static_cast<std::size_t>(n), 0.0);
  for (const auto& y : sphere.points) {
    const Vec z = frame.is_group() ? group_product(*frame.algebra(), group_inverse(*frame.algebra(), p), y) : chart.to_privileged(y);
    for (int i = 0; i < n; ++i)
      c[static_cast<std::size_t>(i)] =
          std::max(c[static_cast<std::size_t>(i)], std::abs(z[i]) / std::pow(r, chart.weights[static_cast<std::size_t>(i)]));
  }
  // A coordinate never reached still needs a nonzero width.
  const double top = *std::max_element(c.begin(), c.end());
  for (auto& v : c) v = opt.safety * std::max(v, 1e-3 * top);
  return c;
}

/// Bound on |∇_H z_h| over the box, z_h the first-layer privileged coordinates.
/// Geodesics of length ≤ r stay inside the ball, hence inside the box, so
/// |z_h(y)| > L·r certifies d(p, y) > r. Probed on Sobol points with a margin.
inline double first_layer_lipschitz(const PrivilegedChart& chart, const Box& box, int first_layer)
{
  const int n = static_cast<int>(chart.weights.size());
  double l = 0.0;
  for (const Vec& s : sobol_points(n, 256)) {
    const Vec z = box.lo + s.cwiseProduct(box.hi - box.lo);
    const Mat a = chart.frame.evaluate(z).topRows(first_layer);
    l = std::max(l, a.jacobiSvd().singularValues()[0]);
  }
  return 1.05 * l;
}

}  // namespace detail

/// Volume of B(p, r) in privileged coordinates at p.
inline VolumeEstimate ball_volume(const HorizontalFrame& frame, const Vec& p, double r, const BallVolumeOptions& opt = {})
{
  if (!(r > 0.0)) throw DomainError("ball radius must be positive");
  if (opt.samples <= 0) throw ConfigError("samples", "must be positive");
  const int n = frame.dim();
  const auto chart = privileged_chart(frame, p);
  const auto& w = chart.weights;
  const auto c = opt.box_constants.empty() ? detail::estimate_box_constants(frame, chart, p, r, opt) : opt.box_constants;
  if (static_cast<int>(c.size()) != n) throw ConfigError("box_constants", "need one constant per coordinate");

  Vec half(n);
  for (int i = 0; i < n; ++i) half[i] = c[static_cast<std::size_t>(i)] * std::pow(r, w[static_cast<std::size_t>(i)]);
  Box box{-half, half};
  int first_layer = 0;
  for (int wi : w) first_layer += wi == 1;

  const bool closed = has_closed_form(frame) && opt.distance.method != DistanceMethod::Transcription;
  DistanceOptions dopt = opt.distance;
  dopt.stop_below = r;
  dopt.stop_above = opt.restart_ceiling * r;
  // The horizontal projection of a Carnot group is 1-Lipschitz.
  const double lip = frame.is_group() ? 1.0 : detail::first_layer_lipschitz(chart, box, first_layer);
  auto inside = [&](const Vec& z) {
    if (z.head(first_layer).norm() > lip * r) return false;
    const Vec y = frame.is_group() ? group_product(*frame.algebra(), p, z) : chart.from_privileged(z);
    if (closed) return closed_form_distance(frame, p, y) <= r;
    const auto res = transcription_distance(frame, p, y, dopt);
    return res.converged && res.value <= r;
  };

  const long chunks = (opt.samples + detail::kVolumeChunk - 1) / detail::kVolumeChunk;
  const auto hits = parallel_map(static_cast<std::size_t>(chunks), opt.workers, [&](std::size_t ci) {
    auto rng = make_rng(opt.seed, 0xba11ULL + ci);
    const long begin = static_cast<long>(ci) * detail::kVolumeChunk;
    const long count = std::min(detail::kVolumeChunk, opt.samples - begin);
    long h = 0;
    for (long s = 0; s < count; ++s) h += inside(box.sample(rng)) ? 1 : 0;
    return h;
  });
  VolumeEstimate est;
  est.samples = opt.samples;
  for (long h : hits) est.hits += h;
  if (est.hits == 0) throw DegenerateSamplingError("no sample fell inside the ball of radius " + std::to_string(r));
  est.box_volume = box.volume();
  const double frac = static_cast<double>(est.hits) / static_cast<double>(est.samples);
  est.volume = est.box_volume * frac;
  est.std_error = est.box_volume * std::sqrt(frac * (1.0 - frac) / static_cast<double>(est.samples));
  return est;
}

// ---------------------------------------------------------------------------

struct BallBoxReport
{
  std::vector<double> radii;
  std::vector<double> volumes;
  std::vector<double> std_errors;
  double fitted_slope = 0.0;
  double slope_std_error = 0.0;
  int Q_expected = 0;
  std::vector<double> box_constants;
};

/// Least-squares slope of log V against log r with its standard error.
inline std::pair<double, double> log_log_slope(const std::vector<double>& r, const std::vector<double>& v)
{
  const std::size_t k = r.size();
  if (k < 2) throw DomainError("slope fit needs at least two radii");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += std::log(r[i]);
    my += std::log(v[i]);
  }
  mx /= static_cast<double>(k);
  my /= static_cast<double>(k);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (std::log(r[i]) - mx) * (std::log(r[i]) - mx);
    sxy += (std::log(r[i]) - mx) * (std::log(v[i]) - my);
  }
  const double slope = sxy / sxx;
  double rss = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double e = std::log(v[i]) - my - slope * (std::log(r[i]) - mx);
    rss += e * e;
  }
  const double se = k > 2 ? std::sqrt(rss / static_cast<double>(k - 2) / sxx) : 0.0;
  return {slope, se};
}

/// Volumes on the ladder r0·2^{-i}, i < k. The sampling box is sized once at
/// r0 and scaled by the dilation weights down the ladder.
inline BallBoxReport ball_box_report(const HorizontalFrame& frame, const Vec& p, double r0, int k, const BallVolumeOptions& opt = {})
{
  if (k < 2) throw ConfigError("ladder", "ball-box ladder needs at least two radii");
  BallBoxReport rep;
  rep.Q_expected = growth_vector_at(frame, p).Q;
  BallVolumeOptions o = opt;
  if (o.box_constants.empty()) o.box_constants = detail::estimate_box_constants(frame, privileged_chart(frame, p), p, r0, o);
  rep.box_constants = o.box_constants;
  for (int i = 0; i < k; ++i) {
    const double r = r0 * std::pow(0.5, i);
    o.seed = opt.seed + static_cast<std::uint64_t>(i) * 0x9e3779b9ULL;
    const auto est = ball_volume(frame, p, r, o);
    rep.radii.push_back(r);
    rep.volumes.push_back(est.volume);
    rep.std_errors.push_back(est.std_error);
  }
  std::tie(rep.fitted_slope, rep.slope_std_error) = log_log_slope(rep.radii, rep.volumes);
  return rep;
}

}  // namespace sublab
