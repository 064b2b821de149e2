#pragma once

/// @file
/// Points on CC-spheres by shooting rays from the centre and bisecting on the
/// ray parameter.

#include "sublab/metric/distance.hpp"
#include "sublab/sr/privileged.hpp"

namespace sublab {

enum class SphereMode
{
  Horizontal,  ///< constant-control rays only
  Full,        ///< half constant-control rays, half dilation rays δ_s(v) in privileged coordinates
};

struct SphereOptions
{
  SphereMode mode = SphereMode::Horizontal;
  double tolerance = 0.02;  ///< relative
  DistanceOptions distance;
};

struct SphereSample
{
  std::vector<Vec> points;
  std::vector<double> distances;
  int requested = 0;
  bool partial() const { return static_cast<int>(points.size()) < requested; }
};

namespace detail {

/// Solves d(s) = r along a ray with d(0) = 0, d increasing on average.
/// Returns the parameter, or NaN when no bracket is found.
template <typename DistFn>
double bisect_ray(const DistFn& dist, double r, double s0, double tol, double& d_out)
{
  double lo = 0.0, hi = s0;
  double dhi = dist(hi);
  for (int k = 0; dhi < r && k < 40; ++k) {
    lo = hi;
    hi *= 1.6;
    dhi = dist(hi);
  }
  if (dhi < r) return std::numeric_limits<double>::quiet_NaN();
  double s = hi;
  d_out = dhi;
  for (int it = 0; it < 60 && std::abs(d_out - r) > tol * r; ++it) {
    s = 0.5 * (lo + hi);
    d_out = dist(s);
    if (d_out < r) lo = s;
    else hi = s;
  }
  return s;
}

}  // namespace detail

/// m points y with |d(x, y) − r| ≤ tolerance·r.
inline SphereSample cc_sphere_sample(const HorizontalFrame& frame, const Vec& x, double r, int m, const SphereOptions& opt = {})
{
  if (!(r > 0.0)) throw DomainError("sphere radius must be positive");
  if (x.size() != frame.dim()) throw StructuralError("sphere centre does not match frame dimension");
  SphereSample out;
  out.requested = m;
  if (m <= 0) return out;
  const auto dist = distance_function(frame, opt.distance);
  const bool exact = frame.is_group() && has_closed_form(frame) && opt.distance.method != DistanceMethod::Transcription;
  const int n_dil = opt.mode == SphereMode::Full ? m / 2 : 0;
  const int n_hor = m - n_dil;
  const double tol = exact ? 1e-9 : 0.5 * opt.tolerance;

  auto accept = [&](const Vec& y, double d) {
    if (std::abs(d - r) <= opt.tolerance * r) {
      out.points.push_back(y);
      out.distances.push_back(d);
    }
  };

  for (const Vec& u : sphere_directions(frame.rank(), n_hor)) {
    auto ray = [&](double s) -> Vec { return frame.is_group() ? segment_map(frame, x, u, s) : flow(frame, u, x, s); };
    if (frame.is_group()) {
      // Horizontal lines are length-minimising in Carnot groups.
      const Vec y = ray(r);
      accept(y, exact ? r : dist(x, y));
      continue;
    }
    double d = 0.0;
    const double s = detail::bisect_ray([&](double t) { return dist(x, ray(t)); }, r, r, tol, d);
    if (std::isfinite(s)) accept(ray(s), d);
  }

  if (n_dil > 0) {
    const auto chart = privileged_chart(frame, x);
    const HomogeneousNorm hn{NormKind::SumPower, chart.weights};
    auto dirs = sphere_directions(frame.dim(), std::max(0, n_dil - 2 * frame.dim()));
    for (int i = 0; i < frame.dim() && static_cast<int>(dirs.size()) < n_dil; ++i) {
      Vec e = Vec::Zero(frame.dim());
      e[i] = 1.0;
      dirs.push_back(e);
      if (static_cast<int>(dirs.size()) < n_dil) dirs.push_back(-e);
    }
    for (Vec v : dirs) {
      v /= hn(v);
      auto ray = [&](double s) -> Vec {
        const Vec z = dilate(chart.weights, s, v);
        return frame.is_group() ? group_product(*frame.algebra(), x, z) : chart.from_privileged(z);
      };
      if (frame.is_group()) {
        // Homogeneity: d(x, x·δ_s v) = s·d(0, v).
        const double d1 = dist(Vec::Zero(frame.dim()), v);
        if (!(d1 > 0)) continue;
        const Vec y = ray(r / d1);
        accept(y, exact ? r : dist(x, y));
        continue;
      }
      double d = 0.0;
      const double s = detail::bisect_ray([&](double t) { return dist(x, ray(t)); }, r, r, tol, d);
      if (std::isfinite(s)) accept(ray(s), d);
    }
  }
  return out;
}

}  // namespace sublab
