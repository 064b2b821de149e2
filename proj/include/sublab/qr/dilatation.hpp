#pragma once

/// @file
/// Dilatation and Lipschitz profiles of a map along a radius ladder, from
/// sampled CC-spheres and balls in the domain and distances in the target.

#include "sublab/metric/sphere.hpp"
#include "sublab/qr/map_model.hpp"

namespace sublab {

/// Sphere and interior points of B(x, r). Group frames reuse one unit sphere
/// sample at the identity, moved by translation and dilation (exact by
/// left-invariance and homogeneity).
class BallSampler
{
public:
  struct Points
  {
    std::vector<Vec> sphere;
    std::vector<Vec> interior;
  };

  BallSampler(std::shared_ptr<const HorizontalFrame> frame, int m, SphereOptions opt = {.mode = SphereMode::Full},
              std::vector<double> fractions = {0.25, 0.5, 0.75})
      : frame_(std::move(frame)), m_(m), opt_(std::move(opt)), fractions_(std::move(fractions))
  {
    if (frame_->is_group()) unit_ = cc_sphere_sample(*frame_, Vec::Zero(frame_->dim()), 1.0, m_, opt_);
  }

  Points at(const Vec& x, double r) const
  {
    Points out;
    if (frame_->is_group()) {
      const auto& g = *frame_->algebra();
      for (const auto& v : unit_.points) {
        out.sphere.push_back(group_product(g, x, dilate(g, r, v)));
        for (double s : fractions_) out.interior.push_back(group_product(g, x, dilate(g, r * s, v)));
      }
      return out;
    }
    out.sphere = cc_sphere_sample(*frame_, x, r, m_, opt_).points;
    for (double s : fractions_) {
      auto inner = cc_sphere_sample(*frame_, x, r * s, m_, opt_).points;
      out.interior.insert(out.interior.end(), inner.begin(), inner.end());
    }
    return out;
  }

  int requested() const { return m_; }

private:
  std::shared_ptr<const HorizontalFrame> frame_;
  int m_;
  SphereOptions opt_;
  std::vector<double> fractions_;
  SphereSample unit_;
};

struct TailStats
{
  double max = 0.0;
  double min = 0.0;
  bool monotone = false;
  double richardson = std::numeric_limits<double>::quiet_NaN();  ///< 2v_k − v_{k−1} when monotone
};

/// Statistics over the smaller-radius half of a ladder (values in ladder order).
inline TailStats tail_stats(const std::vector<double>& v)
{
  TailStats t;
  if (v.empty()) return t;
  const std::size_t start = v.size() / 2;
  t.max = *std::max_element(v.begin() + static_cast<long>(start), v.end());
  t.min = *std::min_element(v.begin() + static_cast<long>(start), v.end());
  if (v.size() - start >= 2) {
    bool up = true, down = true;
    for (std::size_t i = start + 1; i < v.size(); ++i) {
      up = up && v[i] >= v[i - 1];
      down = down && v[i] <= v[i - 1];
    }
    t.monotone = up || down;
    if (t.monotone) t.richardson = 2.0 * v.back() - v[v.size() - 2];
  }
  return t;
}

struct DilatationOptions
{
  int sphere_samples = 64;
  SphereOptions sphere{.mode = SphereMode::Full};
  DistanceOptions target_distance;
  /// l_f below this multiple of the distance noise floor is flagged.
  double degenerate_factor = 3.0;
  int workers = 1;
};

struct DilatationStep
{
  double r = 0.0;
  double L = 0.0;        ///< sup over the closed ball
  double L_sphere = 0.0; ///< sup over the sphere (L')
  double l = 0.0;        ///< inf over the sphere
  double H = 0.0;
  double H_sphere = 0.0; ///< H'
  bool degenerate = false;
  int sphere_points = 0;
};

struct DilatationProfile
{
  Vec center;
  std::vector<DilatationStep> steps;
  double H = 0.0;        ///< tail max of H_f(x, r)
  double H_sphere = 0.0; ///< tail max of H'_f(x, r)
  TailStats H_tail, H_sphere_tail;
  bool degenerate = false;
};

namespace detail {

inline double noise_floor(const HorizontalFrame& target, const DistanceOptions& opt, double scale)
{
  const bool closed = has_closed_form(target) && opt.method != DistanceMethod::Transcription;
  return closed ? 1e-12 * std::max(1.0, scale) : 1e-3 * scale;
}

inline std::vector<double> ladder(double r0, int k)
{
  if (!(r0 > 0.0)) throw DomainError("r0 must be positive");
  if (k < 1) throw ConfigError("ladder", "must be at least 1");
  std::vector<double> r;
  for (int i = 0; i < k; ++i) r.push_back(r0 * std::pow(0.5, i));
  return r;
}

}  // namespace detail

inline DilatationProfile dilatation_profile(const SmoothMapModel& f, const Vec& x, double r0, int k, const DilatationOptions& opt = {})
{
  const BallSampler sampler(f.domain, opt.sphere_samples, opt.sphere);
  const auto dist = distance_function(*f.target, opt.target_distance);
  const Vec fx = f(x);
  const auto radii = detail::ladder(r0, k);
  DilatationProfile prof;
  prof.center = x;
  prof.steps = parallel_map(radii.size(), opt.workers, [&](std::size_t i) {
    const double r = radii[i];
    const auto pts = sampler.at(x, r);
    if (pts.sphere.empty()) throw DegenerateSamplingError("no sphere points at r = " + std::to_string(r));
    DilatationStep s;
    s.r = r;
    s.sphere_points = static_cast<int>(pts.sphere.size());
    s.l = std::numeric_limits<double>::infinity();
    for (const auto& y : pts.sphere) {
      const double d = dist(fx, f(y));
      s.L_sphere = std::max(s.L_sphere, d);
      s.l = std::min(s.l, d);
    }
    s.L = s.L_sphere;
    for (const auto& y : pts.interior) s.L = std::max(s.L, dist(fx, f(y)));
    s.degenerate = s.l < opt.degenerate_factor * detail::noise_floor(*f.target, opt.target_distance, s.L_sphere);
    if (s.degenerate) {
      s.H = s.H_sphere = std::numeric_limits<double>::infinity();
    } else {
      s.H = s.L / s.l;
      s.H_sphere = s.L_sphere / s.l;
    }
    return s;
  });
  std::vector<double> h, hs;
  for (const auto& s : prof.steps) {
    h.push_back(s.H);
    hs.push_back(s.H_sphere);
    prof.degenerate = prof.degenerate || s.degenerate;
  }
  prof.H_tail = tail_stats(h);
  prof.H_sphere_tail = tail_stats(hs);
  prof.H = prof.H_tail.max;
  prof.H_sphere = prof.H_sphere_tail.max;
  return prof;
}

struct LipProfile
{
  Vec center;
  std::vector<double> radii;
  std::vector<double> ratios;  ///< L_f(x, r)/r
  double Lip = 0.0;            ///< tail max
  double lip = 0.0;            ///< tail min
  TailStats tail;
};

/// Lip and lip from an existing dilatation ladder.
inline LipProfile lip_profile(const DilatationProfile& prof)
{
  LipProfile out;
  out.center = prof.center;
  for (const auto& s : prof.steps) {
    out.radii.push_back(s.r);
    out.ratios.push_back(s.L / s.r);
  }
  out.tail = tail_stats(out.ratios);
  out.Lip = out.tail.max;
  out.lip = out.tail.min;
  return out;
}

inline LipProfile lip_profile(const SmoothMapModel& f, const Vec& x, double r0, int k, const DilatationOptions& opt = {})
{
  return lip_profile(dilatation_profile(f, x, r0, k, opt));
}

}  // namespace sublab
