#pragma once

/// @file
/// Carnot–Carathéodory distance by direct transcription: piecewise-constant
/// controls, quadratic endpoint penalty with continuation, quasi-Newton
/// descent, then a min-norm Gauss–Newton endpoint projection.

#include "sublab/metric/closed_form.hpp"
#include "sublab/metric/lbfgs.hpp"
#include "sublab/sr/segment.hpp"

namespace sublab {

enum class DistanceMethod { Auto, Transcription, ClosedForm };

struct DistanceOptions
{
  int segments = 64;
  int rounds = 6;        ///< μ = mu0·factor^k, k < rounds
  double mu0 = 1e2;
  double mu_factor = 10.0;
  int seeds = 8;         ///< straight-line lift + random controls
  std::uint64_t seed = 0;
  double tolerance = 1e-6;
  int max_iterations = 300;  ///< per continuation round
  int substeps = 2;          ///< RK4 steps per segment on generic frames
  DistanceMethod method = DistanceMethod::Auto;
  /// Stop restarting once a converged value falls at or below this bound
  /// (membership tests only need d ≤ r).
  double stop_below = -1.0;
  /// Skip the remaining restarts once the best converged value exceeds this
  /// bound (the point is clearly outside a membership radius).
  double stop_above = std::numeric_limits<double>::infinity();
};

/// Cheaper settings for bulk membership tests.
inline DistanceOptions fast_distance_options()
{
  DistanceOptions o;
  o.segments = 24;
  o.seeds = 3;
  o.max_iterations = 30;
  return o;
}

struct DistanceResult
{
  double value = 0.0;
  double endpoint_error = 0.0;
  Mat controls;  ///< segments × r, empty for closed forms
  int restarts_used = 0;
  bool converged = true;
  std::string method;
};

namespace detail {

class Transcription
{
public:
  Transcription(const HorizontalFrame& frame, const Vec& p, const Vec& q, const DistanceOptions& opt, Vec penalty_weights)
      : model_(frame, opt.substeps), p_(p), q_(q), pw_(std::move(penalty_weights)), n_(frame.dim()), r_(frame.rank()),
        segs_(opt.segments), dt_(1.0 / opt.segments)
  {
  }

  Vec endpoint(const Vec& z) const
  {
    Vec x = p_;
    for (int k = 0; k < segs_; ++k) x = model_.step(x, control(z, k), dt_);
    return x;
  }

  /// Σ|u_k|²Δt + μ Σ_i π_i (x_N − q)_i² and its gradient by reverse accumulation.
  double objective(const Vec& z, Vec& grad, double mu) const
  {
    std::vector<Mat> jx(static_cast<std::size_t>(segs_)), ju(static_cast<std::size_t>(segs_));
    Vec x = p_;
    for (int k = 0; k < segs_; ++k)
      x = model_.jacobians(x, control(z, k), dt_, jx[static_cast<std::size_t>(k)], ju[static_cast<std::size_t>(k)]);
    const Vec e = x - q_;
    Vec lambda = 2.0 * mu * pw_.cwiseProduct(e);
    grad.resize(z.size());
    for (int k = segs_ - 1; k >= 0; --k) {
      grad.segment(k * r_, r_) = 2.0 * dt_ * control(z, k) + ju[static_cast<std::size_t>(k)].transpose() * lambda;
      lambda = jx[static_cast<std::size_t>(k)].transpose() * lambda;
    }
    return dt_ * z.squaredNorm() + mu * pw_.dot(e.cwiseProduct(e));
  }

  /// Endpoint Jacobian d x_N / d z (n × N·r).
  Mat endpoint_jacobian(const Vec& z, Vec& end) const
  {
    std::vector<Mat> jx(static_cast<std::size_t>(segs_)), ju(static_cast<std::size_t>(segs_));
    Vec x = p_;
    for (int k = 0; k < segs_; ++k)
      x = model_.jacobians(x, control(z, k), dt_, jx[static_cast<std::size_t>(k)], ju[static_cast<std::size_t>(k)]);
    end = x;
    Mat out(n_, segs_ * r_);
    Mat phi = Mat::Identity(n_, n_);
    for (int k = segs_ - 1; k >= 0; --k) {
      out.middleCols(k * r_, r_) = phi * ju[static_cast<std::size_t>(k)];
      phi = phi * jx[static_cast<std::size_t>(k)];
    }
    return out;
  }

  double length(const Vec& z) const
  {
    double l = 0.0;
    for (int k = 0; k < segs_; ++k) l += control(z, k).norm() * dt_;
    return l;
  }

  Vec control(const Vec& z, int k) const { return z.segment(k * r_, r_); }

  const Vec& target() const { return q_; }
  int variables() const { return segs_ * r_; }

private:
  SegmentModel model_;
  Vec p_, q_, pw_;
  int n_, r_, segs_;
  double dt_;
};

/// Rough size s of the displacement (root-weighted chart coordinates) and
/// penalty weights s^{2−2w_i}, which make the penalised problem invariant
/// under dilations of homogeneous frames.
inline std::pair<double, Vec> distance_scale(const HorizontalFrame& frame, const Vec& p, const Vec& q)
{
  const Vec d = q - p;
  std::vector<int> w(static_cast<std::size_t>(d.size()), 1);
  try {
    w = growth_vector_at(frame, p).weights;
  } catch (const NonGeneratingError&) {
  }
  double s = 0.0;
  for (int i = 0; i < d.size(); ++i) s += std::pow(std::abs(d[i]), 1.0 / w[static_cast<std::size_t>(i)]);
  s = std::max(s, 1e-3);
  Vec pw(d.size());
  for (int i = 0; i < d.size(); ++i) pw[i] = std::pow(s, 2 - 2 * w[static_cast<std::size_t>(i)]);
  return {s, pw};
}

}  // namespace detail

inline DistanceResult transcription_distance(const HorizontalFrame& frame, const Vec& p, const Vec& q, const DistanceOptions& opt = {})
{
  if (p.size() != frame.dim() || q.size() != frame.dim()) throw StructuralError("distance endpoints do not match frame dimension");
  if (opt.segments < 1 || opt.seeds < 1 || opt.rounds < 1) throw ConfigError("distance", "segments, seeds and rounds must be positive");
  DistanceResult best;
  best.method = "transcription";
  if ((p - q).norm() == 0.0) {
    best.value = 0.0;
    best.controls = Mat::Zero(opt.segments, frame.rank());
    return best;
  }
  const int r = frame.rank();
  auto [scale, penalty] = detail::distance_scale(frame, p, q);
  const detail::Transcription tr(frame, p, q, opt, std::move(penalty));
  auto rng = make_rng(opt.seed, 0x5eedULL);

  bool have = false;
  for (int s = 0; s < opt.seeds; ++s) {
    Vec z(tr.variables());
    if (s == 0) {
      // Straight-line lift: least-squares constant control toward q.
      const Mat a = frame.evaluate(p);
      const Vec u = a.completeOrthogonalDecomposition().solve(q - p);
      for (int k = 0; k < opt.segments; ++k) z.segment(k * r, r) = u;
    } else {
      // Random low-frequency controls of the expected size.
      const int modes = 3;
      std::vector<Vec> coef;
      for (int m = 0; m < 2 * modes; ++m) coef.push_back(gaussian_vec(rng, r));
      for (int k = 0; k < opt.segments; ++k) {
        const double t = (k + 0.5) / opt.segments;
        Vec u = coef[0];
        for (int m = 1; m < modes; ++m)
          u += coef[static_cast<std::size_t>(2 * m - 1)] * std::cos(2 * std::numbers::pi * m * t) +
               coef[static_cast<std::size_t>(2 * m)] * std::sin(2 * std::numbers::pi * m * t);
        z.segment(k * r, r) = u;
      }
      const double l = tr.length(z);
      if (l > 0) z *= scale / l;
    }

    double mu = opt.mu0;
    for (int round = 0; round < opt.rounds; ++round, mu *= opt.mu_factor) {
      LbfgsOptions lo;
      lo.max_iterations = opt.max_iterations;
      lo.gradient_tol = 1e-10;
      const auto res = lbfgs_minimize([&](const Vec& v, Vec& g) { return tr.objective(v, g, mu); }, z, lo);
      z = res.x;
    }
    // Min-norm Newton projection onto the endpoint constraint.
    for (int it = 0; it < 20; ++it) {
      Vec end;
      const Mat jac = tr.endpoint_jacobian(z, end);
      const Vec e = end - q;
      if (e.norm() <= 1e-13 * std::max(1.0, q.norm())) break;
      const Mat jjt = jac * jac.transpose();
      const Vec step = jac.transpose() * jjt.ldlt().solve(e);
      if (!step.allFinite()) break;
      double a = 1.0;
      Vec zn = z - step;
      while (a > 1e-4 && (tr.endpoint(zn) - q).norm() > e.norm()) {
        a *= 0.5;
        zn = z - a * step;
      }
      if (a <= 1e-4) break;
      z = zn;
    }

    DistanceResult cand;
    cand.method = "transcription";
    cand.endpoint_error = (tr.endpoint(z) - q).norm();
    cand.value = tr.length(z);
    cand.converged = cand.endpoint_error <= opt.tolerance;
    cand.controls.resize(opt.segments, r);
    for (int k = 0; k < opt.segments; ++k) cand.controls.row(k) = tr.control(z, k).transpose();
    const bool better = !have || (cand.converged && !best.converged) ||
                        (cand.converged == best.converged &&
                         (cand.converged ? cand.value < best.value : cand.endpoint_error < best.endpoint_error));
    if (better) {
      best = std::move(cand);
      have = true;
    }
    best.restarts_used = s + 1;
    if (best.converged && (best.value <= opt.stop_below || best.value > opt.stop_above)) break;
  }
  return best;
}

inline DistanceResult cc_distance(const HorizontalFrame& frame, const Vec& p, const Vec& q, const DistanceOptions& opt = {})
{
  const bool closed = opt.method == DistanceMethod::ClosedForm || (opt.method == DistanceMethod::Auto && has_closed_form(frame));
  if (closed) {
    if (p.size() != frame.dim() || q.size() != frame.dim()) throw StructuralError("distance endpoints do not match frame dimension");
    DistanceResult res;
    res.value = closed_form_distance(frame, p, q);
    res.method = "closed-form";
    return res;
  }
  return transcription_distance(frame, p, q, opt);
}

/// Distance function with fixed options, for repeated use.
inline std::function<double(const Vec&, const Vec&)> distance_function(const HorizontalFrame& frame, DistanceOptions opt = {})
{
  if (opt.method != DistanceMethod::Transcription && has_closed_form(frame))
    return [frame](const Vec& a, const Vec& b) { return closed_form_distance(frame, a, b); };
  return [frame, opt](const Vec& a, const Vec& b) { return transcription_distance(frame, a, b, opt).value; };
}

}  // namespace sublab
