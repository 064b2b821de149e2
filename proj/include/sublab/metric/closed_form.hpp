#pragma once

/// @file
/// Exact CC-distances on the flat and Heisenberg models.

#include <numbers>

#include "sublab/sr/frame.hpp"

namespace sublab {

/// Geodesic parameter θ ∈ [0, π) solving (θ − sinθ cosθ) / (4 sin²θ) = μ.
/// The horizontal projection of a geodesic from 0 to (z, t) is a circular
/// arc of opening 2θ over the chord z, enclosing area |t|.
inline double heisenberg_theta(double mu)
{
  if (mu <= 0.0) return 0.0;
  double lo = 0.0, hi = std::numbers::pi;
  // The ratio is ≈ θ/6 near 0, which seeds small μ well.
  double th = std::min(6.0 * mu, 0.5 * (lo + hi));
  for (int it = 0; it < 100; ++it) {
    const double s = std::sin(th), c = std::cos(th);
    const double n = th - s * c;
    const double val = n / (4.0 * s * s) - mu;
    if (val > 0) hi = th;
    else lo = th;
    const double deriv = 0.5 - c * n / (2.0 * s * s * s);
    double next = th - val / deriv;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - th) <= 1e-15 * std::max(1.0, th) || hi - lo < 1e-15) return next;
    th = next;
  }
  return th;
}

/// d(0, (x, y, t)) for the frame X = ∂x − (y/2)∂t, Y = ∂y + (x/2)∂t.
inline double heisenberg_norm_distance(double x, double y, double t)
{
  const double rho = std::hypot(x, y);
  const double tau = std::abs(t);
  if (tau == 0.0) return rho;
  if (rho == 0.0) return 2.0 * std::sqrt(std::numbers::pi * tau);
  const double th = heisenberg_theta(tau / (rho * rho));
  if (th < 1.0) return th == 0.0 ? rho : rho * th / std::sin(th);
  return 2.0 * th * std::sqrt(tau / (th - std::sin(th) * std::cos(th)));
}

/// d(p, q) = d(0, p⁻¹ q) on h_1 in exponential coordinates.
inline double heisenberg_distance(const Vec& p, const Vec& q)
{
  const double dx = q[0] - p[0], dy = q[1] - p[1];
  const double dt = q[2] - p[2] - 0.5 * (p[0] * q[1] - p[1] * q[0]);
  return heisenberg_norm_distance(dx, dy, dt);
}

/// Whether closed-form distances apply to this frame.
inline bool has_closed_form(const HorizontalFrame& f)
{
  return f.kind() == FrameKind::Euclidean || f.kind() == FrameKind::Heisenberg;
}

inline double closed_form_distance(const HorizontalFrame& f, const Vec& p, const Vec& q)
{
  if (f.kind() == FrameKind::Euclidean) return (q - p).norm();
  if (f.kind() == FrameKind::Heisenberg) return heisenberg_distance(p, q);
  throw DomainError("no closed-form distance for frame '" + f.name() + "'");
}

}  // namespace sublab
