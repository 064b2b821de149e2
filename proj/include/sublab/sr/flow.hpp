#pragma once

/// @file
/// Integral curves of horizontal controls γ' = Σ u_j(t) X_j(γ).

#include <functional>

#include <boost/numeric/odeint.hpp>

#include "sublab/sr/frame.hpp"

namespace sublab {

class IntegrationError : public Error
{
public:
  IntegrationError(const std::string& what, Vec last_state, double last_time)
      : Error(what), last_state_(std::move(last_state)), last_time_(last_time)
  {
  }
  const Vec& last_state() const { return last_state_; }
  double last_time() const { return last_time_; }

private:
  Vec last_state_;
  double last_time_;
};

struct FlowOptions
{
  double rtol = 1e-9;
  double atol = 1e-12;
  double min_step = 1e-14;  ///< relative to the duration
  long max_steps = 2'000'000;
};

/// One constant-control piece of a schedule.
struct ControlSegment
{
  double duration;
  Vec u;
};

using ControlFn = std::function<Vec(double)>;

/// Adaptive Dormand–Prince integration of γ' = Σ_j u_j(t) X_j(γ) on [0, T].
inline Vec flow(const HorizontalFrame& frame, const ControlFn& u, const Vec& p, double T, const FlowOptions& opt = {})
{
  namespace odeint = boost::numeric::odeint;
  using State = std::vector<double>;
  if (p.size() != frame.dim()) throw StructuralError("flow start point does not match frame dimension");
  if (!std::isfinite(T)) throw DomainError("flow duration must be finite");
  if (T == 0.0) return p;

  const int n = frame.dim();
  auto rhs = [&](const State& x, State& dx, double t) {
    const Vec v = frame.velocity(Eigen::Map<const Vec>(x.data(), n), u(t));
    for (int i = 0; i < n; ++i) dx[static_cast<std::size_t>(i)] = v[i];
  };
  auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(opt.atol, opt.rtol);

  State x(p.data(), p.data() + n);
  const double dir = T > 0 ? 1.0 : -1.0;
  double t = 0.0;
  double dt = dir * std::min(std::abs(T), 1e-2);
  const double floor = opt.min_step * std::max(1.0, std::abs(T));
  auto last_good = [&] { return Vec(Eigen::Map<const Vec>(x.data(), n)); };
  for (long step = 0; dir * (T - t) > 0; ++step) {
    if (step > opt.max_steps) throw IntegrationError("flow exceeded step budget", last_good(), t);
    if (dir * (t + dt - T) > 0) dt = T - t;
    const auto res = stepper.try_step(rhs, x, t, dt);
    if (res == odeint::fail && std::abs(dt) < floor)
      throw IntegrationError("step size underflow at t = " + std::to_string(t), last_good(), t);
    for (double v : x)
      if (!std::isfinite(v)) throw IntegrationError("flow left the finite range", last_good(), t);
  }
  return last_good();
}

/// Constant control.
inline Vec flow(const HorizontalFrame& frame, const Vec& u, const Vec& p, double T, const FlowOptions& opt = {})
{
  if (u.size() != frame.rank()) throw StructuralError("control dimension does not match frame rank");
  return flow(frame, [&u](double) { return u; }, p, T, opt);
}

/// Piecewise-constant schedule, integrated piece by piece.
inline Vec flow(const HorizontalFrame& frame, const std::vector<ControlSegment>& schedule, const Vec& p, const FlowOptions& opt = {})
{
  Vec x = p;
  for (const auto& seg : schedule) x = flow(frame, seg.u, x, seg.duration, opt);
  return x;
}

/// Schedule traversed backwards: γ run in reverse returns to its start.
inline std::vector<ControlSegment> reversed(const std::vector<ControlSegment>& schedule)
{
  std::vector<ControlSegment> out;
  for (auto it = schedule.rbegin(); it != schedule.rend(); ++it) out.push_back({it->duration, -it->u});
  return out;
}

// ---------------------------------------------------------------------------
// Fast segment propagator for optimisation loops

/// Endpoint of the constant control u over time dt. Group frames use the
/// group law x * exp(dt Σ u_j e_j) (exact); other frames take `substeps`
/// classical RK4 steps.
inline Vec segment_map(const HorizontalFrame& frame, const Vec& x, const Vec& u, double dt, int substeps = 4)
{
  if (frame.is_group()) {
    const auto& g = *frame.algebra();
    Vec h = Vec::Zero(g.dim());
    h.head(g.rank()) = dt * u;
    if (frame.kind() == FrameKind::Euclidean) return x + h;
    return group_product(g, x, h);
  }
  Vec y = x;
  const double h = dt / substeps;
  for (int s = 0; s < substeps; ++s) {
    const Vec k1 = frame.velocity(y, u);
    const Vec k2 = frame.velocity(y + 0.5 * h * k1, u);
    const Vec k3 = frame.velocity(y + 0.5 * h * k2, u);
    const Vec k4 = frame.velocity(y + h * k3, u);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

}  // namespace sublab
