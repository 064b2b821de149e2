#pragma once

/// @file
/// Maps between frames, local graded charts at a point, and damped Newton
/// root finding on the forward map.

#include <memory>
#include <optional>

#include "sublab/metric/distance.hpp"
#include "sublab/sr/privileged.hpp"

namespace sublab {

struct SmoothMapModel
{
  std::string name;
  std::shared_ptr<const HorizontalFrame> domain;
  std::shared_ptr<const HorizontalFrame> target;
  std::function<Vec(const Vec&)> forward;
  /// Optional exact Euclidean Jacobian; central differences otherwise.
  std::function<Mat(const Vec&)> jacobian;

  Vec operator()(const Vec& x) const { return forward(x); }

  Mat euclidean_jacobian(const Vec& x) const
  {
    if (jacobian) return jacobian(x);
    const Vec f0 = forward(x);
    Mat j(f0.size(), x.size());
    Vec xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
      xp[i] = x[i] + h;
      const Vec fp = forward(xp);
      xp[i] = x[i] - h;
      const Vec fm = forward(xp);
      xp[i] = x[i];
      j.col(i) = (fp - fm) / (2 * h);
    }
    return j;
  }
};

/// Graded coordinates centred at a point: left translation in exponential
/// coordinates for group frames, privileged coordinates otherwise.
class LocalChart
{
public:
  LocalChart(const HorizontalFrame& frame, const Vec& o) : origin_(o)
  {
    if (frame.is_group()) {
      algebra_ = frame.algebra_ptr();
      weights_ = algebra_->weights();
    } else {
      auto na = nilpotent_approximation(frame, o);
      algebra_ = std::make_shared<const CarnotAlgebra>(na.algebra);
      weights_ = na.chart.weights;
      chart_ = std::make_shared<const PrivilegedChart>(std::move(na.chart));
    }
  }

  Vec to_local(const Vec& x) const
  {
    if (chart_) return chart_->to_privileged(x);
    return group_product(*algebra_, group_inverse(*algebra_, origin_), x);
  }
  Vec from_local(const Vec& z) const
  {
    if (chart_) return chart_->from_privileged(z);
    return group_product(*algebra_, origin_, z);
  }

  const Vec& origin() const { return origin_; }
  const std::vector<int>& weights() const { return weights_; }
  std::shared_ptr<const CarnotAlgebra> algebra() const { return algebra_; }
  bool exact_group() const { return !chart_; }

private:
  Vec origin_;
  std::shared_ptr<const CarnotAlgebra> algebra_;
  std::shared_ptr<const PrivilegedChart> chart_;
  std::vector<int> weights_;
};

struct NewtonOptions
{
  int max_iterations = 60;
  double tolerance = 1e-12;  ///< on ‖f(x) − y‖, relative to max(1, ‖y‖)
};

/// Damped Newton for f(x) = y (least-squares steps, backtracking on the residual).
inline std::optional<Vec> damped_newton(const SmoothMapModel& f, const Vec& y, Vec x, const NewtonOptions& opt = {})
{
  const double tol = opt.tolerance * std::max(1.0, y.norm());
  Vec r = f(x) - y;
  double rn = r.norm();
  for (int it = 0; it < opt.max_iterations && rn > tol; ++it) {
    const Mat j = f.euclidean_jacobian(x);
    const Vec step = j.completeOrthogonalDecomposition().solve(r);
    if (!step.allFinite()) return std::nullopt;
    double a = 1.0;
    for (; a > 1e-6; a *= 0.5) {
      const Vec xn = x - a * step;
      const Vec rn_vec = f(xn) - y;
      if (rn_vec.allFinite() && rn_vec.norm() < rn) {
        x = xn;
        r = rn_vec;
        rn = r.norm();
        break;
      }
    }
    if (a <= 1e-6) return std::nullopt;
  }
  if (!(rn <= tol)) return std::nullopt;
  return x;
}

/// Appends x unless a root within `radius` is already present.
inline bool add_distinct_root(std::vector<Vec>& roots, const Vec& x, double radius = 1e-6)
{
  for (const auto& r : roots)
    if ((r - x).norm() <= radius) return false;
  roots.push_back(x);
  return true;
}

}  // namespace sublab
