#pragma once

/// @file
/// Limited-memory BFGS with backtracking line search.

#include <deque>
#include <functional>

#include "sublab/common.hpp"

namespace sublab {

struct LbfgsOptions
{
  int memory = 8;
  int max_iterations = 300;
  double gradient_tol = 1e-9;
  double relative_tol = 1e-13;
};

struct LbfgsResult
{
  Vec x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// f(x, grad) returns the objective and fills the gradient.
using Objective = std::function<double(const Vec&, Vec&)>;

inline LbfgsResult lbfgs_minimize(const Objective& f, Vec x, const LbfgsOptions& opt = {})
{
  LbfgsResult res;
  Vec g(x.size());
  double fx = f(x, g);
  std::deque<Vec> s_hist, y_hist;
  std::deque<double> rho_hist;
  Vec gn(x.size());
  for (int it = 0; it < opt.max_iterations; ++it) {
    res.iterations = it;
    if (g.norm() <= opt.gradient_tol * std::max(1.0, std::abs(fx))) {
      res.converged = true;
      break;
    }
    // Two-loop recursion.
    Vec q = g;
    std::vector<double> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      alpha[static_cast<std::size_t>(i)] = rho_hist[static_cast<std::size_t>(i)] * s_hist[static_cast<std::size_t>(i)].dot(q);
      q -= alpha[static_cast<std::size_t>(i)] * y_hist[static_cast<std::size_t>(i)];
    }
    if (!s_hist.empty()) q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alpha[i] - beta) * s_hist[i];
    }
    Vec d = -q;
    double slope = g.dot(d);
    if (!(slope < 0)) {
      d = -g;
      slope = -g.squaredNorm();
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }
    double step = 1.0;
    if (s_hist.empty()) step = std::min(1.0, 1.0 / std::max(1e-300, g.norm()));
    Vec xn;
    double fn = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      xn = x + step * d;
      fn = f(xn, gn);
      if (std::isfinite(fn) && fn <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const Vec s = xn - x;
    const Vec y = gn - g;
    const double sy = s.dot(y);
    const double change = fx - fn;
    x = xn;
    g = gn;
    fx = fn;
    if (sy > 1e-16 * s.norm() * y.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opt.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    if (change <= opt.relative_tol * std::max(1.0, std::abs(fx))) {
      res.converged = true;
      res.iterations = it + 1;
      break;
    }
  }
  res.x = std::move(x);
  res.value = fx;
  return res;
}

}  // namespace sublab
