#pragma once

/// @file
/// Constant-control segment maps S(x, u) = γ_x,u(dt) with Jacobians, the
/// building block of the transcription solver.

#include "sublab/sr/flow.hpp"

namespace sublab {

/// Flat evaluation of Σ_j u_j X_j(x) for a polynomial frame.
class CompiledFrame
{
public:
  explicit CompiledFrame(const HorizontalFrame& frame) : n_(frame.dim()), r_(frame.rank())
  {
    std::map<Exponents, int> index;
    for (int j = 0; j < r_; ++j)
      for (int i = 0; i < n_; ++i)
        for (const auto& [e, c] : frame.field(j)[i].terms()) {
          auto [it, fresh] = index.try_emplace(e, static_cast<int>(monomials_.size()));
          if (fresh) monomials_.push_back(e);
          terms_.push_back({j, i, it->second, c});
        }
    for (const auto& e : monomials_)
      for (int k : e) max_deg_ = std::max(max_deg_, k);
  }

  int dim() const { return n_; }
  int rank() const { return r_; }

  void velocity(const double* x, const double* u, double* out) const
  {
    thread_local std::vector<double> mono;
    monomial_values(x, mono, nullptr);
    for (int i = 0; i < n_; ++i) out[i] = 0.0;
    for (const auto& t : terms_) out[t.comp] += u[t.field] * t.coef * mono[static_cast<std::size_t>(t.mono)];
  }

  /// Velocity v, its x-Jacobian jx (n×n) and the field matrix fu = ∂v/∂u (n×r).
  void velocity_jacobian(const double* x, const double* u, double* v, Mat& jx, Mat& fu) const
  {
    thread_local std::vector<double> mono, dmono;
    monomial_values(x, mono, &dmono);
    jx.setZero(n_, n_);
    fu.setZero(n_, r_);
    for (int i = 0; i < n_; ++i) v[i] = 0.0;
    for (const auto& t : terms_) {
      const double m = mono[static_cast<std::size_t>(t.mono)];
      v[t.comp] += u[t.field] * t.coef * m;
      fu(t.comp, t.field) += t.coef * m;
      const double s = u[t.field] * t.coef;
      if (s == 0.0) continue;
      for (int l = 0; l < n_; ++l) jx(t.comp, l) += s * dmono[static_cast<std::size_t>(t.mono * n_ + l)];
    }
  }

private:
  void monomial_values(const double* x, std::vector<double>& mono, std::vector<double>* dmono) const
  {
    thread_local std::vector<double> pw;
    const int stride = max_deg_ + 1;
    pw.resize(static_cast<std::size_t>(n_ * stride));
    for (int i = 0; i < n_; ++i) {
      double v = 1.0;
      for (int k = 0; k <= max_deg_; ++k) {
        pw[static_cast<std::size_t>(i * stride + k)] = v;
        v *= x[i];
      }
    }
    auto p = [&](int i, int k) { return pw[static_cast<std::size_t>(i * stride + k)]; };
    mono.resize(monomials_.size());
    if (dmono) dmono->assign(monomials_.size() * static_cast<std::size_t>(n_), 0.0);
    for (std::size_t m = 0; m < monomials_.size(); ++m) {
      const auto& e = monomials_[m];
      double v = 1.0;
      for (int i = 0; i < n_; ++i)
        if (e[static_cast<std::size_t>(i)]) v *= p(i, e[static_cast<std::size_t>(i)]);
      mono[m] = v;
      if (!dmono) continue;
      for (int l = 0; l < n_; ++l) {
        const int el = e[static_cast<std::size_t>(l)];
        if (el == 0) continue;
        double d = el * p(l, el - 1);
        for (int i = 0; i < n_; ++i)
          if (i != l && e[static_cast<std::size_t>(i)]) d *= p(i, e[static_cast<std::size_t>(i)]);
        (*dmono)[m * static_cast<std::size_t>(n_) + static_cast<std::size_t>(l)] = d;
      }
    }
  }

  struct Term
  {
    int field;
    int comp;
    int mono;
    double coef;
  };
  int n_, r_;
  int max_deg_ = 0;
  std::vector<Exponents> monomials_;
  std::vector<Term> terms_;
};

class SegmentModel
{
public:
  explicit SegmentModel(const HorizontalFrame& frame, int substeps = 2)
      : frame_(&frame), compiled_(frame), substeps_(substeps)
  {
  }

  int dim() const { return frame_->dim(); }
  int rank() const { return frame_->rank(); }

  Vec step(const Vec& x, const Vec& u, double dt) const
  {
    switch (frame_->kind()) {
      case FrameKind::Euclidean: return x + dt * u;
      case FrameKind::Heisenberg: {
        Vec y = x;
        const double a = dt * u[0], b = dt * u[1];
        y[0] += a;
        y[1] += b;
        y[2] += 0.5 * (x[0] * b - x[1] * a);
        return y;
      }
      case FrameKind::Carnot: return segment_map(*frame_, x, u, dt);
      case FrameKind::Generic: break;
    }
    const int n = dim();
    Vec y = x;
    Vec k1(n), k2(n), k3(n), k4(n), tmp(n);
    const double h = dt / substeps_;
    for (int s = 0; s < substeps_; ++s) {
      compiled_.velocity(y.data(), u.data(), k1.data());
      tmp = y + 0.5 * h * k1;
      compiled_.velocity(tmp.data(), u.data(), k2.data());
      tmp = y + 0.5 * h * k2;
      compiled_.velocity(tmp.data(), u.data(), k3.data());
      tmp = y + h * k3;
      compiled_.velocity(tmp.data(), u.data(), k4.data());
      y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return y;
  }

  /// Fills ∂S/∂x (n×n) and ∂S/∂u (n×r); returns S(x, u).
  Vec jacobians(const Vec& x, const Vec& u, double dt, Mat& jx, Mat& ju) const
  {
    const int n = dim(), r = rank();
    if (frame_->kind() == FrameKind::Euclidean) {
      jx = Mat::Identity(n, n);
      ju = dt * Mat::Identity(n, r);
      return x + dt * u;
    }
    if (frame_->kind() == FrameKind::Heisenberg) {
      const double a = dt * u[0], b = dt * u[1];
      jx = Mat::Identity(3, 3);
      jx(2, 0) = 0.5 * b;
      jx(2, 1) = -0.5 * a;
      ju = Mat::Zero(3, 2);
      ju(0, 0) = dt;
      ju(1, 1) = dt;
      ju(2, 0) = -0.5 * x[1] * dt;
      ju(2, 1) = 0.5 * x[0] * dt;
      return step(x, u, dt);
    }
    if (frame_->kind() == FrameKind::Generic) return rk4_tangent(x, u, dt, jx, ju);
    jx.resize(n, n);
    ju.resize(n, r);
    const double h = 1e-6;
    Vec xp = x, up = u;
    for (int i = 0; i < n; ++i) {
      const double hi = h * std::max(1.0, std::abs(x[i]));
      xp[i] = x[i] + hi;
      const Vec fp = step(xp, u, dt);
      xp[i] = x[i] - hi;
      const Vec fm = step(xp, u, dt);
      xp[i] = x[i];
      jx.col(i) = (fp - fm) / (2 * hi);
    }
    for (int j = 0; j < r; ++j) {
      const double hj = h * std::max(1.0, std::abs(u[j]));
      up[j] = u[j] + hj;
      const Vec fp = step(x, up, dt);
      up[j] = u[j] - hj;
      const Vec fm = step(x, up, dt);
      up[j] = u[j];
      ju.col(j) = (fp - fm) / (2 * hj);
    }
    return step(x, u, dt);
  }

private:
  /// Exact derivative of the RK4 step with respect to (x, u).
  Vec rk4_tangent(const Vec& x, const Vec& u, double dt, Mat& jx, Mat& ju) const
  {
    const int n = dim(), r = rank();
    Vec y = x;
    Mat t = Mat::Zero(n, n + r);  // d y / d(x, u)
    t.leftCols(n).setIdentity();
    Vec k[4] = {Vec(n), Vec(n), Vec(n), Vec(n)};
    Mat dk[4];
    Mat fx, fu;
    Vec ys(n);
    Mat ts(n, n + r);
    const double h = dt / substeps_;
    const double c[4] = {0.0, 0.5, 0.5, 1.0};
    for (int s = 0; s < substeps_; ++s) {
      for (int q = 0; q < 4; ++q) {
        if (q == 0) {
          ys = y;
          ts = t;
        } else {
          ys = y + c[q] * h * k[q - 1];
          ts = t + c[q] * h * dk[q - 1];
        }
        compiled_.velocity_jacobian(ys.data(), u.data(), k[q].data(), fx, fu);
        dk[q] = fx * ts;
        dk[q].rightCols(r) += fu;
      }
      y += (h / 6.0) * (k[0] + 2.0 * k[1] + 2.0 * k[2] + k[3]);
      t += (h / 6.0) * (dk[0] + 2.0 * dk[1] + 2.0 * dk[2] + dk[3]);
    }
    jx = t.leftCols(n);
    ju = t.rightCols(r);
    return y;
  }

  const HorizontalFrame* frame_;
  CompiledFrame compiled_;
  int substeps_;
};

}  // namespace sublab
