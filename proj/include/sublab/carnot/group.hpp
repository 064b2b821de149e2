#pragma once

/// @file
/// Group law of a Carnot group in exponential coordinates of the first kind:
/// truncated Baker–Campbell–Hausdorff product, inverse, dilations and
/// homogeneous norms.

#include <array>
#include <span>

#include "sublab/carnot/algebra.hpp"

namespace sublab {

namespace detail {

/// K_{2p} = B_{2p} / (2p)! for p = 1..6.
inline constexpr std::array<double, 6> kBernoulliOverFactorial = {
    (1.0 / 6.0) / 2.0,
    (-1.0 / 30.0) / 24.0,
    (1.0 / 42.0) / 720.0,
    (-1.0 / 30.0) / 40320.0,
    (5.0 / 66.0) / 3628800.0,
    (-691.0 / 2730.0) / 479001600.0,
};

template <typename S>
std::vector<S> axpy(std::vector<S> y, double a, const std::vector<S>& x)
{
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += x[i] * a;
  return y;
}

}  // namespace detail

inline constexpr int kMaxBchStep = 12;

/// Homogeneous components Z_1..Z_s of log(exp x · exp y) via the recursion
///   (m+1) Z_{m+1} = ½[x−y, Z_m] + Σ_{p≥1, 2p≤m} K_{2p} Σ_{k_1+…+k_{2p}=m} ad_{Z_{k_1}}⋯ad_{Z_{k_{2p}}}(x+y).
/// Brackets of more than s elements vanish, so the sum of the components is exact.
template <typename S>
std::vector<S> bch_series(const CarnotAlgebra& g, const std::vector<S>& x, const std::vector<S>& y, const S& zero)
{
  const int s = g.step();
  if (s > kMaxBchStep)
    throw UnsupportedStepError("BCH series implemented up to step " + std::to_string(kMaxBchStep) + ", algebra has step " +
                               std::to_string(s));
  const auto n = static_cast<std::size_t>(g.dim());
  if (x.size() != n || y.size() != n) throw StructuralError("BCH arguments do not match algebra dimension");

  std::vector<S> sum = x;
  for (std::size_t i = 0; i < n; ++i) sum[i] += y[i];
  std::vector<S> diff = x;
  for (std::size_t i = 0; i < n; ++i) diff[i] -= y[i];

  const std::vector<S> zero_vec(n, zero);
  // z[m], m = 1..s ; t[j][m] = Σ over compositions of m into j parts.
  std::vector<std::vector<S>> z(static_cast<std::size_t>(s) + 1, zero_vec);
  std::vector<std::vector<std::vector<S>>> t(static_cast<std::size_t>(s) + 1,
                                             std::vector<std::vector<S>>(static_cast<std::size_t>(s) + 1, zero_vec));
  z[1] = sum;
  t[0][0] = sum;
  std::vector<S> result = z[1];
  for (int m = 1; m < s; ++m) {
    for (int j = 1; j <= m; ++j) {
      std::vector<S> acc = zero_vec;
      for (int k = 1; k <= m - j + 1; ++k) {
        const auto& inner = t[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(m - k)];
        acc = detail::axpy(std::move(acc), 1.0, g.bracket(z[static_cast<std::size_t>(k)], inner, zero));
      }
      t[static_cast<std::size_t>(j)][static_cast<std::size_t>(m)] = std::move(acc);
    }
    std::vector<S> next = g.bracket(diff, z[static_cast<std::size_t>(m)], zero);
    for (auto& v : next) v *= 0.5;
    for (int p = 1; 2 * p <= m; ++p)
      next = detail::axpy(std::move(next), detail::kBernoulliOverFactorial[static_cast<std::size_t>(p - 1)],
                          t[static_cast<std::size_t>(2 * p)][static_cast<std::size_t>(m)]);
    for (auto& v : next) v *= 1.0 / (m + 1);
    z[static_cast<std::size_t>(m + 1)] = next;
    result = detail::axpy(std::move(result), 1.0, next);
  }
  return result;
}

namespace detail {
inline std::vector<double> to_std(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }
inline Vec from_std(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }
}  // namespace detail

/// x * y by the generic truncated series.
inline Vec bch_product(const CarnotAlgebra& g, const Vec& x, const Vec& y)
{
  if (x.size() != g.dim() || y.size() != g.dim()) throw StructuralError("group element dimension mismatch");
  return detail::from_std(bch_series<double>(g, detail::to_std(x), detail::to_std(y), 0.0));
}

/// Closed forms for step ≤ 3:
///   x + y + ½[x,y] + (1/12)([x,[x,y]] + [y,[y,x]]).
/// Used as an independent route and as the fast path for flows.
inline Vec bch_product_closed(const CarnotAlgebra& g, const Vec& x, const Vec& y)
{
  if (g.step() > 3) throw UnsupportedStepError("closed-form BCH only for step <= 3");
  Vec out = x + y;
  if (g.step() == 1) return out;
  const Vec xy = g.bracket(x, y);
  out += 0.5 * xy;
  if (g.step() == 3) out += (g.bracket(x, xy) - g.bracket(y, xy)) / 12.0;
  return out;
}

/// Product that uses the closed form when available.
inline Vec group_product(const CarnotAlgebra& g, const Vec& x, const Vec& y)
{
  return g.step() <= 3 ? bch_product_closed(g, x, y) : bch_product(g, x, y);
}

inline Vec group_inverse(const CarnotAlgebra& /*g*/, const Vec& x) { return -x; }

/// δ_λ: coordinate i scaled by λ^{w_i}.
inline Vec dilate(const CarnotAlgebra& g, double lambda, const Vec& x)
{
  if (!(lambda > 0.0)) throw DomainError("dilation factor must be positive");
  Vec out = x;
  const auto& w = g.weights();
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] *= std::pow(lambda, w[static_cast<std::size_t>(i)]);
  return out;
}

/// Dilation by weights only (no algebra needed).
inline Vec dilate(std::span<const int> weights, double lambda, const Vec& x)
{
  if (!(lambda > 0.0)) throw DomainError("dilation factor must be positive");
  Vec out = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] *= std::pow(lambda, weights[static_cast<std::size_t>(i)]);
  return out;
}

// ---------------------------------------------------------------------------

enum class NormKind { MaxPower, SumPower };

/// Homogeneous quasi-norm on exponential coordinates.
struct HomogeneousNorm
{
  NormKind kind = NormKind::MaxPower;
  std::vector<int> weights;

  static HomogeneousNorm for_algebra(const CarnotAlgebra& g, NormKind kind = NormKind::MaxPower)
  {
    return {kind, g.weights()};
  }

  double operator()(const Vec& x) const
  {
    if (static_cast<std::size_t>(x.size()) != weights.size()) throw StructuralError("norm weights do not match element");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double v = std::pow(std::abs(x[i]), 1.0 / weights[static_cast<std::size_t>(i)]);
      acc = kind == NormKind::MaxPower ? std::max(acc, v) : acc + v;
    }
    return acc;
  }
};

inline double homogeneous_norm(const HomogeneousNorm& norm, const Vec& x) { return norm(x); }

}  // namespace sublab
