#pragma once

/// @file
/// Shared aliases, the exception hierarchy, seeded random streams and
/// low-discrepancy point sets used across the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/erf.hpp>
#include <boost/random/sobol.hpp>

namespace sublab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Point = Eigen::VectorXd;

inline constexpr const char* kVersion = "0.3.0";

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent sizes or malformed input data.
class StructuralError : public Error
{
public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation (e.g. λ ≤ 0).
class DomainError : public Error
{
public:
  using Error::Error;
};

class UnsupportedStepError : public Error
{
public:
  using Error::Error;
};

/// Input file could not be read or written.
class IoError : public Error
{
public:
  using Error::Error;
};

/// Invalid run configuration; carries the offending field name.
class ConfigError : public Error
{
public:
  ConfigError(std::string field, const std::string& what)
      : Error("invalid config field '" + field + "': " + what), field_(std::move(field))
  {}
  const std::string& field() const { return field_; }

private:
  std::string field_;
};

// ---------------------------------------------------------------------------
// Random streams

/// Deterministic per-task stream: the same (seed, stream) pair always gives
/// the same sequence regardless of worker count or scheduling.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0)
{
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x5eedu};
  return std::mt19937_64(seq);
}

inline double uniform01(std::mt19937_64& rng)
{
  // 53 random bits; avoids implementation-defined distribution objects so
  // that streams are reproducible across standard libraries.
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi)
{
  return lo + (hi - lo) * uniform01(rng);
}

inline double gaussian(std::mt19937_64& rng)
{
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline Vec gaussian_vec(std::mt19937_64& rng, Eigen::Index n)
{
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = gaussian(rng);
  return v;
}

// ---------------------------------------------------------------------------
// Low-discrepancy sets

/// First `count` points of the Sobol sequence in [0,1)^dim (offset by one to
/// skip the origin).
inline std::vector<Vec> sobol_points(int dim, int count)
{
  std::vector<Vec> out;
  if (count <= 0) return out;
  out.reserve(static_cast<std::size_t>(count));
  boost::random::sobol gen(static_cast<std::size_t>(dim));
  const double scale = 1.0 / (static_cast<double>(gen.max()) + 1.0);
  gen.discard(static_cast<std::uintmax_t>(dim));
  for (int k = 0; k < count; ++k) {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = static_cast<double>(gen()) * scale;
    out.push_back(std::move(v));
  }
  return out;
}

/// Low-discrepancy directions on the unit sphere S^{dim-1}. The circle uses
/// equally spaced angles starting at 0, so counts divisible by 4 contain the
/// coordinate axes.
inline std::vector<Vec> sphere_directions(int dim, int count)
{
  std::vector<Vec> out;
  if (count <= 0 || dim <= 0) return out;
  if (dim == 1) {
    for (int k = 0; k < count; ++k) out.push_back(Vec::Constant(1, k % 2 == 0 ? 1.0 : -1.0));
    return out;
  }
  if (dim == 2) {
    for (int k = 0; k < count; ++k) {
      const double a = 2.0 * std::numbers::pi * k / count;
      Vec v(2);
      v << std::cos(a), std::sin(a);
      out.push_back(v);
    }
    return out;
  }
  for (const Vec& u : sobol_points(dim, count)) {
    Vec g(dim);
    for (int i = 0; i < dim; ++i) {
      const double p = std::clamp(u[i], 1e-12, 1.0 - 1e-12);
      g[i] = std::sqrt(2.0) * boost::math::erf_inv(2.0 * p - 1.0);
    }
    const double nrm = g.norm();
    out.push_back(nrm > 0 ? Vec(g / nrm) : Vec(Vec::Unit(dim, 0)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parallel map

/// Evaluates fn(i) for i in [0, count) on up to `workers` threads and returns
/// results in index order. fn must not share mutable state across indices.
template <typename Fn>
auto parallel_map(std::size_t count, int workers, Fn&& fn)
{
  using R = std::decay_t<decltype(fn(std::size_t{0}))>;
  std::vector<R> results(count);
  const auto nthreads = static_cast<std::size_t>(std::max(1, workers));
  if (nthreads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) results[i] = fn(i);
    return results;
  }
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (std::size_t t = 0; t < nthreads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < count; i += nthreads) results[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return results;
}

/// Axis-aligned box in chart coordinates.
struct Box
{
  Vec lo;
  Vec hi;

  int dim() const { return static_cast<int>(lo.size()); }
  double volume() const { return (hi - lo).prod(); }
  bool contains(const Vec& p) const
  {
    return ((p - lo).array() >= 0.0).all() && ((hi - p).array() >= 0.0).all();
  }
  Vec sample(std::mt19937_64& rng) const
  {
    Vec p(lo.size());
    for (Eigen::Index i = 0; i < lo.size(); ++i) p[i] = uniform(rng, lo[i], hi[i]);
    return p;
  }
};

}  // namespace sublab
