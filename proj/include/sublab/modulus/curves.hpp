#pragma once

/// @file
/// Polyline curve families, piecewise-constant densities on uniform grids,
/// and exact line integrals of such densities along polylines.

#include <map>

#include <Eigen/SparseCore>

#include "sublab/common.hpp"

namespace sublab {

/// How arc length is measured along a polyline in chart coordinates.
enum class LengthMetric
{
  Euclidean,
  /// Length of the projection to the first `horizontal_dims` coordinates;
  /// exact for horizontal curves of a Carnot chart (e.g. radial segments in h_1).
  Horizontal,
};

class CurveFamily
{
public:
  explicit CurveFamily(Box bounds, LengthMetric metric = LengthMetric::Euclidean, int horizontal_dims = 0,
                       double length_floor = 1e-6)
      : bounds_(std::move(bounds)), metric_(metric), horizontal_dims_(horizontal_dims), floor_(length_floor)
  {
    if (metric_ == LengthMetric::Horizontal && (horizontal_dims_ < 1 || horizontal_dims_ > bounds_.dim()))
      throw ConfigError("horizontal_dims", "must lie in [1, dim]");
  }

  /// Adds a curve; returns false (and counts it as dropped) below the length floor.
  bool add(std::vector<Vec> vertices)
  {
    if (vertices.size() < 2) throw StructuralError("a curve needs at least two vertices");
    for (const auto& v : vertices) {
      if (v.size() != bounds_.dim()) throw StructuralError("curve vertex dimension does not match the chart");
      if (((v - bounds_.lo).array() < -1e-12).any() || ((bounds_.hi - v).array() < -1e-12).any())
        throw StructuralError("curve vertex outside chart bounds");
    }
    double len = 0.0;
    for (std::size_t k = 1; k < vertices.size(); ++k) len += segment_length(vertices[k - 1], vertices[k]);
    if (len < floor_) {
      ++dropped_;
      return false;
    }
    curves_.push_back(std::move(vertices));
    lengths_.push_back(len);
    return true;
  }

  double segment_length(const Vec& a, const Vec& b) const
  {
    if (metric_ == LengthMetric::Horizontal) return (b - a).head(horizontal_dims_).norm();
    return (b - a).norm();
  }

  int dim() const { return bounds_.dim(); }
  std::size_t size() const { return curves_.size(); }
  bool empty() const { return curves_.empty(); }
  const Box& bounds() const { return bounds_; }
  LengthMetric metric() const { return metric_; }
  int horizontal_dims() const { return horizontal_dims_; }
  double length_floor() const { return floor_; }
  std::size_t dropped() const { return dropped_; }
  const std::vector<std::vector<Vec>>& curves() const { return curves_; }
  const std::vector<double>& lengths() const { return lengths_; }

private:
  Box bounds_;
  LengthMetric metric_;
  int horizontal_dims_;
  double floor_;
  std::size_t dropped_ = 0;
  std::vector<std::vector<Vec>> curves_;
  std::vector<double> lengths_;
};

/// Piecewise-constant ρ ≥ 0 on a uniform grid; cell index is row-major with
/// the last axis fastest.
class DensityGrid
{
public:
  DensityGrid() = default;
  DensityGrid(Box bounds, std::vector<int> cells) : bounds_(std::move(bounds)), cells_(std::move(cells))
  {
    if (static_cast<int>(cells_.size()) != bounds_.dim()) throw ConfigError("grid", "one cell count per axis");
    std::size_t total = 1;
    for (int c : cells_) {
      if (c < 1) throw ConfigError("grid", "cell counts must be positive");
      total *= static_cast<std::size_t>(c);
    }
    if (!((bounds_.hi - bounds_.lo).array() > 0.0).all()) throw ConfigError("grid", "bounds must have positive extent");
    values_ = Vec::Zero(static_cast<Eigen::Index>(total));
  }

  int dim() const { return bounds_.dim(); }
  const Box& bounds() const { return bounds_; }
  const std::vector<int>& cells() const { return cells_; }
  Eigen::Index size() const { return values_.size(); }
  double cell_width(int axis) const
  {
    return (bounds_.hi[axis] - bounds_.lo[axis]) / cells_[static_cast<std::size_t>(axis)];
  }
  double cell_volume() const
  {
    double v = 1.0;
    for (int i = 0; i < dim(); ++i) v *= cell_width(i);
    return v;
  }

  Vec& values() { return values_; }
  const Vec& values() const { return values_; }

  /// Cell containing p (clamped to the grid).
  Eigen::Index cell_of(const Vec& p) const
  {
    Eigen::Index idx = 0;
    for (int i = 0; i < dim(); ++i) {
      const int c = cells_[static_cast<std::size_t>(i)];
      const int k = std::clamp(static_cast<int>(std::floor((p[i] - bounds_.lo[i]) / cell_width(i))), 0, c - 1);
      idx = idx * c + k;
    }
    return idx;
  }

  Box cell_box(Eigen::Index idx) const
  {
    Vec lo(dim()), hi(dim());
    for (int i = dim() - 1; i >= 0; --i) {
      const int c = cells_[static_cast<std::size_t>(i)];
      const auto k = static_cast<int>(idx % c);
      idx /= c;
      lo[i] = bounds_.lo[i] + k * cell_width(i);
      hi[i] = lo[i] + cell_width(i);
    }
    return {lo, hi};
  }

  double value_at(const Vec& p) const { return values_[cell_of(p)]; }

private:
  Box bounds_;
  std::vector<int> cells_;
  Vec values_;
};

using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Length of each segment piece inside each grid cell, accumulated into
/// `out`. Pieces are split at every grid plane crossing, so the lengths are
/// exact for straight segments.
inline void segment_cell_lengths(const DensityGrid& grid, const Vec& a, const Vec& b, double seg_len,
                                 std::map<Eigen::Index, double>& out)
{
  if (seg_len <= 0.0) return;
  std::vector<double> ts{0.0, 1.0};
  for (int i = 0; i < grid.dim(); ++i) {
    const double d = b[i] - a[i];
    if (d == 0.0) continue;
    const double w = grid.cell_width(i);
    const double lo = std::min(a[i], b[i]), hi = std::max(a[i], b[i]);
    const auto k0 = static_cast<long>(std::ceil((lo - grid.bounds().lo[i]) / w));
    const auto k1 = static_cast<long>(std::floor((hi - grid.bounds().lo[i]) / w));
    for (long k = k0; k <= k1; ++k) {
      const double t = (grid.bounds().lo[i] + static_cast<double>(k) * w - a[i]) / d;
      if (t > 0.0 && t < 1.0) ts.push_back(t);
    }
  }
  std::sort(ts.begin(), ts.end());
  for (std::size_t k = 1; k < ts.size(); ++k) {
    const double dt = ts[k] - ts[k - 1];
    if (dt <= 0.0) continue;
    const Vec mid = a + 0.5 * (ts[k] + ts[k - 1]) * (b - a);
    out[grid.cell_of(mid)] += dt * seg_len;
  }
}

/// Row γ holds the lengths of γ inside each cell, so (Aρ)_γ = ∫_γ ρ ds.
inline SparseRows integration_matrix(const CurveFamily& family, const DensityGrid& grid)
{
  std::vector<Eigen::Triplet<double>> trips;
  for (std::size_t c = 0; c < family.size(); ++c) {
    const auto& vs = family.curves()[c];
    std::map<Eigen::Index, double> row;
    for (std::size_t k = 1; k < vs.size(); ++k)
      segment_cell_lengths(grid, vs[k - 1], vs[k], family.segment_length(vs[k - 1], vs[k]), row);
    for (const auto& [cell, len] : row) trips.emplace_back(static_cast<int>(c), static_cast<int>(cell), len);
  }
  SparseRows a(static_cast<Eigen::Index>(family.size()), grid.size());
  a.setFromTriplets(trips.begin(), trips.end());
  return a;
}

/// ∫_γ ρ ds for every curve.
inline Vec line_integrals(const CurveFamily& family, const DensityGrid& rho)
{
  return integration_matrix(family, rho) * rho.values();
}

}  // namespace sublab
