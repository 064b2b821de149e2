#pragma once

/// @file
/// Curve families from CSV, modulus results to JSON, ρ heatmaps to SVG.
///
/// CSV layout: one vertex per row, `curve_id,x1,...,xn`. Rows sharing an id
/// form one polyline in file order; an optional header row is skipped.

#include <fstream>
#include <optional>

#include "sublab/io/parse.hpp"
#include "sublab/io/svg.hpp"
#include "sublab/modulus/modulus.hpp"

namespace sublab {

struct CurveCsvOptions
{
  std::optional<Box> bounds;  ///< default: bounding box of all vertices
  LengthMetric metric = LengthMetric::Euclidean;
  int horizontal_dims = 0;
  double length_floor = 1e-6;
};

inline CurveFamily parse_curves_csv(std::istream& in, const CurveCsvOptions& opt = {}, const std::string& source = "<csv>")
{
  std::vector<std::string> order;
  std::map<std::string, std::vector<Vec>> curves;
  std::string line;
  int dim = -1;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() < 2) throw StructuralError(source + ":" + std::to_string(lineno) + ": expected curve_id and coordinates");
    Vec v(static_cast<Eigen::Index>(cells.size() - 1));
    try {
      for (std::size_t k = 1; k < cells.size(); ++k) v[static_cast<Eigen::Index>(k - 1)] = std::stod(cells[k]);
    } catch (const std::invalid_argument&) {
      if (lineno == 1) continue;  // header
      throw StructuralError(source + ":" + std::to_string(lineno) + ": non-numeric coordinate");
    }
    if (dim < 0) dim = static_cast<int>(v.size());
    if (v.size() != dim) throw StructuralError(source + ":" + std::to_string(lineno) + ": inconsistent coordinate count");
    if (!curves.count(cells[0])) order.push_back(cells[0]);
    curves[cells[0]].push_back(v);
  }
  if (dim < 0) throw StructuralError(source + ": no curve vertices");

  Box bounds;
  if (opt.bounds) {
    bounds = *opt.bounds;
  } else {
    bounds = {Vec::Constant(dim, std::numeric_limits<double>::infinity()), Vec::Constant(dim, -std::numeric_limits<double>::infinity())};
    for (const auto& [_, vs] : curves)
      for (const auto& v : vs) {
        bounds.lo = bounds.lo.cwiseMin(v);
        bounds.hi = bounds.hi.cwiseMax(v);
      }
    for (int i = 0; i < dim; ++i)
      if (bounds.hi[i] - bounds.lo[i] < 1e-9) {
        bounds.lo[i] -= 0.5;
        bounds.hi[i] += 0.5;
      }
  }
  CurveFamily fam(bounds, opt.metric, opt.horizontal_dims, opt.length_floor);
  for (const auto& id : order) {
    if (curves[id].size() < 2) throw StructuralError(source + ": curve '" + id + "' has a single vertex");
    fam.add(curves[id]);
  }
  return fam;
}

inline CurveFamily load_curves_csv(const std::string& path, const CurveCsvOptions& opt = {})
{
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return parse_curves_csv(in, opt, path);
}

inline io::json vec_json(const Vec& v)
{
  io::json a = io::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline io::json grid_to_json(const DensityGrid& g)
{
  return {{"cells", g.cells()}, {"lo", vec_json(g.bounds().lo)}, {"hi", vec_json(g.bounds().hi)}, {"values", vec_json(g.values())}};
}

inline io::json modulus_to_json(const ModulusResult& r)
{
  return {{"value", r.value},
          {"p", r.p},
          {"worst_violation", r.worst_violation},
          {"raw_violation", r.raw_violation},
          {"rescale_factor", r.rescale_factor},
          {"iterations", r.iterations},
          {"outer_iterations", r.outer_iterations},
          {"curves", r.curves},
          {"dropped", r.dropped},
          {"rho", grid_to_json(r.rho)}};
}

/// ρ averaged over all axes beyond the first two, as a heatmap.
inline std::string rho_heatmap(const DensityGrid& g, const std::string& title = "density")
{
  const auto& c = g.cells();
  const int nx = c[0], ny = g.dim() > 1 ? c[1] : 1;
  Eigen::Index rest = 1;
  for (std::size_t i = 2; i < c.size(); ++i) rest *= c[i];
  Mat m = Mat::Zero(ny, nx);
  for (Eigen::Index idx = 0; idx < g.size(); ++idx) {
    const Eigen::Index plane = idx / rest;
    m(plane % ny, plane / ny) += g.values()[idx] / static_cast<double>(rest);
  }
  return io::svg_heatmap(m, title);
}

}  // namespace sublab
