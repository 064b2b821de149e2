#pragma once

/// @file
/// JSON and CSV forms of every analysis result. Ladders are always written in
/// full next to the summary scalars.

#include <iomanip>
#include <sstream>

#include "sublab/carnot/algebra.hpp"
#include "sublab/metric/distance.hpp"
#include "sublab/metric/volume.hpp"
#include "sublab/modulus/ko.hpp"
#include "sublab/modulus/modulus_io.hpp"
#include "sublab/qr/analysis.hpp"
#include "sublab/qr/pansu.hpp"
#include "sublab/sr/frame.hpp"

namespace sublab::io {

inline json mat_json(const Mat& m)
{
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vec_json(m.row(i).transpose()));
  return rows;
}

/// nlohmann writes non-finite doubles as null; keep them readable instead.
inline json num(double v)
{
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline json nums(const std::vector<double>& v)
{
  json a = json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

inline json to_json(const ValidationReport& r)
{
  json v = json::array();
  for (const auto& x : r.violations)
    v.push_back({{"axiom", to_string(x.axiom)}, {"indices", x.indices}, {"magnitude", num(x.magnitude)}, {"detail", x.detail}});
  return {{"valid", r.valid()}, {"violations", v}};
}

inline json to_json(const GrowthData& g)
{
  return {{"point", vec_json(g.point)}, {"ranks", g.ranks}, {"growth", g.growth}, {"weights", g.weights}, {"step", g.step}, {"Q", g.Q}};
}

inline json to_json(const DistanceResult& r)
{
  return {{"value", num(r.value)},   {"endpoint_error", num(r.endpoint_error)}, {"restarts_used", r.restarts_used},
          {"converged", r.converged}, {"method", r.method},                      {"controls", mat_json(r.controls)}};
}

inline json to_json(const BallBoxReport& r)
{
  return {{"radii", nums(r.radii)},
          {"volumes", nums(r.volumes)},
          {"std_errors", nums(r.std_errors)},
          {"fitted_slope", num(r.fitted_slope)},
          {"slope_std_error", num(r.slope_std_error)},
          {"Q_expected", r.Q_expected},
          {"box_constants", nums(r.box_constants)}};
}

inline json to_json(const TailStats& t)
{
  return {{"max", num(t.max)}, {"min", num(t.min)}, {"monotone", t.monotone}, {"richardson", num(t.richardson)}};
}

inline json to_json(const DilatationProfile& p)
{
  json steps = json::array();
  for (const auto& s : p.steps)
    steps.push_back({{"r", s.r},
                     {"L", num(s.L)},
                     {"L_sphere", num(s.L_sphere)},
                     {"l", num(s.l)},
                     {"H", num(s.H)},
                     {"H_sphere", num(s.H_sphere)},
                     {"degenerate", s.degenerate},
                     {"sphere_points", s.sphere_points}});
  return {{"center", vec_json(p.center)}, {"H", num(p.H)},
          {"H_sphere", num(p.H_sphere)},  {"H_tail", to_json(p.H_tail)},
          {"H_sphere_tail", to_json(p.H_sphere_tail)}, {"degenerate", p.degenerate},
          {"steps", steps}};
}

inline json to_json(const LipProfile& p)
{
  return {{"center", vec_json(p.center)}, {"radii", nums(p.radii)}, {"ratios", nums(p.ratios)},
          {"Lip", num(p.Lip)},            {"lip", num(p.lip)},      {"tail", to_json(p.tail)}};
}

inline json to_json(const GradedMorphism& a)
{
  const auto n = morphism_norms(a);
  return {{"matrix", mat_json(a.matrix())}, {"norm", num(n.max)}, {"norm_s", num(n.min)}, {"jacobian", num(morphism_jacobian(a))}};
}

inline json to_json(const PansuFit& f)
{
  json blocks = json::array();
  for (const auto& b : f.blocks) blocks.push_back(mat_json(b));
  return {{"morphism", to_json(f.morphism)}, {"eps", nums(f.eps)}, {"residuals", nums(f.residuals)},
          {"raw_residuals", nums(f.raw_residuals)}, {"blocks", blocks}};
}

inline json to_json(const JacobianEstimate& e)
{
  json steps = json::array();
  for (const auto& s : e.steps)
    steps.push_back({{"r", s.r},
                     {"image_volume", num(s.image_volume)},
                     {"ball_volume", num(s.ball_volume)},
                     {"ratio", num(s.ratio)},
                     {"std_error", num(s.std_error)},
                     {"hits", s.hits},
                     {"failures", s.failures}});
  return {{"center", vec_json(e.center)}, {"J", num(e.J)}, {"error", num(e.error)}, {"unreliable", e.unreliable}, {"steps", steps}};
}

inline json to_json(const MultiplicityResult& m)
{
  json roots = json::array();
  for (const auto& r : m.roots) roots.push_back(vec_json(r));
  return {{"count", m.count}, {"roots", roots}, {"starts", m.starts}, {"diverged_cells", m.diverged_cells}};
}

inline json to_json(const AreaCheck& a)
{
  return {{"lhs", num(a.lhs)},
          {"rhs", num(a.rhs)},
          {"gap", num(a.gap)},
          {"lhs_error", num(a.lhs_error)},
          {"rhs_error", num(a.rhs_error)},
          {"cell_jacobians", nums(a.cell_jacobians)},
          {"incomplete", a.incomplete},
          {"unreliable", a.unreliable}};
}

inline json to_json(const InjectivityScan& s)
{
  json flagged = json::array();
  for (const auto& c : s.flagged)
    flagged.push_back({{"point", vec_json(c.point)},
                       {"multiplicity", c.multiplicity},
                       {"l_ratio_start", num(c.l_ratio_start)},
                       {"l_ratio_end", num(c.l_ratio_end)},
                       {"degenerate", c.degenerate}});
  return {{"region", {{"lo", vec_json(s.region.lo)}, {"hi", vec_json(s.region.hi)}}},
          {"grid", s.grid},
          {"ball_radius", s.ball_radius},
          {"scanned", s.scanned},
          {"flagged", flagged}};
}

inline json to_json(const KoReport& r)
{
  return {{"Q", r.Q},
          {"modulus", num(r.modulus)},
          {"weighted", num(r.weighted)},
          {"implied_K", num(r.implied_K)},
          {"min_image_integral", num(r.min_image_integral)},
          {"mean_multiplicity", num(r.mean_multiplicity)},
          {"domain", modulus_to_json(r.domain)}};
}

/// A small CSV table; numbers use round-trip precision.
struct CsvTable
{
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::string str() const
  {
    std::ostringstream out;
    out << std::setprecision(17);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
      out << '\n';
    }
    return out.str();
  }
};

inline CsvTable to_csv(const BallBoxReport& r)
{
  CsvTable t{{"r", "volume", "std_error"}, {}};
  for (std::size_t i = 0; i < r.radii.size(); ++i) t.rows.push_back({r.radii[i], r.volumes[i], r.std_errors[i]});
  return t;
}

inline CsvTable to_csv(const DilatationProfile& p)
{
  CsvTable t{{"r", "L", "L_sphere", "l", "H", "H_sphere", "degenerate"}, {}};
  for (const auto& s : p.steps) t.rows.push_back({s.r, s.L, s.L_sphere, s.l, s.H, s.H_sphere, s.degenerate ? 1.0 : 0.0});
  return t;
}

inline CsvTable to_csv(const PansuFit& f)
{
  CsvTable t{{"eps", "residual"}, {}};
  for (std::size_t i = 0; i < f.eps.size(); ++i) t.rows.push_back({f.eps[i], f.residuals[i]});
  return t;
}

inline CsvTable to_csv(const JacobianEstimate& e)
{
  CsvTable t{{"r", "image_volume", "ball_volume", "ratio", "std_error", "hits", "failures"}, {}};
  for (const auto& s : e.steps)
    t.rows.push_back({s.r, s.image_volume, s.ball_volume, s.ratio, s.std_error, static_cast<double>(s.hits), static_cast<double>(s.failures)});
  return t;
}

inline CsvTable to_csv(const InjectivityScan& s)
{
  CsvTable t{{}, {}};
  for (int i = 0; i < s.region.dim(); ++i) t.header.push_back("x" + std::to_string(i + 1));
  t.header.insert(t.header.end(), {"multiplicity", "l_ratio_start", "l_ratio_end"});
  for (const auto& c : s.flagged) {
    std::vector<double> row(c.point.data(), c.point.data() + c.point.size());
    row.insert(row.end(), {static_cast<double>(c.multiplicity), c.l_ratio_start, c.l_ratio_end});
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace sublab::io
