#pragma once

/// @file
/// Map definition files. Either polynomial components,
///
/// ```json
/// { "name": "shear", "frame": "heisenberg1",
///   "components": [ [[[1,0,0], 1]],
///                   [[[0,1,0], 1], [[1,0,0], 2]],
///                   [[[0,0,1], 1], [[2,0,0], 1]] ] }
/// ```
///
/// with each component a list of [exponents, coefficient] terms, or the
/// radial pattern on heisenberg1,
///
/// ```json
/// { "name": "triple", "radial": { "r_scale": 0.5, "angle_multiplier": 3, "t_scale": 0.75 } }
/// ```

#include "sublab/io/parse.hpp"
#include "sublab/maps/catalog.hpp"
#include "sublab/sr/frame_io.hpp"

namespace sublab {

inline MapDescriptor map_from_json(const io::json& doc)
{
  io::check_keys(doc, {"name", "frame", "target", "components", "radial", "probe_box"}, "map");
  const std::string name = doc.value("name", std::string("map"));
  MapDescriptor d;
  if (doc.contains("radial")) {
    if (doc.contains("components")) throw StructuralError("map: give either 'components' or 'radial', not both");
    if (doc.contains("frame") && doc.at("frame") != "heisenberg1") throw StructuralError("map: radial maps are defined on heisenberg1");
    const auto& r = doc.at("radial");
    io::check_keys(r, {"r_scale", "angle_multiplier", "t_scale"}, "map.radial");
    for (const char* k : {"r_scale", "angle_multiplier", "t_scale"})
      if (!r.contains(k)) throw StructuralError(std::string("map.radial: '") + k + "' is required");
    if (!r.at("angle_multiplier").is_number_integer()) throw StructuralError("map.radial: angle_multiplier must be an integer");
    d = maps::radial(io::parse_scalar(r.at("r_scale")), r.at("angle_multiplier").get<int>(), io::parse_scalar(r.at("t_scale")), name);
  } else {
    if (!doc.contains("components")) throw StructuralError("map: 'components' or 'radial' is required");
    if (!doc.contains("frame")) throw StructuralError("map: 'frame' is required");
    auto dom = std::make_shared<const HorizontalFrame>(resolve_frame(doc.at("frame").get<std::string>()));
    auto tgt = doc.contains("target") ? std::make_shared<const HorizontalFrame>(resolve_frame(doc.at("target").get<std::string>())) : dom;
    const int n = dom->dim();
    const auto& comps = doc.at("components");
    if (!comps.is_array() || static_cast<int>(comps.size()) != tgt->dim())
      throw StructuralError("map: need one component per target coordinate");
    std::vector<Polynomial> poly;
    for (const auto& c : comps) {
      Polynomial p(n);
      for (const auto& t : c) {
        if (!t.is_array() || t.size() != 2) throw StructuralError("map: terms are [exponents, coefficient]");
        const auto e = t[0].get<Exponents>();
        if (static_cast<int>(e.size()) != n) throw StructuralError("map: exponent vector length must equal the domain dimension");
        for (int k : e)
          if (k < 0) throw StructuralError("map: negative exponent");
        p.add_term(e, io::parse_scalar(t[1]));
      }
      poly.push_back(std::move(p));
    }
    std::vector<std::vector<Polynomial>> grad(poly.size());
    for (std::size_t i = 0; i < poly.size(); ++i)
      for (int j = 0; j < n; ++j) grad[i].push_back(poly[i].derivative(j));
    d.name = name;
    d.model = {name, dom, tgt,
               [poly](const Vec& x) {
                 Vec y(static_cast<Eigen::Index>(poly.size()));
                 for (std::size_t i = 0; i < poly.size(); ++i) y[static_cast<Eigen::Index>(i)] = poly[i](x);
                 return y;
               },
               [grad](const Vec& x) {
                 Mat j(static_cast<Eigen::Index>(grad.size()), x.size());
                 for (std::size_t i = 0; i < grad.size(); ++i)
                   for (Eigen::Index k = 0; k < x.size(); ++k) j(static_cast<Eigen::Index>(i), k) = grad[i][static_cast<std::size_t>(k)](x);
                 return j;
               }};
    d.probe_box = detail::default_probe_box(*dom);
  }
  if (doc.contains("probe_box")) {
    const auto& b = doc.at("probe_box");
    io::check_keys(b, {"lo", "hi"}, "map.probe_box");
    const auto lo = b.at("lo").get<std::vector<double>>(), hi = b.at("hi").get<std::vector<double>>();
    if (static_cast<int>(lo.size()) != d.model.domain->dim() || hi.size() != lo.size())
      throw StructuralError("map.probe_box: corners must match the domain dimension");
    d.probe_box = {Eigen::Map<const Vec>(lo.data(), static_cast<Eigen::Index>(lo.size())),
                   Eigen::Map<const Vec>(hi.data(), static_cast<Eigen::Index>(hi.size()))};
  }
  return d;
}

inline MapDescriptor load_map(const std::string& path) { return map_from_json(io::read_json_file(path)); }

/// Built-in map spec (see builtin_map) or, when the spec names a file, a map file.
inline MapDescriptor resolve_map(const std::string& spec, const HorizontalFrame& frame)
{
  const std::string head = detail::head_of(spec);
  for (const auto& b : builtin_map_names())
    if (detail::head_of(b) == head) return builtin_map(spec, frame);
  if (!std::ifstream(spec)) throw ConfigError("map", "'" + spec + "' is neither a built-in map nor a readable file");
  return load_map(spec);
}

}  // namespace sublab
