#pragma once

/// @file
/// Frame definition files.
///
/// ```json
/// { "name": "engel-type", "n": 4,
///   "fields": [
///     [[1, [0,0,0,0], 1]],
///     [[2, [0,0,0,0], 1], [3, [1,0,0,0], 1], [4, [2,0,0,0], 1]] ] }
/// ```
/// Each field is a list of terms (component, exponents, coefficient) with a
/// 1-based component index. An optional "algebra" (inline object or
/// built-in name) marks the fields as left-invariant on that group.

#include "sublab/carnot/algebra_io.hpp"
#include "sublab/sr/frame.hpp"

namespace sublab {

inline HorizontalFrame frame_from_json(const io::json& doc)
{
  io::check_keys(doc, {"name", "n", "fields", "algebra"}, "frame");
  if (!doc.contains("n")) throw StructuralError("frame: 'n' is required");
  const int n = doc.at("n").get<int>();
  if (n <= 0) throw StructuralError("frame: n must be positive");
  const std::string name = doc.value("name", std::string{});
  if (doc.contains("algebra")) {
    const auto& a = doc.at("algebra");
    const CarnotAlgebra g = a.is_string() ? resolve_algebra(a.get<std::string>()) : algebra_from_json(a);
    if (g.dim() != n) throw StructuralError("frame: algebra dimension does not match n");
    return HorizontalFrame::left_invariant(g, name);
  }
  if (!doc.contains("fields")) throw StructuralError("frame: 'fields' is required without 'algebra'");
  std::vector<PolyVectorField> fields;
  for (const auto& f : doc.at("fields")) {
    std::vector<Polynomial> comps(static_cast<std::size_t>(n), Polynomial(n));
    for (const auto& t : f) {
      if (!t.is_array() || t.size() != 3) throw StructuralError("frame: terms are [component, exponents, coefficient]");
      const int i = t[0].get<int>() - 1;
      if (i < 0 || i >= n) throw StructuralError("frame: component index out of range");
      const auto e = t[1].get<Exponents>();
      if (static_cast<int>(e.size()) != n) throw StructuralError("frame: exponent vector length must equal n");
      for (int k : e)
        if (k < 0) throw StructuralError("frame: negative exponent");
      comps[static_cast<std::size_t>(i)].add_term(e, io::parse_scalar(t[2]));
    }
    fields.emplace_back(std::move(comps));
  }
  if (fields.empty()) throw StructuralError("frame: no fields");
  return HorizontalFrame(std::move(fields), name);
}

inline HorizontalFrame load_frame(const std::string& path) { return frame_from_json(io::read_json_file(path)); }

inline io::json frame_to_json(const HorizontalFrame& frame)
{
  io::json fields = io::json::array();
  for (const auto& f : frame.fields()) {
    io::json terms = io::json::array();
    for (int i = 0; i < f.dim(); ++i)
      for (const auto& [e, c] : f[i].terms()) terms.push_back({i + 1, e, c});
    fields.push_back(terms);
  }
  return {{"name", frame.name()}, {"n", frame.dim()}, {"fields", fields}};
}

/// Built-in names: "heisenberg1", "engel", "abelian(n)", "heisenberg1-perturbed",
/// "engel-group"; anything else is read as a file path.
inline HorizontalFrame resolve_frame(const std::string& spec)
{
  if (spec == "heisenberg1") return frames::heisenberg();
  if (spec == "engel") return frames::engel();
  if (spec == "heisenberg1-perturbed") return frames::perturbed_heisenberg();
  if (spec == "engel-group") return frames::engel_group();
  if (spec.rfind("abelian(", 0) == 0 && spec.back() == ')') return frames::abelian(std::stoi(spec.substr(8, spec.size() - 9)));
  return load_frame(spec);
}

}  // namespace sublab
