#pragma once

/// @file
/// Algebra definition files.
///
/// ```json
/// { "name": "heisenberg1", "n": 3, "layers": [2, 1],
///   "brackets": [[1, 2, 3, "1"]] }
/// ```
/// Each bracket entry is (i, j, k, value) with 1-based indices meaning
/// [e_i, e_j] has coefficient `value` on e_k; value may be a number or a
/// rational string. Mirrored entries c_ji^k = -c_ij^k are filled in.

#include "sublab/carnot/algebra.hpp"
#include "sublab/io/parse.hpp"

namespace sublab {

inline CarnotAlgebra algebra_from_json(const io::json& doc)
{
  io::check_keys(doc, {"name", "n", "layers", "brackets"}, "algebra");
  if (!doc.contains("layers")) throw StructuralError("algebra: missing 'layers'");
  const auto layers = doc.at("layers").get<std::vector<int>>();
  const int n = std::accumulate(layers.begin(), layers.end(), 0);
  if (doc.contains("n") && doc.at("n").get<int>() != n)
    throw StructuralError("algebra: n = " + std::to_string(doc.at("n").get<int>()) + " but layers sum to " +
                          std::to_string(n));
  std::vector<StructureConstant> entries;
  if (doc.contains("brackets")) {
    for (const auto& b : doc.at("brackets")) {
      if (!b.is_array() || b.size() != 4) throw StructuralError("algebra: bracket entries are [i, j, k, value]");
      entries.push_back({b[0].get<int>() - 1, b[1].get<int>() - 1, b[2].get<int>() - 1, io::parse_scalar(b[3])});
    }
  }
  return CarnotAlgebra::from_brackets(layers, entries, doc.value("name", std::string{}));
}

inline CarnotAlgebra load_algebra(const std::string& path) { return algebra_from_json(io::read_json_file(path)); }

inline io::json algebra_to_json(const CarnotAlgebra& g)
{
  io::json brackets = io::json::array();
  for (const auto& s : g.nonzero_constants())
    if (s.i < s.j) brackets.push_back({s.i + 1, s.j + 1, s.k + 1, s.value});
  return {{"name", g.name()}, {"n", g.dim()}, {"layers", g.layers()}, {"brackets", brackets}};
}

/// Resolves a built-in algebra name ("heisenberg1", "engel", "abelian(n)",
/// "upper_triangular(m)") or falls back to a file path.
inline CarnotAlgebra resolve_algebra(const std::string& spec)
{
  auto arg = [&](const std::string& prefix) -> int {
    return std::stoi(spec.substr(prefix.size(), spec.size() - prefix.size() - 1));
  };
  if (spec == "heisenberg1") return algebras::heisenberg();
  if (spec == "engel") return algebras::engel();
  if (spec.rfind("abelian(", 0) == 0 && spec.back() == ')') return algebras::abelian(arg("abelian("));
  if (spec.rfind("upper_triangular(", 0) == 0 && spec.back() == ')')
    return algebras::upper_triangular(arg("upper_triangular("));
  return load_algebra(spec);
}

}  // namespace sublab
