#pragma once

/// @file
/// Small helpers shared by the definition-file loaders.

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "sublab/common.hpp"

namespace sublab::io {

using json = nlohmann::json;

/// Accepts a JSON number or a rational string "p/q" (also plain "p").
inline double parse_scalar(const json& v)
{
  if (v.is_number()) return v.get<double>();
  if (!v.is_string()) throw StructuralError("expected number or rational string, got " + v.dump());
  const auto s = v.get<std::string>();
  const auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return std::stod(s);
    const double num = std::stod(s.substr(0, slash));
    const double den = std::stod(s.substr(slash + 1));
    if (den == 0.0) throw StructuralError("zero denominator in '" + s + "'");
    return num / den;
  } catch (const std::invalid_argument&) {
    throw StructuralError("cannot parse scalar '" + s + "'");
  }
}

inline json read_json_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw StructuralError("malformed JSON in '" + path + "': " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path + "'");
}

/// Rejects keys outside `allowed`.
inline void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& context)
{
  if (!obj.is_object()) throw StructuralError(context + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw StructuralError(context + ": unknown key '" + key + "'");
  }
}

}  // namespace sublab::io
