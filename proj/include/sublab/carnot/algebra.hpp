#pragma once

/// @file
/// Stratified nilpotent Lie algebras given by layer dimensions and a dense
/// structure-constant tensor, with the axiom checks that make them Carnot.

#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "sublab/common.hpp"

namespace sublab {

/// One nonzero structure constant: [e_i, e_j] has coefficient `value` on e_k.
struct StructureConstant
{
  int i;
  int j;
  int k;
  double value;
};

class CarnotAlgebra
{
public:
  CarnotAlgebra() = default;

  /// Dense tensor constructor; `constants` is indexed (i*n + j)*n + k.
  CarnotAlgebra(std::vector<int> layers, std::vector<double> constants, std::string name = {})
      : layers_(std::move(layers)), constants_(std::move(constants)), name_(std::move(name))
  {
    n_ = std::accumulate(layers_.begin(), layers_.end(), 0);
    if (layers_.empty() || n_ <= 0) throw StructuralError("algebra needs at least one nonempty layer");
    for (int d : layers_)
      if (d <= 0) throw StructuralError("layer dimensions must be positive");
    const auto nn = static_cast<std::size_t>(n_);
    if (constants_.size() != nn * nn * nn)
      throw StructuralError("structure tensor has " + std::to_string(constants_.size()) +
                            " entries, expected n^3 = " + std::to_string(nn * nn * nn));
    weights_.reserve(nn);
    for (std::size_t l = 0; l < layers_.size(); ++l)
      for (int d = 0; d < layers_[l]; ++d) weights_.push_back(static_cast<int>(l) + 1);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        for (int k = 0; k < n_; ++k)
          if (double c = constant(i, j, k); c != 0.0) sparse_.push_back({i, j, k, c});
  }

  /// Builds from sparse constants (0-based), filling c_ji^k = -c_ij^k when the
  /// mirrored entry is not given explicitly.
  static CarnotAlgebra from_brackets(std::vector<int> layers, const std::vector<StructureConstant>& entries,
                                     std::string name = {})
  {
    const int n = std::accumulate(layers.begin(), layers.end(), 0);
    if (n <= 0) throw StructuralError("algebra needs at least one nonempty layer");
    const auto nn = static_cast<std::size_t>(n);
    std::vector<double> c(nn * nn * nn, 0.0);
    std::vector<char> given(c.size(), 0);
    auto idx = [&](int i, int j, int k) { return (static_cast<std::size_t>(i) * nn + static_cast<std::size_t>(j)) * nn + static_cast<std::size_t>(k); };
    for (const auto& e : entries) {
      if (e.i < 0 || e.j < 0 || e.k < 0 || e.i >= n || e.j >= n || e.k >= n)
        throw StructuralError("structure constant index out of range");
      c[idx(e.i, e.j, e.k)] = e.value;
      given[idx(e.i, e.j, e.k)] = 1;
    }
    for (const auto& e : entries)
      if (!given[idx(e.j, e.i, e.k)]) c[idx(e.j, e.i, e.k)] = -e.value;
    return CarnotAlgebra(std::move(layers), std::move(c), std::move(name));
  }

  int dim() const { return n_; }
  int step() const { return static_cast<int>(layers_.size()); }
  int rank() const { return layers_.front(); }
  const std::vector<int>& layers() const { return layers_; }
  const std::vector<int>& weights() const { return weights_; }
  const std::string& name() const { return name_; }
  const std::vector<double>& tensor() const { return constants_; }
  const std::vector<StructureConstant>& nonzero_constants() const { return sparse_; }

  double constant(int i, int j, int k) const
  {
    const auto nn = static_cast<std::size_t>(n_);
    return constants_[(static_cast<std::size_t>(i) * nn + static_cast<std::size_t>(j)) * nn + static_cast<std::size_t>(k)];
  }

  /// First index of layer l (0-based layer index).
  int layer_offset(int l) const
  {
    return std::accumulate(layers_.begin(), layers_.begin() + l, 0);
  }

  /// Lie bracket of coordinate vectors.
  Vec bracket(const Vec& a, const Vec& b) const
  {
    Vec out = Vec::Zero(n_);
    for (const auto& s : sparse_) out[s.k] += s.value * a[s.i] * b[s.j];
    return out;
  }

  /// Bracket for any coefficient type with +, * (e.g. polynomials).
  template <typename S>
  std::vector<S> bracket(const std::vector<S>& a, const std::vector<S>& b, const S& zero) const
  {
    std::vector<S> out(static_cast<std::size_t>(n_), zero);
    for (const auto& s : sparse_)
      out[static_cast<std::size_t>(s.k)] += (a[static_cast<std::size_t>(s.i)] * b[static_cast<std::size_t>(s.j)]) * s.value;
    return out;
  }

private:
  int n_ = 0;
  std::vector<int> layers_;
  std::vector<double> constants_;
  std::vector<int> weights_;
  std::vector<StructureConstant> sparse_;
  std::string name_;
};

/// Q = Σ_k k·n_k.
inline int homogeneous_dimension(const CarnotAlgebra& g)
{
  int q = 0;
  for (std::size_t l = 0; l < g.layers().size(); ++l) q += static_cast<int>(l + 1) * g.layers()[l];
  return q;
}

// ---------------------------------------------------------------------------
// Validation

enum class Axiom { Antisymmetry, Jacobi, Grading, Generation };

inline const char* to_string(Axiom a)
{
  switch (a) {
    case Axiom::Antisymmetry: return "antisymmetry";
    case Axiom::Jacobi: return "jacobi";
    case Axiom::Grading: return "grading";
    case Axiom::Generation: return "generation";
  }
  return "?";
}

struct Violation
{
  Axiom axiom;
  std::vector<int> indices;  ///< 1-based, as they would appear in a definition file
  double magnitude = 0.0;
  std::string detail;
};

struct ValidationReport
{
  std::vector<Violation> violations;

  bool valid() const { return violations.empty(); }
  bool has(Axiom a) const
  {
    return std::any_of(violations.begin(), violations.end(), [a](const Violation& v) { return v.axiom == a; });
  }
};

/// Checks antisymmetry, Jacobi, grading and layer-1 generation. Tolerance
/// applies to float entries; exactly representable constants give exact zeros.
inline ValidationReport verify_structure(const CarnotAlgebra& g, double tol = 1e-12)
{
  ValidationReport rep;
  const int n = g.dim();
  if (n <= 0) throw StructuralError("empty algebra");
  const auto& w = g.weights();
  const int s = g.step();

  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double d = g.constant(i, j, k) + g.constant(j, i, k);
        if (std::abs(d) > tol)
          rep.violations.push_back({Axiom::Antisymmetry, {i + 1, j + 1, k + 1}, std::abs(d), "c_ij^k + c_ji^k != 0"});
      }

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double acc = 0.0;
          for (int m = 0; m < n; ++m) {
            acc += g.constant(i, j, m) * g.constant(m, k, l);
            acc += g.constant(j, k, m) * g.constant(m, i, l);
            acc += g.constant(k, i, m) * g.constant(m, j, l);
          }
          if (std::abs(acc) > tol)
            rep.violations.push_back({Axiom::Jacobi, {i + 1, j + 1, k + 1, l + 1}, std::abs(acc), "cyclic sum nonzero"});
        }

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double c = g.constant(i, j, k);
        if (std::abs(c) <= tol) continue;
        const int target = w[static_cast<std::size_t>(i)] + w[static_cast<std::size_t>(j)];
        if (target > s || w[static_cast<std::size_t>(k)] != target)
          rep.violations.push_back({Axiom::Grading, {i + 1, j + 1, k + 1}, std::abs(c), "bracket leaves weight-(a+b) span"});
      }

  // [V_1, V_{l-1}] must span V_l.
  for (int l = 1; l < s; ++l) {
    const int off = g.layer_offset(l);
    const int dl = g.layers()[static_cast<std::size_t>(l)];
    const int prev_off = g.layer_offset(l - 1);
    const int dprev = g.layers()[static_cast<std::size_t>(l - 1)];
    Mat span(dl, g.rank() * dprev);
    int col = 0;
    for (int a = 0; a < g.rank(); ++a)
      for (int b = prev_off; b < prev_off + dprev; ++b, ++col)
        for (int k = 0; k < dl; ++k) span(k, col) = g.constant(a, b, off + k);
    Eigen::JacobiSVD<Mat> svd(span);
    const auto& sv = svd.singularValues();
    int rank = 0;
    const double top = sv.size() > 0 ? sv[0] : 0.0;
    for (Eigen::Index q = 0; q < sv.size(); ++q)
      if (sv[q] > std::max(tol, 1e-9 * top)) ++rank;
    if (rank < dl)
      rep.violations.push_back({Axiom::Generation, {l + 1}, static_cast<double>(dl - rank),
                                "layer " + std::to_string(l + 1) + " not spanned by brackets with layer 1"});
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Built-in algebras

namespace algebras {

/// h_1: layers (2,1), [e1,e2] = e3.
inline CarnotAlgebra heisenberg()
{
  return CarnotAlgebra::from_brackets({2, 1}, {{0, 1, 2, 1.0}}, "heisenberg1");
}

/// Engel: layers (2,1,1), [e1,e2] = e3, [e1,e3] = e4.
inline CarnotAlgebra engel()
{
  return CarnotAlgebra::from_brackets({2, 1, 1}, {{0, 1, 2, 1.0}, {0, 2, 3, 1.0}}, "engel");
}

inline CarnotAlgebra abelian(int n)
{
  if (n <= 0) throw DomainError("abelian algebra needs n >= 1");
  return CarnotAlgebra({n}, std::vector<double>(static_cast<std::size_t>(n * n * n), 0.0), "abelian(" + std::to_string(n) + ")");
}

/// Strictly upper-triangular m×m matrices, graded by superdiagonal: step m-1.
/// Basis order: superdiagonal d = 1..m-1, rows ascending; e ↔ E_{r, r+d}.
inline CarnotAlgebra upper_triangular(int m)
{
  if (m < 2) throw DomainError("upper_triangular needs m >= 2");
  std::vector<int> layers;
  std::vector<std::pair<int, int>> basis;
  for (int d = 1; d < m; ++d) {
    layers.push_back(m - d);
    for (int r = 0; r + d < m; ++r) basis.emplace_back(r, r + d);
  }
  auto index_of = [&](int r, int c) {
    for (std::size_t q = 0; q < basis.size(); ++q)
      if (basis[q].first == r && basis[q].second == c) return static_cast<int>(q);
    return -1;
  };
  std::vector<StructureConstant> entries;
  for (std::size_t a = 0; a < basis.size(); ++a)
    for (std::size_t b = 0; b < basis.size(); ++b) {
      // [E_pq, E_rs] = δ_qr E_ps − δ_sp E_rq
      auto [p, q] = basis[a];
      auto [r, s] = basis[b];
      if (q == r) entries.push_back({static_cast<int>(a), static_cast<int>(b), index_of(p, s), 1.0});
      if (s == p) entries.push_back({static_cast<int>(a), static_cast<int>(b), index_of(r, q), -1.0});
    }
  // entries already contain both orders; accumulate into a dense tensor.
  const int n = static_cast<int>(basis.size());
  std::vector<double> c(static_cast<std::size_t>(n * n * n), 0.0);
  for (const auto& e : entries) c[static_cast<std::size_t>((e.i * n + e.j) * n + e.k)] += e.value;
  return CarnotAlgebra(std::move(layers), std::move(c), "upper_triangular(" + std::to_string(m) + ")");
}

}  // namespace algebras

}  // namespace sublab
