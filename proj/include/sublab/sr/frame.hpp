#pragma once

/// @file
/// Horizontal frames (orthonormal polynomial fields X_1..X_r on a chart),
/// their bracket flags and growth vectors.

#include <memory>
#include <optional>
#include <string>

#include "sublab/carnot/group.hpp"
#include "sublab/sr/vector_field.hpp"

namespace sublab {

/// What is known about a frame beyond its coefficients. Frames built as
/// left-invariant fields of a Carnot algebra flow by group multiplication;
/// Euclidean and Heisenberg frames additionally have closed-form geodesics.
enum class FrameKind { Generic, Carnot, Euclidean, Heisenberg };

inline const char* to_string(FrameKind k)
{
  switch (k) {
    case FrameKind::Generic: return "generic";
    case FrameKind::Carnot: return "carnot";
    case FrameKind::Euclidean: return "euclidean";
    case FrameKind::Heisenberg: return "heisenberg";
  }
  return "?";
}

class HorizontalFrame
{
public:
  HorizontalFrame() = default;

  HorizontalFrame(std::vector<PolyVectorField> fields, std::string name = {}, FrameKind kind = FrameKind::Generic,
                  std::shared_ptr<const CarnotAlgebra> algebra = nullptr)
      : fields_(std::move(fields)), name_(std::move(name)), kind_(kind), algebra_(std::move(algebra))
  {
    if (fields_.empty()) throw StructuralError("frame needs at least one field");
    n_ = fields_.front().dim();
    for (const auto& f : fields_)
      if (f.dim() != n_) throw StructuralError("frame fields live on charts of different dimension");
    if (kind_ != FrameKind::Generic && !algebra_) throw StructuralError("group frames need their algebra");
  }

  /// Left-invariant fields X_j(x) = d/ds (x * s e_j)|_{s=0} in exponential
  /// coordinates, computed symbolically from the BCH series.
  static HorizontalFrame left_invariant(const CarnotAlgebra& g, std::string name = {}, FrameKind kind = FrameKind::Carnot);

  int dim() const { return n_; }
  int rank() const { return static_cast<int>(fields_.size()); }
  const std::vector<PolyVectorField>& fields() const { return fields_; }
  const PolyVectorField& field(int j) const { return fields_[static_cast<std::size_t>(j)]; }
  const std::string& name() const { return name_; }
  FrameKind kind() const { return kind_; }
  bool is_group() const { return kind_ != FrameKind::Generic; }
  const CarnotAlgebra* algebra() const { return algebra_.get(); }
  std::shared_ptr<const CarnotAlgebra> algebra_ptr() const { return algebra_; }

  /// n × r matrix of field values at p.
  Mat evaluate(const Vec& p) const
  {
    Mat m(n_, rank());
    for (int j = 0; j < rank(); ++j) m.col(j) = fields_[static_cast<std::size_t>(j)](p);
    return m;
  }

  /// Σ_j u_j X_j(p).
  Vec velocity(const Vec& p, const Vec& u) const
  {
    Vec v = Vec::Zero(n_);
    for (int j = 0; j < rank(); ++j)
      if (u[j] != 0.0) v += u[j] * fields_[static_cast<std::size_t>(j)](p);
    return v;
  }

private:
  int n_ = 0;
  std::vector<PolyVectorField> fields_;
  std::string name_;
  FrameKind kind_ = FrameKind::Generic;
  std::shared_ptr<const CarnotAlgebra> algebra_;
};

inline HorizontalFrame HorizontalFrame::left_invariant(const CarnotAlgebra& g, std::string name, FrameKind kind)
{
  const int n = g.dim();
  const int m = n + 1;  // x_1..x_n and the curve parameter s
  const Polynomial zero(m);
  std::vector<Polynomial> x;
  for (int i = 0; i < n; ++i) x.push_back(Polynomial::variable(m, i));
  std::vector<PolyVectorField> fields;
  for (int j = 0; j < g.rank(); ++j) {
    std::vector<Polynomial> y(static_cast<std::size_t>(n), zero);
    y[static_cast<std::size_t>(j)] = Polynomial::variable(m, n);
    const auto prod = bch_series<Polynomial>(g, x, y, zero);
    std::vector<Polynomial> comps;
    for (int i = 0; i < n; ++i) {
      Polynomial c(n);
      for (const auto& [e, coef] : prod[static_cast<std::size_t>(i)].terms())
        if (e.back() == 1) c.add_term(Exponents(e.begin(), e.end() - 1), coef);
      comps.push_back(std::move(c));
    }
    fields.emplace_back(std::move(comps));
  }
  if (name.empty()) name = g.name();
  return HorizontalFrame(std::move(fields), std::move(name), kind, std::make_shared<CarnotAlgebra>(g));
}

// ---------------------------------------------------------------------------
// Built-in frames

namespace frames {

/// X = ∂x − (y/2)∂t, Y = ∂y + (x/2)∂t.
inline HorizontalFrame heisenberg()
{
  return HorizontalFrame::left_invariant(algebras::heisenberg(), "heisenberg1", FrameKind::Heisenberg);
}

inline HorizontalFrame abelian(int n)
{
  return HorizontalFrame::left_invariant(algebras::abelian(n), "abelian(" + std::to_string(n) + ")", FrameKind::Euclidean);
}

/// Engel-type frame X1 = ∂x, X2 = ∂y + x∂z + x²∂w on R⁴.
inline HorizontalFrame engel()
{
  const int n = 4;
  auto x = Polynomial::variable(n, 0);
  std::vector<Polynomial> x2 = {Polynomial(n), Polynomial::constant(n, 1.0), x, x * x};
  return HorizontalFrame({PolyVectorField::coordinate(n, 0), PolyVectorField(x2)}, "engel");
}

/// Heisenberg frame with a higher-order perturbation:
/// X = ∂x − (y/2)(1 + x²)∂t, Y = ∂y + (x/2)∂t.
inline HorizontalFrame perturbed_heisenberg()
{
  const int n = 3;
  auto x = Polynomial::variable(n, 0);
  auto y = Polynomial::variable(n, 1);
  const auto one = Polynomial::constant(n, 1.0);
  PolyVectorField fx({one, Polynomial(n), -0.5 * y * (one + x * x)});
  PolyVectorField fy({Polynomial(n), one, 0.5 * x});
  return HorizontalFrame({fx, fy}, "heisenberg1-perturbed");
}

/// Left-invariant Engel group frame in exponential coordinates.
inline HorizontalFrame engel_group() { return HorizontalFrame::left_invariant(algebras::engel(), "engel-group"); }

}  // namespace frames

// ---------------------------------------------------------------------------
// Growth vector

struct GrowthData
{
  Vec point;
  std::vector<int> ranks;   ///< r_1..r_s
  std::vector<int> growth;  ///< n_k = r_k − r_{k−1}
  std::vector<int> weights; ///< weight of each adapted basis vector
  int step = 0;
  int Q = 0;
  /// Adapted basis: bracket fields whose values at the point span the flag,
  /// ordered by weight.
  std::vector<PolyVectorField> adapted_fields;
};

class NonGeneratingError : public Error
{
public:
  NonGeneratingError(std::string what, GrowthData partial) : Error(std::move(what)), partial_(std::move(partial)) {}
  const GrowthData& partial() const { return partial_; }

private:
  GrowthData partial_;
};

namespace detail {

/// Indices of columns that increase numerical rank, scanning left to right.
inline std::vector<int> independent_columns(const Mat& base, const Mat& candidates, double rel_tol, double& scale)
{
  std::vector<int> chosen;
  Mat current = base;
  int rank = static_cast<int>(base.cols());
  for (Eigen::Index c = 0; c < candidates.cols(); ++c) {
    scale = std::max(scale, candidates.col(c).norm());
    if (candidates.col(c).norm() <= rel_tol * scale) continue;
    Mat trial(candidates.rows(), current.cols() + 1);
    trial << current, candidates.col(c);
    Eigen::JacobiSVD<Mat> svd(trial);
    const auto& sv = svd.singularValues();
    int r = 0;
    for (Eigen::Index q = 0; q < sv.size(); ++q)
      if (sv[q] > rel_tol * std::max(scale, sv[0])) ++r;
    if (r > rank) {
      current = trial;
      rank = r;
      chosen.push_back(static_cast<int>(c));
    }
  }
  return chosen;
}

/// Keeps a maximal linearly independent subset of fields (as coefficient vectors).
inline std::vector<PolyVectorField> independent_fields(const std::vector<PolyVectorField>& fields, double tol = 1e-10)
{
  std::vector<PolyVectorField> nonzero;
  for (const auto& f : fields) {
    auto p = f.pruned(tol);
    if (!p.is_zero()) nonzero.push_back(std::move(p));
  }
  if (nonzero.empty()) return {};
  const Mat m = coefficient_matrix(nonzero);
  double scale = 0.0;
  const auto idx = independent_columns(Mat(m.rows(), 0), m, tol, scale);
  std::vector<PolyVectorField> out;
  for (int i : idx) out.push_back(nonzero[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace detail

/// Bracket flag at p: ranks of span{brackets of length ≤ k evaluated at p},
/// numerical rank with relative singular-value threshold `rel_tol`.
inline GrowthData growth_vector_at(const HorizontalFrame& frame, const Vec& p, int cap = 6, double rel_tol = 1e-9)
{
  if (p.size() != frame.dim()) throw StructuralError("point dimension does not match frame");
  const int n = frame.dim();
  GrowthData out;
  out.point = p;
  Mat basis(n, 0);
  double scale = 0.0;
  std::vector<PolyVectorField> layer = detail::independent_fields(frame.fields());
  std::vector<PolyVectorField> first = layer;
  for (int k = 1; k <= cap; ++k) {
    Mat values(n, static_cast<Eigen::Index>(layer.size()));
    for (std::size_t c = 0; c < layer.size(); ++c) values.col(static_cast<Eigen::Index>(c)) = layer[c](p);
    const auto chosen = detail::independent_columns(basis, values, rel_tol, scale);
    for (int c : chosen) {
      Mat grown(n, basis.cols() + 1);
      grown << basis, values.col(c);
      basis = grown;
      out.weights.push_back(k);
      out.adapted_fields.push_back(layer[static_cast<std::size_t>(c)]);
    }
    const int rk = static_cast<int>(basis.cols());
    out.growth.push_back(rk - (out.ranks.empty() ? 0 : out.ranks.back()));
    out.ranks.push_back(rk);
    out.step = k;
    out.Q += k * out.growth.back();
    if (rk == n) return out;
    std::vector<PolyVectorField> next;
    for (const auto& x : first)
      for (const auto& b : layer) next.push_back(lie_bracket(x, b));
    layer = detail::independent_fields(next);
    if (layer.empty()) break;
  }
  throw NonGeneratingError("frame is not bracket generating within " + std::to_string(cap) + " brackets (rank " +
                               std::to_string(out.ranks.empty() ? 0 : out.ranks.back()) + " of " + std::to_string(n) + ")",
                           out);
}

}  // namespace sublab
