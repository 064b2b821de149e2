#pragma once

/// @file
/// Vector fields with polynomial coefficients on a coordinate chart.

#include <vector>

#include "sublab/polynomial.hpp"

namespace sublab {

class PolyVectorField
{
public:
  PolyVectorField() = default;

  explicit PolyVectorField(std::vector<Polynomial> components) : comps_(std::move(components))
  {
    for (const auto& c : comps_)
      if (c.nvars() != dim() && !c.is_zero()) throw StructuralError("vector field component over wrong variable count");
    for (auto& c : comps_)
      if (c.is_zero()) c = Polynomial(dim());
  }

  static PolyVectorField zero(int n) { return PolyVectorField(std::vector<Polynomial>(static_cast<std::size_t>(n), Polynomial(n))); }

  /// Constant field ∂_i.
  static PolyVectorField coordinate(int n, int i)
  {
    auto f = zero(n);
    f.comps_[static_cast<std::size_t>(i)] = Polynomial::constant(n, 1.0);
    return f;
  }

  int dim() const { return static_cast<int>(comps_.size()); }
  const Polynomial& operator[](int i) const { return comps_[static_cast<std::size_t>(i)]; }
  const std::vector<Polynomial>& components() const { return comps_; }

  bool is_zero() const
  {
    return std::all_of(comps_.begin(), comps_.end(), [](const Polynomial& p) { return p.is_zero(); });
  }

  int degree() const
  {
    int d = -1;
    for (const auto& c : comps_) d = std::max(d, c.degree());
    return d;
  }

  double max_abs_coefficient() const
  {
    double m = 0.0;
    for (const auto& c : comps_) m = std::max(m, c.max_abs_coefficient());
    return m;
  }

  Vec operator()(const Vec& p) const
  {
    Vec v(dim());
    for (int i = 0; i < dim(); ++i) v[i] = comps_[static_cast<std::size_t>(i)](p);
    return v;
  }

  /// Derivation X(f) = Σ_l X_l ∂_l f.
  Polynomial apply(const Polynomial& f) const
  {
    Polynomial out(dim());
    for (int l = 0; l < dim(); ++l) {
      const auto& xl = comps_[static_cast<std::size_t>(l)];
      if (xl.is_zero()) continue;
      auto d = f.derivative(l);
      if (d.is_zero()) continue;
      out += xl * d;
    }
    return out;
  }

  template <typename Fn>
  PolyVectorField map_components(Fn&& fn) const
  {
    std::vector<Polynomial> c;
    c.reserve(comps_.size());
    for (int i = 0; i < dim(); ++i) c.push_back(fn(i, comps_[static_cast<std::size_t>(i)]));
    return PolyVectorField(std::move(c));
  }

  PolyVectorField pruned(double tol) const
  {
    return map_components([tol](int, const Polynomial& p) { return p.pruned(tol); });
  }

  friend PolyVectorField operator+(const PolyVectorField& a, const PolyVectorField& b)
  {
    return a.map_components([&](int i, const Polynomial& p) { return p + b[i]; });
  }
  friend PolyVectorField operator-(const PolyVectorField& a, const PolyVectorField& b)
  {
    return a.map_components([&](int i, const Polynomial& p) { return p - b[i]; });
  }
  friend PolyVectorField operator*(double s, const PolyVectorField& a)
  {
    return a.map_components([s](int, const Polynomial& p) { return p * s; });
  }
  friend bool operator==(const PolyVectorField& a, const PolyVectorField& b) { return a.comps_ == b.comps_; }

private:
  std::vector<Polynomial> comps_;
};

/// [X, Y] = (DY)X − (DX)Y, exact on coefficients.
inline PolyVectorField lie_bracket(const PolyVectorField& x, const PolyVectorField& y)
{
  if (x.dim() != y.dim()) throw StructuralError("bracket of fields on charts of different dimension");
  std::vector<Polynomial> c;
  c.reserve(static_cast<std::size_t>(x.dim()));
  for (int i = 0; i < x.dim(); ++i) c.push_back(x.apply(y[i]) - y.apply(x[i]));
  return PolyVectorField(std::move(c));
}

/// Largest coefficient difference between two fields.
inline double coefficient_distance(const PolyVectorField& a, const PolyVectorField& b)
{
  return (a - b).max_abs_coefficient();
}

/// Coefficient vectors of fields over the union of their monomial supports,
/// one column per field.
inline Mat coefficient_matrix(const std::vector<PolyVectorField>& fields)
{
  std::map<std::pair<int, Exponents>, int> keys;
  for (const auto& f : fields)
    for (int i = 0; i < f.dim(); ++i)
      for (const auto& [e, c] : f[i].terms()) keys.try_emplace({i, e}, static_cast<int>(keys.size()));
  Mat m = Mat::Zero(static_cast<Eigen::Index>(keys.size()), static_cast<Eigen::Index>(fields.size()));
  for (std::size_t col = 0; col < fields.size(); ++col)
    for (int i = 0; i < fields[col].dim(); ++i)
      for (const auto& [e, c] : fields[col][i].terms()) m(keys.at({i, e}), static_cast<Eigen::Index>(col)) = c;
  return m;
}

}  // namespace sublab
