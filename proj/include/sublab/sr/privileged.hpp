#pragma once

/// @file
/// Privileged coordinates at a point, blow-up frames X^{o,ε} and the
/// nilpotent approximation (tangent Carnot algebra).

#include <functional>

#include "sublab/sr/frame.hpp"

namespace sublab {

/// Polynomial coordinate change x ↦ z centred at `origin`, in which coordinate
/// z_i has non-holonomic order `weights[i]`, together with the frame written
/// in z.
struct PrivilegedChart
{
  Vec origin;
  std::vector<int> weights;
  std::vector<Polynomial> forward;  ///< z(x)
  std::vector<Polynomial> inverse;  ///< x(z)
  HorizontalFrame frame;            ///< fields in z coordinates
  /// Largest coefficient found on monomials of weighted degree below −1
  /// (zero when the order condition holds).
  double order_defect = 0.0;

  Vec to_privileged(const Vec& x) const { return eval(forward, x); }
  Vec from_privileged(const Vec& z) const { return eval(inverse, z); }

private:
  static Vec eval(const std::vector<Polynomial>& map, const Vec& p)
  {
    Vec out(static_cast<Eigen::Index>(map.size()));
    for (std::size_t i = 0; i < map.size(); ++i) out[static_cast<Eigen::Index>(i)] = map[i](p);
    return out;
  }
};

namespace detail {

inline std::vector<Polynomial> compose_all(const std::vector<Polynomial>& map, const std::vector<Polynomial>& subs)
{
  std::vector<Polynomial> out;
  out.reserve(map.size());
  for (const auto& p : map) out.push_back(p.compose(subs));
  return out;
}

/// Field written in new coordinates y = φ(x), given x = ψ(y): Y_i(y) = (X φ_i)(ψ(y)).
inline PolyVectorField push_forward(const PolyVectorField& x, const std::vector<Polynomial>& phi, const std::vector<Polynomial>& psi)
{
  std::vector<Polynomial> comps;
  for (const auto& p : phi) comps.push_back(x.apply(p).compose(psi));
  return PolyVectorField(std::move(comps));
}

/// Affine map coefficients: out_i = c_i + Σ_k M_ik v_k as polynomials in v.
inline std::vector<Polynomial> affine(const Vec& c, const Mat& m)
{
  const int n = static_cast<int>(m.cols());
  std::vector<Polynomial> out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Polynomial p = Polynomial::constant(n, c[i]);
    for (int k = 0; k < n; ++k) p += Polynomial::variable(n, k, m(i, k));
    out.push_back(p.pruned(0.0));
  }
  return out;
}

inline std::vector<Polynomial> identity_map(int n)
{
  std::vector<Polynomial> out;
  for (int i = 0; i < n; ++i) out.push_back(Polynomial::variable(n, i));
  return out;
}

/// Calls fn(α) for every α over the first `vars` variables with |α| = k.
inline void for_each_multi_index(int vars, int k, const std::function<void(const Exponents&)>& fn, int n)
{
  Exponents a(static_cast<std::size_t>(n), 0);
  std::function<void(int, int)> rec = [&](int i, int left) {
    if (i == vars - 1) {
      a[static_cast<std::size_t>(i)] = left;
      fn(a);
      a[static_cast<std::size_t>(i)] = 0;
      return;
    }
    for (int c = left; c >= 0; --c) {
      a[static_cast<std::size_t>(i)] = c;
      rec(i + 1, left - c);
    }
    a[static_cast<std::size_t>(i)] = 0;
  };
  if (vars > 0) rec(0, k);
}

inline double order_defect(const HorizontalFrame& frame, const std::vector<int>& w)
{
  double defect = 0.0;
  for (const auto& f : frame.fields())
    for (int i = 0; i < f.dim(); ++i)
      for (const auto& [e, c] : f[i].terms())
        if (weighted_degree(e, w) - w[static_cast<std::size_t>(i)] < -1) defect = std::max(defect, std::abs(c));
  return defect;
}

}  // namespace detail

/// Builds privileged coordinates at o. Group frames use left translation by
/// o⁻¹ in exponential coordinates. Other frames use the adapted linear basis
/// from the bracket flag followed by the triangular weighted-polynomial
/// corrections
///   z_j = u_j − Σ_{k=2}^{w_j−1} h_k(u_1..u_{j−1}),
///   h_k = Σ_{|α|=k, w(α)<w_j} [Y_1^{α_1}⋯Y_{j−1}^{α_{j−1}}(u_j − Σ_{q<k} h_q)](0) u^α/α!.
inline PrivilegedChart privileged_chart(const HorizontalFrame& frame, const Vec& o)
{
  const int n = frame.dim();
  PrivilegedChart chart;
  chart.origin = o;

  if (frame.is_group()) {
    const auto& g = *frame.algebra();
    const Polynomial zero(n);
    std::vector<Polynomial> oc_neg, oc_pos;
    for (int i = 0; i < n; ++i) {
      oc_neg.push_back(Polynomial::constant(n, -o[i]).pruned(0.0));
      oc_pos.push_back(Polynomial::constant(n, o[i]).pruned(0.0));
    }
    const auto id = detail::identity_map(n);
    chart.weights = g.weights();
    chart.forward = bch_series<Polynomial>(g, oc_neg, id, zero);
    chart.inverse = bch_series<Polynomial>(g, oc_pos, id, zero);
    // Left-invariant fields are unchanged by left translation.
    chart.frame = frame;
    return chart;
  }

  const GrowthData growth = growth_vector_at(frame, o);
  chart.weights = growth.weights;
  const auto& w = chart.weights;
  Mat b(n, n);
  for (int i = 0; i < n; ++i) b.col(i) = growth.adapted_fields[static_cast<std::size_t>(i)](o);
  const Mat binv = b.inverse();

  // Linear adapted coordinates u = B⁻¹(x − o).
  const auto x_of_u = detail::affine(o, b);
  const auto u_of_x = detail::affine(-binv * o, binv);
  std::vector<PolyVectorField> y;
  for (const auto& f : growth.adapted_fields) y.push_back(detail::push_forward(f, u_of_x, x_of_u).pruned(1e-14));

  // Triangular corrections z = φ(u).
  std::vector<Polynomial> phi = detail::identity_map(n);
  for (int j = 0; j < n; ++j) {
    const int wj = w[static_cast<std::size_t>(j)];
    Polynomial correction(n);
    for (int k = 2; k <= wj - 1; ++k) {
      const Polynomial target = Polynomial::variable(n, j) - correction;
      Polynomial hk(n);
      detail::for_each_multi_index(j, k, [&](const Exponents& a) {
        if (weighted_degree(a, w) >= wj) return;
        Polynomial g = target;
        double fact = 1.0;
        for (int v = j - 1; v >= 0; --v)
          for (int r = 0; r < a[static_cast<std::size_t>(v)]; ++r) {
            g = y[static_cast<std::size_t>(v)].apply(g);
            fact *= (r + 1);
          }
        const double c = g(Vec::Zero(n)) / fact;
        if (std::abs(c) > 1e-14) hk.add_term(a, c);
      }, n);
      correction += hk;
    }
    phi[static_cast<std::size_t>(j)] = Polynomial::variable(n, j) - correction;
  }
  // φ⁻¹: u_j = z_j + correction_j(u_{<j}(z)), solved in order.
  std::vector<Polynomial> psi = detail::identity_map(n);
  for (int j = 0; j < n; ++j) {
    const Polynomial corr = Polynomial::variable(n, j) - phi[static_cast<std::size_t>(j)];
    psi[static_cast<std::size_t>(j)] = Polynomial::variable(n, j) + corr.compose(psi);
  }

  chart.forward = detail::compose_all(phi, u_of_x);
  chart.inverse = detail::compose_all(x_of_u, psi);
  std::vector<PolyVectorField> z_fields;
  for (const auto& f : frame.fields()) z_fields.push_back(detail::push_forward(f, chart.forward, chart.inverse).pruned(1e-13));
  chart.frame = HorizontalFrame(std::move(z_fields), frame.name() + "@privileged");
  chart.order_defect = detail::order_defect(chart.frame, w);
  return chart;
}

/// X_j^{o,ε} = ε·dδ_{1/ε}∘X_j∘δ_ε in the chart: the coefficient of z^α in
/// slot i is multiplied by ε^{1 + w(α) − w_i}.
inline HorizontalFrame blowup_frame(const PrivilegedChart& chart, double eps)
{
  if (!(eps > 0.0)) throw DomainError("blow-up scale must be positive");
  if (chart.order_defect > 1e-9) throw StructuralError("chart is not privileged: blow-up would diverge");
  const auto& w = chart.weights;
  std::vector<PolyVectorField> out;
  for (const auto& f : chart.frame.fields())
    out.push_back(f.map_components([&](int i, const Polynomial& p) {
      return p.rescaled([&](const Exponents& e) {
        const int k = 1 + weighted_degree(e, w) - w[static_cast<std::size_t>(i)];
        return k == 0 ? 1.0 : std::pow(eps, k);
      });
    }));
  return HorizontalFrame(std::move(out), chart.frame.name(), chart.frame.kind(), chart.frame.algebra_ptr());
}

inline HorizontalFrame blowup_frame(const HorizontalFrame& frame, const Vec& o, double eps)
{
  if (!(eps > 0.0)) throw DomainError("blow-up scale must be positive");
  return blowup_frame(privileged_chart(frame, o), eps);
}

/// X_j^{o,0}: monomials of weighted degree exactly w_i − 1 in slot i.
inline HorizontalFrame limit_frame(const PrivilegedChart& chart)
{
  const auto& w = chart.weights;
  std::vector<PolyVectorField> out;
  for (const auto& f : chart.frame.fields())
    out.push_back(f.map_components([&](int i, const Polynomial& p) {
      return p.filtered([&](const Exponents& e, double) { return weighted_degree(e, w) == w[static_cast<std::size_t>(i)] - 1; });
    }));
  return HorizontalFrame(std::move(out), chart.frame.name() + "@limit", chart.frame.kind(), chart.frame.algebra_ptr());
}

// ---------------------------------------------------------------------------

struct NilpotentApproximation
{
  CarnotAlgebra algebra;
  PrivilegedChart chart;
  HorizontalFrame limit;
  GrowthData growth;
  ValidationReport validation;
  bool equiregular = true;
  /// Basis of the algebra as bracket words in the limit fields.
  std::vector<PolyVectorField> basis;
};

namespace detail {

inline double snap(double v)
{
  const double r = std::round(v);
  return std::abs(v - r) <= 1e-12 * std::max(1.0, std::abs(v)) ? r : v;
}

/// Lie algebra spanned by the limit fields, layer k spanned by [L_j, layer k−1].
inline std::pair<CarnotAlgebra, std::vector<PolyVectorField>> algebra_of_fields(const std::vector<PolyVectorField>& limit,
                                                                                const std::string& name)
{
  std::vector<int> layers;
  std::vector<PolyVectorField> basis;
  std::vector<PolyVectorField> layer = independent_fields(limit, 1e-12);
  std::vector<PolyVectorField> first = layer;
  while (!layer.empty()) {
    if (static_cast<int>(layers.size()) >= kMaxBchStep) throw StructuralError("limit fields do not generate a nilpotent algebra");
    layers.push_back(static_cast<int>(layer.size()));
    basis.insert(basis.end(), layer.begin(), layer.end());
    std::vector<PolyVectorField> next;
    for (const auto& x : first)
      for (const auto& b : layer) next.push_back(lie_bracket(x, b));
    layer = independent_fields(next, 1e-12);
  }
  const int n = static_cast<int>(basis.size());
  std::vector<StructureConstant> entries;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      const auto br = lie_bracket(basis[static_cast<std::size_t>(a)], basis[static_cast<std::size_t>(b)]).pruned(1e-13);
      if (br.is_zero()) continue;
      auto all = basis;
      all.push_back(br);
      const Mat m = coefficient_matrix(all);
      const Mat lhs = m.leftCols(n);
      const Vec rhs = m.col(n);
      const Vec c = lhs.colPivHouseholderQr().solve(rhs);
      if ((lhs * c - rhs).norm() > 1e-9 * std::max(1.0, rhs.norm()))
        throw StructuralError("bracket of limit fields leaves their span");
      for (int k = 0; k < n; ++k)
        if (const double v = snap(c[k]); std::abs(v) > 1e-12) entries.push_back({a, b, k, v});
    }
  return {CarnotAlgebra::from_brackets(layers, entries, name), basis};
}

/// 26 probe points in a small box around o.
inline std::vector<Vec> equiregularity_probes(const Vec& o, double h = 0.05)
{
  std::vector<Vec> out;
  const auto pts = sobol_points(static_cast<int>(o.size()), 26);
  for (const auto& s : pts) out.push_back(o + h * (2.0 * s.array() - 1.0).matrix());
  return out;
}

}  // namespace detail

inline NilpotentApproximation nilpotent_approximation(const HorizontalFrame& frame, const Vec& o)
{
  NilpotentApproximation out;
  out.growth = growth_vector_at(frame, o);
  for (const auto& q : detail::equiregularity_probes(o)) {
    try {
      if (growth_vector_at(frame, q).growth != out.growth.growth) out.equiregular = false;
    } catch (const NonGeneratingError&) {
      out.equiregular = false;
    }
  }
  out.chart = privileged_chart(frame, o);
  if (out.chart.order_defect > 1e-9)
    throw StructuralError("privileged coordinate construction failed: monomials of order below -1 remain");
  out.limit = limit_frame(out.chart);
  if (frame.is_group()) {
    out.algebra = *frame.algebra();
    out.basis = out.limit.fields();
  } else {
    auto [g, basis] = detail::algebra_of_fields(out.limit.fields(), frame.name() + "@tangent");
    out.algebra = std::move(g);
    out.basis = std::move(basis);
  }
  out.validation = verify_structure(out.algebra, 1e-9);
  return out;
}

}  // namespace sublab
