#pragma once

/// @file
/// Built-in maps with exact side data: preimage enumerators, known Pansu
/// differentials and the distance to a declared branch locus.
///
/// Heisenberg convention throughout: X = ∂x − (y/2)∂t, Y = ∂y + (x/2)∂t,
/// (x,y,t)(x',y',t') = (x+x', y+y', t+t'+½(xy'−yx')).

#include "sublab/qr/map_model.hpp"
#include "sublab/qr/morphism.hpp"

namespace sublab {

class InsufficientPointsError : public Error
{
public:
  using Error::Error;
};

struct MapDescriptor
{
  std::string name;
  SmoothMapModel model;
  /// All preimages of y (global), when known in closed form.
  std::function<std::vector<Vec>(const Vec&)> preimages;
  /// Pansu differential at x, when known; empty off its domain of validity.
  std::function<std::optional<GradedMorphism>(const Vec&)> differential;
  /// Distance from x to the branch locus (null: no branch points).
  std::function<double(const Vec&)> branch_distance;
  std::string branch_locus = "none";
  /// Default region for probe points and scans.
  Box probe_box;
};

namespace detail {

inline std::shared_ptr<const HorizontalFrame> share(HorizontalFrame f) { return std::make_shared<const HorizontalFrame>(std::move(f)); }

inline Box default_probe_box(const HorizontalFrame& f)
{
  return {Vec::Constant(f.dim(), -1.0), Vec::Constant(f.dim(), 1.0)};
}

/// Numbers inside "name(a, b, ...)".
inline std::vector<double> parse_args(const std::string& spec, const std::string& head)
{
  std::vector<double> out;
  if (spec == head) return out;
  if (spec.size() < head.size() + 2 || spec.compare(0, head.size() + 1, head + "(") != 0 || spec.back() != ')')
    throw ConfigError("map", "malformed map spec '" + spec + "'");
  std::stringstream ss(spec.substr(head.size() + 1, spec.size() - head.size() - 2));
  for (std::string tok; std::getline(ss, tok, ',');) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ConfigError("map", "non-numeric argument '" + tok + "' in '" + spec + "'");
    }
  }
  return out;
}

inline std::string head_of(const std::string& spec) { return spec.substr(0, spec.find('(')); }

}  // namespace detail

namespace maps {

inline MapDescriptor identity(const HorizontalFrame& frame)
{
  MapDescriptor d;
  d.name = "identity";
  auto fr = detail::share(frame);
  d.model = {d.name, fr, fr, [](const Vec& x) { return x; }, [](const Vec& x) { return Mat(Mat::Identity(x.size(), x.size())); }};
  d.preimages = [](const Vec& y) { return std::vector<Vec>{y}; };
  if (frame.is_group()) {
    auto g = frame.algebra_ptr();
    d.differential = [g](const Vec&) { return std::optional<GradedMorphism>(GradedMorphism::identity(g)); };
  }
  d.probe_box = detail::default_probe_box(frame);
  return d;
}

/// Left translation x ↦ g·x.
inline MapDescriptor translation(const HorizontalFrame& frame, const Vec& g)
{
  if (!frame.is_group()) throw StructuralError("translation needs a group frame");
  if (g.size() != frame.dim()) throw ConfigError("map", "translation element has the wrong dimension");
  MapDescriptor d;
  d.name = "translation";
  auto fr = detail::share(frame);
  auto alg = frame.algebra_ptr();
  d.model = {d.name, fr, fr, [alg, g](const Vec& x) { return group_product(*alg, g, x); }, nullptr};
  d.preimages = [alg, g](const Vec& y) { return std::vector<Vec>{group_product(*alg, group_inverse(*alg, g), y)}; };
  d.differential = [alg](const Vec&) { return std::optional<GradedMorphism>(GradedMorphism::identity(alg)); };
  d.probe_box = detail::default_probe_box(frame);
  return d;
}

inline MapDescriptor dilation(const HorizontalFrame& frame, double lambda)
{
  if (!frame.is_group()) throw StructuralError("dilation needs a group frame");
  if (!(lambda > 0.0)) throw DomainError("dilation factor must be positive");
  MapDescriptor d;
  d.name = "dilation";
  auto fr = detail::share(frame);
  auto alg = frame.algebra_ptr();
  const Mat dm = dilation_matrix(*alg, lambda);
  const Mat inv = dilation_matrix(*alg, 1.0 / lambda);
  d.model = {d.name, fr, fr, [dm](const Vec& x) { return Vec(dm * x); }, [dm](const Vec&) { return dm; }};
  d.preimages = [inv](const Vec& y) { return std::vector<Vec>{inv * y}; };
  const Mat block = lambda * Mat::Identity(alg->rank(), alg->rank());
  const auto morph = GradedMorphism::from_first_layer(alg, alg, block);
  d.differential = [morph](const Vec&) { return std::optional<GradedMorphism>(morph); };
  d.probe_box = detail::default_probe_box(frame);
  return d;
}

/// Graded automorphism with the given first-layer block.
inline MapDescriptor automorphism(const HorizontalFrame& frame, const Mat& block)
{
  if (!frame.is_group()) throw StructuralError("automorphism needs a group frame");
  auto alg = frame.algebra_ptr();
  GradedMorphism morph;
  try {
    morph = GradedMorphism::from_first_layer(alg, alg, block);
  } catch (const StructuralError& e) {
    throw StructuralError(std::string("invalid automorphism descriptor: ") + e.what());
  }
  const Mat a = morph.matrix();
  if (std::abs(a.determinant()) < 1e-12) throw StructuralError("invalid automorphism descriptor: singular block");
  const Mat ainv = a.inverse();
  MapDescriptor d;
  d.name = "automorphism";
  auto fr = detail::share(frame);
  d.model = {d.name, fr, fr, [a](const Vec& x) { return Vec(a * x); }, [a](const Vec&) { return a; }};
  d.preimages = [ainv](const Vec& y) { return std::vector<Vec>{ainv * y}; };
  d.differential = [morph](const Vec&) { return std::optional<GradedMorphism>(morph); };
  d.probe_box = detail::default_probe_box(frame);
  return d;
}

/// (r, φ, t) ↦ (s·r, m·φ, τ·t) on h_1 in Cartesian form, with the t-axis
/// mapped to itself. Contact (hence Pansu differentiable off the axis) iff
/// τ = s²m; otherwise no differential is attached.
inline MapDescriptor radial(double s, int m, double tau, std::string name = "radial")
{
  if (!(s > 0.0)) throw ConfigError("r_scale", "must be positive");
  if (m == 0) throw ConfigError("angle_multiplier", "must be a nonzero integer");
  if (tau == 0.0) throw ConfigError("t_scale", "must be nonzero");
  const auto frame = frames::heisenberg();
  auto fr = detail::share(frame);
  auto alg = frame.algebra_ptr();
  auto rot = [](double a) { return (Mat(2, 2) << std::cos(a), -std::sin(a), std::sin(a), std::cos(a)).finished(); };
  MapDescriptor d;
  d.name = std::move(name);
  auto fwd = [s, m, tau](const Vec& p) {
    const double r = std::hypot(p[0], p[1]);
    Vec out(3);
    if (r == 0.0) {
      out << 0.0, 0.0, tau * p[2];
      return out;
    }
    const double phi = m * std::atan2(p[1], p[0]);
    out << s * r * std::cos(phi), s * r * std::sin(phi), tau * p[2];
    return out;
  };
  // Horizontal block R(mφ)·diag(s, s·m)·R(−φ), from ∂_r and ∂_φ/r.
  auto block = [s, m, rot](double phi) { return Mat(rot(m * phi) * (Mat(2, 2) << s, 0.0, 0.0, s * m).finished() * rot(-phi)); };
  auto jac = [tau, block](const Vec& p) {
    Mat j = Mat::Zero(3, 3);
    j(2, 2) = tau;
    if (p[0] == 0.0 && p[1] == 0.0) return j;  // not differentiable on the axis; horizontal part left at 0
    j.topLeftCorner(2, 2) = block(std::atan2(p[1], p[0]));
    return j;
  };
  d.model = {d.name, fr, fr, fwd, jac};
  d.preimages = [s, m, tau](const Vec& y) {
    const double rr = std::hypot(y[0], y[1]);
    if (rr == 0.0) return std::vector<Vec>{(Vec(3) << 0.0, 0.0, y[2] / tau).finished()};
    const double psi = std::atan2(y[1], y[0]);
    std::vector<Vec> out;
    for (int k = 0; k < std::abs(m); ++k) {
      const double a = (psi + 2.0 * std::numbers::pi * k) / m;
      out.push_back((Vec(3) << rr / s * std::cos(a), rr / s * std::sin(a), y[2] / tau).finished());
    }
    return out;
  };
  if (std::abs(tau - s * s * m) <= 1e-12 * std::max(1.0, std::abs(tau))) {
    d.differential = [alg, block](const Vec& p) -> std::optional<GradedMorphism> {
      if (p[0] == 0.0 && p[1] == 0.0) return std::nullopt;
      return GradedMorphism::from_first_layer(alg, alg, block(std::atan2(p[1], p[0])));
    };
  }
  if (std::abs(m) > 1) {
    d.branch_distance = [](const Vec& p) { return std::hypot(p[0], p[1]); };
    d.branch_locus = "t-axis";
  }
  d.probe_box = {(Vec(3) << -1, -1, 0).finished(), (Vec(3) << 1, 1, 1).finished()};
  return d;
}

/// (r, φ, t) ↦ (r/2, 2φ, t/2) on h_1; f(1,0,0) = (1/2,0,0). The factor on t
/// makes the map contact for the convention above.
inline MapDescriptor winding() { return radial(0.5, 2, 0.5, "winding"); }

}  // namespace maps

/// f∘g.
inline MapDescriptor compose(const MapDescriptor& f, const MapDescriptor& g)
{
  if (g.model.target->name() != f.model.domain->name() || g.model.target->dim() != f.model.domain->dim())
    throw StructuralError("cannot compose '" + f.name + "' after '" + g.name + "': frame mismatch");
  MapDescriptor d;
  d.name = f.name + "∘" + g.name;
  const auto ff = f.model.forward;
  const auto gf = g.model.forward;
  std::function<Mat(const Vec&)> jac;
  if (f.model.jacobian && g.model.jacobian) {
    auto fj = f.model.jacobian, gj = g.model.jacobian;
    jac = [fj, gj, gf](const Vec& x) { return Mat(fj(gf(x)) * gj(x)); };
  }
  d.model = {d.name, g.model.domain, f.model.target, [ff, gf](const Vec& x) { return ff(gf(x)); }, jac};
  if (f.preimages && g.preimages) {
    auto fp = f.preimages, gp = g.preimages;
    d.preimages = [fp, gp](const Vec& y) {
      std::vector<Vec> out;
      for (const auto& a : fp(y))
        for (const auto& b : gp(a)) out.push_back(b);
      return out;
    };
  }
  if (f.differential && g.differential) {
    auto fd = f.differential, gd = g.differential;
    d.differential = [fd, gd, gf](const Vec& x) -> std::optional<GradedMorphism> {
      const auto a = gd(x);
      if (!a) return std::nullopt;
      const auto b = fd(gf(x));
      if (!b) return std::nullopt;
      return compose(*b, *a);
    };
  }
  // Branch set of f∘g is B_g ∪ g⁻¹(B_f); the min below is a conservative
  // proxy when g does not expand distances to B_f.
  if (f.branch_distance || g.branch_distance) {
    auto fb = f.branch_distance, gb = g.branch_distance;
    d.branch_distance = [fb, gb, gf](const Vec& x) {
      double v = std::numeric_limits<double>::infinity();
      if (gb) v = std::min(v, gb(x));
      if (fb) v = std::min(v, fb(gf(x)));
      return v;
    };
    d.branch_locus = g.branch_locus + " ∪ preimage of " + f.branch_locus;
  }
  d.probe_box = g.probe_box;
  return d;
}

/// Built-in map by spec: identity, translation(a,b,c), dilation(λ),
/// automorphism(a11,a12,a21,a22) (default diag(2,3)), radial(s,m,τ), winding.
inline MapDescriptor builtin_map(const std::string& spec, const HorizontalFrame& frame = frames::heisenberg())
{
  const std::string head = detail::head_of(spec);
  const auto args = detail::parse_args(spec, head);
  if (head == "identity") {
    if (!args.empty()) throw ConfigError("map", "identity takes no arguments");
    return maps::identity(frame);
  }
  if (head == "translation") {
    if (static_cast<int>(args.size()) != frame.dim()) throw ConfigError("map", "translation needs one coordinate per dimension");
    return maps::translation(frame, Eigen::Map<const Vec>(args.data(), static_cast<Eigen::Index>(args.size())));
  }
  if (head == "dilation") {
    if (args.size() != 1) throw ConfigError("map", "dilation takes one factor");
    return maps::dilation(frame, args[0]);
  }
  if (head == "automorphism") {
    if (!frame.is_group()) throw StructuralError("automorphism needs a group frame");
    const int r = frame.rank();
    Mat block = Mat::Identity(r, r);
    if (args.empty()) {
      if (r != 2) throw ConfigError("map", "default automorphism block is 2×2");
      block(0, 0) = 2.0;
      block(1, 1) = 3.0;
    } else {
      if (static_cast<int>(args.size()) != r * r) throw ConfigError("map", "automorphism needs rank² block entries");
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) block(i, j) = args[static_cast<std::size_t>(i * r + j)];
    }
    return maps::automorphism(frame, block);
  }
  if (head == "radial") {
    if (args.size() != 3 || args[1] != std::round(args[1])) throw ConfigError("map", "radial takes (r_scale, integer angle_multiplier, t_scale)");
    if (frame.name() != "heisenberg1") throw StructuralError("radial maps are defined on heisenberg1");
    return maps::radial(args[0], static_cast<int>(args[1]), args[2]);
  }
  if (head == "winding") {
    if (!args.empty()) throw ConfigError("map", "winding takes no arguments");
    if (frame.name() != "heisenberg1") throw StructuralError("winding is defined on heisenberg1");
    return maps::winding();
  }
  throw ConfigError("map", "unknown built-in map '" + spec + "'");
}

inline std::vector<std::string> builtin_map_names()
{
  return {"identity", "translation(a,b,c)", "dilation(lambda)", "automorphism(a11,a12,a21,a22)", "radial(r_scale,m,t_scale)", "winding"};
}

/// Low-discrepancy points of the probe box at distance ≥ exclusion from the
/// branch locus.
inline std::vector<Vec> random_probe_points(const MapDescriptor& d, int count, double exclusion = 0.0, std::uint64_t seed = 0)
{
  std::vector<Vec> out;
  if (count <= 0) return out;
  const int n = d.probe_box.dim();
  const int budget = 64 * count;
  // Scrambled start so different seeds give different sets.
  const auto shift = [&] {
    auto rng = make_rng(seed, 0x9b0beULL);
    Vec s(n);
    for (int i = 0; i < n; ++i) s[i] = uniform01(rng);
    return s;
  }();
  for (const Vec& u : sobol_points(n, budget)) {
    Vec s = u + shift;
    for (int i = 0; i < n; ++i) s[i] -= std::floor(s[i]);
    const Vec p = d.probe_box.lo + s.cwiseProduct(d.probe_box.hi - d.probe_box.lo);
    if (exclusion > 0.0 && d.branch_distance && d.branch_distance(p) < exclusion) continue;
    out.push_back(p);
    if (static_cast<int>(out.size()) == count) return out;
  }
  throw InsufficientPointsError("only " + std::to_string(out.size()) + " of " + std::to_string(count) +
                                " probe points clear the exclusion radius");
}

}  // namespace sublab
