#pragma once

/// @file
/// Pansu differentials by blow-up: F_ε = δ_{1/ε} ∘ f ∘ δ_ε in graded charts at
/// o and f(o), fitted on the first layer and extended by bracket compatibility.

#include "sublab/qr/map_model.hpp"
#include "sublab/qr/morphism.hpp"

namespace sublab {

class NonDifferentiableError : public Error
{
public:
  NonDifferentiableError(const std::string& what, std::vector<double> eps, std::vector<double> residuals)
      : Error(what), eps_(std::move(eps)), residuals_(std::move(residuals))
  {
  }
  const std::vector<double>& eps() const { return eps_; }
  const std::vector<double>& residuals() const { return residuals_; }

private:
  std::vector<double> eps_, residuals_;
};

struct PansuOptions
{
  std::vector<double> eps = {0.1, 0.05, 0.025, 0.0125, 0.00625};
  int samples = 64;
  /// Residuals below this are rounding noise and need not decrease further.
  double residual_floor = 1e-9;
  /// Fit the extrapolation (ε_{i−1}F_{ε_i} − ε_i F_{ε_{i−1}})/(ε_{i−1} − ε_i)
  /// of consecutive rungs, which removes the O(ε) term of a smooth blow-up.
  bool richardson = true;
};

struct PansuFit
{
  GradedMorphism morphism;          ///< fit at the smallest ε
  std::vector<double> eps;           ///< rungs with a fit (all but the first when extrapolating)
  std::vector<double> residuals;     ///< max |F_ε(v) − Av| over homogeneous-unit v
  std::vector<double> raw_residuals; ///< same for the plain blow-up, every rung
  std::vector<Mat> blocks;           ///< first-layer fit per rung
};

/// Graded blow-up of f at o: z ↦ δ_{1/ε} φ_{f(o)}(f(φ_o⁻¹(δ_ε z))).
class BlowUp
{
public:
  BlowUp(const SmoothMapModel& f, const Vec& o) : f_(f), src_(*f.domain, o), tgt_(*f.target, f(o)) {}

  Vec operator()(const Vec& z, double eps) const
  {
    const Vec x = src_.from_local(dilate(src_.weights(), eps, z));
    return dilate(tgt_.weights(), 1.0 / eps, tgt_.to_local(f_(x)));
  }

  const LocalChart& source() const { return src_; }
  const LocalChart& target() const { return tgt_; }

private:
  const SmoothMapModel& f_;
  LocalChart src_, tgt_;
};

/// Fits the Pansu differential of f at o. Throws NonDifferentiableError when
/// the residual ladder does not decrease.
inline PansuFit pansu_differential(const SmoothMapModel& f, const Vec& o, const PansuOptions& opt = {})
{
  if (opt.eps.empty()) throw ConfigError("eps", "ladder is empty");
  if (opt.samples < 2) throw ConfigError("samples", "need at least 2");
  const BlowUp blow(f, o);
  const auto& sw = blow.source().weights();
  const auto src_alg = blow.source().algebra();
  const auto tgt_alg = blow.target().algebra();
  const int n = static_cast<int>(sw.size());
  const int k = src_alg->rank();
  const int kt = tgt_alg->rank();

  const auto horiz = sphere_directions(k, opt.samples);
  const HomogeneousNorm hn{NormKind::SumPower, sw};
  std::vector<Vec> unit;
  for (Vec v : sphere_directions(n, opt.samples)) unit.push_back(v / hn(v));
  for (const auto& h : horiz) {
    Vec v = Vec::Zero(n);
    v.head(k) = h;
    unit.push_back(v);
  }

  // Blow-up values on the horizontal and homogeneous-unit samples, per ε.
  const std::size_t ne = opt.eps.size();
  std::vector<std::vector<Vec>> fh(ne), fu(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    for (const auto& h : horiz) {
      Vec v = Vec::Zero(n);
      v.head(k) = h;
      fh[e].push_back(blow(v, opt.eps[e]));
    }
    for (const auto& v : unit) fu[e].push_back(blow(v, opt.eps[e]));
  }

  // Fits the first layer to the given values and measures the worst deviation.
  auto fit_one = [&](const std::vector<Vec>& hv, const std::vector<Vec>& uv, double& res) {
    Mat x(k, static_cast<Eigen::Index>(horiz.size())), y(kt, static_cast<Eigen::Index>(horiz.size()));
    for (std::size_t j = 0; j < horiz.size(); ++j) {
      x.col(static_cast<Eigen::Index>(j)) = horiz[j];
      y.col(static_cast<Eigen::Index>(j)) = hv[j].head(kt);
    }
    const Mat m = x.transpose().colPivHouseholderQr().solve(y.transpose()).transpose();
    auto a = GradedMorphism::from_first_layer(src_alg, tgt_alg, m, 1e-6);
    res = 0.0;
    for (std::size_t j = 0; j < unit.size(); ++j) res = std::max(res, (uv[j] - a.apply(unit[j])).norm());
    return a;
  };

  PansuFit fit;
  auto flag = [&](const std::string& why) { throw NonDifferentiableError(why, fit.eps, fit.residuals); };
  for (std::size_t e = 0; e < ne; ++e) {
    double res = 0.0;
    try {
      fit_one(fh[e], fu[e], res);
    } catch (const StructuralError&) {
      res = std::numeric_limits<double>::infinity();
    }
    fit.raw_residuals.push_back(res);
  }
  const bool extrapolate = opt.richardson && ne >= 2;
  for (std::size_t e = extrapolate ? 1 : 0; e < ne; ++e) {
    std::vector<Vec> hv = fh[e], uv = fu[e];
    if (extrapolate) {
      // Linear extrapolation to ε = 0 from the previous rung.
      const double a = opt.eps[e - 1], b = opt.eps[e];
      for (std::size_t j = 0; j < hv.size(); ++j) hv[j] = (a * fh[e][j] - b * fh[e - 1][j]) / (a - b);
      for (std::size_t j = 0; j < uv.size(); ++j) uv[j] = (a * fu[e][j] - b * fu[e - 1][j]) / (a - b);
    }
    fit.eps.push_back(opt.eps[e]);
    double res = 0.0;
    try {
      fit.morphism = fit_one(hv, uv, res);
    } catch (const StructuralError&) {
      fit.residuals.push_back(std::numeric_limits<double>::infinity());
      flag("fitted first layer does not extend to a graded morphism");
    }
    fit.residuals.push_back(res);
    fit.blocks.push_back(fit.morphism.first_layer());
  }
  for (std::size_t i = 1; i < fit.residuals.size(); ++i) {
    const double r = fit.residuals[i];
    if (!std::isfinite(r) || (r > opt.residual_floor && r >= fit.residuals[i - 1]))
      flag("blow-up residuals do not decrease along the ladder");
  }
  return fit;
}

}  // namespace sublab
