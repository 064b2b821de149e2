#pragma once

/// @file
/// K_O-inequality check: Mod_Q(Γ) against ∫ N(y, f, Ω) ρ^Q for a density ρ
/// admissible for the image family f(Γ).

#include "sublab/modulus/modulus.hpp"

namespace sublab {

/// ρ failed the admissibility check on some image curves.
class AdmissibilityError : public Error
{
public:
  AdmissibilityError(std::vector<std::size_t> curves, double worst)
      : Error(message(curves, worst)), curves_(std::move(curves)), worst_(worst)
  {}
  const std::vector<std::size_t>& curves() const { return curves_; }
  double worst() const { return worst_; }

private:
  static std::string message(const std::vector<std::size_t>& c, double worst)
  {
    std::string s = "density is not admissible for " + std::to_string(c.size()) + " image curve(s) (min integral " +
                    std::to_string(worst) + "):";
    for (std::size_t k = 0; k < c.size() && k < 20; ++k) s += " " + std::to_string(c[k]);
    if (c.size() > 20) s += " ...";
    return s;
  }
  std::vector<std::size_t> curves_;
  double worst_;
};

using PointMap = std::function<Vec(const Vec&)>;
/// Number of preimages of y inside the domain Ω.
using MultiplicityFn = std::function<int(const Vec&)>;

/// Image polylines f(γ), each segment subdivided `refine` times before mapping.
inline CurveFamily image_family(const PointMap& f, const CurveFamily& family, const Box& target, int refine = 8)
{
  if (refine < 1) throw ConfigError("refine", "must be at least 1");
  CurveFamily out(target, family.metric(), family.horizontal_dims(), family.length_floor());
  for (const auto& vs : family.curves()) {
    std::vector<Vec> img;
    img.push_back(f(vs.front()));
    for (std::size_t k = 1; k < vs.size(); ++k)
      for (int s = 1; s <= refine; ++s) img.push_back(f(vs[k - 1] + (static_cast<double>(s) / refine) * (vs[k] - vs[k - 1])));
    out.add(std::move(img));
  }
  return out;
}

struct KoOptions
{
  int refine = 8;
  int samples_per_cell = 8;
  std::uint64_t seed = 0;
  double admissibility_tol = 1e-3;
  ModulusOptions modulus;
};

struct KoReport
{
  double Q = 0.0;
  double modulus = 0.0;   ///< Mod_Q(Γ) on the domain grid
  double weighted = 0.0;  ///< ∫ N ρ^Q
  double implied_K = 0.0;
  double min_image_integral = 0.0;
  double mean_multiplicity = 0.0;  ///< over cells where ρ > 0
  ModulusResult domain;
};

/// Implied K = Mod_Q(Γ) / ∫ N(y) ρ(y)^Q dy. The integral is stratified Monte
/// Carlo: ρ is constant per cell, N is averaged over points sampled in it.
inline KoReport ko_check(const PointMap& f, const CurveFamily& family, const std::vector<int>& domain_cells, const DensityGrid& rho,
                         double Q, const MultiplicityFn& multiplicity, const KoOptions& opt = {})
{
  const auto images = image_family(f, family, rho.bounds(), opt.refine);
  const Vec integ = line_integrals(images, rho);
  std::vector<std::size_t> bad;
  for (Eigen::Index i = 0; i < integ.size(); ++i)
    if (integ[i] < 1.0 - opt.admissibility_tol) bad.push_back(static_cast<std::size_t>(i));
  if (!bad.empty()) throw AdmissibilityError(bad, integ.minCoeff());

  KoReport rep;
  rep.Q = Q;
  rep.min_image_integral = integ.minCoeff();
  rep.domain = modulus_p(family, domain_cells, Q, opt.modulus);
  rep.modulus = rep.domain.value;

  const double cell = rho.cell_volume();
  double nsum = 0.0;
  long ncells = 0;
  for (Eigen::Index c = 0; c < rho.size(); ++c) {
    const double v = rho.values()[c];
    if (v <= 0.0) continue;
    auto rng = make_rng(opt.seed, 0xc0ULL + static_cast<std::uint64_t>(c));
    const Box b = rho.cell_box(c);
    long count = 0;
    for (int s = 0; s < opt.samples_per_cell; ++s) count += multiplicity(b.sample(rng));
    const double mean_n = static_cast<double>(count) / opt.samples_per_cell;
    rep.weighted += mean_n * std::pow(v, Q) * cell;
    nsum += mean_n;
    ++ncells;
  }
  rep.mean_multiplicity = ncells ? nsum / static_cast<double>(ncells) : 0.0;
  if (!(rep.weighted > 0.0)) throw DomainError("∫ N ρ^Q vanished; the image family misses the support of N");
  rep.implied_K = rep.modulus / rep.weighted;
  return rep;
}

}  // namespace sublab
