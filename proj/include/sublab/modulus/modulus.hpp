#pragma once

/// @file
/// Discrete p-modulus: minimise Σ ρ_c^p |c| over grid densities subject to
/// ∫_γ ρ ds ≥ 1 for every curve of the family.

#include "sublab/modulus/curves.hpp"

namespace sublab {

/// Raised when every curve fell below the length floor. The modulus of an
/// empty family is 0 by convention; callers report it separately.
class EmptyFamilyError : public Error
{
public:
  using Error::Error;
};

struct ModulusOptions
{
  int max_outer = 60;
  int max_inner = 4000;
  double feasibility_tol = 1e-7;  ///< stop once max(1 − ∫ρ) falls below this
  double inner_tol = 1e-9;
  int workers = 1;
};

struct ModulusResult
{
  double value = 0.0;
  double p = 2.0;
  DensityGrid rho;
  double worst_violation = 0.0;       ///< after feasibility rescaling
  double raw_violation = 0.0;         ///< before rescaling
  double rescale_factor = 1.0;
  int iterations = 0;                 ///< projected-gradient steps in total
  int outer_iterations = 0;
  std::size_t curves = 0;
  std::size_t dropped = 0;
};

namespace detail {

/// y = A x, rows split across workers.
inline Vec row_products(const SparseRows& a, const Vec& x, int workers)
{
  if (workers <= 1) return a * x;
  const std::size_t chunks = static_cast<std::size_t>(workers) * 4;
  const Eigen::Index m = a.rows();
  const auto parts = parallel_map(chunks, workers, [&](std::size_t c) {
    const Eigen::Index lo = m * static_cast<Eigen::Index>(c) / static_cast<Eigen::Index>(chunks);
    const Eigen::Index hi = m * static_cast<Eigen::Index>(c + 1) / static_cast<Eigen::Index>(chunks);
    Vec y(hi - lo);
    for (Eigen::Index r = lo; r < hi; ++r) y[r - lo] = a.row(r).dot(x);
    return y;
  });
  Vec y(m);
  Eigen::Index pos = 0;
  for (const auto& part : parts) {
    y.segment(pos, part.size()) = part;
    pos += part.size();
  }
  return y;
}

inline double energy(const Vec& rho, double p, double cell)
{
  return cell * rho.array().pow(p).sum();
}

}  // namespace detail

/// Augmented Lagrangian on the curve constraints with accelerated projected
/// gradient (ρ ≥ 0) for the inner problems, then ρ is divided by the smallest
/// curve integral so the reported value belongs to an admissible density.
inline ModulusResult modulus_p(const CurveFamily& family, const DensityGrid& shape, double p, const ModulusOptions& opt = {})
{
  if (!(p >= 1.0)) throw DomainError("modulus exponent must be at least 1");
  if (family.empty())
    throw EmptyFamilyError("curve family is empty after the length floor (" + std::to_string(family.dropped()) +
                           " dropped); its modulus is 0 by convention");
  if (shape.dim() != family.dim()) throw StructuralError("grid and curve family dimensions differ");

  ModulusResult res{.p = p, .rho = shape};
  res.curves = family.size();
  res.dropped = family.dropped();
  const SparseRows a = integration_matrix(family, shape);
  const SparseRows at = a.transpose();
  const double cell = shape.cell_volume();
  const Eigen::Index n = shape.size();
  const Vec ones = Vec::Ones(a.rows());

  const Vec row_len = a * Vec::Ones(n);
  if (row_len.minCoeff() <= 0.0) throw StructuralError("a curve does not meet the density grid");
  const Vec rho0 = Vec::Constant(n, 1.0 / row_len.minCoeff());  // feasible start
  const double f0 = detail::energy(rho0, p, cell);

  // pow(0, 0) = 1, so p = 1 gives the constant gradient it should.
  auto grad_f = [&](const Vec& r) -> Vec { return (p * cell) * r.array().pow(p - 1.0).matrix(); };

  Vec rho = rho0;
  Vec lambda = Vec::Zero(a.rows());
  double c = f0 / std::max(1.0, static_cast<double>(a.rows())) * 10.0;
  double prev_viol = std::numeric_limits<double>::infinity();
  double lip = c;

  for (int outer = 0; outer < opt.max_outer; ++outer) {
    res.outer_iterations = outer + 1;
    auto phi = [&](const Vec& r, Vec* g) {
      const Vec s = (lambda + c * (ones - detail::row_products(a, r, opt.workers))).cwiseMax(0.0);
      if (g) *g = grad_f(r) - at * s;
      return detail::energy(r, p, cell) + s.squaredNorm() / (2.0 * c);
    };
    // FISTA with backtracking and gradient restart.
    Vec x = rho, y = rho, g;
    double t = 1.0;
    for (int it = 0; it < opt.max_inner; ++it) {
      ++res.iterations;
      const double fy = phi(y, &g);
      Vec xn;
      double fx;
      for (;;) {
        xn = (y - g / lip).cwiseMax(0.0);
        const Vec d = xn - y;
        fx = phi(xn, nullptr);
        const double dd = d.squaredNorm();
        // Slack covers rounding in fx − fy once the step is tiny.
        if (dd == 0.0 || fx <= fy + g.dot(d) + 0.5 * lip * dd + 1e-13 * std::max(1.0, std::abs(fy))) break;
        lip *= 2.0;
      }
      const double step = (xn - x).norm();
      const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      if ((y - xn).dot(xn - x) > 0.0) {
        y = xn;  // momentum points uphill: restart
        t = 1.0;
      } else {
        // Keep the extrapolated point in ρ ≥ 0: ρ^p is undefined below.
        y = (xn + ((t - 1.0) / tn) * (xn - x)).cwiseMax(0.0);
        t = tn;
      }
      x = xn;
      lip *= 0.9;
      if (step <= opt.inner_tol * std::max(1.0, x.norm())) break;
    }
    rho = x;
    const Vec integ = detail::row_products(a, rho, opt.workers);
    lambda = (lambda + c * (ones - integ)).cwiseMax(0.0);
    const double viol = std::max(0.0, (ones - integ).maxCoeff());
    if (viol <= opt.feasibility_tol && outer > 0) break;
    if (viol > 0.25 * prev_viol) {
      c *= 5.0;
      lip *= 5.0;
    }
    prev_viol = viol;
  }

  Vec integ = a * rho;
  res.raw_violation = std::max(0.0, 1.0 - integ.minCoeff());
  if (integ.minCoeff() <= 0.0) {
    rho += rho0;
    integ = a * rho;
  }
  res.rescale_factor = 1.0 / integ.minCoeff();
  rho *= res.rescale_factor;
  res.rho.values() = rho;
  res.worst_violation = std::max(0.0, 1.0 - (a * rho).minCoeff());
  res.value = detail::energy(rho, p, cell);
  return res;
}

/// Grid spanning the family's chart bounds.
inline ModulusResult modulus_p(const CurveFamily& family, const std::vector<int>& cells, double p, const ModulusOptions& opt = {})
{
  return modulus_p(family, DensityGrid(family.bounds(), cells), p, opt);
}

}  // namespace sublab
