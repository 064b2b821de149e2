#pragma once

/// @file
/// Volume-ratio Jacobians, preimage counting, the area formula cross-check
/// and the local injectivity scan for branch points.

#include <atomic>

#include "sublab/metric/volume.hpp"
#include "sublab/qr/dilatation.hpp"

namespace sublab {

// --- Jacobian by image volume ------------------------------------------------

struct JacobianOptions
{
  long samples = 20000;       ///< target-box samples per radius
  long ball_samples = 200000; ///< for the reference ball volume
  int sphere_samples = 64;    ///< ball samples used to size the target box and seed Newton
  int starts = 3;             ///< Newton starts per target sample (nearest ball samples)
  double safety = 1.25;
  double failure_limit = 0.01;
  std::uint64_t seed = 0;
  int workers = 1;
  NewtonOptions newton;
  /// Ball membership of roots; restarts stop once d ≤ r or d > 1.5 r is settled.
  DistanceOptions distance = fast_distance_options();
};

struct JacobianStep
{
  double r = 0.0;
  double image_volume = 0.0;
  double ball_volume = 0.0;
  double ratio = 0.0;
  double std_error = 0.0;
  long hits = 0;
  long failures = 0;
};

struct JacobianEstimate
{
  Vec center;
  std::vector<JacobianStep> steps;
  double J = 0.0;          ///< mean over the tail of the ladder
  double error = 0.0;      ///< half-spread of the tail plus the largest standard error
  bool unreliable = false; ///< root-finder failures above the limit
};

namespace detail {

/// Reference ball volumes down a ladder. Group frames scale one unit-ball
/// estimate by r^Q; other frames are estimated per radius.
inline std::vector<double> ball_volumes(const HorizontalFrame& frame, const Vec& x, const std::vector<double>& radii, long samples,
                                        std::uint64_t seed, int workers)
{
  BallVolumeOptions bo;
  bo.samples = samples;
  bo.seed = seed;
  bo.workers = workers;
  std::vector<double> out;
  if (frame.is_group()) {
    const double unit = ball_volume(frame, Vec::Zero(frame.dim()), 1.0, bo).volume;
    const int q = homogeneous_dimension(*frame.algebra());
    for (double r : radii) out.push_back(unit * std::pow(r, q));
    return out;
  }
  for (std::size_t i = 0; i < radii.size(); ++i) {
    bo.seed = seed + i;
    out.push_back(ball_volume(frame, x, radii[i], bo).volume);
  }
  return out;
}

}  // namespace detail

/// Vol(f(B(x,r)))/Vol(B(x,r)) along r0·2^{−i}. Image volume is the Lebesgue
/// measure in the target chart at f(x); a target sample counts when damped
/// Newton finds a preimage inside the ball.
inline JacobianEstimate jacobian_volume_ratio(const SmoothMapModel& f, const Vec& x, double r0, int k, const JacobianOptions& opt = {})
{
  const auto radii = detail::ladder(r0, k);
  // Sample points only seed Newton and size the box, so loose spheres suffice.
  // 4·dim samples at least, so the dilation rays reach every coordinate axis.
  const BallSampler sampler(f.domain, std::max(opt.sphere_samples, 4 * f.domain->dim()), {.mode = SphereMode::Full, .tolerance = 0.05, .distance = opt.distance});
  const LocalChart tchart(*f.target, f(x));
  const auto vols = detail::ball_volumes(*f.domain, x, radii, opt.ball_samples, opt.seed ^ 0xb0b0ULL, opt.workers);
  const int n = f.target->dim();

  JacobianEstimate est;
  est.center = x;
  for (std::size_t ri = 0; ri < radii.size(); ++ri) {
    const double r = radii[ri];
    DistanceOptions dopt = opt.distance;
    dopt.stop_below = r;
    dopt.stop_above = 1.5 * r;
    const auto dist = distance_function(*f.domain, dopt);
    const auto pts = sampler.at(x, r);
    std::vector<Vec> starts = pts.sphere;
    starts.insert(starts.end(), pts.interior.begin(), pts.interior.end());
    starts.push_back(x);
    std::vector<Vec> images;
    Vec lo = Vec::Constant(n, std::numeric_limits<double>::infinity()), hi = -lo;
    for (const auto& s : starts) {
      images.push_back(tchart.to_local(f(s)));
      lo = lo.cwiseMin(images.back());
      hi = hi.cwiseMax(images.back());
    }
    // Cheap rejection of roots far from x: |z_h| > L·r in graded coordinates
    // at x certifies d(x, root) > r (L = 1 on groups).
    const LocalChart dchart(*f.domain, x);
    const int k1 = f.domain->rank();
    double lip = 1.0;
    if (!dchart.exact_group()) {
      const auto pc = privileged_chart(*f.domain, x);
      Vec zlo = Vec::Constant(f.domain->dim(), std::numeric_limits<double>::infinity()), zhi = -zlo;
      for (const auto& s : starts) {
        const Vec z = pc.to_privileged(s);
        zlo = zlo.cwiseMin(z);
        zhi = zhi.cwiseMax(z);
      }
      const Vec zm = 0.5 * (zlo + zhi), zh = 0.75 * (zhi - zlo);
      lip = detail::first_layer_lipschitz(pc, Box{zm - zh, zm + zh}, k1);
    }
    auto in_ball = [&](const Vec& root) { return dchart.to_local(root).head(k1).norm() <= lip * r && dist(x, root) <= r; };
    const Vec mid = 0.5 * (lo + hi);
    const Vec half = (0.5 * opt.safety * (hi - lo)).cwiseMax(1e-12);
    const Box box{mid - half, mid + half};

    const long chunks = (opt.samples + detail::kVolumeChunk - 1) / detail::kVolumeChunk;
    const auto counts = parallel_map(static_cast<std::size_t>(chunks), opt.workers, [&](std::size_t ci) {
      auto rng = make_rng(opt.seed, 0x1ac0ULL + 1000 * ri + ci);
      const long begin = static_cast<long>(ci) * detail::kVolumeChunk;
      const long count = std::min(detail::kVolumeChunk, opt.samples - begin);
      std::pair<long, long> hf{0, 0};
      std::vector<std::pair<double, std::size_t>> order(images.size());
      for (long s = 0; s < count; ++s) {
        const Vec z = box.sample(rng);
        const Vec y = tchart.from_local(z);
        for (std::size_t j = 0; j < images.size(); ++j) order[j] = {(images[j] - z).squaredNorm(), j};
        const auto nth = std::min<std::size_t>(static_cast<std::size_t>(opt.starts), order.size());
        std::partial_sort(order.begin(), order.begin() + static_cast<long>(nth), order.end());
        bool converged = false, hit = false;
        for (std::size_t j = 0; j < nth && !hit; ++j) {
          const auto root = damped_newton(f, y, starts[order[j].second], opt.newton);
          if (!root) continue;
          converged = true;
          hit = in_ball(*root);
        }
        hf.first += hit;
        hf.second += !converged;
      }
      return hf;
    });
    JacobianStep st;
    st.r = r;
    for (const auto& [h, fl] : counts) {
      st.hits += h;
      st.failures += fl;
    }
    const double frac = static_cast<double>(st.hits) / static_cast<double>(opt.samples);
    st.image_volume = box.volume() * frac;
    st.ball_volume = vols[ri];
    st.ratio = st.image_volume / st.ball_volume;
    st.std_error = box.volume() * std::sqrt(frac * (1.0 - frac) / static_cast<double>(opt.samples)) / st.ball_volume;
    est.unreliable = est.unreliable || static_cast<double>(st.failures) > opt.failure_limit * static_cast<double>(opt.samples);
    est.steps.push_back(st);
  }
  std::vector<double> ratios;
  double se = 0.0;
  for (const auto& s : est.steps) ratios.push_back(s.ratio);
  const std::size_t start = ratios.size() / 2;
  double sum = 0.0;
  for (std::size_t i = start; i < ratios.size(); ++i) {
    sum += ratios[i];
    se = std::max(se, est.steps[i].std_error);
  }
  est.J = sum / static_cast<double>(ratios.size() - start);
  const auto tail = tail_stats(ratios);
  est.error = 0.5 * (tail.max - tail.min) + se;
  return est;
}

// --- Multiplicity --------------------------------------------------------------

struct MultiplicityOptions
{
  int cells_per_axis = 4;
  int starts_per_cell = 2;
  double dedupe_radius = 1e-6;
  NewtonOptions newton;
};

struct MultiplicityResult
{
  int count = 0;
  std::vector<Vec> roots;
  int starts = 0;
  int diverged_cells = 0;  ///< cells where every start failed
  bool incomplete() const { return diverged_cells > 0; }
};

/// N(y, f, A): distinct roots of f(x) = y in the box A by multi-start damped
/// Newton, one batch of starts per grid cell.
inline MultiplicityResult multiplicity_count(const SmoothMapModel& f, const Vec& y, const Box& a, const MultiplicityOptions& opt = {})
{
  const int n = a.dim();
  if (opt.cells_per_axis < 1 || opt.starts_per_cell < 1) throw ConfigError("multiplicity", "cells and starts must be positive");
  const auto offsets = sobol_points(n, opt.starts_per_cell);
  const Vec cell = (a.hi - a.lo) / opt.cells_per_axis;
  MultiplicityResult out;
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  for (;;) {
    Vec base(n);
    for (int i = 0; i < n; ++i) base[i] = a.lo[i] + idx[static_cast<std::size_t>(i)] * cell[i];
    bool any = false;
    for (int s = 0; s < opt.starts_per_cell; ++s) {
      // Offsets kept off the cell faces so starts never sit on a symmetry plane.
      const Vec u = 0.1 + 0.8 * offsets[static_cast<std::size_t>(s)].array();
      const auto root = damped_newton(f, y, base + u.cwiseProduct(cell), opt.newton);
      ++out.starts;
      if (!root) continue;
      any = true;
      if (a.contains(*root)) add_distinct_root(out.roots, *root, opt.dedupe_radius);
    }
    out.diverged_cells += !any;
    int d = n - 1;
    while (d >= 0 && ++idx[static_cast<std::size_t>(d)] == opt.cells_per_axis) idx[static_cast<std::size_t>(d--)] = 0;
    if (d < 0) break;
  }
  out.count = static_cast<int>(out.roots.size());
  return out;
}

// --- Area formula ----------------------------------------------------------------

struct AreaOptions
{
  long samples = 20000;       ///< Monte Carlo points on each side
  int jacobian_cells = 2;     ///< coarse J cache: cells per axis
  double jacobian_radius = 0.05;
  int jacobian_ladder = 2;
  JacobianOptions jacobian{.samples = 4000, .ball_samples = 50000};
  MultiplicityOptions multiplicity{.cells_per_axis = 2, .starts_per_cell = 1};
  /// Target region for the right-hand side; empty = bounding box of f(A).
  std::optional<Box> target;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct AreaCheck
{
  double lhs = 0.0;  ///< ∫_A u(f(x)) J_f(x) dx
  double rhs = 0.0;  ///< ∫ u(y) N(y, f, A) dy
  double gap = 0.0;  ///< |lhs − rhs| / max(|lhs|, |rhs|)
  double lhs_error = 0.0, rhs_error = 0.0;
  std::vector<double> cell_jacobians;
  bool incomplete = false;  ///< a multiplicity scan had divergent cells
  bool unreliable = false;  ///< a Jacobian estimate flagged root failures
};

namespace detail {

struct MeanAndError
{
  double mean = 0.0, error = 0.0;
};

inline MeanAndError box_integral(const Box& box, long samples, std::uint64_t seed, std::uint64_t stream, int workers,
                                 const std::function<double(const Vec&)>& g)
{
  const long chunks = (samples + kVolumeChunk - 1) / kVolumeChunk;
  const auto parts = parallel_map(static_cast<std::size_t>(chunks), workers, [&](std::size_t ci) {
    auto rng = make_rng(seed, stream + ci);
    const long begin = static_cast<long>(ci) * kVolumeChunk;
    const long count = std::min(kVolumeChunk, samples - begin);
    std::pair<double, double> s{0.0, 0.0};
    for (long i = 0; i < count; ++i) {
      const double v = g(box.sample(rng));
      s.first += v;
      s.second += v * v;
    }
    return s;
  });
  double s1 = 0.0, s2 = 0.0;
  for (const auto& [a, b] : parts) {
    s1 += a;
    s2 += b;
  }
  const double n = static_cast<double>(samples);
  const double m = s1 / n;
  const double var = std::max(0.0, s2 / n - m * m);
  return {box.volume() * m, box.volume() * std::sqrt(var / n)};
}

}  // namespace detail

/// Both sides of the area formula on A, with Lebesgue measure of the charts.
inline AreaCheck area_formula_check(const SmoothMapModel& f, const Box& a, const std::function<double(const Vec&)>& u, const AreaOptions& opt = {})
{
  const int n = a.dim();
  const int cells = opt.jacobian_cells;
  if (cells < 1) throw ConfigError("jacobian_cells", "must be positive");
  AreaCheck out;
  // Coarse J cache at cell centres.
  long total = 1;
  for (int i = 0; i < n; ++i) total *= cells;
  const Vec w = (a.hi - a.lo) / cells;
  auto centre_of = [&](long c) {
    Vec p(n);
    for (int i = n - 1; i >= 0; --i) {
      p[i] = a.lo[i] + (static_cast<double>(c % cells) + 0.5) * w[i];
      c /= cells;
    }
    return p;
  };
  JacobianOptions jo = opt.jacobian;
  jo.seed = opt.seed;
  for (long c = 0; c < total; ++c) {
    const auto j = jacobian_volume_ratio(f, centre_of(c), opt.jacobian_radius, opt.jacobian_ladder, jo);
    out.cell_jacobians.push_back(j.J);
    out.unreliable = out.unreliable || j.unreliable;
  }
  auto cell_of = [&](const Vec& x) {
    long c = 0;
    for (int i = 0; i < n; ++i) c = c * cells + std::clamp(static_cast<long>((x[i] - a.lo[i]) / w[i]), 0L, static_cast<long>(cells - 1));
    return c;
  };
  const auto lhs = detail::box_integral(a, opt.samples, opt.seed, 0xa1ULL << 20, opt.workers, [&](const Vec& x) {
    return u(f(x)) * out.cell_jacobians[static_cast<std::size_t>(cell_of(x))];
  });

  Box target;
  if (opt.target) {
    target = *opt.target;
  } else {
    const int tn = f.target->dim();
    Vec lo = Vec::Constant(tn, std::numeric_limits<double>::infinity()), hi = -lo;
    for (const Vec& s : sobol_points(n, 4096)) {
      const Vec y = f(a.lo + s.cwiseProduct(a.hi - a.lo));
      lo = lo.cwiseMin(y);
      hi = hi.cwiseMax(y);
    }
    const Vec pad = 0.05 * (hi - lo);
    target = {lo - pad, hi + pad};
  }
  std::atomic<bool> incomplete{false};
  const auto rhs = detail::box_integral(target, opt.samples, opt.seed, 0xa2ULL << 20, opt.workers, [&](const Vec& y) {
    const double uy = u(y);
    if (uy == 0.0) return 0.0;
    const auto m = multiplicity_count(f, y, a, opt.multiplicity);
    if (m.incomplete()) incomplete = true;
    return uy * m.count;
  });
  out.lhs = lhs.mean;
  out.lhs_error = lhs.error;
  out.rhs = rhs.mean;
  out.rhs_error = rhs.error;
  out.incomplete = incomplete;
  const double scale = std::max(std::abs(out.lhs), std::abs(out.rhs));
  out.gap = scale > 0.0 ? std::abs(out.lhs - out.rhs) / scale : 0.0;
  return out;
}

// --- Local injectivity scan ------------------------------------------------------

struct InjectivityOptions
{
  int grid = 17;              ///< points per axis
  double ball_radius = 0.0;   ///< 0: half the smallest grid spacing
  int sphere_samples = 16;
  int probes = 4;             ///< target values tested per grid point
  int ladder = 3;
  double shrink_ratio = 0.25; ///< flag when l_f/r at the end of the ladder drops below this fraction of its start
  int workers = 1;
  NewtonOptions newton;
};

struct BranchCandidate
{
  Vec point;
  int multiplicity = 1;
  double l_ratio_start = 0.0;
  double l_ratio_end = 0.0;
  bool degenerate = false;
};

struct InjectivityScan
{
  Box region;
  int grid = 0;
  double ball_radius = 0.0;
  std::vector<BranchCandidate> flagged;
  long scanned = 0;
};

/// Candidate branch points: grid points where l_f(x, r)/r collapses along a
/// short ladder, or where some value has two preimages inside a small ball.
/// An indicator, not a certificate.
inline InjectivityScan local_injectivity_scan(const SmoothMapModel& f, const Box& region, const InjectivityOptions& opt = {})
{
  if (opt.grid < 2) throw ConfigError("grid", "need at least 2 points per axis");
  const int n = region.dim();
  const Vec h = (region.hi - region.lo) / (opt.grid - 1);
  InjectivityScan scan;
  scan.region = region;
  scan.grid = opt.grid;
  scan.ball_radius = opt.ball_radius > 0.0 ? opt.ball_radius : 0.5 * h.minCoeff();
  const double rb = scan.ball_radius;

  // 4·dim samples at least, so the dilation rays reach every coordinate axis.
  const BallSampler sampler(f.domain, std::max(opt.sphere_samples, 4 * f.domain->dim()), {.mode = SphereMode::Full}, {0.5});
  const auto dom = distance_function(*f.domain);
  const auto tgt = distance_function(*f.target);
  long total = 1;
  for (int i = 0; i < n; ++i) total *= opt.grid;
  scan.scanned = total;

  auto point_of = [&](long c) {
    Vec p(n);
    for (int i = n - 1; i >= 0; --i) {
      p[i] = region.lo[i] + static_cast<double>(c % opt.grid) * h[i];
      c /= opt.grid;
    }
    return p;
  };

  const auto results = parallel_map(static_cast<std::size_t>(total), opt.workers, [&](std::size_t ci) -> std::optional<BranchCandidate> {
    const Vec x = point_of(static_cast<long>(ci));
    BranchCandidate cand;
    cand.point = x;
    const Vec fx = f(x);
    // Lower dilatation ratio along the ladder.
    std::vector<double> lr;
    BallSampler::Points outer;
    for (int i = 0; i < opt.ladder; ++i) {
      const double r = rb * std::pow(0.5, i);
      auto pts = sampler.at(x, r);
      double l = std::numeric_limits<double>::infinity(), big = 0.0;
      for (const auto& y : pts.sphere) {
        const double d = tgt(fx, f(y));
        l = std::min(l, d);
        big = std::max(big, d);
      }
      if (l < 3.0 * detail::noise_floor(*f.target, {}, big)) cand.degenerate = true;
      lr.push_back(l / r);
      if (i == 0) outer = std::move(pts);
    }
    cand.l_ratio_start = lr.front();
    cand.l_ratio_end = lr.back();
    const bool collapsed = cand.degenerate || lr.back() < opt.shrink_ratio * lr.front();

    // Two preimages of one value inside B(x, rb).
    std::vector<Vec> starts = outer.sphere;
    starts.insert(starts.end(), outer.interior.begin(), outer.interior.end());
    const int probes = std::min<int>(opt.probes, static_cast<int>(outer.interior.size()));
    for (int pi = 0; pi < probes && cand.multiplicity < 2; ++pi) {
      const std::size_t step = outer.interior.size() / static_cast<std::size_t>(probes);
      const Vec y = f(outer.interior[static_cast<std::size_t>(pi) * step]);
      std::vector<Vec> roots;
      for (const auto& s : starts) {
        const auto root = damped_newton(f, y, s, opt.newton);
        if (root && dom(x, *root) <= rb) add_distinct_root(roots, *root, 1e-6);
      }
      cand.multiplicity = std::max(cand.multiplicity, static_cast<int>(roots.size()));
    }
    if (collapsed || cand.multiplicity > 1) return cand;
    return std::nullopt;
  });
  for (const auto& r : results)
    if (r) scan.flagged.push_back(*r);
  return scan;
}

}  // namespace sublab
