#include <gtest/gtest.h>

#include <numbers>

#include "sublab/metric/volume.hpp"

using namespace sublab;

namespace {

Vec v3(double a, double b, double c)
{
  Vec v(3);
  v << a, b, c;
  return v;
}

DistanceOptions transcription()
{
  DistanceOptions o;
  o.method = DistanceMethod::Transcription;
  return o;
}

double tr_dist(const HorizontalFrame& f, const Vec& p, const Vec& q)
{
  return cc_distance(f, p, q, transcription()).value;
}

}  // namespace

// ---------------------------------------------------------------------------
// Closed form

TEST(HeisenbergClosedForm, SpecialValues)
{
  EXPECT_DOUBLE_EQ(heisenberg_distance(Vec::Zero(3), v3(1, 0, 0)), 1.0);
  for (double tau : {0.25, 1.0, 4.0})
    EXPECT_NEAR(heisenberg_distance(Vec::Zero(3), v3(0, 0, tau)), 2 * std::sqrt(std::numbers::pi * tau), 1e-14);
  // Continuity toward the vertical axis.
  EXPECT_NEAR(heisenberg_distance(Vec::Zero(3), v3(1e-9, 0, 1)), 2 * std::sqrt(std::numbers::pi), 1e-6);
}

TEST(HeisenbergClosedForm, ArcGeodesicOracle)
{
  // Unit-speed control rotating at rate κ traces a circular arc; its lift is a
  // geodesic while the turned angle κL stays below 2π, so d(0, γ(L)) = L.
  const auto f = frames::heisenberg();
  std::mt19937_64 rng = make_rng(21, 0);
  for (int k = 0; k < 12; ++k) {
    const double phi = uniform(rng, 0, 2 * std::numbers::pi);
    const double kappa = uniform(rng, -3, 3);
    const double len = uniform(rng, 0.2, 1.9) * std::numbers::pi / std::max(std::abs(kappa), 1.0);
    const ControlFn u = [&](double t) {
      Vec c(2);
      c << std::cos(phi + kappa * t), std::sin(phi + kappa * t);
      return c;
    };
    const Vec end = flow(f, u, Vec::Zero(3), len);
    EXPECT_NEAR(heisenberg_distance(Vec::Zero(3), end), len, 1e-7 * len) << "kappa " << kappa;
  }
}

TEST(HeisenbergClosedForm, MetricProperties)
{
  const auto g = algebras::heisenberg();
  std::mt19937_64 rng = make_rng(22, 0);
  for (int k = 0; k < 200; ++k) {
    const Vec p = gaussian_vec(rng, 3), q = gaussian_vec(rng, 3), m = gaussian_vec(rng, 3), h = gaussian_vec(rng, 3);
    const double d = heisenberg_distance(p, q);
    EXPECT_NEAR(d, heisenberg_distance(q, p), 1e-12 * d);
    EXPECT_LE(d, heisenberg_distance(p, m) + heisenberg_distance(m, q) + 1e-12);
    EXPECT_NEAR(heisenberg_distance(group_product(g, h, p), group_product(g, h, q)), d, 1e-10 * d);
    const double lam = uniform(rng, 0.1, 3);
    EXPECT_NEAR(heisenberg_distance(dilate(g, lam, p), dilate(g, lam, q)), lam * d, 1e-10 * lam * d);
  }
}

// ---------------------------------------------------------------------------
// Transcription

TEST(Transcription, StraightHorizontalSegment)
{
  const auto r = cc_distance(frames::heisenberg(), Vec::Zero(3), v3(1, 0, 0), transcription());
  EXPECT_NEAR(r.value, 1.0, 1e-3);
  EXPECT_LT(r.endpoint_error, 1e-6);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.controls.rows(), 64);
}

TEST(Transcription, SamePointIsZero)
{
  Vec p(4);
  p << 0.2, 0.1, -0.4, 1.0;
  EXPECT_EQ(cc_distance(frames::engel(), p, p, transcription()).value, 0.0);
  EXPECT_EQ(cc_distance(frames::heisenberg(), v3(1, 2, 3), v3(1, 2, 3), transcription()).value, 0.0);
}

TEST(Transcription, VerticalHomogeneityLaw)
{
  const auto f = frames::heisenberg();
  std::vector<double> d;
  for (double tau : {0.25, 1.0, 4.0}) d.push_back(tr_dist(f, Vec::Zero(3), v3(0, 0, tau)));
  EXPECT_NEAR(d[1] / d[0], 2.0, 0.04);
  EXPECT_NEAR(d[2] / d[1], 2.0, 0.04);
  // The law's constant agrees with the closed form.
  EXPECT_NEAR(d[1], 2 * std::sqrt(std::numbers::pi), 0.01 * d[1]);
}

TEST(Transcription, AgreesWithClosedFormUpperBound)
{
  const auto f = frames::heisenberg();
  std::mt19937_64 rng = make_rng(31, 0);
  for (int k = 0; k < 10; ++k) {
    const Vec p = gaussian_vec(rng, 3), q = gaussian_vec(rng, 3);
    const auto r = cc_distance(f, p, q, transcription());
    const double exact = heisenberg_distance(p, q);
    EXPECT_TRUE(r.converged);
    EXPECT_GE(r.value, exact * (1 - 1e-9));
    EXPECT_LE(r.value, exact * 1.01);
  }
}

TEST(Transcription, SymmetryTriangleInvariance)
{
  const auto f = frames::heisenberg();
  const auto g = algebras::heisenberg();
  std::mt19937_64 rng = make_rng(32, 0);
  for (int k = 0; k < 6; ++k) {
    const Vec p = gaussian_vec(rng, 3), q = gaussian_vec(rng, 3), m = gaussian_vec(rng, 3);
    const double pq = tr_dist(f, p, q);
    EXPECT_NEAR(tr_dist(f, q, p), pq, 0.02 * pq);
    EXPECT_LE(pq, (tr_dist(f, p, m) + tr_dist(f, m, q)) * 1.03);
    const Vec h = gaussian_vec(rng, 3);
    const double d0 = tr_dist(f, Vec::Zero(3), q);
    EXPECT_NEAR(tr_dist(f, h, group_product(g, h, q)), d0, 0.02 * d0);
    EXPECT_NEAR(tr_dist(f, Vec::Zero(3), dilate(g, 2.0, q)), 2 * d0, 0.04 * d0);
  }
}

TEST(Transcription, EngelTypeFrame)
{
  const auto f = frames::engel();
  Vec q = Vec::Zero(4);
  q[0] = 0.8;
  const auto r = cc_distance(f, Vec::Zero(4), q);
  EXPECT_NEAR(r.value, 0.8, 1e-3);
  // Frame is homogeneous at 0: d(0, δ_2 q) = 2 d(0, q) with weights (1,1,2,3).
  Vec a(4), b(4);
  a << 0.3, -0.2, 0.1, 0.05;
  b << 0.6, -0.4, 0.4, 0.4;
  const double da = cc_distance(f, Vec::Zero(4), a).value;
  const double db = cc_distance(f, Vec::Zero(4), b).value;
  EXPECT_NEAR(db / da, 2.0, 0.04);
  // Lower bound: horizontal speed bounds the (x, y) displacement.
  EXPECT_GE(da, std::hypot(0.3, 0.2));
}

TEST(Transcription, GenericSolverMatchesGroupFrame)
{
  // The untagged Heisenberg fields use RK4 segments instead of the group law.
  const HorizontalFrame plain(frames::heisenberg().fields(), "plain");
  const Vec q = v3(0.4, -0.3, 0.6);
  const auto r = cc_distance(plain, Vec::Zero(3), q);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, heisenberg_distance(Vec::Zero(3), q), 0.01);
}

TEST(Transcription, ReportsNonConvergence)
{
  // ∂x, ∂y on R³ cannot reach a vertical displacement.
  const HorizontalFrame flat({PolyVectorField::coordinate(3, 0), PolyVectorField::coordinate(3, 1)}, "flat");
  DistanceOptions o = transcription();
  o.seeds = 2;
  o.rounds = 2;
  const auto r = cc_distance(flat, Vec::Zero(3), v3(0, 0, 1), o);
  EXPECT_FALSE(r.converged);
  EXPECT_GT(r.endpoint_error, 0.5);
}

TEST(Transcription, Deterministic)
{
  const auto f = frames::engel();
  Vec q(4);
  q << 0.3, 0.2, -0.1, 0.05;
  const auto a = cc_distance(f, Vec::Zero(4), q, fast_distance_options());
  const auto b = cc_distance(f, Vec::Zero(4), q, fast_distance_options());
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.controls, b.controls);
}

// ---------------------------------------------------------------------------
// Spheres

TEST(Sphere, HeisenbergContainsHorizontalAxes)
{
  const auto s = cc_sphere_sample(frames::heisenberg(), Vec::Zero(3), 1.0, 8);
  ASSERT_EQ(s.points.size(), 8u);
  for (const Vec& axis : {v3(1, 0, 0), v3(-1, 0, 0), v3(0, 1, 0), v3(0, -1, 0)}) {
    double best = 1e9;
    for (const auto& y : s.points) best = std::min(best, (y - axis).norm());
    EXPECT_LE(best, 1e-12);
  }
}

TEST(Sphere, AbelianUnitCircle)
{
  const auto s = cc_sphere_sample(frames::abelian(2), Vec::Zero(2), 1.0, 16);
  ASSERT_EQ(s.points.size(), 16u);
  for (const auto& y : s.points) EXPECT_NEAR(y.norm(), 1.0, 1e-12);
}

TEST(Sphere, DilationOracleOnFullSphere)
{
  const auto f = frames::heisenberg();
  const auto g = algebras::heisenberg();
  SphereOptions opt;
  opt.mode = SphereMode::Full;
  for (double r : {0.5, 2.0}) {
    const auto s = cc_sphere_sample(f, Vec::Zero(3), r, 40, opt);
    ASSERT_EQ(s.points.size(), 40u);
    for (const auto& y : s.points) EXPECT_NEAR(heisenberg_distance(Vec::Zero(3), dilate(g, 1 / r, y)), 1.0, 0.02);
  }
}

TEST(Sphere, CentredAwayFromOrigin)
{
  const auto f = frames::heisenberg();
  const Vec x = v3(0.5, -1, 2);
  SphereOptions opt;
  opt.mode = SphereMode::Full;
  const auto s = cc_sphere_sample(f, x, 0.3, 20, opt);
  for (const auto& y : s.points) EXPECT_NEAR(heisenberg_distance(x, y), 0.3, 0.006);
}

TEST(Sphere, GenericFrameByBisection)
{
  // Untagged Heisenberg fields: every point is verified by the closed form.
  const HorizontalFrame plain(frames::heisenberg().fields(), "plain");
  SphereOptions opt;
  opt.distance = fast_distance_options();
  const auto s = cc_sphere_sample(plain, Vec::Zero(3), 0.5, 6, opt);
  EXPECT_FALSE(s.partial());
  for (const auto& y : s.points) EXPECT_NEAR(heisenberg_distance(Vec::Zero(3), y), 0.5, 0.02 * 0.5);
}

TEST(Sphere, NonPositiveRadiusThrows)
{
  EXPECT_THROW(cc_sphere_sample(frames::heisenberg(), Vec::Zero(3), 0.0, 4), DomainError);
}

// ---------------------------------------------------------------------------
// Volumes

TEST(BallVolume, EuclideanDisc)
{
  BallVolumeOptions o;
  o.samples = 200000;
  o.seed = 3;
  const auto v = ball_volume(frames::abelian(2), Vec::Zero(2), 1.0, o);
  EXPECT_NEAR(v.volume, std::numbers::pi, 3 * v.std_error);
}

TEST(BallVolume, HeisenbergDilationRatio)
{
  BallVolumeOptions o;
  o.samples = 200000;
  const auto f = frames::heisenberg();
  const double v1 = ball_volume(f, Vec::Zero(3), 0.5, o).volume;
  o.seed = 1;
  const double v2 = ball_volume(f, Vec::Zero(3), 1.0, o).volume;
  EXPECT_NEAR(v2 / v1, 16.0, 1.6);
}

TEST(BallVolume, LeftInvariantOnHeisenberg)
{
  BallVolumeOptions o;
  o.samples = 100000;
  const auto f = frames::heisenberg();
  const auto a = ball_volume(f, Vec::Zero(3), 1.0, o);
  const auto b = ball_volume(f, v3(1, -2, 0.5), 1.0, o);
  EXPECT_NEAR(a.volume, b.volume, 3 * std::hypot(a.std_error, b.std_error) + 1e-12);
}

TEST(BallVolume, ZeroHitsIsAnError)
{
  BallVolumeOptions o;
  o.samples = 20;
  o.box_constants = {1e6, 1e6, 1e12};
  EXPECT_THROW(ball_volume(frames::heisenberg(), Vec::Zero(3), 1.0, o), DegenerateSamplingError);
}

TEST(BallBox, HeisenbergSlope)
{
  BallVolumeOptions o;
  o.samples = 100000;
  const auto rep = ball_box_report(frames::heisenberg(), Vec::Zero(3), 1.0, 4, o);
  EXPECT_EQ(rep.Q_expected, 4);
  EXPECT_NEAR(rep.fitted_slope, 4.0, 0.2);
  for (std::size_t i = 1; i < rep.volumes.size(); ++i) EXPECT_LT(rep.volumes[i], rep.volumes[i - 1]);
}

TEST(BallBox, AbelianR3Slope)
{
  BallVolumeOptions o;
  o.samples = 100000;
  const auto rep = ball_box_report(frames::abelian(3), Vec::Zero(3), 1.0, 4, o);
  EXPECT_EQ(rep.Q_expected, 3);
  EXPECT_NEAR(rep.fitted_slope, 3.0, 0.15);
}

TEST(BallBox, EngelTypeSlope)
{
  BallVolumeOptions o;
  o.samples = 1000;
  o.sphere_samples = 24;
  const auto rep = ball_box_report(frames::engel(), Vec::Zero(4), 0.8, 4, o);
  EXPECT_EQ(rep.Q_expected, 7);
  EXPECT_NEAR(rep.fitted_slope, 7.0, 0.5);
  RecordProperty("engel_slope", std::to_string(rep.fitted_slope));
}

TEST(BallBox, SlopeFit)
{
  const auto [s, se] = log_log_slope({1, 0.5, 0.25}, {3, 3.0 / 8, 3.0 / 64});
  EXPECT_NEAR(s, 3.0, 1e-12);
  EXPECT_NEAR(se, 0.0, 1e-12);
}
