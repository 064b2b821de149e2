#include <gtest/gtest.h>

#include "sublab/maps/catalog.hpp"
#include "sublab/qr/analysis.hpp"
#include "sublab/qr/pansu.hpp"

using namespace sublab;

namespace {

Vec v3(double a, double b, double c) { return (Vec(3) << a, b, c).finished(); }

std::shared_ptr<const CarnotAlgebra> h1() { return frames::heisenberg().algebra_ptr(); }

/// (r, φ, t) ↦ (r/2, 2φ, t) taken literally: not contact for this convention.
SmoothMapModel literal_winding()
{
  auto fr = std::make_shared<const HorizontalFrame>(frames::heisenberg());
  SmoothMapModel m = maps::winding().model;
  m.name = "literal-winding";
  m.forward = [](const Vec& p) {
    const double r = std::hypot(p[0], p[1]);
    if (r == 0.0) return v3(0, 0, p[2]);
    return v3(0.5 * (p[0] * p[0] - p[1] * p[1]) / r, p[0] * p[1] / r, p[2]);
  };
  m.jacobian = nullptr;
  return m;
}

std::vector<Vec> off_axis_points(int count, std::uint64_t seed)
{
  return random_probe_points(maps::winding(), count, 0.3, seed);
}

}  // namespace

// --- Morphisms -------------------------------------------------------------------

TEST(Morphism, IdentityNorms)
{
  const auto n = morphism_norms(GradedMorphism::identity(h1()));
  EXPECT_NEAR(n.max, 1.0, 1e-12);
  EXPECT_NEAR(n.min, 1.0, 1e-12);
  EXPECT_EQ(morphism_jacobian(GradedMorphism::identity(h1())), 1.0);
}

TEST(Morphism, DiagonalBlock)
{
  const auto a = GradedMorphism::from_first_layer(h1(), h1(), (Mat(2, 2) << 2, 0, 0, 3).finished());
  const auto n = morphism_norms(a);
  EXPECT_NEAR(n.max, 3.0, 1e-12);
  EXPECT_NEAR(n.min, 2.0, 1e-12);
  EXPECT_NEAR(a.matrix()(2, 2), 6.0, 1e-12);
  EXPECT_EQ(morphism_jacobian(a), 36.0);
}

TEST(Morphism, NormsMatchSingularValues)
{
  auto rng = make_rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    Mat m(2, 2);
    for (int i = 0; i < 4; ++i) m.data()[i] = gaussian(rng);
    const auto a = GradedMorphism::from_first_layer(h1(), h1(), m);
    const auto n = morphism_norms(a);
    const Vec s = m.jacobiSvd().singularValues();
    EXPECT_NEAR(n.max, s[0], 1e-3 * std::max(1.0, s[0]));
    EXPECT_NEAR(n.min, s[1], 1e-3 * std::max(1.0, s[0]));
  }
}

TEST(Morphism, SingularBlockHasZeroJacobian)
{
  const auto a = GradedMorphism::from_first_layer(h1(), h1(), (Mat(2, 2) << 1, 2, 2, 4).finished());
  EXPECT_EQ(morphism_jacobian(a), 0.0);
}

TEST(Morphism, JacobianMatchesImageVolume)
{
  // Monte Carlo volume of A(B(0,1)) against |det| per layer.
  const auto h = frames::heisenberg();
  const auto a = GradedMorphism::from_first_layer(h1(), h1(), (Mat(2, 2) << 2, 0, 0, 3).finished());
  const Mat inv = a.matrix().inverse();
  BallVolumeOptions bo;
  bo.samples = 200000;
  const double unit = ball_volume(h, Vec::Zero(3), 1.0, bo).volume;
  // Image sits inside the box scaled by the diagonal; count points whose preimage is in the ball.
  const Vec half = v3(2 * 1.25, 3 * 1.25, 6 * 0.5);
  const Box box{-half, half};
  auto rng = make_rng(12);
  long hits = 0;
  const long n = 200000;
  for (long i = 0; i < n; ++i) hits += closed_form_distance(h, Vec::Zero(3), Vec(inv * box.sample(rng))) <= 1.0;
  const double image = box.volume() * static_cast<double>(hits) / n;
  EXPECT_NEAR(image / unit, 36.0, 0.05 * 36.0);
}

TEST(Morphism, BracketCompatibleAndCommutesWithDilations)
{
  auto rng = make_rng(13);
  const auto e = frames::engel_group().algebra_ptr();
  for (int trial = 0; trial < 20; ++trial) {
    Mat m(2, 2);
    for (int i = 0; i < 4; ++i) m.data()[i] = gaussian(rng);
    const auto a = GradedMorphism::from_first_layer(h1(), h1(), m);
    EXPECT_LE(a.bracket_defect(), 1e-8);
    m(0, 1) = 0.0;  // Engel needs a lower-triangular block
    const auto b = GradedMorphism::from_first_layer(e, e, m);
    EXPECT_LE(b.bracket_defect(), 1e-8);
    for (double lambda : {0.5, 2.0, 3.7}) {
      EXPECT_EQ(Mat(a.matrix() * dilation_matrix(*h1(), lambda)), Mat(dilation_matrix(*h1(), lambda) * a.matrix()));
      EXPECT_EQ(Mat(b.matrix() * dilation_matrix(*e, lambda)), Mat(dilation_matrix(*e, lambda) * b.matrix()));
    }
  }
}

TEST(Morphism, LayerPreserving)
{
  const auto e = frames::engel_group().algebra_ptr();
  const auto b = GradedMorphism::from_first_layer(e, e, (Mat(2, 2) << 1.3, 0, 0.7, -0.4).finished());
  const auto& w = e->weights();
  for (int i = 0; i < e->dim(); ++i)
    for (int j = 0; j < e->dim(); ++j)
      if (w[static_cast<std::size_t>(i)] != w[static_cast<std::size_t>(j)]) EXPECT_EQ(b.matrix()(i, j), 0.0);
}

// --- Dilatation and Lipschitz profiles ---------------------------------------

TEST(Dilatation, IdentityAndTranslationAreIsometries)
{
  const auto h = frames::heisenberg();
  auto rng = make_rng(21);
  for (const auto& d : {maps::identity(h), maps::translation(h, v3(0.5, -1.0, 0.3))}) {
    for (int i = 0; i < 5; ++i) {
      const Vec x = v3(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
      const auto p = dilatation_profile(d.model, x, 0.2, 8);
      EXPECT_NEAR(p.H, 1.0, 0.05) << d.name;
      EXPECT_NEAR(p.H_sphere, 1.0, 0.05) << d.name;
      EXPECT_FALSE(p.degenerate);
    }
  }
}

TEST(Dilatation, ProfileInvariants)
{
  for (const auto& d : {maps::winding(), builtin_map("automorphism"), maps::dilation(frames::heisenberg(), 2.0)}) {
    const auto p = dilatation_profile(d.model, v3(0.5, 0.4, 0.2), 0.1, 6);
    ASSERT_EQ(p.steps.size(), 6u);
    for (const auto& s : p.steps) {
      EXPECT_GE(s.L, s.L_sphere);
      EXPECT_GE(s.L_sphere, s.l);
      EXPECT_GE(s.l, 0.0);
      EXPECT_GE(s.H, 1.0);
      EXPECT_GE(s.H, s.H_sphere);
    }
    EXPECT_LE(p.H_sphere, p.H);
  }
}

TEST(Dilatation, WindingStableOffAxis)
{
  // Regression baseline for this implementation, not an external value:
  // the differential stretches by 1 and ½ on the first layer, so H → 2.
  const auto w = maps::winding();
  for (const auto& x : off_axis_points(5, 1)) {
    const auto p = dilatation_profile(w.model, x, 0.05, 8);
    EXPECT_TRUE(std::isfinite(p.H));
    EXPECT_LT(p.H_tail.max - p.H_tail.min, 0.05 * p.H);
    EXPECT_NEAR(p.H, 2.0, 0.06);
  }
}

TEST(Lip, IdentityDilationAutomorphism)
{
  const auto h = frames::heisenberg();
  const Vec x = v3(0.3, -0.6, 0.2);
  const auto id = lip_profile(maps::identity(h).model, x, 0.2, 8);
  EXPECT_NEAR(id.Lip, 1.0, 0.05);
  EXPECT_NEAR(id.lip, 1.0, 0.05);
  EXPECT_NEAR(lip_profile(maps::dilation(h, 2.0).model, x, 0.2, 8).Lip, 2.0, 0.1);
  EXPECT_NEAR(lip_profile(builtin_map("automorphism").model, x, 0.2, 8).Lip, 3.0, 0.1);
}

TEST(Lip, MatchesDifferentialNormOnWinding)
{
  const auto w = maps::winding();
  for (const auto& x : off_axis_points(5, 2)) {
    const auto lp = lip_profile(w.model, x, 0.05, 8);
    const auto fit = pansu_differential(w.model, x);
    const double norm = morphism_norms(fit.morphism).max;
    EXPECT_LE(std::abs(lp.Lip - norm) / norm, 0.03);
    EXPECT_LE(std::abs(lp.Lip - lp.lip) / lp.Lip, 0.03);
  }
}

TEST(Dilatation, EmptyLadderRejected)
{
  EXPECT_THROW(dilatation_profile(maps::winding().model, v3(0.5, 0, 0), 0.1, 0), ConfigError);
  EXPECT_THROW(dilatation_profile(maps::winding().model, v3(0.5, 0, 0), -0.1, 3), DomainError);
}

// --- Pansu differentials -------------------------------------------------------

TEST(Pansu, AutomorphismIsItsOwnDifferential)
{
  const auto d = builtin_map("automorphism(2,1,-1,3)");
  const auto fit = pansu_differential(d.model, Vec::Zero(3));
  EXPECT_LT((fit.morphism.matrix() - d.model.jacobian(Vec::Zero(3))).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Pansu, TranslationHasIdentityDifferential)
{
  const auto d = maps::translation(frames::heisenberg(), v3(0.7, -0.2, 1.1));
  for (const Vec& o : {v3(0, 0, 0), v3(0.4, 0.9, -0.3)}) {
    const auto fit = pansu_differential(d.model, o);
    EXPECT_LT((fit.morphism.matrix() - Mat::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(Pansu, IdentityOnNonGroupFrame)
{
  const auto d = maps::identity(frames::perturbed_heisenberg());
  const auto fit = pansu_differential(d.model, v3(0.1, -0.2, 0.05));
  EXPECT_LT((fit.morphism.matrix() - Mat::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Pansu, WindingResidualsHalve)
{
  const auto w = maps::winding();
  for (const auto& o : off_axis_points(5, 3)) {
    const auto fit = pansu_differential(w.model, o);
    for (std::size_t i = 1; i < fit.residuals.size(); ++i) EXPECT_GE(fit.residuals[i - 1] / fit.residuals[i], 2.0) << "step " << i;
    const auto known = *w.differential(o);
    EXPECT_LT((fit.morphism.matrix() - known.matrix()).cwiseAbs().maxCoeff(), 10 * fit.residuals.back());
  }
}

TEST(Pansu, LiteralWindingIsFlagged)
{
  try {
    pansu_differential(literal_winding(), v3(0.5, 0.3, 0.2));
    FAIL() << "expected the non-contact map to be flagged";
  } catch (const NonDifferentiableError& e) {
    EXPECT_FALSE(e.residuals().empty());
    EXPECT_EQ(e.residuals().size(), e.eps().size());
  }
}

TEST(Pansu, ChainRuleOnAutomorphismPairs)
{
  auto rng = make_rng(31);
  const auto h = frames::heisenberg();
  for (int trial = 0; trial < 5; ++trial) {
    Mat ma(2, 2), mb(2, 2);
    for (int i = 0; i < 4; ++i) {
      ma.data()[i] = gaussian(rng);
      mb.data()[i] = gaussian(rng);
    }
    const auto fa = maps::automorphism(h, ma + 3 * Mat::Identity(2, 2));
    const auto fb = maps::automorphism(h, mb + 3 * Mat::Identity(2, 2));
    const auto fc = compose(fb, fa);
    const Vec o = v3(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
    const auto a = pansu_differential(fa.model, o);
    const auto b = pansu_differential(fb.model, fa.model(o));
    const auto c = pansu_differential(fc.model, o);
    const double tol = 10 * (a.residuals.back() + b.residuals.back() + c.residuals.back()) + 1e-9;
    EXPECT_LT((compose(b.morphism, a.morphism).matrix() - c.morphism.matrix()).cwiseAbs().maxCoeff(), tol);
  }
}

TEST(Pansu, ChainRuleThroughWinding)
{
  const auto w = maps::winding();
  const auto a = builtin_map("automorphism");
  const auto c = compose(a, w);
  const Vec o = v3(0.5, 0.2, 0.1);
  const auto fw = pansu_differential(w.model, o);
  const auto fa = pansu_differential(a.model, w.model(o));
  const auto fc = pansu_differential(c.model, o);
  EXPECT_LT((compose(fa.morphism, fw.morphism).matrix() - fc.morphism.matrix()).cwiseAbs().maxCoeff(),
            20 * (fw.residuals.back() + fc.residuals.back()));
}

// --- Jacobians ---------------------------------------------------------------------

TEST(Jacobian, IdentityDilationAutomorphism)
{
  const auto h = frames::heisenberg();
  const Vec x = v3(0.2, 0.1, -0.3);
  EXPECT_NEAR(jacobian_volume_ratio(maps::identity(h).model, x, 0.2, 3).J, 1.0, 0.05);
  EXPECT_NEAR(jacobian_volume_ratio(maps::dilation(h, 2.0).model, x, 0.2, 3).J, 16.0, 1.6);
  const auto a = builtin_map("automorphism");
  const auto j = jacobian_volume_ratio(a.model, x, 0.2, 3);
  EXPECT_NEAR(j.J, morphism_jacobian(*a.differential(x)), 3.6);
  EXPECT_FALSE(j.unreliable);
  for (const auto& s : j.steps) EXPECT_GT(s.ratio, 0.0);
}

TEST(Jacobian, WindingOffAxis)
{
  const auto w = maps::winding();
  for (const auto& x : off_axis_points(3, 4)) {
    const auto j = jacobian_volume_ratio(w.model, x, 0.05, 3);
    EXPECT_NEAR(j.J, morphism_jacobian(*w.differential(x)), 0.025);
    EXPECT_FALSE(j.unreliable);
  }
}

TEST(Jacobian, NonGroupFrameIdentity)
{
  const auto d = maps::identity(frames::perturbed_heisenberg());
  JacobianOptions o;
  o.samples = 800;
  o.ball_samples = 800;
  o.sphere_samples = 8;
  // Smoke test of the transcription path: two estimates of 800 points, each
  // with ~7% standard error, so the band is three combined sigmas.
  EXPECT_NEAR(jacobian_volume_ratio(d.model, v3(0.1, 0.0, 0.0), 0.2, 1, o).J, 1.0, 0.3);
}

// --- Multiplicity ------------------------------------------------------------------

TEST(Multiplicity, IdentityAndOutsideImage)
{
  const auto id = maps::identity(frames::heisenberg());
  const Box a{Vec::Constant(3, -1.0), Vec::Constant(3, 1.0)};
  EXPECT_EQ(multiplicity_count(id.model, v3(0.3, 0.2, -0.5), a).count, 1);
  EXPECT_EQ(multiplicity_count(id.model, v3(3, 0, 0), a).count, 0);
}

TEST(Multiplicity, WindingTwoAndDoubleWindingFour)
{
  const auto w = maps::winding();
  const Box a{v3(-1, -1, 0), v3(1, 1, 1)};
  auto rng = make_rng(41);
  for (int i = 0; i < 20; ++i) {
    const double r = uniform(rng, 0.1, 0.4), phi = uniform(rng, -3, 3);
    const Vec y = v3(r * std::cos(phi), r * std::sin(phi), uniform(rng, 0.05, 0.45));
    const auto m = multiplicity_count(w.model, y, a);
    EXPECT_EQ(m.count, 2);
    EXPECT_EQ(static_cast<std::size_t>(m.count), w.preimages(y).size());
    EXPECT_FALSE(m.incomplete());
  }
  EXPECT_EQ(multiplicity_count(w.model, v3(0.2, 0.1, 0.9), a).count, 0);  // t preimage 1.8 lies outside A
  const auto ww = compose(w, w);
  EXPECT_EQ(multiplicity_count(ww.model, v3(0.1, 0.05, 0.1), a).count, 4);
}

// --- Area formula ----------------------------------------------------------------

TEST(AreaFormula, IdentityAndDilation)
{
  const auto h = frames::heisenberg();
  const Box a{Vec::Zero(3), Vec::Ones(3)};
  auto one = [](const Vec&) { return 1.0; };
  const auto id = area_formula_check(maps::identity(h).model, a, one);
  EXPECT_NEAR(id.lhs, 1.0, 0.05);
  EXPECT_NEAR(id.rhs, 1.0, 0.05);
  const auto d2 = area_formula_check(maps::dilation(h, 2.0).model, a, one);
  EXPECT_NEAR(d2.lhs, 16.0, 1.6);
  EXPECT_NEAR(d2.rhs, 16.0, 1.6);
}

TEST(AreaFormula, WindingAnnulus)
{
  const auto w = maps::winding();
  const Box a{v3(-1, -1, 0), v3(1, 1, 1)};
  auto annulus = [](const Vec& y) {
    const double r = std::hypot(y[0], y[1]);
    return (r >= 0.1 && r <= 0.4 && y[2] >= 0.1 && y[2] <= 0.4) ? 1.0 : 0.0;
  };
  AreaOptions o;
  o.target = Box{v3(-0.4, -0.4, 0.1), v3(0.4, 0.4, 0.4)};
  const auto res = area_formula_check(w.model, a, annulus, o);
  EXPECT_LE(res.gap, 0.10);
  EXPECT_NEAR(res.rhs, 0.09 * std::numbers::pi, 0.1 * 0.09 * std::numbers::pi);
}

// --- Branch scan -----------------------------------------------------------------

TEST(BranchScan, HomeomorphismsHaveNoCandidates)
{
  const auto h = frames::heisenberg();
  const Box region{Vec::Constant(3, -1.0), Vec::Constant(3, 1.0)};
  InjectivityOptions o;
  o.grid = 5;
  EXPECT_TRUE(local_injectivity_scan(maps::identity(h).model, region, o).flagged.empty());
  EXPECT_TRUE(local_injectivity_scan(builtin_map("automorphism").model, region, o).flagged.empty());
}

TEST(BranchScan, WindingFlagsTheAxis)
{
  const auto w = maps::winding();
  const Box region{v3(-1, -1, 0), v3(1, 1, 1)};
  InjectivityOptions o;
  o.grid = 9;
  const auto scan = local_injectivity_scan(w.model, region, o);
  int on_axis = 0;
  for (const auto& c : scan.flagged) {
    const double d = std::hypot(c.point[0], c.point[1]);
    EXPECT_LE(d, 0.2) << c.point.transpose();
    on_axis += d == 0.0;
  }
  EXPECT_EQ(on_axis, 9);
}
