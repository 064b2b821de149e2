#include <gtest/gtest.h>

#include "sublab/maps/catalog.hpp"
#include "sublab/maps/map_io.hpp"
#include "sublab/qr/pansu.hpp"

using namespace sublab;

namespace {

Vec v3(double a, double b, double c) { return (Vec(3) << a, b, c).finished(); }

Vec random_point(std::mt19937_64& rng, int n, double scale = 1.0)
{
  Vec p(n);
  for (int i = 0; i < n; ++i) p[i] = uniform(rng, -scale, scale);
  return p;
}

std::vector<MapDescriptor> invertible_catalog()
{
  const auto h = frames::heisenberg();
  return {maps::identity(h), maps::translation(h, v3(0.3, -0.2, 0.5)), maps::dilation(h, 2.0), builtin_map("automorphism"),
          maps::winding(), compose(maps::winding(), maps::winding())};
}

}  // namespace

TEST(Catalog, IdentityIsIdentity)
{
  const auto id = maps::identity(frames::heisenberg());
  auto rng = make_rng(1);
  for (int i = 0; i < 50; ++i) {
    const Vec p = random_point(rng, 3);
    EXPECT_EQ(id.model(p), p);
  }
}

TEST(Catalog, WindingHalvesRadiusAtPhiZero)
{
  const auto w = maps::winding();
  const Vec y = w.model(v3(1, 0, 0));
  EXPECT_NEAR(y[0], 0.5, 1e-15);
  EXPECT_NEAR(y[1], 0.0, 1e-15);
  EXPECT_NEAR(y[2], 0.0, 1e-15);
}

TEST(Catalog, WindingDoublesAngle)
{
  const auto w = maps::winding();
  auto rng = make_rng(2);
  for (int i = 0; i < 100; ++i) {
    const double r = uniform(rng, 0.1, 2.0), phi = uniform(rng, -3.0, 3.0), t = uniform(rng, -1, 1);
    const Vec y = w.model(v3(r * std::cos(phi), r * std::sin(phi), t));
    EXPECT_NEAR(y[0], 0.5 * r * std::cos(2 * phi), 1e-12);
    EXPECT_NEAR(y[1], 0.5 * r * std::sin(2 * phi), 1e-12);
    EXPECT_NEAR(y[2], 0.5 * t, 1e-15);
  }
}

TEST(Catalog, WindingGenericValueHasTwoPreimages)
{
  const auto w = maps::winding();
  const Vec y = v3(0.2, -0.1, 0.3);
  const auto pre = w.preimages(y);
  ASSERT_EQ(pre.size(), 2u);
  EXPECT_GT((pre[0] - pre[1]).norm(), 0.1);
  for (const auto& x : pre) EXPECT_LT((w.model(x) - y).norm(), 1e-10);
}

TEST(Catalog, WindingMapsTheAxisIntoItself)
{
  const auto w = maps::winding();
  for (double t : {-1.0, 0.0, 0.3, 2.0}) {
    const Vec y = w.model(v3(0, 0, t));
    EXPECT_EQ(y[0], 0.0);
    EXPECT_EQ(y[1], 0.0);
    EXPECT_DOUBLE_EQ(y[2], 0.5 * t);
    EXPECT_EQ(w.branch_distance(v3(0, 0, t)), 0.0);
  }
}

TEST(Catalog, WindingJacobianMatchesDifferences)
{
  const auto w = maps::winding();
  SmoothMapModel fd = w.model;
  fd.jacobian = nullptr;
  auto rng = make_rng(3);
  for (int i = 0; i < 20; ++i) {
    const Vec p = random_point(rng, 3);
    EXPECT_LT((w.model.euclidean_jacobian(p) - fd.euclidean_jacobian(p)).cwiseAbs().maxCoeff(), 1e-7);
  }
}

TEST(Catalog, PreimageRoundTripOnThousandTargets)
{
  for (const auto& d : invertible_catalog()) {
    ASSERT_TRUE(d.preimages) << d.name;
    auto rng = make_rng(4);
    for (int i = 0; i < 1000; ++i) {
      const Vec y = random_point(rng, 3);
      const auto pre = d.preimages(y);
      ASSERT_FALSE(pre.empty()) << d.name;
      for (const auto& x : pre) ASSERT_LT((d.model(x) - y).norm(), 1e-10) << d.name << " at target " << i;
    }
  }
}

TEST(Catalog, DilationAndAutomorphismAreHomomorphisms)
{
  const auto h = frames::heisenberg();
  const auto& g = *h.algebra();
  for (const auto& d : {maps::dilation(h, 2.0), maps::dilation(h, 0.7), builtin_map("automorphism(1,2,-1,3)")}) {
    auto rng = make_rng(5);
    for (int i = 0; i < 200; ++i) {
      const Vec x = random_point(rng, 3), y = random_point(rng, 3);
      const Vec lhs = d.model(group_product(g, x, y));
      const Vec rhs = group_product(g, d.model(x), d.model(y));
      EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12) << d.name;
    }
  }
}

TEST(Catalog, EngelAutomorphismHomomorphism)
{
  const auto e = frames::engel_group();
  const auto d = maps::automorphism(e, (Mat(2, 2) << 1.5, 0.0, 0.4, 0.8).finished());
  auto rng = make_rng(6);
  for (int i = 0; i < 200; ++i) {
    const Vec x = random_point(rng, 4), y = random_point(rng, 4);
    EXPECT_LT((d.model(group_product(*e.algebra(), x, y)) - group_product(*e.algebra(), d.model(x), d.model(y))).cwiseAbs().maxCoeff(),
              1e-12);
  }
}

TEST(Catalog, IncompatibleBlockIsRejected)
{
  // On Engel, [X2, X3] = 0 forces the (1,2) entry of the block to vanish.
  const auto e = frames::engel_group();
  try {
    maps::automorphism(e, (Mat(2, 2) << 1.0, 1.0, 0.0, 1.0).finished());
    FAIL() << "expected an invalid descriptor";
  } catch (const StructuralError& err) {
    EXPECT_NE(std::string(err.what()).find("invalid automorphism descriptor"), std::string::npos);
  }
  EXPECT_THROW(builtin_map("automorphism(1,2,2,4)"), StructuralError);
}

TEST(Catalog, ComposeWithIdentityIsPointwiseEqual)
{
  const auto h = frames::heisenberg();
  const auto w = maps::winding();
  const auto c = compose(maps::identity(h), w);
  auto rng = make_rng(7);
  for (int i = 0; i < 100; ++i) {
    const Vec p = random_point(rng, 3);
    EXPECT_EQ(c.model(p), w.model(p));
  }
}

TEST(Catalog, DilationsCompose)
{
  const auto h = frames::heisenberg();
  const auto c = compose(maps::dilation(h, 2.0), maps::dilation(h, 3.0));
  const auto six = maps::dilation(h, 6.0);
  auto rng = make_rng(8);
  for (int i = 0; i < 100; ++i) {
    const Vec p = random_point(rng, 3);
    EXPECT_LT((c.model(p) - six.model(p)).norm(), 1e-12);
  }
}

TEST(Catalog, DoubleWindingHasFourPreimages)
{
  const auto ww = compose(maps::winding(), maps::winding());
  const Vec y = v3(0.1, 0.05, 0.1);
  auto pre = ww.preimages(y);
  ASSERT_EQ(pre.size(), 4u);
  std::vector<Vec> distinct;
  for (const auto& x : pre) add_distinct_root(distinct, x, 1e-6);
  EXPECT_EQ(distinct.size(), 4u);
}

TEST(Catalog, ComposeRejectsFrameMismatch)
{
  const auto w = maps::winding();
  const auto e = maps::identity(frames::engel_group());
  EXPECT_THROW(compose(e, w), StructuralError);
}

TEST(Catalog, KnownDifferentials)
{
  const auto w = maps::winding();
  const auto a = w.differential(v3(0.4, 0.3, 0.1));
  ASSERT_TRUE(a.has_value());
  const auto n = morphism_norms(*a);
  EXPECT_NEAR(n.max, 1.0, 1e-3);
  EXPECT_NEAR(n.min, 0.5, 1e-3);
  EXPECT_NEAR(morphism_jacobian(*a), 0.25, 1e-12);
  EXPECT_FALSE(w.differential(v3(0, 0, 0.4)).has_value());
}

TEST(Catalog, SpecParsing)
{
  EXPECT_EQ(builtin_map("dilation(2)").name, "dilation");
  EXPECT_EQ(builtin_map("translation(1,2,3)").model(Vec::Zero(3)), v3(1, 2, 3));
  EXPECT_THROW(builtin_map("dilation"), ConfigError);
  EXPECT_THROW(builtin_map("dilation(x)"), ConfigError);
  EXPECT_THROW(builtin_map("spiral"), ConfigError);
  EXPECT_THROW(builtin_map("winding", frames::engel_group()), StructuralError);
  EXPECT_FALSE(builtin_map_names().empty());
}

TEST(ProbePoints, WindingExclusionHolds)
{
  const auto w = maps::winding();
  const auto pts = random_probe_points(w, 500, 0.1, 3);
  ASSERT_EQ(pts.size(), 500u);
  for (const auto& p : pts) {
    EXPECT_GE(std::hypot(p[0], p[1]), 0.1);
    EXPECT_TRUE(w.probe_box.contains(p));
  }
}

TEST(ProbePoints, IdentityFillsTheBox)
{
  const auto id = maps::identity(frames::heisenberg());
  const int count = 4096;
  const auto pts = random_probe_points(id, count, 0.0, 0);
  ASSERT_EQ(static_cast<int>(pts.size()), count);
  // Octant counts of a low-discrepancy set stay close to count/8.
  std::array<int, 8> oct{};
  for (const auto& p : pts) oct[static_cast<std::size_t>((p[0] > 0) + 2 * (p[1] > 0) + 4 * (p[2] > 0))]++;
  for (int c : oct) EXPECT_NEAR(c, count / 8, 0.02 * count / 8);
}

TEST(ProbePoints, EdgeCases)
{
  const auto w = maps::winding();
  EXPECT_TRUE(random_probe_points(w, 0, 0.1).empty());
  EXPECT_THROW(random_probe_points(w, 10, 5.0), InsufficientPointsError);
  EXPECT_NE(random_probe_points(w, 5, 0.1, 1).front(), random_probe_points(w, 5, 0.1, 2).front());
  EXPECT_EQ(random_probe_points(w, 5, 0.1, 1).front(), random_probe_points(w, 5, 0.1, 1).front());
}

// --- Map files -------------------------------------------------------------------

TEST(MapFiles, RadialPatternMatchesBuiltin)
{
  const auto d = load_map(std::string(SUBLAB_DATA_DIR) + "/triple_winding.map.json");
  EXPECT_EQ(d.name, "triple-winding");
  const auto b = builtin_map("radial(0.5,3,0.75)");
  auto rng = make_rng(9);
  for (int i = 0; i < 50; ++i) {
    const Vec p = random_point(rng, 3);
    EXPECT_EQ(d.model(p), b.model(p));
  }
  const Vec y = v3(0.1, 0.2, 0.3);
  const auto pre = d.preimages(y);
  ASSERT_EQ(pre.size(), 3u);
  for (const auto& x : pre) EXPECT_LT((d.model(x) - y).norm(), 1e-12);
  EXPECT_TRUE(d.differential);  // 0.75 = 0.5²·3: contact
  EXPECT_FALSE(builtin_map("radial(0.5,2,1)").differential);
}

TEST(MapFiles, RadialWindingAgreesWithDifferential)
{
  // Exact Jacobian block equals the attached Pansu differential's first layer.
  const auto d = builtin_map("radial(0.7,-3,-1.47)");
  const Vec p = v3(0.3, -0.4, 0.2);
  ASSERT_TRUE(d.differential);
  EXPECT_LT((d.model.jacobian(p).topLeftCorner(2, 2) - d.differential(p)->first_layer()).norm(), 1e-12);
  SmoothMapModel fd = d.model;
  fd.jacobian = nullptr;
  EXPECT_LT((fd.euclidean_jacobian(p) - d.model.jacobian(p)).cwiseAbs().maxCoeff(), 1e-7);
}

TEST(MapFiles, PolynomialComponents)
{
  const auto d = load_map(std::string(SUBLAB_DATA_DIR) + "/cubic_shear.map.json");
  const Vec p = v3(0.5, -1.0, 2.0);
  EXPECT_LT((d.model(p) - v3(0.5, -0.75, 2.0 + 0.125 / 6)).norm(), 1e-15);
  SmoothMapModel fd = d.model;
  fd.jacobian = nullptr;
  EXPECT_LT((fd.euclidean_jacobian(p) - d.model.jacobian(p)).cwiseAbs().maxCoeff(), 1e-7);
  // A contact polynomial map: its blow-up converges to the block [[1,0],[2x,1]].
  const auto fit = pansu_differential(d.model, p);
  EXPECT_LT((fit.morphism.first_layer() - (Mat(2, 2) << 1, 0, 1.0, 1).finished()).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(MapFiles, Rejections)
{
  using io::json;
  EXPECT_THROW(map_from_json(json::parse(R"({"frame":"heisenberg1","components":[[[[1,0,0],1]]],"colour":1})")), StructuralError);
  EXPECT_THROW(map_from_json(json::parse(R"({"frame":"heisenberg1","components":[[[[1,0,0],1]]]})")), StructuralError);
  EXPECT_THROW(map_from_json(json::parse(R"({"radial":{"r_scale":1,"angle_multiplier":1.5,"t_scale":1}})")), StructuralError);
  EXPECT_THROW(map_from_json(json::parse(R"({"radial":{"r_scale":1,"t_scale":1}})")), StructuralError);
  EXPECT_THROW(map_from_json(json::parse(R"({"name":"x"})")), StructuralError);
  EXPECT_THROW(load_map("/nonexistent/map.json"), IoError);
  EXPECT_EQ(resolve_map("winding", frames::heisenberg()).name, "winding");
}
