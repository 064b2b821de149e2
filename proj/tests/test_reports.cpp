#include <gtest/gtest.h>

#include "sublab/acceptance.hpp"

using namespace sublab;

namespace {

Vec v3(double a, double b, double c) { return (Vec(3) << a, b, c).finished(); }

}  // namespace

TEST(Reports, ProfilesKeepFullLadders)
{
  const auto p = dilatation_profile(maps::winding().model, v3(0.5, 0.3, 0.2), 0.1, 6);
  const auto j = io::to_json(p);
  ASSERT_EQ(j["steps"].size(), 6u);
  EXPECT_DOUBLE_EQ(j["steps"][5]["r"].get<double>(), 0.1 / 32);
  EXPECT_TRUE(j.contains("H_tail"));
  const auto csv = io::to_csv(p).str();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "r,L,L_sphere,l,H,H_sphere,degenerate");
}

TEST(Reports, NonFiniteValuesStayReadable)
{
  EXPECT_EQ(io::num(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(io::num(std::nan("")), "nan");
  EXPECT_EQ(io::num(1.5), 1.5);
}

TEST(Reports, PansuFitCarriesResidualLadders)
{
  const auto fit = pansu_differential(maps::winding().model, v3(0.5, 0.3, 0.2));
  const auto j = io::to_json(fit);
  EXPECT_EQ(j["residuals"].size(), fit.eps.size());
  EXPECT_EQ(j["raw_residuals"].size(), PansuOptions{}.eps.size());
  EXPECT_NEAR(j["morphism"]["jacobian"].get<double>(), 0.25, 1e-6);
}

TEST(Reports, SerializationIsDeterministic)
{
  const auto a = io::to_json(dilatation_profile(maps::winding().model, v3(0.4, -0.2, 0.1), 0.1, 4)).dump();
  const auto b = io::to_json(dilatation_profile(maps::winding().model, v3(0.4, -0.2, 0.1), 0.1, 4)).dump();
  EXPECT_EQ(a, b);
}

TEST(LineFamily, HeisenbergLinesAreHorizontal)
{
  const auto f = frames::heisenberg();
  const auto fam = acceptance::horizontal_line_family(f, 3);
  ASSERT_EQ(fam.size(), 9u);
  for (const auto& vs : fam.curves())
    for (std::size_t k = 1; k < vs.size(); ++k) {
      const Vec d = vs[k] - vs[k - 1];
      // X = ∂x − (y/2)∂t at the segment (y is constant along it).
      EXPECT_NEAR(d[2], -0.5 * vs[k][1] * d[0], 1e-15);
      EXPECT_EQ(d[1], 0.0);
    }
}

TEST(LineFamily, ConformalMapsGiveKOne)
{
  // Identity and the group dilation δ_2 preserve Mod_4 of horizontal families.
  for (const auto& d : {maps::identity(frames::heisenberg()), maps::dilation(frames::heisenberg(), 2.0)}) {
    const auto rep = acceptance::line_family_ko(d, 4, 1, 3);
    EXPECT_NEAR(rep.implied_K, 1.0, 0.1) << d.name;
  }
  const auto r2 = acceptance::line_family_ko(maps::dilation(frames::abelian(2), 2.0), 8, 1, 3);
  EXPECT_NEAR(r2.implied_K, 1.0, 0.1);
}

TEST(LineFamily, WindingKIsFinite)
{
  const auto rep = acceptance::line_family_ko(maps::winding(), 4, 1, 3);
  EXPECT_TRUE(std::isfinite(rep.implied_K));
  EXPECT_GT(rep.implied_K, 0.0);
  EXPECT_LE(rep.implied_K, 4.0);  // |Df|^Q / J_f
}

TEST(LineFamily, RejectsUnsupportedFrames)
{
  EXPECT_THROW(acceptance::horizontal_line_family(frames::engel(), 3), ConfigError);
}

TEST(Suite, CheapCriteriaPass)
{
  acceptance::SuiteOptions o;
  o.only = {1, 2, 5};
  const auto res = acceptance::run_suite(o);
  ASSERT_EQ(res.size(), 3u);
  for (const auto& r : res) EXPECT_TRUE(r.pass) << r.id << ": " << r.summary;
  EXPECT_EQ(acceptance::suite_json(res).dump(), acceptance::suite_json(acceptance::run_suite(o)).dump());
}

TEST(Suite, DualOracleMatchesRectangle)
{
  // The exact dual solve reproduces h/w on a rectangle family aligned with the grid.
  const auto fam = acceptance::detail::rectangle_family(1.0, 0.5, 16);
  const DensityGrid g(fam.bounds(), {8, 8});
  EXPECT_NEAR(acceptance::detail::dual_modulus(fam, g), 0.5, 1e-9);
}
