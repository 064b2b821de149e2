#include <gtest/gtest.h>

#include "sublab/sr/frame_io.hpp"

using namespace sublab;

namespace {

Polynomial var(int n, int i) { return Polynomial::variable(n, i); }

PolyVectorField random_field(std::mt19937_64& rng, int n, int max_deg)
{
  std::vector<Polynomial> comps;
  for (int i = 0; i < n; ++i) {
    Polynomial p(n);
    for (int t = 0; t < 4; ++t) {
      Exponents e(static_cast<std::size_t>(n), 0);
      int budget = static_cast<int>(uniform01(rng) * (max_deg + 1));
      while (budget-- > 0) ++e[static_cast<std::size_t>(rng() % static_cast<unsigned>(n))];
      p.add_term(e, std::round(8.0 * uniform(rng, -1.0, 1.0)) / 4.0);
    }
    comps.push_back(p);
  }
  return PolyVectorField(comps);
}

}  // namespace

TEST(LieBracket, HeisenbergFrameGivesVerticalField)
{
  const auto f = frames::heisenberg();
  const auto xy = lie_bracket(f.field(0), f.field(1));
  EXPECT_EQ(xy, PolyVectorField::coordinate(3, 2));
}

TEST(LieBracket, HeisenbergFrameMatchesConvention)
{
  const auto f = frames::heisenberg();
  const int n = 3;
  EXPECT_EQ(f.field(0), PolyVectorField({Polynomial::constant(n, 1.0), Polynomial(n), -0.5 * var(n, 1)}));
  EXPECT_EQ(f.field(1), PolyVectorField({Polynomial(n), Polynomial::constant(n, 1.0), 0.5 * var(n, 0)}));
}

TEST(LieBracket, SelfBracketVanishes)
{
  std::mt19937_64 rng = make_rng(3, 0);
  for (int k = 0; k < 20; ++k) {
    const auto x = random_field(rng, 3, 3);
    EXPECT_TRUE(lie_bracket(x, x).is_zero());
  }
}

TEST(LieBracket, EngelTypeFrame)
{
  const auto f = frames::engel();
  const int n = 4;
  const auto x12 = lie_bracket(f.field(0), f.field(1));
  // ∂_x applied to (0, 1, x, x²) componentwise.
  const PolyVectorField expected12({Polynomial(n), Polynomial(n), Polynomial::constant(n, 1.0), 2.0 * var(n, 0)});
  EXPECT_EQ(x12, expected12);
  const auto x112 = lie_bracket(f.field(0), x12);
  EXPECT_EQ(x112, 2.0 * PolyVectorField::coordinate(n, 3));
  EXPECT_TRUE(lie_bracket(f.field(1), x12).is_zero());
}

TEST(LieBracket, BilinearAndAntisymmetric)
{
  std::mt19937_64 rng = make_rng(11, 0);
  for (int k = 0; k < 30; ++k) {
    const auto x = random_field(rng, 3, 2);
    const auto y = random_field(rng, 3, 2);
    const auto z = random_field(rng, 3, 2);
    const double a = std::round(8 * uniform(rng, -1, 1)) / 4;
    EXPECT_LE(coefficient_distance(lie_bracket(x, y), -1.0 * lie_bracket(y, x)), 1e-12);
    EXPECT_LE(coefficient_distance(lie_bracket(x + a * z, y), lie_bracket(x, y) + a * lie_bracket(z, y)), 1e-12);
  }
}

TEST(LieBracket, DegreeBound)
{
  std::mt19937_64 rng = make_rng(5, 0);
  for (int k = 0; k < 20; ++k) {
    const auto x = random_field(rng, 3, 3);
    const auto y = random_field(rng, 3, 3);
    EXPECT_LE(lie_bracket(x, y).degree(), x.degree() + y.degree());
  }
}

TEST(LieBracket, DimensionMismatchThrows)
{
  EXPECT_THROW(lie_bracket(PolyVectorField::coordinate(2, 0), PolyVectorField::coordinate(3, 0)), StructuralError);
}

TEST(LeftInvariant, FieldsMatchGroupLaw)
{
  // X_j(x) = d/ds (x * s e_j) at s = 0, checked by finite differences of the product.
  const auto g = algebras::engel();
  const auto f = HorizontalFrame::left_invariant(g);
  std::mt19937_64 rng = make_rng(1, 0);
  for (int k = 0; k < 10; ++k) {
    const Vec x = gaussian_vec(rng, 4);
    for (int j = 0; j < 2; ++j) {
      const double h = 1e-6;
      Vec e = Vec::Zero(4);
      e[j] = h;
      const Vec fd = (group_product(g, x, e) - group_product(g, x, -e)) / (2 * h);
      EXPECT_LE((fd - f.field(j)(x)).norm(), 1e-7);
    }
  }
}

TEST(Growth, HeisenbergEverywhere)
{
  const auto f = frames::heisenberg();
  std::mt19937_64 rng = make_rng(2, 0);
  for (int k = 0; k < 5; ++k) {
    const auto g = growth_vector_at(f, gaussian_vec(rng, 3));
    EXPECT_EQ(g.ranks, (std::vector<int>{2, 3}));
    EXPECT_EQ(g.growth, (std::vector<int>{2, 1}));
    EXPECT_EQ(g.weights, (std::vector<int>{1, 1, 2}));
    EXPECT_EQ(g.step, 2);
    EXPECT_EQ(g.Q, 4);
  }
}

TEST(Growth, Abelian)
{
  const auto g = growth_vector_at(frames::abelian(2), Vec::Zero(2));
  EXPECT_EQ(g.ranks, (std::vector<int>{2}));
  EXPECT_EQ(g.Q, 2);
  EXPECT_EQ(g.step, 1);
}

TEST(Growth, EngelTypeAtOrigin)
{
  const auto g = growth_vector_at(frames::engel(), Vec::Zero(4));
  EXPECT_EQ(g.ranks, (std::vector<int>{2, 3, 4}));
  EXPECT_EQ(g.growth, (std::vector<int>{2, 1, 1}));
  EXPECT_EQ(g.Q, 7);
  EXPECT_EQ(g.adapted_fields.size(), 4u);
}

TEST(Growth, InvariantsOnRandomPoints)
{
  std::mt19937_64 rng = make_rng(9, 0);
  for (const auto& f : {frames::heisenberg(), frames::engel(), frames::perturbed_heisenberg(), frames::engel_group()}) {
    for (int k = 0; k < 5; ++k) {
      const auto g = growth_vector_at(f, gaussian_vec(rng, f.dim()));
      int sum = 0, q = 0;
      for (std::size_t i = 0; i < g.growth.size(); ++i) {
        sum += g.growth[i];
        q += static_cast<int>(i + 1) * g.growth[i];
        if (i > 0) EXPECT_GE(g.ranks[i], g.ranks[i - 1]);
      }
      EXPECT_EQ(sum, f.dim());
      EXPECT_EQ(g.ranks.back(), f.dim());
      EXPECT_EQ(g.Q, q);
    }
  }
}

TEST(Growth, NonGeneratingCarriesPartialFlag)
{
  // ∂x, ∂y on R³ never reach ∂z.
  const HorizontalFrame f({PolyVectorField::coordinate(3, 0), PolyVectorField::coordinate(3, 1)}, "flat");
  try {
    growth_vector_at(f, Vec::Zero(3));
    FAIL() << "expected NonGeneratingError";
  } catch (const NonGeneratingError& e) {
    EXPECT_EQ(e.partial().ranks.front(), 2);
  }
}

TEST(Growth, MartinetDegeneratesOnSurface)
{
  // X = ∂x + (y²/2)∂z, Y = ∂y: step 2 off {y=0}, step 3 on it.
  const int n = 3;
  const HorizontalFrame f(
      {PolyVectorField({Polynomial::constant(n, 1), Polynomial(n), 0.5 * var(n, 1) * var(n, 1)}), PolyVectorField::coordinate(n, 1)},
      "martinet");
  Vec p = Vec::Zero(3);
  EXPECT_EQ(growth_vector_at(f, p).Q, 5);
  p[1] = 0.5;
  EXPECT_EQ(growth_vector_at(f, p).Q, 4);
}

TEST(FrameIo, EngelTypeFileMatchesBuiltin)
{
  const auto f = load_frame(std::string(SUBLAB_DATA_DIR) + "/engel_type.frame.json");
  ASSERT_EQ(f.rank(), 2);
  EXPECT_EQ(f.field(0), frames::engel().field(0));
  EXPECT_EQ(f.field(1), frames::engel().field(1));
}

TEST(FrameIo, RoundTripAndRationals)
{
  const auto m = load_frame(std::string(SUBLAB_DATA_DIR) + "/martinet.frame.json");
  EXPECT_DOUBLE_EQ(m.field(0)[2].coefficient({0, 2, 0}), 0.5);
  const auto back = frame_from_json(frame_to_json(m));
  EXPECT_EQ(back.field(0), m.field(0));
  EXPECT_EQ(back.field(1), m.field(1));
}

TEST(FrameIo, InlineAlgebraGivesLeftInvariantFrame)
{
  const auto f = load_frame(std::string(SUBLAB_DATA_DIR) + "/heisenberg2.frame.json");
  EXPECT_TRUE(f.is_group());
  EXPECT_EQ(f.rank(), 4);
  EXPECT_EQ(growth_vector_at(f, Vec::Zero(5)).Q, 6);
}

TEST(FrameIo, MalformedInputs)
{
  EXPECT_THROW(frame_from_json(io::json::parse(R"({"n": 2, "fields": [[[3, [0,0], 1]]]})")), StructuralError);
  EXPECT_THROW(frame_from_json(io::json::parse(R"({"n": 2, "fields": [[[1, [0], 1]]]})")), StructuralError);
  EXPECT_THROW(frame_from_json(io::json::parse(R"({"n": 2, "fieldz": []})")), StructuralError);
  EXPECT_THROW(load_frame("/nonexistent/frame.json"), IoError);
  EXPECT_EQ(resolve_frame("abelian(3)").dim(), 3);
}
