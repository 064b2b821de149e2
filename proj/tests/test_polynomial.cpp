#include <gtest/gtest.h>

#include "sublab/polynomial.hpp"

using namespace sublab;

TEST(Polynomial, ArithmeticAndEvaluation)
{
  const auto x = Polynomial::variable(2, 0);
  const auto y = Polynomial::variable(2, 1);
  const auto p = x * x * y - 3.0 * y + Polynomial::constant(2, 2.0);
  Vec pt(2);
  pt << 2.0, -1.0;
  EXPECT_DOUBLE_EQ(p(pt), 4.0 * -1.0 + 3.0 + 2.0);
  EXPECT_EQ(p.degree(), 3);
  EXPECT_TRUE((p - p).is_zero());
}

TEST(Polynomial, DerivativeDropsConstants)
{
  const auto x = Polynomial::variable(2, 0);
  const auto y = Polynomial::variable(2, 1);
  const auto p = x * x * y + 5.0 * y;
  EXPECT_EQ(p.derivative(0), 2.0 * x * y);
  EXPECT_EQ(p.derivative(1), x * x + Polynomial::constant(2, 5.0));
}

TEST(Polynomial, ComposeMatchesPointwiseSubstitution)
{
  const auto x = Polynomial::variable(2, 0);
  const auto y = Polynomial::variable(2, 1);
  const auto p = x * x * y - 2.0 * x;
  // (u, v) -> (u + v, u v)
  const auto u = Polynomial::variable(2, 0);
  const auto v = Polynomial::variable(2, 1);
  const auto q = p.compose({u + v, u * v});
  Vec pt(2);
  pt << 0.3, -1.7;
  Vec img(2);
  img << pt[0] + pt[1], pt[0] * pt[1];
  EXPECT_NEAR(q(pt), p(img), 1e-14);
}

TEST(Polynomial, MismatchedExponentLengthThrows)
{
  Polynomial p(2);
  EXPECT_THROW(p.add_term({1, 0, 0}, 1.0), StructuralError);
}
