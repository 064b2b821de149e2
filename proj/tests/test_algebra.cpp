#include <gtest/gtest.h>

#include "sublab/carnot/algebra_io.hpp"

using namespace sublab;

TEST(VerifyStructure, HeisenbergIsValid)
{
  const auto rep = verify_structure(algebras::heisenberg());
  EXPECT_TRUE(rep.valid());
}

TEST(VerifyStructure, SymmetricEntryIsAntisymmetryViolation)
{
  std::vector<double> c(27, 0.0);
  c[(0 * 3 + 1) * 3 + 2] = 1.0;  // c_12^3
  c[(1 * 3 + 0) * 3 + 2] = 1.0;  // c_21^3
  const CarnotAlgebra g({2, 1}, c);
  const auto rep = verify_structure(g);
  ASSERT_TRUE(rep.has(Axiom::Antisymmetry));
  const auto& v = rep.violations.front();
  EXPECT_EQ(v.axiom, Axiom::Antisymmetry);
  EXPECT_EQ(v.indices, (std::vector<int>{1, 2, 3}));
}

TEST(VerifyStructure, ZeroBracketsFailGeneration)
{
  const CarnotAlgebra g({2, 1}, std::vector<double>(27, 0.0));
  const auto rep = verify_structure(g);
  EXPECT_TRUE(rep.has(Axiom::Generation));
  EXPECT_FALSE(rep.has(Axiom::Antisymmetry));
}

TEST(VerifyStructure, GradingViolationDetected)
{
  // [e1, e2] landing in layer 1 breaks the grading.
  const auto g = CarnotAlgebra::from_brackets({2, 1}, {{0, 1, 0, 1.0}, {0, 1, 2, 1.0}});
  EXPECT_TRUE(verify_structure(g).has(Axiom::Grading));
}

TEST(VerifyStructure, JacobiViolationDetected)
{
  // [e1,e2]=e2, [e1,e3]=e3, [e2,e3]=e1: the cyclic sum on (1,2,3) is 2·e1.
  const auto g = CarnotAlgebra::from_brackets({3}, {{0, 1, 1, 1.0}, {0, 2, 2, 1.0}, {1, 2, 0, 1.0}});
  const auto rep = verify_structure(g);
  ASSERT_TRUE(rep.has(Axiom::Jacobi));
  for (const auto& v : rep.violations)
    if (v.axiom == Axiom::Jacobi) EXPECT_EQ(v.indices, (std::vector<int>{1, 2, 3, 1}));
}

TEST(VerifyStructure, BuiltinsValid)
{
  EXPECT_TRUE(verify_structure(algebras::engel()).valid());
  EXPECT_TRUE(verify_structure(algebras::abelian(4)).valid());
  for (int m = 2; m <= 6; ++m) EXPECT_TRUE(verify_structure(algebras::upper_triangular(m)).valid()) << m;
}

TEST(VerifyStructure, TensorSizeMismatchThrows)
{
  EXPECT_THROW(CarnotAlgebra({2, 1}, std::vector<double>(8, 0.0)), StructuralError);
}

TEST(HomogeneousDimension, KnownValues)
{
  EXPECT_EQ(homogeneous_dimension(algebras::heisenberg()), 4);
  EXPECT_EQ(homogeneous_dimension(algebras::engel()), 7);
  EXPECT_EQ(homogeneous_dimension(algebras::abelian(5)), 5);
  EXPECT_EQ(homogeneous_dimension(algebras::upper_triangular(4)), 1 * 3 + 2 * 2 + 3 * 1);
}

TEST(AlgebraFile, LoadsWithAntisymmetryCompletion)
{
  const auto g = load_algebra(std::string(SUBLAB_DATA_DIR) + "/heisenberg1.algebra.json");
  EXPECT_EQ(g.dim(), 3);
  EXPECT_DOUBLE_EQ(g.constant(0, 1, 2), 1.0);
  EXPECT_DOUBLE_EQ(g.constant(1, 0, 2), -1.0);
  EXPECT_TRUE(verify_structure(g).valid());
  const auto e = load_algebra(std::string(SUBLAB_DATA_DIR) + "/engel.algebra.json");
  EXPECT_EQ(homogeneous_dimension(e), 7);
}

TEST(AlgebraFile, RationalValuesAndValidation)
{
  const auto doc = io::json::parse(R"({"n": 3, "layers": [2, 1], "brackets": [[1, 2, 3, "1/2"]]})");
  const auto g = algebra_from_json(doc);
  EXPECT_DOUBLE_EQ(g.constant(0, 1, 2), 0.5);
  EXPECT_THROW(algebra_from_json(io::json::parse(R"({"n": 4, "layers": [2, 1]})")), StructuralError);
  EXPECT_THROW(algebra_from_json(io::json::parse(R"({"layers": [2, 1], "extra": 1})")), StructuralError);
  EXPECT_THROW(load_algebra("/nonexistent/file.json"), IoError);
}

TEST(AlgebraFile, RoundTripThroughJson)
{
  const auto g = algebras::upper_triangular(4);
  const auto h = algebra_from_json(algebra_to_json(g));
  EXPECT_EQ(g.tensor(), h.tensor());
}
