#pragma once

/// @file
/// Graded Lie algebra morphisms: block-diagonal linear maps determined by
/// their first-layer block, with operator norms and Jacobians.

#include <memory>

#include "sublab/carnot/algebra.hpp"
#include "sublab/carnot/group.hpp"

namespace sublab {

class GradedMorphism
{
public:
  GradedMorphism() = default;

  /// Extends a first-layer block to all layers by A[a, b] = [Aa, Ab]. Throws
  /// StructuralError when the extension is not a bracket homomorphism.
  static GradedMorphism from_first_layer(std::shared_ptr<const CarnotAlgebra> source, std::shared_ptr<const CarnotAlgebra> target,
                                         const Mat& block, double tol = 1e-8)
  {
    const auto& s = *source;
    const auto& t = *target;
    if (s.step() != t.step()) throw StructuralError("graded morphism needs algebras of the same step");
    if (block.rows() != t.rank() || block.cols() != s.rank()) throw StructuralError("first-layer block has the wrong shape");
    GradedMorphism m;
    m.source_ = std::move(source);
    m.target_ = std::move(target);
    m.matrix_ = Mat::Zero(t.dim(), s.dim());
    m.matrix_.topLeftCorner(t.rank(), s.rank()) = block;
    for (int l = 1; l < s.step(); ++l) {
      // Columns: [e_a, e_b] for a in V_1, b in V_l, restricted to V_{l+1}.
      const int so = s.layer_offset(l), sn = s.layers()[static_cast<std::size_t>(l)];
      const int to = t.layer_offset(l), tn = t.layers()[static_cast<std::size_t>(l)];
      const int sp = s.layer_offset(l - 1), spn = s.layers()[static_cast<std::size_t>(l - 1)];
      const int pairs = s.rank() * spn;
      Mat c(sn, pairs), r(tn, pairs);
      int col = 0;
      for (int a = 0; a < s.rank(); ++a)
        for (int b = sp; b < sp + spn; ++b, ++col) {
          const Vec ea = Vec::Unit(s.dim(), a), eb = Vec::Unit(s.dim(), b);
          c.col(col) = s.bracket(ea, eb).segment(so, sn);
          r.col(col) = t.bracket(m.matrix_ * ea, m.matrix_ * eb).segment(to, tn);
        }
      // Square solve on pivot pairs (structure constants are usually ±1, so
      // integer blocks stay exact); the remaining pairs are checked below.
      const Eigen::ColPivHouseholderQR<Mat> qr(c);
      if (qr.rank() < sn) throw StructuralError("source algebra is not generated by its first layer");
      Mat cs(sn, sn), rs(tn, sn);
      for (int i = 0; i < sn; ++i) {
        cs.col(i) = c.col(qr.colsPermutation().indices()[i]);
        rs.col(i) = r.col(qr.colsPermutation().indices()[i]);
      }
      m.matrix_.block(to, so, tn, sn) = cs.transpose().partialPivLu().solve(rs.transpose()).transpose();
    }
    const double defect = m.bracket_defect();
    if (defect > tol * std::max(1.0, m.matrix_.cwiseAbs().maxCoeff()))
      throw StructuralError("first-layer block does not extend to a bracket homomorphism (defect " + std::to_string(defect) + ")");
    return m;
  }

  static GradedMorphism identity(std::shared_ptr<const CarnotAlgebra> g)
  {
    const Mat block = Mat::Identity(g->rank(), g->rank());
    return from_first_layer(g, g, block);
  }

  const CarnotAlgebra& source() const { return *source_; }
  const CarnotAlgebra& target() const { return *target_; }
  std::shared_ptr<const CarnotAlgebra> source_ptr() const { return source_; }
  std::shared_ptr<const CarnotAlgebra> target_ptr() const { return target_; }
  const Mat& matrix() const { return matrix_; }
  Mat first_layer() const { return matrix_.topLeftCorner(target_->rank(), source_->rank()); }
  Mat layer_block(int l) const
  {
    return matrix_.block(target_->layer_offset(l), source_->layer_offset(l), target_->layers()[static_cast<std::size_t>(l)],
                         source_->layers()[static_cast<std::size_t>(l)]);
  }

  /// In exponential coordinates a graded morphism acts linearly.
  Vec apply(const Vec& v) const { return matrix_ * v; }

  /// max |A[e_j, e_k] − [Ae_j, Ae_k]| over basis pairs.
  double bracket_defect() const
  {
    double d = 0.0;
    const int n = source_->dim();
    for (int j = 0; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        const Vec ej = Vec::Unit(n, j), ek = Vec::Unit(n, k);
        const Vec lhs = matrix_ * source_->bracket(ej, ek);
        const Vec rhs = target_->bracket(matrix_ * ej, matrix_ * ek);
        d = std::max(d, (lhs - rhs).cwiseAbs().maxCoeff());
      }
    return d;
  }

  /// B∘A.
  friend GradedMorphism compose(const GradedMorphism& b, const GradedMorphism& a)
  {
    if (b.source_->dim() != a.target_->dim()) throw StructuralError("morphism composition: dimension mismatch");
    GradedMorphism m;
    m.source_ = a.source_;
    m.target_ = b.target_;
    m.matrix_ = b.matrix_ * a.matrix_;
    return m;
  }

private:
  std::shared_ptr<const CarnotAlgebra> source_, target_;
  Mat matrix_;
};

struct MorphismNorms
{
  double max = 0.0;  ///< ‖A‖
  double min = 0.0;  ///< ‖A‖_s
};

/// max and min of |Av| over unit first-layer vectors (orthonormal basis of V_1).
inline MorphismNorms morphism_norms(const GradedMorphism& a, int samples = 4096)
{
  const Mat m = a.first_layer();
  MorphismNorms out{0.0, std::numeric_limits<double>::infinity()};
  for (const Vec& v : sphere_directions(static_cast<int>(m.cols()), samples)) {
    const double s = (m * v).norm();
    out.max = std::max(out.max, s);
    out.min = std::min(out.min, s);
  }
  return out;
}

/// Volume scaling of A: the product of |det| over the layer blocks.
inline double morphism_jacobian(const GradedMorphism& a)
{
  double j = 1.0;
  for (int l = 0; l < a.source().step(); ++l) {
    const Mat b = a.layer_block(l);
    if (b.rows() != b.cols()) return 0.0;
    // Cofactor formulas keep small integer blocks exact.
    double det;
    if (b.rows() == 1) det = b(0, 0);
    else if (b.rows() == 2) det = b(0, 0) * b(1, 1) - b(0, 1) * b(1, 0);
    else det = b.determinant();
    j *= std::abs(det);
  }
  return j;
}

/// Dilation matrix δ_λ of an algebra (diagonal λ^{w_i}).
inline Mat dilation_matrix(const CarnotAlgebra& g, double lambda)
{
  Vec d(g.dim());
  for (int i = 0; i < g.dim(); ++i) d[i] = std::pow(lambda, g.weights()[static_cast<std::size_t>(i)]);
  return d.asDiagonal();
}

}  // namespace sublab
