#pragma once

/// @file
/// Sparse multivariate polynomials with double coefficients.

#include <cmath>
#include <map>
#include <ostream>
#include <span>
#include <vector>

#include "sublab/common.hpp"

namespace sublab {

using Exponents = std::vector<int>;

/// Sparse polynomial in a fixed number of variables. Terms with exactly zero
/// coefficient are never stored.
class Polynomial
{
public:
  Polynomial() = default;
  explicit Polynomial(int nvars) : nvars_(nvars) {}

  static Polynomial constant(int nvars, double c)
  {
    Polynomial p(nvars);
    p.add_term(Exponents(static_cast<std::size_t>(nvars), 0), c);
    return p;
  }

  static Polynomial variable(int nvars, int i, double c = 1.0)
  {
    Polynomial p(nvars);
    Exponents e(static_cast<std::size_t>(nvars), 0);
    e[static_cast<std::size_t>(i)] = 1;
    p.add_term(std::move(e), c);
    return p;
  }

  static Polynomial monomial(Exponents e, double c)
  {
    Polynomial p(static_cast<int>(e.size()));
    p.add_term(std::move(e), c);
    return p;
  }

  int nvars() const { return nvars_; }
  const std::map<Exponents, double>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  void add_term(Exponents e, double c)
  {
    if (static_cast<int>(e.size()) != nvars_)
      throw StructuralError("monomial exponent length does not match variable count");
    if (c == 0.0) return;
    auto [it, inserted] = terms_.try_emplace(std::move(e), c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0.0) terms_.erase(it);
    }
  }

  double coefficient(const Exponents& e) const
  {
    auto it = terms_.find(e);
    return it == terms_.end() ? 0.0 : it->second;
  }

  int degree() const
  {
    int d = -1;
    for (const auto& [e, c] : terms_) {
      int s = 0;
      for (int k : e) s += k;
      d = std::max(d, s);
    }
    return d;
  }

  double max_abs_coefficient() const
  {
    double m = 0.0;
    for (const auto& [e, c] : terms_) m = std::max(m, std::abs(c));
    return m;
  }

  double operator()(std::span<const double> x) const
  {
    double acc = 0.0;
    for (const auto& [e, c] : terms_) {
      double t = c;
      for (std::size_t i = 0; i < e.size(); ++i) {
        for (int k = 0; k < e[i]; ++k) t *= x[i];
      }
      acc += t;
    }
    return acc;
  }

  double operator()(const Vec& x) const { return (*this)(std::span<const double>(x.data(), static_cast<std::size_t>(x.size()))); }

  Polynomial derivative(int i) const
  {
    Polynomial out(nvars_);
    for (const auto& [e, c] : terms_) {
      const int k = e[static_cast<std::size_t>(i)];
      if (k == 0) continue;
      Exponents d = e;
      d[static_cast<std::size_t>(i)] = k - 1;
      out.add_term(std::move(d), c * k);
    }
    return out;
  }

  /// Drops terms with |c| ≤ tol.
  Polynomial pruned(double tol) const
  {
    Polynomial out(nvars_);
    for (const auto& [e, c] : terms_)
      if (std::abs(c) > tol) out.terms_.emplace(e, c);
    return out;
  }

  template <typename Pred>
  Polynomial filtered(Pred&& keep) const
  {
    Polynomial out(nvars_);
    for (const auto& [e, c] : terms_)
      if (keep(e, c)) out.terms_.emplace(e, c);
    return out;
  }

  /// Multiplies every coefficient by factor(e).
  template <typename Fn>
  Polynomial rescaled(Fn&& factor) const
  {
    Polynomial out(nvars_);
    for (const auto& [e, c] : terms_) out.add_term(e, c * factor(e));
    return out;
  }

  /// Substitutes subs[i] for variable i. All substitutes share one variable count.
  Polynomial compose(const std::vector<Polynomial>& subs) const;

  Polynomial& operator+=(const Polynomial& o)
  {
    adopt(o);
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o)
  {
    adopt(o);
    for (const auto& [e, c] : o.terms_) add_term(e, -c);
    return *this;
  }
  Polynomial& operator*=(double s)
  {
    if (s == 0.0) {
      terms_.clear();
      return *this;
    }
    for (auto& [e, c] : terms_) c *= s;
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator-(Polynomial a)
  {
    a *= -1.0;
    return a;
  }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b)
  {
    a.check_compatible(b);
    Polynomial out(std::max(a.nvars_, b.nvars_));
    for (const auto& [ea, ca] : a.terms_) {
      for (const auto& [eb, cb] : b.terms_) {
        Exponents e = ea;
        for (std::size_t i = 0; i < e.size(); ++i) e[i] += eb[i];
        out.add_term(std::move(e), ca * cb);
      }
    }
    return out;
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.terms_ == b.terms_; }

  friend std::ostream& operator<<(std::ostream& os, const Polynomial& p)
  {
    if (p.terms_.empty()) return os << "0";
    bool first = true;
    for (const auto& [e, c] : p.terms_) {
      if (!first) os << " + ";
      first = false;
      os << c;
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i] == 0) continue;
        os << "*x" << i;
        if (e[i] > 1) os << "^" << e[i];
      }
    }
    return os;
  }

private:
  void adopt(const Polynomial& o)
  {
    if (terms_.empty() && nvars_ != o.nvars_) nvars_ = o.nvars_;
    check_compatible(o);
  }

  void check_compatible(const Polynomial& o) const
  {
    if (nvars_ != o.nvars_ && !terms_.empty() && !o.terms_.empty())
      throw StructuralError("polynomials over different variable counts");
  }

  int nvars_ = 0;
  std::map<Exponents, double> terms_;
};

inline Polynomial Polynomial::compose(const std::vector<Polynomial>& subs) const
{
  if (static_cast<int>(subs.size()) != nvars_)
    throw StructuralError("substitution count does not match variable count");
  const int m = subs.empty() ? 0 : subs.front().nvars();
  Polynomial out(m);
  // Cache powers of each substitute.
  std::vector<std::vector<Polynomial>> powers(subs.size());
  for (std::size_t i = 0; i < subs.size(); ++i) powers[i].push_back(Polynomial::constant(m, 1.0));
  auto power = [&](std::size_t i, int k) -> const Polynomial& {
    while (static_cast<int>(powers[i].size()) <= k) powers[i].push_back(powers[i].back() * subs[i]);
    return powers[i][static_cast<std::size_t>(k)];
  };
  for (const auto& [e, c] : terms_) {
    Polynomial t = Polynomial::constant(m, c);
    for (std::size_t i = 0; i < e.size(); ++i)
      if (e[i] > 0) t = t * power(i, e[i]);
    out += t;
  }
  return out;
}

/// Weighted degree Σ α_i w_i of a monomial.
inline int weighted_degree(const Exponents& e, std::span<const int> weights)
{
  int d = 0;
  for (std::size_t i = 0; i < e.size(); ++i) d += e[i] * weights[i];
  return d;
}

}  // namespace sublab
