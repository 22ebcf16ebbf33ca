#pragma once

// Exact calculus on finite sums  c * x^gamma * |x|^s * log(5/|x|)^k,  k in {0, 1}.

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <compare>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace polysing {

using Rational = boost::multiprecision::cpp_rational;

// Convert an exact rational to a floating type without going through double
// when Real is wider.
template <class Real>
Real to_real(const Rational& q) {
  return Real(boost::multiprecision::numerator(q)) / Real(boost::multiprecision::denominator(q));
}

template <>
inline double to_real<double>(const Rational& q) {
  return q.convert_to<double>();
}

class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::size_t dim) : e_(dim, 0) {}
  MultiIndex(std::initializer_list<int> e) : e_(e) { check(); }
  explicit MultiIndex(std::vector<int> e) : e_(std::move(e)) { check(); }

  static MultiIndex unit(std::size_t dim, std::size_t axis) {
    if (axis >= dim) throw std::out_of_range("MultiIndex::unit: axis out of range");
    MultiIndex a(dim);
    a.e_[axis] = 1;
    return a;
  }

  std::size_t dim() const noexcept { return e_.size(); }
  int operator[](std::size_t i) const { return e_.at(i); }
  const std::vector<int>& exponents() const noexcept { return e_; }

  int order() const noexcept {
    int s = 0;
    for (int v : e_) s += v;
    return s;
  }

  Rational factorial() const {
    boost::multiprecision::cpp_int f = 1;
    for (int v : e_)
      for (int k = 2; k <= v; ++k) f *= k;
    return Rational(f);
  }

  double factorial_value() const {
    double f = 1.0;
    for (int v : e_)
      for (int k = 2; k <= v; ++k) f *= k;
    return f;
  }

  MultiIndex shifted(std::size_t axis, int delta) const {
    MultiIndex a = *this;
    a.e_.at(axis) += delta;
    if (a.e_[axis] < 0) throw std::domain_error("MultiIndex: negative exponent");
    return a;
  }

  // Evaluates x^alpha with integer powers.
  template <class Real>
  Real monomial(std::span<const Real> x) const {
    Real p = 1;
    for (std::size_t i = 0; i < e_.size(); ++i)
      for (int k = 0; k < e_[i]; ++k) p *= x[i];
    return p;
  }

  auto operator<=>(const MultiIndex&) const = default;
  bool operator==(const MultiIndex&) const = default;

 private:
  void check() const {
    for (int v : e_)
      if (v < 0) throw std::invalid_argument("MultiIndex: negative exponent");
  }

  std::vector<int> e_;
};

// All alpha in N^dim with |alpha| <= max_order, graded then lexicographic.
inline std::vector<MultiIndex> enumerate_multi_indices(std::size_t dim, int max_order) {
  std::vector<MultiIndex> out;
  if (max_order < 0) return out;
  std::vector<int> cur(dim, 0);
  for (int total = 0; total <= max_order; ++total) {
    // compositions of `total` into dim parts
    auto rec = [&](auto&& self, std::size_t pos, int left) -> void {
      if (pos + 1 == dim) {
        cur[pos] = left;
        out.emplace_back(cur);
        return;
      }
      for (int v = left; v >= 0; --v) {
        cur[pos] = v;
        self(self, pos + 1, left - v);
      }
    };
    if (dim == 0) {
      if (total == 0) out.emplace_back(cur);
      continue;
    }
    rec(rec, 0, total);
  }
  return out;
}

struct Monomial {
  MultiIndex gamma;
  int rpow = 0;
  int logflag = 0;

  auto operator<=>(const Monomial&) const = default;
  bool operator==(const Monomial&) const = default;
};

class RadialExpr {
 public:
  RadialExpr() = default;
  explicit RadialExpr(std::size_t dim) : dim_(dim) {}

  static RadialExpr constant(std::size_t dim, const Rational& c) { return power(dim, 0, c); }

  static RadialExpr power(std::size_t dim, int s, const Rational& c = 1) {
    RadialExpr e(dim);
    e.add_term(c, MultiIndex(dim), s, 0);
    return e;
  }

  // c |x|^s log(5/|x|)
  static RadialExpr log_power(std::size_t dim, int s, const Rational& c = 1) {
    RadialExpr e(dim);
    e.add_term(c, MultiIndex(dim), s, 1);
    return e;
  }

  static RadialExpr coordinate(std::size_t dim, std::size_t axis, const Rational& c = 1) {
    RadialExpr e(dim);
    e.add_term(c, MultiIndex::unit(dim, axis), 0, 0);
    return e;
  }

  // Adds c x^gamma |x|^s L^k and re-canonicalizes: x_n^2 is rewritten as
  // |x|^2 - sum_{i<n} x_i^2 until gamma_n <= 1, which makes the representation unique.
  void add_term(const Rational& c, const MultiIndex& gamma, int rpow, int logflag) {
    if (logflag < 0 || logflag > 1)
      throw std::invalid_argument("RadialExpr: only log powers 0 and 1 are supported");
    if (gamma.dim() != dim_) throw std::invalid_argument("RadialExpr: dimension mismatch");
    if (c == 0) return;
    if (dim_ > 0 && gamma[dim_ - 1] >= 2) {
      MultiIndex g = gamma.shifted(dim_ - 1, -2);
      add_term(c, g, rpow + 2, logflag);
      for (std::size_t i = 0; i + 1 < dim_; ++i) add_term(-c, g.shifted(i, 2), rpow, logflag);
      return;
    }
    Monomial key{gamma, rpow, logflag};
    auto [it, inserted] = terms_.try_emplace(std::move(key), c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  std::size_t dim() const noexcept { return dim_; }
  bool is_zero() const noexcept { return terms_.empty(); }
  std::size_t size() const noexcept { return terms_.size(); }
  const std::map<Monomial, Rational>& terms() const noexcept { return terms_; }

  bool is_radial() const {
    for (const auto& [k, c] : terms_)
      if (k.gamma.order() != 0) return false;
    return true;
  }

  RadialExpr& operator+=(const RadialExpr& o) {
    require_same_dim(o);
    for (const auto& [k, c] : o.terms_) add_term(c, k.gamma, k.rpow, k.logflag);
    return *this;
  }
  RadialExpr& operator-=(const RadialExpr& o) {
    require_same_dim(o);
    for (const auto& [k, c] : o.terms_) add_term(-c, k.gamma, k.rpow, k.logflag);
    return *this;
  }
  RadialExpr& operator*=(const Rational& s) {
    if (s == 0) {
      terms_.clear();
      return *this;
    }
    for (auto& [k, c] : terms_) c *= s;
    return *this;
  }

  friend RadialExpr operator+(RadialExpr a, const RadialExpr& b) { return a += b; }
  friend RadialExpr operator-(RadialExpr a, const RadialExpr& b) { return a -= b; }
  friend RadialExpr operator*(RadialExpr a, const Rational& s) { return a *= s; }
  friend RadialExpr operator*(const Rational& s, RadialExpr a) { return a *= s; }

  bool operator==(const RadialExpr& o) const { return dim_ == o.dim_ && terms_ == o.terms_; }

  template <class Real>
  Real evaluate(std::span<const Real> x) const {
    using std::log;
    using std::pow;
    using std::sqrt;
    if (x.size() != dim_) throw std::invalid_argument("RadialExpr::evaluate: dimension mismatch");
    Real r2 = 0;
    for (const Real& v : x) r2 += v * v;
    if (r2 == 0) throw std::domain_error("RadialExpr::evaluate: x = 0");
    const Real r = sqrt(r2);
    const Real L = log(Real(5) / r);
    Real sum = 0;
    for (const auto& [k, c] : terms_) {
      Real t = to_real<Real>(c) * k.gamma.template monomial<Real>(x) * pow(r, k.rpow);
      if (k.logflag) t *= L;
      sum += t;
    }
    return sum;
  }

  double operator()(std::span<const double> x) const { return evaluate<double>(x); }

  std::string str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, c] : terms_) {
      os << (first ? "" : " + ") << "(" << c << ")";
      for (std::size_t i = 0; i < dim_; ++i)
        if (k.gamma[i]) os << "*x" << (i + 1) << (k.gamma[i] > 1 ? "^" + std::to_string(k.gamma[i]) : "");
      if (k.rpow) os << "*r^" << k.rpow;
      if (k.logflag) os << "*log(5/r)";
      first = false;
    }
    return os.str();
  }

 private:
  void require_same_dim(const RadialExpr& o) const {
    if (o.dim_ != dim_) throw std::invalid_argument("RadialExpr: dimension mismatch");
  }

  std::size_t dim_ = 0;
  std::map<Monomial, Rational> terms_;
};

// Partial derivative along a 0-based axis.
inline RadialExpr derive(const RadialExpr& e, std::size_t axis) {
  if (axis >= e.dim()) throw std::out_of_range("derive: axis out of range");
  RadialExpr out(e.dim());
  for (const auto& [k, c] : e.terms()) {
    if (k.gamma[axis] > 0) out.add_term(c * k.gamma[axis], k.gamma.shifted(axis, -1), k.rpow, k.logflag);
    MultiIndex up = k.gamma.shifted(axis, 1);
    if (k.rpow != 0) out.add_term(c * k.rpow, up, k.rpow - 2, k.logflag);
    if (k.logflag) out.add_term(-c, up, k.rpow - 2, 0);
  }
  return out;
}

inline RadialExpr derive(const RadialExpr& e, const MultiIndex& alpha) {
  RadialExpr out = e;
  for (std::size_t i = 0; i < alpha.dim(); ++i)
    for (int k = 0; k < alpha[i]; ++k) out = derive(out, i);
  return out;
}

// Product rule on P(x) g(r):  (dP) g + 2|gamma| P g'/r + P dg.
inline RadialExpr laplacian(const RadialExpr& e) {
  const std::size_t n = e.dim();
  const int ni = static_cast<int>(n);
  RadialExpr out(n);
  for (const auto& [k, c] : e.terms()) {
    const int s = k.rpow;
    const int deg = k.gamma.order();
    for (std::size_t i = 0; i < n; ++i)
      if (k.gamma[i] >= 2) out.add_term(c * k.gamma[i] * (k.gamma[i] - 1), k.gamma.shifted(i, -2), s, k.logflag);
    const Rational radial_coeff = Rational(2 * deg * s + s * (s + ni - 2));
    out.add_term(c * radial_coeff, k.gamma, s - 2, k.logflag);
    if (k.logflag) out.add_term(-c * (2 * deg + 2 * s + ni - 2), k.gamma, s - 2, 0);
  }
  return out;
}

// Generic path: sum of second derivatives. Kept for cross-checking the fast one.
inline RadialExpr laplacian_by_derivatives(const RadialExpr& e) {
  RadialExpr out(e.dim());
  for (std::size_t i = 0; i < e.dim(); ++i) out += derive(derive(e, i), i);
  return out;
}

inline RadialExpr iterated_laplacian(const RadialExpr& e, int m) {
  if (m < 1) throw std::invalid_argument("iterated_laplacian: m must be >= 1");
  RadialExpr out = e;
  for (int k = 0; k < m; ++k) out = laplacian(out);
  return out;
}

inline double eval(const RadialExpr& e, std::span<const double> x) { return e(x); }

// Double-precision snapshot of an expression for hot loops.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  explicit CompiledExpr(const RadialExpr& e) : dim_(e.dim()) {
    for (const auto& [k, c] : e.terms()) {
      Term t;
      t.coeff = c.convert_to<double>();
      t.rpow = k.rpow;
      t.logflag = k.logflag;
      for (std::size_t i = 0; i < dim_; ++i)
        if (k.gamma[i]) t.factors.emplace_back(i, k.gamma[i]);
      terms_.push_back(std::move(t));
    }
  }

  // r and L = log(5/r) supplied by the caller, who usually has them already.
  double operator()(std::span<const double> x, double r, double L) const {
    double sum = 0.0;
    for (const auto& t : terms_) {
      double v = t.coeff * std::pow(r, t.rpow);
      for (const auto& [i, p] : t.factors) v *= ipow(x[i], p);
      if (t.logflag) v *= L;
      sum += v;
    }
    return sum;
  }

  double operator()(std::span<const double> x) const {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    const double r = std::sqrt(r2);
    return (*this)(x, r, std::log(5.0 / r));
  }

  std::size_t dim() const noexcept { return dim_; }

 private:
  static double ipow(double b, int p) {
    double v = 1.0;
    for (int k = 0; k < p; ++k) v *= b;
    return v;
  }

  struct Term {
    double coeff = 0.0;
    int rpow = 0;
    int logflag = 0;
    std::vector<std::pair<std::size_t, int>> factors;
  };

  std::size_t dim_ = 0;
  std::vector<Term> terms_;
};

}  // namespace polysing
