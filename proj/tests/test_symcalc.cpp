#include <gtest/gtest.h>

#include <random>
#include <set>
#include <vector>

#include "polysing/symcalc.hpp"

using namespace polysing;

namespace {

std::vector<double> random_point(std::mt19937_64& rng, std::size_t n, double rmin, double rmax) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(rmin, rmax);
  std::vector<double> x(n);
  double s = 0;
  for (auto& v : x) {
    v = g(rng);
    s += v * v;
  }
  const double r = u(rng) / std::sqrt(s);
  for (auto& v : x) v *= r;
  return x;
}

double central_diff(const RadialExpr& e, std::vector<double> x, std::size_t axis, double h) {
  x[axis] += h;
  const double fp = e(x);
  x[axis] -= 2 * h;
  const double fm = e(x);
  return (fp - fm) / (2 * h);
}

// A small zoo of expressions with monomials, negative powers and logs.
std::vector<RadialExpr> zoo(std::size_t n) {
  std::vector<RadialExpr> out;
  out.push_back(RadialExpr::power(n, -1));
  out.push_back(RadialExpr::power(n, 3, Rational(2, 7)));
  out.push_back(RadialExpr::log_power(n, 0));
  out.push_back(RadialExpr::log_power(n, 2, Rational(-3, 4)));
  RadialExpr mixed(n);
  mixed.add_term(Rational(5, 3), MultiIndex::unit(n, 0).shifted(n - 1, 1), -3, 0);
  mixed.add_term(Rational(1, 2), MultiIndex::unit(n, n - 1).shifted(n - 1, 2), 1, 1);
  out.push_back(mixed);
  return out;
}

}  // namespace

TEST(MultiIndex, OrderAndFactorial) {
  MultiIndex a{2, 0, 3};
  EXPECT_EQ(a.order(), 5);
  EXPECT_EQ(a.factorial(), Rational(12));
  EXPECT_DOUBLE_EQ(a.factorial_value(), 12.0);
  EXPECT_THROW(MultiIndex({1, -1}), std::invalid_argument);
}

TEST(MultiIndex, EnumerationCountsAreBinomial) {
  auto binom = [](int a, int b) {
    long double v = 1;
    for (int i = 1; i <= b; ++i) v = v * (a - b + i) / i;
    return static_cast<std::size_t>(v + 0.5L);
  };
  for (std::size_t n : {2u, 3u, 7u}) {
    for (int K = 0; K <= 5; ++K) {
      auto all = enumerate_multi_indices(n, K);
      EXPECT_EQ(all.size(), binom(K + static_cast<int>(n), static_cast<int>(n)));
      std::set<MultiIndex> uniq(all.begin(), all.end());
      EXPECT_EQ(uniq.size(), all.size());
      for (const auto& a : all) EXPECT_LE(a.order(), K);
    }
  }
  EXPECT_EQ(enumerate_multi_indices(7, 3).size(), 120u);
  EXPECT_TRUE(enumerate_multi_indices(4, -1).empty());
}

TEST(RadialExpr, RejectsHigherLogPowers) {
  RadialExpr e(3);
  EXPECT_THROW(e.add_term(1, MultiIndex(3), 0, 2), std::invalid_argument);
}

TEST(RadialExpr, CanonicalFormMergesEquivalentSpellings) {
  // x_2^2 in n = 2 is |x|^2 - x_1^2.
  RadialExpr a(2);
  a.add_term(1, MultiIndex{0, 2}, 0, 0);
  RadialExpr b(2);
  b.add_term(1, MultiIndex{0, 0}, 2, 0);
  b.add_term(-1, MultiIndex{2, 0}, 0, 0);
  EXPECT_EQ(a, b);
  EXPECT_TRUE((a - b).is_zero());
}

TEST(Derive, Examples) {
  const std::size_t n = 3;
  EXPECT_EQ(derive(RadialExpr::power(n, 2), 0), RadialExpr::coordinate(n, 0, 2));
  EXPECT_TRUE(derive(RadialExpr(n), 1).is_zero());

  RadialExpr L = RadialExpr::log_power(2, 0);
  RadialExpr expect(2);
  expect.add_term(-1, MultiIndex{1, 0}, -2, 0);
  EXPECT_EQ(derive(L, 0), expect);
  std::vector<double> x{0.3, 0.4};
  EXPECT_NEAR(derive(L, 0)(x), -1.2, 1e-15);
  EXPECT_NEAR(central_diff(L, x, 0, 1e-5), -1.2, 1e-9);
}

TEST(Derive, MixedPartialsCommute) {
  for (std::size_t n : {2u, 4u, 7u}) {
    for (const auto& e : zoo(n)) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) EXPECT_EQ(derive(derive(e, i), j), derive(derive(e, j), i));
    }
  }
}

TEST(Derive, MatchesFiniteDifferences) {
  std::mt19937_64 rng(7);
  for (std::size_t n : {2u, 5u, 7u}) {
    for (const auto& e : zoo(n)) {
      for (int trial = 0; trial < 20; ++trial) {
        auto x = random_point(rng, n, 0.3, 2.0);
        const std::size_t axis = static_cast<std::size_t>(trial) % n;
        const double exact = derive(e, axis)(x);
        const double fd = central_diff(e, x, axis, 1e-5);
        EXPECT_NEAR(fd, exact, 1e-7 * std::max(1.0, std::abs(exact))) << e.str();
      }
    }
  }
}

TEST(Laplacian, Examples) {
  EXPECT_EQ(laplacian(RadialExpr::power(7, -1)), RadialExpr::power(7, -3, -4));
  EXPECT_TRUE(laplacian(RadialExpr::constant(5, Rational(3, 2))).is_zero());
  EXPECT_EQ(laplacian(RadialExpr::log_power(6, 0)), RadialExpr::power(6, -2, -4));

  // second-difference cross-check of the first example
  std::vector<double> x{0.4, -0.3, 0.2, 0.5, 0.1, -0.6, 0.25};
  const auto e = RadialExpr::power(7, -1);
  const double h = 1e-3;
  double fd = 0;
  for (std::size_t i = 0; i < 7; ++i) {
    auto p = x, m = x;
    p[i] += h;
    m[i] -= h;
    fd += (e(p) - 2 * e(x) + e(m)) / (h * h);
  }
  EXPECT_NEAR(fd, laplacian(e)(x), 1e-4 * std::abs(laplacian(e)(x)));
}

TEST(Laplacian, FastPathAgreesWithGenericPath) {
  for (std::size_t n : {2u, 3u, 6u, 7u}) {
    for (const auto& e : zoo(n)) {
      EXPECT_EQ(laplacian(e), laplacian_by_derivatives(e)) << e.str();
      EXPECT_EQ(laplacian(laplacian(e)), laplacian_by_derivatives(laplacian_by_derivatives(e)));
    }
  }
}

TEST(IteratedLaplacian, Examples) {
  EXPECT_TRUE(iterated_laplacian(RadialExpr::power(7, -1), 3).is_zero());
  EXPECT_EQ(iterated_laplacian(RadialExpr::power(7, 3), 3), RadialExpr::power(7, -3, -576));
  EXPECT_TRUE(iterated_laplacian(RadialExpr::log_power(6, 0), 3).is_zero());
  EXPECT_THROW(iterated_laplacian(RadialExpr::power(3, 1), 0), std::invalid_argument);
}

TEST(Eval, Examples) {
  std::vector<double> x{0.3, 0.4};
  EXPECT_DOUBLE_EQ(RadialExpr::power(2, -1)(x), 2.0);
  EXPECT_EQ(RadialExpr(2)(x), 0.0);
  std::vector<double> five{3.0, 4.0};
  EXPECT_EQ(RadialExpr::log_power(2, 0)(five), 0.0);
  std::vector<double> zero{0.0, 0.0};
  EXPECT_THROW(RadialExpr::power(2, 1)(zero), std::domain_error);
}

TEST(Eval, CompiledMatchesExact) {
  std::mt19937_64 rng(11);
  for (const auto& e : zoo(5)) {
    CompiledExpr c(e);
    for (int t = 0; t < 10; ++t) {
      auto x = random_point(rng, 5, 0.2, 3.0);
      EXPECT_NEAR(c(x), e(x), 1e-13 * std::max(1.0, std::abs(e(x))));
    }
  }
}
