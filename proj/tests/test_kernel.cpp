#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <thread>
#include <vector>

#include "polysing/kernel.hpp"

using namespace polysing;

namespace {

KernelSet unit_kernel(int m, int n) { return make_phi({m, n, 1.0}); }

std::vector<double> axis_point(int n, double r) {
  std::vector<double> x(static_cast<std::size_t>(n), 0.0);
  x[0] = r;
  return x;
}

}  // namespace

TEST(Classify, Examples) {
  EXPECT_EQ(classify_case(3, 7), CaseTag::IV);
  EXPECT_EQ(classify_case(3, 6), CaseTag::V);
  EXPECT_EQ(classify_case(2, 5), CaseTag::I);
  EXPECT_EQ(classify_case(1, 2), CaseTag::III);
  EXPECT_EQ(classify_case(1, 5), CaseTag::II);
  EXPECT_EQ(classify_case(5, 9), CaseTag::I);
  EXPECT_THROW(classify_case(0, 3), std::invalid_argument);
  EXPECT_THROW(classify_case(1, 1), std::invalid_argument);
}

TEST(MakePhi, Examples) {
  EXPECT_EQ(unit_kernel(3, 7).phi(), RadialExpr::power(7, -1, -1));
  EXPECT_EQ(unit_kernel(3, 6).phi(), RadialExpr::log_power(6, 0, -1));
  EXPECT_EQ(unit_kernel(1, 3).phi(), RadialExpr::power(3, -1, -1));
  EXPECT_DOUBLE_EQ(unit_kernel(3, 7).phi_value(axis_point(7, 0.5)), -2.0);
  auto scaled = make_phi({3, 7, 0.25});
  EXPECT_EQ(scaled.phi(), RadialExpr::power(7, -1, Rational(-1, 4)));
}

TEST(MakePhi, BranchesAndSigns) {
  EXPECT_EQ(phi_branch(3, 7), PhiBranch::Power);
  EXPECT_EQ(phi_branch(3, 5), PhiBranch::OddPower);
  EXPECT_EQ(phi_branch(3, 6), PhiBranch::EvenLog);
  EXPECT_EQ(phi_branch(2, 2), PhiBranch::EvenLog);
  // (-1)^{(n-1)/2}: n = 5 gives +, n = 3 gives -
  EXPECT_EQ(unit_phi_expr(3, 5), RadialExpr::power(5, 1, 1));
  EXPECT_EQ(unit_phi_expr(2, 3), RadialExpr::power(3, 1, -1));
  EXPECT_EQ(unit_phi_expr(2, 4), RadialExpr::log_power(4, 0, 1));
}

TEST(Kernel, ExactPolyharmonicityGrid) {
  for (int m = 1; m <= 5; ++m)
    for (int n = 2; n <= 12; ++n) {
      EXPECT_TRUE(iterated_laplacian(unit_phi_expr(m, n), m).is_zero()) << m << "," << n;
      if (m > 1) {
        EXPECT_FALSE(iterated_laplacian(unit_phi_expr(m, n), m - 1).is_zero());
      }
      for (const auto& w : gamma_inf_terms(m, n)) EXPECT_TRUE(iterated_laplacian(w.expr, m).is_zero());
    }
}

// Closed forms of the fundamental solution constant; all three must be
// positive for the signs carried by Phi to be the right ones.
TEST(Kernel, NormalizationMatchesClosedForms) {
  const double pi = std::numbers::pi;
  for (int m = 1; m <= 5; ++m)
    for (int n = 2; n <= 12; ++n) {
      double expect;
      if (2 * m < n || n % 2 == 1) {
        expect = std::abs(std::tgamma(0.5 * n - m)) / (std::pow(4.0, m) * std::pow(pi, 0.5 * n) * std::tgamma(m));
      } else {
        expect = 1.0 / (std::pow(2.0, 2 * m - 1) * std::pow(pi, 0.5 * n) * std::tgamma(m) * std::tgamma(m - n / 2 + 1));
      }
      EXPECT_NEAR(fundamental_normalization(m, n), expect, 1e-12 * expect) << m << "," << n;
    }
  EXPECT_NEAR(fundamental_normalization(3, 7), 0.00025196511275937100925, 1e-17);
  EXPECT_NEAR(fundamental_normalization(1, 2), 1.0 / (2 * pi), 1e-15);
}

TEST(Gamma, Examples) {
  EXPECT_DOUBLE_EQ(gamma_fn(0.5, 4), 4.0);
  EXPECT_EQ(gamma_fn(5.0, 2), 0.0);
  EXPECT_NEAR(gamma_fn(0.1, 7), 1e5, 1e-9);
  EXPECT_THROW(gamma_fn(0.0, 3), std::domain_error);
  EXPECT_DOUBLE_EQ(gamma_inf(2.0, 3, 7), 16.0);
  EXPECT_NEAR(gamma_inf(0.2, 1, 2), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(gamma_inf(1.0, 2, 3), 1.0);
  EXPECT_THROW(gamma_inf(-1.0, 2, 3), std::domain_error);
  // the two-term n = 2 representation evaluates to Gamma_inf
  auto x = axis_point(2, 0.7);
  double v = 0;
  for (const auto& w : gamma_inf_terms(3, 2)) v += w.weight * w.expr(x);
  EXPECT_NEAR(v, gamma_inf(0.7, 3, 2), 1e-14);
}

TEST(PhiDeriv, Examples) {
  auto k = unit_kernel(3, 7);
  EXPECT_EQ(phi_deriv(k, MultiIndex(7)), k.phi());
  RadialExpr expect(7);
  expect.add_term(1, MultiIndex::unit(7, 0), -3, 0);
  EXPECT_EQ(phi_deriv(k, MultiIndex::unit(7, 0)), expect);
  RadialExpr sum(7);
  for (std::size_t i = 0; i < 7; ++i) sum += phi_deriv(k, MultiIndex::unit(7, i).shifted(i, 1));
  EXPECT_EQ(sum, laplacian(k.phi()));
}

TEST(PhiDeriv, MatchesNestedFiniteDifferences) {
  std::mt19937_64 rng(3);
  for (auto [m, n] : {std::pair{3, 7}, std::pair{3, 6}, std::pair{2, 5}}) {
    auto k = unit_kernel(m, n);
    auto all = enumerate_multi_indices(static_cast<std::size_t>(n), 3);
    std::uniform_int_distribution<std::size_t> pick(0, all.size() - 1);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> rad(0.5, 2.0);
    for (int trial = 0; trial < 12; ++trial) {
      const MultiIndex& a = all[pick(rng)];
      std::vector<double> x(static_cast<std::size_t>(n));
      double s = 0;
      for (auto& c : x) {
        c = g(rng);
        s += c * c;
      }
      const double r = rad(rng);
      for (auto& c : x) c *= r / std::sqrt(s);
      // nested central differences, one axis at a time, Richardson over h and h/2
      auto nested = [&](double h) {
        std::vector<std::pair<std::vector<double>, double>> stencil{{x, 1.0}};
        for (std::size_t i = 0; i < x.size(); ++i)
          for (int rep = 0; rep < a[i]; ++rep) {
            std::vector<std::pair<std::vector<double>, double>> next;
            for (auto& [p, w] : stencil) {
              auto pp = p, pm = p;
              pp[i] += h;
              pm[i] -= h;
              next.push_back({pp, w / (2 * h)});
              next.push_back({pm, -w / (2 * h)});
            }
            stencil = std::move(next);
          }
        double v = 0;
        for (auto& [p, w] : stencil) v += w * k.phi_value(p);
        return v;
      };
      const double fd = (4 * nested(2e-3) - nested(4e-3)) / 3;
      const double exact = phi_deriv(k, a)(x);
      EXPECT_NEAR(fd, exact, 1e-5 * std::max(std::abs(exact), 1e-3)) << "alpha order " << a.order();
    }
  }
}

TEST(PhiDeriv, ConcurrentCacheIsConsistent) {
  auto k = unit_kernel(3, 7);
  auto all = enumerate_multi_indices(7, 3);
  std::vector<std::thread> pool;
  std::vector<std::vector<RadialExpr>> results(4);
  for (int t = 0; t < 4; ++t)
    pool.emplace_back([&, t] {
      for (const auto& a : all) results[static_cast<std::size_t>(t)].push_back(k.unit_derivative(a));
    });
  for (auto& th : pool) th.join();
  for (int t = 1; t < 4; ++t) EXPECT_EQ(results[0], results[static_cast<std::size_t>(t)]);
}

// Oracle values: Taylor coefficients of s -> Phi(x - s y) at s = 0, 40-digit arithmetic,
// summed to degree 2m-3 and subtracted from Phi(x - y).
TEST(Psi, PinnedOracleValues) {
  auto k37 = unit_kernel(3, 7);
  EXPECT_NEAR(psi(k37, axis_point(7, 1.0), axis_point(7, 0.1)), -1.0 / 9000.0, 1e-18);

  std::vector<double> x{0.6, -0.3, 0.2, 0.5, 0.1, 0.0, 0.4};
  std::vector<double> y1{0.05, 0.1, -0.07, 0.02, 0.0, 0.03, -0.04};
  std::vector<double> y2{0.3, 0.4, -0.2, 0.1, 0.2, -0.3, 0.1};
  EXPECT_NEAR(psi(k37, x, y1), -0.0001333463490716987532337074, 1e-17);
  EXPECT_NEAR(psi(k37, x, y2), -0.08210055819958923705386411, 1e-14);

  auto k36 = unit_kernel(3, 6);
  std::span<const double> x6(x.data(), 6), y16(y1.data(), 6), y26(y2.data(), 6);
  EXPECT_NEAR(psi(k36, x6, y16), -0.0001482956017599562537099329, 1e-17);
  EXPECT_NEAR(psi(k36, x6, y26), -0.07492163044077620294705716, 1e-14);

  auto k512 = unit_kernel(5, 12);
  std::vector<double> x12(12, 0.3), y12(12, 0.02);
  y12[0] = 0.1;
  y12[1] = -0.05;
  EXPECT_NEAR(psi(k512, x12, y12), -3.391153619411985397419435e-8, 1e-20);

  // branches without a series path go through the D^alpha table
  auto k25 = unit_kernel(2, 5);
  EXPECT_NEAR(psi(k25, std::span<const double>(x.data(), 5), std::span<const double>(y1.data(), 5)),
              -0.01320429669094282799921738, 1e-15);
  auto k34 = unit_kernel(3, 4);
  EXPECT_NEAR(psi(k34, std::span<const double>(x.data(), 4), std::span<const double>(y1.data(), 4)),
              -0.0001045496322580971835204649, 1e-16);
}

TEST(Psi, SeriesAndMultiIndexPathsAgree) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (auto [m, n] : {std::pair{3, 7}, std::pair{3, 6}, std::pair{5, 11}}) {
    auto k = unit_kernel(m, n);
    const auto& terms = radial_terms(k.unit_phi());
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<double> x(static_cast<std::size_t>(n)), y(x.size()), h(x.size());
      double sx = 0, sy = 0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = g(rng);
        y[i] = g(rng);
        sx += x[i] * x[i];
        sy += y[i] * y[i];
      }
      const double ratio = 0.3 + 0.02 * trial;
      for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] /= std::sqrt(sx);
        y[i] *= ratio / std::sqrt(sy);
        h[i] = -y[i];
      }
      const double series = radial_remainder(terms, x, h, k.taylor_order());
      double diff2 = 0;
      for (std::size_t i = 0; i < x.size(); ++i) diff2 += (x[i] - y[i]) * (x[i] - y[i]);
      const double direct = radial_value(terms, std::sqrt(diff2)) - k.taylor_polynomial(x, h);
      EXPECT_NEAR(series, direct, 1e-12 * std::max(1.0, std::abs(direct)));
      EXPECT_NEAR(psi(k, x, y), series, 1e-12 * std::max(1.0, std::abs(series)));
    }
  }
}

TEST(Psi, ZeroAndErrors) {
  auto k = unit_kernel(3, 7);
  auto x = axis_point(7, 0.8);
  EXPECT_EQ(psi(k, x, std::vector<double>(7, 0.0)), 0.0);
  EXPECT_THROW(psi(k, std::vector<double>(7, 0.0), x), std::domain_error);
  EXPECT_THROW(psi(k, x, x), std::domain_error);
  // m = 1: empty Taylor sum
  auto k13 = unit_kernel(1, 3);
  std::vector<double> a{1, 0, 0}, b{0.2, 0.1, 0};
  std::vector<double> d{0.8, -0.1, 0};
  EXPECT_DOUBLE_EQ(psi(k13, a, b), k13.phi_value(d));
}

TEST(Psi, DecayOrderIsTwoMMinusTwo) {
  auto k = unit_kernel(3, 7);
  std::vector<double> x{0.6, -0.3, 0.2, 0.5, 0.1, 0.0, 0.4};
  // the degree-4 piece is |x|^{-5} P_4(-t) |y|^4; this direction keeps P_4 away from its zeros
  std::vector<double> dir{0.5, 0.2, 0.1, 0.3, -0.4, 0.2, 0.1};
  double xn = 0, dn = 0;
  for (std::size_t i = 0; i < 7; ++i) {
    xn += x[i] * x[i];
    dn += dir[i] * dir[i];
  }
  xn = std::sqrt(xn);
  dn = std::sqrt(dn);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int N = 9;
  for (int i = 0; i < N; ++i) {
    const double frac = std::pow(10.0, -4.0 + 2.0 * i / (N - 1));
    std::vector<double> y(7);
    for (std::size_t c = 0; c < 7; ++c) y[c] = dir[c] / dn * frac * xn;
    const double lx = std::log(frac * xn), ly = std::log(std::abs(psi(k, x, y)));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double slope = (N * sxy - sx * sy) / (N * sxx - sx * sx);
  EXPECT_NEAR(slope, 4.0, 0.1);
}

TEST(PsiBoundProbe, FiniteAndScaleStable) {
  auto k = unit_kernel(3, 7);
  auto rep = psi_bound_probe(k, 10000);
  EXPECT_EQ(rep.samples, 10000u);
  EXPECT_GT(rep.zero_rows, 0u);
  EXPECT_TRUE(std::isfinite(rep.max_ratio));
  EXPECT_LT(rep.max_ratio, 1e4);
  EXPECT_NEAR(rep.max_ratio_halved, rep.max_ratio, 0.1 * rep.max_ratio);
  EXPECT_THROW(psi_bound_probe(k, 0), std::invalid_argument);
}
