#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "polysing/bump.hpp"

using namespace polysing;

namespace {

std::vector<double> on_axis(int n, double r) {
  std::vector<double> x(static_cast<std::size_t>(n), 0.0);
  x[0] = r;
  return x;
}

}  // namespace

TEST(Profile, ValuesAndSupport) {
  auto p = standard_profile(7);
  EXPECT_EQ(p(std::vector<double>(7, 0.0)), 1.0);
  EXPECT_EQ(p(on_axis(7, 1.0)), 0.0);
  EXPECT_EQ(p(on_axis(7, 1.5)), 0.0);
  EXPECT_GT(p(on_axis(7, 0.999)), 0.0);
  EXPECT_LE(p(on_axis(7, 0.3)), 1.0);
  EXPECT_THROW(standard_profile(1), std::invalid_argument);
}

// Oracle: 25-digit adaptive quadrature of omega_{n-1} int_0^1 phi rho^{n-1} (and rho^{2m-1}).
TEST(Profile, MassAgainstOracle) {
  auto p = standard_profile(7);
  EXPECT_NEAR(p.mass(), 0.460293984728451429, 1e-15);
  EXPECT_LT(p.mass_error(), 1e-8 * p.mass());
  EXPECT_NEAR(standard_profile(6).mass(), 0.639463863626590094, 1e-15);
}

TEST(Convolution, AgainstIndependentOracle) {
  auto p = standard_profile(7);
  ConvolutionNodes q;
  auto inv = [](double r) { return std::pow(r, 5); };  // rho^{n-1} * rho^{-1}
  EXPECT_NEAR(bump_convolution(p, inv, 0.0, q), 0.682094787868362767, 1e-14);
  EXPECT_NEAR(bump_convolution(p, inv, 0.5, q), 0.57557065215435639937, 1e-13);
  EXPECT_NEAR(bump_convolution(p, inv, 1.0, q), 0.40037632918741430025, 1e-13);
  EXPECT_NEAR(bump_convolution(p, inv, 2.0, q), 0.22209118798675129126, 1e-13);
  auto quartic = [](double r) { return std::pow(r, 10); };
  EXPECT_NEAR(bump_convolution(p, quartic, 6.0, q), 618.03756316359787896, 1e-9);

  auto p6 = standard_profile(6);
  auto lg = [](double r) { return std::pow(r, 5) * std::log(5.0 / r); };
  EXPECT_NEAR(bump_convolution(p6, lg, 0.3, q), 1.2467147435597131524, 1e-13);
}

TEST(Convolution, ContinuousAcrossZero) {
  auto p = standard_profile(7);
  ConvolutionNodes q;
  auto inv = [](double r) { return std::pow(r, 5); };
  EXPECT_NEAR(bump_convolution(p, inv, 1e-9, q), bump_convolution(p, inv, 0.0, q), 1e-9);
}

TEST(Bumps, FEvalAndMass) {
  const int m = 3, n = 7;
  auto p = standard_profile(n);
  std::vector<BumpSpec> bumps{make_bump(on_axis(n, 0.5), std::log(0.05), 0.3, m),
                              make_bump(on_axis(n, 0.125), std::log(0.01), 0.1, m)};
  EXPECT_TRUE(bump_violations(bumps, m).empty());
  EXPECT_NEAR(f_eval(bumps, p, on_axis(n, 0.5)), bumps[0].mass(), 1e-12 * bumps[0].mass());
  EXPECT_EQ(f_eval(bumps, p, on_axis(n, 0.3)), 0.0);
  EXPECT_EQ(std::exp(log_f_eval(bumps, on_axis(n, 0.3))), 0.0);
  const double f52 = f_eval(bumps, p, on_axis(n, 0.52));
  EXPECT_NEAR(std::exp(log_f_eval(bumps, on_axis(n, 0.52))), f52, 1e-13 * f52);

  // int f over bump j = M_j r_j^n I = eps_j |x_j|^{2-2m} I, and scales as r^n under r -> r/2
  for (const auto& b : bumps) {
    const double r = b.radius();
    const double direct = b.mass() * std::pow(r, n) * p.mass();
    EXPECT_NEAR(direct, b.epsilon * std::pow(b.center_norm(), 2 - 2 * m) * p.mass(), 1e-12 * direct);
    auto half = make_bump(b.center, b.log_radius - std::log(2.0), b.epsilon, m);
    half.log_mass = b.log_mass;  // same height, half the radius
    EXPECT_NEAR(half.mass() * std::pow(half.radius(), n) * p.mass(), direct / std::pow(2.0, n), 1e-12 * direct);
  }
}

TEST(Bumps, NonNegativeAndSupportedOnBalls) {
  const int m = 3, n = 7;
  auto p = standard_profile(n);
  std::vector<BumpSpec> bumps{make_bump(on_axis(n, 0.5), std::log(0.1), 0.3, m),
                              make_bump(on_axis(n, 0.125), std::log(0.02), 0.1, m)};
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  for (int s = 0; s < 5000; ++s) {
    std::vector<double> y(n);
    for (auto& c : y) c = u(rng) * (s % 2 ? 1.0 : 0.2);
    y[0] += (s % 2 ? 0.0 : 0.5);
    const double f = f_eval(bumps, p, y);
    EXPECT_GE(f, 0.0);
    if (f > 0) {
      EXPECT_GE(locate_bump(bumps, y), 0);
    }
    if (locate_bump(bumps, y) < 0) {
      EXPECT_EQ(f, 0.0);
    }
  }
}

TEST(Bumps, ViolationsAreNamed) {
  const int m = 3, n = 7;
  std::vector<BumpSpec> bumps{make_bump(on_axis(n, 0.5), std::log(0.05), 0.3, m),
                              make_bump(on_axis(n, 0.125), std::log(0.01), 0.1, m)};
  auto tampered = bumps;
  tampered[1].log_radius += std::log(10.0);
  tampered[1].log_mass = tampered[1].derived_log_mass(m);
  auto v = bump_violations(tampered, m);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].find("radius bound"), std::string::npos);

  auto heavy = bumps;
  heavy[0].log_mass += std::log(100.0);
  v = bump_violations(heavy, m);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].find("mass scaling"), std::string::npos);

  auto crowded = bumps;
  crowded[1].center = on_axis(n, 0.2);
  crowded[1].log_mass = crowded[1].derived_log_mass(m);
  v = bump_violations(crowded, m);
  ASSERT_FALSE(v.empty());
  EXPECT_NE(v[0].find("center spacing"), std::string::npos);
  EXPECT_THROW(validate_bumps(crowded, m), std::invalid_argument);
}

TEST(MomentCheck, Examples) {
  const int m = 3, n = 7;
  auto p = standard_profile(n);
  EXPECT_EQ(moment_check({}, p, m).value, 0.0);

  std::vector<BumpSpec> one{make_bump(on_axis(n, 0.5), std::log(0.1), 0.5, m)};
  auto c1 = moment_check(one, p, m);
  EXPECT_TRUE(c1.holds);
  EXPECT_LE(c1.value, c1.bound);
  // direct polar quadrature of int |x_1 + r eta|^4 phi(eta) d eta
  ConvolutionNodes q;
  const double r = 0.1, d = 0.5 / r;
  const double direct = std::pow(r, 4) * bump_convolution(p, [](double s) { return std::pow(s, 10); }, d, q);
  EXPECT_NEAR(c1.value, one[0].mass() * std::pow(r, n) * direct, 1e-10 * c1.value);

  std::vector<BumpSpec> two{make_bump(on_axis(n, 0.5), std::log(0.05), 0.5, m),
                            make_bump(on_axis(n, 0.125), std::log(0.02), 0.25, m)};
  auto c2 = moment_check(two, p, m);
  EXPECT_NEAR(c2.bound, 16 * p.mass() * 0.75, 1e-12);
  EXPECT_TRUE(c2.holds);

  auto heavy = two;
  heavy[1].log_mass += std::log(1e4);
  EXPECT_THROW(moment_check(heavy, p, m), std::logic_error);
}
