#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "polysing/io.hpp"
#include "polysing/verify.hpp"

using namespace polysing;

namespace {

std::vector<double> center_logs(int count) {
  std::vector<double> lx;
  for (int j = 1; j <= count; ++j) lx.push_back(-(2.0 * j + 1.0) * std::log(2.0));
  return lx;
}

}  // namespace

TEST(FitExponent, ExactPowerData) {
  std::vector<std::pair<double, double>> pts;
  for (double r : {0.5, 0.1, 0.03, 0.007, 1e-4}) pts.push_back({r, 3.0 * std::pow(r, -6.0)});
  const auto f = fit_exponent(pts);
  EXPECT_NEAR(f.slope, -6.0, 1e-12);
  EXPECT_NEAR(std::exp(f.intercept), 3.0, 1e-10);
  EXPECT_NEAR(f.stderr_, 0.0, 1e-10);
  EXPECT_EQ(f.count, 5u);
}

TEST(FitExponent, ConstantData) {
  const auto f = fit_exponent({{0.5, 2.0}, {0.25, 2.0}, {0.125, 2.0}, {0.01, 2.0}});
  EXPECT_NEAR(f.slope, 0.0, 1e-14);
}

TEST(FitExponent, Rejections) {
  EXPECT_THROW(fit_exponent({{0.5, 1.0}, {0.25, 0.0}, {0.1, 1.0}}), std::invalid_argument);
  EXPECT_THROW(fit_exponent({{0.5, 1.0}, {-0.25, 1.0}, {0.1, 1.0}}), std::invalid_argument);
  EXPECT_THROW(fit_exponent({{0.5, 1.0}, {0.25, 1.0}}), std::invalid_argument);
  EXPECT_THROW(fit_exponent({{0.5, 1.0}, {0.5, 2.0}, {0.5, 3.0}}), std::invalid_argument);
}

TEST(Trend, MonotoneAndSpan) {
  const auto up = trend({0.0, -5.0, 1.0, 2.0, 3.0}, true, 3);
  EXPECT_TRUE(up.monotone);
  EXPECT_DOUBLE_EQ(up.log_span, 2.0);
  EXPECT_FALSE(trend({0.0, 1.0, 3.0, 2.0}, true, 1).monotone);
  EXPECT_TRUE(trend({3.0, 2.0, 1.0}, false, 1).monotone);
  EXPECT_FALSE(trend({1.0, 1.0, 1.0}, true, 1).monotone);
  EXPECT_FALSE(trend({1.0}, true, 1).monotone);
}

// ratio_j grows by 2 per step when u is 2^{...} above the bound, as for the
// power reference; a constant u must not pass.
TEST(Violation, ConstantUControlFails) {
  const auto lx = center_logs(8);
  TargetBound b;
  b.form = TargetBound::Form::PowerOnly;
  b.exponent = 6.0;
  b.phi = PhiPreset::parse("pow:1");
  std::vector<double> constant(lx.size(), std::log(7.0));
  EXPECT_FALSE(violation_check(lx, constant, b).passed());
  // u = phi^{1/2} |x|^{-a}: ratio ~ |x|^{-1/2}, x2 per step, x32 over positions 3..8
  std::vector<double> good;
  for (double l : lx) good.push_back(0.5 * l - 6.0 * l);
  const auto c = violation_check(lx, good, b);
  EXPECT_TRUE(c.passed());
  EXPECT_NEAR(c.evidence["rise"].get<double>(), 32.0, 1e-9);
}

TEST(Violation, ShortSpanFails) {
  const auto lx = center_logs(4);
  TargetBound b;
  b.form = TargetBound::Form::PowerOnly;
  b.exponent = 6.0;
  b.phi = PhiPreset::parse("pow:1");
  std::vector<double> lu;
  for (double l : lx) lu.push_back(0.5 * l - 6.0 * l);
  // positions 3..4 give a x2 rise only
  EXPECT_FALSE(violation_check(lx, lu, b).passed());
}

// u = Gamma: u |x|^{n-2} is constant, the boundary case neither grows nor decays.
TEST(Upper, GammaControlFails) {
  const int n = 7;
  const auto lx = center_logs(8);
  std::vector<double> lu;
  for (double l : lx) lu.push_back(-(n - 2) * l);
  const auto c = upper_check(lx, lu, [n](double l) { return (n - 2) * l; }, "u |x|^{n-2}");
  EXPECT_FALSE(c.passed());
  // |x|^{1/2} decay passes
  std::vector<double> lv;
  for (double l : lx) lv.push_back(-6.0 * l + 0.5 * l);
  EXPECT_TRUE(upper_check(lx, lv, [](double l) { return 6.0 * l; }, "u |x|^6").passed());
}

TEST(TargetBoundForms, LogValues) {
  TargetBound b;
  b.phi = PhiPreset::parse("pow:1");
  b.exponent = 4.0;
  b.form = TargetBound::Form::PowerLog;
  const double l = std::log(0.01);
  EXPECT_NEAR(b.log_value(l), l - 4.0 * l + std::log(std::log(500.0)), 1e-12);
  b.form = TargetBound::Form::PhiOnly;
  b.phi = PhiPreset::parse("log");
  EXPECT_NEAR(b.log_value(l), std::log(std::log(100.0)), 1e-12);
}

TEST(Sobol, DeterministicAndInsideBall) {
  const auto a = sobol_ball_points(7, 50, 3);
  const auto b = sobol_ball_points(7, 50, 3);
  ASSERT_EQ(a.size(), 50u);
  EXPECT_EQ(a, b);
  for (const auto& p : a) {
    double s = 0;
    for (double v : p) s += v * v;
    EXPECT_LT(s, 1.0);
  }
  EXPECT_NE(sobol_ball_points(7, 50, 100), a);
}

TEST(SpecIo, JsonRoundTripAndDigest) {
  const auto s = build_thm15(3, 7, Rational(3), PhiPreset::parse("pow:1"));
  const Json j = spec_to_json(s);
  const auto back = spec_from_json(Json::parse(j.dump()));
  ASSERT_EQ(back.bumps.size(), s.bumps.size());
  for (std::size_t k = 0; k < s.bumps.size(); ++k) {
    EXPECT_EQ(back.bumps[k].center, s.bumps[k].center);
    EXPECT_EQ(back.bumps[k].log_radius, s.bumps[k].log_radius);
    EXPECT_EQ(back.bumps[k].log_mass, s.bumps[k].log_mass);
    EXPECT_EQ(back.bumps[k].epsilon, s.bumps[k].epsilon);
  }
  EXPECT_EQ(back.C, s.C);
  EXPECT_EQ(back.A_used, s.A_used);
  EXPECT_EQ(back.nonlinearity.lambda, s.nonlinearity.lambda);
  EXPECT_EQ(back.j_index, s.j_index);
  EXPECT_EQ(spec_digest(back), spec_digest(s));
  EXPECT_EQ(spec_digest(s).size(), 64u);

  auto t = s;
  t.bumps[0].epsilon *= 1.0 + 1e-15;
  EXPECT_NE(spec_digest(t), spec_digest(s));
  Json bad = j;
  bad["format"] = 99;
  EXPECT_THROW(spec_from_json(bad), std::invalid_argument);
}

TEST(SpecIo, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(SpecIo, SequenceCsvShape) {
  const auto s = build_thm15(3, 7, Rational(3), PhiPreset::parse("pow:1"));
  const std::string csv = sequence_csv(s);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 9);
  EXPECT_EQ(csv.rfind("j,xnorm,log_r,r,eps,log_M\n7,", 0), 0u);
}

TEST(Certificate, TamperedMassFailsOnlyInequality) {
  auto s = build_thm15(3, 7, Rational(3), PhiPreset::parse("pow:1"));
  s.bumps[2].log_mass += std::log(100.0);
  VerifyConfig cfg;
  cfg.samples_per_bump = 10;
  cfg.residual_spots = 0;
  const auto c = certify_inequality(s, cfg);
  EXPECT_EQ(c.failed(), std::vector<std::string>{"target-inequality"});
}
