#include <gtest/gtest.h>

#include <cmath>

#include "polysing/constructor.hpp"

using namespace polysing;

namespace {

const Check& check(const Certificate& c, const std::string& name) {
  const Check* k = c.find(name);
  if (!k) throw std::logic_error("no check " + name);
  return *k;
}

}  // namespace

TEST(ParseRational, Forms) {
  EXPECT_EQ(parse_rational("3"), Rational(3));
  EXPECT_EQ(parse_rational("-2"), Rational(-2));
  EXPECT_EQ(parse_rational("7/5"), Rational(7, 5));
  EXPECT_EQ(parse_rational("0.5"), Rational(1, 2));
  EXPECT_EQ(parse_rational("-1.25"), Rational(-5, 4));
  EXPECT_THROW(parse_rational(""), std::invalid_argument);
  EXPECT_THROW(parse_rational("abc"), std::exception);
  EXPECT_EQ(rational_str(Rational(11, 5)), "11/5");
}

TEST(PhiPreset, ParseAndValues) {
  EXPECT_EQ(PhiPreset::parse("pow:1").str(), "pow:1");
  EXPECT_EQ(PhiPreset::parse("pow:1/2").alpha, Rational(1, 2));
  EXPECT_TRUE(PhiPreset::parse("pow:1").tends_to_zero());
  EXPECT_FALSE(PhiPreset::parse("log").tends_to_zero());
  EXPECT_EQ(PhiPreset::parse("loglog").kind, PhiPreset::Kind::LogLog);
  EXPECT_EQ(PhiPreset::parse("explog").kind, PhiPreset::Kind::ExpLog);
  EXPECT_THROW(PhiPreset::parse("pow:0"), std::invalid_argument);
  EXPECT_THROW(PhiPreset::parse("sqrt"), std::invalid_argument);
  EXPECT_DOUBLE_EQ(PhiPreset::parse("pow:2")(0.1), 0.01);
  EXPECT_NEAR(PhiPreset::parse("log")(std::exp(-3.0)), 3.0, 1e-14);
  EXPECT_NEAR(PhiPreset::parse("explog")(std::exp(-4.0)), std::exp(2.0), 1e-12);
  EXPECT_THROW(PhiPreset::parse("log").log_value(0.0), std::domain_error);
}

TEST(Exponents, InteriorPowerReference) {
  const auto s = exponents(TheoremTag::T1_5, 3, 7, Rational(3));
  EXPECT_EQ(s.a, Rational(6));
  EXPECT_EQ(s.b, Rational(1));
  EXPECT_EQ(s.p, Rational(1, 3));
  EXPECT_EQ(s.window.lo, Rational(11, 5));
  EXPECT_EQ(s.window.hi, Rational(7));
  EXPECT_FALSE(s.window.lo_closed);
  EXPECT_FALSE(s.window.hi_closed);
  EXPECT_TRUE(s.identities_hold());
  EXPECT_EQ(s.window_anchor, "power-window");
}

TEST(Exponents, ExteriorBothForms) {
  const auto [b1, b2] = exterior_exponent(3, 8, Rational(1));
  EXPECT_EQ(b1, Rational(6));
  EXPECT_EQ(b2, Rational(6));
  const auto [c1, c2] = exterior_exponent(3, 7, Rational(2));
  EXPECT_EQ(c1, Rational(6));
  EXPECT_EQ(c2, Rational(6));
  EXPECT_THROW(exterior_exponent(3, 7, Rational(7)), std::domain_error);
}

TEST(Exponents, InteriorClosedFormsAgreeOnGrid) {
  for (int m = 3; m <= 7; m += 2)
    for (int n = 2 * m + 1; n <= 2 * m + 6; ++n)
      for (int k = 1; k <= 12; ++k) {
        const Rational lambda(k, 3);
        if (lambda * (n - 2 * m) == n) continue;
        const auto [a1, a2] = interior_exponent(m, n, lambda);
        EXPECT_EQ(a1, a2) << m << "," << n << "," << lambda;
        const auto [b1, b2] = exterior_exponent(m, n, lambda);
        EXPECT_EQ(b1, b2) << m << "," << n << "," << lambda;
      }
}

TEST(Exponents, CriticalDimension) {
  EXPECT_EQ(exponents(TheoremTag::T1_10, 3, 6, Rational(1, 2)).a, Rational(8));
  EXPECT_EQ(exponents(TheoremTag::T1_8, 3, 6, Rational(3)).a, Rational(2, 3));
}

TEST(Exponents, WeightedExterior) {
  const auto s = exponents(TheoremTag::T1_17, 3, 7, Rational(2));
  EXPECT_EQ(s.tau, Rational(-11));
  EXPECT_EQ(s.a, Rational(1));
  EXPECT_EQ(s.b, Rational(6));
  EXPECT_TRUE(s.identities_hold());
}

TEST(Exponents, WindowRejections) {
  auto anchor_of = [](TheoremTag t, int m, int n, Rational l) -> std::string {
    try {
      exponents(t, m, n, l);
    } catch (const InadmissibleError& e) {
      return e.anchor();
    }
    return "";
  };
  // open ends of the interior power window
  EXPECT_EQ(anchor_of(TheoremTag::T1_5, 3, 7, Rational(11, 5)), "power-window");
  EXPECT_EQ(anchor_of(TheoremTag::T1_5, 3, 7, Rational(7)), "power-window");
  EXPECT_EQ(anchor_of(TheoremTag::T1_5, 3, 7, Rational(12, 5)), "");
  // closed lower end of the unbounded variant
  EXPECT_EQ(anchor_of(TheoremTag::T1_6, 3, 7, Rational(7)), "");
  EXPECT_EQ(anchor_of(TheoremTag::T1_6, 3, 7, Rational(13, 2)), "unbounded-power-window");
  EXPECT_EQ(anchor_of(TheoremTag::T1_8, 3, 6, Rational(5, 2)), "log-power-window");
  EXPECT_EQ(anchor_of(TheoremTag::T1_10, 3, 6, Rational(1)), "exp-window");
  EXPECT_EQ(anchor_of(TheoremTag::T1_11, 3, 6, Rational(1)), "");
  EXPECT_EQ(anchor_of(TheoremTag::T1_11, 3, 6, Rational(99, 100)), "unbounded-exp-window");
  EXPECT_EQ(anchor_of(TheoremTag::T1_17, 3, 7, Rational(0)), "exterior-window");
  EXPECT_EQ(anchor_of(TheoremTag::T1_5, 3, 6, Rational(3)), "case-classification");
  EXPECT_EQ(anchor_of(TheoremTag::T1_8, 3, 7, Rational(3)), "case-classification");
  // evaluation outside the window is still possible on request
  EXPECT_EQ(exponents(TheoremTag::T1_5, 3, 7, Rational(5), false).a, Rational(12));
}

TEST(Exponents, CaseDriven) {
  EXPECT_EQ(exponents(3, 7, Rational(3)).theorem, TheoremTag::T1_5);
  EXPECT_EQ(exponents(3, 7, Rational(8)).theorem, TheoremTag::T1_6);
  EXPECT_EQ(exponents(3, 6, Rational(1, 2)).theorem, TheoremTag::T1_10);
  EXPECT_EQ(exponents(3, 6, Rational(3)).theorem, TheoremTag::T1_8);
}

TEST(Builder, InterpolatedSlopes) {
  SequenceBuilder a(TheoremTag::T1_5, 3, 7, Rational(3), PhiPreset::parse("pow:1"), BuildOptions{});
  EXPECT_EQ(a.expected_slope(), Rational(-11, 2));
  SequenceBuilder b(TheoremTag::T1_10, 3, 6, Rational(1, 2), PhiPreset::parse("pow:1"), BuildOptions{});
  EXPECT_EQ(b.expected_slope(), Rational(-15, 2));
}

TEST(Builder, RejectsDecayingPhiForUnboundedVariants) {
  EXPECT_THROW(build_thm16(3, 7, Rational(7), PhiPreset::parse("pow:1")), std::invalid_argument);
}

TEST(Builder, PowerReferenceShape) {
  const auto s = build_thm15(3, 7, Rational(3), PhiPreset::parse("pow:1"), BuildOptions{});
  ASSERT_EQ(s.bumps.size(), 8u);
  for (std::size_t k = 0; k < s.bumps.size(); ++k) {
    // centers are exact powers of two
    const double xn = s.bumps[k].center_norm();
    int e = 0;
    EXPECT_EQ(std::frexp(xn, &e), 0.5);
    EXPECT_EQ(xn, std::ldexp(1.0, -2 * s.j_index[k] - 1));
  }
  const auto cert = check_admissibility(s);
  EXPECT_TRUE(cert.overall());
  const auto& eq = check(cert, "power-admissibility-equality");
  EXPECT_TRUE(eq.passed());
  EXPECT_LT(eq.evidence["max_rel_residual"].get<double>(), 1e-12);
}

TEST(Builder, AllReferenceSpecsAdmissible) {
  struct C {
    TheoremTag t;
    int m, n;
    Rational l;
    const char* phi;
  };
  for (const auto& c : {C{TheoremTag::T1_6, 3, 7, Rational(7), "log"}, C{TheoremTag::T1_8, 3, 6, Rational(3), "pow:1"},
                        C{TheoremTag::T1_10, 3, 6, Rational(1, 2), "pow:1"}, C{TheoremTag::T1_11, 3, 6, Rational(1), "log"},
                        C{TheoremTag::T1_17, 3, 7, Rational(2), "pow:1"}}) {
    const auto s = build_spec(c.t, c.m, c.n, c.l, PhiPreset::parse(c.phi));
    EXPECT_EQ(s.bumps.size(), 8u) << to_string(c.t);
    const auto cert = check_admissibility(s);
    EXPECT_TRUE(cert.overall()) << to_string(c.t) << "\n" << cert.summary_table();
  }
}

TEST(Builder, Deterministic) {
  const auto a = build_thm15(3, 7, Rational(3), PhiPreset::parse("pow:1"), BuildOptions{});
  const auto b = build_thm15(3, 7, Rational(3), PhiPreset::parse("pow:1"), BuildOptions{});
  ASSERT_EQ(a.bumps.size(), b.bumps.size());
  EXPECT_EQ(a.C, b.C);
  for (std::size_t k = 0; k < a.bumps.size(); ++k) {
    EXPECT_EQ(a.bumps[k].log_radius, b.bumps[k].log_radius);
    EXPECT_EQ(a.bumps[k].log_mass, b.bumps[k].log_mass);
  }
}

TEST(Admissibility, TamperedRadiusFlagged) {
  auto s = build_thm15(3, 7, Rational(3), PhiPreset::parse("pow:1"), BuildOptions{});
  s.bumps[1].log_radius += std::log(10.0);
  s.bumps[1].log_mass = s.bumps[1].derived_log_mass(3);
  const auto cert = check_admissibility(s);
  EXPECT_FALSE(check(cert, "radius-bound").passed());
  EXPECT_FALSE(cert.overall());
}

TEST(Admissibility, OutOfWindowLambdaNamesTheWindow) {
  auto s = build_thm16(3, 7, Rational(7), PhiPreset::parse("log"));
  s.nonlinearity.lambda = Rational(13, 2);
  const auto cert = check_admissibility(s);
  const auto& w = check(cert, "lambda-window");
  EXPECT_FALSE(w.passed());
  EXPECT_EQ(cert.failed(), std::vector<std::string>{"lambda-window"});
}
