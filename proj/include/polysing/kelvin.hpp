#pragma once

// m-Kelvin transform v(y) = |x|^{n-2m} u(x), x = y/|y|^2: exact identity on
// radial powers and the exterior growth check for the weighted construction.

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "polysing/certificate.hpp"
#include "polysing/symcalc.hpp"
#include "polysing/verify.hpp"

namespace polysing {

inline std::vector<double> kelvin_point(std::span<const double> y) {
  double s = 0;
  for (double v : y) s += v * v;
  if (!(s > 0)) throw std::invalid_argument("kelvin_point: y = 0 has no image");
  std::vector<double> x(y.begin(), y.end());
  for (double& v : x) v /= s;
  return x;
}

// |x|^{n-2m} u(x) at x = y/|y|^2, given u(x).
inline double kelvin_value(double u_at_x, double xnorm, int m, int n) { return std::pow(xnorm, n - 2 * m) * u_at_x; }

// c r^s -> c r^{2m-n-s}
inline RadialExpr kelvin_radial(const RadialExpr& e, int m, int n) {
  if (e.dim() != static_cast<std::size_t>(n)) throw std::invalid_argument("kelvin_radial: dimension mismatch");
  if (e.is_zero()) return e;
  if (e.size() != 1) throw std::invalid_argument("kelvin_radial: needs a single radial power");
  const auto& [k, c] = *e.terms().begin();
  if (k.gamma.order() != 0 || k.logflag != 0)
    throw std::invalid_argument("kelvin_radial: log-bearing or non-radial terms are handled only numerically");
  return RadialExpr::power(e.dim(), 2 * m - n - k.rpow, c);
}

namespace detail {

// (coefficient, exponent) of a single radial power, or zero.
inline std::pair<Rational, int> single_power(const RadialExpr& e) {
  if (e.is_zero()) return {Rational(0), 0};
  if (e.size() != 1) throw std::logic_error("single_power: more than one term");
  const auto& [k, c] = *e.terms().begin();
  if (k.gamma.order() != 0 || k.logflag) throw std::logic_error("single_power: not a radial power");
  return {c, k.rpow};
}

}  // namespace detail

// Delta^m v(y) = |x|^{n+2m} Delta^m u(x) for u a radial power, compared as
// expressions in |y| after substituting |x| = 1/|y|.
inline Certificate kelvin_identity_check(const RadialExpr& u, int m, int n) {
  Certificate cert("kelvin identity m=" + std::to_string(m) + " n=" + std::to_string(n) + " u=" + u.str());
  const RadialExpr v = kelvin_radial(u, m, n);
  const RadialExpr lhs = iterated_laplacian(v, m);
  const RadialExpr du = iterated_laplacian(u, m);
  const auto [cr, er] = detail::single_power(du);
  // |x|^{n+2m} c |x|^{e} = c |y|^{-(n+2m+e)}
  const RadialExpr rhs = cr == 0 ? RadialExpr(u.dim()) : RadialExpr::power(u.dim(), -(n + 2 * m + er), cr);
  const bool ok = lhs == rhs;
  Json ev{{"u", u.str()}, {"v", v.str()}, {"delta_m_v", lhs.str()}, {"delta_m_u", du.str()},
          {"rhs_in_y", rhs.str()}};
  if (!lhs.is_zero()) {
    const auto [cl, el] = detail::single_power(lhs);
    ev["lhs_exponent_y"] = el;
    ev["rhs_exponent_x"] = er;
    ev["exponent_bookkeeping"] = el == -(n + 2 * m) - er;
  }
  cert.add("kelvin-identity", "kelvin-identity", ok, ev);
  return cert;
}

inline Certificate kelvin_identity_check(int s, int m, int n) {
  return kelvin_identity_check(RadialExpr::power(static_cast<std::size_t>(n), s), m, n);
}

// Leading coefficients of Delta^m v in |y| and of |x|^{n+2m} Delta^m u in
// |y|, u = |x|^s. Equal whenever the identity holds.
inline std::pair<Rational, Rational> kelvin_witness(int s, int m, int n) {
  const RadialExpr u = RadialExpr::power(static_cast<std::size_t>(n), s);
  const auto lhs = detail::single_power(iterated_laplacian(kelvin_radial(u, m, n), m));
  const auto rhs = detail::single_power(iterated_laplacian(u, m));
  return {lhs.first, rhs.first};
}

struct KelvinSweep {
  int cases = 0;
  int failures = 0;
  std::vector<std::string> failed;
};

inline KelvinSweep kelvin_sweep(const std::vector<std::pair<int, int>>& mn, int smin = -9, int smax = 9) {
  KelvinSweep out;
  for (const auto& [m, n] : mn)
    for (int s = smin; s <= smax; ++s) {
      ++out.cases;
      if (!kelvin_identity_check(s, m, n).overall()) {
        ++out.failures;
        out.failed.push_back("m=" + std::to_string(m) + " n=" + std::to_string(n) + " s=" + std::to_string(s));
      }
    }
  return out;
}

// ---------------------------------------------------------------------------

struct KelvinPair {
  SolutionSpec interior;
  struct Sample {
    std::vector<double> y;
    double v = 0.0;       // |x|^{n-2m} u(x), u evaluated at x
    double v_back = 0.0;  // u evaluated at kelvin_point(y), then transformed
  };
  std::vector<Sample> exterior;
  Rational b = 0;
};

// Exterior samples at y_j = x_j/|x_j|^2, computed both ways.
inline KelvinPair make_kelvin_pair(const SolutionSpec& spec, const PotentialEvaluator& ev) {
  if (spec.theorem != TheoremTag::T1_17) throw std::invalid_argument("make_kelvin_pair: needs an exterior construction");
  KelvinPair p;
  p.interior = spec;
  p.b = exponents(spec.theorem, spec.params.m, spec.params.n, spec.nonlinearity.lambda, false).b;
  const int m = spec.params.m, n = spec.params.n;
  for (const auto& bump : spec.bumps) {
    KelvinPair::Sample s;
    const double xn = bump.center_norm();
    s.y = kelvin_point(bump.center);
    s.v = kelvin_value(ev.u(bump.center), xn, m, n);
    const auto x = kelvin_point(s.y);
    double xn2 = 0;
    for (double c : x) xn2 += c * c;
    s.v_back = kelvin_value(ev.u(x), std::sqrt(xn2), m, n);
    p.exterior.push_back(std::move(s));
  }
  return p;
}

// v(y_j)/(phi(|y_j|) |y_j|^b) increasing with a x10 rise, the two-way Kelvin
// evaluation consistent, and the fitted growth exponent of v within slope_tol
// of b + slope(phi^{1/2}).
inline Certificate exterior_growth_check(const SolutionSpec& spec, const VerifyConfig& cfg = {}) {
  Certificate cert("exterior growth " + to_string(spec.theorem));
  PotentialEvaluator ev(spec, cfg.quad);
  const auto pair = make_kelvin_pair(spec, ev);
  const int m = spec.params.m, n = spec.params.n;
  {
    double worst = 0;
    Json rows = Json::array();
    for (const auto& s : pair.exterior) {
      const double rel = std::abs(s.v - s.v_back) / std::abs(s.v);
      worst = std::max(worst, rel);
      rows.push_back({{"v", s.v}, {"v_back", s.v_back}, {"rel", rel}});
    }
    cert.add("kelvin-roundtrip", "kelvin-identity", worst <= 1e-12, {{"rows", rows}, {"max_rel", worst}}, 1e-12);
  }
  std::vector<double> log_y, log_v, lx;
  for (std::size_t i = 0; i < pair.exterior.size(); ++i) {
    double yn = 0;
    for (double c : pair.exterior[i].y) yn += c * c;
    log_y.push_back(0.5 * std::log(yn));
    log_v.push_back(std::log(pair.exterior[i].v));
    lx.push_back(-log_y.back());
  }
  TargetBound bound;
  bound.form = TargetBound::Form::Exterior;
  bound.exponent = to_double(pair.b);
  bound.phi = PhiPreset::parse(spec.phi_preset);
  auto c = violation_check(lx, log_v, bound, cfg, spec.j_index);
  c.name = "exterior-growth";
  c.anchor = "exterior-growth";
  cert.add(std::move(c));

  const auto fit = fit_exponent_log(log_y, log_v);
  const double b = to_double(pair.b);
  // phi(|y|) is the preset at 1/|y|, so phi^{1/2} has slope -alpha/2 in log|y|
  const double phi_half = bound.phi.kind == PhiPreset::Kind::Pow ? -to_double(bound.phi.alpha) / 2.0 : 0.0;
  const double expected = b + phi_half;
  cert.add("exterior-slope", "exterior-growth", std::abs(fit.slope - expected) <= cfg.slope_tol,
           {{"fitted", fit.slope}, {"stderr", fit.stderr_}, {"expected", expected}, {"b", rational_str(pair.b)},
            {"n_minus_2m", n - 2 * m}},
           cfg.slope_tol);
  return cert;
}

}  // namespace polysing
