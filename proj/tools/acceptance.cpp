// Runs the ten acceptance criteria and prints one PASS/FAIL line each.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "polysing/cli.hpp"

using namespace polysing;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double limit_s;  // 0: no runtime limit
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

bool passed(const Certificate& c, const std::string& name) {
  const Check* k = c.find(name);
  return k && k->passed();
}

std::string failed_list(const Certificate& c) {
  std::string s;
  for (const auto& f : c.failed()) s += (s.empty() ? "" : ",") + f;
  return s.empty() ? "none" : s;
}

SolutionSpec reference(TheoremTag t) {
  for (const auto& r : reference_configs())
    if (r.theorem == t) return build_spec(t, r.m, r.n, parse_rational(r.lambda), PhiPreset::parse(r.phi));
  throw std::logic_error("no reference config");
}

Outcome kernel_grid() {
  int bad = 0, rows = 0;
  for (const auto& r : kernel_table(5, 12)) {
    ++rows;
    bad += !(r.polyharmonic && r.minimal_order);
  }
  return {bad == 0, std::to_string(rows) + " (m,n) pairs, " + std::to_string(bad) + " failures"};
}

Outcome kelvin() {
  const auto sw = kelvin_sweep(kelvin_sweep_pairs(), -9, 9);
  const auto [l, r] = kelvin_witness(3, 3, 7);
  const bool w = l == -576 && r == -576;
  return {sw.failures == 0 && w, std::to_string(sw.cases) + " cases, " + std::to_string(sw.failures) +
                                     " failures; witness " + rational_str(l) + " = " + rational_str(r)};
}

Outcome reference_power() {
  const SolutionSpec spec = reference(TheoremTag::T1_5);
  VerifyConfig cfg;  // 50 samples per bump, relTol 1e-8
  const Certificate adm = check_admissibility(spec);
  const Check* eq = adm.find("power-admissibility-equality");
  const double slack = eq ? eq->evidence.value("max_rel_residual", 1.0) : 1.0;
  const bool a = eq && eq->passed() && slack < 1e-12;
  const bool b = passed(certify_inequality(spec, cfg), "target-inequality");
  PotentialEvaluator ev(spec, cfg.quad);
  const auto lu = center_log_u(ev);
  const bool c = passed(certify_violation(spec, violation_bound(spec), cfg, &lu), "violation-trend");
  const Certificate up = certify_upper_consistency(spec, cfg, &lu);
  const bool d = up.overall() && !up.checks().empty();
  const Certificate sl = certify_slope(spec, cfg, &lu);
  const Check* fit = sl.find("center-slope");
  const bool e = fit && fit->passed();
  std::string det = "a:" + fmt("%.1e", slack) + " b:" + (b ? "ok" : "FAIL") + " c:" + (c ? "ok" : "FAIL") +
                    " d:" + (d ? "ok" : "FAIL") + " e:" + (fit ? fmt("%.4f", fit->evidence["fitted"].get<double>()) : "-");
  return {a && b && c && d && e, det};
}

Outcome calibration() {
  const SolutionSpec s = single_bump_spec(3, 7, 0.05);
  PotentialEvaluator ev(s, {});
  std::vector<std::vector<double>> pts{s.bumps[0].center, {-0.5, 0.6, 0.2, 0, 0.1, 0, 0}, {0.1, -0.7, 0.3, 0.2, 0, 0.1, 0}};
  double worst = 0;
  bool ok = true;
  for (const auto& x : pts) {
    const auto rep = polyharmonic_residual(ev, x, residual_step(s, x));
    worst = std::max(worst, rep.residual);
    ok = ok && rep.pass(5e-2);
  }
  return {ok, "max residual " + fmt("%.2e", worst)};
}

Outcome inequality_and_violation(TheoremTag t) {
  const SolutionSpec spec = reference(t);
  VerifyConfig cfg;
  const bool ineq = passed(certify_inequality(spec, cfg), "target-inequality");
  const Certificate v = certify_violation(spec, violation_bound(spec), cfg);
  const Check* tr = v.find("violation-trend");
  const bool ok = ineq && tr && tr->passed();
  return {ok, to_string(t) + " inequality " + (ineq ? "ok" : "FAIL") + ", rise x" +
                  (tr ? fmt("%.3g", tr->evidence["rise"].get<double>()) : std::string("-"))};
}

Outcome phi_squared(TheoremTag t) {
  const SolutionSpec spec = reference(t);
  VerifyConfig cfg;
  const bool ineq = passed(certify_inequality(spec, cfg), "target-inequality");
  const Certificate v = certify_violation(spec, violation_bound(spec), cfg);
  const bool sq = passed(v, "lower-bound-phi-squared");
  return {ineq && sq, to_string(t) + " " + std::to_string(spec.bumps.size()) + " centers, u >= phi^2 " +
                          (sq ? "ok" : "FAIL") + ", inequality " + (ineq ? "ok" : "FAIL")};
}

Outcome exterior() {
  const auto [b1, b2] = exterior_exponent(3, 7, Rational(2));
  const bool exact = b1 == 6 && b2 == 6;
  const SolutionSpec spec = reference(TheoremTag::T1_17);
  const Certificate c = exterior_growth_check(spec);
  const Check* g = c.find("exterior-growth");
  return {exact && c.overall(), "b = " + rational_str(b1) + " = " + rational_str(b2) + ", growth x" +
                                    (g ? fmt("%.3g", g->evidence["rise"].get<double>()) : std::string("-")) +
                                    ", failed: " + failed_list(c)};
}

Outcome psi_decay() {
  const KernelSet k = make_phi({3, 7, 1.0});
  const std::vector<double> x{0.6, -0.3, 0.2, 0.5, 0.1, 0.0, 0.4};
  const std::vector<double> dir{0.5, 0.2, 0.1, 0.3, -0.4, 0.2, 0.1};
  const double s = psi_decay_slope(k, x, dir, 1e-4, 1e-2, 9);
  return {std::abs(s - 4.0) <= 0.1, "slope " + fmt("%.6f", s)};
}

Outcome log_norm() {
  const int N = 21;
  const double p = 2.0, R = 1.0;
  const double C = log_norm_constant(N, p, R);
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::exponential_distribution<double> E(1.0);
  std::uniform_int_distribution<int> cell(0, N * N - 1);
  int bad = 0;
  double worst = 0;
  std::vector<double> f(static_cast<std::size_t>(N * N));
  for (int trial = 0; trial < 50; ++trial) {
    // alternate dense, sparse and single-spike data
    std::fill(f.begin(), f.end(), 0.0);
    if (trial % 3 == 0) {
      for (auto& v : f) v = U(rng);
    } else {
      const int spikes = trial % 3 == 1 ? 1 + trial / 3 : 1;
      for (int k = 0; k < spikes; ++k) f[static_cast<std::size_t>(cell(rng))] += E(rng);
    }
    const auto pr = log_norm_probe(f, N, p, R);
    worst = std::max(worst, pr.ratio());
    if (pr.lhs > C * pr.rhs * (1 + 1e-12)) ++bad;
  }
  return {bad == 0, "50 functions, " + std::to_string(bad) + " violations, worst ratio " + fmt("%.4f", worst) +
                        " <= C = " + fmt("%.4f", C)};
}

Outcome tampering() {
  VerifyConfig cfg;
  auto only = [](const Certificate& c, const std::string& name) {
    const auto f = c.failed();
    return f.size() == 1 && f[0] == name;
  };
  const SolutionSpec s5 = reference(TheoremTag::T1_5);
  SolutionSpec t1 = s5;
  t1.bumps[2].log_mass += std::log(100.0);
  const Certificate c1 = certify_all(t1, cfg);

  const SolutionSpec s6 = reference(TheoremTag::T1_6);
  SolutionSpec t2 = s6;
  {
    auto& b = t2.bumps[0];
    b.log_radius = std::log(1.5 * b.center_norm() / 5.0);
    b.log_mass = b.derived_log_mass(t2.params.m);
  }
  const Certificate c2 = certify_all(t2, cfg);

  SolutionSpec t3 = s6;
  t3.nonlinearity.lambda = Rational(13, 2);
  const Certificate c3 = certify_all(t3, cfg);

  const bool ok = only(c1, "target-inequality") && only(c2, "radius-bound") && only(c3, "lambda-window");
  return {ok, "M*100 -> " + failed_list(c1) + "; r=1.5|x|/5 -> " + failed_list(c2) + "; lambda=13/2 -> " +
                  failed_list(c3)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "exact kernel polyharmonicity m<=5 n<=12", 10, kernel_grid},
      {2, "exact Kelvin identity sweep", 10, kelvin},
      {3, "reference power construction", 300, reference_power},
      {4, "residual oracle on the calibration bump", 120, calibration},
      {5, "log-power construction", 300, [] { return inequality_and_violation(TheoremTag::T1_8); }},
      {5, "exp-power construction", 300, [] { return inequality_and_violation(TheoremTag::T1_10); }},
      {6, "unbounded power variant u >= phi^2", 300, [] { return phi_squared(TheoremTag::T1_6); }},
      {6, "unbounded exp variant u >= phi^2", 300, [] { return phi_squared(TheoremTag::T1_11); }},
      {7, "exterior exponent and growth", 300, exterior},
      {8, "remainder kernel decay order", 60, psi_decay},
      {9, "log-kernel norm inequality probe", 60, log_norm},
      {10, "negative controls", 0, tampering},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.limit_s == 0 || secs < c.limit_s;
    const bool ok = o.ok && in_time;
    failures += !ok;
    std::cout << (ok ? "PASS" : "FAIL") << "  criterion " << c.id << "  " << c.name << "  [" << fmt("%.1f", secs)
              << " s" << (c.limit_s > 0 ? " / " + fmt("%.0f", c.limit_s) + " s" : std::string{})
              << (in_time ? "" : " OVER TIME") << "]  " << o.detail << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures;
}
