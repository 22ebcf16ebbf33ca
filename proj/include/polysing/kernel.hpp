#pragma once

// Fundamental solutions of the polyharmonic operator, the Gamma profiles,
// derivatives D^alpha Phi and the Taylor remainder kernel Psi.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "polysing/quadrature.hpp"
#include "polysing/symcalc.hpp"

namespace polysing {

enum class CaseTag { I, II, III, IV, V };

inline CaseTag classify_case(int m, int n) {
  if (m < 1 || n < 2) throw std::invalid_argument("classify_case: need m >= 1 and n >= 2");
  if (m % 2 == 0 || 2 * m > n) return CaseTag::I;
  if (m == 1) return n >= 3 ? CaseTag::II : CaseTag::III;
  return 2 * m < n ? CaseTag::IV : CaseTag::V;
}

inline std::string_view case_label(CaseTag c) {
  switch (c) {
    case CaseTag::I: return "(i)";
    case CaseTag::II: return "(ii)";
    case CaseTag::III: return "(iii)";
    case CaseTag::IV: return "(iv)";
    case CaseTag::V: return "(v)";
  }
  return "?";
}

struct ProblemParams {
  int m = 3;
  int n = 7;
  double A = 1.0;

  CaseTag case_tag() const { return classify_case(m, n); }
  void validate() const {
    classify_case(m, n);
    if (!(A > 0) || !std::isfinite(A)) throw std::invalid_argument("ProblemParams: A must be positive");
  }
};

enum class PhiBranch { Power, OddPower, EvenLog };

inline PhiBranch phi_branch(int m, int n) {
  classify_case(m, n);
  if (2 * m < n) return PhiBranch::Power;
  return n % 2 ? PhiBranch::OddPower : PhiBranch::EvenLog;
}

inline std::string_view branch_label(PhiBranch b) {
  switch (b) {
    case PhiBranch::Power: return "power";
    case PhiBranch::OddPower: return "odd-power";
    case PhiBranch::EvenLog: return "even-log";
  }
  return "?";
}

// Phi with unit constant: sign * |x|^{2m-n} (times log(5/|x|) on the even branch).
inline RadialExpr unit_phi_expr(int m, int n) {
  const std::size_t dim = static_cast<std::size_t>(n);
  switch (phi_branch(m, n)) {
    case PhiBranch::Power: return RadialExpr::power(dim, 2 * m - n, m % 2 ? -1 : 1);
    case PhiBranch::OddPower: return RadialExpr::power(dim, 2 * m - n, ((n - 1) / 2) % 2 ? -1 : 1);
    case PhiBranch::EvenLog: return RadialExpr::log_power(dim, 2 * m - n, (n / 2) % 2 ? -1 : 1);
  }
  throw std::logic_error("unreachable");
}

// Constant A with Delta^m (A Phi) = delta. Delta^{m-1} Phi is computed exactly;
// it is c |x|^{2-n} (n >= 3) or c log(5/|x|) + const (n = 2), and the flux of
// its gradient through a sphere gives the mass of the Dirac measure.
inline double fundamental_normalization(int m, int n) {
  RadialExpr e = unit_phi_expr(m, n);
  if (m > 1) e = iterated_laplacian(e, m - 1);
  double kappa = 0.0;
  if (n >= 3) {
    Rational c = 0;
    for (const auto& [k, v] : e.terms()) {
      if (k.gamma.order() != 0 || k.rpow != 2 - n || k.logflag != 0)
        throw std::logic_error("fundamental_normalization: unexpected term in Delta^{m-1} Phi");
      c = v;
    }
    kappa = -c.convert_to<double>() * (n - 2) * sphere_area(n);
  } else {
    Rational c = 0;
    for (const auto& [k, v] : e.terms()) {
      if (k.gamma.order() != 0 || k.rpow != 0) throw std::logic_error("fundamental_normalization: unexpected term");
      if (k.logflag) c = v;
    }
    kappa = -c.convert_to<double>() * 2.0 * std::numbers::pi;
  }
  if (!(kappa > 0)) throw std::logic_error("fundamental_normalization: non-positive delta mass");
  return 1.0 / kappa;
}

inline double gamma_fn(double r, int n) {
  if (!(r > 0)) throw std::domain_error("gamma_fn: r must be positive");
  if (n < 2) throw std::invalid_argument("gamma_fn: n >= 2");
  return n == 2 ? std::log(5.0 / r) : std::pow(r, -(n - 2));
}

inline double gamma_inf(double r, int m, int n) {
  if (!(r > 0)) throw std::domain_error("gamma_inf: r must be positive");
  if (m < 1 || n < 2) throw std::invalid_argument("gamma_inf: need m >= 1, n >= 2");
  const double p = std::pow(r, 2 * m - 2);
  return n == 2 ? p * std::log(5.0 * r) : p;
}

inline RadialExpr gamma_expr(int n) {
  const std::size_t dim = static_cast<std::size_t>(n);
  return n == 2 ? RadialExpr::log_power(dim, 0) : RadialExpr::power(dim, 2 - n);
}

struct WeightedExpr {
  double weight;
  RadialExpr expr;
};

// Gamma_inf as a real combination of exact terms; for n = 2,
// r^{2m-2} log(5r) = 2 log 5 * r^{2m-2} - r^{2m-2} log(5/r).
inline std::vector<WeightedExpr> gamma_inf_terms(int m, int n) {
  const std::size_t dim = static_cast<std::size_t>(n);
  if (n >= 3) return {{1.0, RadialExpr::power(dim, 2 * m - 2)}};
  return {{2.0 * std::log(5.0), RadialExpr::power(dim, 2 * m - 2)}, {-1.0, RadialExpr::log_power(dim, 2 * m - 2)}};
}

// ---------------------------------------------------------------------------
// Radial Taylor expansions. For g(x) = c |x|^s, with t = cos(x, h), z = |h|/|x|,
//   g(x + h) = c |x|^s sum_l C_l^{(-s/2)}(-t) z^l      (Gegenbauer generating function)
//   log(5/|x+h|) = log(5/|x|) + sum_{l>=1} T_l(-t) z^l / l
// and the l-th summand is exactly the degree-l homogeneous Taylor piece in h.

struct RadialTerm {
  double coeff = 0.0;
  int rpow = 0;
  int logflag = 0;
};

inline std::vector<RadialTerm> radial_terms(const RadialExpr& e) {
  std::vector<RadialTerm> out;
  for (const auto& [k, c] : e.terms()) {
    if (k.gamma.order() != 0) throw std::invalid_argument("radial_terms: expression is not radial");
    out.push_back({c.convert_to<double>(), k.rpow, k.logflag});
  }
  return out;
}

inline bool series_supported(const std::vector<RadialTerm>& terms) {
  for (const auto& t : terms)
    if (t.logflag && t.rpow != 0) return false;
  return true;
}

inline double radial_value(const std::vector<RadialTerm>& terms, double r) {
  double s = 0.0;
  for (const auto& t : terms) {
    double v = t.coeff * std::pow(r, t.rpow);
    if (t.logflag) v *= std::log(5.0 / r);
    s += v;
  }
  return s;
}

// Sum of the homogeneous pieces lo..hi of g(x+h); hi < 0 sums the whole tail
// (needs z < 1).
inline double radial_taylor_band(const std::vector<RadialTerm>& terms, double xnorm, double t, double z, int lo,
                                 int hi) {
  if (!series_supported(terms)) throw std::domain_error("radial_taylor_band: log term with nonzero power");
  const bool tail = hi < 0;
  if (tail && !(z < 1.0)) throw std::domain_error("radial_taylor_band: tail needs |h| < |x|");
  if (!tail && hi < lo) return 0.0;
  const double u = -t;
  CompensatedSum total;
  for (const auto& term : terms) {
    int last = hi;
    if (tail) {
      const double nu = -0.5 * term.rpow;
      const double growth = std::max(0.0, 2.0 * nu) * std::log(lo + 200.0);
      const double lz = z > 0 ? -std::log(z) : 1e300;
      last = lo + static_cast<int>(std::ceil((42.0 + growth) / lz)) + 5;
      last = std::min(last, lo + 20000);
    }
    CompensatedSum part;
    double zl = 1.0;
    if (term.logflag) {
      double tm1 = 1.0, tl = u;  // T_0, T_1
      if (lo == 0) part += std::log(5.0 / xnorm);
      zl = z;
      for (int l = 1; l <= last; ++l) {
        if (l >= lo) part += tl * zl / l;
        const double next = 2.0 * u * tl - tm1;
        tm1 = tl;
        tl = next;
        zl *= z;
      }
      total += term.coeff * part.value();
    } else {
      const double nu = -0.5 * term.rpow;
      double cm1 = 0.0, cl = 1.0;  // C_{-1}, C_0
      for (int l = 0; l <= last; ++l) {
        if (l >= lo) part += cl * zl;
        const int k = l + 1;
        const double next = (2.0 * u * (k + nu - 1.0) * cl - (k + 2.0 * nu - 2.0) * cm1) / k;
        cm1 = cl;
        cl = next;
        zl *= z;
      }
      total += term.coeff * std::pow(xnorm, term.rpow) * part.value();
    }
  }
  return total.value();
}

struct RadialGeometry {
  double xnorm, hnorm, t, z;
};

inline RadialGeometry radial_geometry(std::span<const double> x, std::span<const double> h) {
  double xx = 0, hh = 0, xh = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx += x[i] * x[i];
    hh += h[i] * h[i];
    xh += x[i] * h[i];
  }
  RadialGeometry g;
  g.xnorm = std::sqrt(xx);
  g.hnorm = std::sqrt(hh);
  g.t = (g.hnorm > 0 && g.xnorm > 0) ? std::clamp(xh / (g.xnorm * g.hnorm), -1.0, 1.0) : 0.0;
  g.z = g.xnorm > 0 ? g.hnorm / g.xnorm : 0.0;
  return g;
}

// g(x+h) minus its Taylor polynomial of degree K in h. Uses the convergent tail
// when |h| < |x|/2 and direct subtraction otherwise.
inline double radial_remainder(const std::vector<RadialTerm>& terms, std::span<const double> x,
                               std::span<const double> h, int K) {
  const RadialGeometry g = radial_geometry(x, h);
  if (g.xnorm == 0) throw std::domain_error("radial_remainder: x = 0");
  if (g.hnorm == 0) return K >= 0 ? 0.0 : radial_value(terms, g.xnorm);
  if (g.z < 0.5) return radial_taylor_band(terms, g.xnorm, g.t, g.z, std::max(K + 1, 0), -1);
  double xh2 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) xh2 += (x[i] + h[i]) * (x[i] + h[i]);
  const double full = radial_value(terms, std::sqrt(xh2));
  return K >= 0 ? full - radial_taylor_band(terms, g.xnorm, g.t, g.z, 0, K) : full;
}

// ---------------------------------------------------------------------------

class KernelSet {
 public:
  explicit KernelSet(const ProblemParams& p) : st_(std::make_shared<State>()) {
    p.validate();
    st_->params = p;
    st_->branch = phi_branch(p.m, p.n);
    st_->unit_phi = unit_phi_expr(p.m, p.n);
    st_->compiled_phi = CompiledExpr(st_->unit_phi);
    RadialExpr e = st_->unit_phi;
    for (int k = 0; k < p.m; ++k) {
      st_->lap_powers.push_back(e);
      st_->lap_terms.push_back(radial_terms(e));
      e = laplacian(e);
    }
    st_->phi_terms = st_->lap_terms.front();
  }

  const ProblemParams& params() const { return st_->params; }
  int m() const { return st_->params.m; }
  int n() const { return st_->params.n; }
  double scale() const { return st_->params.A; }
  PhiBranch branch() const { return st_->branch; }
  int taylor_order() const { return 2 * m() - 3; }

  const RadialExpr& unit_phi() const { return st_->unit_phi; }
  RadialExpr phi() const { return st_->unit_phi * Rational(scale()); }

  // Delta^k Phi with unit constant, 0 <= k < m.
  const RadialExpr& laplacian_power(int k) const { return st_->lap_powers.at(static_cast<std::size_t>(k)); }
  const std::vector<RadialTerm>& laplacian_power_terms(int k) const {
    return st_->lap_terms.at(static_cast<std::size_t>(k));
  }

  // D^alpha Phi with unit constant; memoized, safe to call concurrently.
  const RadialExpr& unit_derivative(const MultiIndex& alpha) const {
    if (alpha.dim() != static_cast<std::size_t>(n())) throw std::invalid_argument("phi_deriv: dimension mismatch");
    std::lock_guard lock(st_->mu);
    return derivative_locked(alpha);
  }

  double phi_value(std::span<const double> x) const { return scale() * st_->compiled_phi(x); }

  // Sum_{|alpha| <= K} (h^alpha / alpha!) D^alpha Phi(x), unit constant.
  double taylor_polynomial(std::span<const double> x, std::span<const double> h) const {
    const auto& table = taylor_table();
    double r2 = 0;
    for (double v : x) r2 += v * v;
    const double r = std::sqrt(r2), L = std::log(5.0 / r);
    long double sum = 0.0L;
    for (const auto& row : table) {
      long double mono = row.inv_factorial;
      for (std::size_t i = 0; i < h.size(); ++i)
        for (int k = 0; k < row.alpha[i]; ++k) mono *= h[i];
      sum += mono * row.expr(x, r, L);
    }
    return static_cast<double>(sum);
  }

 private:
  struct TaylorRow {
    MultiIndex alpha;
    double inv_factorial;
    CompiledExpr expr;
  };

  struct State {
    ProblemParams params;
    PhiBranch branch{};
    RadialExpr unit_phi;
    CompiledExpr compiled_phi;
    std::vector<RadialExpr> lap_powers;
    std::vector<std::vector<RadialTerm>> lap_terms;
    std::vector<RadialTerm> phi_terms;
    std::mutex mu;
    std::map<MultiIndex, RadialExpr> cache;
    std::once_flag table_once;
    std::vector<TaylorRow> table;
  };

  const RadialExpr& derivative_locked(const MultiIndex& alpha) const {
    auto it = st_->cache.find(alpha);
    if (it != st_->cache.end()) return it->second;
    if (alpha.order() == 0) return st_->cache.emplace(alpha, st_->unit_phi).first->second;
    std::size_t axis = 0;
    while (alpha[axis] == 0) ++axis;
    const RadialExpr& lower = derivative_locked(alpha.shifted(axis, -1));
    return st_->cache.emplace(alpha, derive(lower, axis)).first->second;
  }

  const std::vector<TaylorRow>& taylor_table() const {
    std::call_once(st_->table_once, [this] {
      for (const auto& a : enumerate_multi_indices(static_cast<std::size_t>(n()), taylor_order()))
        st_->table.push_back({a, 1.0 / a.factorial_value(), CompiledExpr(unit_derivative(a))});
    });
    return st_->table;
  }

  std::shared_ptr<State> st_;

  friend double psi(const KernelSet&, std::span<const double>, std::span<const double>);
};

inline KernelSet make_phi(const ProblemParams& p) { return KernelSet(p); }

// D^alpha Phi including the constant A.
inline RadialExpr phi_deriv(const KernelSet& k, const MultiIndex& alpha) {
  return k.unit_derivative(alpha) * Rational(k.scale());
}

// Psi(x, y) = Phi(x - y) - sum_{|alpha| <= 2m-3} (-y)^alpha / alpha! D^alpha Phi(x).
inline double psi(const KernelSet& k, std::span<const double> x, std::span<const double> y) {
  const std::size_t n = static_cast<std::size_t>(k.n());
  if (x.size() != n || y.size() != n) throw std::invalid_argument("psi: dimension mismatch");
  double xx = 0, dd = 0, yy = 0;
  std::vector<double> h(n), diff(n);
  for (std::size_t i = 0; i < n; ++i) {
    h[i] = -y[i];
    diff[i] = x[i] - y[i];
    xx += x[i] * x[i];
    yy += y[i] * y[i];
    dd += diff[i] * diff[i];
  }
  if (xx == 0) throw std::domain_error("psi: x = 0");
  if (dd == 0) throw std::domain_error("psi: y = x");
  const int K = k.taylor_order();
  if (K < 0) return k.phi_value(diff);
  if (yy == 0) return 0.0;
  const auto& terms = k.st_->phi_terms;
  if (yy < 0.25 * xx && series_supported(terms)) return k.scale() * radial_remainder(terms, x, h, K);
  return k.scale() * (k.st_->compiled_phi(diff) - k.taylor_polynomial(x, h));
}

struct PsiBoundReport {
  double max_ratio = 0.0;          // sup |Psi| / (|y|^{2m-2} |x|^{2-n})
  double max_ratio_halved = 0.0;   // same samples with x, y halved
  std::size_t samples = 0;
  std::size_t zero_rows = 0;
};

inline PsiBoundReport psi_bound_probe(const KernelSet& k, std::size_t sample_count, std::uint64_t seed = 12345) {
  if (sample_count < 1) throw std::invalid_argument("psi_bound_probe: need at least one sample");
  const int n = k.n(), m = k.m();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto direction = [&] {
    std::vector<double> v(static_cast<std::size_t>(n));
    double s = 0;
    for (auto& c : v) {
      c = g(rng);
      s += c * c;
    }
    for (auto& c : v) c /= std::sqrt(s);
    return v;
  };
  auto ratio = [&](const std::vector<double>& x, const std::vector<double>& y) {
    double xn = 0, yn = 0;
    for (int i = 0; i < n; ++i) {
      xn += x[i] * x[i];
      yn += y[i] * y[i];
    }
    xn = std::sqrt(xn);
    yn = std::sqrt(yn);
    if (yn == 0) return 0.0;
    return std::abs(psi(k, x, y)) / (std::pow(yn, 2 * m - 2) * std::pow(xn, 2 - n));
  };
  PsiBoundReport rep;
  rep.samples = sample_count;
  for (std::size_t s = 0; s < sample_count; ++s) {
    const double xr = std::pow(10.0, -3.0 * u(rng));
    const double yr = (s % 10 == 0) ? 0.0 : 0.5 * xr * u(rng);
    auto x = direction(), y = direction();
    for (auto& c : x) c *= xr;
    for (auto& c : y) c *= yr;
    if (yr == 0) ++rep.zero_rows;
    rep.max_ratio = std::max(rep.max_ratio, ratio(x, y));
    for (auto& c : x) c *= 0.5;
    for (auto& c : y) c *= 0.5;
    rep.max_ratio_halved = std::max(rep.max_ratio_halved, ratio(x, y));
  }
  return rep;
}

struct KernelTableRow {
  int m = 0, n = 0;
  std::string branch;
  std::string phi;
  bool polyharmonic = false;     // Delta^m Phi == 0
  bool minimal_order = false;    // Delta^{m-1} Phi != 0
  bool gamma_inf_ok = false;     // Delta^m kills every weighted Gamma_inf term
};

inline std::vector<KernelTableRow> kernel_table(int mmax, int nmax, int nmin = 2) {
  std::vector<KernelTableRow> out;
  for (int m = 1; m <= mmax; ++m)
    for (int n = nmin; n <= nmax; ++n) {
      KernelTableRow r;
      r.m = m;
      r.n = n;
      r.branch = std::string(branch_label(phi_branch(m, n)));
      const RadialExpr phi = unit_phi_expr(m, n);
      r.phi = phi.str();
      r.polyharmonic = iterated_laplacian(phi, m).is_zero();
      r.minimal_order = m == 1 || !iterated_laplacian(phi, m - 1).is_zero();
      r.gamma_inf_ok = true;
      for (const auto& w : gamma_inf_terms(m, n)) r.gamma_inf_ok = r.gamma_inf_ok && iterated_laplacian(w.expr, m).is_zero();
      out.push_back(std::move(r));
    }
  return out;
}

// Least-squares slope of log|Psi(x, t dir)| against log t over t/|x| in
// [lo, hi], N log-spaced points.
inline double psi_decay_slope(const KernelSet& k, std::span<const double> x, std::span<const double> dir, double lo = 1e-4,
                              double hi = 1e-2, int N = 9) {
  if (x.size() != dir.size() || N < 2) throw std::invalid_argument("psi_decay_slope: bad arguments");
  double xn = 0, dn = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xn += x[i] * x[i];
    dn += dir[i] * dir[i];
  }
  xn = std::sqrt(xn);
  dn = std::sqrt(dn);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<double> y(x.size());
  for (int i = 0; i < N; ++i) {
    const double frac = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (N - 1));
    for (std::size_t c = 0; c < y.size(); ++c) y[c] = dir[c] / dn * frac * xn;
    const double lx = std::log(frac * xn), ly = std::log(std::abs(psi(k, x, y)));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (N * sxy - sx * sy) / (N * sxx - sx * sx);
}

}  // namespace polysing
