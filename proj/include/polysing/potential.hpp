#pragma once

// The potential N(x) = int -Psi(x, y) f(y) dy of a bump right-hand side, the
// solution u = N + C|x|^{2-n}, and numerical oracles for both.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "polysing/bump.hpp"
#include "polysing/kernel.hpp"
#include "polysing/quadrature.hpp"
#include "polysing/symcalc.hpp"

namespace polysing {

struct QuadratureConfig {
  double rel_tol = 1e-10;
  int polar_rings = 48;
  int angular_nodes = 96;
  bool split_singular = true;

  void validate() const {
    if (!(rel_tol > 0 && rel_tol <= 1e-2)) throw std::invalid_argument("QuadratureConfig: relTol must lie in (0, 1e-2]");
    if (polar_rings < 4 || angular_nodes < 4) throw std::invalid_argument("QuadratureConfig: node counts must be >= 4");
  }
  ConvolutionNodes nodes() const { return {polar_rings, angular_nodes, 2}; }
  QuadratureConfig refined() const {
    QuadratureConfig q = *this;
    q.polar_rings *= 2;
    q.angular_nodes *= 2;
    return q;
  }
};

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double coarse, double fine)
      : std::runtime_error(what), coarse_(coarse), fine_(fine) {}
  double coarse() const noexcept { return coarse_; }
  double fine() const noexcept { return fine_; }

 private:
  double coarse_, fine_;
};

enum class TheoremTag { T1_5, T1_6, T1_8, T1_10, T1_11, T1_17, Custom };

inline std::string to_string(TheoremTag t) {
  switch (t) {
    case TheoremTag::T1_5: return "T1_5";
    case TheoremTag::T1_6: return "T1_6";
    case TheoremTag::T1_8: return "T1_8";
    case TheoremTag::T1_10: return "T1_10";
    case TheoremTag::T1_11: return "T1_11";
    case TheoremTag::T1_17: return "T1_17";
    case TheoremTag::Custom: return "custom";
  }
  return "?";
}

inline TheoremTag theorem_from_string(std::string s) {
  if (s.rfind("T", 0) == 0) s = s.substr(1);
  std::replace(s.begin(), s.end(), '_', '.');
  if (s == "1.5") return TheoremTag::T1_5;
  if (s == "1.6") return TheoremTag::T1_6;
  if (s == "1.8") return TheoremTag::T1_8;
  if (s == "1.10") return TheoremTag::T1_10;
  if (s == "1.11") return TheoremTag::T1_11;
  if (s == "1.17") return TheoremTag::T1_17;
  if (s == "custom") return TheoremTag::Custom;
  throw std::invalid_argument("unknown theorem tag: " + s);
}

struct Nonlinearity {
  enum class Kind { Power, WeightedPower, ExpPower };
  Kind kind = Kind::Power;
  Rational lambda = 1;
  double tau = 0.0;

  double lambda_value() const { return lambda.convert_to<double>(); }

  // log f_target(u) at |x| = xnorm; exp family is compared in log space.
  double log_target(double u, double xnorm) const {
    if (!(u > 0)) return -std::numeric_limits<double>::infinity();
    const double lam = lambda_value();
    switch (kind) {
      case Kind::Power: return lam * std::log(u);
      case Kind::WeightedPower: return tau * std::log(xnorm) + lam * std::log(u);
      case Kind::ExpPower: return std::pow(u, lam);
    }
    return 0.0;
  }
};

inline std::string to_string(Nonlinearity::Kind k) {
  switch (k) {
    case Nonlinearity::Kind::Power: return "power";
    case Nonlinearity::Kind::WeightedPower: return "weighted-power";
    case Nonlinearity::Kind::ExpPower: return "exp-power";
  }
  return "?";
}

struct SolutionSpec {
  ProblemParams params;             // A is the kernel normalization used in N
  std::vector<BumpSpec> bumps;
  double C = 1.0;
  double A_used = 1.0;              // lower-bound constant fed to the sequence formulas
  TheoremTag theorem = TheoremTag::Custom;
  Nonlinearity nonlinearity;
  std::string phi_preset;
  std::vector<int> j_index;         // absolute sequence index of each retained bump
  double eps_majorant_ratio = 0.0;  // max eps_{j+1}/eps_j
  double eps_majorant_sum = 0.0;    // eps_1 / (1 - ratio)

  void validate() const {
    params.validate();
    if (!(C > 0)) throw std::invalid_argument("SolutionSpec: C must be positive");
    if (!(A_used > 0)) throw std::invalid_argument("SolutionSpec: A_used must be positive");
    for (const auto& b : bumps)
      if (b.dim() != static_cast<std::size_t>(params.n)) throw std::invalid_argument("SolutionSpec: bump dimension mismatch");
  }
};

// ---------------------------------------------------------------------------

class PotentialEvaluator {
 public:
  // u = exp(log_scale) * (self + self_const) + rest inside bump j; self is the
  // only part that needs singular quadrature. self_const is the xi-independent
  // log(1/r_j) I piece when 2m = n, kept apart because it can exceed self by
  // many orders of magnitude.
  struct LocalSplit {
    double self = 0.0;
    double self_const = 0.0;
    double log_scale = 0.0;
    double rest = 0.0;
    double scaled() const { return self + self_const; }
    double value() const { return scaled() == 0.0 ? rest : std::exp(log_scale) * scaled() + rest; }
  };

  PotentialEvaluator(const SolutionSpec& spec, const QuadratureConfig& cfg)
      : spec_(spec), cfg_(cfg), kernel_(spec.params), profile_(spec.params.n) {
    spec.validate();
    cfg.validate();
    m_ = spec.params.m;
    n_ = spec.params.n;
    if (!series_supported(kernel_.laplacian_power_terms(0)) || kernel_.laplacian_power_terms(0).size() != 1)
      throw std::invalid_argument("PotentialEvaluator: kernel branch not supported");
    profile_.precompute_moments(m_);
    for (const auto& b : spec.bumps) {
      Cached c;
      c.center = b.center;
      c.norm = b.center_norm();
      c.log_r = b.log_radius;
      c.r = b.radius();
      c.log_weight = std::log(b.epsilon) - (2 * m_ - 2) * std::log(c.norm);
      c.weight = std::exp(c.log_weight);
      for (int k = 0; k < m_; ++k)
        c.moment.push_back(pizzetti_coefficient(k, n_) * std::exp(2.0 * k * c.log_r) * profile_.radial_moment(k));
      bumps_.push_back(std::move(c));
    }
  }

  const SolutionSpec& spec() const { return spec_; }
  const KernelSet& kernel() const { return kernel_; }
  const BumpProfile& profile() const { return profile_; }
  const QuadratureConfig& config() const { return cfg_; }

  double N(std::span<const double> x) const {
    std::vector<double> xi;
    const int j = locate_bump(spec_.bumps, x, &xi);
    if (j >= 0) return local(static_cast<std::size_t>(j), xi, false).value();
    return far_sum(x, -1);
  }

  double u(std::span<const double> x) const { return N(x) + spec_.C * std::pow(norm(x), 2 - n_); }

  // Inside bump j at x = x_j + r_j xi.
  LocalSplit local(std::size_t j, std::span<const double> xi, bool with_c = true) const {
    const Cached& b = bumps_.at(j);
    std::vector<double> x(static_cast<std::size_t>(n_));
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = b.center[i] + b.r * xi[i];
    double d = 0;
    for (double v : xi) d += v * v;
    d = std::sqrt(d);  // the split is valid off the support too; the stencil uses that

    // Phi is a single term c r^s [log(5/r)] in every supported case.
    const RadialTerm& t = kernel_.laplacian_power_terms(0).front();
    const double A = kernel_.scale();
    LocalSplit out;
    // -M_j int Phi(x - y) phi_j(y) dy = -w_j A c r^s [G(xi) + log(1/r) G_0(xi)]
    double G = singular_integral(t.rpow, t.logflag, d);
    if (t.logflag && t.rpow != 0) G += -b.log_r * singular_integral(t.rpow, 0, d);
    out.self = -A * t.coeff * G;
    if (t.logflag && t.rpow == 0) out.self_const = -A * t.coeff * (-b.log_r) * profile_.mass();
    out.log_scale = b.log_weight + t.rpow * b.log_r;
    CompensatedSum rest;
    rest += b.weight * A * taylor_moments(b, x, 2 * m_ - 3, false);
    rest += far_sum(x, static_cast<int>(j));
    if (with_c) rest += spec_.C * std::pow(norm(x), 2 - n_);
    out.rest = rest.value();
    return out;
  }

  double u_local(std::size_t j, std::span<const double> xi) const { return local(j, xi, true).value(); }

  // Contribution of bump j at a point outside its support, by the mean-value
  // expansion of the m-polyharmonic function y -> Psi(x, y).
  double far_contribution(std::size_t j, std::span<const double> x) const {
    const Cached& b = bumps_.at(j);
    return -b.weight * kernel_.scale() * taylor_moments(b, x, 2 * m_ - 3, true);
  }

  // Same contribution without the mean-value expansion: the Phi part by polar
  // quadrature about x, the Taylor part on the +-e_i cross (a spherical
  // 3-design, so m <= 3 only).
  double far_contribution_quadrature(std::size_t j, std::span<const double> x, const ConvolutionNodes& q) const {
    if (m_ > 3) throw std::invalid_argument("far_contribution_quadrature: needs 2m-3 <= 3");
    const Cached& b = bumps_.at(j);
    const RadialTerm& t = kernel_.laplacian_power_terms(0).front();
    double d = 0;
    for (std::size_t i = 0; i < x.size(); ++i) d += (x[i] - b.center[i]) * (x[i] - b.center[i]);
    d = std::sqrt(d) / b.r;
    const int n = n_;
    const double lr = b.log_r;
    auto kern = [n, t, lr](double rho) {
      double w = std::pow(rho, n - 1 + t.rpow);
      if (t.logflag) w *= std::log(5.0 / rho) - lr;
      return w;
    };
    const double phi_part = t.coeff * std::exp(t.rpow * b.log_r) * bump_convolution(profile_, kern, d, q);
    std::vector<double> y(x.size()), h(x.size());
    auto shell = [&](double rho) {
      double s = 0;
      for (std::size_t axis = 0; axis < x.size(); ++axis)
        for (double sg : {-1.0, 1.0}) {
          for (std::size_t i = 0; i < x.size(); ++i) y[i] = b.center[i] + (i == axis ? sg * b.r * rho : 0.0);
          for (std::size_t i = 0; i < x.size(); ++i) h[i] = -y[i];
          s += kernel_.taylor_polynomial(x, h);
        }
      return s / (2.0 * static_cast<double>(x.size()));
    };
    const double taylor_part = profile_.radial_integral([&](double rho) { return std::pow(rho, n - 1) * shell(rho); });
    return -b.weight * kernel_.scale() * (phi_part - taylor_part);
  }

 private:
  struct Cached {
    std::vector<double> center;
    double norm = 0, log_r = 0, r = 0, log_weight = 0, weight = 0;
    std::vector<double> moment;  // c_k r^{2k} I_k
  };

  static double norm(std::span<const double> x) {
    double s = 0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
  }

  // int |xi - eta|^s [log(5/|xi - eta|)] phi(eta) d eta, checked against a refined rule.
  double singular_integral(int s, int logflag, double d) const {
    const int n = n_;
    auto weight = [n, s, logflag](double rho) {
      double w = std::pow(rho, n - 1 + s);
      if (logflag) w *= std::log(5.0 / rho);
      return w;
    };
    auto eval = [&](const QuadratureConfig& q) {
      return cfg_.split_singular ? bump_convolution(profile_, weight, d, q.nodes())
                                 : centered_convolution(weight, d, q);
    };
    const double coarse = eval(cfg_);
    const double fine = eval(cfg_.refined());
    if (std::abs(coarse - fine) > cfg_.rel_tol * std::abs(fine))
      throw QuadratureError("singular bump integral did not converge at d = " + std::to_string(d), coarse, fine);
    return fine;
  }

  // Polar coordinates about the bump center, so the kernel singularity sits
  // inside the domain. Only weakly singular here; kept as an independent path.
  template <class W>
  double centered_convolution(W&& weight, double d, const QuadratureConfig& q) const {
    const int n = n_;
    const GaussRule& gt = gauss_legendre(q.angular_nodes);
    auto shell = [&](double rho) {
      double s = 0.0;
      const double half = 0.5 * std::numbers::pi;
      for (std::size_t i = 0; i < gt.nodes.size(); ++i) {
        const double th = half + half * gt.nodes[i];
        const double dist = std::sqrt(std::max(d * d + rho * rho - 2 * d * rho * std::cos(th), 1e-300));
        s += gt.weights[i] * weight(dist) * std::pow(dist, 1 - n) * std::pow(std::sin(th), n - 2);
      }
      return half * s;
    };
    return sphere_area(n - 1) *
           integrate([&](double rho) { return BumpProfile::radial(rho) * std::pow(rho, n - 1) * shell(rho); }, 0.0,
                     1.0, q.polar_rings, 4);
  }

  // sum_k c_k r^{2k} I_k  B_k  where B_k is the remainder (outside) or the
  // Taylor polynomial (inside) of Delta^k Phi at x with increment -x_j.
  double taylor_moments(const Cached& b, std::span<const double> x, int K, bool remainder) const {
    std::vector<double> h(b.center.size());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = -b.center[i];
    const RadialGeometry g = radial_geometry(x, h);
    CompensatedSum s;
    for (int k = 0; k < m_; ++k) {
      const int Kk = K - 2 * k;
      const auto& terms = kernel_.laplacian_power_terms(k);
      double v;
      if (remainder)
        v = radial_remainder(terms, x, h, Kk);
      else
        v = Kk >= 0 ? radial_taylor_band(terms, g.xnorm, g.t, g.z, 0, Kk) : 0.0;
      s += b.moment[static_cast<std::size_t>(k)] * v;
    }
    return s.value();
  }

  double far_sum(std::span<const double> x, int skip) const {
    CompensatedSum s;
    for (std::size_t j = 0; j < bumps_.size(); ++j)
      if (static_cast<int>(j) != skip) s += far_contribution(j, x);
    return s.value();
  }

  SolutionSpec spec_;
  QuadratureConfig cfg_;
  KernelSet kernel_;
  BumpProfile profile_;
  int m_ = 0, n_ = 0;
  std::vector<Cached> bumps_;
};

// ---------------------------------------------------------------------------
// Choice of C and A.

struct ChooseCReport {
  double C = 0.0;
  double floor = 0.0;        // A * sum_j M_j int |y|^{2m-2} phi_j
  double sampled_max = 0.0;  // max of -N(x) |x|^{n-2} over the samples
  std::size_t samples = 0;
};

namespace detail {

inline std::vector<double> random_direction(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  double s = 0;
  do {
    s = 0;
    for (double& x : v) {
      x = g(rng);
      s += x * x;
    }
  } while (s == 0);
  s = std::sqrt(s);
  for (double& x : v) x /= s;
  return v;
}

}  // namespace detail

// C = max(floor, 2 * sampled max of -N |x|^{n-2}). Samples sit on shells around
// each bump and log-uniformly in |x|; inside the supports N is dominated by the
// positive self term and is not sampled.
inline ChooseCReport choose_C(const PotentialEvaluator& ev, std::size_t samples = 4000, std::uint64_t seed = 12345) {
  const auto& spec = ev.spec();
  const int n = spec.params.n;
  ChooseCReport rep;
  rep.floor = ev.kernel().scale() * moment_check(spec.bumps, ev.profile(), spec.params.m).value;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double lo = 0.5;
  for (const auto& b : spec.bumps) lo = std::min(lo, b.center_norm());
  lo /= 8.0;
  const double shell_factors[] = {0.25, 0.5, 0.75, 0.9, 1.1, 1.5, 2.0, 3.0};
  double worst = -std::numeric_limits<double>::infinity();
  auto probe = [&](const std::vector<double>& x) {
    if (locate_bump(spec.bumps, x) >= 0) return;
    double r = 0;
    for (double v : x) r += v * v;
    r = std::sqrt(r);
    worst = std::max(worst, -ev.N(x) * std::pow(r, n - 2));
    ++rep.samples;
  };
  const std::size_t per_shell = std::max<std::size_t>(8, samples / (2 * std::max<std::size_t>(1, spec.bumps.size()) * 8));
  for (const auto& b : spec.bumps)
    for (double f : shell_factors)
      for (std::size_t k = 0; k < per_shell; ++k) {
        auto x = detail::random_direction(rng, static_cast<std::size_t>(n));
        for (double& v : x) v *= f * b.center_norm();
        probe(x);
      }
  for (std::size_t k = 0; k < samples / 2; ++k) {
    auto x = detail::random_direction(rng, static_cast<std::size_t>(n));
    const double r = lo * std::pow(1.0 / lo, unif(rng));
    for (double& v : x) v *= r;
    probe(x);
  }
  rep.sampled_max = worst;
  rep.C = std::max(rep.floor, 2.0 * worst);
  return rep;
}

// One bump of radius r at 0.5 e_1, C from choose_C. Used to calibrate the
// residual oracle.
inline SolutionSpec single_bump_spec(int m, int n, double r = 0.05, double eps = 1.0) {
  SolutionSpec s;
  s.params = {m, n, fundamental_normalization(m, n)};
  std::vector<double> c(static_cast<std::size_t>(n), 0.0);
  c[0] = 0.5;
  s.bumps.push_back(make_bump(c, std::log(r), eps, m));
  PotentialEvaluator probe(s, {});
  s.C = choose_C(probe).C;
  return s;
}

struct ChooseAReport {
  double A = 0.0;      // lower-bound constant for u(x_j)
  double J = 0.0;      // min_d int |xi - eta|^{2m-n} phi, or I when 2m = n
  double argmin = 0.0;
};

// For 2m < n the self term at the center of bump j is at least
// A |c| J eps_j / (|x_j|^{2m-2} r_j^{n-2m}); for 2m = n the log(1/r) part gives
// A |c| I eps_j log(1/r_j) / |x_j|^{n-2}.
inline ChooseAReport choose_A(const BumpProfile& prof, const ProblemParams& p, int grid = 21,
                              const ConvolutionNodes& q = {}) {
  p.validate();
  if (prof.dim() != p.n) throw std::invalid_argument("choose_A: profile dimension mismatch");
  KernelSet k(p);
  const RadialTerm t = k.laplacian_power_terms(0).front();
  const double scale = k.scale() * std::abs(t.coeff);
  ChooseAReport rep;
  if (2 * p.m == p.n) {
    rep.J = prof.mass();
    rep.A = scale * rep.J;
    return rep;
  }
  if (2 * p.m > p.n) throw std::invalid_argument("choose_A: needs 2m <= n");
  const int n = p.n, s = 2 * p.m - p.n;
  rep.J = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid; ++i) {
    const double d = static_cast<double>(i) / (grid - 1);
    const double G = bump_convolution(prof, [n, s](double rho) { return std::pow(rho, n - 1 + s); }, d, q);
    if (G < rep.J) {
      rep.J = G;
      rep.argmin = d;
    }
  }
  rep.A = scale * rep.J;
  return rep;
}

// ---------------------------------------------------------------------------
// Residual of (-Delta)^m u = f by nested finite differences.

struct ResidualReport {
  double residual = 0.0;      // |(-1)^m Delta^m u - f| / (1 + f), Richardson value at h, h/2
  double disagreement = 0.0;  // same quantity between the (2h, h) and (h, h/2) Richardson values
  double f = 0.0;
  bool local = false;         // evaluated in bump coordinates
  bool noise_flag = false;    // disagreement exceeds the residual
  std::size_t evaluations = 0;

  bool pass(double tol) const { return residual < tol; }
};

namespace detail {

using Offset = std::vector<int>;

// Delta_h^m applied at offset o of a lattice function given on integer offsets.
template <class Get>
double iterated_lap(int k, const Offset& o, double h, Get&& get, std::map<std::pair<int, Offset>, double>& memo) {
  if (k == 0) return get(o);
  auto key = std::make_pair(k, o);
  auto it = memo.find(key);
  if (it != memo.end()) return it->second;
  Offset q = o;
  double s = 0.0;
  const double c = iterated_lap(k - 1, o, h, get, memo);
  for (std::size_t i = 0; i < o.size(); ++i) {
    q[i] = o[i] + 1;
    s += iterated_lap(k - 1, q, h, get, memo);
    q[i] = o[i] - 1;
    s += iterated_lap(k - 1, q, h, get, memo);
    q[i] = o[i];
    s -= 2.0 * c;
  }
  const double v = s / (h * h);
  memo.emplace(key, v);
  return v;
}

inline void collect_offsets(int k, const Offset& o, std::set<Offset>& out) {
  if (!out.insert(o).second && k == 0) return;
  if (k == 0) return;
  Offset q = o;
  for (std::size_t i = 0; i < o.size(); ++i) {
    for (int sgn : {-1, 1}) {
      q[i] = o[i] + sgn;
      collect_offsets(k - 1, q, out);
    }
    q[i] = o[i];
  }
}

// Values of a vector-valued function on the lattice x0 + step * o, evaluated in parallel.
template <class F>
std::map<Offset, std::array<double, 2>> lattice_values(const std::set<Offset>& offsets, F&& f) {
  std::vector<Offset> pts(offsets.begin(), offsets.end());
  std::vector<std::array<double, 2>> vals(pts.size());
  std::vector<std::exception_ptr> errs(pts.size());
  const unsigned nt = std::max(1u, std::min(16u, std::thread::hardware_concurrency()));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < pts.size();) {
      try {
        vals[i] = f(pts[i]);
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> th;
  for (unsigned t = 1; t < nt; ++t) th.emplace_back(work);
  work();
  for (auto& t : th) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  std::map<Offset, std::array<double, 2>> out;
  for (std::size_t i = 0; i < pts.size(); ++i) out.emplace(std::move(pts[i]), vals[i]);
  return out;
}

// Delta^m of both components at three step sizes 4s, 2s, s (s = step on the lattice).
inline std::array<std::array<double, 2>, 3> three_level_laplacians(
    int m, std::size_t n, double step, const std::map<Offset, std::array<double, 2>>& vals) {
  std::array<std::array<double, 2>, 3> out{};
  for (int level = 0; level < 3; ++level) {
    const int stride = 4 >> level;
    for (int comp = 0; comp < 2; ++comp) {
      std::map<std::pair<int, Offset>, double> memo;
      auto get = [&](const Offset& o) {
        Offset q(o.size());
        for (std::size_t i = 0; i < o.size(); ++i) q[i] = o[i] * stride;
        return vals.at(q)[static_cast<std::size_t>(comp)];
      };
      out[static_cast<std::size_t>(level)][static_cast<std::size_t>(comp)] =
          iterated_lap(m, Offset(n, 0), step * stride, get, memo);
    }
  }
  return out;
}

inline std::set<Offset> three_level_offsets(int m, std::size_t n) {
  std::set<Offset> base, all;
  collect_offsets(m, Offset(n, 0), base);
  for (int stride : {1, 2, 4})
    for (const auto& o : base) {
      Offset q(o.size());
      for (std::size_t i = 0; i < o.size(); ++i) q[i] = o[i] * stride;
      all.insert(q);
    }
  return all;
}

}  // namespace detail

// Residual inside bump j at bump coordinate xi0 with step h_xi in xi units
// (steps 2h, h, h/2 are used). The equation is written in xi and divided by
// M_j, so neither r_j nor M_j needs to be representable. The xi-independent
// parts (self_const and C|x|^{2-n}) are not differenced.
inline ResidualReport polyharmonic_residual_local(const PotentialEvaluator& ev, std::size_t j,
                                                  std::span<const double> xi0, double h_xi) {
  const auto& spec = ev.spec();
  const int m = spec.params.m;
  const std::size_t n = static_cast<std::size_t>(spec.params.n);
  if (!(h_xi > 0)) throw std::invalid_argument("polyharmonic_residual_local: h > 0");
  if (j >= spec.bumps.size()) throw std::out_of_range("polyharmonic_residual_local: bump index");
  const double sign = (m % 2 == 0) ? 1.0 : -1.0;
  const double step = 0.5 * h_xi;
  const auto offsets = detail::three_level_offsets(m, n);
  ResidualReport rep;
  rep.evaluations = offsets.size();
  rep.local = true;
  const auto& b = spec.bumps[j];
  auto vals = detail::lattice_values(offsets, [&](const detail::Offset& o) {
    std::vector<double> xi(xi0.begin(), xi0.end());
    for (std::size_t i = 0; i < n; ++i) xi[i] += step * o[i];
    // C|x|^{2-n} is harmonic and left out; it can dwarf the rest near small centers
    const auto s = ev.local(j, xi, false);
    return std::array<double, 2>{s.self, s.rest};
  });
  const auto L = detail::three_level_laplacians(m, n, step, vals);
  const auto split0 = ev.local(j, xi0, false);
  const double log_M = split0.log_scale - 2.0 * m * b.log_radius;
  const double rest_factor = std::exp(-split0.log_scale);
  double d2 = 0;
  for (double v : xi0) d2 += v * v;
  const double f_scaled = BumpProfile::radial(std::sqrt(d2));
  const double den = std::exp(-log_M) + f_scaled;
  std::array<double, 3> lap{};
  for (int l = 0; l < 3; ++l) lap[l] = L[l][0] + rest_factor * L[l][1];
  rep.f = std::exp(log_M) * f_scaled;
  const double coarse = (4.0 * lap[1] - lap[0]) / 3.0;
  const double fine = (4.0 * lap[2] - lap[1]) / 3.0;
  rep.residual = std::abs(sign * fine - f_scaled) / den;
  rep.disagreement = std::abs(fine - coarse) / den;
  rep.noise_flag = rep.disagreement > rep.residual;
  return rep;
}

// Residual at x with step h (steps 2h, h, h/2 are used). Inside a bump this is
// polyharmonic_residual_local with step h / r_j.
inline ResidualReport polyharmonic_residual(const PotentialEvaluator& ev, std::span<const double> x, double h) {
  const auto& spec = ev.spec();
  const int m = spec.params.m;
  const std::size_t n = static_cast<std::size_t>(spec.params.n);
  if (!(h > 0)) throw std::invalid_argument("polyharmonic_residual: h > 0");
  std::vector<double> xi0;
  const int j = locate_bump(spec.bumps, x, &xi0);
  if (j >= 0) return polyharmonic_residual_local(ev, static_cast<std::size_t>(j), xi0, h / spec.bumps[static_cast<std::size_t>(j)].radius());

  const double sign = (m % 2 == 0) ? 1.0 : -1.0;
  const double step = 0.5 * h;  // finest lattice
  const auto offsets = detail::three_level_offsets(m, n);
  ResidualReport rep;
  rep.evaluations = offsets.size();
  auto vals = detail::lattice_values(offsets, [&](const detail::Offset& o) {
    std::vector<double> y(x.begin(), x.end());
    for (std::size_t i = 0; i < n; ++i) y[i] += step * o[i];
    return std::array<double, 2>{ev.u(y), 0.0};
  });
  const auto L = detail::three_level_laplacians(m, n, step, vals);
  // levels at steps 2h, h, h/2; second-order error removed by Richardson
  const double coarse = (4.0 * L[1][0] - L[0][0]) / 3.0;
  const double fine = (4.0 * L[2][0] - L[1][0]) / 3.0;
  rep.residual = std::abs(sign * fine);
  rep.disagreement = std::abs(fine - coarse);
  rep.noise_flag = rep.disagreement > rep.residual;
  return rep;
}

// Step for polyharmonic_residual: r_j/8 inside bump j, otherwise 3% of the
// distance to the origin or the nearest bump center. Truncation grows like
// h^4/dist^{2m+4} and roundoff like 1/h^{2m}; this sits between the two for the
// specs used here.
inline double residual_step(const SolutionSpec& spec, std::span<const double> x) {
  const int j = locate_bump(spec.bumps, x);
  if (j >= 0) return spec.bumps[static_cast<std::size_t>(j)].radius() / 8.0;
  double dist = 0;
  for (double v : x) dist += v * v;
  dist = std::sqrt(dist);
  for (const auto& b : spec.bumps) {
    double d2 = 0;
    for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - b.center[i]) * (x[i] - b.center[i]);
    dist = std::min(dist, std::sqrt(d2));
  }
  return 0.03 * dist;
}

// ---------------------------------------------------------------------------
// Two-dimensional log potential bound ||int log(5/|.-eta|) f||_{L^p(B_R)} <= C ||f||_{L^1(B_R)}
// on an N x N grid over [-R, R]^2, cells restricted to the disk.

struct LogNormProbe {
  double lhs = 0.0;
  double rhs = 0.0;  // ||f||_1
  double ratio() const { return rhs > 0 ? lhs / rhs : 0.0; }
};

namespace detail {

struct DiskGrid {
  int N;
  double R, h;
  std::vector<std::array<double, 2>> pts;  // cell centers inside the disk
  std::vector<int> index;                  // grid index of each point
};

inline DiskGrid disk_grid(int N, double R) {
  if (N < 3 || !(R > 0)) throw std::invalid_argument("log_norm_probe: needs N >= 3 and R > 0");
  DiskGrid g{N, R, 2.0 * R / (N - 1), {}, {}};
  for (int i = 0; i < N; ++i)
    for (int k = 0; k < N; ++k) {
      const double a = -R + g.h * i, b = -R + g.h * k;
      if (a * a + b * b <= R * R) {
        g.pts.push_back({a, b});
        g.index.push_back(i * N + k);
      }
    }
  return g;
}

// Cell average of log(5/|z - c|) for the cell centred at c; exact for the self cell.
inline double log_kernel(const std::array<double, 2>& a, const std::array<double, 2>& c, double h) {
  const double dx = a[0] - c[0], dy = a[1] - c[1];
  const double d2 = dx * dx + dy * dy;
  if (d2 == 0.0) {
    // mean of log|z| over [-1,1]^2 is (log 2 - 3 + pi/2)/2
    const double mean_log_unit = 0.5 * (std::log(2.0) - 3.0 + 0.5 * std::numbers::pi);
    return std::log(5.0) - std::log(0.5 * h) - mean_log_unit;
  }
  return std::log(5.0) - 0.5 * std::log(d2);
}

inline double lp_norm_of_column(const DiskGrid& g, std::span<const double> coeffs, double p) {
  const double area = g.h * g.h;
  double s = 0.0;
  for (const auto& a : g.pts) {
    double v = 0.0;
    for (std::size_t c = 0; c < g.pts.size(); ++c)
      if (coeffs[c] != 0.0) v += coeffs[c] * log_kernel(a, g.pts[c], g.h);
    s += std::pow(std::abs(v), p) * area;
  }
  return std::pow(s, 1.0 / p);
}

}  // namespace detail

// f is given row-major on the N x N grid; values outside the disk are ignored.
inline LogNormProbe log_norm_probe(std::span<const double> f, int N, double p, double R) {
  if (f.size() != static_cast<std::size_t>(N) * static_cast<std::size_t>(N))
    throw std::invalid_argument("log_norm_probe: f must have N*N entries");
  if (!(p >= 1)) throw std::invalid_argument("log_norm_probe: p >= 1");
  const auto g = detail::disk_grid(N, R);
  const double area = g.h * g.h;
  std::vector<double> coeffs(g.pts.size());
  LogNormProbe out;
  for (std::size_t c = 0; c < g.pts.size(); ++c) {
    const double v = f[static_cast<std::size_t>(g.index[c])];
    if (v < 0) throw std::invalid_argument("log_norm_probe: f must be nonnegative");
    coeffs[c] = v * area;
    out.rhs += coeffs[c];
  }
  out.lhs = detail::lp_norm_of_column(g, coeffs, p);
  return out;
}

// Largest L^p norm of a single-cell log potential: by Minkowski it bounds
// lhs/rhs for every nonnegative f on the same grid.
inline double log_norm_constant(int N, double p, double R) {
  const auto g = detail::disk_grid(N, R);
  std::vector<double> e(g.pts.size(), 0.0);
  double best = 0.0;
  for (std::size_t c = 0; c < g.pts.size(); ++c) {
    e[c] = 1.0;
    best = std::max(best, detail::lp_norm_of_column(g, e, p));
    e[c] = 0.0;
  }
  return best;
}


}  // namespace polysing
