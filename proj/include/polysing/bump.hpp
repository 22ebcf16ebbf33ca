#pragma once

// Mollifier profile, bump lists and the right-hand side f = sum_j M_j phi((y - x_j)/r_j).

#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "polysing/quadrature.hpp"

namespace polysing {

// Radial integrals over the unit ball are taken on [0, 1] with this many
// Gauss-Legendre panels; phi is flat at rho = 1 so convergence is fast.
inline constexpr int kRadialPanels = 16;
inline constexpr int kRadialNodes = 24;

class BumpProfile {
 public:
  explicit BumpProfile(int n) : n_(n) {
    if (n < 2) throw std::invalid_argument("standard_profile: n >= 2");
    mass_ = radial_moment(0);
    const double coarse =
        sphere_area(n_) * integrate([&](double r) { return radial(r) * std::pow(r, n_ - 1); }, 0.0, 1.0,
                                    kRadialNodes, kRadialPanels / 2);
    mass_error_ = std::abs(mass_ - coarse);
  }

  static double log_radial(double rho) {
    const double q = 1.0 - rho * rho;
    return q > 0 ? 1.0 - 1.0 / q : -std::numeric_limits<double>::infinity();
  }
  static double radial(double rho) {
    const double q = 1.0 - rho * rho;
    return q > 0 ? std::exp(1.0 - 1.0 / q) : 0.0;
  }

  double operator()(std::span<const double> eta) const {
    double s = 0;
    for (double v : eta) s += v * v;
    return radial(std::sqrt(s));
  }

  int dim() const noexcept { return n_; }
  double mass() const noexcept { return mass_; }
  double mass_error() const noexcept { return mass_error_; }

  // I_k = omega_{n-1} int_0^1 phi(rho) rho^{n-1+2k} d rho
  double radial_moment(int k) const {
    if (k < 0) throw std::invalid_argument("radial_moment: k >= 0");
    if (static_cast<std::size_t>(k) < moments_.size()) return moments_[static_cast<std::size_t>(k)];
    return sphere_area(n_) *
           integrate([&](double r) { return radial(r) * std::pow(r, n_ - 1 + 2 * k); }, 0.0, 1.0, kRadialNodes,
                     kRadialPanels);
  }

  // omega_{n-1} int_0^1 phi(rho) w(rho) d rho, where w already carries rho^{n-1}.
  template <class W>
  double radial_integral(W&& w) const {
    return sphere_area(n_) * integrate([&](double r) { return radial(r) * w(r); }, 0.0, 1.0, kRadialNodes,
                                       kRadialPanels);
  }

  void precompute_moments(int kmax) {
    moments_.clear();
    for (int k = 0; k <= kmax; ++k) moments_.push_back(radial_moment(k));
  }

 private:
  int n_;
  double mass_ = 0.0;
  double mass_error_ = 0.0;
  std::vector<double> moments_;
};

inline BumpProfile standard_profile(int n) { return BumpProfile(n); }

struct ConvolutionNodes {
  int radial = 48;
  int angular = 96;
  int panels = 2;
};

// int k(|xi - eta|) phi(eta) d eta with |xi| = d, in polar coordinates about xi.
// `weight(rho)` must return rho^{n-1} k(rho) so weakly singular kernels become smooth.
template <class W>
double bump_convolution(const BumpProfile& prof, W&& weight, double d, const ConvolutionNodes& q) {
  const int n = prof.dim();
  if (d < 0) throw std::invalid_argument("bump_convolution: d >= 0");
  if (d == 0.0) {
    return sphere_area(n) *
           integrate([&](double r) { return BumpProfile::radial(r) * weight(r); }, 0.0, 1.0, q.radial, 2 * q.panels);
  }
  const GaussRule& gt = gauss_legendre(q.angular);
  const double wsphere = sphere_area(n - 1);
  // theta-integral of phi over the part of the sphere of radius rho about xi inside the unit ball
  auto shell = [&](double rho) {
    const double c = (1.0 - d * d - rho * rho) / (2.0 * d * rho);
    if (c <= -1.0) return 0.0;
    const double th0 = c >= 1.0 ? 0.0 : std::acos(c);
    const double half = 0.5 * (std::numbers::pi - th0), mid = th0 + half;
    double s = 0.0;
    for (std::size_t i = 0; i < gt.nodes.size(); ++i) {
      const double th = mid + half * gt.nodes[i];
      const double e2 = d * d + rho * rho + 2.0 * d * rho * std::cos(th);
      s += gt.weights[i] * BumpProfile::radial(std::sqrt(std::max(e2, 0.0))) * std::pow(std::sin(th), n - 2);
    }
    return half * s;
  };
  double total = 0.0;
  auto radial_part = [&](double a, double b) {
    if (b <= a) return 0.0;
    return integrate([&](double rho) { return weight(rho) * shell(rho); }, a, b, q.radial, q.panels);
  };
  if (d < 1.0) {
    total += radial_part(0.0, 1.0 - d);
    total += radial_part(1.0 - d, 1.0 + d);
  } else {
    total += radial_part(d - 1.0, d + 1.0);
  }
  return wsphere * total;
}

// One bump of the right-hand side; radius and mass are kept as logarithms because
// several constructions drive r_j far below the double range.
struct BumpSpec {
  std::vector<double> center;
  double log_radius = 0.0;
  double epsilon = 0.0;
  double log_mass = 0.0;  // claimed M_j

  double radius() const { return std::exp(log_radius); }
  double mass() const { return std::exp(log_mass); }
  std::size_t dim() const { return center.size(); }
  double center_norm() const {
    double s = 0;
    for (double v : center) s += v * v;
    return std::sqrt(s);
  }
  // log of eps_j / (|x_j|^{2m-2} r_j^n)
  double derived_log_mass(int m) const {
    return std::log(epsilon) - (2 * m - 2) * std::log(center_norm()) - static_cast<double>(dim()) * log_radius;
  }
  // M_j r_j^n = eps_j / |x_j|^{2m-2}
  double weight(int m) const { return epsilon * std::pow(center_norm(), -(2 * m - 2)); }
};

inline BumpSpec make_bump(std::vector<double> center, double log_radius, double epsilon, int m) {
  BumpSpec b{std::move(center), log_radius, epsilon, 0.0};
  if (!(epsilon > 0)) throw std::invalid_argument("make_bump: epsilon must be positive");
  b.log_mass = b.derived_log_mass(m);
  return b;
}

// Violated structural conditions, each named by the condition it tests.
inline std::vector<std::string> bump_violations(const std::vector<BumpSpec>& bumps, int m, double mass_rel_tol = 1e-12) {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < bumps.size(); ++j) {
    const auto& b = bumps[j];
    const std::string tag = "bump " + std::to_string(j + 1) + ": ";
    const double xn = b.center_norm();
    if (!(b.epsilon > 0)) out.push_back(tag + "epsilon must be positive");
    if (!(std::isfinite(b.log_radius))) out.push_back(tag + "radius must be positive");
    if (!(b.log_radius <= std::log(xn / 5.0) + 1e-13)) out.push_back(tag + "radius bound r_j <= |x_j|/5 violated");
    if (!(xn <= 0.5 + 1e-15)) out.push_back(tag + "center bound |x_j| <= 1/2 violated");
    if (j + 1 < bumps.size() && !(4.0 * bumps[j + 1].center_norm() <= xn * (1 + 1e-15)))
      out.push_back(tag + "center spacing 4|x_{j+1}| <= |x_j| violated");
    if (b.epsilon > 0 && std::abs(b.log_mass - b.derived_log_mass(m)) > mass_rel_tol * std::max(1.0, std::abs(b.log_mass)))
      out.push_back(tag + "mass scaling M_j = eps_j/(|x_j|^{2m-2} r_j^n) violated");
    for (std::size_t k = j + 1; k < bumps.size(); ++k) {
      double d2 = 0;
      for (std::size_t i = 0; i < b.dim(); ++i) d2 += (b.center[i] - bumps[k].center[i]) * (b.center[i] - bumps[k].center[i]);
      if (!(std::sqrt(d2) > b.radius() + bumps[k].radius()))
        out.push_back(tag + "supports of bumps " + std::to_string(j + 1) + " and " + std::to_string(k + 1) + " overlap");
    }
  }
  return out;
}

inline void validate_bumps(const std::vector<BumpSpec>& bumps, int m) {
  auto v = bump_violations(bumps, m);
  if (!v.empty()) throw std::invalid_argument("invalid bump list: " + v.front());
}

// Index of the bump whose closed support contains y, or -1. Also returns the
// local coordinate (y - x_j)/r_j.
inline int locate_bump(const std::vector<BumpSpec>& bumps, std::span<const double> y, std::vector<double>* local = nullptr) {
  for (std::size_t j = 0; j < bumps.size(); ++j) {
    const auto& b = bumps[j];
    const double r = b.radius();
    double d2 = 0;
    for (std::size_t i = 0; i < y.size(); ++i) d2 += (y[i] - b.center[i]) * (y[i] - b.center[i]);
    if (d2 <= r * r) {
      if (local) {
        local->resize(y.size());
        // r can underflow to 0 (log_radius far below -745); then only the center matches
        for (std::size_t i = 0; i < y.size(); ++i) (*local)[i] = r > 0 ? (y[i] - b.center[i]) / r : 0.0;
      }
      return static_cast<int>(j);
    }
  }
  return -1;
}

inline double f_eval(const std::vector<BumpSpec>& bumps, const BumpProfile& prof, std::span<const double> y) {
  std::vector<double> xi;
  const int j = locate_bump(bumps, y, &xi);
  if (j < 0) return 0.0;
  return bumps[static_cast<std::size_t>(j)].mass() * prof(xi);
}

// log f(y), -inf outside the supports.
inline double log_f_eval(const std::vector<BumpSpec>& bumps, std::span<const double> y) {
  std::vector<double> xi;
  const int j = locate_bump(bumps, y, &xi);
  if (j < 0) return -std::numeric_limits<double>::infinity();
  double s = 0;
  for (double v : xi) s += v * v;
  return bumps[static_cast<std::size_t>(j)].log_mass + BumpProfile::log_radial(std::sqrt(s));
}

// Pizzetti coefficient 1 / (2^k k! n (n+2) ... (n+2k-2)).
inline double pizzetti_coefficient(int k, int n) {
  double c = 1.0;
  for (int i = 0; i < k; ++i) c /= 2.0 * (i + 1) * (n + 2 * i);
  return c;
}

struct MomentCheck {
  double value = 0.0;
  double bound = 0.0;
  bool holds = true;
};

// sum_j M_j int |y|^{2m-2} phi_j. |y|^{2m-2} is m-polyharmonic, so the mean-value
// expansion over each ball is exact.
inline MomentCheck moment_check(const std::vector<BumpSpec>& bumps, const BumpProfile& prof, int m) {
  const int n = prof.dim();
  MomentCheck out;
  double eps_sum = 0.0;
  for (const auto& b : bumps) {
    const double q = std::exp(2.0 * (b.log_radius - std::log(b.center_norm())));  // (r/|x|)^2
    double s = 0.0, coeff = 1.0, qk = 1.0;
    for (int k = 0; k <= m - 1; ++k) {
      s += pizzetti_coefficient(k, n) * prof.radial_moment(k) * qk * coeff;
      const int p = 2 * m - 2 - 2 * k;
      coeff *= static_cast<double>(p) * (p + n - 2);
      qk *= q;
    }
    // M_j r^n |x|^{2m-2} = eps_j when M_j is consistent with the mass scaling
    out.value += std::exp(b.log_mass + n * b.log_radius + (2 * m - 2) * std::log(b.center_norm())) * s;
    eps_sum += b.epsilon;
  }
  out.bound = std::pow(2.0, 2 * m - 2) * prof.mass() * eps_sum;
  out.holds = out.value <= out.bound;
  if (!out.holds) throw std::logic_error("moment_check: moment bound violated, mis-scaled bump");
  return out;
}

}  // namespace polysing
