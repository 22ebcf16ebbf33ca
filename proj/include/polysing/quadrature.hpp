#pragma once

// Gauss-Legendre rules and compensated summation.

#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace polysing {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;
};

inline const GaussRule& gauss_legendre(int npts) {
  if (npts < 1) throw std::invalid_argument("gauss_legendre: need at least one node");
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[npts];
  if (!slot) {
    auto rule = std::make_unique<GaussRule>();
    // legendre_p_zeros returns the nonnegative zeros in increasing order.
    const auto zeros = boost::math::legendre_p_zeros<double>(npts);
    std::vector<std::pair<double, double>> nw;
    for (double x : zeros) {
      const double dp = boost::math::legendre_p_prime<double>(npts, x);
      const double w = 2.0 / ((1.0 - x * x) * dp * dp);
      nw.emplace_back(x, w);
      if (x != 0.0) nw.emplace_back(-x, w);
    }
    std::sort(nw.begin(), nw.end());
    for (auto [x, w] : nw) {
      rule->nodes.push_back(x);
      rule->weights.push_back(w);
    }
    slot = std::move(rule);
  }
  return *slot;
}

// Integrates f over [a, b] split into `panels` equal panels of an npts rule.
template <class F>
double integrate(F&& f, double a, double b, int npts, int panels = 1) {
  const GaussRule& g = gauss_legendre(npts);
  const double width = (b - a) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * width;
    const double half = 0.5 * width, mid = lo + half;
    double s = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) s += g.weights[i] * f(mid + half * g.nodes[i]);
    sum += half * s;
  }
  return sum;
}

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  CompensatedSum& operator+=(double v) {
    add(v);
    return *this;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Surface area of the unit sphere S^{d-1} in R^d.
inline double sphere_area(int d) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

}  // namespace polysing
