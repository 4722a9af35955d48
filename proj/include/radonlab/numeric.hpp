#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <thread>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "errors.hpp"

namespace radonlab {

using cplx = std::complex<double>;

/// Default ceiling on enumerated cells (lattice points, quadrature nodes, table entries).
inline constexpr std::uint64_t kDefaultBudget = std::uint64_t{1} << 27;

/// Fractional part of x*z for an exactly representable integer z, accurate to ~1 ulp of 1.
/// The rounding error of the product is recovered with fma so large |z| does not
/// pollute the phase.
inline double frac_product(double x, double z) {
  const double p = x * z;
  const double err = std::fma(x, z, -p);
  double f = (p - std::floor(p)) + err;
  f -= std::floor(f);
  return f;
}

/// e(theta) = exp(2 pi i theta), with theta first reduced to [0, 1).
inline cplx unit_phase(double theta) {
  theta -= std::floor(theta);
  const double a = 2.0 * std::numbers::pi * theta;
  return {std::cos(a), std::sin(a)};
}

/// Neumaier compensated accumulator.
template <typename T>
class CompensatedSum {
 public:
  void add(T v) {
    T t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  T value() const { return sum_ + comp_; }

 private:
  T sum_{};
  T comp_{};
};

template <>
inline void CompensatedSum<cplx>::add(cplx v) {
  auto step = [](double& s, double& c, double x) {
    double t = s + x;
    if (std::abs(s) >= std::abs(x)) {
      c += (s - t) + x;
    } else {
      c += (x - t) + s;
    }
    s = t;
  };
  double sr = sum_.real(), si = sum_.imag(), cr = comp_.real(), ci = comp_.imag();
  step(sr, cr, v.real());
  step(si, ci, v.imag());
  sum_ = {sr, si};
  comp_ = {cr, ci};
}

/// Gauss-Legendre rule on [-1, 1] with 20 nodes, expanded from boost's half-rule.
struct GaussLegendre20 {
  std::vector<double> nodes;
  std::vector<double> weights;

  static const GaussLegendre20& get() {
    static const GaussLegendre20 rule = [] {
      using G = boost::math::quadrature::gauss<double, 20>;
      GaussLegendre20 r;
      const auto& a = G::abscissa();
      const auto& w = G::weights();
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0.0) {
          r.nodes.push_back(0.0);
          r.weights.push_back(w[i]);
        } else {
          r.nodes.push_back(a[i]);
          r.weights.push_back(w[i]);
          r.nodes.push_back(-a[i]);
          r.weights.push_back(w[i]);
        }
      }
      return r;
    }();
    return rule;
  }
};

/// Composite Gauss-Legendre sum of f over consecutive panels [b_i, b_{i+1}].
template <typename F>
auto composite_gauss(F&& f, std::span<const double> breaks) {
  using R = decltype(f(0.0));
  const auto& rule = GaussLegendre20::get();
  R total{};
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = breaks[i], b = breaks[i + 1];
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    R panel{};
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
      panel += rule.weights[j] * f(mid + half * rule.nodes[j]);
    }
    total += half * panel;
  }
  return total;
}

/// Split each panel of `breaks` into 2^level equal pieces.
inline std::vector<double> refine_breaks(std::span<const double> breaks, int level) {
  const std::size_t parts = std::size_t{1} << std::max(level, 0);
  std::vector<double> out;
  out.reserve((breaks.size() - 1) * parts + 1);
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    for (std::size_t j = 0; j < parts; ++j) {
      out.push_back(breaks[i] + (breaks[i + 1] - breaks[i]) * double(j) / double(parts));
    }
  }
  out.push_back(breaks.back());
  return out;
}

/// Thread count used by the parallel helpers; 1 means run inline.
inline unsigned& thread_count() {
  static unsigned n = 1;
  return n;
}

/// Run body(i) for i in [0, n). Each index writes only its own output slot, so the
/// result is independent of the thread count.
template <typename Body>
void parallel_for(std::size_t n, Body&& body) {
  const unsigned threads = std::max(1u, thread_count());
  if (threads == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + threads - 1) / threads;
  for (unsigned w = 0; w < threads; ++w) {
    const std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

/// Least-squares slope and intercept of y against x.
inline std::pair<double, double> fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw domain_error("fit_line: need at least two points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0) throw domain_error("fit_line: degenerate abscissae");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

}  // namespace radonlab
