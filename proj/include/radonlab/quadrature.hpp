#pragma once

// Paired polar quadrature over dilates of a symmetric convex body (k <= 2).
// Each radial node r*theta is evaluated together with its mirror -r*theta, so
// odd integrands cancel node by node.

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "errors.hpp"
#include "lattice.hpp"
#include "numeric.hpp"

namespace radonlab {

struct QuadResult {
  cplx value;
  double error;
};

/// Geometric panels on [a, b] when a > 0 (one per factor of two), a single panel otherwise.
inline std::vector<double> geometric_breaks(double a, double b) {
  if (!(b > a)) return {a, b};
  if (a <= 0) return {a, b};
  const int n = std::max(1, int(std::ceil(std::log2(b / a))));
  std::vector<double> br(std::size_t(n) + 1);
  for (int i = 0; i <= n; ++i) br[std::size_t(i)] = a * std::pow(b / a, double(i) / n);
  br.front() = a;
  br.back() = b;
  return br;
}

namespace detail {

struct DefaultBreaks {
  std::vector<double> operator()(std::span<const double>, double a, double b) const {
    return geometric_breaks(a, b);
  }
};

template <typename F, typename Breaks>
cplx paired_polar_level(const ConvexBody& body, double s_in, double s_out, F& f, Breaks& breaks, int level,
                        std::uint64_t budget) {
  const int k = body.k();
  auto radial = [&](std::span<const double> theta) -> cplx {
    const double rho = body.boundary_radius(theta);
    const double a = s_in * rho, b = s_out * rho;
    if (!(b > a)) return {};
    auto base = breaks(theta, a, b);
    auto br = refine_breaks(base, level);
    if (double(br.size()) * 20.0 > double(budget)) throw budget_exceeded("paired quadrature: radial panel budget exceeded");
    std::array<double, 2> y{}, ym{};
    auto integrand = [&](double r) -> cplx {
      for (int i = 0; i < k; ++i) {
        y[std::size_t(i)] = r * theta[std::size_t(i)];
        ym[std::size_t(i)] = -y[std::size_t(i)];
      }
      const std::span<const double> ys(y.data(), std::size_t(k)), yms(ym.data(), std::size_t(k));
      const cplx s = f(ys) + f(yms);
      return k == 1 ? s : s * std::pow(r, k - 1);
    };
    return composite_gauss(integrand, br);
  };

  if (k == 1) {
    const std::array<double, 1> e{1.0};
    return radial(e);
  }
  std::vector<double> ang{0.0};
  for (double kink : body.angular_kinks()) ang.push_back(kink);
  ang.push_back(std::numbers::pi);
  auto abr = refine_breaks(ang, level + 2);
  auto angular = [&](double phi) -> cplx {
    const std::array<double, 2> th{std::cos(phi), std::sin(phi)};
    return radial(th);
  };
  return composite_gauss(angular, abr);
}

}  // namespace detail

/// Integral of f over {s_in < gauge(y) < s_out}, computed as the integral over a half
/// sphere of directions of the paired radial integrand (f(r theta) + f(-r theta)) r^{k-1}.
/// The value comes from level+1; the error estimate is its distance to level.
template <typename F, typename Breaks = detail::DefaultBreaks>
QuadResult paired_polar_integral(const ConvexBody& body, double s_in, double s_out, F&& f, int level,
                                 Breaks breaks = {}, std::uint64_t budget = kDefaultBudget) {
  if (body.k() > 2) throw domain_error("paired_polar_integral: only k <= 2 is supported");
  if (!(s_in >= 0 && s_out > s_in)) throw domain_error("paired_polar_integral: need 0 <= s_in < s_out");
  if (level < 0) throw domain_error("paired_polar_integral: negative level");
  const cplx coarse = detail::paired_polar_level(body, s_in, s_out, f, breaks, level, budget);
  const cplx fine = detail::paired_polar_level(body, s_in, s_out, f, breaks, level + 1, budget);
  return {fine, std::abs(fine - coarse)};
}

}  // namespace radonlab
