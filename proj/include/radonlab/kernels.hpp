#pragma once

// Calderon-Zygmund kernels and numerical probes of the size, cancellation and
// Hoelder axioms.

#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "lattice.hpp"
#include "numeric.hpp"
#include "quadrature.hpp"

namespace radonlab {

enum class Parity { odd, none };

class CZKernel {
 public:
  using Evaluator = std::function<cplx(std::span<const double>)>;

  CZKernel(std::string name, int k, Evaluator eval, double sigma, Parity parity, double holder_constant = 1.0)
      : name_(std::move(name)), k_(k), eval_(std::move(eval)), sigma_(sigma), parity_(parity),
        holder_constant_(holder_constant) {
    if (k_ < 1) throw domain_error("CZKernel: dimension must be positive");
    if (!(sigma_ > 0 && sigma_ <= 1)) throw domain_error("CZKernel: Hoelder exponent must lie in (0, 1]");
  }

  cplx operator()(std::span<const double> y) const { return eval_(y); }
  cplx operator()(std::span<const std::int64_t> y) const {
    std::array<double, 8> buf{};
    if (y.size() > buf.size()) {
      RealPoint v(y.begin(), y.end());
      return eval_(v);
    }
    for (std::size_t i = 0; i < y.size(); ++i) buf[i] = double(y[i]);
    return eval_(std::span<const double>(buf.data(), y.size()));
  }
  cplx operator()(const IntPoint& y) const { return (*this)(std::span<const std::int64_t>(y)); }

  const std::string& name() const { return name_; }
  int k() const { return k_; }
  double holder_sigma() const { return sigma_; }
  Parity parity() const { return parity_; }
  bool is_odd() const { return parity_ == Parity::odd; }
  /// Homogeneity degree of every built-in kernel.
  double homogeneity() const { return -double(k_); }
  /// Recorded sup of |K(x)-K(x+y)| |x|^{k+sigma} / |y|^sigma over |y| <= |x|/2.
  double holder_constant() const { return holder_constant_; }

  /// c * K (used to build axiom violators).
  CZKernel scaled(double c) const {
    auto e = eval_;
    return {name_ + "*" + std::to_string(c), k_, [e, c](std::span<const double> y) { return c * e(y); }, sigma_,
            parity_, holder_constant_ * std::abs(c)};
  }

 private:
  std::string name_;
  int k_;
  Evaluator eval_;
  double sigma_;
  Parity parity_;
  double holder_constant_;
};

inline double euclidean_norm(std::span<const double> y) {
  double s = 0;
  for (double v : y) s += v * v;
  return std::sqrt(s);
}

struct AxiomProbe {
  double max_size_ratio = 0;
  double max_holder_ratio = 0;
};

/// Max over random admissible pairs (|y| <= |x|/2, |x| log-uniform in [1e-3, 1e3]) of
/// |K(x)| |x|^k and |K(x) - K(x+y)| |x|^{k+sigma} / |y|^sigma.
inline AxiomProbe verify_size_and_holder(const CZKernel& kernel, std::size_t samples, std::uint64_t seed = 1) {
  if (samples < 1) throw domain_error("verify_size_and_holder: need at least one sample");
  const int k = kernel.k();
  const double sigma = kernel.holder_sigma();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  AxiomProbe out;
  RealPoint x(static_cast<std::size_t>(k)), y(static_cast<std::size_t>(k)), xy(static_cast<std::size_t>(k));
  auto random_direction = [&](RealPoint& v) {
    double n = 0;
    do {
      for (auto& c : v) c = gauss(rng);
      n = euclidean_norm(v);
    } while (n == 0);
    for (auto& c : v) c /= n;
  };
  for (std::size_t s = 0; s < samples; ++s) {
    const double rx = std::pow(10.0, -3.0 + 6.0 * unif(rng));
    random_direction(x);
    for (auto& c : x) c *= rx;
    // |y| skewed towards the admissible boundary |x|/2, where the ratio peaks for
    // homogeneous kernels
    const double ry = 0.5 * rx * std::pow(unif(rng), 1.0 / (8.0 * k));
    if (ry == 0) continue;
    random_direction(y);
    for (auto& c : y) c *= ry;
    for (int i = 0; i < k; ++i) xy[std::size_t(i)] = x[std::size_t(i)] + y[std::size_t(i)];
    const double nx = euclidean_norm(x), ny = euclidean_norm(y);
    const cplx kx = kernel(x);
    out.max_size_ratio = std::max(out.max_size_ratio, std::abs(kx) * std::pow(nx, k));
    const double h = std::abs(kx - kernel(xy)) * std::pow(nx, k + sigma) / std::pow(ny, sigma);
    out.max_holder_ratio = std::max(out.max_holder_ratio, h);
  }
  return out;
}

namespace detail {

/// Deterministic scan of the Hoelder ratio for a homogeneous kernel, using |x| = 1.
inline double scan_holder_constant(const CZKernel& kernel) {
  const int k = kernel.k();
  const double sigma = kernel.holder_sigma();
  double best = 0;
  if (k == 1) {
    for (double sx : {-1.0, 1.0}) {
      for (int i = 1; i <= 4000; ++i) {
        const double yv = -0.5 + double(i) / 4000.0;
        if (yv == 0) continue;
        const std::array<double, 1> x{sx}, xy{sx + yv};
        best = std::max(best, std::abs(kernel(x) - kernel(xy)) / std::pow(std::abs(yv), sigma));
      }
    }
    return best;
  }
  if (k == 2) {
    const int na = 180, nb = 180, nr = 100;
    for (int ia = 0; ia < na; ++ia) {
      const double a = 2 * std::numbers::pi * ia / na;
      const std::array<double, 2> x{std::cos(a), std::sin(a)};
      const cplx kx = kernel(x);
      for (int ib = 0; ib < nb; ++ib) {
        const double b = 2 * std::numbers::pi * ib / nb;
        for (int ir = 1; ir <= nr; ++ir) {
          const double r = 0.5 * ir / nr;
          const std::array<double, 2> xy{x[0] + r * std::cos(b), x[1] + r * std::sin(b)};
          best = std::max(best, std::abs(kx - kernel(xy)) / std::pow(r, sigma));
        }
      }
    }
    return best;
  }
  return verify_size_and_holder(kernel, 200000, 7).max_holder_ratio;
}

}  // namespace detail

/// K(y) = 1/y on R \ {0}.
inline CZKernel make_hilbert_kernel() {
  // sup_{|y|<=|x|/2} |x| / |x+y| = 2
  return {"hilbert", 1, [](std::span<const double> y) { return cplx(1.0 / y[0]); }, 1.0, Parity::odd, 2.0};
}

/// K(y) = y_j / |y|^{k+1}, normalised so that sup |K(y)| |y|^k = 1 (already the case).
inline CZKernel make_riesz_type_kernel(int k, int component) {
  if (k < 1) throw domain_error("make_riesz_type_kernel: dimension must be positive");
  if (component < 1 || component > k) throw domain_error("make_riesz_type_kernel: invalid component index");
  const std::size_t j = std::size_t(component - 1);
  auto eval = [k, j](std::span<const double> y) {
    const double n = euclidean_norm(y);
    return cplx(y[j] / std::pow(n, k + 1));
  };
  const std::string name = "riesz" + std::to_string(k) + "_" + std::to_string(component);
  const double c = detail::scan_holder_constant(CZKernel(name, k, eval, 1.0, Parity::odd));
  return {name, k, eval, 1.0, Parity::odd, c};
}

/// |integral of K over Omega_R \ Omega_r| by paired-node polar quadrature.
inline double verify_cancellation(const CZKernel& kernel, const ConvexBody& omega, double r, double big_r,
                                  int quad_level, std::uint64_t budget = kDefaultBudget) {
  if (!(r > 0 && big_r > r && std::isfinite(big_r))) throw domain_error("verify_cancellation: need 0 < r < R < inf");
  if (kernel.k() != omega.k()) throw domain_error("verify_cancellation: dimension mismatch");
  auto f = [&](std::span<const double> y) { return kernel(y); };
  return std::abs(paired_polar_integral(omega, r, big_r, f, quad_level, detail::DefaultBreaks{}, budget).value);
}

}  // namespace radonlab
