#pragma once

// Frequency-side objects: exponential-sum multipliers m_t, their continuous
// counterparts Psi_t, Gauss sums, Ionescu-Wainger rational sets and shells, and
// projection multipliers built from a smooth bump.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "kernels.hpp"
#include "lattice.hpp"
#include "numeric.hpp"
#include "quadrature.hpp"
#include "radon.hpp"
#include "special_functions.hpp"

namespace radonlab {

/// a/q in Q^Gamma, coordinates taken mod 1 (numerators stored in [0, q)).
struct RationalPoint {
  IntPoint a;
  std::int64_t q = 1;

  RationalPoint() = default;
  RationalPoint(IntPoint num, std::int64_t den) : a(std::move(num)), q(den) {
    if (q < 1) throw domain_error("RationalPoint: denominator must be positive");
    for (auto& v : a) v = ((v % q) + q) % q;
  }
  bool reduced() const {
    std::int64_t g = q;
    for (auto v : a) g = std::gcd(g, v);
    return g == 1;
  }
  RealPoint value() const {
    RealPoint x(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) x[i] = double(a[i]) / double(q);
    return x;
  }
  bool operator==(const RationalPoint&) const = default;
  /// q first, then numerators lexicographically.
  bool operator<(const RationalPoint& o) const { return q != o.q ? q < o.q : a < o.a; }
};

/// Parameters of the major-arc construction.
struct IWConfig {
  double rho = 0.1;  // exponent in the upper bound e^{N^rho} of the denominator set
  int u = 1;         // shells live at S in 2^{u N}
  double tau = 0.4;  // subexponential nodes 2^{n^tau}
  double chi = 0.05; // bump scale 2^{-n^tau (|gamma| - chi)}
  double p0 = 2.0;   // tau must satisfy tau < min(p0 - 1, 1) / 2

  void validate() const {
    if (!(rho > 0)) throw domain_error("IWConfig: rho must be positive");
    if (u < 1) throw domain_error("IWConfig: u must be a positive integer");
    if (!(tau > 0 && tau < 1)) throw domain_error("IWConfig: tau must lie in (0, 1)");
    if (!(tau < 0.5 * std::min(p0 - 1, 1.0))) throw domain_error("IWConfig: tau must be below min(p0 - 1, 1) / 2");
    if (!(chi > 0 && chi < 0.1)) throw domain_error("IWConfig: chi must lie in (0, 1/10)");
  }
};

/// Radial bump: 1 on |x| <= 1/(32 |Gamma|), 0 on |x| >= 1/(16 |Gamma|), quintic
/// smoothstep (C^2) in between.
class BumpEta {
 public:
  explicit BumpEta(std::size_t gamma_size) : dim_(gamma_size) {
    if (dim_ == 0) throw domain_error("BumpEta: |Gamma| must be positive");
  }
  double inner_radius() const { return 1.0 / (32.0 * double(dim_)); }
  double outer_radius() const { return 1.0 / (16.0 * double(dim_)); }
  double profile(double r) const {
    const double a = inner_radius(), b = outer_radius();
    if (r <= a) return 1.0;
    if (r >= b) return 0.0;
    const double s = (r - a) / (b - a);
    return std::clamp(1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s), 0.0, 1.0);
  }
  double operator()(std::span<const double> x) const { return profile(euclidean_norm(x)); }
  std::size_t dim() const { return dim_; }

 private:
  std::size_t dim_;
};

/// m_t(xi) = sum_{y in Omega_t cap Z^k \ 0} e(xi . (y)^Gamma) K(y). Phases are reduced
/// mod 1 before exponentiation; the sum is compensated and runs in lexicographic order.
inline cplx exp_multiplier(const RadonStencil& s, std::span<const double> xi) {
  if (!s.empty() && xi.size() != s.dim) throw domain_error("exp_multiplier: frequency dimension != |Gamma|");
  CompensatedSum<cplx> acc;
  for (std::size_t j = 0; j < s.points.size(); ++j) {
    double theta = 0;
    for (std::size_t c = 0; c < s.dim; ++c) theta += frac_product(xi[c], double(s.images[j][c]));
    acc.add(unit_phase(theta) * s.weights[j]);
  }
  return acc.value();
}

inline cplx exp_multiplier(std::span<const double> xi, const CZKernel& kernel, const ConvexBody& omega,
                           const MultiIndexSet& gamma, double t, std::uint64_t budget = kDefaultBudget) {
  if (!(t > 0)) throw domain_error("exp_multiplier: t must be positive");
  return exp_multiplier(make_stencil(kernel, omega, gamma, t, budget), xi);
}

/// sum of |K(y)| over the stencil; dominates |m_t| by the triangle inequality.
inline double kernel_l1(const RadonStencil& s) {
  double total = 0;
  for (const auto& w : s.weights) total += std::abs(w);
  return total;
}

namespace detail {

/// Radial panels on [a, b] over which the phase 2 pi xi . (r theta)^Gamma moves by at most pi.
struct PhaseBreaks {
  std::span<const double> xi;
  const MultiIndexSet* gamma;

  std::vector<double> operator()(std::span<const double> theta, double a, double b) const {
    std::vector<double> coef, pw;
    for (std::size_t g = 0; g < gamma->size(); ++g) {
      double m = 1;
      for (int i = 0; i < gamma->k(); ++i) m *= std::pow(theta[std::size_t(i)], (*gamma)[g][std::size_t(i)]);
      coef.push_back(2 * std::numbers::pi * std::abs(xi[g] * m));
      pw.push_back(double(degree((*gamma)[g])));
    }
    auto phase = [&](double r) {
      double s = 0;
      for (std::size_t g = 0; g < coef.size(); ++g) s += coef[g] * std::pow(r, pw[g]);
      return s;
    };
    std::vector<double> br{a};
    const double total = phase(b) - phase(a);
    if (total > 4e6) throw budget_exceeded("cont_multiplier: too many oscillations for quadrature");
    double r = a;
    while (phase(b) - phase(r) > std::numbers::pi) {
      const double target = phase(r) + std::numbers::pi;
      double lo = r, hi = b;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (phase(mid) < target ? lo : hi) = mid;
      }
      r = hi;
      br.push_back(r);
    }
    if (br.back() < b) br.push_back(b);
    return br;
  }
};

}  // namespace detail

/// Psi_t(xi) = p.v. integral over Omega_t of e(xi . (y)^Gamma) K(y) dy, by paired polar
/// quadrature with phase-adapted panels; error estimate from one level of refinement.
inline QuadResult cont_multiplier(std::span<const double> xi, const CZKernel& kernel, const ConvexBody& omega,
                                  const MultiIndexSet& gamma, double t, int quad_level = 1,
                                  double tolerance = std::numeric_limits<double>::infinity(),
                                  std::uint64_t budget = kDefaultBudget) {
  if (!(t > 0)) throw domain_error("cont_multiplier: t must be positive");
  if (xi.size() != gamma.size()) throw domain_error("cont_multiplier: frequency dimension != |Gamma|");
  if (kernel.k() != omega.k() || gamma.k() != omega.k()) throw domain_error("cont_multiplier: dimension mismatch");
  const int k = omega.k();
  auto integrand = [&](std::span<const double> y) -> cplx {
    double theta = 0;
    for (std::size_t g = 0; g < gamma.size(); ++g) {
      double m = 1;
      for (int i = 0; i < k; ++i) m *= std::pow(y[std::size_t(i)], gamma[g][std::size_t(i)]);
      theta += xi[g] * m;
    }
    return unit_phase(theta) * kernel(y);
  };
  const QuadResult r =
      paired_polar_integral(omega, 0.0, t, integrand, quad_level, detail::PhaseBreaks{xi, &gamma}, budget);
  if (r.error > tolerance) throw precondition_error("cont_multiplier: requested tolerance unachievable at this level");
  return r;
}

/// Closed form of Psi_t for Gamma = {3}, K = 1/y, Omega = (-1, 1): i (2/3) sgn(xi) Si(2 pi |xi| t^3).
inline cplx cubic_example_psi(double xi, double t) {
  if (!(t > 0)) throw domain_error("cubic_example_psi: t must be positive");
  return {0.0, (2.0 / 3.0) * sine_integral(2 * std::numbers::pi * xi * t * t * t)};
}

namespace detail {

inline std::int64_t mulmod(std::int64_t a, std::int64_t b, std::int64_t m) {
  return std::int64_t((__int128(a) * __int128(b)) % __int128(m));
}

inline std::int64_t powmod(std::int64_t base, int e, std::int64_t m) {
  std::int64_t r = 1 % m;
  base = ((base % m) + m) % m;
  for (int i = 0; i < e; ++i) r = mulmod(r, base, m);
  return r;
}

}  // namespace detail

/// G(a/q) = q^{-k} sum_{r in {1..q}^k} e((a/q) . (r)^Gamma). Phases are reduced mod q in
/// integer arithmetic and the sum is taken over a residue histogram.
inline cplx gauss_sum(const RationalPoint& aq, const MultiIndexSet& gamma, std::uint64_t budget = kDefaultBudget) {
  if (aq.a.size() != gamma.size()) throw domain_error("gauss_sum: numerator dimension != |Gamma|");
  if (!aq.reduced()) throw domain_error("gauss_sum: fraction is not reduced");
  const int k = gamma.k();
  const std::int64_t q = aq.q;
  if (std::pow(double(q), k) > double(budget)) throw budget_exceeded("gauss_sum: q^k exceeds budget");
  std::vector<std::uint64_t> hist(std::size_t(q), 0);
  std::vector<std::int64_t> r(std::size_t(k), 1);
  while (true) {
    std::int64_t phase = 0;
    for (std::size_t g = 0; g < gamma.size(); ++g) {
      std::int64_t mono = 1 % q;
      for (int i = 0; i < k; ++i) mono = detail::mulmod(mono, detail::powmod(r[std::size_t(i)], gamma[g][std::size_t(i)], q), q);
      phase = (phase + detail::mulmod(aq.a[g], mono, q)) % q;
    }
    ++hist[std::size_t(phase)];
    int i = k - 1;
    while (i >= 0 && r[std::size_t(i)] == q) {
      r[std::size_t(i)] = 1;
      --i;
    }
    if (i < 0) break;
    ++r[std::size_t(i)];
  }
  CompensatedSum<cplx> acc;
  for (std::int64_t j = 0; j < q; ++j)
    if (hist[std::size_t(j)]) acc.add(double(hist[std::size_t(j)]) * unit_phase(double(j) / double(q)));
  return acc.value() / std::pow(double(q), k);
}

namespace detail {

inline bool is_prime(std::int64_t n) {
  if (n < 2) return false;
  for (std::int64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

/// Calls fn(a) for every a in [0, q)^dim with gcd(a_1, ..., a_dim, q) = 1.
template <typename Fn>
void for_each_reduced_numerator(std::int64_t q, std::size_t dim, Fn&& fn) {
  IntPoint a(dim, 0);
  while (true) {
    std::int64_t g = q;
    for (auto v : a) g = std::gcd(g, v);
    if (g == 1) fn(a);
    std::size_t i = dim;
    while (i-- > 0 && a[i] == q - 1) a[i] = 0;
    if (i == std::size_t(-1)) break;
    ++a[i];
  }
}

}  // namespace detail

struct GaussTableRow {
  std::int64_t q;
  double max_abs;  // max over reduced a of |G(a/q)|
};

struct GaussDecayFit {
  double delta = 0;  // fitted exponent in max|G| ~ q^{-delta}
  std::vector<GaussTableRow> table;
};

/// Tabulate max_a |G(a/q)| for q <= q_max (primes only when asked) and fit
/// log max|G| against log q by least squares. Exact zeros stay in the table but
/// are excluded from the fit, as is q = 1.
inline GaussDecayFit gauss_decay_fit(const MultiIndexSet& gamma, std::int64_t q_max, bool primes_only = false,
                                     std::uint64_t budget = kDefaultBudget) {
  if (q_max < 10) throw domain_error("gauss_decay_fit: q_max must be at least 10");
  GaussDecayFit out;
  std::vector<double> lx, ly;
  for (std::int64_t q = 1; q <= q_max; ++q) {
    if (primes_only && !detail::is_prime(q)) continue;
    double mx = 0;
    detail::for_each_reduced_numerator(q, gamma.size(), [&](const IntPoint& a) {
      mx = std::max(mx, std::abs(gauss_sum(RationalPoint(a, q), gamma, budget)));
    });
    // Sums of unit roots that cancel exactly can leave rounding residue; snap it.
    if (mx < 1e-12) mx = 0;
    out.table.push_back({q, mx});
    if (q >= 2 && mx > 0) {
      lx.push_back(std::log(double(q)));
      ly.push_back(std::log(mx));
    }
  }
  if (lx.size() >= 2) out.delta = -fit_line(lx, ly).first;
  return out;
}

/// P_{<=N} = {1, ..., N}: contains N_N, lies in N_{max(N, e^{N^rho})}, is monotone in N
/// and divisor-closed.
inline std::vector<std::int64_t> iw_denominators(std::int64_t n, const IWConfig& config) {
  config.validate();
  if (n < 1) throw domain_error("iw_denominators: N must be at least 1");
  std::vector<std::int64_t> out(static_cast<std::size_t>(n));
  std::iota(out.begin(), out.end(), 1);
  return out;
}

/// Sigma_{<=N}: reduced a/q in the torus with q in P_{<=N}, ordered by q then a.
inline std::vector<RationalPoint> iw_fractions(std::int64_t n, const MultiIndexSet& gamma, const IWConfig& config,
                                               std::uint64_t budget = kDefaultBudget) {
  const auto dens = iw_denominators(n, config);
  double work = 0;
  for (auto q : dens) work += std::pow(double(q), double(gamma.size()));
  if (work > double(budget)) throw budget_exceeded("iw_fractions: enumeration exceeds budget");
  std::set<RationalPoint> seen;
  std::vector<RationalPoint> out;
  for (auto q : dens) {
    detail::for_each_reduced_numerator(q, gamma.size(), [&](const IntPoint& a) {
      RationalPoint r(a, q);
      if (seen.insert(r).second) out.push_back(std::move(r));
    });
  }
  return out;
}

/// True when s = 2^{u j} for some j >= 1.
inline bool is_shell_scale(std::int64_t s, int u) {
  if (s < 2) return false;
  int e = 0;
  while (s % 2 == 0) {
    s /= 2;
    ++e;
  }
  return s == 1 && e % u == 0;
}

/// Sigma_S = Sigma_{<=S} for S = 2^u and Sigma_{<=S} \ Sigma_{<=S/2^u} for larger S.
inline std::vector<RationalPoint> shell_fractions(std::int64_t s, const MultiIndexSet& gamma, const IWConfig& config,
                                                  std::uint64_t budget = kDefaultBudget) {
  config.validate();
  if (!is_shell_scale(s, config.u)) throw domain_error("shell_fractions: S must be of the form 2^{u n}, n >= 1");
  auto all = iw_fractions(s, gamma, config, budget);
  const std::int64_t base = std::int64_t{1} << config.u;
  if (s == base) return all;
  const auto prev = iw_fractions(s >> config.u, gamma, config, budget);
  const std::set<RationalPoint> drop(prev.begin(), prev.end());
  std::vector<RationalPoint> out;
  for (auto& r : all)
    if (!drop.count(r)) out.push_back(std::move(r));
  return out;
}

/// Largest S in 2^{u N_0} with S <= n^{tau u}.
inline std::int64_t projection_scale(std::int64_t n, const IWConfig& config) {
  const double cap = std::pow(double(n), config.tau * config.u);
  std::int64_t s = 1;
  while (double(s << config.u) <= cap) s <<= config.u;
  return s;
}

/// Pi_{<=n^tau}(xi) = sum over a/q in Sigma_{<=n^{tau u}} of eta(2^{n^tau (A - chi I)} (xi - a/q)).
/// Construction verifies that the dilated bump supports are pairwise disjoint.
class ProjectionMultiplier {
 public:
  ProjectionMultiplier(std::int64_t n, const MultiIndexSet& gamma, const IWConfig& config, BumpEta eta,
                       std::uint64_t budget = kDefaultBudget)
      : eta_(eta) {
    config.validate();
    if (n < 1) throw domain_error("ProjectionMultiplier: n must be at least 1");
    if (eta.dim() != gamma.size()) throw domain_error("ProjectionMultiplier: bump dimension != |Gamma|");
    const double nt = std::pow(double(n), config.tau);
    for (const auto& g : gamma.exponents()) scale_.push_back(std::pow(2.0, nt * (double(degree(g)) - config.chi)));
    centers_ = iw_fractions(projection_scale(n, config), gamma, config, budget);
    // pairwise separation in dilated torus coordinates
    const double need = 2 * eta_.outer_radius();
    if (double(centers_.size()) * double(centers_.size()) > double(budget))
      throw budget_exceeded("ProjectionMultiplier: separation check exceeds budget");
    min_separation_ = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < centers_.size(); ++i)
      for (std::size_t j = i + 1; j < centers_.size(); ++j)
        min_separation_ = std::min(min_separation_, dilated_distance(centers_[i].value(), centers_[j]));
    if (min_separation_ < need)
      throw precondition_error("ProjectionMultiplier: bump supports overlap; n is too small for this set");
  }

  double operator()(std::span<const double> xi) const {
    double total = 0;
    for (const auto& c : centers_) {
      const double d = dilated_distance(xi, c);
      if (d < eta_.outer_radius()) total += eta_.profile(d);
    }
    return total;
  }

  const std::vector<RationalPoint>& centers() const { return centers_; }
  double min_separation() const { return min_separation_; }

 private:
  double dilated_distance(std::span<const double> xi, const RationalPoint& c) const {
    double s = 0;
    for (std::size_t g = 0; g < scale_.size(); ++g) {
      double d = xi[g] - double(c.a[g]) / double(c.q);
      d -= std::floor(d + 0.5);  // fundamental domain [-1/2, 1/2)
      d *= scale_[g];
      s += d * d;
    }
    return std::sqrt(s);
  }

  BumpEta eta_;
  std::vector<double> scale_;
  std::vector<RationalPoint> centers_;
  double min_separation_ = 0;
};

inline double projection_multiplier(std::span<const double> xi, std::int64_t n, const MultiIndexSet& gamma,
                                    const IWConfig& config, const BumpEta& eta) {
  return ProjectionMultiplier(n, gamma, config, eta)(xi);
}

struct VdcReport {
  double small_constant = 0;   // max |Psi_t - Psi_ct| / |t^A xi|_inf
  double large_constant = 0;   // max |Psi_t - Psi_ct| |t^A xi|_inf^{sigma/|Gamma|}
  double small_slope = 0;      // log-log slope of |Psi_t - Psi_ct| where |t^A xi| << 1
  double large_exponent = 0;   // log-log slope of windowed maxima where |t^A xi| >> 1
  std::vector<std::pair<double, double>> samples;  // (|t^A xi|_inf, |Psi_t - Psi_ct|)
};

/// Probe both van der Corput type bounds on |Psi_t - Psi_{ct}| over log-spaced
/// |t^A xi|_inf in [s_lo, s_hi]. The frequency runs along the all-ones direction
/// with t cycling through [1/2, 2]. `psi` defaults to cont_multiplier.
inline VdcReport vdc_bounds_check(const CZKernel& kernel, const ConvexBody& omega, const MultiIndexSet& gamma, double c,
                                  std::size_t samples, double s_lo = 1e-3, double s_hi = 1e3,
                                  std::function<cplx(std::span<const double>, double)> psi = {}) {
  if (!(c > 0 && c < 1)) throw domain_error("vdc_bounds_check: c must lie in (0, 1)");
  if (samples < 8) throw domain_error("vdc_bounds_check: need at least 8 samples");
  if (!psi)
    psi = [&](std::span<const double> xi, double t) { return cont_multiplier(xi, kernel, omega, gamma, t, 1).value; };
  const DilationMatrix a(gamma);
  const double sg = kernel.holder_sigma() / double(gamma.size());
  VdcReport rep;
  std::vector<double> sx, sy;
  for (std::size_t i = 0; i < samples; ++i) {
    const double s = s_lo * std::pow(s_hi / s_lo, double(i) / double(samples - 1));
    const double t = std::pow(2.0, -1.0 + 2.0 * double(i % 5) / 4.0);
    // xi with |t^A xi|_inf = s along the all-ones direction
    RealPoint xi(gamma.size());
    double mx = 0;
    for (std::size_t g = 0; g < gamma.size(); ++g) mx = std::max(mx, std::pow(t, a.weights()[g]));
    for (std::size_t g = 0; g < gamma.size(); ++g) xi[g] = s / mx;
    const double diff = std::abs(psi(xi, t) - psi(xi, c * t));
    rep.samples.emplace_back(s, diff);
    rep.small_constant = std::max(rep.small_constant, diff / s);
    rep.large_constant = std::max(rep.large_constant, diff * std::pow(s, sg));
  }
  std::vector<double> lx, ly;
  for (auto [s, d] : rep.samples)
    if (s <= 1e-1 && d > 0) {
      lx.push_back(std::log(s));
      ly.push_back(std::log(d));
    }
  if (lx.size() >= 2) rep.small_slope = fit_line(lx, ly).first;
  // envelope: maxima over half-decade windows above s = 10
  lx.clear();
  ly.clear();
  const double start = std::max(10.0, s_lo);
  for (double w = start; w * std::sqrt(10.0) <= s_hi * (1 + 1e-12); w *= std::sqrt(10.0)) {
    double mx = 0;
    for (auto [s, d] : rep.samples)
      if (s >= w && s < w * std::sqrt(10.0)) mx = std::max(mx, d);
    if (mx > 0) {
      lx.push_back(std::log(w * std::pow(10.0, 0.25)));
      ly.push_back(std::log(mx));
    }
  }
  if (lx.size() >= 2) rep.large_exponent = fit_line(lx, ly).first;
  return rep;
}

}  // namespace radonlab
