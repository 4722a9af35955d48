#pragma once

// Truncated singular Radon transforms
//   H_t f(x) = sum_{y in Omega_t cap Z^k, y != 0} f(x - P(y)) K(y)
// on Z^Gamma (direct and FFT paths, whole truncation families) and the
// principal-value continuous analogue on R^Gamma.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "errors.hpp"
#include "fft.hpp"
#include "kernels.hpp"
#include "lattice.hpp"
#include "numeric.hpp"
#include "quadrature.hpp"

namespace radonlab {

/// Polynomial mapping P = (P_1, ..., P_d): Z^k -> Z^d with integer coefficients.
class PolynomialMap {
 public:
  using Term = std::pair<MultiIndex, std::int64_t>;

  PolynomialMap(int k, std::vector<std::vector<Term>> components) : k_(k), comps_(std::move(components)) {
    if (k_ < 1) throw domain_error("PolynomialMap: dimension must be positive");
    if (comps_.empty()) throw domain_error("PolynomialMap: no components");
    for (const auto& c : comps_)
      for (const auto& [g, a] : c)
        if (int(g.size()) != k_) throw domain_error("PolynomialMap: monomial has wrong length");
  }

  /// The canonical map of Gamma viewed as a polynomial mapping.
  static PolynomialMap canonical(const MultiIndexSet& gamma) {
    std::vector<std::vector<Term>> comps;
    for (const auto& g : gamma.exponents()) comps.push_back({{g, 1}});
    return {gamma.k(), std::move(comps)};
  }

  int k() const { return k_; }
  std::size_t dim() const { return comps_.size(); }
  const std::vector<std::vector<Term>>& components() const { return comps_; }

  IntPoint operator()(std::span<const std::int64_t> y) const {
    IntPoint out(dim(), 0);
    for (std::size_t j = 0; j < dim(); ++j) {
      std::int64_t acc = 0;
      for (const auto& [g, a] : comps_[j]) {
        if (a == 0) continue;
        std::int64_t m = a;
        for (int i = 0; i < k_; ++i) m = detail::checked_mul(m, detail::checked_pow(y[std::size_t(i)], g[std::size_t(i)]));
        acc = detail::checked_add(acc, m);
      }
      out[j] = acc;
    }
    return out;
  }

 private:
  int k_;
  std::vector<std::vector<Term>> comps_;
};

struct CanonicalDecomposition {
  MultiIndexSet gamma;
  /// dim(P) x |Gamma| integer matrix with P(y) = C (y)^Gamma.
  std::vector<std::vector<std::int64_t>> coefficients;
};

/// Lift P to its canonical map: Gamma collects every monomial that carries a nonzero
/// coefficient in some component.
inline CanonicalDecomposition canonical_decomposition(const PolynomialMap& p) {
  std::map<MultiIndex, std::size_t> index;
  std::vector<std::map<MultiIndex, std::int64_t>> coeff(p.dim());
  for (std::size_t j = 0; j < p.dim(); ++j) {
    for (const auto& [g, a] : p.components()[j]) {
      if (a == 0) continue;
      if (degree(g) == 0) throw domain_error("canonical_decomposition: constant term present (P(0) != 0)");
      coeff[j][g] = detail::checked_add(coeff[j][g], a);
    }
  }
  for (auto& c : coeff)
    for (auto it = c.begin(); it != c.end();) it = it->second == 0 ? c.erase(it) : std::next(it);
  for (const auto& c : coeff)
    for (const auto& [g, a] : c) index.emplace(g, 0);
  if (index.empty()) throw domain_error("canonical_decomposition: zero mapping has no monomials");
  std::vector<MultiIndex> exps;
  for (auto& [g, i] : index) {
    i = exps.size();
    exps.push_back(g);
  }
  std::vector<std::vector<std::int64_t>> mat(p.dim(), std::vector<std::int64_t>(exps.size(), 0));
  for (std::size_t j = 0; j < p.dim(); ++j)
    for (const auto& [g, a] : coeff[j]) mat[j][index.at(g)] = a;
  return {MultiIndexSet(p.k(), std::move(exps)), std::move(mat)};
}

/// Lattice points of Omega_t with their images and kernel weights, in lexicographic order of y.
struct RadonStencil {
  std::vector<IntPoint> points;
  std::vector<IntPoint> images;
  std::vector<cplx> weights;
  std::size_t dim = 0;

  bool empty() const { return points.empty(); }
  /// Per-coordinate [min, max] of the images.
  std::pair<IntPoint, IntPoint> image_range() const {
    IntPoint lo(dim, 0), hi(dim, 0);
    for (std::size_t i = 0; i < images.size(); ++i)
      for (std::size_t c = 0; c < dim; ++c) {
        lo[c] = i == 0 ? images[i][c] : std::min(lo[c], images[i][c]);
        hi[c] = i == 0 ? images[i][c] : std::max(hi[c], images[i][c]);
      }
    return {lo, hi};
  }
};

inline RadonStencil make_stencil(const CZKernel& kernel, const ConvexBody& omega, const PolynomialMap& p, double t,
                                 std::uint64_t budget = kDefaultBudget) {
  if (kernel.k() != omega.k() || p.k() != omega.k()) throw domain_error("Radon operator: dimension mismatch");
  RadonStencil s;
  s.dim = p.dim();
  s.points = lattice_points_in_dilate(omega, t, budget);
  for (const auto& y : s.points) {
    s.images.push_back(p(y));
    s.weights.push_back(kernel(y));
  }
  return s;
}

inline RadonStencil make_stencil(const CZKernel& kernel, const ConvexBody& omega, const MultiIndexSet& gamma,
                                 double t, std::uint64_t budget = kDefaultBudget) {
  return make_stencil(kernel, omega, PolynomialMap::canonical(gamma), t, budget);
}

/// Output box of f convolved with the stencil: input box shifted by the image range.
inline Box output_box(const Box& in, const RadonStencil& s) {
  if (s.empty()) return in;
  auto [lo, hi] = s.image_range();
  IntPoint olo = in.lo(), ohi = in.hi();
  for (std::size_t c = 0; c < in.dim(); ++c) {
    olo[c] += lo[c];
    ohi[c] += hi[c];
  }
  return {olo, ohi};
}

/// sum_y f(x - image(y)) w(y), outer loop over y in stencil order. Compensated
/// accumulation is switched on once the number of terms passes 2^24.
inline LatticeFunction apply_stencil(const LatticeFunction& f, const RadonStencil& s) {
  if (!s.empty() && f.dim() != s.dim) throw domain_error("Radon operator: function dimension != |Gamma|");
  const Box out_box = output_box(f.box(), s);
  LatticeFunction out(out_box);
  const bool compensated = double(f.size()) * double(s.points.size()) > double(1 << 24);
  std::vector<cplx> comp(compensated ? out.size() : 0);
  const std::size_t d = f.dim();
  // Flat offset of x + z relative to x for the same relative position in the input.
  std::vector<std::size_t> out_stride(d, 1);
  for (std::size_t c = d - 1; c-- > 0;) out_stride[c] = out_stride[c + 1] * std::size_t(out_box.extent(c + 1));
  std::vector<std::size_t> base(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const IntPoint x = f.box().point(i);
    std::size_t idx = 0;
    for (std::size_t c = 0; c < d; ++c) idx += std::size_t(x[c] - out_box.lo()[c]) * out_stride[c];
    base[i] = idx;
  }
  for (std::size_t j = 0; j < s.points.size(); ++j) {
    std::int64_t shift = 0;
    for (std::size_t c = 0; c < d; ++c) shift += s.images[j][c] * std::int64_t(out_stride[c]);
    const cplx w = s.weights[j];
    for (std::size_t i = 0; i < f.size(); ++i) {
      const cplx v = f[i];
      if (v == cplx{}) continue;
      const std::size_t o = std::size_t(std::int64_t(base[i]) + shift);
      if (!compensated) {
        out[o] += v * w;
      } else {
        const cplx term = v * w;
        const cplx sum = out[o] + term;
        auto fix = [](double a, double b, double t) { return std::abs(a) >= std::abs(b) ? (a - t) + b : (b - t) + a; };
        comp[o] += cplx(fix(out[o].real(), term.real(), sum.real()), fix(out[o].imag(), term.imag(), sum.imag()));
        out[o] = sum;
      }
    }
  }
  if (compensated)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += comp[i];
  return out;
}

/// H_t f by direct summation over the lattice points of Omega_t.
inline LatticeFunction discrete_radon_direct(const LatticeFunction& f, const CZKernel& kernel,
                                             const ConvexBody& omega, const MultiIndexSet& gamma, double t,
                                             std::uint64_t budget = kDefaultBudget) {
  if (f.dim() != gamma.size()) throw domain_error("discrete_radon_direct: function dimension != |Gamma|");
  return apply_stencil(f, make_stencil(kernel, omega, gamma, t, budget));
}

/// H_t^P f for an integer polynomial mapping with P(0) = 0.
inline LatticeFunction radon_general_poly(const LatticeFunction& f, const CZKernel& kernel, const ConvexBody& omega,
                                          const PolynomialMap& p, double t, std::uint64_t budget = kDefaultBudget) {
  for (const auto& c : p.components())
    for (const auto& [g, a] : c)
      if (a != 0 && degree(g) == 0) throw domain_error("radon_general_poly: P(0) must vanish");
  if (f.dim() != p.dim()) throw domain_error("radon_general_poly: function dimension != dim P");
  return apply_stencil(f, make_stencil(kernel, omega, p, t, budget));
}

/// g(z) = sum_{y : P(y) = z} K(y) on the image box.
inline LatticeFunction pushforward_kernel(const RadonStencil& s) {
  if (s.empty()) return LatticeFunction(Box(IntPoint(s.dim, 0), IntPoint(s.dim, 0)));
  auto [lo, hi] = s.image_range();
  LatticeFunction g(Box(lo, hi));
  for (std::size_t j = 0; j < s.points.size(); ++j) g[g.box().flat_index(s.images[j])] += s.weights[j];
  return g;
}

/// Per-coordinate diameter of the image of Omega_t cap Z^k; the minimum FFT padding.
inline IntPoint required_padding(const RadonStencil& s) {
  IntPoint pad(s.dim, 0);
  if (s.empty()) return pad;
  auto [lo, hi] = s.image_range();
  for (std::size_t c = 0; c < s.dim; ++c) pad[c] = hi[c] - lo[c];
  return pad;
}

/// Same operator as discrete_radon_direct, computed as a circular convolution of f
/// with the pushforward kernel on a periodic box of extent (input extent + padding).
inline LatticeFunction discrete_radon_fft(const LatticeFunction& f, const CZKernel& kernel, const ConvexBody& omega,
                                          const MultiIndexSet& gamma, double t, std::span<const std::int64_t> padding,
                                          std::uint64_t budget = kDefaultBudget) {
  const std::size_t d = gamma.size();
  if (f.dim() != d) throw domain_error("discrete_radon_fft: function dimension != |Gamma|");
  if (padding.size() != d) throw domain_error("discrete_radon_fft: padding needs one entry per coordinate");
  const RadonStencil s = make_stencil(kernel, omega, gamma, t, budget);
  const IntPoint need = required_padding(s);
  for (std::size_t c = 0; c < d; ++c)
    if (padding[c] < need[c])
      throw precondition_error("discrete_radon_fft: padding " + std::to_string(padding[c]) + " below image diameter " +
                               std::to_string(need[c]) + " in coordinate " + std::to_string(c));
  const Box out_box = output_box(f.box(), s);
  if (s.empty()) return LatticeFunction(out_box);
  const LatticeFunction g = pushforward_kernel(s);

  std::vector<std::size_t> dims(d);
  double vol = 1;
  for (std::size_t c = 0; c < d; ++c) {
    dims[c] = std::size_t(f.box().extent(c) + padding[c]);
    vol *= double(dims[c]);
  }
  if (vol > double(budget)) throw budget_exceeded("discrete_radon_fft: periodic box exceeds budget");
  const std::size_t n = std::size_t(vol);
  auto place = [&](const LatticeFunction& h) {
    std::vector<cplx> buf(n, cplx{});
    for (std::size_t i = 0; i < h.size(); ++i) {
      const IntPoint x = h.box().point(i);
      std::size_t idx = 0;
      for (std::size_t c = 0; c < d; ++c) idx = idx * dims[c] + std::size_t(x[c] - h.box().lo()[c]);
      buf[idx] = h[i];
    }
    return buf;
  };
  std::vector<cplx> fa = place(f), ga = place(g);
  fft_inplace(fa, dims, FftSign::forward);
  fft_inplace(ga, dims, FftSign::forward);
  for (std::size_t i = 0; i < n; ++i) fa[i] *= ga[i] / vol;
  fft_inplace(fa, dims, FftSign::backward);

  // index i in the periodic box corresponds to x = f.lo + g.lo + i
  LatticeFunction out(out_box);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const IntPoint x = out_box.point(i);
    std::size_t idx = 0;
    for (std::size_t c = 0; c < d; ++c) idx = idx * dims[c] + std::size_t(x[c] - out_box.lo()[c]);
    out[i] = fa[idx];
  }
  return out;
}

inline LatticeFunction discrete_radon_fft(const LatticeFunction& f, const CZKernel& kernel, const ConvexBody& omega,
                                          const MultiIndexSet& gamma, double t, std::int64_t padding,
                                          std::uint64_t budget = kDefaultBudget) {
  const IntPoint pad(gamma.size(), padding);
  return discrete_radon_fft(f, kernel, omega, gamma, t, pad, budget);
}

/// DFT on the periodic box of the given extents, sum_x f(x) e(xi . x) with
/// xi = j / L; lattice coordinates are reduced mod L so the transform refers to
/// absolute positions.
inline std::vector<cplx> periodic_dft(const LatticeFunction& f, std::span<const std::size_t> dims) {
  const std::size_t d = f.dim();
  if (dims.size() != d) throw domain_error("periodic_dft: dims mismatch");
  std::size_t n = 1;
  for (auto L : dims) n *= L;
  std::vector<cplx> buf(n, cplx{});
  for (std::size_t i = 0; i < f.size(); ++i) {
    const IntPoint x = f.box().point(i);
    std::size_t idx = 0;
    for (std::size_t c = 0; c < d; ++c) {
      const auto L = std::int64_t(dims[c]);
      idx = idx * dims[c] + std::size_t(((x[c] % L) + L) % L);
    }
    buf[idx] += f[i];
  }
  fft_inplace(buf, dims, FftSign::backward);
  return buf;
}

/// {H_t f : t in times}, every member stored on the output box of the largest t.
/// Built incrementally: points are sorted by gauge and each member adds only the
/// annulus between consecutive radii.
inline std::vector<LatticeFunction> radon_family(const LatticeFunction& f, const CZKernel& kernel,
                                                 const ConvexBody& omega, const MultiIndexSet& gamma,
                                                 std::span<const double> times, std::uint64_t budget = kDefaultBudget) {
  if (times.empty()) return {};
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0)) throw domain_error("radon_family: times must be positive");
    if (i > 0 && !(times[i] > times[i - 1])) throw domain_error("radon_family: times must be strictly increasing");
  }
  if (f.dim() != gamma.size()) throw domain_error("radon_family: function dimension != |Gamma|");
  const RadonStencil all = make_stencil(kernel, omega, gamma, times.back(), budget);
  std::vector<std::size_t> order(all.points.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> gauge(all.points.size());
  for (std::size_t i = 0; i < gauge.size(); ++i) gauge[i] = omega.gauge(all.points[i]);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return gauge[a] < gauge[b]; });

  const Box box = output_box(f.box(), all);
  std::vector<LatticeFunction> family;
  family.reserve(times.size());
  LatticeFunction current(box);
  std::size_t next = 0;
  for (double t : times) {
    RadonStencil annulus;
    annulus.dim = all.dim;
    while (next < order.size() && gauge[order[next]] < t) {
      const std::size_t j = order[next++];
      annulus.points.push_back(all.points[j]);
      annulus.images.push_back(all.images[j]);
      annulus.weights.push_back(all.weights[j]);
    }
    if (!annulus.empty()) {
      const LatticeFunction piece = apply_stencil(f, annulus).embedded(box);
      for (std::size_t i = 0; i < current.size(); ++i) current[i] += piece[i];
    }
    family.push_back(current);
  }
  return family;
}

struct ContinuousRadonResult {
  GridFunction value;
  /// Per-node error estimate (quadrature refinement + second-order inner remainder + rounding floor).
  std::vector<double> error;
  double max_error = 0;
};

/// p.v. integral over Omega_t of f(x - (y)^Gamma) K(y) dy at every grid node.
/// Omega_t \ Omega_eps is integrated with paired quadrature; on Omega_eps the
/// integrand is replaced by its first-order Taylor term -grad f(x) . (y)^Gamma K(y),
/// whose moments are integrated exactly once.
inline ContinuousRadonResult continuous_radon_quadrature(const GridFunction& f, const CZKernel& kernel,
                                                         const ConvexBody& omega, const MultiIndexSet& gamma, double t,
                                                         double eps, int quad_level,
                                                         double tolerance = std::numeric_limits<double>::infinity(),
                                                         std::uint64_t budget = kDefaultBudget) {
  const int k = omega.k();
  const std::size_t d = gamma.size();
  if (k > 2 || d > 3) throw domain_error("continuous_radon_quadrature: limited to k <= 2 and |Gamma| <= 3");
  if (kernel.k() != k || gamma.k() != k) throw domain_error("continuous_radon_quadrature: dimension mismatch");
  if (f.dim() != d) throw domain_error("continuous_radon_quadrature: function dimension != |Gamma|");
  if (!(t > 0)) throw domain_error("continuous_radon_quadrature: t must be positive");
  if (!(eps > 0 && eps < omega.inner_radius() * t))
    throw domain_error("continuous_radon_quadrature: need 0 < eps < c_Omega t");

  auto monomial = [&](std::span<const double> y, std::size_t g) {
    double v = 1;
    for (int i = 0; i < k; ++i) v *= std::pow(y[std::size_t(i)], gamma[g][std::size_t(i)]);
    return v;
  };
  // First moments over Omega_eps and the second-order remainder weight.
  std::vector<cplx> moment(d);
  for (std::size_t g = 0; g < d; ++g) {
    auto m = [&](std::span<const double> y) { return monomial(y, g) * kernel(y); };
    moment[g] = paired_polar_integral(omega, 0.0, eps, m, quad_level + 2, detail::DefaultBreaks{}, budget).value;
  }
  auto second = [&](std::span<const double> y) {
    double s = 0;
    for (std::size_t g = 0; g < d; ++g) s += monomial(y, g) * monomial(y, g);
    return cplx(s * std::abs(kernel(y)));
  };
  const double second_weight =
      0.5 * paired_polar_integral(omega, 0.0, eps, second, quad_level + 2, detail::DefaultBreaks{}, budget).value.real();
  auto abs_kernel = [&](std::span<const double> y) { return cplx(std::abs(kernel(y))); };
  const double kernel_mass =
      paired_polar_integral(omega, eps, t, abs_kernel, quad_level, detail::DefaultBreaks{}, budget).value.real();

  // Bound on the second derivatives of the sampled function.
  const double h = f.spacing();
  double d2 = 0, fmax = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    fmax = std::max(fmax, std::abs(f[i]));
    const auto m = f.multi_index(i);
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = a; b < d; ++b) {
        auto at = [&](int da, int db) -> std::optional<cplx> {
          auto mm = m;
          const auto sa = std::int64_t(mm[a]) + da;
          if (sa < 0 || sa >= std::int64_t(f.counts()[a])) return std::nullopt;
          mm[a] = std::size_t(sa);
          const auto sb = std::int64_t(mm[b]) + db;
          if (sb < 0 || sb >= std::int64_t(f.counts()[b])) return std::nullopt;
          mm[b] = std::size_t(sb);
          return f[f.flat_index(mm)];
        };
        if (a == b) {
          auto p = at(1, 0), c = at(0, 0), q = at(-1, 0);
          if (p && q) d2 = std::max(d2, std::abs(*p - 2.0 * *c + *q) / (h * h));
        } else {
          auto pp = at(1, 1), pm = at(1, -1), mp = at(-1, 1), mmv = at(-1, -1);
          if (pp && pm && mp && mmv) d2 = std::max(d2, std::abs(*pp - *pm - *mp + *mmv) / (4 * h * h));
        }
      }
    }
  }

  ContinuousRadonResult res{f, std::vector<double>(f.size(), 0.0), 0.0};
  const double floor = 1e-11 * std::max(fmax, 1e-300) * (1.0 + kernel_mass);
  std::vector<double> shifted(d), probe(d);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const RealPoint node = f.node(i);
    auto integrand = [&](std::span<const double> y) -> cplx {
      for (std::size_t g = 0; g < d; ++g) shifted[g] = node[g] - monomial(y, g);
      return f.interpolate(shifted) * kernel(y);
    };
    const QuadResult outer = paired_polar_integral(omega, eps, t, integrand, quad_level, detail::DefaultBreaks{}, budget);
    cplx inner{};
    for (std::size_t g = 0; g < d; ++g) {
      probe = node;
      probe[g] = node[g] + h;
      const cplx up = f.interpolate(probe);
      probe[g] = node[g] - h;
      const cplx down = f.interpolate(probe);
      inner -= (up - down) / (2 * h) * moment[g];
    }
    res.value[i] = outer.value + inner;
    res.error[i] = outer.error + double(d) * d2 * second_weight + floor;
    res.max_error = std::max(res.max_error, res.error[i]);
  }
  if (res.max_error > tolerance)
    throw precondition_error("continuous_radon_quadrature: estimated error above tolerance (grid too coarse)");
  return res;
}

}  // namespace radonlab
