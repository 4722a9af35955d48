#pragma once

// Anisotropic dyadic cells for t^A with A diagonal, the martingale E_k, the
// approximation square function, measure dilates and the telescoping pieces
// mu_{D^j} * f of the truncated transform.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "errors.hpp"
#include "kernels.hpp"
#include "lattice.hpp"
#include "numeric.hpp"
#include "quadrature.hpp"
#include "radon.hpp"
#include "seminorms.hpp"

namespace radonlab {

/// Level-k cells are prod_gamma [m D^{k|gamma|}, (m+1) D^{k|gamma|}); larger k is coarser.
class ChristCubeSystem {
 public:
  ChristCubeSystem(const DilationMatrix& a, int k_min, int k_max, int base = 2)
      : weights_(a.weights()), k_min_(k_min), k_max_(k_max), base_(base) {
    if (base_ < 2) throw domain_error("ChristCubeSystem: D must be an integer > 1");
    if (k_min_ > k_max_) throw domain_error("ChristCubeSystem: empty level range");
  }

  int base() const { return base_; }
  int k_min() const { return k_min_; }
  int k_max() const { return k_max_; }
  std::size_t dim() const { return weights_.size(); }
  const std::vector<int>& weights() const { return weights_; }

  double side(int k, std::size_t g) const {
    check_level(k);
    return std::pow(double(base_), double(k) * weights_[g]);
  }

  IntPoint cube_containing(std::span<const double> x, int k) const {
    check_level(k);
    if (x.size() != dim()) throw domain_error("cube_containing: point dimension != |Gamma|");
    IntPoint m(dim());
    for (std::size_t g = 0; g < dim(); ++g) m[g] = std::int64_t(std::floor(x[g] / side(k, g)));
    return m;
  }

  /// Index of the level-(k+1) cell containing level-k cell m.
  IntPoint parent(const IntPoint& m, int k) const {
    check_level(k + 1);
    IntPoint p(dim());
    for (std::size_t g = 0; g < dim(); ++g) {
      const auto d = detail::checked_pow(base_, weights_[g]);
      p[g] = m[g] >= 0 ? m[g] / d : -((-m[g] + d - 1) / d);
    }
    return p;
  }

  RealPoint center(const IntPoint& m, int k) const {
    RealPoint c(dim());
    for (std::size_t g = 0; g < dim(); ++g) c[g] = (double(m[g]) + 0.5) * side(k, g);
    return c;
  }

  double cell_volume(int k) const {
    double v = 1;
    for (std::size_t g = 0; g < dim(); ++g) v *= side(k, g);
    return v;
  }

  /// rho(x) = max_gamma |x_gamma|^{1/|gamma|}, homogeneous of degree 1 under t^A.
  double rho(std::span<const double> x) const {
    double r = 0;
    for (std::size_t g = 0; g < dim(); ++g) r = std::max(r, std::pow(std::abs(x[g]), 1.0 / weights_[g]));
    return r;
  }

  /// Every level-k cell contains the open rho-ball of radius inner() D^k about its
  /// center and lies in the closed one of radius outer() D^k.
  double inner() const {
    double c = 1;
    for (int w : weights_) c = std::min(c, std::pow(0.5, 1.0 / w));
    return c;
  }
  double outer() const {
    double c = 0;
    for (int w : weights_) c = std::max(c, std::pow(0.5, 1.0 / w));
    return c;
  }

 private:
  void check_level(int k) const {
    if (k < k_min_ || k > k_max_) throw domain_error("ChristCubeSystem: level outside range");
  }

  std::vector<int> weights_;
  int k_min_, k_max_, base_;
};

namespace detail {

/// Number of grid nodes per level-k cell along each axis; throws unless the grid
/// box is a union of whole level-k cells.
inline std::vector<std::size_t> cell_blocks(const GridFunction& f, int k, const ChristCubeSystem& sys) {
  if (f.dim() != sys.dim()) throw domain_error("conditional_expectation: grid dimension != |Gamma|");
  std::vector<std::size_t> n(f.dim());
  const double h = f.spacing();
  for (std::size_t g = 0; g < f.dim(); ++g) {
    const double s = sys.side(k, g) / h;
    const double lo = f.lo()[g] / sys.side(k, g);
    const auto r = std::llround(s);
    if (r < 1 || std::abs(s - double(r)) > 1e-9 * s || std::abs(lo - std::round(lo)) > 1e-9 ||
        f.counts()[g] % std::size_t(r) != 0)
      throw precondition_error("conditional_expectation: grid does not resolve level-" + std::to_string(k) +
                               " cells");
    n[g] = std::size_t(r);
  }
  return n;
}

}  // namespace detail

/// E_k f: average of f over the level-k cell containing each node.
inline GridFunction conditional_expectation(const GridFunction& f, int k, const ChristCubeSystem& sys) {
  const auto n = detail::cell_blocks(f, k, sys);
  const std::size_t d = f.dim();
  std::vector<std::size_t> cells(d);
  std::size_t ncell = 1;
  for (std::size_t g = 0; g < d; ++g) {
    cells[g] = f.counts()[g] / n[g];
    ncell *= cells[g];
  }
  auto cell_of = [&](std::size_t i) {
    const auto m = f.multi_index(i);
    std::size_t c = 0;
    for (std::size_t g = 0; g < d; ++g) c = c * cells[g] + m[g] / n[g];
    return c;
  };
  std::vector<CompensatedSum<cplx>> sums(ncell);
  for (std::size_t i = 0; i < f.size(); ++i) sums[cell_of(i)].add(f[i]);
  double per = 1;
  for (auto v : n) per *= double(v);
  GridFunction out = f;
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = sums[cell_of(i)].value() / per;
  return out;
}

struct MartingaleProbe {
  double ratio = 0;  // ||O(E_n f : n)||_p / ||f||_p
  double oscillation = 0;
  double f_norm = 0;
  SequenceI sequence;
  std::vector<int> levels;
  std::size_t evaluations = 0;
};

/// Family {E_n f : n in levels} indexed by D^n.
inline SampledFamily martingale_family(const GridFunction& f, std::span<const int> levels,
                                       const ChristCubeSystem& sys) {
  if (levels.size() < 2) throw domain_error("martingale_family: need at least two levels");
  std::vector<double> times;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (i > 0 && levels[i] <= levels[i - 1]) throw domain_error("martingale_family: levels must increase");
    times.push_back(std::pow(double(sys.base()), levels[i]));
  }
  SampledFamily fam(TruncationGrid(times), f.size(), f.cell_volume());
  std::vector<GridFunction> ek(levels.size());
  parallel_for(levels.size(), [&](std::size_t j) { ek[j] = conditional_expectation(f, levels[j], sys); });
  for (std::size_t j = 0; j < levels.size(); ++j)
    for (std::size_t x = 0; x < f.size(); ++x) fam.at(x)[j] = ek[j][x];
  return fam;
}

inline MartingaleProbe martingale_oscillation_probe(const GridFunction& f, std::span<const int> levels,
                                                    const ChristCubeSystem& sys, double p, std::size_t n_blocks,
                                                    SearchStrategy strategy = SearchStrategy::exhaustive,
                                                    std::size_t restarts = 50, std::uint64_t seed = 0) {
  const SampledFamily fam = martingale_family(f, levels, sys);
  MartingaleProbe out;
  out.levels.assign(levels.begin(), levels.end());
  out.f_norm = lp_norm(f, p);
  const SearchResult r = worst_sequence_search(fam, p, n_blocks, strategy, restarts, seed);
  out.oscillation = r.value;
  out.sequence = r.sequence;
  out.evaluations = r.evaluations;
  out.ratio = out.f_norm > 0 ? r.value / out.f_norm : 0.0;
  return out;
}

/// Compactly supported phi on R^d with support in [-half_width, half_width]^d.
struct Mollifier {
  std::function<double(std::span<const double>)> fn;
  double half_width = 0.5;

  double operator()(std::span<const double> x) const { return fn(x); }

  /// Indicator of [-1/2, 1/2)^d.
  static Mollifier box() {
    return {[](std::span<const double> x) {
              for (double v : x)
                if (v < -0.5 || v >= 0.5) return 0.0;
              return 1.0;
            },
            0.5};
  }
  /// prod (35/16)(1 - 4 x_i^2)^3 on (-1/2, 1/2)^d, unit mass.
  static Mollifier bump() {
    return {[](std::span<const double> x) {
              double v = 1;
              for (double c : x) {
                if (std::abs(c) >= 0.5) return 0.0;
                const double s = 1 - 4 * c * c;
                v *= 35.0 / 16.0 * s * s * s;
              }
              return v;
            },
            0.5};
  }
};

namespace detail {

struct Stencil {
  std::vector<std::vector<std::int64_t>> offsets;
  std::vector<double> weights;
};

/// Grid samples of phi_{D^k}(x) = D^{-tr(A) k} phi(D^{-kA} x), renormalised to unit sum.
inline Stencil mollifier_stencil(const Mollifier& phi, double h, const std::vector<int>& weights, int k, int base) {
  const std::size_t d = weights.size();
  std::vector<std::int64_t> reach(d);
  std::vector<double> scale(d);
  for (std::size_t g = 0; g < d; ++g) {
    scale[g] = std::pow(double(base), double(k) * weights[g]);
    reach[g] = std::int64_t(std::ceil(phi.half_width * scale[g] / h + 1e-9));
  }
  Stencil s;
  std::vector<std::int64_t> o(d);
  for (std::size_t g = 0; g < d; ++g) o[g] = -reach[g];
  RealPoint x(d);
  CompensatedSum<double> total;
  while (true) {
    for (std::size_t g = 0; g < d; ++g) x[g] = double(o[g]) * h / scale[g];
    const double w = phi(x);
    if (w != 0) {
      s.offsets.push_back(o);
      s.weights.push_back(w);
      total.add(w);
    }
    std::size_t g = d;
    while (g-- > 0 && o[g] == reach[g]) o[g] = -reach[g];
    if (g == std::size_t(-1)) break;
    ++o[g];
  }
  if (!(total.value() > 0)) throw precondition_error("mollifier_stencil: mollifier vanishes on the grid");
  for (auto& w : s.weights) w /= total.value();
  return s;
}

}  // namespace detail

/// phi_{D^k} * f on the grid box, taken periodically (the box is a union of whole
/// cells at every level used, so the torus is compatible with the cell system).
inline GridFunction mollify(const GridFunction& f, const Mollifier& phi, int k, const ChristCubeSystem& sys) {
  const auto st = detail::mollifier_stencil(phi, f.spacing(), sys.weights(), k, sys.base());
  const std::size_t d = f.dim();
  for (std::size_t g = 0; g < d; ++g) {
    const double reach = phi.half_width * sys.side(k, g);
    if (2 * reach > double(f.counts()[g]) * f.spacing() + 1e-12)
      throw precondition_error("mollify: dilated mollifier support escapes the grid box");
  }
  GridFunction out = f;
  parallel_for(f.size(), [&](std::size_t i) {
    const auto m = f.multi_index(i);
    std::vector<std::size_t> src(d);
    CompensatedSum<cplx> acc;
    for (std::size_t j = 0; j < st.offsets.size(); ++j) {
      for (std::size_t g = 0; g < d; ++g) {
        const auto n = std::int64_t(f.counts()[g]);
        src[g] = std::size_t(((std::int64_t(m[g]) - st.offsets[j][g]) % n + n) % n);
      }
      acc.add(st.weights[j] * f[f.flat_index(src)]);
    }
    out[i] = acc.value();
  });
  return out;
}

/// Per-level |phi_{D^k} * f - E_k f| at every node.
inline std::vector<GridFunction> approx_square_terms(const GridFunction& f, const Mollifier& phi,
                                                     const ChristCubeSystem& sys, std::span<const int> levels) {
  std::vector<GridFunction> terms(levels.size());
  for (std::size_t j = 0; j < levels.size(); ++j) {
    const GridFunction a = mollify(f, phi, levels[j], sys);
    const GridFunction e = conditional_expectation(f, levels[j], sys);
    terms[j] = a;
    for (std::size_t i = 0; i < f.size(); ++i) terms[j][i] = std::abs(a[i] - e[i]);
  }
  return terms;
}

/// S f = (sum_k |phi_{D^k} * f - E_k f|^2)^{1/2}.
inline GridFunction approx_square_function(const GridFunction& f, const Mollifier& phi, const ChristCubeSystem& sys,
                                           std::span<const int> levels) {
  const auto terms = approx_square_terms(f, phi, sys, levels);
  GridFunction out = f;
  for (std::size_t i = 0; i < f.size(); ++i) {
    double s = 0;
    for (const auto& t : terms) s += std::norm(t[i]);
    out[i] = std::sqrt(s);
  }
  return out;
}

/// Finite sum of weighted point masses in R^d.
struct DiscreteMeasure {
  std::vector<RealPoint> points;
  std::vector<cplx> weights;

  std::size_t size() const { return points.size(); }
  cplx total_mass() const {
    CompensatedSum<cplx> s;
    for (const auto& w : weights) s.add(w);
    return s.value();
  }
  double total_variation() const {
    double s = 0;
    for (const auto& w : weights) s += std::abs(w);
    return s;
  }
  double support_radius() const {
    double r = 0;
    for (const auto& p : points) r = std::max(r, euclidean_norm(p));
    return r;
  }
  /// Atoms at equal points combined; zero atoms dropped; points in lexicographic order.
  DiscreteMeasure merged() const {
    std::map<RealPoint, cplx> acc;
    for (std::size_t i = 0; i < size(); ++i) acc[points[i]] += weights[i];
    DiscreteMeasure out;
    for (auto& [p, w] : acc)
      if (w != cplx{}) {
        out.points.push_back(p);
        out.weights.push_back(w);
      }
    return out;
  }
  DiscreteMeasure operator+(const DiscreteMeasure& o) const {
    DiscreteMeasure out = *this;
    out.points.insert(out.points.end(), o.points.begin(), o.points.end());
    out.weights.insert(out.weights.end(), o.weights.begin(), o.weights.end());
    return out;
  }
  DiscreteMeasure operator-() const {
    DiscreteMeasure out = *this;
    for (auto& w : out.weights) w = -w;
    return out;
  }
};

/// sigma^(xi) = sum_i w_i e(-xi . x_i).
inline cplx fourier_transform(const DiscreteMeasure& s, std::span<const double> xi) {
  CompensatedSum<cplx> acc;
  for (std::size_t i = 0; i < s.size(); ++i) {
    double th = 0;
    for (std::size_t g = 0; g < xi.size(); ++g) th -= xi[g] * s.points[i][g];
    acc.add(s.weights[i] * unit_phase(th));
  }
  return acc.value();
}

/// <sigma_t, f> = int f(t^A x) d sigma(x).
inline DiscreteMeasure measure_dilate(const DiscreteMeasure& s, double t, const DilationMatrix& a) {
  if (!(t > 0)) throw domain_error("measure_dilate: t must be positive");
  DiscreteMeasure out = s;
  for (auto& p : out.points) p = dilate_point(t, a, p);
  return out;
}

struct LowHighSplit {
  DiscreteMeasure low;   // phi * sigma, as node masses on the grid
  DiscreteMeasure high;  // sigma - phi * sigma
};

/// sigma = phi * sigma + (delta_0 - phi) * sigma. The low part is phi * sigma sampled
/// at the nodes lo + i h, each atom's mass renormalised so that the low part carries
/// exactly the mass of sigma.
inline LowHighSplit low_high_split(const DiscreteMeasure& s, const Mollifier& phi, const RealPoint& lo,
                                   const std::vector<std::size_t>& counts, double h) {
  const std::size_t d = lo.size();
  if (counts.size() != d || !(h > 0)) throw domain_error("low_high_split: invalid grid");
  std::map<std::vector<std::int64_t>, cplx> nodes;
  RealPoint x(d);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& p = s.points[i];
    if (p.size() != d) throw domain_error("low_high_split: atom dimension mismatch");
    std::vector<std::int64_t> a(d), b(d), m(d);
    for (std::size_t g = 0; g < d; ++g) {
      a[g] = std::int64_t(std::ceil((p[g] - phi.half_width - lo[g]) / h));
      b[g] = std::int64_t(std::floor((p[g] + phi.half_width - lo[g]) / h));
      if (a[g] < 0 || b[g] >= std::int64_t(counts[g]))
        throw precondition_error("low_high_split: mollifier support escapes the grid");
    }
    std::vector<std::pair<std::vector<std::int64_t>, double>> local;
    CompensatedSum<double> total;
    m = a;
    while (true) {
      for (std::size_t g = 0; g < d; ++g) x[g] = lo[g] + double(m[g]) * h - p[g];
      const double w = phi(x);
      if (w != 0) {
        local.emplace_back(m, w);
        total.add(w);
      }
      std::size_t g = d;
      while (g-- > 0 && m[g] == b[g]) m[g] = a[g];
      if (g == std::size_t(-1)) break;
      ++m[g];
    }
    if (!(total.value() > 0)) throw precondition_error("low_high_split: mollifier vanishes on the grid");
    for (auto& [idx, w] : local) nodes[idx] += s.weights[i] * (w / total.value());
  }
  LowHighSplit out;
  for (auto& [idx, w] : nodes) {
    RealPoint q(d);
    for (std::size_t g = 0; g < d; ++g) q[g] = lo[g] + double(idx[g]) * h;
    out.low.points.push_back(std::move(q));
    out.low.weights.push_back(w);
  }
  out.high = s + (-out.low);
  return out;
}

/// mu_{D^j} * f for j = k_lo .. k_hi - 1: the transform restricted to lattice points
/// with D^j <= gauge(y) < D^{j+1}. Every piece lives on the output box of H_{D^{k_hi}}.
inline std::vector<LatticeFunction> telescoping_pieces(const LatticeFunction& f, const CZKernel& kernel,
                                                       const ConvexBody& omega, const MultiIndexSet& gamma, int base,
                                                       int k_lo, int k_hi, std::uint64_t budget = kDefaultBudget) {
  if (base < 2) throw domain_error("telescoping_pieces: D must be an integer > 1");
  if (k_lo >= k_hi) throw domain_error("telescoping_pieces: empty level range");
  if (f.dim() != gamma.size()) throw domain_error("telescoping_pieces: function dimension != |Gamma|");
  const double top = std::pow(double(base), k_hi);
  const RadonStencil all = make_stencil(kernel, omega, gamma, top, budget);
  const Box box = output_box(f.box(), all);
  std::vector<RadonStencil> ann(std::size_t(k_hi - k_lo));
  for (auto& a : ann) a.dim = all.dim;
  for (std::size_t i = 0; i < all.points.size(); ++i) {
    const double g = omega.gauge(all.points[i]);
    for (int j = k_lo; j < k_hi; ++j) {
      if (g >= std::pow(double(base), j) && g < std::pow(double(base), j + 1)) {
        auto& a = ann[std::size_t(j - k_lo)];
        a.points.push_back(all.points[i]);
        a.images.push_back(all.images[i]);
        a.weights.push_back(all.weights[i]);
        break;
      }
    }
  }
  std::vector<LatticeFunction> out(ann.size());
  for (std::size_t j = 0; j < ann.size(); ++j)
    out[j] = ann[j].empty() ? LatticeFunction(box) : apply_stencil(f, ann[j]).embedded(box);
  return out;
}

/// Continuous pieces int_{Omega_{D^{j+1}} \ Omega_{D^j}} f(x - (y)^Gamma) K(y) dy at every node (k <= 2).
inline std::vector<GridFunction> telescoping_pieces(const GridFunction& f, const CZKernel& kernel,
                                                    const ConvexBody& omega, const MultiIndexSet& gamma, int base,
                                                    int k_lo, int k_hi, int quad_level = 1,
                                                    std::uint64_t budget = kDefaultBudget) {
  if (base < 2) throw domain_error("telescoping_pieces: D must be an integer > 1");
  if (k_lo >= k_hi) throw domain_error("telescoping_pieces: empty level range");
  if (f.dim() != gamma.size()) throw domain_error("telescoping_pieces: function dimension != |Gamma|");
  const int k = omega.k();
  std::vector<GridFunction> out;
  for (int j = k_lo; j < k_hi; ++j) {
    GridFunction piece = f;
    const double a = std::pow(double(base), j), b = std::pow(double(base), j + 1);
    parallel_for(f.size(), [&](std::size_t i) {
      const RealPoint node = f.node(i);
      RealPoint shifted(node.size());
      auto integrand = [&](std::span<const double> y) -> cplx {
        for (std::size_t g = 0; g < gamma.size(); ++g) {
          double m = 1;
          for (int c = 0; c < k; ++c) m *= std::pow(y[std::size_t(c)], gamma[g][std::size_t(c)]);
          shifted[g] = node[g] - m;
        }
        return f.interpolate(shifted) * kernel(y);
      };
      piece[i] = paired_polar_integral(omega, a, b, integrand, quad_level, detail::DefaultBreaks{}, budget).value;
    });
    out.push_back(std::move(piece));
  }
  return out;
}

}  // namespace radonlab
