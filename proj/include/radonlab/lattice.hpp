#pragma once

// Multi-index sets, the canonical polynomial map, anisotropic dilations,
// convex truncation bodies and dense function containers on Z^Gamma / R^Gamma.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "numeric.hpp"

namespace radonlab {

using MultiIndex = std::vector<int>;
using IntPoint = std::vector<std::int64_t>;
using RealPoint = std::vector<double>;

inline int degree(const MultiIndex& g) { return std::accumulate(g.begin(), g.end(), 0); }

/// Finite set Gamma of nonzero multi-indices in N_0^k, kept in increasing
/// lexicographic order.
class MultiIndexSet {
 public:
  MultiIndexSet(int k, std::vector<MultiIndex> exponents) : k_(k), exps_(std::move(exponents)) {
    if (k_ < 1) throw domain_error("MultiIndexSet: ambient dimension must be positive");
    if (exps_.empty()) throw domain_error("MultiIndexSet: empty set");
    for (const auto& g : exps_) {
      if (int(g.size()) != k_) throw domain_error("MultiIndexSet: multi-index has wrong length");
      if (std::any_of(g.begin(), g.end(), [](int e) { return e < 0; }))
        throw domain_error("MultiIndexSet: negative exponent");
      if (degree(g) == 0) throw domain_error("MultiIndexSet: zero multi-index");
    }
    for (std::size_t i = 1; i < exps_.size(); ++i) {
      if (!(exps_[i - 1] < exps_[i]))
        throw domain_error("MultiIndexSet: exponents must be strictly increasing (lexicographic)");
    }
  }

  /// Gamma = {d_1, ..., d_m} for k = 1.
  static MultiIndexSet univariate(std::vector<int> degrees) {
    std::sort(degrees.begin(), degrees.end());
    std::vector<MultiIndex> e;
    for (int d : degrees) e.push_back({d});
    return {1, std::move(e)};
  }

  int k() const { return k_; }
  std::size_t size() const { return exps_.size(); }
  const MultiIndex& operator[](std::size_t i) const { return exps_[i]; }
  const std::vector<MultiIndex>& exponents() const { return exps_; }
  int max_degree() const {
    int m = 0;
    for (const auto& g : exps_) m = std::max(m, degree(g));
    return m;
  }
  int min_degree() const {
    int m = std::numeric_limits<int>::max();
    for (const auto& g : exps_) m = std::min(m, degree(g));
    return m;
  }

  bool operator==(const MultiIndexSet&) const = default;

 private:
  int k_;
  std::vector<MultiIndex> exps_;
};

/// Diagonal matrix A with (Av)_gamma = |gamma| v_gamma.
class DilationMatrix {
 public:
  explicit DilationMatrix(const MultiIndexSet& gamma) {
    for (const auto& g : gamma.exponents()) weights_.push_back(degree(g));
  }
  explicit DilationMatrix(std::vector<int> weights) : weights_(std::move(weights)) {
    if (weights_.empty() || std::any_of(weights_.begin(), weights_.end(), [](int w) { return w < 1; }))
      throw domain_error("DilationMatrix: weights must be positive integers");
  }
  const std::vector<int>& weights() const { return weights_; }
  std::size_t size() const { return weights_.size(); }
  int trace() const { return std::accumulate(weights_.begin(), weights_.end(), 0); }

 private:
  std::vector<int> weights_;
};

namespace detail {

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw overflow_error("integer overflow in monomial evaluation");
  return r;
}

inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw overflow_error("integer overflow in polynomial evaluation");
  return r;
}

inline std::int64_t checked_pow(std::int64_t base, int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) r = checked_mul(r, base);
  return r;
}

}  // namespace detail

/// (x)^Gamma on integer points; throws overflow_error instead of wrapping.
inline IntPoint canonical_map(std::span<const std::int64_t> x, const MultiIndexSet& gamma) {
  if (int(x.size()) != gamma.k()) throw domain_error("canonical_map: point has wrong dimension");
  IntPoint out;
  out.reserve(gamma.size());
  for (const auto& g : gamma.exponents()) {
    std::int64_t v = 1;
    for (int i = 0; i < gamma.k(); ++i) v = detail::checked_mul(v, detail::checked_pow(x[i], g[i]));
    out.push_back(v);
  }
  return out;
}

inline RealPoint canonical_map(std::span<const double> x, const MultiIndexSet& gamma) {
  if (int(x.size()) != gamma.k()) throw domain_error("canonical_map: point has wrong dimension");
  RealPoint out;
  out.reserve(gamma.size());
  for (const auto& g : gamma.exponents()) {
    double v = 1;
    for (int i = 0; i < gamma.k(); ++i) v *= std::pow(x[i], g[i]);
    if (!std::isfinite(v)) throw overflow_error("canonical_map: non-finite coordinate");
    out.push_back(v);
  }
  return out;
}

/// t^A v: coordinate gamma scaled by t^{|gamma|}.
inline RealPoint dilate_point(double t, const DilationMatrix& a, std::span<const double> v) {
  if (!(t > 0)) throw domain_error("dilate_point: t must be positive");
  if (v.size() != a.size()) throw domain_error("dilate_point: dimension mismatch");
  RealPoint out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::pow(t, a.weights()[i]) * v[i];
  return out;
}

/// Bounded convex open 0-symmetric body with B(0, c) inside it and itself inside
/// the unit Euclidean ball. Membership is decided by the Minkowski gauge:
/// y lies in Omega_t iff gauge(y) < t.
class ConvexBody {
 public:
  enum class Shape { euclidean_ball, max_ball, ellipsoid };

  /// Open unit Euclidean ball.
  static ConvexBody euclidean_ball(int k, double inner_radius = 0.5) {
    return ConvexBody(Shape::euclidean_ball, k, std::vector<double>(std::size_t(k), 1.0), inner_radius);
  }
  /// Open cube of half-side 1/sqrt(k), the largest cube inside the unit ball;
  /// (-1, 1) when k = 1.
  static ConvexBody max_ball(int k, double inner_radius = 0.5) {
    return ConvexBody(Shape::max_ball, k,
                      std::vector<double>(std::size_t(k), 1.0 / std::sqrt(double(k))), inner_radius);
  }
  /// Open ellipsoid sum (y_i / a_i)^2 < 1 with semi-axes a_i in (0, 1].
  static ConvexBody ellipsoid(std::vector<double> axes, double inner_radius = -1) {
    if (axes.empty()) throw domain_error("ConvexBody: empty axes");
    for (double a : axes)
      if (!(a > 0 && a <= 1)) throw domain_error("ConvexBody: ellipsoid axes must lie in (0, 1]");
    const double r = inner_radius < 0 ? 0.5 * *std::min_element(axes.begin(), axes.end()) : inner_radius;
    const int k = int(axes.size());
    return ConvexBody(Shape::ellipsoid, k, std::move(axes), r);
  }

  Shape shape() const { return shape_; }
  int k() const { return k_; }
  double inner_radius() const { return c_; }
  const std::vector<double>& axes() const { return axes_; }

  /// Radius of the largest centred Euclidean ball inside the body.
  double inscribed_radius() const { return *std::min_element(axes_.begin(), axes_.end()); }

  /// Minkowski functional: the least t with y in closure(Omega_t).
  template <typename T>
  double gauge(std::span<const T> y) const {
    switch (shape_) {
      case Shape::euclidean_ball: {
        double s = 0;
        for (auto v : y) s += double(v) * double(v);
        return std::sqrt(s);
      }
      case Shape::max_ball: {
        double m = 0;
        for (auto v : y) m = std::max(m, std::abs(double(v)));
        return m / axes_[0];
      }
      case Shape::ellipsoid: {
        double s = 0;
        for (std::size_t i = 0; i < y.size(); ++i) {
          const double q = double(y[i]) / axes_[i];
          s += q * q;
        }
        return std::sqrt(s);
      }
    }
    return 0;
  }
  double gauge(const RealPoint& y) const { return gauge(std::span<const double>(y)); }
  double gauge(const IntPoint& y) const { return gauge(std::span<const std::int64_t>(y)); }

  bool contains(std::span<const double> y) const { return gauge(y) < 1.0; }

  /// Distance from 0 to the boundary along the unit vector theta.
  double boundary_radius(std::span<const double> theta) const { return 1.0 / gauge(theta); }

  /// Directions (angles in [0, pi) for k = 2) where the boundary radius is not smooth.
  std::vector<double> angular_kinks() const {
    if (shape_ == Shape::max_ball && k_ == 2)
      return {std::numbers::pi / 4, 3 * std::numbers::pi / 4};
    return {};
  }

 private:
  ConvexBody(Shape s, int k, std::vector<double> axes, double c)
      : shape_(s), k_(k), axes_(std::move(axes)), c_(c) {
    if (k_ < 1) throw domain_error("ConvexBody: dimension must be positive");
    if (!(c_ > 0 && c_ < 1)) throw domain_error("ConvexBody: inner radius must lie in (0, 1)");
    if (c_ > inscribed_radius()) throw domain_error("ConvexBody: B(0, c) is not contained in the body");
  }

  Shape shape_;
  int k_;
  std::vector<double> axes_;
  double c_;
};

/// Nonzero integer points y with gauge(y) < t, in lexicographic order.
inline std::vector<IntPoint> lattice_points_in_dilate(const ConvexBody& omega, double t,
                                                      std::uint64_t budget = kDefaultBudget) {
  if (!(t > 0)) throw domain_error("lattice_points_in_dilate: t must be positive");
  const int k = omega.k();
  const std::int64_t r = std::int64_t(std::ceil(t));
  double cells = 1;
  for (int i = 0; i < k; ++i) cells *= double(2 * r + 1);
  if (cells > double(budget)) throw budget_exceeded("lattice_points_in_dilate: enumeration box exceeds budget");
  std::vector<IntPoint> out;
  IntPoint y(std::size_t(k), -r);
  while (true) {
    bool zero = std::all_of(y.begin(), y.end(), [](std::int64_t v) { return v == 0; });
    if (!zero && omega.gauge(y) < t) out.push_back(y);
    int i = k - 1;
    while (i >= 0 && y[std::size_t(i)] == r) {
      y[std::size_t(i)] = -r;
      --i;
    }
    if (i < 0) break;
    ++y[std::size_t(i)];
  }
  return out;
}

/// Inclusive integer box prod [lo_i, hi_i] with row-major (last index fastest) layout.
class Box {
 public:
  Box() = default;
  Box(IntPoint lo, IntPoint hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
    if (lo_.size() != hi_.size() || lo_.empty()) throw domain_error("Box: bound dimension mismatch");
    for (std::size_t i = 0; i < lo_.size(); ++i)
      if (hi_[i] < lo_[i]) throw domain_error("Box: empty extent");
  }
  /// [-r, r]^d
  static Box centered(std::size_t d, std::int64_t r) {
    return {IntPoint(d, -r), IntPoint(d, r)};
  }

  std::size_t dim() const { return lo_.size(); }
  const IntPoint& lo() const { return lo_; }
  const IntPoint& hi() const { return hi_; }
  std::int64_t extent(std::size_t i) const { return hi_[i] - lo_[i] + 1; }
  std::size_t volume() const {
    std::size_t v = 1;
    for (std::size_t i = 0; i < dim(); ++i) v *= std::size_t(extent(i));
    return v;
  }
  bool contains(std::span<const std::int64_t> x) const {
    for (std::size_t i = 0; i < dim(); ++i)
      if (x[i] < lo_[i] || x[i] > hi_[i]) return false;
    return true;
  }
  bool contains(const Box& b) const { return contains(b.lo_) && contains(b.hi_); }
  std::size_t flat_index(std::span<const std::int64_t> x) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < dim(); ++i) idx = idx * std::size_t(extent(i)) + std::size_t(x[i] - lo_[i]);
    return idx;
  }
  IntPoint point(std::size_t flat) const {
    IntPoint x(dim());
    for (std::size_t i = dim(); i-- > 0;) {
      const auto e = std::size_t(extent(i));
      x[i] = lo_[i] + std::int64_t(flat % e);
      flat /= e;
    }
    return x;
  }
  /// Smallest box containing both.
  Box hull(const Box& b) const {
    IntPoint lo(dim()), hi(dim());
    for (std::size_t i = 0; i < dim(); ++i) {
      lo[i] = std::min(lo_[i], b.lo_[i]);
      hi[i] = std::max(hi_[i], b.hi_[i]);
    }
    return {lo, hi};
  }

  bool operator==(const Box&) const = default;

 private:
  IntPoint lo_, hi_;
};

/// Finitely supported complex function on Z^d stored densely on a box.
class LatticeFunction {
 public:
  LatticeFunction() = default;
  explicit LatticeFunction(Box box) : box_(std::move(box)), values_(box_.volume(), cplx{}) {}
  LatticeFunction(Box box, std::vector<cplx> values) : box_(std::move(box)), values_(std::move(values)) {
    if (values_.size() != box_.volume()) throw domain_error("LatticeFunction: value count does not match box");
    for (const auto& v : values_)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw domain_error("LatticeFunction: non-finite value");
  }

  /// Point mass of weight w at x inside box.
  static LatticeFunction delta(Box box, std::span<const std::int64_t> x, cplx w = 1.0) {
    LatticeFunction f(std::move(box));
    f.values_[f.box_.flat_index(x)] = w;
    return f;
  }

  const Box& box() const { return box_; }
  std::size_t dim() const { return box_.dim(); }
  std::size_t size() const { return values_.size(); }
  std::span<const cplx> values() const { return values_; }
  std::span<cplx> values() { return values_; }
  cplx& operator[](std::size_t i) { return values_[i]; }
  const cplx& operator[](std::size_t i) const { return values_[i]; }

  /// Value at x; zero outside the box.
  cplx at(std::span<const std::int64_t> x) const {
    return box_.contains(x) ? values_[box_.flat_index(x)] : cplx{};
  }
  cplx at(const IntPoint& x) const { return at(std::span<const std::int64_t>(x)); }

  /// Same function stored on a larger box.
  LatticeFunction embedded(const Box& target) const {
    if (!target.contains(box_)) throw domain_error("LatticeFunction::embedded: target box too small");
    LatticeFunction g(target);
    for (std::size_t i = 0; i < values_.size(); ++i) g.values_[target.flat_index(box_.point(i))] = values_[i];
    return g;
  }
  /// Restriction to a sub-box (values outside the original box read as zero).
  LatticeFunction restricted(const Box& target) const {
    LatticeFunction g(target);
    for (std::size_t i = 0; i < g.size(); ++i) g.values_[i] = at(target.point(i));
    return g;
  }
  /// f(. - z)
  LatticeFunction shifted(std::span<const std::int64_t> z) const {
    IntPoint lo = box_.lo(), hi = box_.hi();
    for (std::size_t i = 0; i < dim(); ++i) {
      lo[i] += z[i];
      hi[i] += z[i];
    }
    return {Box(lo, hi), values_};
  }
  LatticeFunction conj() const {
    LatticeFunction g = *this;
    for (auto& v : g.values_) v = std::conj(v);
    return g;
  }

 private:
  Box box_;
  std::vector<cplx> values_;
};

/// Largest |f - g| over the union of the supports (missing values read as zero).
inline double max_abs_diff(const LatticeFunction& f, const LatticeFunction& g) {
  const Box h = f.box().hull(g.box());
  double m = 0;
  for (std::size_t i = 0; i < h.volume(); ++i) {
    const IntPoint x = h.point(i);
    m = std::max(m, std::abs(f.at(x) - g.at(x)));
  }
  return m;
}

inline LatticeFunction operator+(const LatticeFunction& f, const LatticeFunction& g) {
  LatticeFunction out(f.box().hull(g.box()));
  for (std::size_t i = 0; i < out.size(); ++i) {
    const IntPoint x = out.box().point(i);
    out[i] = f.at(x) + g.at(x);
  }
  return out;
}

inline LatticeFunction operator-(const LatticeFunction& f, const LatticeFunction& g) {
  LatticeFunction out(f.box().hull(g.box()));
  for (std::size_t i = 0; i < out.size(); ++i) {
    const IntPoint x = out.box().point(i);
    out[i] = f.at(x) - g.at(x);
  }
  return out;
}

/// Complex function sampled on the uniform grid lo + i h (i in [0, count)) in R^d.
/// Node i stands for the cell [lo + i h, lo + (i+1) h).
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(RealPoint lo, std::vector<std::size_t> counts, double h)
      : lo_(std::move(lo)), counts_(std::move(counts)), h_(h) {
    if (!(h_ > 0)) throw domain_error("GridFunction: spacing must be positive");
    if (lo_.size() != counts_.size() || lo_.empty()) throw domain_error("GridFunction: dimension mismatch");
    std::size_t v = 1;
    for (auto c : counts_) {
      if (c == 0) throw domain_error("GridFunction: empty extent");
      v *= c;
    }
    values_.assign(v, cplx{});
  }

  /// Grid with samples of fn at the nodes.
  template <typename Fn>
  static GridFunction sample(RealPoint lo, std::vector<std::size_t> counts, double h, Fn&& fn) {
    GridFunction g(std::move(lo), std::move(counts), h);
    for (std::size_t i = 0; i < g.size(); ++i) g.values_[i] = fn(g.node(i));
    g.check_finite();
    return g;
  }

  std::size_t dim() const { return lo_.size(); }
  std::size_t size() const { return values_.size(); }
  double spacing() const { return h_; }
  const RealPoint& lo() const { return lo_; }
  const std::vector<std::size_t>& counts() const { return counts_; }
  double cell_volume() const { return std::pow(h_, double(dim())); }
  std::span<const cplx> values() const { return values_; }
  std::span<cplx> values() { return values_; }
  cplx& operator[](std::size_t i) { return values_[i]; }
  const cplx& operator[](std::size_t i) const { return values_[i]; }

  std::vector<std::size_t> multi_index(std::size_t flat) const {
    std::vector<std::size_t> m(dim());
    for (std::size_t i = dim(); i-- > 0;) {
      m[i] = flat % counts_[i];
      flat /= counts_[i];
    }
    return m;
  }
  std::size_t flat_index(std::span<const std::size_t> m) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < dim(); ++i) idx = idx * counts_[i] + m[i];
    return idx;
  }
  RealPoint node(std::size_t flat) const {
    const auto m = multi_index(flat);
    RealPoint x(dim());
    for (std::size_t i = 0; i < dim(); ++i) x[i] = lo_[i] + double(m[i]) * h_;
    return x;
  }

  /// Multilinear interpolation between nodes; zero outside [lo, lo + (count-1) h].
  cplx interpolate(std::span<const double> x) const {
    const std::size_t d = dim();
    std::vector<std::size_t> base(d);
    std::vector<double> frac(d);
    for (std::size_t i = 0; i < d; ++i) {
      const double s = (x[i] - lo_[i]) / h_;
      if (s < 0 || s > double(counts_[i] - 1)) return {};
      auto b = std::size_t(std::floor(s));
      if (b >= counts_[i] - 1) b = counts_[i] >= 2 ? counts_[i] - 2 : 0;
      base[i] = b;
      frac[i] = s - double(b);
    }
    cplx acc{};
    std::vector<std::size_t> m(d);
    for (std::size_t corner = 0; corner < (std::size_t{1} << d); ++corner) {
      double w = 1;
      for (std::size_t i = 0; i < d && w != 0; ++i) {
        const bool up = (corner >> i) & 1u;
        m[i] = base[i] + (up ? 1 : 0);
        w *= up ? frac[i] : 1 - frac[i];
        if (m[i] >= counts_[i]) w = 0;  // single-node axis
      }
      if (w != 0) acc += w * values_[flat_index(m)];
    }
    return acc;
  }

  bool same_grid(const GridFunction& o) const { return lo_ == o.lo_ && counts_ == o.counts_ && h_ == o.h_; }

  void check_finite() const {
    for (const auto& v : values_)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw domain_error("GridFunction: non-finite value");
  }

 private:
  RealPoint lo_;
  std::vector<std::size_t> counts_;
  double h_ = 1;
  std::vector<cplx> values_;
};

namespace detail {

inline double lp_sum(std::span<const cplx> v, double p, double weight) {
  if (!(p >= 1)) throw domain_error("lp_norm: p must be at least 1");
  if (std::isinf(p)) {
    double m = 0;
    for (const auto& z : v) m = std::max(m, std::abs(z));
    return m;
  }
  CompensatedSum<double> s;
  for (const auto& z : v) s.add(std::pow(std::abs(z), p));
  return std::pow(weight * s.value(), 1.0 / p);
}

}  // namespace detail

/// Counting-measure l^p norm.
inline double lp_norm(const LatticeFunction& f, double p) { return detail::lp_sum(f.values(), p, 1.0); }

/// Riemann-sum L^p norm, h^d sum |f|^p.
inline double lp_norm(const GridFunction& f, double p) {
  return detail::lp_sum(f.values(), p, f.cell_volume());
}

}  // namespace radonlab
