#pragma once

// Truncated oscillation seminorm, r-variation, maximal function, worst-sequence
// search, long/short splitting and the Rademacher-Menshov dyadic bound.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "numeric.hpp"

namespace radonlab {

/// Finite strictly increasing set of positive truncation radii.
class TruncationGrid {
 public:
  TruncationGrid() = default;
  explicit TruncationGrid(std::vector<double> times) : times_(std::move(times)) {
    if (times_.empty()) throw domain_error("TruncationGrid: empty grid");
    for (std::size_t i = 0; i < times_.size(); ++i) {
      if (!(times_[i] > 0) || !std::isfinite(times_[i])) throw domain_error("TruncationGrid: times must be positive");
      if (i > 0 && !(times_[i] > times_[i - 1])) throw domain_error("TruncationGrid: times must be strictly increasing");
    }
  }
  /// count log-spaced radii from lo to hi inclusive.
  static TruncationGrid log_spaced(double lo, double hi, std::size_t count) {
    if (count == 0 || !(lo > 0) || !(hi >= lo)) throw domain_error("TruncationGrid::log_spaced: bad range");
    std::vector<double> t(count);
    for (std::size_t i = 0; i < count; ++i)
      t[i] = count == 1 ? lo : lo * std::pow(hi / lo, double(i) / double(count - 1));
    t.front() = lo;
    if (count > 1) t.back() = hi;
    return TruncationGrid(std::move(t));
  }
  std::size_t size() const { return times_.size(); }
  double operator[](std::size_t i) const { return times_[i]; }
  const std::vector<double>& times() const { return times_; }
  /// Index of an exact member, or size() when absent.
  std::size_t find(double t) const {
    auto it = std::lower_bound(times_.begin(), times_.end(), t);
    return (it != times_.end() && *it == t) ? std::size_t(it - times_.begin()) : size();
  }

 private:
  std::vector<double> times_;
};

/// Increasing sequence I_1 < ... < I_{N+1} of grid members, stored as grid indices.
/// The last entry may be the end sentinel (index == grid size) standing for +infinity.
class SequenceI {
 public:
  SequenceI() = default;
  SequenceI(std::vector<std::size_t> indices, std::size_t grid_size) : idx_(std::move(indices)) {
    if (idx_.size() < 2) throw domain_error("SequenceI: need at least two entries");
    for (std::size_t i = 0; i < idx_.size(); ++i) {
      const bool last = i + 1 == idx_.size();
      if (idx_[i] > grid_size || (!last && idx_[i] == grid_size))
        throw domain_error("SequenceI: entry is not a grid member");
      if (i > 0 && !(idx_[i] > idx_[i - 1])) throw domain_error("SequenceI: entries must be strictly increasing");
    }
  }
  /// Build from grid times; every entry must be an exact grid member.
  static SequenceI from_times(const TruncationGrid& grid, std::span<const double> times) {
    std::vector<std::size_t> idx;
    for (double t : times) {
      const std::size_t i = grid.find(t);
      if (i == grid.size()) throw domain_error("SequenceI: I is not a subsequence of the grid");
      idx.push_back(i);
    }
    return {std::move(idx), grid.size()};
  }
  /// (first, +infinity)
  static SequenceI with_tail_sentinel(std::size_t first, std::size_t grid_size) { return {{first, grid_size}, grid_size}; }

  std::size_t length() const { return idx_.size(); }
  /// N = number of windows.
  std::size_t blocks() const { return idx_.size() - 1; }
  const std::vector<std::size_t>& indices() const { return idx_; }
  std::size_t operator[](std::size_t i) const { return idx_[i]; }
  bool operator==(const SequenceI&) const = default;

 private:
  std::vector<std::size_t> idx_;
};

/// Values a_t(x) for every spatial point x and grid time t, stored point-major.
/// `weight` is the measure of one spatial point (1 on lattices, h^d on grids).
struct SampledFamily {
  TruncationGrid grid;
  std::size_t points = 0;
  std::vector<cplx> values;
  double weight = 1.0;

  SampledFamily() = default;
  SampledFamily(TruncationGrid g, std::size_t n, double w = 1.0)
      : grid(std::move(g)), points(n), values(n * grid.size(), cplx{}), weight(w) {}

  std::span<const cplx> at(std::size_t x) const { return {values.data() + x * grid.size(), grid.size()}; }
  std::span<cplx> at(std::size_t x) { return {values.data() + x * grid.size(), grid.size()}; }

  void check() const {
    if (values.size() != points * grid.size()) throw domain_error("SampledFamily: value count mismatch");
    for (const auto& v : values)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw domain_error("SampledFamily: non-finite value");
  }
};

/// O_{I,N}^2: square-summed maxima of |a_t - a_{I_j}| over the windows I_j <= t < I_{j+1}.
inline double oscillation_pointwise(std::span<const cplx> values, const SequenceI& seq) {
  const std::size_t m = values.size();
  for (std::size_t i = 0; i < seq.length(); ++i)
    if (seq[i] > m || (seq[i] == m && i + 1 != seq.length()))
      throw domain_error("oscillation_pointwise: I is not a subsequence of the grid");
  double total = 0;
  for (std::size_t j = 0; j + 1 < seq.length(); ++j) {
    const cplx base = values[seq[j]];
    double mx = 0;
    for (std::size_t i = seq[j]; i < seq[j + 1]; ++i) mx = std::max(mx, std::abs(values[i] - base));
    total += mx * mx;
  }
  return std::sqrt(total);
}

namespace detail {

inline double weighted_lp(std::span<const double> v, double p, double weight) {
  if (!(p >= 1)) throw domain_error("seminorm: p must be at least 1");
  if (std::isinf(p)) return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
  CompensatedSum<double> s;
  for (double x : v) s.add(std::pow(x, p));
  return std::pow(weight * s.value(), 1.0 / p);
}

}  // namespace detail

/// l^p (or Riemann L^p) norm over x of the pointwise oscillation.
inline double oscillation_norm(const SampledFamily& family, const SequenceI& seq, double p) {
  if (!(p >= 1)) throw domain_error("oscillation_norm: p must be at least 1");
  std::vector<double> pw(family.points);
  for (std::size_t x = 0; x < family.points; ++x) pw[x] = oscillation_pointwise(family.at(x), seq);
  return detail::weighted_lp(pw, p, family.weight);
}

/// V^r: sup over increasing subsequences of (sum |a_{t_j} - a_{t_{j-1}}|^r)^{1/r}.
/// Dynamic programming over the last chosen index, O(m^2). r = infinity gives the
/// largest pairwise difference.
inline double variation_pointwise(std::span<const cplx> values, double r) {
  if (!(r >= 1)) throw domain_error("variation_pointwise: r must be at least 1");
  const std::size_t m = values.size();
  if (std::isinf(r)) {
    double mx = 0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j) mx = std::max(mx, std::abs(values[j] - values[i]));
    return mx;
  }
  // best[i] = max of sum |increments|^r over chains ending at i
  std::vector<double> best(m, 0.0);
  double overall = 0;
  for (std::size_t i = 1; i < m; ++i) {
    double b = 0;
    for (std::size_t j = 0; j < i; ++j) b = std::max(b, best[j] + std::pow(std::abs(values[i] - values[j]), r));
    best[i] = b;
    overall = std::max(overall, b);
  }
  return std::pow(overall, 1.0 / r);
}

/// Pointwise supremum of |a_t(x)| over the grid.
inline std::vector<double> maximal_function(const SampledFamily& family) {
  std::vector<double> out(family.points, 0.0);
  for (std::size_t x = 0; x < family.points; ++x)
    for (const auto& v : family.at(x)) out[x] = std::max(out[x], std::abs(v));
  return out;
}

enum class SearchStrategy { greedy, random_restarts, exhaustive, block_dp };

inline SearchStrategy parse_strategy(const std::string& s) {
  if (s == "greedy") return SearchStrategy::greedy;
  if (s == "random-restarts") return SearchStrategy::random_restarts;
  if (s == "exhaustive") return SearchStrategy::exhaustive;
  if (s == "block-dp") return SearchStrategy::block_dp;
  throw domain_error("unknown search strategy '" + s + "'");
}

struct SearchResult {
  SequenceI sequence;
  double value = 0;
  std::size_t evaluations = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  double r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * double(n - k + i) / double(i);
  return r;
}

/// Oscillation norm as a function of the index sequence. For p = 2 the squared norm
/// is a sum of per-window terms W(s, e) = weight * sum_x max_{s<=i<e} |a_i - a_s|^2,
/// tabulated once so every evaluation is O(N).
class OscillationObjective {
 public:
  OscillationObjective(const SampledFamily& family, double p) : family_(family), p_(p) {
    const std::size_t m = family.grid.size();
    if (p == 2.0) {
      table_.assign(m * m, 0.0);
      std::vector<double> run(family.points);
      for (std::size_t s = 0; s < m; ++s) {
        std::fill(run.begin(), run.end(), 0.0);
        for (std::size_t e = s + 1; e <= m; ++e) {
          // window [s, e) gains index e-1
          const std::size_t i = e - 1;
          CompensatedSum<double> tot;
          for (std::size_t x = 0; x < family.points; ++x) {
            const auto a = family.at(x);
            const double d = std::abs(a[i] - a[s]);
            run[x] = std::max(run[x], d * d);
            tot.add(run[x]);
          }
          table_[s * m + (e - 1)] = family.weight * tot.value();
        }
      }
    }
  }

  bool tabulated() const { return !table_.empty(); }

  /// W(s, e) for 0 <= s < e <= m (e == m is the sentinel end).
  double window(std::size_t s, std::size_t e) const {
    const std::size_t m = family_.grid.size();
    return table_[s * m + (e - 1)];
  }

  double operator()(const SequenceI& seq) const {
    ++evaluations_;
    if (tabulated()) {
      double total = 0;
      for (std::size_t j = 0; j + 1 < seq.length(); ++j) total += window(seq[j], seq[j + 1]);
      return std::sqrt(std::max(total, 0.0));
    }
    return oscillation_norm(family_, seq, p_);
  }

  std::size_t evaluations() const { return evaluations_; }

 private:
  const SampledFamily& family_;
  double p_;
  std::vector<double> table_;
  mutable std::size_t evaluations_ = 0;
};

/// Coordinate ascent over the entries of `idx` (entries in [0, m)), in place.
inline double coordinate_ascent(std::vector<std::size_t>& idx, std::size_t m, const OscillationObjective& obj) {
  double best = obj(SequenceI(idx, m));
  bool improved = true;
  while (improved) {
    improved = false;
    for (std::size_t e = 0; e < idx.size(); ++e) {
      const std::size_t lo = e == 0 ? 0 : idx[e - 1] + 1;
      const std::size_t hi = e + 1 == idx.size() ? m - 1 : idx[e + 1] - 1;
      const std::size_t keep = idx[e];
      std::size_t arg = keep;
      for (std::size_t c = lo; c <= hi; ++c) {
        if (c == keep) continue;
        idx[e] = c;
        const double v = obj(SequenceI(idx, m));
        if (v > best * (1 + 1e-15) + 1e-300) {
          best = v;
          arg = c;
          improved = true;
        }
      }
      idx[e] = arg;
    }
  }
  return best;
}

}  // namespace detail

/// Approximate sup over sequences of N+1 grid entries of the oscillation norm.
/// greedy: coordinate ascent from evenly spaced entries; random_restarts: greedy plus
/// `restarts` ascents from random sequences (seeds derived per restart); exhaustive:
/// every sequence (C(m, N+1) <= 1e6); block_dp: exact maximum by dynamic programming
/// over windows (p = 2 only).
inline SearchResult worst_sequence_search(const SampledFamily& family, double p, std::size_t n_blocks,
                                          SearchStrategy strategy, std::size_t restarts = 200,
                                          std::uint64_t seed = 0) {
  const std::size_t m = family.grid.size();
  const std::size_t len = n_blocks + 1;
  if (n_blocks < 1 || len > m) throw domain_error("worst_sequence_search: infeasible N for this grid");
  if (!(p >= 1)) throw domain_error("worst_sequence_search: p must be at least 1");
  detail::OscillationObjective obj(family, p);
  SearchResult res;

  if (strategy == SearchStrategy::exhaustive) {
    if (detail::binomial(m, len) > 1e6) throw budget_exceeded("worst_sequence_search: exhaustive search too large");
    std::vector<std::size_t> idx(len);
    std::iota(idx.begin(), idx.end(), 0);
    res.value = -1;
    while (true) {
      const SequenceI s(idx, m);
      const double v = obj(s);
      if (v > res.value) {
        res.value = v;
        res.sequence = s;
      }
      std::size_t i = len;
      while (i-- > 0 && idx[i] == m - len + i) {
      }
      if (i == std::size_t(-1)) break;
      ++idx[i];
      for (std::size_t j = i + 1; j < len; ++j) idx[j] = idx[j - 1] + 1;
    }
    res.evaluations = obj.evaluations();
    return res;
  }

  if (strategy == SearchStrategy::block_dp) {
    if (!obj.tabulated()) throw domain_error("worst_sequence_search: block-dp needs p = 2");
    // best[j][i]: max sum over sequences of j+1 entries ending at index i
    const double neg = -std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> best(len, std::vector<double>(m, neg));
    std::vector<std::vector<std::size_t>> from(len, std::vector<std::size_t>(m, 0));
    for (std::size_t i = 0; i < m; ++i) best[0][i] = 0;
    for (std::size_t j = 1; j < len; ++j)
      for (std::size_t i = j; i < m; ++i)
        for (std::size_t s = j - 1; s < i; ++s) {
          if (best[j - 1][s] == neg) continue;
          const double v = best[j - 1][s] + obj.window(s, i);
          if (v > best[j][i]) {
            best[j][i] = v;
            from[j][i] = s;
          }
        }
    std::size_t arg = len - 1;
    for (std::size_t i = len - 1; i < m; ++i)
      if (best[len - 1][i] > best[len - 1][arg]) arg = i;
    std::vector<std::size_t> idx(len);
    idx[len - 1] = arg;
    for (std::size_t j = len - 1; j > 0; --j) idx[j - 1] = from[j][idx[j]];
    res.sequence = SequenceI(idx, m);
    res.value = obj(res.sequence);
    res.evaluations = obj.evaluations();
    return res;
  }

  std::vector<std::size_t> idx(len);
  for (std::size_t i = 0; i < len; ++i) idx[i] = len == 1 ? 0 : (i * (m - 1)) / (len - 1);
  res.value = detail::coordinate_ascent(idx, m, obj);
  res.sequence = SequenceI(idx, m);

  if (strategy == SearchStrategy::random_restarts) {
    std::vector<std::size_t> pool(m);
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t r = 0; r < restarts; ++r) {
      std::mt19937_64 rng(detail::splitmix64(seed ^ detail::splitmix64(r + 1)));
      std::vector<std::size_t> cand;
      std::sample(pool.begin(), pool.end(), std::back_inserter(cand), len, rng);
      const double v = detail::coordinate_ascent(cand, m, obj);
      if (v > res.value) {
        res.value = v;
        res.sequence = SequenceI(cand, m);
      }
    }
  }
  res.evaluations = obj.evaluations();
  return res;
}

/// Subexponential nodes 2^{n^tau}.
inline double split_node(std::size_t n, double tau) { return std::pow(2.0, std::pow(double(n), tau)); }

struct ShortBlock {
  std::size_t n = 0;             // block [2^{n^tau}, 2^{(n+1)^tau})
  std::size_t first = 0, last = 0;  // grid index range [first, last)
  std::vector<double> variation;    // V^2 per spatial point
};

struct LongShortSplit {
  SampledFamily long_family;           // family restricted to the snapped nodes
  std::vector<std::size_t> node_index;  // grid index of each snapped node
  std::vector<ShortBlock> blocks;
  /// (sum_n V^2_n(x)^2)^{1/2} per spatial point.
  std::vector<double> short_aggregate;
};

/// Split a family into its values at the nodes 2^{n^tau} (snapped to the largest grid
/// time <= node, clamped to the first grid time) and the 2-variations inside each
/// block [2^{n^tau}, 2^{(n+1)^tau}) that meets the grid hull.
inline LongShortSplit long_short_split(const SampledFamily& family, double tau) {
  if (!(tau > 0 && tau < 1)) throw domain_error("long_short_split: tau must lie in (0, 1)");
  const auto& g = family.grid;
  if (g.size() == 0) throw domain_error("long_short_split: empty grid");
  LongShortSplit out;
  const double tmin = g[0], tmax = g[g.size() - 1];
  std::vector<std::size_t> nodes;
  for (std::size_t n = 0;; ++n) {
    const double lo = split_node(n, tau), hi = split_node(n + 1, tau);
    if (lo > tmax) break;
    if (hi <= tmin) continue;
    // grid indices inside [lo, hi)
    std::size_t first = std::size_t(std::lower_bound(g.times().begin(), g.times().end(), lo) - g.times().begin());
    std::size_t last = std::size_t(std::lower_bound(g.times().begin(), g.times().end(), hi) - g.times().begin());
    const bool leading = lo < tmin;
    if (leading) first = 0;
    // snapped node: largest grid time <= lo, or the first grid time
    std::size_t snap = 0;
    if (!leading) {
      auto it = std::upper_bound(g.times().begin(), g.times().end(), lo);
      snap = std::size_t(it - g.times().begin()) - 1;
    }
    if (nodes.empty() || nodes.back() != snap) nodes.push_back(snap);
    ShortBlock b;
    b.n = n;
    b.first = first;
    b.last = last;
    b.variation.assign(family.points, 0.0);
    if (last > first)
      for (std::size_t x = 0; x < family.points; ++x)
        b.variation[x] = variation_pointwise(family.at(x).subspan(first, last - first), 2.0);
    out.blocks.push_back(std::move(b));
  }
  std::vector<double> node_times;
  for (auto i : nodes) node_times.push_back(g[i]);
  out.node_index = nodes;
  out.long_family = SampledFamily(TruncationGrid(node_times), family.points, family.weight);
  for (std::size_t x = 0; x < family.points; ++x)
    for (std::size_t j = 0; j < nodes.size(); ++j) out.long_family.at(x)[j] = family.at(x)[nodes[j]];
  out.short_aggregate.assign(family.points, 0.0);
  for (std::size_t x = 0; x < family.points; ++x) {
    double s = 0;
    for (const auto& b : out.blocks) s += b.variation[x] * b.variation[x];
    out.short_aggregate[x] = std::sqrt(s);
  }
  return out;
}

struct SplitCheck {
  double oscillation = 0;     // worst oscillation norm of the full family
  double long_oscillation = 0;  // worst oscillation norm over node sequences
  double short_norm = 0;        // norm of the short-variation aggregate
  double ratio = 0;             // oscillation / (long + short)
};

/// Compare the worst oscillation with N blocks against the long/short bound.
/// Node sequences may have any length >= 2.
inline SplitCheck split_check(const SampledFamily& family, double tau, std::size_t n_blocks, double p,
                              SearchStrategy strategy = SearchStrategy::exhaustive) {
  SplitCheck c;
  const std::size_t m = family.grid.size();
  const std::size_t nb = std::min(n_blocks, m - 1);
  if (nb >= 1) c.oscillation = worst_sequence_search(family, p, nb, strategy).value;
  const LongShortSplit split = long_short_split(family, tau);
  const std::size_t nodes = split.long_family.grid.size();
  // block_dp is exact for p = 2 and avoids the exhaustive size cap on long node lists
  const SearchStrategy node_search = p == 2 ? SearchStrategy::block_dp : SearchStrategy::exhaustive;
  for (std::size_t b = 1; b < nodes; ++b)
    c.long_oscillation =
        std::max(c.long_oscillation, worst_sequence_search(split.long_family, p, b, node_search).value);
  c.short_norm = detail::weighted_lp(split.short_aggregate, p, family.weight);
  const double denom = c.long_oscillation + c.short_norm;
  c.ratio = denom > 0 ? c.oscillation / denom : 0.0;
  return c;
}

/// sum_{i=0}^{m} (sum_j |sum_{k in [j 2^i, (j+1) 2^i)} c_k|^2)^{1/2}; input zero-padded to 2^m.
inline double rademacher_menshov_rhs(std::span<const cplx> c) {
  std::size_t len = 1;
  int levels = 0;
  while (len < c.size()) {
    len <<= 1;
    ++levels;
  }
  std::vector<cplx> blocks(len, cplx{});
  std::copy(c.begin(), c.end(), blocks.begin());
  double total = 0;
  for (int i = 0; i <= levels; ++i) {
    double s = 0;
    for (const auto& b : blocks) s += std::norm(b);
    total += std::sqrt(s);
    if (i == levels) break;
    std::vector<cplx> next(blocks.size() / 2);
    for (std::size_t j = 0; j < next.size(); ++j) next[j] = blocks[2 * j] + blocks[2 * j + 1];
    blocks = std::move(next);
  }
  return total;
}

/// Partial sums S_0 = 0, S_n = c_0 + ... + c_{n-1}.
inline std::vector<cplx> partial_sums(std::span<const cplx> c) {
  std::vector<cplx> s(c.size() + 1, cplx{});
  for (std::size_t i = 0; i < c.size(); ++i) s[i + 1] = s[i] + c[i];
  return s;
}

}  // namespace radonlab
