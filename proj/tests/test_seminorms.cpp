#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "radonlab/seminorms.hpp"

using namespace radonlab;

namespace {

std::vector<cplx> random_values(std::size_t m, std::mt19937_64& rng, bool integer = false) {
  std::normal_distribution<double> n01;
  std::uniform_int_distribution<int> ui(-20, 20);
  std::vector<cplx> v(m);
  for (auto& z : v) z = integer ? cplx(ui(rng), ui(rng)) : cplx(n01(rng), n01(rng));
  return v;
}

std::vector<std::size_t> random_sequence(std::size_t m, std::mt19937_64& rng, bool sentinel_ok = true) {
  std::vector<std::size_t> all(sentinel_ok ? m + 1 : m);
  std::iota(all.begin(), all.end(), 0);
  std::shuffle(all.begin(), all.end(), rng);
  const std::size_t len = 2 + rng() % (all.size() - 1);
  std::vector<std::size_t> idx(all.begin(), all.begin() + std::ptrdiff_t(std::min(len, all.size())));
  std::sort(idx.begin(), idx.end());
  return idx;
}

SampledFamily random_family(std::size_t points, std::size_t m, std::mt19937_64& rng, double w = 1.0) {
  SampledFamily f(TruncationGrid::log_spaced(1.0, 100.0, m), points, w);
  std::normal_distribution<double> n01;
  for (auto& v : f.values) v = cplx(n01(rng), n01(rng));
  return f;
}

std::vector<std::vector<oracle::cplx>> rows(const SampledFamily& f) {
  std::vector<std::vector<oracle::cplx>> r;
  for (std::size_t x = 0; x < f.points; ++x) r.emplace_back(f.at(x).begin(), f.at(x).end());
  return r;
}

}  // namespace

TEST(Seminorms, GridAndSequenceValidation) {
  EXPECT_THROW(TruncationGrid(std::vector<double>{}), domain_error);
  EXPECT_THROW(TruncationGrid(std::vector<double>{1, 1}), domain_error);
  EXPECT_THROW(TruncationGrid(std::vector<double>{0, 1}), domain_error);
  const TruncationGrid g({1, 2, 3, 4});
  EXPECT_THROW(SequenceI({1}, 4), domain_error);
  EXPECT_THROW(SequenceI({2, 1}, 4), domain_error);
  EXPECT_THROW(SequenceI({4, 4}, 4), domain_error);
  EXPECT_NO_THROW(SequenceI({0, 4}, 4));
  EXPECT_THROW(SequenceI::from_times(g, std::vector<double>{1, 2.5}), domain_error);
  EXPECT_EQ(SequenceI::from_times(g, std::vector<double>{1, 3}), SequenceI({0, 2}, 4));
  const auto l = TruncationGrid::log_spaced(2, 512, 9);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(l[i], std::pow(2.0, double(i + 1)), 1e-12);
}

TEST(Seminorms, OscillationExamples) {
  const std::vector<cplx> a{1, 2, 3, 4};
  EXPECT_EQ(oscillation_pointwise(a, SequenceI({0, 2}, 4)), 1.0);
  const std::vector<cplx> c(6, cplx(2, -1));
  EXPECT_EQ(oscillation_pointwise(c, SequenceI({0, 3, 5}, 6)), 0.0);
  // consecutive entries give singleton windows
  EXPECT_EQ(oscillation_pointwise(a, SequenceI({0, 1, 2, 3}, 4)), 0.0);
  EXPECT_EQ(oscillation_pointwise(a, SequenceI({0, 4}, 4)), 3.0);
  EXPECT_THROW(oscillation_pointwise(std::vector<cplx>(3), SequenceI({0, 4}, 4)), domain_error);
  SampledFamily z(TruncationGrid({1, 2, 3}), 5);
  EXPECT_EQ(oscillation_norm(z, SequenceI({0, 2}, 3), 2), 0.0);
  EXPECT_THROW(oscillation_norm(z, SequenceI({0, 2}, 3), 0.5), domain_error);
}

TEST(Seminorms, OscillationMatchesDefinition) {
  std::mt19937_64 rng(1);
  for (int n = 0; n < 2000; ++n) {
    const std::size_t m = 2 + rng() % 12;
    const auto a = random_values(m, rng);
    const auto idx = random_sequence(m, rng);
    EXPECT_NEAR(oscillation_pointwise(a, SequenceI(idx, m)), oracle::oscillation(a, idx), 1e-12);
  }
}

TEST(Seminorms, OscillationNormWeighting) {
  std::mt19937_64 rng(2);
  const auto f = random_family(7, 10, rng, 0.25);
  const SequenceI s({1, 4, 9}, 10);
  for (double p : {1.0, 2.0, 3.0}) {
    double acc = 0;
    for (std::size_t x = 0; x < 7; ++x) acc += std::pow(oscillation_pointwise(f.at(x), s), p);
    EXPECT_NEAR(oscillation_norm(f, s, p), std::pow(0.25 * acc, 1 / p), 1e-12);
  }
  double mx = 0;
  for (std::size_t x = 0; x < 7; ++x) mx = std::max(mx, oscillation_pointwise(f.at(x), s));
  EXPECT_EQ(oscillation_norm(f, s, std::numeric_limits<double>::infinity()), mx);
}

TEST(Seminorms, VariationExamples) {
  const std::vector<cplx> a{0, 1, 0, 1};
  EXPECT_NEAR(variation_pointwise(a, 2), std::sqrt(3.0), 1e-15);
  EXPECT_EQ(variation_pointwise(std::vector<cplx>(5, cplx(3)), 2), 0.0);
  EXPECT_EQ(variation_pointwise(std::vector<cplx>{cplx(7)}, 2), 0.0);
  EXPECT_THROW(variation_pointwise(a, 0.5), domain_error);
  // monotone real values: V^1 is the total increase
  const std::vector<cplx> mono{0, 0.5, 2, 2.25, 4};
  EXPECT_NEAR(variation_pointwise(mono, 1), 4.0, 1e-15);
}

TEST(Seminorms, VariationMatchesExhaustiveSubsets) {
  std::mt19937_64 rng(3);
  for (int n = 0; n < 200; ++n) {
    const std::size_t m = 1 + rng() % 14;
    const auto a = random_values(m, rng);
    for (double r : {1.0, 2.0, 3.0}) {
      const double brute = oracle::variation(a, r);
      EXPECT_NEAR(variation_pointwise(a, r), brute, 1e-12 * (1 + brute)) << m << " " << r;
    }
  }
}

TEST(Seminorms, OscillationDominatedByTwoVariation) {
  std::mt19937_64 rng(4);
  for (int n = 0; n < 10000; ++n) {
    const std::size_t m = 2 + rng() % 14;
    const auto a = random_values(m, rng);
    const SequenceI s(random_sequence(m, rng), m);
    EXPECT_LE(oscillation_pointwise(a, s), variation_pointwise(a, 2) * (1 + 1e-14));
  }
}

TEST(Seminorms, RefinementByAppendingNeverDecreases) {
  std::mt19937_64 rng(5);
  for (int n = 0; n < 2000; ++n) {
    const std::size_t m = 4 + rng() % 10;
    const auto a = random_values(m, rng);
    auto idx = random_sequence(m, rng, false);
    if (idx.back() + 1 >= m + 1) continue;
    const double before = oscillation_pointwise(a, SequenceI(idx, m));
    idx.push_back(idx.back() + 1 + rng() % (m - idx.back()));
    EXPECT_GE(oscillation_pointwise(a, SequenceI(idx, m)), before);
  }
}

TEST(Seminorms, HomogeneityAndShiftInvarianceExact) {
  std::mt19937_64 rng(6);
  for (int n = 0; n < 1000; ++n) {
    const std::size_t m = 3 + rng() % 10;
    const auto a = random_values(m, rng, true);
    const SequenceI s(random_sequence(m, rng), m);
    const double base = oscillation_pointwise(a, s);
    auto scaled = a, shifted = a;
    const cplx c(0, -4), shift(int(rng() % 50) - 25, int(rng() % 50) - 25);
    for (auto& v : scaled) v *= c;
    for (auto& v : shifted) v += shift;
    EXPECT_EQ(oscillation_pointwise(scaled, s), 4 * base);
    EXPECT_EQ(oscillation_pointwise(shifted, s), base);
  }
}

TEST(Seminorms, SingleWindowToSentinelIsSupDeviation) {
  std::mt19937_64 rng(7);
  for (int n = 0; n < 500; ++n) {
    const std::size_t m = 1 + rng() % 16;
    const auto a = random_values(m, rng);
    double sup = 0;
    for (const auto& v : a) sup = std::max(sup, std::abs(v - a[0]));
    EXPECT_EQ(oscillation_pointwise(a, SequenceI::with_tail_sentinel(0, m)), sup);
  }
}

TEST(Seminorms, MaximalFunction) {
  SampledFamily f(TruncationGrid({1, 2, 4}), 2);
  for (auto& v : f.values) v = cplx(3, 4);
  for (double v : maximal_function(f)) EXPECT_EQ(v, 5.0);
  SampledFamily z(TruncationGrid({1, 2, 4}), 2);
  for (double v : maximal_function(z)) EXPECT_EQ(v, 0.0);
}

TEST(Seminorms, FullLengthSequenceIsUnique) {
  std::mt19937_64 rng(8);
  const auto f = random_family(4, 6, rng);
  for (auto st : {SearchStrategy::greedy, SearchStrategy::random_restarts, SearchStrategy::exhaustive,
                  SearchStrategy::block_dp}) {
    const auto r = worst_sequence_search(f, 2, 5, st);
    EXPECT_EQ(r.sequence, SequenceI({0, 1, 2, 3, 4, 5}, 6));
    EXPECT_EQ(r.value, oscillation_norm(f, r.sequence, 2));
  }
  EXPECT_THROW(worst_sequence_search(f, 2, 6, SearchStrategy::exhaustive), domain_error);
  EXPECT_THROW(parse_strategy("annealing"), domain_error);
  EXPECT_EQ(parse_strategy("block-dp"), SearchStrategy::block_dp);
}

TEST(Seminorms, SearchStrategiesAgainstBruteForce) {
  std::mt19937_64 rng(9);
  for (int n = 0; n < 30; ++n) {
    const std::size_t m = 5 + rng() % 6, nb = 1 + rng() % 3;
    const auto f = random_family(3, m, rng, 0.5);
    for (double p : {1.0, 2.0, 3.0}) {
      std::vector<std::size_t> arg;
      const double brute = oracle::worst_oscillation(rows(f), p, nb, 0.5, &arg);
      const auto ex = worst_sequence_search(f, p, nb, SearchStrategy::exhaustive);
      EXPECT_NEAR(ex.value, brute, 1e-12 * brute);
      EXPECT_NEAR(oscillation_norm(f, ex.sequence, p), ex.value, 1e-12 * brute);
      for (auto st : {SearchStrategy::greedy, SearchStrategy::random_restarts}) {
        const auto h = worst_sequence_search(f, p, nb, st, 50, 3);
        EXPECT_LE(h.value, brute * (1 + 1e-12));
        EXPECT_NEAR(oscillation_norm(f, h.sequence, p), h.value, 1e-12 * brute);
      }
      if (p == 2.0) EXPECT_NEAR(worst_sequence_search(f, p, nb, SearchStrategy::block_dp).value, brute, 1e-12 * brute);
    }
  }
}

TEST(Seminorms, MonotoneFamilyOptimum) {
  // a_t = t on 8 points, N = 2: windows [i0, i1), [i1, i2) contribute (i1 - 1 - i0)^2 + (i2 - 1 - i1)^2,
  // maximal at i0 = 0, i2 = 7 with one window a singleton: 0 + 5^2
  SampledFamily f(TruncationGrid::log_spaced(1, 8, 8), 1);
  for (std::size_t i = 0; i < 8; ++i) f.values[i] = double(i);
  const auto r = worst_sequence_search(f, 2, 2, SearchStrategy::exhaustive);
  EXPECT_DOUBLE_EQ(r.value, 5.0);
  EXPECT_TRUE(r.sequence == SequenceI({0, 1, 7}, 8) || r.sequence == SequenceI({0, 6, 7}, 8));
  EXPECT_DOUBLE_EQ(oracle::worst_oscillation(rows(f), 2, 2, 1.0), 5.0);
  // the equally spaced sequence is not optimal
  EXPECT_LT(oscillation_norm(f, SequenceI({0, 3, 7}, 8), 2), r.value);
}

TEST(Seminorms, SearchIsDeterministicForASeed) {
  std::mt19937_64 rng(10);
  const auto f = random_family(5, 24, rng);
  const auto a = worst_sequence_search(f, 2, 4, SearchStrategy::random_restarts, 40, 99);
  const auto b = worst_sequence_search(f, 2, 4, SearchStrategy::random_restarts, 40, 99);
  EXPECT_EQ(a.sequence, b.sequence);
  EXPECT_EQ(a.value, b.value);
  EXPECT_GE(a.value, worst_sequence_search(f, 2, 4, SearchStrategy::greedy).value);
}

TEST(Seminorms, LongShortSplitConstantFamily) {
  SampledFamily f(TruncationGrid::log_spaced(1, 1000, 30), 3);
  for (auto& v : f.values) v = cplx(-2, 1);
  const auto s = long_short_split(f, 0.5);
  for (const auto& b : s.blocks)
    for (double v : b.variation) EXPECT_EQ(v, 0.0);
  for (double v : s.short_aggregate) EXPECT_EQ(v, 0.0);
  const auto c = split_check(f, 0.5, 3, 2);
  EXPECT_EQ(c.long_oscillation, 0.0);
  EXPECT_EQ(c.oscillation, 0.0);
  EXPECT_THROW(long_short_split(f, 1.0), domain_error);
}

TEST(Seminorms, LongShortSplitStructure) {
  std::mt19937_64 rng(11);
  const auto f = random_family(2, 40, rng);
  const double tau = 0.5;
  const auto s = long_short_split(f, tau);
  // node times are snapped grid members and blocks tile the grid
  std::size_t covered = 0;
  for (const auto& b : s.blocks) {
    EXPECT_LE(b.first, b.last);
    if (b.last > b.first) {
      EXPECT_EQ(b.first, covered);
      covered = b.last;
    }
  }
  EXPECT_EQ(covered, f.grid.size());
  for (std::size_t j = 0; j < s.node_index.size(); ++j) {
    EXPECT_EQ(s.long_family.grid[j], f.grid[s.node_index[j]]);
    for (std::size_t x = 0; x < 2; ++x) EXPECT_EQ(s.long_family.at(x)[j], f.at(x)[s.node_index[j]]);
  }
}

TEST(Seminorms, GridInsideOneBlock) {
  // with tau = 1/2 the block [2^2, 2^sqrt5) ~ [4, 4.71) holds the whole grid
  std::mt19937_64 rng(12);
  for (int n = 0; n < 200; ++n) {
    SampledFamily f(TruncationGrid::log_spaced(4.05, 4.6, 8), 1);
    std::normal_distribution<double> n01;
    for (auto& v : f.values) v = cplx(n01(rng), n01(rng));
    const auto s = long_short_split(f, 0.5);
    EXPECT_EQ(s.long_family.grid.size(), 1u);
    const double full = worst_sequence_search(f, 2, 7, SearchStrategy::exhaustive).value;
    double worst = 0;
    for (std::size_t nb = 1; nb <= 7; ++nb)
      worst = std::max(worst, worst_sequence_search(f, 2, nb, SearchStrategy::exhaustive).value);
    EXPECT_LE(std::max(full, worst), std::sqrt(2.0) * s.short_aggregate[0] * (1 + 1e-12));
  }
}

TEST(Seminorms, RademacherMenshovBlocking) {
  const std::vector<cplx> single{0, 0, cplx(0, 3), 0, 0, 0, 0, 0};
  EXPECT_NEAR(rademacher_menshov_rhs(single), 4 * 3.0, 1e-14);
  EXPECT_NEAR(rademacher_menshov_rhs(std::vector<cplx>{cplx(2)}), 2.0, 1e-15);
  const auto ps = partial_sums(std::vector<cplx>{1, 2, 3});
  EXPECT_EQ(ps, (std::vector<cplx>{0, 1, 3, 6}));
  std::mt19937_64 rng(13);
  double worst = 0;
  for (int n = 0; n < 10000; ++n) {
    const std::size_t m = 1 + rng() % 8;
    const auto c = random_values(m, rng);
    const double ratio = variation_pointwise(partial_sums(c), 2) / rademacher_menshov_rhs(c);
    worst = std::max(worst, ratio);
  }
  EXPECT_LE(worst, 2.0);
}
