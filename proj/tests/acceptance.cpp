// Acceptance runner: one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance 3 8        run criteria 3 and 8
//
// Exit status 0 when every selected criterion passes, 1 otherwise, 2 on bad arguments.

#include <gsl/gsl_sf_expint.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "radonlab/radonlab.hpp"

using namespace radonlab;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  // record a named statistic against a bound; failing any check fails the criterion
  void le(const std::string& what, double value, double bound) {
    const bool ok = value <= bound;
    pass = pass && ok;
    detail << what << '=' << value << (ok ? " <= " : " > ") << bound << "; ";
  }
  void ge(const std::string& what, double value, double bound) {
    const bool ok = value >= bound;
    pass = pass && ok;
    detail << what << '=' << value << (ok ? " >= " : " < ") << bound << "; ";
  }
  void require(const std::string& what, bool ok) {
    pass = pass && ok;
    if (!ok) detail << what << " violated; ";
  }
};

struct Criterion {
  int id;
  std::string name;
  double seconds;  // runtime limit
  std::function<void(Outcome&)> run;
};

const CZKernel& hilbert() {
  static const CZKernel h = make_hilbert_kernel();
  return h;
}

LatticeFunction random_function(const Box& box, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  LatticeFunction f(box);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = cplx(n01(rng), n01(rng));
  return f;
}

std::vector<cplx> random_values(std::size_t m, std::mt19937_64& rng, bool integer = false) {
  std::normal_distribution<double> n01;
  std::uniform_int_distribution<int> ui(-20, 20);
  std::vector<cplx> v(m);
  for (auto& z : v) z = integer ? cplx(ui(rng), ui(rng)) : cplx(n01(rng), n01(rng));
  return v;
}

std::vector<std::size_t> random_sequence(std::size_t m, std::mt19937_64& rng) {
  std::vector<std::size_t> all(m + 1);
  std::iota(all.begin(), all.end(), 0);
  std::shuffle(all.begin(), all.end(), rng);
  const std::size_t len = 2 + rng() % m;
  std::vector<std::size_t> idx(all.begin(), all.begin() + std::ptrdiff_t(len));
  std::sort(idx.begin(), idx.end());
  return idx;
}

bool report_passes(const Report& rep, Outcome& o) {
  for (const auto& r : rep.rows)
    if (r.tolerance) o.detail << r.statistic << '@' << r.scale << '=' << r.value << (r.pass ? " ok; " : " FAILED; ");
  if (!rep.complete) o.detail << "incomplete: " << rep.note << "; ";
  return rep.complete && rep.passed();
}

// ---------------------------------------------------------------- criteria

void integer_frequencies(Outcome& o) {
  const auto g = MultiIndexSet::univariate({3});
  double worst = 0;
  for (double t : {10.0, 100.0, 1000.0})
    for (int xi = -3; xi <= 3; ++xi)
      worst = std::max(worst, std::abs(exp_multiplier(std::vector<double>{double(xi)}, hilbert(), ConvexBody::max_ball(1), g, t)));
  o.le("max|m_t(xi)|", worst, 1e-10);
}

void closed_form(Outcome& o) {
  const auto g = MultiIndexSet::univariate({3});
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const double xi = (i % 2 ? -1.0 : 1.0) * std::pow(10.0, -3.0 + 4.0 * i / 99.0);
    const double t = std::pow(10.0, -0.5 + 1.3 * ((i * 37) % 100) / 99.0);
    const auto r = cont_multiplier(std::vector<double>{xi}, hilbert(), ConvexBody::max_ball(1), g, t);
    const cplx ref(0.0, (2.0 / 3.0) * gsl_sf_Si(2 * M_PI * xi * t * t * t));
    worst = std::max(worst, std::abs(r.value - ref));
  }
  o.le("max|Psi - i(2/3)Si|", worst, 1e-6);
}

void fft_direct(Outcome& o) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ut(1.0, 32.0);
  std::uniform_int_distribution<int> ur(0, 12);
  const auto g = MultiIndexSet::univariate({3});
  const auto iv = ConvexBody::max_ball(1);
  const std::vector<std::vector<int>> ge{{3}};
  double worst = 0, worst_oracle = 0;
  for (int n = 0; n < 50; ++n) {
    const double t = ut(rng);
    const auto f = random_function(Box(IntPoint{-ur(rng)}, IntPoint{ur(rng)}), rng);
    const auto s = make_stencil(hilbert(), iv, g, t);
    const auto fft = discrete_radon_fft(f, hilbert(), iv, g, t, required_padding(s));
    const auto direct = discrete_radon_direct(f, hilbert(), iv, g, t);
    if (fft.box().lo() != direct.box().lo() || fft.box().hi() != direct.box().hi()) o.require("matching boxes", false);
    worst = std::max(worst, max_abs_diff(fft, direct));
    if (n < 10) {
      const auto brute = oracle::radon(
          f, [](const IntPoint& y) { return cplx(1.0 / double(y[0])); },
          [t](const IntPoint& y) { return std::abs(double(y[0])) < t; }, 1, (long long)std::ceil(t), ge, direct.box());
      worst_oracle = std::max(worst_oracle, max_abs_diff(fft, brute));
    }
  }
  o.le("max|fft - direct|", worst, 1e-10);
  o.le("max|fft - brute force|", worst_oracle, 1e-10);
}

void diagonalization(Outcome& o) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ut(1.5, 6.0);
  std::uniform_int_distribution<int> ur(0, 8);
  const auto g = MultiIndexSet::univariate({3});
  const auto iv = ConvexBody::max_ball(1);
  double worst = 0;
  for (int n = 0; n < 20; ++n) {
    const double t = ut(rng);
    const auto f = random_function(Box(IntPoint{-ur(rng)}, IntPoint{ur(rng)}), rng);
    const auto s = make_stencil(hilbert(), iv, g, t);
    const auto h = discrete_radon_fft(f, hilbert(), iv, g, t, required_padding(s));
    const std::vector<std::size_t> dims{std::size_t(h.box().extent(0))};
    const auto hh = oracle::dft(h, dims), ff = oracle::dft(f, dims);
    for (std::size_t j = 0; j < dims[0]; ++j) {
      const std::vector<double> xi{double(j) / double(dims[0])};
      worst = std::max(worst, std::abs(hh[j] - exp_multiplier(xi, hilbert(), iv, g, t) * ff[j]));
    }
  }
  o.le("max|F(Hf) - m F(f)|", worst, 1e-9);
}

void gauss_decay(Outcome& o) {
  const auto g = MultiIndexSet::univariate({2});
  const auto fit = gauss_decay_fit(g, 101, true);
  o.le("|delta - 0.5|", std::abs(fit.delta - 0.5), 0.05);
  double mx = 0, oracle_gap = 0;
  for (const auto& row : fit.table) {
    mx = std::max(mx, row.max_abs);
    double brute = 0;
    for (long long a = 1; a < row.q; ++a) brute = std::max(brute, std::abs(oracle::gauss({a}, row.q, {{2}}, 1)));
    oracle_gap = std::max(oracle_gap, std::abs(brute - row.max_abs));
  }
  o.le("max|G|", mx, 1.0);
  o.le("max gap to brute-force sums", oracle_gap, 1e-12);
  const cplx g0 = gauss_sum(RationalPoint(IntPoint{0}, 1), g);
  o.require("G(0/1) == 1", g0 == cplx(1.0, 0.0));
}

void kernel_axioms(Outcome& o) {
  const std::vector<CZKernel> ks{make_hilbert_kernel(), make_riesz_type_kernel(2, 1), make_riesz_type_kernel(2, 2)};
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> lr(-3, 3);
  double size = 0, cancel = 0, drift = 0;
  for (const auto& k : ks) {
    const auto a = verify_size_and_holder(k, 100000, 11);
    const auto b = verify_size_and_holder(k, 200000, 11);
    size = std::max({size, a.max_size_ratio, b.max_size_ratio});
    drift = std::max(drift, std::abs(b.max_holder_ratio - a.max_holder_ratio) / b.max_holder_ratio);
    const ConvexBody omega = k.k() == 1 ? ConvexBody::max_ball(1) : ConvexBody::euclidean_ball(2);
    for (int n = 0; n < 100; ++n) {
      double r = std::pow(10.0, lr(rng)), big = std::pow(10.0, lr(rng));
      if (r > big) std::swap(r, big);
      if (big < 1.001 * r) big = 2 * r;
      cancel = std::max(cancel, verify_cancellation(k, omega, r, big, 1));
    }
  }
  o.le("max size ratio", size, 1 + 1e-12);
  o.le("max cancellation residual", cancel, 1e-13);
  o.le("Holder ratio drift", drift, 0.01);
}

void seminorm_suite(Outcome& o) {
  std::mt19937_64 rng(4);
  // oscillation <= 2-variation at every point of random families
  bool dominated = true;
  for (int n = 0; n < 10000; ++n) {
    const std::size_t m = 2 + rng() % 14, pts = 1 + rng() % 4;
    SampledFamily fam(TruncationGrid::log_spaced(1.0, 100.0, m), pts);
    std::normal_distribution<double> n01;
    for (auto& v : fam.values) v = cplx(n01(rng), n01(rng));
    const SequenceI s(random_sequence(m, rng), m);
    for (std::size_t x = 0; x < pts; ++x)
      dominated = dominated && oscillation_pointwise(fam.at(x), s) <= variation_pointwise(fam.at(x), 2) * (1 + 1e-14);
  }
  o.require("O <= V^2 pointwise", dominated);
  double dp_gap = 0;
  for (int n = 0; n < 200; ++n) {
    const auto a = random_values(1 + rng() % 14, rng);
    for (double r : {1.0, 2.0, 3.0}) {
      const double brute = oracle::variation(a, r);
      dp_gap = std::max(dp_gap, std::abs(variation_pointwise(a, r) - brute) / (1 + brute));
    }
  }
  o.le("DP vs exhaustive variation (rel)", dp_gap, 1e-12);
  bool exact = true;
  for (int n = 0; n < 1000; ++n) {
    const std::size_t m = 3 + rng() % 10;
    const auto a = random_values(m, rng, true);
    const SequenceI s(random_sequence(m, rng), m);
    const double base = oscillation_pointwise(a, s);
    auto scaled = a, shifted = a;
    const cplx shift(int(rng() % 50) - 25, int(rng() % 50) - 25);
    for (auto& v : scaled) v *= cplx(0, -4);
    for (auto& v : shifted) v += shift;
    exact = exact && oscillation_pointwise(scaled, s) == 4 * base && oscillation_pointwise(shifted, s) == base;
  }
  o.require("exact homogeneity and shift invariance", exact);
  double rm = 0;
  for (int n = 0; n < 10000; ++n) {
    const auto c = random_values(1 + rng() % 8, rng);
    rm = std::max(rm, variation_pointwise(partial_sums(c), 2) / rademacher_menshov_rhs(c));
  }
  o.le("max V^2(partial sums)/rhs", rm, 2.0);
}

void uniform_boundedness(Outcome& o) {
  const auto rep = run_experiment(make_config("probe-oscillation", {}));
  o.require("probe-oscillation rows", report_passes(rep, o));
}

void christ_cubes(Outcome& o) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1), lu(-6, 6);
  bool partition = true, nesting = true, inner = true;
  double outer_ratio = 0;
  for (const auto& degrees : {std::vector<int>{1, 2}, std::vector<int>{1, 2, 3}}) {
    const ChristCubeSystem s(DilationMatrix(MultiIndexSet::univariate(degrees)), -5, 5, 2);
    const std::size_t d = degrees.size();
    for (int n = 0; n < 10000; ++n) {
      RealPoint x(d);
      for (auto& v : x) v = u(rng) * std::pow(2.0, lu(rng));
      for (int k = -5; k <= 5; ++k) {
        const IntPoint m = s.cube_containing(x, k);
        for (std::size_t g = 0; g < d; ++g) {
          const double side = std::ldexp(1.0, k * degrees[g]);
          partition = partition && double(m[g]) * side <= x[g] && x[g] < double(m[g] + 1) * side;
        }
        if (k < 5) nesting = nesting && s.parent(m, k) == s.cube_containing(x, k + 1);
        const RealPoint c = s.center(m, k);
        RealPoint diff(d), y(d);
        for (std::size_t g = 0; g < d; ++g) diff[g] = x[g] - c[g];
        outer_ratio = std::max(outer_ratio, s.rho(diff) / (s.outer() * std::ldexp(1.0, k)));
        for (std::size_t g = 0; g < d; ++g)
          y[g] = c[g] + 0.999 * u(rng) * std::pow(s.inner() * std::ldexp(1.0, k), degrees[g]);
        inner = inner && s.cube_containing(y, k) == m;
      }
    }
  }
  o.require("partition and uniqueness", partition);
  o.require("nesting", nesting);
  o.require("inner ball inside cell", inner);
  o.le("rho(x - center) / (outer D^k)", outer_ratio, 1 + 1e-12);
}

void martingale_suite(Outcome& o) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  const std::vector<int> w{1, 2};
  const ChristCubeSystem s(DilationMatrix(MultiIndexSet::univariate(w)), -1, 2, 2);
  double idem = 0, tower = 0, contraction = 0;
  for (int n = 0; n < 100; ++n) {
    GridFunction f({0.0, 0.0}, {16, 64}, 0.25);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = cplx(n01(rng), n01(rng));
    for (int k = -1; k <= 2; ++k) {
      const auto e = conditional_expectation(f, k, s);
      const auto ee = conditional_expectation(e, k, s);
      for (std::size_t i = 0; i < f.size(); ++i) idem = std::max(idem, std::abs(ee[i] - e[i]));
      if (k < 2) {
        const auto a = conditional_expectation(e, k + 1, s), b = conditional_expectation(f, k + 1, s);
        for (std::size_t i = 0; i < f.size(); ++i) tower = std::max(tower, std::abs(a[i] - b[i]));
      }
      for (double p : {1.0, 2.0, std::numeric_limits<double>::infinity()})
        contraction = std::max(contraction, lp_norm(e, p) / lp_norm(f, p));
    }
  }
  o.le("idempotence error", idem, 1e-14);
  o.le("tower error", tower, 1e-14);
  o.le("max ||E f||_p/||f||_p", contraction, 1 + 1e-14);
  // probe against exhaustive search on explicitly averaged rows
  const std::vector<int> levels{-1, 0, 1, 2};
  double gap = 0;
  for (int n = 0; n < 4; ++n) {
    GridFunction f({0.0, 0.0}, {16, 64}, 0.25);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = cplx(n01(rng), n01(rng));
    std::vector<std::vector<oracle::cplx>> rows(f.size());
    for (int k : levels) {
      std::map<std::pair<long long, long long>, std::pair<cplx, int>> acc;
      auto key = [&](std::size_t i) {
        const auto x = f.node(i);
        return std::make_pair((long long)std::floor((x[0] + 0.125) / std::ldexp(1.0, k)),
                              (long long)std::floor((x[1] + 0.125) / std::ldexp(1.0, 2 * k)));
      };
      for (std::size_t i = 0; i < f.size(); ++i) {
        acc[key(i)].first += f[i];
        acc[key(i)].second += 1;
      }
      for (std::size_t i = 0; i < f.size(); ++i) rows[i].push_back(acc[key(i)].first / double(acc[key(i)].second));
    }
    for (std::size_t nb = 1; nb <= 3; ++nb) {
      const auto r = martingale_oscillation_probe(f, levels, s, 2.0, nb);
      const double brute = oracle::worst_oscillation(rows, 2.0, nb, f.cell_volume());
      gap = std::max(gap, std::abs(r.oscillation - brute) / brute);
    }
  }
  o.le("probe vs exhaustive (rel)", gap, 1e-12);
  const auto rep = run_experiment(make_config("martingale-probe", {}));
  o.require("martingale-probe rows", report_passes(rep, o));
}

void telescoping(Outcome& o) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n01;
  double worst = 0;
  for (int n = 0; n < 20; ++n) {
    const bool two_d = n % 2;
    const auto gamma = two_d ? MultiIndexSet(2, {{0, 1}, {1, 0}, {1, 1}}) : MultiIndexSet::univariate({1, 3});
    const auto kernel = two_d ? make_riesz_type_kernel(2, 1 + n % 4 / 2) : make_hilbert_kernel();
    const auto omega = two_d ? ConvexBody::euclidean_ball(2) : ConvexBody::max_ball(1);
    const int base = two_d ? 2 : 2 + n / 2 % 2;
    const int k_lo = n % 3 - 1, k_hi = std::min(k_lo + 2 + n / 3 % 2, two_d ? 3 : 2);
    LatticeFunction f(Box::centered(gamma.size(), 2));
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = cplx(n01(rng), n01(rng));
    const auto pieces = telescoping_pieces(f, kernel, omega, gamma, base, k_lo, k_hi);
    const auto top = discrete_radon_direct(f, kernel, omega, gamma, std::pow(double(base), k_hi));
    const auto bottom = discrete_radon_direct(f, kernel, omega, gamma, std::pow(double(base), k_lo));
    LatticeFunction sum(top.box());
    for (const auto& p : pieces) sum = sum + p;
    worst = std::max(worst, max_abs_diff(sum, top - bottom));
  }
  o.le("max|sum of pieces - (H_top - H_bottom)|", worst, 1e-12);
}

void projection_multiplier_checks(Outcome& o) {
  const IWConfig c;
  const auto g = MultiIndexSet::univariate({3});
  const std::int64_t n = 256;
  const ProjectionMultiplier pm(n, g, c, BumpEta(1));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u01(0, 1);
  const double scale = std::pow(2.0, std::pow(double(n), c.tau) * (3 - c.chi));
  const double reach = 1.5 * BumpEta(1).outer_radius();
  double lo = 1, hi = 0;
  int partial = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto& r = pm.centers()[std::size_t(i) % pm.centers().size()];
    const std::vector<double> xi{i % 2 ? u01(rng) : r.value()[0] + (2 * u01(rng) - 1) * reach / scale};
    const double v = pm(xi);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    partial += v > 0 && v < 1;
  }
  o.ge("min Pi", lo, 0.0);
  o.le("max Pi", hi, 1.0);
  o.ge("scan points in a transition band", partial, 1);
  bool centers = true;
  for (const auto& r : pm.centers()) centers = centers && pm(r.value()) == 1.0;
  o.require("Pi = 1 at every center", centers);
  // Sigma_{<=32} as the disjoint union of shells S = 2, 4, ..., 32
  std::set<RationalPoint> u;
  std::size_t total = 0;
  for (std::int64_t s = 2; s <= 32; s *= 2) {
    const auto sh = shell_fractions(s, g, c);
    total += sh.size();
    u.insert(sh.begin(), sh.end());
  }
  const auto all = iw_fractions(32, g, c);
  const std::set<RationalPoint> all_set(all.begin(), all.end());
  o.require("shells disjoint", total == u.size());
  o.require("union of shells == Sigma_{<=32}", u == all_set && all.size() == all_set.size());
  o.detail << "|Sigma_{<=32}|=" << all.size() << "; ";
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> c{
      {1, "integer-frequency vanishing", 1, integer_frequencies},
      {2, "closed-form multiplier", 30, closed_form},
      {3, "fft/direct equivalence", 30, fft_direct},
      {4, "multiplier diagonalization", 60, diagonalization},
      {5, "gauss decay", 60, gauss_decay},
      {6, "kernel axioms", 60, kernel_axioms},
      {7, "seminorm suite", 120, seminorm_suite},
      {8, "uniform boundedness probe", 600, uniform_boundedness},
      {9, "christ-cube axioms", 10, christ_cubes},
      {10, "martingale suite", 300, martingale_suite},
      {11, "telescoping identity", 30, telescoping},
      {12, "projection multiplier", 30, projection_multiplier_checks},
  };
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    char* end = nullptr;
    const long v = std::strtol(argv[i], &end, 10);
    if (*end != '\0' || v < 1 || v > long(criteria().size())) {
      std::cerr << "usage: acceptance [criterion id 1-" << criteria().size() << "]...\n";
      return 2;
    }
    selected.insert(int(v));
  }
  bool all = true;
  for (const auto& c : criteria()) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what() << "; ";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.le("seconds", secs, c.seconds);
    all = all && o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << ' ' << c.id << ' ' << c.name << ": " << o.detail.str() << std::endl;
  }
  return all ? 0 : 1;
}
