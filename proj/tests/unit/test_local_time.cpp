#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "loctime/chain.hpp"
#include "loctime/error.hpp"
#include "loctime/local_time.hpp"

using namespace loctime;

namespace {

std::vector<int> random_path(std::mt19937_64& gen, std::size_t n, int span = 1) {
  std::uniform_int_distribution<int> d(-span, span);
  std::vector<int> inc(n);
  for (auto& v : inc) v = d(gen);
  return inc;
}

// l_n sampled on a grid of spacing 1/1024; with √n = 4 every cell edge is a
// grid point, so the grid sup equals the true sup.
double grid_plain_modulus(const LocalTimeField& f, double h, double width) {
  const double step = 1.0 / 1024.0;
  std::vector<double> xs, vs;
  for (double x = -h; x <= h; x += step) {
    xs.push_back(x);
    vs.push_back(f.value(x));
  }
  double best = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = i + 1; j < xs.size() && xs[j] - xs[i] < width; ++j) {
      best = std::max(best, std::abs(vs[j] - vs[i]));
    }
  }
  return best;
}

// Every subset of the interior breakpoints, oscillation by sampling.
double brute_sparse_modulus(const LocalTimeField& f, double h, double delta) {
  const double root = f.root_n();
  std::vector<double> inner;
  for (long long k = static_cast<long long>(std::floor(-h * root)) - 1; k <= h * root + 1; ++k) {
    const double x = static_cast<double>(k) / root;
    if (x > -h && x < h) inner.push_back(x);
  }
  const double step = 1.0 / 1024.0;
  const auto osc = [&](double a, double b) {
    double lo = 1e300, hi = -1e300;
    for (double x = a; x < b; x += step) {
      lo = std::min(lo, f.value(x));
      hi = std::max(hi, f.value(x));
    }
    return hi - lo;
  };
  double best = 1e300;
  for (unsigned mask = 0; mask < (1u << inner.size()); ++mask) {
    std::vector<double> pts{-h};
    for (std::size_t i = 0; i < inner.size(); ++i) {
      if (mask & (1u << i)) pts.push_back(inner[i]);
    }
    pts.push_back(h);
    bool sparse = true;
    for (std::size_t i = 1; i < pts.size(); ++i) sparse = sparse && pts[i] - pts[i - 1] > delta;
    if (!sparse) continue;
    double worst = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) worst = std::max(worst, osc(pts[i - 1], pts[i]));
    best = std::min(best, worst);
  }
  return best;
}

}  // namespace

TEST(LocalTimeField, SingleStep) {
  const std::vector<int> inc{1};
  const auto f = local_time_field(inc);
  EXPECT_EQ(f.count(0), 1u);
  EXPECT_EQ(f.count(1), 1u);
  EXPECT_DOUBLE_EQ(f.value(0.0), 1.0);
  EXPECT_DOUBLE_EQ(f.value(1.0), 1.0);
  EXPECT_DOUBLE_EQ(f.value(-0.5), 0.0);
}

TEST(LocalTimeField, LazyPath) {
  const std::vector<int> inc{0, 0, 0, 0};
  const auto f = local_time_field(inc);
  EXPECT_EQ(f.count(0), 5u);
  EXPECT_DOUBLE_EQ(f.value(0.0), 2.5);
  EXPECT_DOUBLE_EQ(f.value(0.49), 2.5);
  EXPECT_DOUBLE_EQ(f.value(0.5), 0.0);
  EXPECT_DOUBLE_EQ(f.value(-0.01), 0.0);  // floor, not truncation
  EXPECT_THROW(local_time_field(std::vector<int>{}), Error);
}

TEST(LocalTimeField, ConservationAndSupport) {
  std::mt19937_64 gen(1);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(trial) * 7;
    const auto inc = random_path(gen, n, 2);
    const auto f = local_time_field(inc);
    EXPECT_EQ(f.total(), n + 1);
    EXPECT_GE(f.min_level, -2 * static_cast<long long>(n));
    EXPECT_LE(f.max_level(), 2 * static_cast<long long>(n));
    long long s = 0;
    for (int v : inc) s += v;
    EXPECT_EQ(f.final_position, s);
  }
}

TEST(Occupation, WholeRangeAndEmptyRange) {
  std::mt19937_64 gen(2);
  const auto inc = random_path(gen, 100);
  const auto f = local_time_field(inc);
  const double r = f.root_n();
  const double a = static_cast<double>(f.min_level - 1) / r;
  const double b = static_cast<double>(f.max_level() + 2) / r;
  const auto all = occupation(f, a, b);
  EXPECT_DOUBLE_EQ(all.nu, 1.0);
  EXPECT_NEAR(all.integral, 101.0 / 100.0, 1e-12);
  EXPECT_TRUE(all.within_bound());

  const auto none = occupation(f, b + 1.0, b + 2.0);
  EXPECT_EQ(none.nu, 0.0);
  EXPECT_EQ(none.integral, 0.0);
  EXPECT_THROW(occupation(f, 1.0, 1.0), Error);
}

TEST(Occupation, NuIsLeftRiemannSumAndStripBoundHolds) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 50 + static_cast<std::size_t>(trial);
    const auto inc = random_path(gen, n);
    const auto f = local_time_field(inc);
    double a = u(gen), b = u(gen);
    if (a > b) std::swap(a, b);
    if (a == b) continue;
    const auto r = occupation(inc, a, b);
    // integer count of k = 0..n-1 with a <= S_k/√n < b
    long long s = 0;
    std::size_t hits = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double v = static_cast<double>(s) / f.root_n();
      hits += a <= v && v < b;
      s += inc[k];
    }
    EXPECT_EQ(r.nu, static_cast<double>(hits) / static_cast<double>(n));
    EXPECT_TRUE(r.within_bound()) << "a=" << a << " b=" << b;
    // integral by fine sampling
    double fine = 0.0;
    const int m = 200000;
    for (int i = 0; i < m; ++i) fine += f.value(a + (b - a) * (i + 0.5) / m);
    fine *= (b - a) / m;
    EXPECT_NEAR(r.integral, fine, 2e-4 * std::max(1.0, fine));
  }
}

TEST(Modulus, ConstantField) {
  const std::vector<int> inc(16, 0);
  const auto f = local_time_field(inc);
  // the walk sits at 0, so l is constant away from the single occupied cell
  const auto r = modulus(f, 0.5, 0.1);
  EXPECT_LE(r.omega_prime, r.omega);
  LocalTimeField flat;
  flat.n = 16;
  flat.min_level = -20;
  flat.counts.assign(41, 3);
  const auto c = modulus(flat, 2.0, 0.2);
  EXPECT_EQ(c.omega, 0.0);
  EXPECT_EQ(c.omega_prime, 0.0);
}

TEST(Modulus, SingleInteriorJump) {
  // l = 1 on [-2, 0), 3 on [0, 2) with √n = 4
  LocalTimeField f;
  f.n = 16;
  f.min_level = -12;
  f.counts.assign(24, 4);
  for (long long k = 0; k < 12; ++k) f.counts[static_cast<std::size_t>(k + 12)] = 12;
  const auto r = modulus(f, 2.0, 0.3);
  EXPECT_DOUBLE_EQ(r.omega, 2.0);
  EXPECT_DOUBLE_EQ(r.omega_prime, 0.0);
  EXPECT_THROW(modulus(f, 2.0, 0.5), Error);
  EXPECT_THROW(modulus(f, 0.4, 0.1), Error);
}

TEST(Modulus, AgreesWithBruteForce) {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 60; ++trial) {
    const auto inc = random_path(gen, 16);
    const auto f = local_time_field(inc);
    for (const double delta : {0.1, 0.2, 0.3, 0.45}) {
      const double h = 1.0;
      EXPECT_DOUBLE_EQ(plain_modulus(f, h, 2.0 * delta), grid_plain_modulus(f, h, 2.0 * delta));
      EXPECT_DOUBLE_EQ(sparse_modulus(f, h, delta), brute_sparse_modulus(f, h, delta));
      const auto r = modulus(f, h, delta);
      EXPECT_LE(r.omega_prime, r.omega);
    }
    // h off the lattice
    EXPECT_DOUBLE_EQ(sparse_modulus(f, 0.9, 0.2), brute_sparse_modulus(f, 0.9, 0.2));
    EXPECT_DOUBLE_EQ(plain_modulus(f, 0.9, 0.3), grid_plain_modulus(f, 0.9, 0.3));
  }
}

TEST(Modulus, PathwiseInequalityOnLongPaths) {
  const auto lazy = models::lazy_walk();
  const auto batch = sample_paths(lazy, 2500, 200, 17);
  for (std::size_t i = 0; i < batch.count; ++i) {
    const auto f = local_time_field(batch.path(i));
    for (const double d : {0.2, 0.1, 0.05, 0.025}) {
      const auto r = modulus(f, 2.0, d);
      EXPECT_LE(r.omega_prime, r.omega);
    }
    // ω' is nondecreasing in δ
    EXPECT_LE(sparse_modulus(f, 2.0, 0.05), sparse_modulus(f, 2.0, 0.2));
  }
}

TEST(SupOnWindow, MatchesMaxCount) {
  const std::vector<int> inc{0, 0, 0, 1, 1, -1, 0};
  const auto f = local_time_field(inc);
  EXPECT_DOUBLE_EQ(sup_on_window(f, 1.0), 4.0 / std::sqrt(7.0));
}

TEST(MomentStatistics, PreconditionsAndDeterminism) {
  const auto lazy = models::lazy_walk();
  EXPECT_THROW(moment_statistics(lazy, 100, 1, 1, 10000, 1), Error);
  EXPECT_THROW(moment_statistics(lazy, 100, 0, 1, 100, 1), Error);
  const auto a = moment_statistics(lazy, 200, 0, 1, 3000, 9, kDefaultEpsGrid, 1, 1000);
  const auto b = moment_statistics(lazy, 200, 0, 1, 3000, 9, kDefaultEpsGrid, 3, 1000);
  EXPECT_EQ(a.m6, b.m6);
  EXPECT_EQ(a.m6_stderr, b.m6_stderr);
  ASSERT_EQ(a.tails.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(a.tails[i].prob, b.tails[i].prob);
  const double n = 200.0;
  EXPECT_NEAR(a.rhs, std::pow(std::sqrt(n), 3) + n * n * std::log(n) + n * n * std::log(n) * std::log(n), 1e-6);
  EXPECT_GE(a.tails[0].prob, a.tails[1].prob);
  EXPECT_GE(a.tails[1].prob, a.tails[2].prob);
}

TEST(MomentStatistics, AgreesWithBatchRecount) {
  const auto lazy = models::lazy_walk();
  const auto st = moment_statistics(lazy, 150, 0, 2, 500, 21, kDefaultEpsGrid, 1, 1);
  const auto batch = sample_paths(lazy, 150, 500, 21);
  double m6 = 0.0;
  for (std::size_t i = 0; i < batch.count; ++i) {
    const auto f = local_time_field(batch.path(i));
    const double d = static_cast<double>(f.count(0)) - static_cast<double>(f.count(2));
    m6 += std::pow(d, 6);
  }
  EXPECT_NEAR(st.m6, m6 / 500.0, 1e-9 * st.m6);
}

TEST(LevelSamples, SortedAndDeterministic) {
  const auto lazy = models::lazy_walk();
  const auto a = level_samples(lazy, 400, 0.0, 2000, 5, 1);
  const auto b = level_samples(lazy, 400, 0.0, 2000, 5, 2);
  EXPECT_EQ(a, b);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
  EXPECT_GT(a.front(), 0.0);  // level 0 is always visited at k = 0
}

TEST(Experiments, OccupationAndModulusSummaries) {
  const auto lazy = models::lazy_walk();
  const std::vector<std::pair<double, double>> iv{{-0.5, 0.5}, {0.0, 1.0}, {-1.3, 0.2}};
  const auto occ = occupation_experiment(lazy, 900, iv, 300, 8);
  EXPECT_EQ(occ.violations, 0u);
  EXPECT_EQ(occ.mean_abs_difference.size(), 3u);
  const std::vector<double> deltas{0.2, 0.1, 0.05};
  const std::vector<double> sups{1.0, 4.0};
  const auto mod = modulus_experiment(lazy, 900, 2.0, deltas, 0.5, sups, 300, 8);
  EXPECT_EQ(mod.violations, 0u);
  EXPECT_GE(mod.prob_exceed[0], mod.prob_exceed[1]);
  EXPECT_GE(mod.prob_exceed[1], mod.prob_exceed[2]);
  EXPECT_GE(mod.prob_sup_exceed[0], mod.prob_sup_exceed[1]);
}

TEST(Export, FieldCsvAndMomentsJson) {
  const std::vector<int> inc{1, -1};
  EXPECT_EQ(field_to_csv(local_time_field(inc)), "k,count\n0,2\n1,1\n");
  MomentStatistics st;
  st.n = 4;
  st.tails.push_back({0.5, 0.25, 0.125});
  const auto json = moments_to_json(st);
  for (const char* key : {"\"n\"", "\"x\"", "\"y\"", "\"m6\"", "\"rhs\"", "\"ratio\"", "\"tails\"",
                          "\"eps\"", "\"prob\"", "\"stderr\""}) {
    EXPECT_NE(json.find(key), std::string::npos) << key;
  }
}
