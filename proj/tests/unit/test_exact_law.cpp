#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "loctime/chain.hpp"
#include "loctime/error.hpp"
#include "loctime/exact_law.hpp"

using namespace loctime;

namespace {

// Enumerates every state sequence X_0..X_{n-1}; S_n = Σ φ(X_k).
std::map<long long, double> enumerate_law(const MarkovShift& shift, int n) {
  std::map<long long, double> law;
  const int m = static_cast<int>(shift.size());
  std::vector<int> seq(static_cast<std::size_t>(n), 0);
  while (true) {
    double p = shift.stationary()(seq[0]);
    long long s = shift.observable()[static_cast<std::size_t>(seq[0])];
    for (int k = 1; k < n; ++k) {
      p *= shift.transition()(seq[k - 1], seq[k]);
      s += shift.observable()[static_cast<std::size_t>(seq[k])];
    }
    law[s] += p;
    int k = n - 1;
    while (k >= 0 && ++seq[static_cast<std::size_t>(k)] == m) seq[static_cast<std::size_t>(k--)] = 0;
    if (k < 0) break;
  }
  return law;
}

}  // namespace

TEST(ExactLaw, LazySmallN) {
  const auto lazy = models::lazy_walk();
  const auto one = exact_law(lazy, 1);
  EXPECT_DOUBLE_EQ(one.marginal(0), 0.5);
  EXPECT_DOUBLE_EQ(one.marginal(1), 0.25);
  EXPECT_DOUBLE_EQ(one.marginal(-1), 0.25);
  EXPECT_DOUBLE_EQ(exact_law(lazy, 2).marginal(0), 0.375);
  EXPECT_EQ(exact_law(lazy, 2).marginal(7), 0.0);
}

TEST(ExactLaw, MatchesPathEnumeration) {
  for (const auto& shift : {models::circulant_walk(), models::sticky_walk(0.3, 0.4)}) {
    for (int n = 1; n <= 8; ++n) {
      const auto law = exact_law(shift, static_cast<std::size_t>(n));
      const auto oracle = enumerate_law(shift, n);
      for (long long x = law.support_min; x <= law.support_max; ++x) {
        const auto it = oracle.find(x);
        EXPECT_NEAR(law.marginal(x), it == oracle.end() ? 0.0 : it->second, 1e-15);
      }
    }
  }
}

TEST(ExactLaw, ConservationAndMoments) {
  const auto circ = models::circulant_walk();
  LawStepper stepper(circ);
  for (std::size_t n = 1; n <= 300; ++n) {
    stepper.step();
    EXPECT_NEAR(stepper.law().total_mass(), 1.0, 1e-12);
    EXPECT_NEAR(stepper.law().mean(), 0.0, 1e-11);
  }
}

TEST(ExactLaw, SymmetricChainGivesMirrorTable) {
  const auto lazy = models::lazy_walk();
  const auto law = exact_law(lazy, 200);
  for (long long x = 0; x <= 200; ++x) EXPECT_EQ(law.marginal(x), law.marginal(-x));
}

TEST(ExactLaw, MemoryCap) {
  const auto lazy = models::lazy_walk();
  LawOptions options;
  options.memory_cap = 100;
  try {
    exact_law(lazy, 1000, options);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MemoryCap);
  }
}

TEST(Inversion, AgreesWithDpOnNonIidChain) {
  const auto circ = models::circulant_walk();
  const auto rows = inversion_marginals_upto(circ, 64, default_inversion_points(circ, 64));
  LawStepper stepper(circ);
  for (std::size_t n = 1; n <= 64; ++n) {
    stepper.step();
    const auto dp = stepper.law().marginals();
    ASSERT_EQ(dp.size(), rows[n - 1].size());
    for (std::size_t i = 0; i < dp.size(); ++i) EXPECT_NEAR(dp[i], rows[n - 1][i], 1e-13);
  }
}

TEST(Inversion, PointQueries) {
  const auto lazy = models::lazy_walk();
  EXPECT_NEAR(law_via_inversion(lazy, 2, 0), 0.375, 1e-8);
  EXPECT_NEAR(law_via_inversion(lazy, 1, 5), 0.0, 1e-10);
  EXPECT_NEAR(law_via_inversion(lazy, 1, -2), 0.0, 1e-10);
}

TEST(Inversion, CoarseGridAliases) {
  // fewer points than the support width folds mass onto other levels
  const auto lazy = models::lazy_walk();
  const auto coarse = inversion_marginals(lazy, 40, 16);
  const auto exact = exact_law(lazy, 40).marginals();
  double worst = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) worst = std::max(worst, std::abs(coarse[i] - exact[i]));
  EXPECT_GT(worst, 1e-8);
}

TEST(LocalLimit, LazyConstantAndCorner) {
  const auto lazy = models::lazy_walk();
  const std::vector<std::size_t> ns{400, 1600, 6400};
  const std::vector<long long> xs{0};
  const auto rows = local_limit_scan(lazy, ns, xs, 0.5);
  const double c = 1.0 / std::sqrt(std::numbers::pi);
  for (const auto& r : rows) {
    EXPECT_LT(r.sqrtn_prob, 0.6);
    EXPECT_NEAR(r.gaussian_pred, c, 1e-15);
  }
  EXPECT_NEAR(rows.back().sqrtn_prob / c, 1.0, 0.1);

  const std::vector<std::size_t> small{10};
  const std::vector<long long> corner{10};
  const auto rc = local_limit_scan(lazy, small, corner, 0.5);
  EXPECT_NEAR(rc[0].sqrtn_prob, std::sqrt(10.0) * std::pow(0.25, 10), 1e-20);
}

TEST(LocalLimit, PeriodicParity) {
  const auto pm = models::plus_minus_walk();
  for (std::size_t n : {1u, 3u, 101u}) EXPECT_EQ(exact_law(pm, n).marginal(0), 0.0);
}

TEST(PotentialKernel, TrivialPairs) {
  const auto lazy = models::lazy_walk();
  for (const double v : potential_kernel(lazy, 200, 3, 3).partial_sums) EXPECT_EQ(v, 0.0);
  for (const double v : potential_kernel(lazy, 200, 1, -1).partial_sums) EXPECT_EQ(v, 0.0);
}

TEST(PotentialKernel, LazyWalkLimit) {
  // Lazy steps are simple-walk steps half the time, so Σ_{n>=0} equals twice
  // the simple-walk kernel |y|; dropping the n = 0 term leaves 2|y| - 1.
  const auto lazy = models::lazy_walk();
  const std::vector<std::pair<long long, long long>> pairs{{0, 1}, {0, 2}, {0, 3}};
  const auto curves = potential_kernels(lazy, 4096, pairs);
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const double y = static_cast<double>(i + 1);
    const auto& s = curves[i].partial_sums;
    EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
    // tail of the series beyond N is about 2y² / √(πN)
    EXPECT_NEAR(s.back(), 2.0 * y - 1.0, 0.05 * y * y);
    EXPECT_LT(s.back() - s[2047], 0.02 * y * y);
  }
  // single-pair entry point agrees with the shared DP
  EXPECT_EQ(potential_kernel(lazy, 512, 0, 2).partial_sums,
            std::vector<double>(curves[1].partial_sums.begin(), curves[1].partial_sums.begin() + 512));
}

TEST(Csv, Headers) {
  const auto lazy = models::lazy_walk();
  const auto csv = law_to_csv(exact_law(lazy, 1));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "x,state,prob");
  EXPECT_NE(csv.find("0,1,0.5\n"), std::string::npos);
  const std::vector<LocalLimitRow> rows{{4, 0, 0.5, 0.25}};
  EXPECT_EQ(local_limit_to_csv(rows), "n,x,sqrtn_prob,gaussian_pred\n4,0,0.5,0.25\n");
  KernelCurve k;
  k.partial_sums = {0.125, 0.25};
  EXPECT_EQ(kernel_to_csv(k), "N,partial_sum\n1,0.125\n2,0.25\n");
}
