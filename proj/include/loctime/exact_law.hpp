#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "loctime/chain.hpp"

namespace loctime {

/// Joint law of (S_n, X_n) under the stationary start, on the integer range
/// [n min φ, n max φ].
struct ExactLaw {
  std::size_t n = 0;
  long long support_min = 0;
  long long support_max = 0;
  std::size_t states = 0;
  std::vector<double> table;  // (x - support_min) * states + s

  std::size_t width() const noexcept {
    return static_cast<std::size_t>(support_max - support_min + 1);
  }
  double prob(long long x, std::size_t s) const;
  /// P(S_n = x); zero outside the support.
  double marginal(long long x) const;
  /// P(S_n = x) for x = support_min .. support_max.
  std::vector<double> marginals() const;
  double total_mass() const;
  double mean() const;
  double variance() const;
};

struct LawOptions {
  std::size_t memory_cap = 100'000'000;  // cells of the (x, state) table
  unsigned threads = 1;
};

inline constexpr double kFlushBelow = 1e-300;

/// Forward recursion μ_{k+1}(x + φ(s'), s') = Σ_s μ_k(x, s) P(s, s') from
/// μ_0(0, s) = π(s). Each cell sums its terms in sorted order, so chains with a
/// reflection symmetry produce bitwise mirror-symmetric tables.
class LawStepper {
 public:
  LawStepper(const MarkovShift& shift, LawOptions options = {});

  void step();
  void advance_to(std::size_t n);
  const ExactLaw& law() const noexcept { return current_; }

 private:
  const MarkovShift* shift_;
  LawOptions options_;
  ExactLaw current_;
  ExactLaw next_;
};

ExactLaw exact_law(const MarkovShift& shift, std::size_t n, LawOptions options = {});

/// (1/2π) Re ∫ m(P_t^n 1) e^{-itx} dt for every x in [n min φ, n max φ] by the
/// trapezoid rule on `grid_points` uniform points; no cross-check.
std::vector<double> inversion_marginals(const MarkovShift& shift, std::size_t n,
                                        std::size_t grid_points);

/// Same, for every n = 1..n_max on one shared grid. Row n-1 holds the law of
/// S_n on [n min φ, n max φ].
std::vector<std::vector<double>> inversion_marginals_upto(const MarkovShift& shift,
                                                          std::size_t n_max,
                                                          std::size_t grid_points);

/// Default trapezoid size: max(1024, 8 * support width).
std::size_t default_inversion_points(const MarkovShift& shift, std::size_t n);

/// P(S_n = x) by Fourier inversion, checked against the DP at 1e-8; retried
/// once at 4x grid density before throwing GridTooCoarse.
double law_via_inversion(const MarkovShift& shift, std::size_t n, long long x,
                         LawOptions options = {});

struct LocalLimitRow {
  std::size_t n = 0;
  long long x = 0;
  double sqrtn_prob = 0.0;
  double gaussian_pred = 0.0;
};

/// √n P(S_n = x) for every (n, x) plus exp(-x²/(2nσ²)) / √(2πσ²).
/// Precondition: the observable is aperiodic; n_list increasing.
std::vector<LocalLimitRow> local_limit_scan(const MarkovShift& shift,
                                            std::span<const std::size_t> n_list,
                                            std::span<const long long> x_list, double sigma2,
                                            LawOptions options = {});

/// max_x √n P(S_n = x) for each n in an increasing list.
std::vector<double> local_limit_maxima(const MarkovShift& shift,
                                       std::span<const std::size_t> n_list,
                                       LawOptions options = {});

struct KernelCurve {
  long long x = 0;
  long long y = 0;
  std::vector<double> partial_sums;  // entry N-1 is Σ_{n=1}^{N} |P(S_n=x) - P(S_n=y)|
};

KernelCurve potential_kernel(const MarkovShift& shift, std::size_t horizon, long long x,
                             long long y, LawOptions options = {});

/// Several level pairs sharing one incremental DP.
std::vector<KernelCurve> potential_kernels(const MarkovShift& shift, std::size_t horizon,
                                           std::span<const std::pair<long long, long long>> pairs,
                                           LawOptions options = {});

/// Var(S_n)/n at n, 2n, 4n, ... (from the exact law) extrapolated to n -> ∞
/// by Richardson elimination of the 1/n, 1/n², ... terms.
double extrapolated_variance(const MarkovShift& shift, std::span<const std::size_t> doubling_ns,
                             LawOptions options = {});

std::string law_to_csv(const ExactLaw& law);
std::string local_limit_to_csv(std::span<const LocalLimitRow> rows);
std::string kernel_to_csv(const KernelCurve& curve);

}  // namespace loctime
