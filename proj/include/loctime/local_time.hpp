#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "loctime/chain.hpp"

namespace loctime {

/// Visit counts L_n(k) = #{0 <= k' <= n : S_k' = k} of one trajectory, with
/// the normalized step-function view l_n(x) = L_n(⌊√n x⌋) / √n.
struct LocalTimeField {
  std::size_t n = 0;
  long long min_level = 0;            // level of counts[0]
  std::vector<std::uint32_t> counts;  // levels min_level .. min_level + size - 1
  long long final_position = 0;       // S_n

  double root_n() const;
  long long max_level() const { return min_level + static_cast<long long>(counts.size()) - 1; }
  std::uint64_t count(long long level) const;
  std::uint64_t total() const;
  /// ⌊√n x⌋, the lattice level whose cell contains x.
  long long level_of(double x) const;
  double value(double x) const;
};

LocalTimeField local_time_field(std::span<const int> increments);

struct Strips {
  double left = 0.0;
  double right = 0.0;
};

struct OccupationResult {
  double a = 0.0;
  double b = 0.0;
  double nu = 0.0;        // time fraction of ω_n in [a, b)
  double integral = 0.0;  // ∫_a^b l_n(x) dx
  Strips strips;
  std::size_t n = 0;

  /// |nu - integral| <= strips.left + strips.right + 2/n
  bool within_bound() const;
};

OccupationResult occupation(std::span<const int> increments, double a, double b);
OccupationResult occupation(const LocalTimeField& field, double a, double b);

struct ModulusReport {
  double h = 0.0;
  double delta = 0.0;
  double omega = 0.0;        // plain modulus at scale 2δ over [-h, h]
  double omega_prime = 0.0;  // δ-sparse-partition modulus over [-h, h]
};

/// Precondition 0 < delta < 1/2 <= h.
ModulusReport modulus(const LocalTimeField& field, double h, double delta);
/// sup_{|s-t| < width, s,t ∈ [-h,h]} |l_n(s) - l_n(t)|.
double plain_modulus(const LocalTimeField& field, double h, double width);
/// inf over δ-sparse partitions of [-h, h] (interior points on breakpoints
/// j/√n) of the largest oscillation on a partition interval.
double sparse_modulus(const LocalTimeField& field, double h, double delta);
double sup_on_window(const LocalTimeField& field, double h);

/// Runs body(i, increments) for trajectories i = 0..count-1 of sample_paths'
/// stream layout, without materializing the batch.
void for_each_trajectory(const MarkovShift& shift, std::size_t n, std::size_t count,
                         std::uint64_t seed, unsigned threads,
                         const std::function<void(std::size_t, std::span<const int>)>& body);

struct TailEstimate {
  double eps = 0.0;
  double prob = 0.0;
  double std_error = 0.0;
};

struct MomentStatistics {
  std::size_t n = 0;
  long long x = 0;
  long long y = 0;
  std::size_t samples = 0;
  double m6 = 0.0;
  double m6_stderr = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  std::vector<TailEstimate> tails;
};

inline const std::vector<double> kDefaultEpsGrid{0.25, 0.5, 1.0};

/// Monte Carlo E[(L_n(x) - L_n(y))^6] against
/// (√n|x-y|)³ + n²|x-y| log n + n² (log n)², and P(|L_n(x) - L_n(y)|/√n > ε).
/// Requires x != y and samples >= 10⁴ (min_samples lowers the floor for tests).
MomentStatistics moment_statistics(const MarkovShift& shift, std::size_t n, long long x,
                                   long long y, std::size_t samples, std::uint64_t seed,
                                   std::span<const double> eps_grid = kDefaultEpsGrid,
                                   unsigned threads = 1, std::size_t min_samples = 10'000);

/// Sorted samples of l_n(level) over `count` trajectories.
std::vector<double> level_samples(const MarkovShift& shift, std::size_t n, double level,
                                  std::size_t count, std::uint64_t seed, unsigned threads = 1);

struct OccupationSummary {
  std::size_t n = 0;
  std::size_t trajectories = 0;
  std::size_t violations = 0;
  std::vector<std::pair<double, double>> intervals;
  std::vector<double> mean_abs_difference;  // per interval
  std::vector<double> mean_strips;          // per interval
};

OccupationSummary occupation_experiment(const MarkovShift& shift, std::size_t n,
                                        std::span<const std::pair<double, double>> intervals,
                                        std::size_t count, std::uint64_t seed,
                                        unsigned threads = 1);

struct ModulusSummary {
  std::size_t n = 0;
  std::size_t trajectories = 0;
  double h = 0.0;
  double threshold = 0.0;
  std::size_t violations = 0;                // ω' > ω(2δ) occurrences
  std::vector<double> deltas;
  std::vector<double> prob_exceed;           // P(ω'(δ) >= threshold)
  std::vector<double> prob_exceed_stderr;
  std::vector<double> sup_thresholds;        // a values
  std::vector<double> prob_sup_exceed;       // P(sup_{[-h,h]} l_n > a)
};

ModulusSummary modulus_experiment(const MarkovShift& shift, std::size_t n, double h,
                                  std::span<const double> deltas, double threshold,
                                  std::span<const double> sup_thresholds, std::size_t count,
                                  std::uint64_t seed, unsigned threads = 1);

std::string field_to_csv(const LocalTimeField& field);
std::string moments_to_json(const MomentStatistics& stats);

}  // namespace loctime
