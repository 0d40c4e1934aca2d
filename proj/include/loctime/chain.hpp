#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "loctime/rng.hpp"

namespace loctime {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// A finite-state stationary Markov chain together with an integer observable
/// of the current symbol. Immutable once built; only build_chain() makes one,
/// so every instance satisfies the validation in build_chain().
class MarkovShift {
 public:
  std::size_t size() const noexcept { return observable_.size(); }
  const std::vector<std::string>& states() const noexcept { return states_; }
  const Matrix& transition() const noexcept { return transition_; }
  const Vector& stationary() const noexcept { return stationary_; }
  const std::vector<int>& observable() const noexcept { return observable_; }

  int min_observable() const noexcept { return min_phi_; }
  int max_observable() const noexcept { return max_phi_; }

  /// Σ π(s) φ(s); zero up to rounding for every valid shift.
  double observable_mean() const;

  // Cumulative sums of the stationary vector and of each transition row, used
  // by the samplers.
  const std::vector<double>& stationary_cdf() const noexcept { return pi_cdf_; }
  const std::vector<double>& row_cdf() const noexcept { return row_cdf_; }

 private:
  friend MarkovShift build_chain(const Matrix&, std::span<const int>,
                                 std::vector<std::string>);
  MarkovShift() = default;

  std::vector<std::string> states_;
  Matrix transition_;
  Vector stationary_;
  std::vector<int> observable_;
  int min_phi_ = 0;
  int max_phi_ = 0;
  std::vector<double> pi_cdf_;
  std::vector<double> row_cdf_;  // row-major, size()*size()
};

inline constexpr double kRowSumTolerance = 1e-12;
inline constexpr double kFixedPointTolerance = 1e-12;
inline constexpr double kMeanTolerance = 1e-10;

/// Validates the transition matrix and observable and returns the shift.
/// Throws Error with kind NotStochastic, NotMixing, MeanNotZero or
/// DegenerateObservable. Empty `states` gets labels "0", "1", ...
MarkovShift build_chain(const Matrix& transition, std::span<const int> observable,
                        std::vector<std::string> states = {});

/// Left fixed vector of a stochastic, irreducible, aperiodic matrix.
Vector stationary_distribution(const Matrix& transition);

struct MixingDiagnosis {
  bool irreducible = false;
  std::size_t period = 0;  // 0 when reducible
};

/// Graph test: strong connectivity of {P > 0} and the gcd of its cycle lengths.
MixingDiagnosis diagnose_mixing(const Matrix& transition);

/// One simulated trajectory. The first increment is φ(X_0) with X_0 ~ π,
/// increment k is φ(X_k); the stream is CounterStream(seed, index).
void simulate_increments(const MarkovShift& shift, std::uint64_t seed,
                         std::uint64_t index, std::span<int> out);

struct PathBatch {
  std::size_t n = 0;
  std::size_t count = 0;
  std::uint64_t seed = 0;
  std::vector<int> increments;  // count rows of n, row-major

  std::span<const int> path(std::size_t i) const {
    return std::span<const int>(increments).subspan(i * n, n);
  }
};

PathBatch sample_paths(const MarkovShift& shift, std::size_t n, std::size_t count,
                       std::uint64_t seed, unsigned threads = 1);

/// Parses the chain JSON format (keys "states", "transition", "observable").
/// Errors report the offending key and row.
MarkovShift load_chain_json(const std::string& text);
MarkovShift load_chain_file(const std::filesystem::path& path);
std::string chain_to_json(const MarkovShift& shift);

namespace models {

/// 3 states, every row (1/4, 1/2, 1/4), φ = (-1, 0, +1). σ² = 1/2.
MarkovShift lazy_walk();
/// 2 states, every row (1/2, 1/2), φ = (+1, -1). Periodic observable.
MarkovShift plus_minus_walk();
/// 2 states, rows (1-p, p)/(p, 1-p), φ = (+1, -1). Periodic observable, σ² = (1-p)/p.
MarkovShift two_state_flip(double p);
/// Non-reversible doubly stochastic circulant, rows (1/2, 3/10, 1/5) shifted,
/// φ = (-1, 0, +1).
MarkovShift circulant_walk();
/// Symmetric sticky 3-state chain with φ = (-1, 0, +1): from ±1 stay with
/// probability `stay`, go to 0 otherwise; from 0 step to ±1 with probability
/// `leave`/2 each.
MarkovShift sticky_walk(double stay, double leave);

}  // namespace models

}  // namespace loctime
