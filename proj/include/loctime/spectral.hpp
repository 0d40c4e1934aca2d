#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "loctime/chain.hpp"

namespace loctime {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Q(y, x) = π(x) P(x, y) / π(y): the transfer operator acting on functions of
/// the current symbol, dual to composition with the shift under the
/// stationary measure.
Matrix transfer_matrix(const MarkovShift& shift);

/// Q(y, x) e^{i t φ(x)}.
CMatrix twisted_operator(const MarkovShift& shift, double t);

/// m(f) = Σ π(s) f(s).
Complex stationary_mean(const MarkovShift& shift, const CVector& f);

struct SpectralBranch {
  std::vector<double> grid;
  std::vector<Complex> lambda;
  std::vector<CVector> eigenfunction;  // normalized so m(v_t) = 1
  std::vector<double> gap;             // |λ_t| minus the next largest modulus
  double sigma2 = 0.0;

  std::size_t index_of(double t) const;
};

struct BranchOptions {
  int max_iterations = 200;
  double residual_tolerance = 1e-13;
  double ambiguity_tolerance = 1e-10;
  bool compute_sigma2 = true;
};

/// Follows the eigenvalue of P_t that continues λ_0 = 1 along a sorted grid
/// containing 0. Each point is solved by shifted inverse iteration seeded with
/// the neighbouring point's eigenvector, continuing outward from t = 0.
/// Throws BranchAmbiguity or NoConvergence; with compute_sigma2 the variance
/// comes from asymptotic_variance().
SpectralBranch eigen_branch(const MarkovShift& shift, std::span<const double> grid,
                            const BranchOptions& options = {});

/// Uniform grid on [-π, π] with `points` entries; 0 is included when points is odd.
std::vector<double> uniform_frequency_grid(std::size_t points);

/// σ² by the Poisson equation: (I - P) g = φ with m(g) = 0, then
/// σ² = Σ π (2 φ g - φ²).
double green_kubo_variance(const MarkovShift& shift);

/// -λ''(0) from symmetric second differences at steps 4h, 2h, h combined by
/// two levels of Richardson extrapolation.
double curvature_variance(const MarkovShift& shift, double step = 1e-3);

/// Green-Kubo σ², cross-checked against -λ''(0) at relative 1e-6.
/// Throws VarianceZero or ConventionMismatch.
double asymptotic_variance(const MarkovShift& shift);

/// Largest eigenvalue modulus of P_t.
double spectral_radius(const MarkovShift& shift, double t);

struct AperiodicityReport {
  bool is_aperiodic = false;
  double min_gap = 0.0;
  double offending_t = 0.0;
  // min of 1 - ρ(P_t) over [kInteriorMargin, 2π - kInteriorMargin]
  double interior_gap = 0.0;
  std::size_t scan_points = 0;
  std::size_t evaluations = 0;
};

inline constexpr double kAperiodicGapThreshold = 1e-8;
inline constexpr double kInteriorMargin = 3.14159265358979323846 / 8.0;

/// Scans ρ(P_t) on [δ0, 2π - δ0], δ0 = 2π / (8 scan_points), refines 8x around
/// points with 1 - ρ < 1e-4 and polishes every local minimum by golden-section
/// search. Requires scan_points >= 64.
AperiodicityReport check_aperiodicity(const MarkovShift& shift, std::size_t scan_points,
                                      unsigned threads = 1);

/// Leading eigentriple of P_t near t = 0: right vector v with m(v) = 1, left
/// vector u with uᵀv = 1, so π_t f = v (uᵀ f).
struct LeadingEigen {
  Complex lambda;
  CVector right;
  CVector left;
  double second_modulus = 0.0;
};

LeadingEigen leading_eigen(const MarkovShift& shift, double t);

/// ‖P_t^k 1 - λ_t^k π_t 1‖_∞ for k = 1..n_max, by direct matrix powers.
std::vector<double> rank_one_residuals(const MarkovShift& shift, double t, std::size_t n_max);

std::string branch_to_csv(const SpectralBranch& branch);
std::string aperiodicity_to_json(const AperiodicityReport& report);

}  // namespace loctime
