#pragma once

#include <functional>
#include <span>
#include <vector>

namespace loctime {

using Cdf = std::function<double(double)>;

/// sup_x |F_n(x) - F(x)| over a sorted sample, evaluating both one-sided gaps
/// at every sample point. Throws EmptySample.
double ks_statistic(std::span<const double> sorted_sample, const Cdf& cdf);

/// Two-sample Kolmogorov-Smirnov distance between sorted samples.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

/// F(ℓ) = 2Φ(σℓ) - 1 for ℓ >= 0 and 0 below: the law of |Z|/σ.
/// Throws VarianceZero for sigma2 <= 0.
Cdf levy_reference_cdf(double sigma2);

/// Ordinary least-squares slope of y against x.
double fit_slope(std::span<const double> x, std::span<const double> y);

}  // namespace loctime
