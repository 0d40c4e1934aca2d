#include "loctime/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "loctime/error.hpp"

namespace loctime {

double ks_statistic(std::span<const double> sorted_sample, const Cdf& cdf) {
  if (sorted_sample.empty()) throw Error(ErrorKind::EmptySample, "ks_statistic on empty sample");
  const auto n = static_cast<double>(sorted_sample.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < sorted_sample.size()) {
    // ties form one jump of the empirical CDF
    std::size_t j = i;
    while (j < sorted_sample.size() && sorted_sample[j] == sorted_sample[i]) ++j;
    const double x = sorted_sample[i];
    const double f = cdf(x);
    const double f_left = cdf(std::nextafter(x, -std::numeric_limits<double>::infinity()));
    d = std::max(d, std::abs(static_cast<double>(j) / n - f));
    d = std::max(d, std::abs(f_left - static_cast<double>(i) / n));
    i = j;
  }
  return std::min(d, 1.0);
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::EmptySample, "ks_two_sample on empty sample");
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

Cdf levy_reference_cdf(double sigma2) {
  if (!(sigma2 > 0.0)) throw Error(ErrorKind::VarianceZero, "levy_reference_cdf needs sigma2 > 0");
  const double sigma = std::sqrt(sigma2);
  // 2Φ(z) - 1 = erf(z/√2)
  return [sigma](double l) { return l < 0.0 ? 0.0 : std::erf(sigma * l / std::sqrt(2.0)); };
}

double fit_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorKind::InvalidArgument, "fit_slope needs two or more paired points");
  }
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace loctime
