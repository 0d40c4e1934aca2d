#include "loctime/exact_law.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "loctime/error.hpp"
#include "loctime/io.hpp"
#include "loctime/parallel.hpp"
#include "loctime/spectral.hpp"

namespace loctime {

namespace {

double sorted_sum(double* terms, std::size_t count) {
  std::sort(terms, terms + count);
  double acc = 0.0;
  for (std::size_t i = 0; i < count; ++i) acc += terms[i];
  return acc;
}

void check_cap(const MarkovShift& shift, std::size_t n, const LawOptions& options) {
  const auto span = static_cast<double>(shift.max_observable() - shift.min_observable());
  const double cells = (static_cast<double>(n) * span + 1.0) * static_cast<double>(shift.size());
  if (cells > static_cast<double>(options.memory_cap)) {
    std::ostringstream os;
    os << "law of S_" << n << " needs " << cells << " cells, cap is " << options.memory_cap;
    throw Error(ErrorKind::MemoryCap, os.str());
  }
}

}  // namespace

double ExactLaw::prob(long long x, std::size_t s) const {
  if (x < support_min || x > support_max || s >= states) return 0.0;
  return table[static_cast<std::size_t>(x - support_min) * states + s];
}

double ExactLaw::marginal(long long x) const {
  if (x < support_min || x > support_max) return 0.0;
  std::vector<double> terms(table.begin() + static_cast<std::ptrdiff_t>(
                                                static_cast<std::size_t>(x - support_min) * states),
                            table.begin() + static_cast<std::ptrdiff_t>(
                                                static_cast<std::size_t>(x - support_min + 1) * states));
  return sorted_sum(terms.data(), terms.size());
}

std::vector<double> ExactLaw::marginals() const {
  std::vector<double> out(width());
  std::vector<double> terms(states);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::copy_n(table.begin() + static_cast<std::ptrdiff_t>(i * states), states, terms.begin());
    out[i] = sorted_sum(terms.data(), states);
  }
  return out;
}

double ExactLaw::total_mass() const { return pairwise_sum(marginals()); }

double ExactLaw::mean() const {
  const auto m = marginals();
  std::vector<double> w(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    w[i] = static_cast<double>(support_min + static_cast<long long>(i)) * m[i];
  }
  return pairwise_sum(w);
}

double ExactLaw::variance() const {
  const auto m = marginals();
  const double mu = mean();
  std::vector<double> w(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double d = static_cast<double>(support_min + static_cast<long long>(i)) - mu;
    w[i] = d * d * m[i];
  }
  return pairwise_sum(w);
}

LawStepper::LawStepper(const MarkovShift& shift, LawOptions options)
    : shift_(&shift), options_(options) {
  current_.n = 0;
  current_.states = shift.size();
  current_.table.resize(shift.size());
  for (std::size_t s = 0; s < shift.size(); ++s) {
    current_.table[s] = shift.stationary()(static_cast<Eigen::Index>(s));
  }
  next_.states = shift.size();
}

void LawStepper::step() {
  const MarkovShift& shift = *shift_;
  const std::size_t states = shift.size();
  check_cap(shift, current_.n + 1, options_);
  next_.n = current_.n + 1;
  next_.support_min = current_.support_min + shift.min_observable();
  next_.support_max = current_.support_max + shift.max_observable();
  next_.table.assign(next_.width() * states, 0.0);

  const auto& phi = shift.observable();
  const Matrix& p = shift.transition();
  const ExactLaw& cur = current_;
  ExactLaw& nxt = next_;
  parallel_for(nxt.width(), options_.threads, [&](std::size_t i) {
    thread_local std::vector<double> terms;
    terms.resize(states);
    const long long target = nxt.support_min + static_cast<long long>(i);
    for (std::size_t to = 0; to < states; ++to) {
      const long long source = target - phi[to];
      if (source < cur.support_min || source > cur.support_max) continue;
      const double* row = cur.table.data() + static_cast<std::size_t>(source - cur.support_min) * states;
      const double* column = p.data() + static_cast<std::ptrdiff_t>(to) * p.rows();
      for (std::size_t from = 0; from < states; ++from) terms[from] = row[from] * column[from];
      double v = sorted_sum(terms.data(), states);
      if (v < kFlushBelow) v = 0.0;
      nxt.table[i * states + to] = v;
    }
  });
  std::swap(current_, next_);
}

void LawStepper::advance_to(std::size_t n) {
  if (n < current_.n) throw Error(ErrorKind::InvalidArgument, "LawStepper cannot move backwards");
  check_cap(*shift_, n, options_);
  while (current_.n < n) step();
}

ExactLaw exact_law(const MarkovShift& shift, std::size_t n, LawOptions options) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "exact_law needs n >= 1");
  check_cap(shift, n, options);
  LawStepper stepper(shift, options);
  stepper.advance_to(n);
  return stepper.law();
}

std::size_t default_inversion_points(const MarkovShift& shift, std::size_t n) {
  const auto width = static_cast<std::size_t>(n) *
                         static_cast<std::size_t>(shift.max_observable() - shift.min_observable()) +
                     1;
  return std::max<std::size_t>(1024, 8 * width);
}

namespace {

// ψ_n(t_j) = m(P_{t_j}^n 1) for n = 1..n_max on t_j = -π + 2πj/M.
std::vector<std::vector<Complex>> characteristic_table(const MarkovShift& shift,
                                                       std::size_t n_max, std::size_t m) {
  std::vector<std::vector<Complex>> psi(n_max, std::vector<Complex>(m));
  const auto states = static_cast<Eigen::Index>(shift.size());
  CVector pi(states);
  for (Eigen::Index s = 0; s < states; ++s) pi(s) = shift.stationary()(s);
  for (std::size_t j = 0; j < m; ++j) {
    const double t = -std::numbers::pi + 2.0 * std::numbers::pi * static_cast<double>(j) /
                                             static_cast<double>(m);
    const CMatrix a = twisted_operator(shift, t);
    CVector v = CVector::Ones(states);
    for (std::size_t n = 0; n < n_max; ++n) {
      v = a * v;
      psi[n][j] = pi.transpose() * v;
    }
  }
  return psi;
}

std::vector<double> invert(const std::vector<Complex>& psi, long long lo, long long hi) {
  const auto m = static_cast<long long>(psi.size());
  std::vector<Complex> roots(static_cast<std::size_t>(m));
  for (long long k = 0; k < m; ++k) {
    const double a = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m);
    roots[static_cast<std::size_t>(k)] = Complex(std::cos(a), std::sin(a));
  }
  std::vector<double> out(static_cast<std::size_t>(hi - lo + 1));
  for (long long x = lo; x <= hi; ++x) {
    // e^{-i t_j x} = (-1)^x e^{-2πi j x / M}
    const long long step = ((x % m) + m) % m;
    long long idx = 0;
    Complex acc = 0.0;
    for (long long j = 0; j < m; ++j) {
      acc += psi[static_cast<std::size_t>(j)] * roots[static_cast<std::size_t>(idx)];
      idx += step;
      if (idx >= m) idx -= m;
    }
    const double sign = (x % 2 == 0) ? 1.0 : -1.0;
    out[static_cast<std::size_t>(x - lo)] = sign * acc.real() / static_cast<double>(m);
  }
  return out;
}

}  // namespace

std::vector<double> inversion_marginals(const MarkovShift& shift, std::size_t n,
                                        std::size_t grid_points) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "inversion needs n >= 1");
  const auto psi = characteristic_table(shift, n, grid_points);
  const long long lo = static_cast<long long>(n) * shift.min_observable();
  const long long hi = static_cast<long long>(n) * shift.max_observable();
  return invert(psi[n - 1], lo, hi);
}

std::vector<std::vector<double>> inversion_marginals_upto(const MarkovShift& shift,
                                                          std::size_t n_max,
                                                          std::size_t grid_points) {
  const auto psi = characteristic_table(shift, n_max, grid_points);
  std::vector<std::vector<double>> out;
  out.reserve(n_max);
  for (std::size_t n = 1; n <= n_max; ++n) {
    out.push_back(invert(psi[n - 1], static_cast<long long>(n) * shift.min_observable(),
                         static_cast<long long>(n) * shift.max_observable()));
  }
  return out;
}

double law_via_inversion(const MarkovShift& shift, std::size_t n, long long x,
                         LawOptions options) {
  const ExactLaw law = exact_law(shift, n, options);
  const double reference = law.marginal(x);
  std::size_t points = default_inversion_points(shift, n);
  double value = 0.0;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const auto psi = characteristic_table(shift, n, points);
    value = invert(psi[n - 1], x, x).front();
    if (std::abs(value - reference) <= 1e-8) return value;
    points *= 4;
  }
  std::ostringstream os;
  os.precision(17);
  os << "inversion gives " << value << " but the recursion gives " << reference << " at n=" << n
     << ", x=" << x;
  throw Error(ErrorKind::GridTooCoarse, os.str());
}

std::vector<LocalLimitRow> local_limit_scan(const MarkovShift& shift,
                                            std::span<const std::size_t> n_list,
                                            std::span<const long long> x_list, double sigma2,
                                            LawOptions options) {
  if (!std::is_sorted(n_list.begin(), n_list.end())) {
    throw Error(ErrorKind::InvalidArgument, "n_list must be increasing");
  }
  if (!(sigma2 > 0.0)) throw Error(ErrorKind::VarianceZero, "sigma2 must be positive");
  LawStepper stepper(shift, options);
  std::vector<LocalLimitRow> rows;
  for (const auto n : n_list) {
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "n must be >= 1");
    stepper.advance_to(n);
    const double root = std::sqrt(static_cast<double>(n));
    for (const auto x : x_list) {
      LocalLimitRow row;
      row.n = n;
      row.x = x;
      row.sqrtn_prob = root * stepper.law().marginal(x);
      const auto xd = static_cast<double>(x);
      row.gaussian_pred = std::exp(-xd * xd / (2.0 * static_cast<double>(n) * sigma2)) /
                          std::sqrt(2.0 * std::numbers::pi * sigma2);
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<double> local_limit_maxima(const MarkovShift& shift,
                                       std::span<const std::size_t> n_list, LawOptions options) {
  LawStepper stepper(shift, options);
  std::vector<double> out;
  for (const auto n : n_list) {
    stepper.advance_to(n);
    const auto m = stepper.law().marginals();
    out.push_back(std::sqrt(static_cast<double>(n)) * *std::max_element(m.begin(), m.end()));
  }
  return out;
}

std::vector<KernelCurve> potential_kernels(const MarkovShift& shift, std::size_t horizon,
                                           std::span<const std::pair<long long, long long>> pairs,
                                           LawOptions options) {
  if (horizon == 0) throw Error(ErrorKind::InvalidArgument, "horizon must be >= 1");
  check_cap(shift, horizon, options);
  std::vector<KernelCurve> curves(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    curves[i].x = pairs[i].first;
    curves[i].y = pairs[i].second;
    curves[i].partial_sums.reserve(horizon);
  }
  LawStepper stepper(shift, options);
  std::vector<double> running(pairs.size(), 0.0);
  for (std::size_t n = 1; n <= horizon; ++n) {
    stepper.step();
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      if (pairs[i].first != pairs[i].second) {
        running[i] += std::abs(stepper.law().marginal(pairs[i].first) -
                               stepper.law().marginal(pairs[i].second));
      }
      curves[i].partial_sums.push_back(running[i]);
    }
  }
  return curves;
}

KernelCurve potential_kernel(const MarkovShift& shift, std::size_t horizon, long long x,
                             long long y, LawOptions options) {
  const std::pair<long long, long long> pair{x, y};
  return potential_kernels(shift, horizon, std::span(&pair, 1), options).front();
}

double extrapolated_variance(const MarkovShift& shift, std::span<const std::size_t> doubling_ns,
                             LawOptions options) {
  if (doubling_ns.empty()) throw Error(ErrorKind::InvalidArgument, "need at least one n");
  for (std::size_t i = 1; i < doubling_ns.size(); ++i) {
    if (doubling_ns[i] != 2 * doubling_ns[i - 1]) {
      throw Error(ErrorKind::InvalidArgument, "extrapolation needs successive doublings of n");
    }
  }
  LawStepper stepper(shift, options);
  std::vector<double> tableau;
  for (const auto n : doubling_ns) {
    stepper.advance_to(n);
    tableau.push_back(stepper.law().variance() / static_cast<double>(n));
  }
  // Neville tableau in h = 1/n with ratio 2.
  for (std::size_t level = 1; level < tableau.size(); ++level) {
    const double factor = std::ldexp(1.0, static_cast<int>(level));
    for (std::size_t i = tableau.size() - 1; i >= level; --i) {
      tableau[i] = tableau[i] + (tableau[i] - tableau[i - 1]) / (factor - 1.0);
    }
  }
  return tableau.back();
}

std::string law_to_csv(const ExactLaw& law) {
  CsvWriter csv({"x", "state", "prob"});
  for (long long x = law.support_min; x <= law.support_max; ++x) {
    for (std::size_t s = 0; s < law.states; ++s) {
      csv.field(x).field(s).field(law.prob(x, s));
      csv.end_row();
    }
  }
  return csv.str();
}

std::string local_limit_to_csv(std::span<const LocalLimitRow> rows) {
  CsvWriter csv({"n", "x", "sqrtn_prob", "gaussian_pred"});
  for (const auto& r : rows) {
    csv.field(r.n).field(r.x).field(r.sqrtn_prob).field(r.gaussian_pred);
    csv.end_row();
  }
  return csv.str();
}

std::string kernel_to_csv(const KernelCurve& curve) {
  CsvWriter csv({"N", "partial_sum"});
  for (std::size_t i = 0; i < curve.partial_sums.size(); ++i) {
    csv.field(i + 1).field(curve.partial_sums[i]);
    csv.end_row();
  }
  return csv.str();
}

}  // namespace loctime
