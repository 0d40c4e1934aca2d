#include "loctime/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "loctime/error.hpp"
#include "loctime/io.hpp"
#include "loctime/parallel.hpp"

namespace loctime {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Eigenpair {
  Complex lambda;
  CVector vector;  // unit 2-norm
};

// Shifted inverse iteration started from `seed`. The shift is nudged off the
// guess so an exact eigenvalue guess does not produce a singular solve.
Eigenpair inverse_iteration(const CMatrix& a, Complex guess, const CVector& seed,
                            const BranchOptions& opt) {
  const auto n = a.rows();
  const double scale = std::max(1.0, a.cwiseAbs().rowwise().sum().maxCoeff());
  Complex shift = guess + Complex(1e-9, 1e-9) * std::max(1.0, std::abs(guess));
  Eigen::PartialPivLU<CMatrix> lu(a - shift * CMatrix::Identity(n, n));

  CVector v = seed.normalized();
  Complex lambda = guess;
  for (int it = 0; it < opt.max_iterations; ++it) {
    CVector w = lu.solve(v);
    if (!w.allFinite() || w.norm() == 0.0) {
      shift += Complex(1e-7, -1e-7) * std::max(1.0, std::abs(guess));
      lu.compute(a - shift * CMatrix::Identity(n, n));
      continue;
    }
    v = w / w.norm();
    // Keep the phase continuous with the seed.
    const Complex overlap = seed.dot(v);
    if (std::abs(overlap) > 0.0) v *= std::conj(overlap) / std::abs(overlap);
    const CVector av = a * v;
    lambda = v.dot(av);
    const double residual = (av - lambda * v).lpNorm<Eigen::Infinity>();
    if (residual <= opt.residual_tolerance * scale) return {lambda, v};
  }
  std::ostringstream os;
  os << "inverse iteration did not converge near eigenvalue guess " << guess;
  throw Error(ErrorKind::NoConvergence, os.str());
}

double vector_angle(const CVector& a, const CVector& b) {
  const double c = std::abs(a.dot(b)) / (a.norm() * b.norm());
  return std::acos(std::clamp(c, 0.0, 1.0));
}

struct SpectrumInfo {
  double gap = 0.0;
  double second_modulus = 0.0;
};

// Uses the full spectrum to measure the modulus gap and to refuse a choice
// when a different eigenvalue is indistinguishable from the selected one.
SpectrumInfo inspect_spectrum(const CMatrix& a, const Eigenpair& chosen, const CVector& previous,
                              double t, const BranchOptions& opt, bool check_ambiguity) {
  Eigen::ComplexEigenSolver<CMatrix> solver(a, check_ambiguity);
  const CVector& values = solver.eigenvalues();
  Eigen::Index nearest = 0;
  for (Eigen::Index j = 1; j < values.size(); ++j) {
    if (std::abs(values(j) - chosen.lambda) < std::abs(values(nearest) - chosen.lambda)) {
      nearest = j;
    }
  }
  SpectrumInfo info;
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    if (j != nearest) info.second_modulus = std::max(info.second_modulus, std::abs(values(j)));
  }
  info.gap = std::abs(chosen.lambda) - info.second_modulus;

  if (check_ambiguity) {
    const double chosen_angle = vector_angle(chosen.vector, previous);
    for (Eigen::Index j = 0; j < values.size(); ++j) {
      if (std::abs(values(j) - chosen.lambda) <= 1e-8) continue;
      const bool same_modulus =
          std::abs(std::abs(values(j)) - std::abs(chosen.lambda)) < opt.ambiguity_tolerance;
      const double angle = vector_angle(solver.eigenvectors().col(j), previous);
      if (same_modulus && std::abs(angle - chosen_angle) < opt.ambiguity_tolerance) {
        std::ostringstream os;
        os << "eigenvalues " << chosen.lambda << " and " << values(j)
           << " cannot be told apart at t = " << t;
        throw Error(ErrorKind::BranchAmbiguity, os.str());
      }
    }
  }
  return info;
}

void validate_grid(std::span<const double> grid) {
  if (grid.empty()) throw Error(ErrorKind::InvalidArgument, "frequency grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i])) {
      throw Error(ErrorKind::InvalidArgument, "frequency grid has a non-finite entry");
    }
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw Error(ErrorKind::InvalidArgument, "frequency grid must be strictly increasing");
    }
  }
  if (std::find(grid.begin(), grid.end(), 0.0) == grid.end()) {
    throw Error(ErrorKind::InvalidArgument, "frequency grid must contain 0");
  }
}

// Runs `visit(i, previous, before_previous)` from the zero point outward in
// both directions; missing neighbours are passed as i itself.
template <typename Visit>
void outward_from_zero(std::span<const double> grid, Visit&& visit) {
  const auto zero = static_cast<std::size_t>(
      std::find(grid.begin(), grid.end(), 0.0) - grid.begin());
  visit(zero, zero, zero);
  for (std::size_t i = zero + 1; i < grid.size(); ++i) visit(i, i - 1, i >= zero + 2 ? i - 2 : i);
  for (std::size_t i = zero; i-- > 0;) visit(i, i + 1, i + 2 <= zero ? i + 2 : i);
}

}  // namespace

Matrix transfer_matrix(const MarkovShift& shift) {
  const auto& p = shift.transition();
  const auto& pi = shift.stationary();
  const auto n = p.rows();
  Matrix q(n, n);
  for (Eigen::Index y = 0; y < n; ++y) {
    for (Eigen::Index x = 0; x < n; ++x) q(y, x) = pi(x) * p(x, y) / pi(y);
  }
  return q;
}

CMatrix twisted_operator(const MarkovShift& shift, double t) {
  const Matrix q = transfer_matrix(shift);
  CMatrix out(q.rows(), q.cols());
  for (Eigen::Index x = 0; x < q.cols(); ++x) {
    const double angle = t * shift.observable()[static_cast<std::size_t>(x)];
    const Complex phase(std::cos(angle), std::sin(angle));
    for (Eigen::Index y = 0; y < q.rows(); ++y) out(y, x) = q(y, x) * phase;
  }
  return out;
}

Complex stationary_mean(const MarkovShift& shift, const CVector& f) {
  Complex m = 0.0;
  for (Eigen::Index s = 0; s < f.size(); ++s) m += shift.stationary()(s) * f(s);
  return m;
}

std::size_t SpectralBranch::index_of(double t) const {
  const auto it = std::find(grid.begin(), grid.end(), t);
  if (it == grid.end()) throw Error(ErrorKind::InvalidArgument, "t is not a grid point");
  return static_cast<std::size_t>(it - grid.begin());
}

SpectralBranch eigen_branch(const MarkovShift& shift, std::span<const double> grid,
                            const BranchOptions& options) {
  validate_grid(grid);
  const auto n = static_cast<Eigen::Index>(shift.size());
  SpectralBranch branch;
  branch.grid.assign(grid.begin(), grid.end());
  branch.lambda.resize(grid.size());
  branch.eigenfunction.resize(grid.size());
  branch.gap.resize(grid.size());

  std::vector<CVector> unit(grid.size());
  outward_from_zero(grid, [&](std::size_t i, std::size_t prev, std::size_t before) {
    const CMatrix a = twisted_operator(shift, grid[i]);
    const bool at_zero = i == prev;
    const CVector seed = at_zero ? CVector(CVector::Ones(n)) : unit[prev];
    Complex guess = at_zero ? Complex(1.0) : branch.lambda[prev];
    if (before != i) {
      // secant predictor, so the shift lands past eigenvalue crossings
      guess += (branch.lambda[prev] - branch.lambda[before]) *
               ((grid[i] - grid[prev]) / (grid[prev] - grid[before]));
    }
    const Eigenpair pair = inverse_iteration(a, guess, seed, options);
    const auto info = inspect_spectrum(a, pair, seed, grid[i], options, !at_zero);
    unit[i] = pair.vector;
    branch.lambda[i] = pair.lambda;
    branch.gap[i] = info.gap;
    const Complex mass = stationary_mean(shift, pair.vector);
    branch.eigenfunction[i] = pair.vector / mass;
  });

  if (options.compute_sigma2) branch.sigma2 = asymptotic_variance(shift);
  return branch;
}

std::vector<double> uniform_frequency_grid(std::size_t points) {
  if (points < 2) throw Error(ErrorKind::InvalidArgument, "grid needs at least 2 points");
  std::vector<double> grid(points);
  const double step = kTwoPi / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = -std::numbers::pi + step * static_cast<double>(i);
  }
  if (points % 2 == 1) grid[points / 2] = 0.0;
  grid.front() = -std::numbers::pi;
  grid.back() = std::numbers::pi;
  return grid;
}

double green_kubo_variance(const MarkovShift& shift) {
  const auto& p = shift.transition();
  const auto& pi = shift.stationary();
  const auto n = p.rows();
  // I - P + 1 πᵀ is invertible for an irreducible chain and its solution
  // automatically satisfies πᵀ g = 0 because πᵀ φ = 0.
  Matrix a = Matrix::Identity(n, n) - p + Vector::Ones(n) * pi.transpose();
  Vector phi(n);
  for (Eigen::Index s = 0; s < n; ++s) phi(s) = shift.observable()[static_cast<std::size_t>(s)];
  const Vector g = a.fullPivLu().solve(phi);
  double sigma2 = 0.0;
  for (Eigen::Index s = 0; s < n; ++s) sigma2 += pi(s) * (2.0 * phi(s) * g(s) - phi(s) * phi(s));
  return sigma2;
}

double curvature_variance(const MarkovShift& shift, double step) {
  const double h = step;
  const std::vector<double> grid{-4 * h, -2 * h, -h, 0.0, h, 2 * h, 4 * h};
  BranchOptions opt;
  opt.compute_sigma2 = false;
  const auto branch = eigen_branch(shift, grid, opt);
  const auto second_difference = [&](std::size_t k) {
    // grid index 3 is zero; k = 1, 2, 3 -> steps h, 2h, 4h
    const double s = grid[3 + k];
    return (branch.lambda[3 + k].real() + branch.lambda[3 - k].real() - 2.0) / (s * s);
  };
  const double d_h = second_difference(1);
  const double d_2h = second_difference(2);
  const double d_4h = second_difference(3);
  const double r1 = (4.0 * d_h - d_2h) / 3.0;
  const double r2 = (4.0 * d_2h - d_4h) / 3.0;
  return -(16.0 * r1 - r2) / 15.0;
}

double asymptotic_variance(const MarkovShift& shift) {
  const double gk = green_kubo_variance(shift);
  if (gk <= 1e-12) {
    throw Error(ErrorKind::VarianceZero,
                "asymptotic variance vanishes: the observable is a coboundary");
  }
  const double curvature = curvature_variance(shift);
  if (std::abs(curvature - gk) > 1e-6 * gk) {
    std::ostringstream os;
    os.precision(17);
    os << "Green-Kubo variance " << gk << " disagrees with -lambda''(0) = " << curvature;
    throw Error(ErrorKind::ConventionMismatch, os.str());
  }
  return gk;
}

double spectral_radius(const MarkovShift& shift, double t) {
  Eigen::ComplexEigenSolver<CMatrix> solver(twisted_operator(shift, t), false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

AperiodicityReport check_aperiodicity(const MarkovShift& shift, std::size_t scan_points,
                                      unsigned threads) {
  if (scan_points < 64) {
    throw Error(ErrorKind::InvalidArgument, "check_aperiodicity needs scan_points >= 64");
  }
  const double lo = kTwoPi / (8.0 * static_cast<double>(scan_points));
  const double hi = kTwoPi - lo;
  const double spacing = (hi - lo) / static_cast<double>(scan_points - 1);

  std::vector<double> ts(scan_points);
  for (std::size_t i = 0; i < scan_points; ++i) ts[i] = lo + spacing * static_cast<double>(i);
  ts.back() = hi;
  std::vector<double> gaps(ts.size());
  parallel_for(ts.size(), threads,
               [&](std::size_t i) { gaps[i] = 1.0 - spectral_radius(shift, ts[i]); });

  // 8x refinement around points that come close to the unit circle.
  std::vector<double> extra;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (gaps[i] >= 1e-4) continue;
    for (int k = -7; k <= 7; ++k) {
      if (k == 0) continue;
      const double t = ts[i] + spacing * k / 8.0;
      if (t > lo && t < hi) extra.push_back(t);
    }
  }
  extra.push_back(kInteriorMargin);
  extra.push_back(kTwoPi - kInteriorMargin);
  std::vector<double> extra_gaps(extra.size());
  parallel_for(extra.size(), threads,
               [&](std::size_t i) { extra_gaps[i] = 1.0 - spectral_radius(shift, extra[i]); });

  std::vector<std::pair<double, double>> samples;  // (t, gap)
  samples.reserve(ts.size() + extra.size());
  for (std::size_t i = 0; i < ts.size(); ++i) samples.emplace_back(ts[i], gaps[i]);
  for (std::size_t i = 0; i < extra.size(); ++i) samples.emplace_back(extra[i], extra_gaps[i]);
  std::sort(samples.begin(), samples.end());
  samples.erase(std::unique(samples.begin(), samples.end(),
                            [](const auto& a, const auto& b) { return a.first == b.first; }),
                samples.end());

  std::size_t evaluations = samples.size();
  const auto gap_at = [&](double t) {
    ++evaluations;
    return 1.0 - spectral_radius(shift, t);
  };
  // Golden-section polish of every local minimum of the sampled gap.
  const auto polish = [&](double a, double b) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = gap_at(c);
    double fd = gap_at(d);
    while (b - a > 1e-12) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - inv_phi * (b - a);
        fc = gap_at(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + inv_phi * (b - a);
        fd = gap_at(d);
      }
    }
    const double t = (a + b) / 2.0;
    return std::make_pair(t, gap_at(t));
  };

  AperiodicityReport report;
  report.scan_points = scan_points;
  report.min_gap = std::numeric_limits<double>::infinity();
  report.interior_gap = std::numeric_limits<double>::infinity();
  const auto consider = [&](double t, double gap) {
    if (gap < report.min_gap) {
      report.min_gap = gap;
      report.offending_t = t;
    }
    if (t >= kInteriorMargin && t <= kTwoPi - kInteriorMargin) {
      report.interior_gap = std::min(report.interior_gap, gap);
    }
  };
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto [t, gap] = samples[i];
    consider(t, gap);
    const bool left_ok = i == 0 || gap <= samples[i - 1].second;
    const bool right_ok = i + 1 == samples.size() || gap <= samples[i + 1].second;
    if (left_ok && right_ok && i > 0 && i + 1 < samples.size()) {
      const auto [tp, gp] = polish(samples[i - 1].first, samples[i + 1].first);
      consider(tp, gp);
    }
  }
  report.evaluations = evaluations;
  report.is_aperiodic = report.min_gap > kAperiodicGapThreshold;
  return report;
}

LeadingEigen leading_eigen(const MarkovShift& shift, double t) {
  const auto n = static_cast<Eigen::Index>(shift.size());
  const std::size_t steps =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::abs(t) / (kTwoPi / 1024))));
  BranchOptions opt;
  CVector right = CVector::Ones(n);
  CVector left(n);
  for (Eigen::Index s = 0; s < n; ++s) left(s) = shift.stationary()(s);
  Complex lambda = 1.0;
  CMatrix a;
  for (std::size_t k = 1; k <= steps; ++k) {
    const double tk = t * static_cast<double>(k) / static_cast<double>(steps);
    a = twisted_operator(shift, tk);
    const auto r = inverse_iteration(a, lambda, right, opt);
    const CMatrix at = a.transpose();
    const auto l = inverse_iteration(at, r.lambda, left, opt);
    right = r.vector;
    left = l.vector;
    lambda = r.lambda;
  }
  LeadingEigen out;
  out.lambda = lambda;
  out.right = right / stationary_mean(shift, right);
  out.left = left / (left.transpose() * out.right)(0);
  Eigen::ComplexEigenSolver<CMatrix> solver(a, false);
  const CVector& values = solver.eigenvalues();
  Eigen::Index nearest = 0;
  for (Eigen::Index j = 1; j < values.size(); ++j) {
    if (std::abs(values(j) - lambda) < std::abs(values(nearest) - lambda)) nearest = j;
  }
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    if (j != nearest) out.second_modulus = std::max(out.second_modulus, std::abs(values(j)));
  }
  return out;
}

std::vector<double> rank_one_residuals(const MarkovShift& shift, double t, std::size_t n_max) {
  const auto lead = leading_eigen(shift, t);
  const CMatrix a = twisted_operator(shift, t);
  const auto n = static_cast<Eigen::Index>(shift.size());
  const CVector ones = CVector::Ones(n);
  const CVector projected = lead.right * (lead.left.transpose() * ones)(0);
  std::vector<double> out;
  CVector x = ones;
  Complex power = 1.0;
  for (std::size_t k = 1; k <= n_max; ++k) {
    x = a * x;
    power *= lead.lambda;
    out.push_back((x - power * projected).lpNorm<Eigen::Infinity>());
  }
  return out;
}

std::string branch_to_csv(const SpectralBranch& branch) {
  CsvWriter csv({"t", "re_lambda", "im_lambda", "abs_lambda", "gap"});
  for (std::size_t i = 0; i < branch.grid.size(); ++i) {
    csv.field(branch.grid[i])
        .field(branch.lambda[i].real())
        .field(branch.lambda[i].imag())
        .field(std::abs(branch.lambda[i]))
        .field(branch.gap[i]);
    csv.end_row();
  }
  return csv.str();
}

std::string aperiodicity_to_json(const AperiodicityReport& report) {
  nlohmann::ordered_json doc;
  doc["is_aperiodic"] = report.is_aperiodic;
  doc["min_gap"] = report.min_gap;
  doc["offending_t"] = report.offending_t;
  doc["interior_gap"] = report.interior_gap;
  doc["scan_points"] = report.scan_points;
  return doc.dump(2) + "\n";
}

}  // namespace loctime
