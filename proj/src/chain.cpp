#include "loctime/chain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>
#include <sstream>

#include <nlohmann/json.hpp>

#include "loctime/error.hpp"
#include "loctime/parallel.hpp"

namespace loctime {

namespace {

void require_stochastic(const Matrix& p) {
  if (p.rows() == 0 || p.rows() != p.cols()) {
    throw Error(ErrorKind::NotStochastic, "transition matrix must be square and nonempty");
  }
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    double sum = 0.0;
    for (Eigen::Index c = 0; c < p.cols(); ++c) {
      const double v = p(r, c);
      if (!std::isfinite(v) || v < 0.0) {
        std::ostringstream os;
        os << "row " << r << " column " << c << " has invalid entry " << v;
        throw Error(ErrorKind::NotStochastic, os.str());
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      std::ostringstream os;
      os.precision(17);
      os << "row " << r << " sums to " << sum;
      throw Error(ErrorKind::NotStochastic, os.str());
    }
  }
}

std::vector<int> bfs_levels(const Matrix& p, bool reversed) {
  const auto n = static_cast<std::size_t>(p.rows());
  std::vector<int> level(n, -1);
  std::queue<std::size_t> q;
  level[0] = 0;
  q.push(0);
  while (!q.empty()) {
    const auto u = q.front();
    q.pop();
    for (std::size_t v = 0; v < n; ++v) {
      const double w = reversed ? p(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(u))
                                : p(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(v));
      if (w > 0.0 && level[v] < 0) {
        level[v] = level[u] + 1;
        q.push(v);
      }
    }
  }
  return level;
}

Vector solve_fixed_point(const Matrix& p) {
  // (P^T - I) π = 0 with one equation replaced by Σπ = 1.
  const auto n = p.rows();
  Matrix a = p.transpose() - Matrix::Identity(n, n);
  a.row(n - 1).setOnes();
  Vector rhs = Vector::Zero(n);
  rhs(n - 1) = 1.0;
  return a.fullPivLu().solve(rhs);
}

}  // namespace

double MarkovShift::observable_mean() const {
  double mean = 0.0;
  for (std::size_t s = 0; s < size(); ++s) {
    mean += stationary_(static_cast<Eigen::Index>(s)) * observable_[s];
  }
  return mean;
}

MixingDiagnosis diagnose_mixing(const Matrix& p) {
  MixingDiagnosis d;
  const auto fwd = bfs_levels(p, false);
  const auto bwd = bfs_levels(p, true);
  const auto unreached = [](int l) { return l < 0; };
  if (std::any_of(fwd.begin(), fwd.end(), unreached) ||
      std::any_of(bwd.begin(), bwd.end(), unreached)) {
    return d;
  }
  d.irreducible = true;
  // For a strongly connected graph the period is the gcd over edges u->v of
  // level(u) + 1 - level(v).
  int g = 0;
  for (Eigen::Index u = 0; u < p.rows(); ++u) {
    for (Eigen::Index v = 0; v < p.cols(); ++v) {
      if (p(u, v) > 0.0) {
        g = std::gcd(g, std::abs(fwd[static_cast<std::size_t>(u)] + 1 -
                                 fwd[static_cast<std::size_t>(v)]));
      }
    }
  }
  d.period = static_cast<std::size_t>(g);
  return d;
}

Vector stationary_distribution(const Matrix& p) {
  require_stochastic(p);
  const auto diag = diagnose_mixing(p);
  if (!diag.irreducible) throw Error(ErrorKind::NotMixing, "transition graph is reducible");
  if (diag.period != 1) {
    throw Error(ErrorKind::NotMixing,
                "transition graph has period " + std::to_string(diag.period));
  }

  const auto n = p.rows();
  Eigen::RowVectorXd pi = Eigen::RowVectorXd::Constant(n, 1.0 / static_cast<double>(n));
  bool converged = false;
  for (int it = 0; it < 100000; ++it) {
    Eigen::RowVectorXd next = pi * p;
    next /= next.sum();
    const double change = (next - pi).lpNorm<1>();
    pi = next;
    if (change < 1e-14) {
      converged = true;
      break;
    }
  }
  Vector result = pi.transpose();
  if (!converged || (p.transpose() * result - result).lpNorm<Eigen::Infinity>() >
                        kFixedPointTolerance) {
    result = solve_fixed_point(p);
  }
  result = result.cwiseMax(0.0);
  result /= result.sum();
  if ((result.array() <= 0.0).any()) {
    throw Error(ErrorKind::NotMixing, "stationary vector has a zero entry");
  }
  return result;
}

MarkovShift build_chain(const Matrix& transition, std::span<const int> observable,
                        std::vector<std::string> states) {
  require_stochastic(transition);
  const auto n = static_cast<std::size_t>(transition.rows());
  if (observable.size() != n) {
    throw Error(ErrorKind::InvalidArgument, "observable has " +
                                                std::to_string(observable.size()) +
                                                " entries, expected " + std::to_string(n));
  }
  if (states.empty()) {
    for (std::size_t i = 0; i < n; ++i) states.push_back(std::to_string(i));
  } else if (states.size() != n) {
    throw Error(ErrorKind::InvalidArgument, "states has " + std::to_string(states.size()) +
                                                " labels, expected " + std::to_string(n));
  }

  MarkovShift shift;
  shift.states_ = std::move(states);
  shift.transition_ = transition;
  shift.stationary_ = stationary_distribution(transition);
  shift.observable_.assign(observable.begin(), observable.end());

  const Vector residual = transition.transpose() * shift.stationary_ - shift.stationary_;
  if (residual.lpNorm<Eigen::Infinity>() > kFixedPointTolerance) {
    throw Error(ErrorKind::NotMixing, "stationary vector did not reach the fixed point");
  }
  if (std::all_of(observable.begin(), observable.end(), [](int v) { return v == 0; })) {
    throw Error(ErrorKind::DegenerateObservable, "observable is identically zero");
  }
  const double mean = shift.observable_mean();
  if (std::abs(mean) > kMeanTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "stationary mean of the observable is " << mean;
    throw Error(ErrorKind::MeanNotZero, os.str());
  }

  const auto [lo, hi] = std::minmax_element(observable.begin(), observable.end());
  shift.min_phi_ = *lo;
  shift.max_phi_ = *hi;

  shift.pi_cdf_.resize(n);
  shift.row_cdf_.resize(n * n);
  double acc = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    acc += shift.stationary_(static_cast<Eigen::Index>(s));
    shift.pi_cdf_[s] = acc;
  }
  shift.pi_cdf_[n - 1] = 1.0;
  for (std::size_t r = 0; r < n; ++r) {
    acc = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      acc += transition(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      shift.row_cdf_[r * n + c] = acc;
    }
    shift.row_cdf_[r * n + n - 1] = 1.0;
  }
  return shift;
}

namespace {

inline std::size_t draw(const double* cdf, std::size_t n, double u) {
  std::size_t s = 0;
  while (s + 1 < n && u >= cdf[s]) ++s;
  return s;
}

}  // namespace

void simulate_increments(const MarkovShift& shift, std::uint64_t seed, std::uint64_t index,
                         std::span<int> out) {
  const std::size_t n = shift.size();
  const double* pi_cdf = shift.stationary_cdf().data();
  const double* rows = shift.row_cdf().data();
  const int* phi = shift.observable().data();
  CounterStream rng(seed, index);
  std::size_t state = draw(pi_cdf, n, rng.next_unit());
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (k > 0) state = draw(rows + state * n, n, rng.next_unit());
    out[k] = phi[state];
  }
}

PathBatch sample_paths(const MarkovShift& shift, std::size_t n, std::size_t count,
                       std::uint64_t seed, unsigned threads) {
  if (n == 0 || count == 0) {
    throw Error(ErrorKind::InvalidArgument, "sample_paths needs n >= 1 and count >= 1");
  }
  PathBatch batch;
  batch.n = n;
  batch.count = count;
  batch.seed = seed;
  batch.increments.resize(n * count);
  parallel_for(count, threads, [&](std::size_t i) {
    simulate_increments(shift, seed, i, std::span<int>(batch.increments).subspan(i * n, n));
  });
  return batch;
}

MarkovShift load_chain_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ParseError, std::string("chain file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::ParseError, "chain file must be a JSON object");
  for (const char* key : {"transition", "observable"}) {
    if (!doc.contains(key)) {
      throw Error(ErrorKind::ParseError, std::string("missing key \"") + key + "\"");
    }
  }

  const auto& rows = doc["transition"];
  if (!rows.is_array() || rows.empty()) {
    throw Error(ErrorKind::ParseError, "key \"transition\" must be a nonempty array of rows");
  }
  const auto n = rows.size();
  Matrix p(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    const auto& row = rows[r];
    if (!row.is_array() || row.size() != n) {
      throw Error(ErrorKind::ParseError, "key \"transition\" row " + std::to_string(r) +
                                             " must be an array of " + std::to_string(n) +
                                             " numbers");
    }
    for (std::size_t c = 0; c < n; ++c) {
      if (!row[c].is_number()) {
        throw Error(ErrorKind::ParseError, "key \"transition\" row " + std::to_string(r) +
                                               " column " + std::to_string(c) +
                                               " is not a number");
      }
      p(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c].get<double>();
    }
  }

  const auto& obs = doc["observable"];
  if (!obs.is_array() || obs.size() != n) {
    throw Error(ErrorKind::ParseError,
                "key \"observable\" must be an array of " + std::to_string(n) + " integers");
  }
  std::vector<int> phi(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!obs[i].is_number_integer()) {
      throw Error(ErrorKind::ParseError,
                  "key \"observable\" entry " + std::to_string(i) + " is not an integer");
    }
    phi[i] = obs[i].get<int>();
  }

  std::vector<std::string> labels;
  if (doc.contains("states")) {
    const auto& st = doc["states"];
    if (!st.is_array() || st.size() != n) {
      throw Error(ErrorKind::ParseError,
                  "key \"states\" must be an array of " + std::to_string(n) + " strings");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!st[i].is_string()) {
        throw Error(ErrorKind::ParseError,
                    "key \"states\" entry " + std::to_string(i) + " is not a string");
      }
      labels.push_back(st[i].get<std::string>());
    }
  }
  return build_chain(p, phi, std::move(labels));
}

MarkovShift load_chain_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open chain file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return load_chain_json(ss.str());
}

std::string chain_to_json(const MarkovShift& shift) {
  nlohmann::json doc;
  doc["states"] = shift.states();
  auto rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < shift.transition().rows(); ++r) {
    auto row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < shift.transition().cols(); ++c) {
      row.push_back(shift.transition()(r, c));
    }
    rows.push_back(row);
  }
  doc["transition"] = rows;
  doc["observable"] = shift.observable();
  return doc.dump(2);
}

namespace models {

MarkovShift lazy_walk() {
  Matrix p(3, 3);
  p << 0.25, 0.5, 0.25, 0.25, 0.5, 0.25, 0.25, 0.5, 0.25;
  const int phi[] = {-1, 0, 1};
  return build_chain(p, phi, {"down", "stay", "up"});
}

MarkovShift plus_minus_walk() {
  Matrix p(2, 2);
  p << 0.5, 0.5, 0.5, 0.5;
  const int phi[] = {1, -1};
  return build_chain(p, phi, {"up", "down"});
}

MarkovShift two_state_flip(double flip) {
  Matrix p(2, 2);
  p << 1.0 - flip, flip, flip, 1.0 - flip;
  const int phi[] = {1, -1};
  return build_chain(p, phi, {"up", "down"});
}

MarkovShift circulant_walk() {
  Matrix p(3, 3);
  p << 0.5, 0.3, 0.2, 0.2, 0.5, 0.3, 0.3, 0.2, 0.5;
  const int phi[] = {-1, 0, 1};
  return build_chain(p, phi, {"down", "stay", "up"});
}

MarkovShift sticky_walk(double stay, double leave) {
  Matrix p(3, 3);
  p << stay, 1.0 - stay, 0.0, leave / 2.0, 1.0 - leave, leave / 2.0, 0.0, 1.0 - stay, stay;
  const int phi[] = {-1, 0, 1};
  return build_chain(p, phi, {"down", "stay", "up"});
}

}  // namespace models

}  // namespace loctime
