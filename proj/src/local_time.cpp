#include "loctime/local_time.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "loctime/error.hpp"
#include "loctime/io.hpp"
#include "loctime/parallel.hpp"

namespace loctime {

double LocalTimeField::root_n() const { return std::sqrt(static_cast<double>(n)); }

std::uint64_t LocalTimeField::count(long long level) const {
  if (level < min_level || level > max_level()) return 0;
  return counts[static_cast<std::size_t>(level - min_level)];
}

std::uint64_t LocalTimeField::total() const {
  std::uint64_t sum = 0;
  for (auto c : counts) sum += c;
  return sum;
}

long long LocalTimeField::level_of(double x) const {
  return static_cast<long long>(std::floor(root_n() * x));
}

double LocalTimeField::value(double x) const {
  return static_cast<double>(count(level_of(x))) / root_n();
}

LocalTimeField local_time_field(std::span<const int> increments) {
  if (increments.empty()) {
    throw Error(ErrorKind::InvalidArgument, "local_time_field needs a nonempty path");
  }
  long long pos = 0;
  long long lo = 0;
  long long hi = 0;
  for (const int step : increments) {
    pos += step;
    lo = std::min(lo, pos);
    hi = std::max(hi, pos);
  }
  LocalTimeField field;
  field.n = increments.size();
  field.min_level = lo;
  field.final_position = pos;
  field.counts.assign(static_cast<std::size_t>(hi - lo + 1), 0);
  pos = 0;
  ++field.counts[static_cast<std::size_t>(-lo)];
  for (const int step : increments) {
    pos += step;
    ++field.counts[static_cast<std::size_t>(pos - lo)];
  }
  return field;
}

bool OccupationResult::within_bound() const {
  return std::abs(nu - integral) <= strips.left + strips.right + 2.0 / static_cast<double>(n);
}

OccupationResult occupation(const LocalTimeField& field, double a, double b) {
  if (!(a < b)) throw Error(ErrorKind::InvalidArgument, "occupation needs a < b");
  const double root = field.root_n();
  const auto n = static_cast<double>(field.n);
  OccupationResult r;
  r.a = a;
  r.b = b;
  r.n = field.n;

  // ω_n takes the value S_k/√n on [k/n, (k+1)/n) for k = 0..n-1, so the visit
  // at time n is excluded from ν.
  std::uint64_t inside = 0;
  for (long long level = field.min_level; level <= field.max_level(); ++level) {
    const double v = static_cast<double>(level) / root;
    if (a <= v && v < b) inside += field.count(level);
  }
  {
    const double last = static_cast<double>(field.final_position) / root;
    if (a <= last && last < b) --inside;
  }
  r.nu = static_cast<double>(inside) / n;

  const long long first_cell = static_cast<long long>(std::floor(a * root));
  const long long last_cell = static_cast<long long>(std::floor(b * root));
  double integral = 0.0;
  for (long long j = std::max(first_cell, field.min_level);
       j <= std::min(last_cell, field.max_level()); ++j) {
    const double lo = std::max(a, static_cast<double>(j) / root);
    const double hi = std::min(b, static_cast<double>(j + 1) / root);
    if (hi > lo) integral += static_cast<double>(field.count(j)) / root * (hi - lo);
  }
  r.integral = integral;
  r.strips.left = static_cast<double>(field.count(first_cell)) / n;
  r.strips.right = static_cast<double>(field.count(last_cell)) / n;
  return r;
}

OccupationResult occupation(std::span<const int> increments, double a, double b) {
  return occupation(local_time_field(increments), a, b);
}

namespace {

struct Window {
  long long first = 0;  // first cell index
  std::vector<double> values;
};

Window cells_on(const LocalTimeField& field, long long first, long long last) {
  Window w;
  w.first = first;
  const double root = field.root_n();
  for (long long j = first; j <= last; ++j) {
    w.values.push_back(static_cast<double>(field.count(j)) / root);
  }
  return w;
}

}  // namespace

double plain_modulus(const LocalTimeField& field, double h, double width) {
  const double root = field.root_n();
  const auto first = static_cast<long long>(std::floor(-h * root));
  const auto last = static_cast<long long>(std::floor(h * root));
  const Window w = cells_on(field, first, last);
  const std::size_t m = w.values.size();
  double best = 0.0;
  for (std::size_t a = 0; a < m; ++a) {
    // cells a < b can host points closer than `width` iff (b - a - 1)/√n < width
    for (std::size_t b = a + 1; b < m; ++b) {
      if (!(static_cast<double>(b - a - 1) / root < width)) break;
      best = std::max(best, std::abs(w.values[b] - w.values[a]));
    }
  }
  return best;
}

double sparse_modulus(const LocalTimeField& field, double h, double delta) {
  const double root = field.root_n();
  // Partition points: -h, the breakpoints k/√n strictly inside (-h, h), h.
  struct Point {
    double pos;
    long long start_cell;  // first cell of [pos, ...)
    long long end_cell;    // last cell of [..., pos)
  };
  std::vector<Point> points;
  const auto left_cell = static_cast<long long>(std::floor(-h * root));
  const auto right_cell = static_cast<long long>(std::ceil(h * root)) - 1;
  points.push_back({-h, left_cell, left_cell - 1});
  long long k = left_cell + 1;
  while (static_cast<double>(k) / root <= -h) ++k;
  for (; static_cast<double>(k) / root < h; ++k) {
    points.push_back({static_cast<double>(k) / root, k, k - 1});
  }
  points.push_back({h, right_cell + 1, right_cell});

  const Window w = cells_on(field, left_cell, right_cell);
  const auto value = [&](long long cell) {
    return w.values[static_cast<std::size_t>(cell - w.first)];
  };

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> best(points.size(), inf);
  best[0] = 0.0;
  for (std::size_t j = 1; j < points.size(); ++j) {
    double hi = -inf;
    double lo = inf;
    long long covered_from = points[j].end_cell + 1;  // cells [covered_from, end_cell] seen
    for (std::size_t i = j; i-- > 0;) {
      for (long long c = points[i].start_cell; c < covered_from; ++c) {
        hi = std::max(hi, value(c));
        lo = std::min(lo, value(c));
      }
      covered_from = std::min(covered_from, points[i].start_cell);
      const double osc = hi >= lo ? hi - lo : 0.0;
      if (osc >= best[j]) break;
      if (points[j].pos - points[i].pos > delta && best[i] < inf) {
        best[j] = std::min(best[j], std::max(best[i], osc));
      }
    }
  }
  return best.back();
}

ModulusReport modulus(const LocalTimeField& field, double h, double delta) {
  if (!(delta > 0.0 && delta < 0.5 && h >= 0.5)) {
    throw Error(ErrorKind::InvalidArgument, "modulus needs 0 < delta < 1/2 <= h");
  }
  ModulusReport r;
  r.h = h;
  r.delta = delta;
  r.omega = plain_modulus(field, h, 2.0 * delta);
  r.omega_prime = sparse_modulus(field, h, delta);
  return r;
}

double sup_on_window(const LocalTimeField& field, double h) {
  const double root = field.root_n();
  const auto first = static_cast<long long>(std::floor(-h * root));
  const auto last = static_cast<long long>(std::floor(h * root));
  std::uint64_t best = 0;
  for (long long j = first; j <= last; ++j) best = std::max(best, field.count(j));
  return static_cast<double>(best) / root;
}

void for_each_trajectory(const MarkovShift& shift, std::size_t n, std::size_t count,
                         std::uint64_t seed, unsigned threads,
                         const std::function<void(std::size_t, std::span<const int>)>& body) {
  if (n == 0 || count == 0) {
    throw Error(ErrorKind::InvalidArgument, "trajectories need n >= 1 and count >= 1");
  }
  parallel_for(count, threads, [&](std::size_t i) {
    thread_local std::vector<int> buffer;
    buffer.resize(n);
    simulate_increments(shift, seed, i, buffer);
    body(i, buffer);
  });
}

MomentStatistics moment_statistics(const MarkovShift& shift, std::size_t n, long long x,
                                   long long y, std::size_t samples, std::uint64_t seed,
                                   std::span<const double> eps_grid, unsigned threads,
                                   std::size_t min_samples) {
  if (x == y) throw Error(ErrorKind::InvalidArgument, "moment_statistics needs x != y");
  if (samples < min_samples) {
    throw Error(ErrorKind::InvalidArgument,
                "moment_statistics needs at least " + std::to_string(min_samples) + " samples");
  }
  std::vector<long long> diffs(samples);
  for_each_trajectory(shift, n, samples, seed, threads, [&](std::size_t i, std::span<const int> inc) {
    long long pos = 0;
    long long d = (x == 0) - (y == 0);
    for (const int step : inc) {
      pos += step;
      d += (pos == x) - (pos == y);
    }
    diffs[i] = d;
  });

  const double root = std::sqrt(static_cast<double>(n));
  const auto count = static_cast<double>(samples);
  std::vector<double> sixth(samples);
  for (std::size_t i = 0; i < samples; ++i) sixth[i] = std::pow(static_cast<double>(diffs[i]), 6);
  MomentStatistics st;
  st.n = n;
  st.x = x;
  st.y = y;
  st.samples = samples;
  st.m6 = pairwise_sum(sixth) / count;
  std::vector<double> sq(samples);
  for (std::size_t i = 0; i < samples; ++i) sq[i] = (sixth[i] - st.m6) * (sixth[i] - st.m6);
  st.m6_stderr = std::sqrt(pairwise_sum(sq) / (count - 1.0) / count);

  const auto nd = static_cast<double>(n);
  const auto gap = static_cast<double>(std::llabs(x - y));
  const double logn = std::log(nd);
  st.rhs = std::pow(root * gap, 3) + nd * nd * gap * logn + nd * nd * logn * logn;
  st.ratio = st.m6 / st.rhs;

  for (const double eps : eps_grid) {
    std::size_t hits = 0;
    for (const auto d : diffs) hits += static_cast<double>(std::llabs(d)) / root > eps;
    TailEstimate t;
    t.eps = eps;
    t.prob = static_cast<double>(hits) / count;
    t.std_error = std::sqrt(t.prob * (1.0 - t.prob) / count);
    st.tails.push_back(t);
  }
  return st;
}

std::vector<double> level_samples(const MarkovShift& shift, std::size_t n, double level,
                                  std::size_t count, std::uint64_t seed, unsigned threads) {
  const double root = std::sqrt(static_cast<double>(n));
  const auto target = static_cast<long long>(std::floor(root * level));
  std::vector<double> out(count);
  for_each_trajectory(shift, n, count, seed, threads, [&](std::size_t i, std::span<const int> inc) {
    long long pos = 0;
    std::uint64_t visits = target == 0;
    for (const int step : inc) {
      pos += step;
      visits += pos == target;
    }
    out[i] = static_cast<double>(visits) / root;
  });
  std::sort(out.begin(), out.end());
  return out;
}

OccupationSummary occupation_experiment(const MarkovShift& shift, std::size_t n,
                                        std::span<const std::pair<double, double>> intervals,
                                        std::size_t count, std::uint64_t seed, unsigned threads) {
  const std::size_t k = intervals.size();
  std::vector<double> diff(count * k);
  std::vector<double> strips(count * k);
  std::vector<std::size_t> bad(count, 0);
  for_each_trajectory(shift, n, count, seed, threads, [&](std::size_t i, std::span<const int> inc) {
    const auto field = local_time_field(inc);
    for (std::size_t j = 0; j < k; ++j) {
      const auto r = occupation(field, intervals[j].first, intervals[j].second);
      diff[j * count + i] = std::abs(r.nu - r.integral);
      strips[j * count + i] = r.strips.left + r.strips.right;
      if (!r.within_bound()) ++bad[i];
    }
  });
  OccupationSummary s;
  s.n = n;
  s.trajectories = count;
  s.intervals.assign(intervals.begin(), intervals.end());
  for (auto b : bad) s.violations += b;
  for (std::size_t j = 0; j < k; ++j) {
    s.mean_abs_difference.push_back(pairwise_sum(diff.data() + j * count, count) /
                                    static_cast<double>(count));
    s.mean_strips.push_back(pairwise_sum(strips.data() + j * count, count) /
                            static_cast<double>(count));
  }
  return s;
}

ModulusSummary modulus_experiment(const MarkovShift& shift, std::size_t n, double h,
                                  std::span<const double> deltas, double threshold,
                                  std::span<const double> sup_thresholds, std::size_t count,
                                  std::uint64_t seed, unsigned threads) {
  const std::size_t kd = deltas.size();
  const std::size_t ka = sup_thresholds.size();
  std::vector<unsigned char> exceed(count * kd, 0);
  std::vector<unsigned char> violated(count * kd, 0);
  std::vector<unsigned char> sup_exceed(count * ka, 0);
  for_each_trajectory(shift, n, count, seed, threads, [&](std::size_t i, std::span<const int> inc) {
    const auto field = local_time_field(inc);
    for (std::size_t j = 0; j < kd; ++j) {
      const auto r = modulus(field, h, deltas[j]);
      exceed[j * count + i] = r.omega_prime >= threshold;
      violated[j * count + i] = r.omega_prime > r.omega;
    }
    const double sup = sup_on_window(field, h);
    for (std::size_t j = 0; j < ka; ++j) sup_exceed[j * count + i] = sup > sup_thresholds[j];
  });
  ModulusSummary s;
  s.n = n;
  s.trajectories = count;
  s.h = h;
  s.threshold = threshold;
  s.deltas.assign(deltas.begin(), deltas.end());
  s.sup_thresholds.assign(sup_thresholds.begin(), sup_thresholds.end());
  const auto c = static_cast<double>(count);
  for (std::size_t j = 0; j < kd; ++j) {
    std::size_t e = 0;
    for (std::size_t i = 0; i < count; ++i) {
      e += exceed[j * count + i];
      s.violations += violated[j * count + i];
    }
    const double p = static_cast<double>(e) / c;
    s.prob_exceed.push_back(p);
    s.prob_exceed_stderr.push_back(std::sqrt(p * (1.0 - p) / c));
  }
  for (std::size_t j = 0; j < ka; ++j) {
    std::size_t e = 0;
    for (std::size_t i = 0; i < count; ++i) e += sup_exceed[j * count + i];
    s.prob_sup_exceed.push_back(static_cast<double>(e) / c);
  }
  return s;
}

std::string field_to_csv(const LocalTimeField& field) {
  CsvWriter csv({"k", "count"});
  for (long long k = field.min_level; k <= field.max_level(); ++k) {
    csv.field(k).field(static_cast<std::size_t>(field.count(k)));
    csv.end_row();
  }
  return csv.str();
}

std::string moments_to_json(const MomentStatistics& st) {
  nlohmann::ordered_json doc;
  doc["n"] = st.n;
  doc["x"] = st.x;
  doc["y"] = st.y;
  doc["samples"] = st.samples;
  doc["m6"] = st.m6;
  doc["m6_stderr"] = st.m6_stderr;
  doc["rhs"] = st.rhs;
  doc["ratio"] = st.ratio;
  auto tails = nlohmann::ordered_json::array();
  for (const auto& t : st.tails) {
    nlohmann::ordered_json e;
    e["eps"] = t.eps;
    e["prob"] = t.prob;
    e["stderr"] = t.std_error;
    tails.push_back(e);
  }
  doc["tails"] = tails;
  return doc.dump(2) + "\n";
}

}  // namespace loctime
