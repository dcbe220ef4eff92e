#include "xfermse/evalmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>

#include "xfermse/errors.hpp"

namespace xfermse::evalmetrics {

namespace {

void require_pairs(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw DimensionError("correlation inputs have lengths " + std::to_string(x.size()) + " and " +
                         std::to_string(y.size()));
  }
  if (x.size() < 2) throw DimensionError("correlation needs at least two pairs");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw InvalidArgument("correlation input is not finite");
    }
  }
}

bool is_constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double e) { return e == v.front(); });
}

double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
  if (is_constant(x) || is_constant(y)) throw DegenerateError("constant input has zero variance");
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateError("zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// Continued fraction for the incomplete beta (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 200000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

std::int64_t tie_pairs(std::int64_t run) { return run * (run - 1) / 2; }

}  // namespace

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::Pearson:
      return "pearson";
    case Metric::Spearman:
      return "spearman";
    case Metric::Kendall:
      return "kendall";
  }
  return "unknown";
}

Metric parse_metric(std::string_view name) {
  if (name == "pearson") return Metric::Pearson;
  if (name == "spearman") return Metric::Spearman;
  if (name == "kendall") return Metric::Kendall;
  throw InvalidArgument("unknown metric '" + std::string(name) + "'");
}

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw InvalidArgument("incomplete_beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument("incomplete_beta needs x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided(double t, double dof) {
  if (!(dof > 0.0)) throw InvalidArgument("degrees of freedom must be positive");
  if (std::isinf(t)) return 0.0;
  return incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t));
}

CorrelationReport pearson(std::span<const double> x, std::span<const double> y) {
  require_pairs(x, y);
  CorrelationReport rep;
  rep.metric = Metric::Pearson;
  rep.n_pairs = x.size();
  rep.value = pearson_r(x, y);
  if (x.size() > 2) {
    const double dof = static_cast<double>(x.size() - 2);
    const double one_minus_r2 = 1.0 - rep.value * rep.value;
    rep.p_value = one_minus_r2 <= 0.0
                      ? 0.0
                      : student_t_two_sided(rep.value * std::sqrt(dof / one_minus_r2), dof);
  }
  return rep;
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
    // positions i..j-1 hold 1-based ranks i+1..j
    const double avg = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
    i = j;
  }
  return ranks;
}

CorrelationReport spearman(std::span<const double> x, std::span<const double> y) {
  require_pairs(x, y);
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  CorrelationReport rep;
  rep.metric = Metric::Spearman;
  rep.n_pairs = x.size();
  rep.value = pearson_r(rx, ry);
  return rep;
}

CorrelationReport kendall_tau(std::span<const double> x, std::span<const double> y) {
  require_pairs(x, y);
  const std::size_t n = x.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });

  // Pairs tied in x, and tied in both x and y.
  std::int64_t ties_x = 0, ties_xy = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && x[order[j]] == x[order[i]]) ++j;
    ties_x += tie_pairs(static_cast<std::int64_t>(j - i));
    for (std::size_t a = i; a < j;) {
      std::size_t b = a + 1;
      while (b < j && y[order[b]] == y[order[a]]) ++b;
      ties_xy += tie_pairs(static_cast<std::int64_t>(b - a));
      a = b;
    }
    i = j;
  }

  // Bottom-up merge sort on y counting strict inversions.
  std::vector<double> ys(n), buf(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  std::int64_t swaps = 0;
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo < n; lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, n);
      const std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (ys[i] <= ys[j]) {
          buf[k++] = ys[i++];
        } else {
          swaps += static_cast<std::int64_t>(mid - i);
          buf[k++] = ys[j++];
        }
      }
      while (i < mid) buf[k++] = ys[i++];
      while (j < hi) buf[k++] = ys[j++];
    }
    ys.swap(buf);
  }

  std::int64_t ties_y = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && ys[j] == ys[i]) ++j;
    ties_y += tie_pairs(static_cast<std::int64_t>(j - i));
    i = j;
  }

  const std::int64_t total = tie_pairs(static_cast<std::int64_t>(n));
  if (ties_x == total || ties_y == total) throw DegenerateError("all values tied");
  // concordant - discordant
  const std::int64_t score = total - ties_x - ties_y + ties_xy - 2 * swaps;
  const double denom = std::sqrt(static_cast<double>(total - ties_x)) *
                       std::sqrt(static_cast<double>(total - ties_y));

  CorrelationReport rep;
  rep.metric = Metric::Kendall;
  rep.n_pairs = n;
  rep.value = std::clamp(static_cast<double>(score) / denom, -1.0, 1.0);
  return rep;
}

CorrelationReport correlate(Metric metric, std::span<const double> x, std::span<const double> y) {
  switch (metric) {
    case Metric::Pearson:
      return pearson(x, y);
    case Metric::Spearman:
      return spearman(x, y);
    case Metric::Kendall:
      return kendall_tau(x, y);
  }
  throw InvalidArgument("unknown metric");
}

TopKResult top_k_matching_rate(const numkit::Matrix& estimator_scores,
                               const numkit::Matrix& actual_neg_mse, std::size_t k) {
  if (estimator_scores.rows() != actual_neg_mse.rows() ||
      estimator_scores.cols() != actual_neg_mse.cols()) {
    throw DimensionError("estimator and actual matrices differ in shape");
  }
  const std::size_t sources = estimator_scores.rows();
  const std::size_t targets = estimator_scores.cols();
  if (sources == 0 || targets == 0) throw DimensionError("empty score matrix");
  if (k < 1 || k > sources) {
    throw DimensionError("k = " + std::to_string(k) + " outside [1, " + std::to_string(sources) +
                         "]");
  }

  TopKResult res;
  res.k = k;
  res.m_target = targets;
  for (std::size_t t = 0; t < targets; ++t) {
    std::size_t sel = 0, best = 0;
    bool tied = false;
    for (std::size_t s = 1; s < sources; ++s) {
      const double v = estimator_scores(s, t);
      if (v > estimator_scores(sel, t)) {
        sel = s;
        tied = false;
      } else if (v == estimator_scores(sel, t)) {
        tied = true;
      }
      if (actual_neg_mse(s, t) > actual_neg_mse(best, t)) best = s;
    }
    std::size_t strictly_better = 0;
    for (std::size_t s = 0; s < sources; ++s) {
      if (actual_neg_mse(s, t) > actual_neg_mse(sel, t)) ++strictly_better;
    }
    const bool match = strictly_better < k;
    res.selected.push_back(sel);
    res.best.push_back(best);
    res.selection_tied.push_back(tied);
    res.matched.push_back(match);
    if (match) ++res.m_match;
  }
  res.rate = static_cast<double>(res.m_match) / static_cast<double>(res.m_target);
  return res;
}

double linear_fit_rmse(std::span<const double> scores, std::span<const double> actual) {
  require_pairs(scores, actual);
  if (is_constant(scores)) throw DegenerateError("scores are constant; slope is undefined");
  const double mx = mean(scores);
  const double my = mean(actual);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    sxx += (scores[i] - mx) * (scores[i] - mx);
    sxy += (scores[i] - mx) * (actual[i] - my);
  }
  const double slope = sxy / sxx;
  double sse = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double r = (actual[i] - my) - slope * (scores[i] - mx);
    sse += r * r;
  }
  return std::sqrt(sse / static_cast<double>(scores.size()));
}

}  // namespace xfermse::evalmetrics
