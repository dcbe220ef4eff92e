#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "xfermse/numkit.hpp"

namespace xfermse::evalmetrics {

enum class Metric { Pearson, Spearman, Kendall };

std::string_view metric_name(Metric m);
Metric parse_metric(std::string_view name);

struct CorrelationReport {
  Metric metric = Metric::Pearson;
  double value = 0.0;
  std::size_t n_pairs = 0;
  /// Two-sided p-value; Pearson only, and only when n > 2.
  std::optional<double> p_value;
};

/// Sample Pearson r with a two-sided t-test p-value.
/// Throws DegenerateError when either vector has zero variance.
CorrelationReport pearson(std::span<const double> x, std::span<const double> y);

/// Pearson correlation of average ranks.
CorrelationReport spearman(std::span<const double> x, std::span<const double> y);

/// Kendall τ-b in O(n log n): sort by (x, y), then count discordant pairs as
/// merge-sort inversions of y.
CorrelationReport kendall_tau(std::span<const double> x, std::span<const double> y);

CorrelationReport correlate(Metric metric, std::span<const double> x, std::span<const double> y);

/// 1-based ranks with ties sharing the average of their positions.
std::vector<double> average_ranks(std::span<const double> v);

/// Two-sided survival probability of Student's t: P(|T| ≥ |t|) with `dof`
/// degrees of freedom.
double student_t_two_sided(double t, double dof);

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

struct TopKResult {
  std::size_t k = 0;
  double rate = 0.0;
  std::size_t m_match = 0;
  std::size_t m_target = 0;
  /// Per target: source with the highest estimator score (lowest index on ties).
  std::vector<std::size_t> selected;
  /// Per target: source with the highest actual negative MSE.
  std::vector<std::size_t> best;
  /// Per target: whether the estimator argmax was tied.
  std::vector<bool> selection_tied;
  std::vector<bool> matched;
};

/// Fraction of targets (columns) whose estimator-selected source is among the
/// k sources with the highest actual negative MSE. A source tied with the
/// k-th best counts as inside the top k.
TopKResult top_k_matching_rate(const numkit::Matrix& estimator_scores,
                               const numkit::Matrix& actual_neg_mse, std::size_t k);

/// RMSE of the least-squares line actual ≈ α·score + β.
double linear_fit_rmse(std::span<const double> scores, std::span<const double> actual);

}  // namespace xfermse::evalmetrics
