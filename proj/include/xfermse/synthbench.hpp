#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "xfermse/estimators.hpp"
#include "xfermse/evalmetrics.hpp"
#include "xfermse/numkit.hpp"
#include "xfermse/ridge.hpp"

namespace xfermse::synthbench {

using estimators::Method;
using evalmetrics::CorrelationReport;
using evalmetrics::Metric;
using numkit::Matrix;

struct TaskSpec {
  std::uint64_t seed = 0;
  std::size_t n_train = 2000;
  std::size_t n_test = 1000;
  std::size_t input_dim = 16;
  std::size_t feature_dim = 64;
  std::size_t source_label_dim = 4;
  std::size_t target_label_dim = 2;
  double noise_std = 0.05;
  /// Fraction of the shared latent units each source extractor reproduces.
  double alignment = 0.5;

  void validate() const;
  /// Number of shared latent rectifier units, max(1, feature_dim / 2).
  std::size_t latent_units() const;
};

/// Frozen source model: rectified affine extractor plus a linear head.
struct SourceModel {
  Matrix weights;                 // feature_dim x input_dim
  std::vector<double> offsets;    // feature_dim
  std::vector<bool> covered;      // latent slot j reproduced exactly
  Matrix label_mix;               // source_label_dim x source_label_dim
  std::vector<double> label_offset;
  ridge::RidgeSolution head;      // fit on the source's own training data, λ = 0
};

struct TargetTask {
  Matrix label_map;               // target_label_dim x source_label_dim
  std::vector<double> label_offset;
  Matrix x_train, y_train;
  Matrix x_test, y_test;
};

/// Immutable, fully materialized set of source models and target tasks.
///
/// Generative model (all draws from one seeded Rng, in a fixed order):
///   - K = latent_units() rectifier units u(x) = max(0, V·x + a) and a latent
///     map B (d_s x K) with log-normal column scales; latent signal q = B·u(x).
///   - Source s: d_r rectifier features. Slot j < K reproduces latent unit j
///     when covered (round(alignment·K) random slots), otherwise a fresh
///     random unit; slots ≥ K are fresh random units. Its task is
///     y_s = Q_s·[0.75·q(x) + 0.25·B·φ_s(x)[0..K)] + c_s + noise, i.e. mostly
///     the shared latent signal, partly the source's own view of it. The head
///     h* is the λ = 0 ridge fit of that task on n_train fresh inputs.
///   - Target t: y_t = P_t·q(x) + c_t + noise, with independent train and
///     test inputs.
/// With alignment = 1 and noise 0 every target is an exact affine function of
/// every source's features.
class TaskFamily {
 public:
  TaskFamily(TaskSpec spec, std::vector<SourceModel> sources, std::vector<TargetTask> targets,
             Matrix latent_weights, std::vector<double> latent_offsets, Matrix latent_map);

  const TaskSpec& spec() const { return spec_; }
  std::size_t n_sources() const { return sources_.size(); }
  std::size_t n_targets() const { return targets_.size(); }
  const SourceModel& source(std::size_t id) const;
  const TargetTask& target(std::size_t id) const;

  /// Frozen extractor of `source_id` applied row-wise.
  Matrix features(std::size_t source_id, const Matrix& inputs) const;
  /// Source task labels on arbitrary inputs; noise drawn from `noise_seed`.
  Matrix source_labels(std::size_t source_id, const Matrix& inputs,
                       std::uint64_t noise_seed) const;
  /// Noise-free latent signal q(x) = B·u(x).
  Matrix latent_signal(const Matrix& inputs) const;

  friend bool operator==(const TaskFamily&, const TaskFamily&);

 private:
  TaskSpec spec_;
  std::vector<SourceModel> sources_;
  std::vector<TargetTask> targets_;
  Matrix latent_weights_;
  std::vector<double> latent_offsets_;
  Matrix latent_map_;
};

TaskFamily generate_task_family(const TaskSpec& spec, std::size_t n_sources,
                                std::size_t n_targets);

/// Everything a (source, target) pair contributes, evaluated on the target's
/// training rows (optionally a subset) and full test split.
struct PairData {
  Matrix features_train;
  Matrix features_test;
  Matrix dummy_train;           // h*(w*(x)) on target training inputs
  Matrix source_labels_train;   // true source labels on the same inputs
  Matrix targets_train;
  Matrix targets_test;
  double source_loss = 0.0;     // MSE of h* against source_labels_train
};

PairData pair_data(const TaskFamily& family, std::size_t source_id, std::size_t target_id,
                   std::span<const std::size_t> train_rows = {});

struct HeadRetrainResult {
  double train_neg_mse = 0.0;
  double test_neg_mse = 0.0;
  Matrix features_train;
  Matrix features_test;
  Matrix dummy_train;
};

/// Freezes the source extractor and refits a linear target head on it.
HeadRetrainResult head_retrain(const TaskFamily& family, std::size_t source_id,
                               std::size_t target_id, double lambda_head = 0.0);

struct LambdaScore {
  double lambda = 0.0;
  double value = 0.0;
};

struct MethodScores {
  Method method = Method::LinMSE;
  std::vector<LambdaScore> by_lambda;
};

struct PairRecord {
  std::size_t source_id = 0;
  std::size_t target_id = 0;
  std::vector<MethodScores> scores;
  double actual_train_neg_mse = 0.0;
  double actual_test_neg_mse = 0.0;
};

/// One correlation between an estimator column and actual test negative MSE.
/// `report` is empty when the estimator column carries no ranking
/// information (constant up to rounding).
struct CorrelationEntry {
  Method method = Method::LinMSE;
  double lambda = 0.0;
  Metric metric = Metric::Pearson;
  std::optional<CorrelationReport> report;
};

struct BenchResult {
  std::vector<PairRecord> pairs;
  std::vector<CorrelationEntry> correlations;

  /// Scores of one (method, λ) column in pair order.
  std::vector<double> column(Method method, double lambda) const;
  std::vector<double> actual_test() const;
  const CorrelationEntry* find(Method method, double lambda, Metric metric) const;
};

inline constexpr Metric kAllMetrics[] = {Metric::Pearson, Metric::Spearman, Metric::Kendall};

/// Scores every (source, target) pair for every method and λ and correlates
/// each score column with the actual test negative MSE. Pairs are ordered by
/// (source_id, target_id). Fewer than two pairs yields no correlations.
BenchResult run_benchmark(const TaskFamily& family, std::span<const double> lambdas,
                          std::span<const Method> methods);

/// Same as run_benchmark but restricted to the given target training rows.
BenchResult run_benchmark_on_rows(const TaskFamily& family, std::span<const double> lambdas,
                                  std::span<const Method> methods,
                                  std::span<const std::size_t> train_rows);

/// Correlations for the given pair records (used by both benchmark flavors).
std::vector<CorrelationEntry> correlate_pairs(std::span<const PairRecord> pairs,
                                              std::span<const double> lambdas,
                                              std::span<const Method> methods);

struct SweepCell {
  std::size_t subset_size = 0;
  Method method = Method::LinMSE;
  double lambda = 0.0;
  Metric metric = Metric::Pearson;
  /// Mean over repeats; repeats without ranking information count as 0.
  double mean_value = 0.0;
  std::size_t repeats = 0;
  std::size_t degenerate_repeats = 0;
};

/// Row subset used for (subset_size, repeat). The full size returns every row
/// in order; smaller sizes are seeded random draws, returned sorted.
std::vector<std::size_t> subset_rows(const TaskSpec& spec, std::size_t subset_size,
                                     std::size_t repeat);

/// Re-runs the benchmark on random training subsets and averages correlations.
std::vector<SweepCell> small_data_sweep(const TaskFamily& family,
                                        std::span<const std::size_t> subset_sizes,
                                        std::size_t repeats, std::span<const double> lambdas,
                                        std::span<const Method> methods);

struct LemmaViolation {
  std::size_t source_id = 0;
  std::size_t target_id = 0;
  double lambda = 0.0;
  int lemma = 1;
  double margin = 0.0;  // negative means violated
};

struct LemmaReport {
  std::size_t checks = 0;
  double worst_margin_lemma1 = 0.0;
  double worst_margin_lemma2 = 0.0;
  std::vector<LemmaViolation> violations;
};

/// Runs both inequality verifiers on every pair and λ.
LemmaReport check_lemmas(const TaskFamily& family, std::span<const double> lambdas);

}  // namespace xfermse::synthbench
