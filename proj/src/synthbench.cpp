#include "xfermse/synthbench.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "eigen_view.hpp"
#include "xfermse/errors.hpp"
#include "xfermse/parallel.hpp"
#include "xfermse/rng.hpp"

namespace xfermse::synthbench {

using numkit::detail::to_matrix;
using numkit::detail::view;

namespace {

// Stream tags for derive_seed.
constexpr std::uint64_t kSourceTrainNoise = 1;
constexpr std::uint64_t kSharedLabelNoise = 2;
constexpr std::uint64_t kSubsetDraw = 3;

constexpr double kOffsetScale = 0.5;
constexpr double kColumnScaleSpread = 0.75;
constexpr double kLabelMixJitter = 0.3;
// Share of each source task driven by the source's own extractor view
// rather than the shared latent signal.
constexpr double kSourceViewWeight = 0.25;

// Columns whose spread is at rounding level carry no ranking information.
constexpr double kDegenerateSpread = 1e-12;

Matrix gaussian(Rng& rng, std::size_t rows, std::size_t cols, double scale) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = scale * rng.normal();
  return m;
}

std::vector<double> gaussian_vector(Rng& rng, std::size_t n, double scale) {
  std::vector<double> v(n);
  for (double& e : v) e = scale * rng.normal();
  return v;
}

Matrix rectified(const Matrix& weights, const std::vector<double>& offsets, const Matrix& inputs) {
  if (inputs.cols() != weights.cols()) throw DimensionError("input width does not match extractor");
  const Eigen::Map<const Eigen::RowVectorXd> bias(offsets.data(),
                                                  static_cast<Eigen::Index>(offsets.size()));
  Eigen::MatrixXd pre = view(inputs) * view(weights).transpose();
  pre.rowwise() += bias;
  return to_matrix(pre.cwiseMax(0.0));
}

void add_row_offset_and_noise(Matrix& m, const std::vector<double>& offset, double noise_std,
                              Rng* rng) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      row[c] += offset[c];
      if (rng != nullptr && noise_std > 0.0) row[c] += noise_std * rng->normal();
    }
  }
}

// y = Q·[(1 − w)·q(x) + w·B·φ[:, 0..K)] + c + noise
Matrix source_task_labels(const SourceModel& model, const Matrix& latent_map, std::size_t latent,
                          const Matrix& features, const Matrix& latent_signal, double noise_std,
                          std::uint64_t noise_seed) {
  const auto own_view = view(features).leftCols(static_cast<Eigen::Index>(latent));
  const Eigen::MatrixXd signal = (1.0 - kSourceViewWeight) * view(latent_signal) +
                                 kSourceViewWeight * (own_view * view(latent_map).transpose());
  Matrix y = to_matrix(signal * view(model.label_mix).transpose());
  Rng rng(noise_seed);
  add_row_offset_and_noise(y, model.label_offset, noise_std, &rng);
  return y;
}

bool carries_ranking(std::span<const double> v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  double scale = 1.0;
  for (double e : v) scale = std::max(scale, std::abs(e));
  return (*hi - *lo) > kDegenerateSpread * scale;
}

const Matrix& select_or_all(const Matrix& full, std::span<const std::size_t> rows, Matrix& scratch) {
  if (rows.empty()) return full;
  scratch = full.select_rows(rows);
  return scratch;
}

}  // namespace

void TaskSpec::validate() const {
  if (n_train < 1 || n_test < 1 || input_dim < 1 || feature_dim < 1 || source_label_dim < 1 ||
      target_label_dim < 1) {
    throw InvalidArgument("task spec counts must all be >= 1");
  }
  if (!std::isfinite(noise_std) || noise_std < 0.0) {
    throw InvalidArgument("noise_std must be finite and >= 0");
  }
  if (!(alignment >= 0.0 && alignment <= 1.0)) throw InvalidArgument("alignment must lie in [0, 1]");
}

std::size_t TaskSpec::latent_units() const { return std::max<std::size_t>(1, feature_dim / 2); }

TaskFamily::TaskFamily(TaskSpec spec, std::vector<SourceModel> sources,
                       std::vector<TargetTask> targets, Matrix latent_weights,
                       std::vector<double> latent_offsets, Matrix latent_map)
    : spec_(spec),
      sources_(std::move(sources)),
      targets_(std::move(targets)),
      latent_weights_(std::move(latent_weights)),
      latent_offsets_(std::move(latent_offsets)),
      latent_map_(std::move(latent_map)) {}

const SourceModel& TaskFamily::source(std::size_t id) const {
  if (id >= sources_.size()) throw InvalidArgument("source id " + std::to_string(id) + " out of range");
  return sources_[id];
}

const TargetTask& TaskFamily::target(std::size_t id) const {
  if (id >= targets_.size()) throw InvalidArgument("target id " + std::to_string(id) + " out of range");
  return targets_[id];
}

Matrix TaskFamily::features(std::size_t source_id, const Matrix& inputs) const {
  const auto& s = source(source_id);
  return rectified(s.weights, s.offsets, inputs);
}

Matrix TaskFamily::source_labels(std::size_t source_id, const Matrix& inputs,
                                 std::uint64_t noise_seed) const {
  return source_task_labels(source(source_id), latent_map_, spec_.latent_units(),
                            features(source_id, inputs), latent_signal(inputs), spec_.noise_std,
                            noise_seed);
}

Matrix TaskFamily::latent_signal(const Matrix& inputs) const {
  const Matrix units = rectified(latent_weights_, latent_offsets_, inputs);
  return numkit::multiply(units, latent_map_.transposed());
}

bool operator==(const TaskFamily& a, const TaskFamily& b) {
  auto same_source = [](const SourceModel& x, const SourceModel& y) {
    return x.weights == y.weights && x.offsets == y.offsets && x.covered == y.covered &&
           x.label_mix == y.label_mix && x.label_offset == y.label_offset && x.head == y.head;
  };
  auto same_target = [](const TargetTask& x, const TargetTask& y) {
    return x.label_map == y.label_map && x.label_offset == y.label_offset &&
           x.x_train == y.x_train && x.y_train == y.y_train && x.x_test == y.x_test &&
           x.y_test == y.y_test;
  };
  return a.latent_weights_ == b.latent_weights_ && a.latent_offsets_ == b.latent_offsets_ &&
         a.latent_map_ == b.latent_map_ &&
         std::equal(a.sources_.begin(), a.sources_.end(), b.sources_.begin(), b.sources_.end(),
                    same_source) &&
         std::equal(a.targets_.begin(), a.targets_.end(), b.targets_.begin(), b.targets_.end(),
                    same_target);
}

TaskFamily generate_task_family(const TaskSpec& spec, std::size_t n_sources,
                                std::size_t n_targets) {
  spec.validate();
  if (n_sources < 1 || n_targets < 1) throw InvalidArgument("need at least one source and target");

  const std::size_t d = spec.input_dim;
  const std::size_t dr = spec.feature_dim;
  const std::size_t ds = spec.source_label_dim;
  const std::size_t dt = spec.target_label_dim;
  const std::size_t latent = spec.latent_units();
  const double input_scale = 1.0 / std::sqrt(static_cast<double>(d));

  Rng rng(spec.seed);

  Matrix latent_weights = gaussian(rng, latent, d, input_scale);
  std::vector<double> latent_offsets = gaussian_vector(rng, latent, kOffsetScale);
  Matrix latent_map(ds, latent);
  for (std::size_t j = 0; j < latent; ++j) {
    const double col_scale =
        std::exp(kColumnScaleSpread * rng.normal()) / std::sqrt(static_cast<double>(latent));
    for (std::size_t i = 0; i < ds; ++i) latent_map(i, j) = col_scale * rng.normal();
  }

  std::vector<SourceModel> sources;
  sources.reserve(n_sources);
  const auto n_covered = static_cast<std::size_t>(std::lround(spec.alignment * static_cast<double>(latent)));
  for (std::size_t s = 0; s < n_sources; ++s) {
    std::vector<std::size_t> slots(latent);
    std::iota(slots.begin(), slots.end(), std::size_t{0});
    for (std::size_t i = latent; i > 1; --i) std::swap(slots[i - 1], slots[rng.below(i)]);
    std::vector<bool> covered(latent, false);
    for (std::size_t i = 0; i < n_covered; ++i) covered[slots[i]] = true;

    Matrix weights(dr, d);
    std::vector<double> offsets(dr);
    for (std::size_t j = 0; j < dr; ++j) {
      if (j < latent && covered[j]) {
        std::copy_n(latent_weights.row(j).begin(), d, weights.row(j).begin());
        offsets[j] = latent_offsets[j];
      } else {
        for (double& w : weights.row(j)) w = input_scale * rng.normal();
        offsets[j] = kOffsetScale * rng.normal();
      }
    }

    Matrix label_mix = Matrix::identity(ds);
    for (double& v : label_mix.data()) v += kLabelMixJitter / std::sqrt(static_cast<double>(ds)) * rng.normal();
    std::vector<double> label_offset = gaussian_vector(rng, ds, 1.0);

    const Matrix x_src = gaussian(rng, spec.n_train, d, 1.0);
    const Matrix f_src = rectified(weights, offsets, x_src);

    SourceModel model{std::move(weights), std::move(offsets), std::move(covered),
                      std::move(label_mix), std::move(label_offset),
                      ridge::RidgeSolution(Matrix(ds, dr), std::vector<double>(ds), 0.0, 0.0, 0.0, 1)};
    const Matrix q_src =
        numkit::multiply(rectified(latent_weights, latent_offsets, x_src), latent_map.transposed());
    const Matrix y_src = source_task_labels(model, latent_map, latent, f_src, q_src, spec.noise_std,
                                            derive_seed(spec.seed, {kSourceTrainNoise, s}));
    model.head = ridge::ridge_fit(f_src, y_src, 0.0);
    sources.push_back(std::move(model));
  }

  const Matrix latent_map_t = latent_map.transposed();
  auto target_labels = [&](const Matrix& x, const Matrix& label_map,
                           const std::vector<double>& offset) {
    const Matrix q = numkit::multiply(rectified(latent_weights, latent_offsets, x), latent_map_t);
    Matrix y = numkit::multiply(q, label_map.transposed());
    add_row_offset_and_noise(y, offset, spec.noise_std, &rng);
    return y;
  };

  std::vector<TargetTask> targets;
  targets.reserve(n_targets);
  for (std::size_t t = 0; t < n_targets; ++t) {
    TargetTask task;
    task.label_map = gaussian(rng, dt, ds, 1.0 / std::sqrt(static_cast<double>(ds)));
    task.label_offset = gaussian_vector(rng, dt, 1.0);
    task.x_train = gaussian(rng, spec.n_train, d, 1.0);
    task.y_train = target_labels(task.x_train, task.label_map, task.label_offset);
    task.x_test = gaussian(rng, spec.n_test, d, 1.0);
    task.y_test = target_labels(task.x_test, task.label_map, task.label_offset);
    targets.push_back(std::move(task));
  }

  return TaskFamily(spec, std::move(sources), std::move(targets), std::move(latent_weights),
                    std::move(latent_offsets), std::move(latent_map));
}

PairData pair_data(const TaskFamily& family, std::size_t source_id, std::size_t target_id,
                   std::span<const std::size_t> train_rows) {
  const auto& tgt = family.target(target_id);
  const auto& src = family.source(source_id);
  const auto seed = derive_seed(family.spec().seed, {kSharedLabelNoise, source_id, target_id});

  // Labels and features are computed on all training rows and then
  // subset, so a row's values never depend on which subset it falls in.
  PairData pd;
  Matrix scratch;
  pd.features_train =
      select_or_all(family.features(source_id, tgt.x_train), train_rows, scratch);
  pd.targets_train = select_or_all(tgt.y_train, train_rows, scratch);
  pd.source_labels_train =
      select_or_all(family.source_labels(source_id, tgt.x_train, seed), train_rows, scratch);
  pd.features_test = family.features(source_id, tgt.x_test);
  pd.targets_test = tgt.y_test;
  pd.dummy_train = ridge::predict(src.head, pd.features_train);
  pd.source_loss = ridge::mean_squared_residual(src.head.a(), src.head.b(), pd.features_train,
                                                pd.source_labels_train);
  return pd;
}

HeadRetrainResult head_retrain(const TaskFamily& family, std::size_t source_id,
                               std::size_t target_id, double lambda_head) {
  PairData pd = pair_data(family, source_id, target_id);
  const auto fit = ridge::ridge_fit(pd.features_train, pd.targets_train, lambda_head);
  HeadRetrainResult r;
  r.train_neg_mse = -fit.mse_term();
  r.test_neg_mse =
      -ridge::mean_squared_residual(fit.a(), fit.b(), pd.features_test, pd.targets_test);
  r.features_train = std::move(pd.features_train);
  r.features_test = std::move(pd.features_test);
  r.dummy_train = std::move(pd.dummy_train);
  return r;
}

std::vector<double> BenchResult::column(Method method, double lambda) const {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    for (const auto& ms : p.scores) {
      if (ms.method != method) continue;
      for (const auto& ls : ms.by_lambda) {
        if (ls.lambda == lambda) out.push_back(ls.value);
      }
    }
  }
  if (out.size() != pairs.size()) throw InvalidArgument("no such (method, lambda) column");
  return out;
}

std::vector<double> BenchResult::actual_test() const {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(p.actual_test_neg_mse);
  return out;
}

const CorrelationEntry* BenchResult::find(Method method, double lambda, Metric metric) const {
  for (const auto& c : correlations) {
    if (c.method == method && c.lambda == lambda && c.metric == metric) return &c;
  }
  return nullptr;
}

std::vector<CorrelationEntry> correlate_pairs(std::span<const PairRecord> pairs,
                                              std::span<const double> lambdas,
                                              std::span<const Method> methods) {
  std::vector<CorrelationEntry> out;
  if (pairs.size() < 2) return out;
  BenchResult view_only;
  view_only.pairs.assign(pairs.begin(), pairs.end());
  const auto actual = view_only.actual_test();
  const bool actual_informative = carries_ranking(actual);
  for (Method m : methods) {
    for (double lambda : lambdas) {
      const auto scores = view_only.column(m, lambda);
      const bool informative = actual_informative && carries_ranking(scores);
      for (Metric metric : kAllMetrics) {
        CorrelationEntry e{m, lambda, metric, std::nullopt};
        if (informative) {
          try {
            e.report = evalmetrics::correlate(metric, scores, actual);
          } catch (const DegenerateError&) {
            e.report.reset();
          }
        }
        out.push_back(e);
      }
    }
  }
  return out;
}

BenchResult run_benchmark_on_rows(const TaskFamily& family, std::span<const double> lambdas,
                                  std::span<const Method> methods,
                                  std::span<const std::size_t> train_rows) {
  if (lambdas.empty() || methods.empty()) throw InvalidArgument("need at least one lambda and method");
  for (double l : lambdas) {
    if (!std::isfinite(l) || l < 0.0) throw InvalidArgument("lambdas must be finite and >= 0");
  }

  const std::size_t nt = family.n_targets();
  const std::size_t n_pairs = family.n_sources() * nt;
  BenchResult result;
  result.pairs.resize(n_pairs);

  parallel_for(n_pairs, [&](std::size_t idx) {
    const std::size_t s = idx / nt;
    const std::size_t t = idx % nt;
    const PairData pd = pair_data(family, s, t, train_rows);
    const auto head = ridge::ridge_fit(pd.features_train, pd.targets_train, 0.0);

    PairRecord rec;
    rec.source_id = s;
    rec.target_id = t;
    rec.actual_train_neg_mse = -head.mse_term();
    rec.actual_test_neg_mse =
        -ridge::mean_squared_residual(head.a(), head.b(), pd.features_test, pd.targets_test);
    for (Method m : methods) {
      const Matrix& inputs = m == Method::LinMSE   ? pd.features_train
                             : m == Method::LabMSE ? pd.dummy_train
                                                   : pd.source_labels_train;
      MethodScores ms{m, {}};
      for (double lambda : lambdas) {
        ms.by_lambda.push_back({lambda, estimators::estimate(m, inputs, pd.targets_train, lambda).value});
      }
      rec.scores.push_back(std::move(ms));
    }
    result.pairs[idx] = std::move(rec);
  });

  result.correlations = correlate_pairs(result.pairs, lambdas, methods);
  return result;
}

BenchResult run_benchmark(const TaskFamily& family, std::span<const double> lambdas,
                          std::span<const Method> methods) {
  return run_benchmark_on_rows(family, lambdas, methods, {});
}

std::vector<std::size_t> subset_rows(const TaskSpec& spec, std::size_t subset_size,
                                     std::size_t repeat) {
  if (subset_size < 1 || subset_size > spec.n_train) {
    throw InvalidArgument("subset size " + std::to_string(subset_size) + " outside [1, " +
                          std::to_string(spec.n_train) + "]");
  }
  std::vector<std::size_t> rows(spec.n_train);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  if (subset_size == spec.n_train) return rows;
  Rng rng(derive_seed(spec.seed, {kSubsetDraw, subset_size, repeat}));
  for (std::size_t i = 0; i < subset_size; ++i) {
    std::swap(rows[i], rows[i + rng.below(spec.n_train - i)]);
  }
  rows.resize(subset_size);
  std::sort(rows.begin(), rows.end());
  return rows;
}

std::vector<SweepCell> small_data_sweep(const TaskFamily& family,
                                        std::span<const std::size_t> subset_sizes,
                                        std::size_t repeats, std::span<const double> lambdas,
                                        std::span<const Method> methods) {
  if (repeats < 1) throw InvalidArgument("repeats must be >= 1");
  std::vector<SweepCell> cells;
  for (std::size_t size : subset_sizes) {
    const std::size_t first = cells.size();
    for (Method m : methods) {
      for (double lambda : lambdas) {
        for (Metric metric : kAllMetrics) cells.push_back({size, m, lambda, metric, 0.0, repeats, 0});
      }
    }
    for (std::size_t r = 0; r < repeats; ++r) {
      const auto rows = subset_rows(family.spec(), size, r);
      const BenchResult res = run_benchmark_on_rows(family, lambdas, methods, rows);
      for (std::size_t c = first; c < cells.size(); ++c) {
        auto& cell = cells[c];
        const auto* entry = res.find(cell.method, cell.lambda, cell.metric);
        if (entry != nullptr && entry->report) {
          cell.mean_value += entry->report->value;
        } else {
          ++cell.degenerate_repeats;
        }
      }
    }
    for (std::size_t c = first; c < cells.size(); ++c) {
      cells[c].mean_value /= static_cast<double>(repeats);
    }
  }
  return cells;
}

LemmaReport check_lemmas(const TaskFamily& family, std::span<const double> lambdas) {
  const std::size_t nt = family.n_targets();
  const std::size_t n_pairs = family.n_sources() * nt;
  struct Slot {
    double worst1 = 0.0, worst2 = 0.0;
    std::vector<LemmaViolation> violations;
    bool first = true;
  };
  std::vector<Slot> slots(n_pairs);

  parallel_for(n_pairs, [&](std::size_t idx) {
    const std::size_t s = idx / nt;
    const std::size_t t = idx % nt;
    const PairData pd = pair_data(family, s, t);
    Slot& slot = slots[idx];
    for (double lambda : lambdas) {
      const auto l1 = estimators::lemma1_check(pd.features_train, pd.dummy_train, pd.targets_train, lambda);
      const auto l2 = estimators::lemma2_check(pd.source_labels_train, pd.targets_train,
                                               pd.features_train, lambda, pd.source_loss);
      const double m1 = l1.gap;
      const double m2 = l2.rhs - l2.shared_score;
      slot.worst1 = slot.first ? m1 : std::min(slot.worst1, m1);
      slot.worst2 = slot.first ? m2 : std::min(slot.worst2, m2);
      slot.first = false;
      if (!l1.holds) slot.violations.push_back({s, t, lambda, 1, m1});
      if (!l2.holds) slot.violations.push_back({s, t, lambda, 2, m2});
    }
  });

  LemmaReport report;
  report.checks = n_pairs * lambdas.size();
  bool first = true;
  for (auto& slot : slots) {
    if (slot.first) continue;
    report.worst_margin_lemma1 = first ? slot.worst1 : std::min(report.worst_margin_lemma1, slot.worst1);
    report.worst_margin_lemma2 = first ? slot.worst2 : std::min(report.worst_margin_lemma2, slot.worst2);
    first = false;
    report.violations.insert(report.violations.end(), slot.violations.begin(), slot.violations.end());
  }
  return report;
}

}  // namespace xfermse::synthbench
