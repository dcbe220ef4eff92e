#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <numeric>

#include "xfermse/errors.hpp"
#include "xfermse/parallel.hpp"
#include "xfermse/synthbench.hpp"

using namespace xfermse;
using namespace xfermse::synthbench;

namespace {

TaskSpec small_spec(std::uint64_t seed = 7) {
  TaskSpec s;
  s.seed = seed;
  s.n_train = 300;
  s.n_test = 200;
  s.input_dim = 8;
  s.feature_dim = 24;
  s.source_label_dim = 3;
  s.target_label_dim = 2;
  return s;
}

const double kLambdas[] = {0.0, 0.5, 1.0, 5.0};
const Method kMethods[] = {Method::LinMSE, Method::LabMSE, Method::SharedLabMSE};

double mean_actual(const BenchResult& r) {
  const auto v = r.actual_test();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

TEST(Synthbench, GenerationIsDeterministic) {
  const auto a = generate_task_family(small_spec(), 3, 2);
  const auto b = generate_task_family(small_spec(), 3, 2);
  EXPECT_TRUE(a == b);
  const auto c = generate_task_family(small_spec(8), 3, 2);
  EXPECT_FALSE(a == c);

  const auto ra = run_benchmark(a, kLambdas, kMethods);
  const auto rb = run_benchmark(b, kLambdas, kMethods);
  for (Method m : kMethods)
    for (double l : kLambdas) EXPECT_EQ(ra.column(m, l), rb.column(m, l));
  EXPECT_EQ(ra.actual_test(), rb.actual_test());
}

TEST(Synthbench, ThreadCountDoesNotChangeResults) {
  const auto fam = generate_task_family(small_spec(), 3, 3);
  ::setenv("XFERMSE_THREADS", "1", 1);
  const auto serial = run_benchmark(fam, kLambdas, kMethods);
  ::setenv("XFERMSE_THREADS", "4", 1);
  const auto threaded = run_benchmark(fam, kLambdas, kMethods);
  ::unsetenv("XFERMSE_THREADS");
  for (Method m : kMethods)
    for (double l : kLambdas) EXPECT_EQ(serial.column(m, l), threaded.column(m, l));
}

TEST(Synthbench, ShapesAndOrdering) {
  const auto spec = small_spec();
  const auto fam = generate_task_family(spec, 2, 3);
  const auto pd = pair_data(fam, 1, 2);
  EXPECT_EQ(pd.features_train.rows(), spec.n_train);
  EXPECT_EQ(pd.features_train.cols(), spec.feature_dim);
  EXPECT_EQ(pd.features_test.rows(), spec.n_test);
  EXPECT_EQ(pd.dummy_train.cols(), spec.source_label_dim);
  EXPECT_EQ(pd.source_labels_train.cols(), spec.source_label_dim);
  EXPECT_EQ(pd.targets_train.cols(), spec.target_label_dim);
  EXPECT_GE(pd.source_loss, 0.0);

  const auto r = run_benchmark(fam, kLambdas, kMethods);
  ASSERT_EQ(r.pairs.size(), 6u);
  EXPECT_EQ(r.pairs[4].source_id, 1u);
  EXPECT_EQ(r.pairs[4].target_id, 1u);
  EXPECT_EQ(r.correlations.size(), 3u * 4u * 3u);
  EXPECT_NE(r.find(Method::LabMSE, 1.0, Metric::Kendall), nullptr);
  EXPECT_EQ(r.find(Method::LabMSE, 2.0, Metric::Kendall), nullptr);
  EXPECT_THROW(pair_data(fam, 2, 0), InvalidArgument);
}

TEST(Synthbench, RealizableFamilyFitsExactly) {
  auto spec = small_spec();
  spec.noise_std = 0.0;
  spec.alignment = 1.0;
  const auto fam = generate_task_family(spec, 3, 3);
  const auto r = run_benchmark(fam, kLambdas, kMethods);
  for (const auto& p : r.pairs) {
    EXPECT_GE(p.actual_test_neg_mse, -1e-6);
    EXPECT_GE(p.actual_train_neg_mse, -1e-6);
  }
}

TEST(Synthbench, AlignmentImprovesTransfer) {
  auto lo = small_spec();
  lo.alignment = 0.0;
  auto hi = small_spec();
  hi.alignment = 1.0;
  const auto r_lo = run_benchmark(generate_task_family(lo, 3, 3), kLambdas, kMethods);
  const auto r_hi = run_benchmark(generate_task_family(hi, 3, 3), kLambdas, kMethods);
  EXPECT_LT(mean_actual(r_lo), mean_actual(r_hi));
}

TEST(Synthbench, ActualsAndScoresAreConsistent) {
  const auto fam = generate_task_family(small_spec(), 3, 3);
  const auto r = run_benchmark(fam, kLambdas, kMethods);
  double train = 0.0, test = 0.0;
  const auto lin0 = r.column(Method::LinMSE, 0.0);
  for (std::size_t i = 0; i < r.pairs.size(); ++i) {
    const auto& p = r.pairs[i];
    EXPECT_EQ(p.actual_train_neg_mse, lin0[i]);
    train += p.actual_train_neg_mse;
    test += p.actual_test_neg_mse;
    const auto head = head_retrain(fam, p.source_id, p.target_id);
    EXPECT_EQ(head.train_neg_mse, p.actual_train_neg_mse);
    EXPECT_EQ(head.test_neg_mse, p.actual_test_neg_mse);
    for (const auto& ms : p.scores)
      for (std::size_t k = 1; k < ms.by_lambda.size(); ++k)
        EXPECT_LE(ms.by_lambda[k].value, ms.by_lambda[k - 1].value + 1e-12);
  }
  // Training fit is optimistic on average.
  EXPECT_GE(train, test);
}

TEST(Synthbench, SinglePairHasNoCorrelations) {
  const auto fam = generate_task_family(small_spec(), 1, 1);
  const auto r = run_benchmark(fam, kLambdas, kMethods);
  EXPECT_EQ(r.pairs.size(), 1u);
  EXPECT_TRUE(r.correlations.empty());
}

TEST(Synthbench, SubsetRows) {
  const auto spec = small_spec();
  const auto all = subset_rows(spec, spec.n_train, 0);
  std::vector<std::size_t> iota(spec.n_train);
  std::iota(iota.begin(), iota.end(), 0);
  EXPECT_EQ(all, iota);

  const auto a = subset_rows(spec, 16, 3);
  EXPECT_EQ(a, subset_rows(spec, 16, 3));
  EXPECT_NE(a, subset_rows(spec, 16, 4));
  EXPECT_EQ(a.size(), 16u);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
  EXPECT_EQ(std::adjacent_find(a.begin(), a.end()), a.end());
  EXPECT_LT(a.back(), spec.n_train);
  EXPECT_THROW(subset_rows(spec, 0, 0), InvalidArgument);
  EXPECT_THROW(subset_rows(spec, spec.n_train + 1, 0), InvalidArgument);
}

TEST(Synthbench, FullSubsetMatchesBenchmark) {
  const auto spec = small_spec();
  const auto fam = generate_task_family(spec, 2, 2);
  const auto rows = subset_rows(spec, spec.n_train, 0);
  const auto full = run_benchmark(fam, kLambdas, kMethods);
  const auto on_rows = run_benchmark_on_rows(fam, kLambdas, kMethods, rows);
  for (Method m : kMethods)
    for (double l : kLambdas) EXPECT_EQ(full.column(m, l), on_rows.column(m, l));
}

TEST(Synthbench, SmallDataSweepShape) {
  const auto fam = generate_task_family(small_spec(), 3, 2);
  const std::size_t sizes[] = {16, 32};
  const double lambdas[] = {0.0, 1.0};
  const Method methods[] = {Method::LinMSE};
  const auto cells = small_data_sweep(fam, sizes, 3, lambdas, methods);
  EXPECT_EQ(cells.size(), 2u * 2u * 3u);
  for (const auto& c : cells) {
    EXPECT_EQ(c.repeats, 3u);
    EXPECT_LE(c.degenerate_repeats, 3u);
    EXPECT_GE(c.mean_value, -1.0);
    EXPECT_LE(c.mean_value, 1.0);
  }
}

TEST(Synthbench, LemmasHoldOnGeneratedPairs) {
  const auto fam = generate_task_family(small_spec(), 3, 2);
  const double lambdas[] = {0.0, 0.5, 1.0, 5.0, 20.0};
  const auto rep = check_lemmas(fam, lambdas);
  EXPECT_EQ(rep.checks, 6u * 5u);
  EXPECT_TRUE(rep.violations.empty());
  EXPECT_GE(rep.worst_margin_lemma1, -estimators::kInequalityTolerance);
  EXPECT_GE(rep.worst_margin_lemma2, -estimators::kInequalityTolerance);
}

TEST(Synthbench, SpecValidation) {
  auto s = small_spec();
  s.alignment = 1.5;
  EXPECT_THROW(generate_task_family(s, 1, 1), InvalidArgument);
  s = small_spec();
  s.noise_std = -1.0;
  EXPECT_THROW(generate_task_family(s, 1, 1), InvalidArgument);
  EXPECT_THROW(generate_task_family(small_spec(), 0, 1), InvalidArgument);
  EXPECT_EQ(small_spec().latent_units(), 12u);
}
