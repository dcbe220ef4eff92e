#include "cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "xfermse/errors.hpp"
#include "xfermse/estimators.hpp"
#include "xfermse/evalmetrics.hpp"
#include "xfermse/matrix_io.hpp"
#include "xfermse/synthbench.hpp"

#ifndef XFERMSE_VERSION
#define XFERMSE_VERSION "dev"
#endif

namespace xfermse::cli {

namespace {

using json = nlohmann::json;
using estimators::Method;
using evalmetrics::Metric;
using numkit::Matrix;

/// Failure that maps straight to an exit code.
struct CommandFailure {
  int code;
  std::string message;
};

class Stopwatch {
 public:
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return "sha256:" + hex.str();
}

json envelope(const std::string& command) {
  return json{{"schema_version", kSchemaVersion},
              {"tool_version", XFERMSE_VERSION},
              {"command", command}};
}

json correlation_json(const evalmetrics::CorrelationReport& rep) {
  json j{{"metric", evalmetrics::metric_name(rep.metric)},
         {"value", rep.value},
         {"n_pairs", rep.n_pairs}};
  j["p_value"] = rep.p_value ? json(*rep.p_value) : json(nullptr);
  return j;
}

struct Common {
  std::string out_path;
  bool force_header = false;
  bool force_no_header = false;

  io::HeaderMode header_mode() const {
    if (force_header) return io::HeaderMode::Present;
    if (force_no_header) return io::HeaderMode::Absent;
    return io::HeaderMode::Auto;
  }
};

void add_common(CLI::App* cmd, Common& c, bool with_header_flags) {
  cmd->add_option("--out", c.out_path, "Write JSON here instead of standard output");
  if (with_header_flags) {
    auto* h = cmd->add_flag("--header", c.force_header, "CSV inputs always have a header row");
    auto* nh = cmd->add_flag("--no-header", c.force_no_header, "CSV inputs never have a header row");
    h->excludes(nh);
  }
}

void emit(const json& j, const Common& c, std::ostream& out) {
  const std::string text = j.dump(2) + "\n";
  if (c.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(c.out_path, std::ios::binary);
  if (!file || !(file << text)) throw FormatError("cannot write '" + c.out_path + "'");
}

std::vector<double> single_column(const Matrix& m, const std::string& what) {
  if (m.cols() != 1) {
    throw DimensionError(what + " must have exactly one column, found " + std::to_string(m.cols()));
  }
  return m.col(0);
}

// ---- score ---------------------------------------------------------------

struct ScoreArgs {
  Common common;
  std::string method;
  double lambda = 1.0;
  std::string inputs;
  std::string targets;
};

json run_score(const ScoreArgs& a) {
  const Method method = estimators::parse_method(a.method);
  const Matrix inputs = io::read_matrix(a.inputs, a.common.header_mode());
  const Matrix targets = io::read_matrix(a.targets, a.common.header_mode());

  Stopwatch clock;
  const auto score = estimators::estimate(method, inputs, targets, a.lambda);
  const double ms = clock.elapsed_ms();

  json j = envelope("score");
  j["method"] = estimators::method_name(score.method);
  j["lambda"] = score.lambda;
  j["value"] = score.value;
  j["mse_term"] = score.mse_term;
  j["penalty_term"] = score.penalty_term;
  j["n"] = score.n;
  j["input_dim"] = score.input_dim;
  j["output_dim"] = score.output_dim;
  j["input_digests"] = {{"inputs", sha256_file(a.inputs)}, {"targets", sha256_file(a.targets)}};
  j["compute_ms"] = ms;
  return j;
}

// ---- correlate -------------------------------------------------------------

struct CorrelateArgs {
  Common common;
  std::string scores;
  std::string actuals;
  std::string metric = "all";
};

json run_correlate(const CorrelateArgs& a) {
  const auto scores = single_column(io::read_matrix(a.scores, a.common.header_mode()), "scores");
  const auto actuals = single_column(io::read_matrix(a.actuals, a.common.header_mode()), "actuals");
  std::vector<Metric> metrics;
  if (a.metric == "all") {
    metrics.assign(std::begin(synthbench::kAllMetrics), std::end(synthbench::kAllMetrics));
  } else {
    metrics.push_back(evalmetrics::parse_metric(a.metric));
  }

  Stopwatch clock;
  json list = json::array();
  for (Metric m : metrics) list.push_back(correlation_json(evalmetrics::correlate(m, scores, actuals)));
  const double rmse = evalmetrics::linear_fit_rmse(scores, actuals);
  const double ms = clock.elapsed_ms();

  json j = envelope("correlate");
  j["correlations"] = std::move(list);
  j["linear_fit_rmse"] = rmse;
  j["input_digests"] = {{"scores", sha256_file(a.scores)}, {"actuals", sha256_file(a.actuals)}};
  j["compute_ms"] = ms;
  return j;
}

// ---- select-source ---------------------------------------------------------

struct SelectArgs {
  Common common;
  std::string scores;
  std::string actuals;
  std::vector<std::size_t> ks{1};
};

json run_select(const SelectArgs& a) {
  const Matrix scores = io::read_matrix(a.scores, a.common.header_mode());
  const Matrix actuals = io::read_matrix(a.actuals, a.common.header_mode());

  Stopwatch clock;
  json results = json::array();
  std::optional<evalmetrics::TopKResult> first;
  for (std::size_t k : a.ks) {
    auto r = evalmetrics::top_k_matching_rate(scores, actuals, k);
    results.push_back({{"k", r.k},
                       {"rate", r.rate},
                       {"m_match", r.m_match},
                       {"m_target", r.m_target},
                       {"matched", r.matched}});
    if (!first) first = std::move(r);
  }
  const double ms = clock.elapsed_ms();

  json j = envelope("select-source");
  j["results"] = std::move(results);
  j["selected"] = first->selected;
  j["best"] = first->best;
  j["selection_tied"] = first->selection_tied;
  j["input_digests"] = {{"scores", sha256_file(a.scores)}, {"actuals", sha256_file(a.actuals)}};
  j["compute_ms"] = ms;
  return j;
}

// ---- bound ---------------------------------------------------------------

struct BoundArgs {
  Common common;
  double score = 0.0;
  estimators::ComplexitySpec spec;
  bool shared = false;
  std::optional<double> a_norm_sq;
  std::optional<double> source_loss;
};

json run_bound(const BoundArgs& a, std::ostream& err) {
  a.spec.validate();
  if (a.spec.delta > 1.0) {
    err << "warning: delta = " << a.spec.delta
        << " > 1; the bound has no probabilistic meaning, reporting the formula value only\n";
  }
  if (a.shared && (!a.a_norm_sq || !a.source_loss)) {
    throw InvalidArgument("--shared needs --a-norm-sq and --source-loss");
  }

  Stopwatch clock;
  const double c = estimators::complexity_term(a.spec);
  const double per_sample = c / std::sqrt(static_cast<double>(a.spec.n));
  const double bound =
      a.shared ? estimators::theorem2_lower_bound(a.score, *a.a_norm_sq, *a.source_loss, a.spec)
               : estimators::theorem1_lower_bound(a.score, a.spec);
  const double ms = clock.elapsed_ms();

  json j = envelope("bound");
  j["estimator"] = a.shared ? "SharedLabMSE" : "LabMSE";
  j["score"] = a.score;
  j["complexity_term"] = c;
  j["complexity_over_sqrt_n"] = per_sample;
  j["lower_bound"] = bound;
  j["spec"] = {{"d", a.spec.d}, {"d_t", a.spec.d_t}, {"M", a.spec.M}, {"H", a.spec.H},
               {"L", a.spec.L}, {"delta", a.spec.delta}, {"n", a.spec.n}};
  if (a.shared) {
    j["a_norm_sq"] = *a.a_norm_sq;
    j["source_loss"] = *a.source_loss;
  }
  j["compute_ms"] = ms;
  return j;
}

// ---- bench ---------------------------------------------------------------

struct BenchArgs {
  Common common;
  synthbench::TaskSpec spec;
  std::size_t n_sources = 6;
  std::size_t n_targets = 5;
  std::vector<double> lambdas{0.0, 0.5, 1.0, 5.0};
  std::vector<std::string> methods{"LinMSE", "LabMSE", "SharedLabMSE"};
  std::vector<std::size_t> subset_sizes;
  std::size_t repeats = 10;
  bool check_lemmas = false;
  bool timing = false;
};

json bench_config(const BenchArgs& a, const std::vector<Method>& methods) {
  json m = json::array();
  for (Method x : methods) m.push_back(estimators::method_name(x));
  return {{"seed", a.spec.seed},
          {"n_sources", a.n_sources},
          {"n_targets", a.n_targets},
          {"n_train", a.spec.n_train},
          {"n_test", a.spec.n_test},
          {"d", a.spec.input_dim},
          {"dr", a.spec.feature_dim},
          {"ds", a.spec.source_label_dim},
          {"dt", a.spec.target_label_dim},
          {"noise", a.spec.noise_std},
          {"alignment", a.spec.alignment},
          {"lambdas", a.lambdas},
          {"methods", m},
          {"subset_sizes", a.subset_sizes},
          {"repeats", a.repeats}};
}

json correlations_json(const std::vector<synthbench::CorrelationEntry>& entries) {
  json list = json::array();
  for (const auto& e : entries) {
    json j{{"method", estimators::method_name(e.method)},
           {"lambda", e.lambda},
           {"metric", evalmetrics::metric_name(e.metric)},
           {"degenerate", !e.report.has_value()}};
    j["value"] = e.report ? json(e.report->value) : json(nullptr);
    j["n_pairs"] = e.report ? json(e.report->n_pairs) : json(nullptr);
    j["p_value"] = e.report && e.report->p_value ? json(*e.report->p_value) : json(nullptr);
    list.push_back(std::move(j));
  }
  return list;
}

struct BenchOutcome {
  json doc;
  bool lemma_violation = false;
};

BenchOutcome run_bench(const BenchArgs& a) {
  a.spec.validate();
  std::vector<Method> methods;
  for (const auto& name : a.methods) methods.push_back(estimators::parse_method(name));
  if (a.lambdas.empty()) throw InvalidArgument("--lambdas must not be empty");
  for (std::size_t size : a.subset_sizes) {
    if (size < 1 || size > a.spec.n_train) {
      throw InvalidArgument("subset size " + std::to_string(size) + " outside [1, n_train]");
    }
  }

  Stopwatch clock;
  const auto family = synthbench::generate_task_family(a.spec, a.n_sources, a.n_targets);
  const auto result = synthbench::run_benchmark(family, a.lambdas, methods);

  BenchOutcome outcome;
  json& j = outcome.doc;
  j = envelope("bench");
  j["config"] = bench_config(a, methods);

  json pairs = json::array();
  for (const auto& p : result.pairs) {
    json scores = json::array();
    for (const auto& ms : p.scores) {
      for (const auto& ls : ms.by_lambda) {
        scores.push_back({{"method", estimators::method_name(ms.method)},
                          {"lambda", ls.lambda},
                          {"value", ls.value}});
      }
    }
    pairs.push_back({{"source_id", p.source_id},
                     {"target_id", p.target_id},
                     {"actual_train_neg_mse", p.actual_train_neg_mse},
                     {"actual_test_neg_mse", p.actual_test_neg_mse},
                     {"scores", std::move(scores)}});
  }
  j["pairs"] = std::move(pairs);
  j["correlations"] = correlations_json(result.correlations);

  if (!a.subset_sizes.empty()) {
    const auto cells =
        synthbench::small_data_sweep(family, a.subset_sizes, a.repeats, a.lambdas, methods);
    json sweep = json::array();
    for (const auto& c : cells) {
      sweep.push_back({{"subset_size", c.subset_size},
                       {"method", estimators::method_name(c.method)},
                       {"lambda", c.lambda},
                       {"metric", evalmetrics::metric_name(c.metric)},
                       {"mean_value", c.mean_value},
                       {"repeats", c.repeats},
                       {"degenerate_repeats", c.degenerate_repeats}});
    }
    j["small_data"] = std::move(sweep);
  }

  if (a.check_lemmas) {
    const auto rep = synthbench::check_lemmas(family, a.lambdas);
    json violations = json::array();
    for (const auto& v : rep.violations) {
      violations.push_back({{"source_id", v.source_id},
                            {"target_id", v.target_id},
                            {"lambda", v.lambda},
                            {"lemma", v.lemma},
                            {"margin", v.margin}});
    }
    j["lemma_checks"] = {{"checks", rep.checks},
                         {"tolerance", estimators::kInequalityTolerance},
                         {"worst_margin_lemma1", rep.worst_margin_lemma1},
                         {"worst_margin_lemma2", rep.worst_margin_lemma2},
                         {"violations", std::move(violations)}};
    outcome.lemma_violation = !rep.violations.empty();
  }

  if (a.timing) j["compute_ms"] = clock.elapsed_ms();
  return outcome;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Regression transferability scores, bounds, and synthetic benchmarks", "xfermse"};
  app.require_subcommand(1);
  app.set_version_flag("--version", XFERMSE_VERSION);

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "Compute a transferability score");
  score_cmd->add_option("--method", score.method, "linmse | labmse | sharedlab")
      ->required()
      ->check(CLI::IsMember({"linmse", "labmse", "sharedlab"}));
  score_cmd->add_option("--lambda", score.lambda, "Ridge weight on ||A||_F^2")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  score_cmd->add_option("--inputs", score.inputs,
                        "Features (linmse), dummy labels (labmse) or source labels (sharedlab)")
      ->required();
  score_cmd->add_option("--targets", score.targets, "Target labels")->required();
  add_common(score_cmd, score.common, true);

  CorrelateArgs corr;
  auto* corr_cmd = app.add_subcommand("correlate", "Correlate estimator scores with actuals");
  corr_cmd->add_option("--scores", corr.scores, "Single-column score file")->required();
  corr_cmd->add_option("--actuals", corr.actuals, "Single-column actual file")->required();
  corr_cmd->add_option("--metric", corr.metric, "pearson | spearman | kendall | all")
      ->check(CLI::IsMember({"pearson", "spearman", "kendall", "all"}))
      ->capture_default_str();
  add_common(corr_cmd, corr.common, true);

  SelectArgs sel;
  auto* sel_cmd = app.add_subcommand("select-source", "Top-k source selection matching rate");
  sel_cmd->add_option("--scores", sel.scores, "Estimator scores, sources x targets")->required();
  sel_cmd->add_option("--actuals", sel.actuals, "Actual negative test MSE, sources x targets")
      ->required();
  sel_cmd->add_option("--k", sel.ks, "Top-k cutoff (repeatable)")->capture_default_str();
  add_common(sel_cmd, sel.common, true);

  BoundArgs bound;
  auto* bound_cmd = app.add_subcommand("bound", "Evaluate the generalization lower bound");
  bound_cmd->add_option("--score", bound.score, "Estimator value")->required();
  bound_cmd->add_option("--d", bound.spec.d, "Input dimension")->required();
  bound_cmd->add_option("--dt", bound.spec.d_t, "Target label dimension")->required();
  bound_cmd->add_option("--M", bound.spec.M, "Max parameters per layer")->required();
  bound_cmd->add_option("--H", bound.spec.H, "Max hidden nodes per layer")->required();
  bound_cmd->add_option("--L", bound.spec.L, "Layer count")->required();
  bound_cmd->add_option("--delta", bound.spec.delta, "Confidence parameter")->required();
  bound_cmd->add_option("--n", bound.spec.n, "Sample count")->required();
  bound_cmd->add_flag("--shared", bound.shared, "Shared-inputs variant");
  bound_cmd->add_option("--a-norm-sq", bound.a_norm_sq, "||A*||_F^2 of the shared-inputs fit");
  bound_cmd->add_option("--source-loss", bound.source_loss, "Source model training loss");
  add_common(bound_cmd, bound.common, false);

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run the synthetic transfer benchmark");
  bench_cmd->add_option("--seed", bench.spec.seed)->capture_default_str();
  bench_cmd->add_option("--n-sources", bench.n_sources)->capture_default_str();
  bench_cmd->add_option("--n-targets", bench.n_targets)->capture_default_str();
  bench_cmd->add_option("--n-train", bench.spec.n_train)->capture_default_str();
  bench_cmd->add_option("--n-test", bench.spec.n_test)->capture_default_str();
  bench_cmd->add_option("--d", bench.spec.input_dim, "Input dimension")->capture_default_str();
  bench_cmd->add_option("--dr", bench.spec.feature_dim, "Feature dimension")->capture_default_str();
  bench_cmd->add_option("--ds", bench.spec.source_label_dim, "Source label dimension")
      ->capture_default_str();
  bench_cmd->add_option("--dt", bench.spec.target_label_dim, "Target label dimension")
      ->capture_default_str();
  bench_cmd->add_option("--noise", bench.spec.noise_std)->capture_default_str();
  bench_cmd->add_option("--alignment", bench.spec.alignment)->capture_default_str();
  bench_cmd->add_option("--lambdas", bench.lambdas, "Comma-separated lambda grid")
      ->delimiter(',')
      ->capture_default_str();
  bench_cmd->add_option("--methods", bench.methods, "Comma-separated estimators")
      ->delimiter(',')
      ->capture_default_str();
  bench_cmd->add_option("--subset-sizes", bench.subset_sizes,
                        "Comma-separated training subset sizes; enables the small-data sweep")
      ->delimiter(',');
  bench_cmd->add_option("--repeats", bench.repeats, "Repeats per subset size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench_cmd->add_flag("--check-lemmas", bench.check_lemmas,
                      "Verify both label-MSE inequalities on every pair; exit 5 on violation");
  bench_cmd->add_flag("--timing", bench.timing, "Include compute_ms (breaks byte-identical output)");
  add_common(bench_cmd, bench.common, false);

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (score_cmd->parsed()) {
      emit(run_score(score), score.common, out);
    } else if (corr_cmd->parsed()) {
      emit(run_correlate(corr), corr.common, out);
    } else if (sel_cmd->parsed()) {
      emit(run_select(sel), sel.common, out);
    } else if (bound_cmd->parsed()) {
      emit(run_bound(bound, err), bound.common, out);
    } else if (bench_cmd->parsed()) {
      const auto outcome = run_bench(bench);
      emit(outcome.doc, bench.common, out);
      if (outcome.lemma_violation) {
        err << "error: inequality check failed on at least one pair\n";
        return kExitLemma;
      }
    }
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDimension;
  } catch (const DegenerateError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace xfermse::cli
