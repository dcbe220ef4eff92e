#include "xfermse/estimators.hpp"

#include <cmath>
#include <string>

#include "xfermse/errors.hpp"

namespace xfermse::estimators {

std::string_view method_name(Method m) {
  switch (m) {
    case Method::LinMSE:
      return "LinMSE";
    case Method::LabMSE:
      return "LabMSE";
    case Method::SharedLabMSE:
      return "SharedLabMSE";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "LinMSE" || name == "linmse") return Method::LinMSE;
  if (name == "LabMSE" || name == "labmse") return Method::LabMSE;
  if (name == "SharedLabMSE" || name == "sharedlab") return Method::SharedLabMSE;
  throw InvalidArgument("unknown method '" + std::string(name) + "'");
}

TransferScore score_from_fit(Method method, const ridge::RidgeSolution& fit) {
  TransferScore s;
  s.method = method;
  s.lambda = fit.lambda();
  s.mse_term = fit.mse_term();
  s.penalty_term = fit.penalty_term();
  s.value = 0.0 - (s.mse_term + s.penalty_term);  // never -0.0
  s.n = fit.n();
  s.input_dim = fit.input_dim();
  s.output_dim = fit.output_dim();
  return s;
}

TransferScore estimate(Method method, const Matrix& inputs, const Matrix& targets, double lambda) {
  return score_from_fit(method, ridge::ridge_fit(inputs, targets, lambda));
}

TransferScore lin_mse(const Matrix& features, const Matrix& targets, double lambda) {
  return estimate(Method::LinMSE, features, targets, lambda);
}

TransferScore lab_mse(const Matrix& dummy_labels, const Matrix& targets, double lambda) {
  return estimate(Method::LabMSE, dummy_labels, targets, lambda);
}

TransferScore shared_lab_mse(const Matrix& source_labels, const Matrix& target_labels,
                             double lambda) {
  return estimate(Method::SharedLabMSE, source_labels, target_labels, lambda);
}

void ComplexitySpec::validate() const {
  auto at_least_one = [](std::size_t v, const char* name) {
    if (v < 1) throw InvalidArgument(std::string(name) + " must be >= 1");
  };
  at_least_one(d, "d");
  at_least_one(d_t, "d_t");
  at_least_one(M, "M");
  at_least_one(H, "H");
  at_least_one(L, "L");
  if (!(delta > 0.0 && delta < 4.0)) throw InvalidArgument("delta must lie in (0, 4)");
  if (n < 1) throw InvalidArgument("n must be >= 1");
}

double complexity_term(const ComplexitySpec& spec) {
  spec.validate();
  const auto d = static_cast<double>(spec.d);
  const auto dt = static_cast<double>(spec.d_t);
  const auto layers = static_cast<double>(spec.L);
  const double scale = 16.0 * std::pow(static_cast<double>(spec.M), 2.0 * layers + 2.0) *
                       std::pow(static_cast<double>(spec.H), 2.0 * layers);
  const double depth_part = dt * dt * d * std::sqrt(layers + 1.0 + std::log(d));
  const double conf_part = dt * d * d * std::sqrt(2.0 * std::log(4.0 / spec.delta));
  const double c = scale * (depth_part + conf_part);
  if (!std::isfinite(c)) throw InvalidArgument("complexity term overflows a double");
  return c;
}

double theorem1_lower_bound(double score_value, const ComplexitySpec& spec) {
  return score_value - complexity_term(spec) / std::sqrt(static_cast<double>(spec.n));
}

double theorem1_lower_bound(const TransferScore& score, const ComplexitySpec& spec) {
  if (score.method != Method::LabMSE) {
    throw InvalidArgument("the label-MSE bound needs a LabMSE score");
  }
  if (score.n != spec.n) throw DimensionError("score and complexity spec disagree on n");
  return theorem1_lower_bound(score.value, spec);
}

double theorem2_lower_bound(double score_value, double a_norm_sq, double source_loss,
                            const ComplexitySpec& spec) {
  if (!(a_norm_sq >= 0.0) || !(source_loss >= 0.0)) {
    throw InvalidArgument("a_norm_sq and source_loss must be nonnegative");
  }
  return 2.0 * score_value - 2.0 * a_norm_sq * source_loss -
         complexity_term(spec) / std::sqrt(static_cast<double>(spec.n));
}

double theorem2_lower_bound(const TransferScore& score, double a_norm_sq, double source_loss,
                            const ComplexitySpec& spec) {
  if (score.method != Method::SharedLabMSE) {
    throw InvalidArgument("the shared-inputs bound needs a SharedLabMSE score");
  }
  if (score.n != spec.n) throw DimensionError("score and complexity spec disagree on n");
  return theorem2_lower_bound(score.value, a_norm_sq, source_loss, spec);
}

Lemma1Result lemma1_check(const Matrix& features, const Matrix& dummy_labels,
                          const Matrix& targets, double lambda) {
  if (features.rows() != dummy_labels.rows() || features.rows() != targets.rows()) {
    throw DimensionError("lemma1_check: row counts differ");
  }
  Lemma1Result r;
  r.lab_score = lab_mse(dummy_labels, targets, lambda).value;
  r.neg_target_loss = -ridge::ridge_fit(features, targets, 0.0).mse_term();
  r.gap = r.neg_target_loss - r.lab_score;
  r.holds = r.gap >= -kInequalityTolerance;
  return r;
}

Lemma2Result lemma2_check(const Matrix& source_labels, const Matrix& target_labels,
                          const Matrix& features, double lambda, double source_loss) {
  if (features.rows() != source_labels.rows() || features.rows() != target_labels.rows()) {
    throw DimensionError("lemma2_check: row counts differ");
  }
  if (!(source_loss >= 0.0)) throw InvalidArgument("source_loss must be nonnegative");
  const auto shared = ridge::ridge_fit(source_labels, target_labels, lambda);
  const double target_loss = ridge::ridge_fit(features, target_labels, 0.0).mse_term();
  Lemma2Result r;
  r.shared_score = -shared.objective();
  r.a_norm_sq = numkit::frobenius_sq(shared.a());
  r.rhs = -target_loss / 2.0 + r.a_norm_sq * source_loss;
  r.holds = r.shared_score <= r.rhs + kInequalityTolerance;
  return r;
}

GeneralizationGap generalization_gap(const TransferScore& score, double actual_neg_mse) {
  GeneralizationGap g;
  g.gap = actual_neg_mse - score.value;
  if (g.gap > 0.0) g.ratio = std::abs(score.value) / g.gap;
  return g;
}

}  // namespace xfermse::estimators
