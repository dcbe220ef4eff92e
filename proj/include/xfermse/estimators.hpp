#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

#include "xfermse/numkit.hpp"
#include "xfermse/ridge.hpp"

namespace xfermse::estimators {

using numkit::Matrix;

enum class Method { LinMSE, LabMSE, SharedLabMSE };

std::string_view method_name(Method m);
/// Accepts the canonical names and the CLI spellings linmse/labmse/sharedlab.
Method parse_method(std::string_view name);

/// Negative minimized ridge objective of regressing targets on some input
/// representation. `value` is always −(mse_term + penalty_term) and so never
/// positive.
struct TransferScore {
  Method method = Method::LinMSE;
  double lambda = 0.0;
  double value = 0.0;
  std::size_t n = 0;
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  double mse_term = 0.0;
  double penalty_term = 0.0;
};

TransferScore score_from_fit(Method method, const ridge::RidgeSolution& fit);

/// Linear MSE: targets regressed on extracted features.
TransferScore lin_mse(const Matrix& features, const Matrix& targets, double lambda);
/// Label MSE: targets regressed on the source model's dummy labels.
TransferScore lab_mse(const Matrix& dummy_labels, const Matrix& targets, double lambda);
/// Shared-inputs Label MSE: targets regressed on the true source labels.
TransferScore shared_lab_mse(const Matrix& source_labels, const Matrix& target_labels,
                             double lambda);

TransferScore estimate(Method method, const Matrix& inputs, const Matrix& targets, double lambda);

/// Architecture and sample parameters of the generalization bounds.
///
/// delta is accepted anywhere in (0, 4) so that ln(4/δ) stays nonnegative;
/// the probabilistic reading of the bounds needs δ ≤ 1.
struct ComplexitySpec {
  std::size_t d = 1;
  std::size_t d_t = 1;
  std::size_t M = 1;
  std::size_t H = 1;
  std::size_t L = 1;
  double delta = 0.05;
  std::size_t n = 1;

  /// Throws InvalidArgument when any field is outside its domain.
  void validate() const;
};

/// C = 16·M^{2L+2}·H^{2L}·[d_t²·d·√(L+1+ln d) + d_t·d²·√(2·ln(4/δ))].
double complexity_term(const ComplexitySpec& spec);

/// Label MSE minus C/√n.
double theorem1_lower_bound(const TransferScore& score, const ComplexitySpec& spec);
double theorem1_lower_bound(double score_value, const ComplexitySpec& spec);

/// 2·score − 2·‖A*_λ‖_F²·source_loss − C/√n for the shared-inputs estimator.
double theorem2_lower_bound(const TransferScore& score, double a_norm_sq, double source_loss,
                            const ComplexitySpec& spec);
double theorem2_lower_bound(double score_value, double a_norm_sq, double source_loss,
                            const ComplexitySpec& spec);

inline constexpr double kInequalityTolerance = 1e-10;

struct Lemma1Result {
  double lab_score = 0.0;
  double neg_target_loss = 0.0;
  double gap = 0.0;
  bool holds = false;
};

/// Checks Label MSE ≤ −(training loss of the retrained linear head on features).
/// The dummy labels must be an affine function of the features.
Lemma1Result lemma1_check(const Matrix& features, const Matrix& dummy_labels,
                          const Matrix& targets, double lambda);

struct Lemma2Result {
  double shared_score = 0.0;
  double a_norm_sq = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// Checks shared Label MSE ≤ −L_t/2 + ‖A*_λ‖_F²·source_loss, where L_t is the
/// training loss of the linear head retrained on features and source_loss is
/// the loss of an affine source head on the same features.
Lemma2Result lemma2_check(const Matrix& source_labels, const Matrix& target_labels,
                          const Matrix& features, double lambda, double source_loss);

struct GeneralizationGap {
  double gap = 0.0;
  /// |score| / gap, only defined when gap > 0.
  std::optional<double> ratio;
};

GeneralizationGap generalization_gap(const TransferScore& score, double actual_neg_mse);

}  // namespace xfermse::estimators
