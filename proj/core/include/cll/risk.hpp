#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cll/losses.hpp"
#include "cll/sampling.hpp"
#include "cll/scorer.hpp"

namespace cll {

/// Rescale factor (K-1)/(K-N) turning the mean candidate loss into an
/// unbiased estimate of the classification risk.
double risk_rescale(int num_classes, int candidate_count);

enum class CountMode {
  fixed,       // every example must share one N
  stochastic,  // group by N, rescale per group, weight by group size
};

/// Rescaled empirical candidate risk
///   (K-1) / (n (K-N)) * sum_i candidate_loss(g(x_i), Y_i).
/// Requires scheme.is_simplified(). In fixed mode mixed N raises
/// HeterogeneousDataset.
double empirical_risk(const LossScheme& scheme, const Scorer& model,
                      std::span<const AnnotatedExample> data, CountMode mode = CountMode::fixed);

/// Same, from precomputed scores (one row per example).
double empirical_risk_from_scores(const LossScheme& scheme,
                                  std::span<const std::vector<double>> scores,
                                  std::span<const AnnotatedExample> data,
                                  CountMode mode = CountMode::fixed);

struct RiskOracle {
  double lhs;  // E_{P(y|x)}[L(g, y)]
  double rhs;  // (K-1)/(xi1 (K-N)) E_{P(Y|x)}[Lbar(g, Y)] + C
  double constant;  // C
};

/// Largest K accepted by the enumeration oracle.
inline constexpr int kMaxOracleClasses = 12;

/// Brute-force check of the candidate-risk rewriting for one x: enumerates
/// all C(K, N) candidate sets weighted by P(Y|x). Works for any xi1 > 0, xi2
/// and any surrogate.
RiskOracle true_risk_oracle(const LossScheme& scheme, std::span<const double> g,
                            const LabelDistribution& p, int candidate_count);

/// Generic form over an arbitrary ordinary loss L(y). C contains
/// sum_y L(y), evaluated literally.
using OrdinaryLossFn = std::function<double(int)>;
RiskOracle true_risk_oracle(const OrdinaryLossFn& ordinary, int num_classes, double xi1, double xi2,
                            const LabelDistribution& p, int candidate_count);

struct RiskReport {
  double empirical_risk = 0.0;
  double zero_one_risk = 0.0;
  double accuracy = 0.0;
  std::size_t n = 0;

  /// Flat key-value record, fixed key order.
  std::vector<std::pair<std::string, std::string>> to_record() const;
};

/// Accuracy of f(x) = argmax_y g_y(x) against the true labels, plus the
/// rescaled candidate risk of the same data. Throws ValidationError if any
/// example lacks a true label or `data` is empty.
RiskReport zero_one_evaluate(const LossScheme& scheme, const Scorer& model,
                             std::span<const AnnotatedExample> data,
                             CountMode mode = CountMode::fixed);

struct ErrorEstimate {
  double err;
  double risk_fhat;
  double risk_fstar;
};

/// err = Rhat_test(fhat) - Rhat_test(fstar) on the test split. `fhat` is the
/// training-risk minimizer and `fstar` the test-risk minimizer standing in
/// for the Bayes-optimal-in-class classifier. May be negative.
ErrorEstimate classification_error(const LossScheme& scheme, const Scorer& fhat, const Scorer& fstar,
                                   std::span<const AnnotatedExample> test_data,
                                   CountMode mode = CountMode::fixed);

}  // namespace cll
