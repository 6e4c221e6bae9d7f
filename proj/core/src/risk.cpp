#include "cll/risk.hpp"

#include <cmath>
#include <string>

#include "cll/combinatorics.hpp"
#include "cll/csv.hpp"
#include "cll/error.hpp"

namespace cll {

int predict_label(std::span<const double> scores) {
  if (scores.empty()) throw ValidationError("cannot predict from an empty score vector");
  int best = 0;
  for (std::size_t y = 1; y < scores.size(); ++y)
    if (scores[y] > scores[static_cast<std::size_t>(best)]) best = static_cast<int>(y);
  return best;
}

double risk_rescale(int num_classes, int candidate_count) {
  if (candidate_count < 1 || candidate_count > num_classes - 1)
    throw ValidationError("candidate count N=" + std::to_string(candidate_count) + " outside [1, K-1]");
  return static_cast<double>(num_classes - 1) / (num_classes - candidate_count);
}

double empirical_risk_from_scores(const LossScheme& scheme, std::span<const std::vector<double>> scores,
                                  std::span<const AnnotatedExample> data, CountMode mode) {
  if (!scheme.is_simplified())
    throw ValidationError(
        "the rescaled empirical risk needs a shifted surrogate (a = 0) with xi1 = 1 and xi2 = 0; "
        "shift the surrogate by l(0) and drop the additive constants");
  if (data.empty()) throw ValidationError("empirical risk of an empty dataset");
  if (scores.size() != data.size()) throw ValidationError("score rows and examples differ in count");
  const int K = scheme.num_classes;
  const int first_n = data.front().Y.size();
  // Per-example rescaling equals grouping by N, rescaling each group mean
  // and weighting groups by their share of the data.
  std::vector<double> terms(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int N = data[i].Y.size();
    if (mode == CountMode::fixed && N != first_n)
      throw HeterogeneousDataset("examples carry candidate sets of sizes " + std::to_string(first_n) + " and " +
                                 std::to_string(N) + "; use the stochastic count mode");
    terms[i] = risk_rescale(K, N) * candidate_loss(scheme, scores[i], data[i].Y);
  }
  return pairwise_sum(terms) / static_cast<double>(data.size());
}

namespace {

std::vector<std::vector<double>> score_all(const Scorer& model, std::span<const AnnotatedExample> data) {
  std::vector<std::vector<double>> scores;
  scores.reserve(data.size());
  for (const auto& ex : data) scores.push_back(model.score(ex.x));
  return scores;
}

}  // namespace

double empirical_risk(const LossScheme& scheme, const Scorer& model, std::span<const AnnotatedExample> data,
                      CountMode mode) {
  if (model.num_classes() != scheme.num_classes) throw ValidationError("model and scheme disagree on K");
  return empirical_risk_from_scores(scheme, score_all(model, data), data, mode);
}

RiskOracle true_risk_oracle(const OrdinaryLossFn& ordinary, int num_classes, double xi1, double xi2,
                            const LabelDistribution& p, int candidate_count) {
  const int K = num_classes;
  const int N = candidate_count;
  if (K > kMaxOracleClasses)
    throw ValidationError("risk oracle enumerates subsets only up to K=" + std::to_string(kMaxOracleClasses));
  if (p.num_classes() != K) throw ValidationError("distribution and loss disagree on K");
  if (N < 1 || N > K - 1) throw ValidationError("candidate count outside [1, K-1]");
  if (!(xi1 > 0.0)) throw ValidationError("xi1 must be positive");

  std::vector<double> L(static_cast<std::size_t>(K));
  double lhs = 0.0;
  double total = 0.0;
  for (int y = 0; y < K; ++y) {
    L[static_cast<std::size_t>(y)] = ordinary(y);
    lhs += p[y] * L[static_cast<std::size_t>(y)];
    total += L[static_cast<std::size_t>(y)];
  }

  const double norm = binomial_real(K - 1, N - 1);
  double expected = 0.0;
  for_each_subset(K, N, [&](std::span<const int> Y) {
    double mass = 0.0;
    double loss = 0.0;
    for (int y : Y) {
      mass += p[y];
      loss += L[static_cast<std::size_t>(y)];
    }
    expected += (mass / norm) * (xi1 * loss + xi2);
  });

  const double constant = -static_cast<double>(N - 1) / (K - N) * total - xi2 * (K - 1) / (xi1 * (K - N));
  const double rhs = static_cast<double>(K - 1) / (xi1 * (K - N)) * expected + constant;
  return {lhs, rhs, constant};
}

RiskOracle true_risk_oracle(const LossScheme& scheme, std::span<const double> g, const LabelDistribution& p,
                            int candidate_count) {
  return true_risk_oracle([&](int y) { return ordinary_loss(scheme, g, y); }, scheme.num_classes, scheme.xi1,
                          scheme.xi2, p, candidate_count);
}

std::vector<std::pair<std::string, std::string>> RiskReport::to_record() const {
  return {{"n", std::to_string(n)},
          {"empirical_risk", format_double(empirical_risk)},
          {"zero_one_risk", format_double(zero_one_risk)},
          {"accuracy", format_double(accuracy)}};
}

RiskReport zero_one_evaluate(const LossScheme& scheme, const Scorer& model, std::span<const AnnotatedExample> data,
                             CountMode mode) {
  if (data.empty()) throw ValidationError("evaluation on an empty dataset");
  const auto scores = score_all(model, data);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!data[i].true_label) throw ValidationError("example " + std::to_string(i) + " has no true label");
    if (predict_label(scores[i]) == *data[i].true_label) ++correct;
  }
  RiskReport report;
  report.n = data.size();
  report.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  report.zero_one_risk = static_cast<double>(data.size() - correct) / static_cast<double>(data.size());
  report.empirical_risk = empirical_risk_from_scores(scheme, scores, data, mode);
  return report;
}

ErrorEstimate classification_error(const LossScheme& scheme, const Scorer& fhat, const Scorer& fstar,
                                   std::span<const AnnotatedExample> test_data, CountMode mode) {
  const double r_hat = empirical_risk(scheme, fhat, test_data, mode);
  const double r_star = empirical_risk(scheme, fstar, test_data, mode);
  return {r_hat - r_star, r_hat, r_star};
}

}  // namespace cll
