#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "cll/candidate_set.hpp"
#include "cll/rng.hpp"

namespace cll {

/// A probability vector P(.|x) over K labels. Entries are non-negative and
/// sum to one within 1e-12; construction throws ValidationError otherwise.
class LabelDistribution {
 public:
  static constexpr double kSumTolerance = 1e-12;

  explicit LabelDistribution(std::vector<double> probs);

  static LabelDistribution uniform(int num_classes);
  static LabelDistribution one_hot(int num_classes, int label);
  /// Renormalizes non-negative finite weights (at least one positive).
  static LabelDistribution from_weights(std::span<const double> weights);

  int num_classes() const noexcept { return static_cast<int>(p_.size()); }
  double operator[](int y) const { return p_[static_cast<std::size_t>(y)]; }
  std::span<const double> probs() const noexcept { return p_; }

  /// Inverse-CDF draw of a single label.
  int sample(Rng& rng) const;

 private:
  std::vector<double> p_;
};

/// P(Y|x) = (1 / C(K-1, N-1)) * sum_{y in Y} p_y.
double candidate_probability(const LabelDistribution& p, const CandidateSet& Y);

/// Exact draw from P(Y|x) for |Y| = N.
///
/// Two stages: y* ~ p, then a uniform (N-1)-subset S of the other K-1
/// labels, Y = {y*} u S. A fixed Y arises from each of its N members y* with
/// probability p_{y*} / C(K-1, N-1), so its total mass is
/// sum_{y in Y} p_y / C(K-1, N-1), which is exactly P(Y|x). O(K) per draw.
CandidateSet sample_candidate_set(const LabelDistribution& p, int candidate_count, Rng& rng);

struct PrivacyMixture {
  double beta;
  LabelDistribution q;
};

/// Confidence Q(alpha|x) available to whoever only sees Y ~ P(Y|x):
/// q = beta * p + (1 - beta) / K with beta = (K-N) / (N(K-1)).
PrivacyMixture posterior_mixture(const LabelDistribution& p, int candidate_count);

/// beta = (K-N) / (N(K-1)).
double mixture_weight(int num_classes, int candidate_count);

struct AnnotatedExample {
  std::vector<double> x;
  CandidateSet Y;
  /// Evaluation only; never read by training code. Need not lie in Y.
  std::optional<int> true_label;

  friend bool operator==(const AnnotatedExample&, const AnnotatedExample&) = default;
};

using Annotator = std::function<LabelDistribution(std::span<const double>)>;

struct AnnotateOptions {
  /// Fixed candidate-set size N, used when `count_weights` is empty.
  int candidate_count = 1;
  /// Stochastic-N mode: count_weights[N-1] is the relative weight of
  /// drawing |Y| = N for an example. Must have K-1 entries.
  std::vector<double> count_weights;
  /// Also draw a true label from the annotator simplex.
  bool draw_true_label = true;
};

/// Candidate-label annotation of `features` (one draw per example). Each
/// example i uses its own sub-stream derive_seed(seed, i), so the output
/// depends only on (features, annotator, options, seed).
std::vector<AnnotatedExample> annotate_dataset(std::span<const std::vector<double>> features,
                                               const Annotator& annotator,
                                               const AnnotateOptions& options, std::uint64_t seed);

/// Convenience overload for fixed N.
std::vector<AnnotatedExample> annotate_dataset(std::span<const std::vector<double>> features,
                                               const Annotator& annotator, int candidate_count,
                                               std::uint64_t seed);

}  // namespace cll
