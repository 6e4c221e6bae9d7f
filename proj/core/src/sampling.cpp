#include "cll/sampling.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "cll/combinatorics.hpp"
#include "cll/error.hpp"

namespace cll {
namespace {

void check_count(int num_classes, int candidate_count) {
  if (candidate_count < 1 || candidate_count > num_classes - 1)
    throw ValidationError("candidate count N=" + std::to_string(candidate_count) + " outside [1, K-1] for K=" +
                          std::to_string(num_classes));
}

}  // namespace

LabelDistribution::LabelDistribution(std::vector<double> probs) : p_(std::move(probs)) {
  if (p_.size() < 2) throw ValidationError("label distribution needs at least two classes");
  double sum = 0.0;
  for (double v : p_) {
    if (!std::isfinite(v) || v < 0.0) throw ValidationError("label distribution has a negative or non-finite entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSumTolerance)
    throw ValidationError("label distribution sums to " + std::to_string(sum) + ", not 1");
}

LabelDistribution LabelDistribution::uniform(int num_classes) {
  if (num_classes < 2) throw ValidationError("label distribution needs at least two classes");
  return LabelDistribution(std::vector<double>(static_cast<std::size_t>(num_classes), 1.0 / num_classes));
}

LabelDistribution LabelDistribution::one_hot(int num_classes, int label) {
  if (label < 0 || label >= num_classes) throw IndexError("one-hot label outside [0, K)");
  std::vector<double> p(static_cast<std::size_t>(num_classes), 0.0);
  p[static_cast<std::size_t>(label)] = 1.0;
  return LabelDistribution(std::move(p));
}

LabelDistribution LabelDistribution::from_weights(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw ValidationError("weights must be non-negative and finite");
    total += w;
  }
  if (!(total > 0.0)) throw ValidationError("weights must not all be zero");
  std::vector<double> p(weights.begin(), weights.end());
  for (double& v : p) v /= total;
  return LabelDistribution(std::move(p));
}

int LabelDistribution::sample(Rng& rng) const {
  const double u = rng.uniform();
  double cumulative = 0.0;
  int last_positive = 0;
  for (std::size_t y = 0; y < p_.size(); ++y) {
    if (p_[y] <= 0.0) continue;
    last_positive = static_cast<int>(y);
    cumulative += p_[y];
    if (u < cumulative) return static_cast<int>(y);
  }
  // Rounding left u above the final cumulative sum.
  return last_positive;
}

double candidate_probability(const LabelDistribution& p, const CandidateSet& Y) {
  const int K = p.num_classes();
  if (Y.num_classes() != K) throw InvalidCandidateSet("candidate set and distribution disagree on K");
  double mass = 0.0;
  for (int y : Y) mass += p[y];
  return mass / binomial_real(K - 1, Y.size() - 1);
}

CandidateSet sample_candidate_set(const LabelDistribution& p, int candidate_count, Rng& rng) {
  const int K = p.num_classes();
  check_count(K, candidate_count);
  const int anchor = p.sample(rng);
  std::vector<int> others;
  others.reserve(static_cast<std::size_t>(K - 1));
  for (int y = 0; y < K; ++y)
    if (y != anchor) others.push_back(y);
  // Partial Fisher-Yates: the first N-1 slots become a uniform subset.
  const int extra = candidate_count - 1;
  for (int i = 0; i < extra; ++i) {
    const auto j = static_cast<std::size_t>(i) + rng.below(others.size() - static_cast<std::size_t>(i));
    std::swap(others[static_cast<std::size_t>(i)], others[j]);
  }
  std::vector<int> labels(others.begin(), others.begin() + extra);
  labels.push_back(anchor);
  return CandidateSet(K, std::move(labels));
}

double mixture_weight(int num_classes, int candidate_count) {
  check_count(num_classes, candidate_count);
  return static_cast<double>(num_classes - candidate_count) /
         (static_cast<double>(candidate_count) * (num_classes - 1));
}

PrivacyMixture posterior_mixture(const LabelDistribution& p, int candidate_count) {
  const int K = p.num_classes();
  const double beta = mixture_weight(K, candidate_count);
  std::vector<double> q(static_cast<std::size_t>(K));
  for (int a = 0; a < K; ++a) q[static_cast<std::size_t>(a)] = beta * p[a] + (1.0 - beta) / K;
  return {beta, LabelDistribution(std::move(q))};
}

std::vector<AnnotatedExample> annotate_dataset(std::span<const std::vector<double>> features,
                                               const Annotator& annotator, const AnnotateOptions& options,
                                               std::uint64_t seed) {
  std::vector<AnnotatedExample> out;
  out.reserve(features.size());
  int K = 0;
  std::optional<LabelDistribution> count_law;
  for (std::size_t i = 0; i < features.size(); ++i) {
    Rng rng(derive_seed(seed, i));
    const LabelDistribution p = annotator(features[i]);
    if (K == 0) {
      K = p.num_classes();
      if (options.count_weights.empty()) {
        check_count(K, options.candidate_count);
      } else {
        if (static_cast<int>(options.count_weights.size()) != K - 1)
          throw ValidationError("stochastic-N weights need K-1 entries");
        count_law = LabelDistribution::from_weights(options.count_weights);
      }
    } else if (p.num_classes() != K) {
      throw ValidationError("annotator returned " + std::to_string(p.num_classes()) + " classes, expected " +
                            std::to_string(K));
    }
    const int N = count_law ? count_law->sample(rng) + 1 : options.candidate_count;
    CandidateSet Y = sample_candidate_set(p, N, rng);
    std::optional<int> truth;
    if (options.draw_true_label) truth = p.sample(rng);
    out.push_back(AnnotatedExample{features[i], std::move(Y), truth});
  }
  return out;
}

std::vector<AnnotatedExample> annotate_dataset(std::span<const std::vector<double>> features,
                                               const Annotator& annotator, int candidate_count, std::uint64_t seed) {
  AnnotateOptions options;
  options.candidate_count = candidate_count;
  return annotate_dataset(features, annotator, options, seed);
}

}  // namespace cll
