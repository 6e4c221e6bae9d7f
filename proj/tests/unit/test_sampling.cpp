#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <map>

#include "cll/error.hpp"
#include "cll/rng.hpp"
#include "cll/sampling.hpp"
#include "oracles.hpp"

namespace {

using namespace cll;

double chi_square_critical(int df, double alpha) {
  return boost::math::quantile(boost::math::complement(boost::math::chi_squared(df), alpha));
}

TEST(LabelDistribution, Validation) {
  EXPECT_THROW(LabelDistribution({0.5, 0.6}), ValidationError);
  EXPECT_THROW(LabelDistribution({1.2, -0.2}), ValidationError);
  EXPECT_THROW(LabelDistribution({1.0}), ValidationError);
  EXPECT_NO_THROW(LabelDistribution({0.25, 0.75}));
  const auto w = LabelDistribution::from_weights(std::vector<double>{1, 3});
  EXPECT_DOUBLE_EQ(w[1], 0.75);
  EXPECT_THROW(LabelDistribution::from_weights(std::vector<double>{0, 0}), ValidationError);
  EXPECT_THROW(LabelDistribution::one_hot(3, 3), IndexError);
  EXPECT_EQ(LabelDistribution::one_hot(3, 1)[1], 1.0);
  EXPECT_DOUBLE_EQ(LabelDistribution::uniform(4)[2], 0.25);
}

TEST(CandidateProbability, SumsToOneAndMatchesFormula) {
  Rng rng(1);
  for (int K = 2; K <= 7; ++K) {
    std::vector<double> w(static_cast<std::size_t>(K));
    for (auto& v : w) v = rng.uniform();
    const auto p = LabelDistribution::from_weights(w);
    const std::vector<double> pv(p.probs().begin(), p.probs().end());
    for (int N = 1; N < K; ++N) {
      double total = 0.0;
      for (const auto& sub : oracle::subsets(K, N)) {
        const double pr = candidate_probability(p, CandidateSet(K, sub));
        EXPECT_NEAR(pr, oracle::set_probability(pv, sub), 1e-15);
        total += pr;
      }
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
  }
}

TEST(SampleCandidateSet, ChiSquareAgainstExactLaw) {
  constexpr int K = 5, N = 2, draws = 100000;
  const double critical = chi_square_critical(9, 0.001);
  EXPECT_NEAR(critical, 27.877, 1e-3);
  const std::vector<std::vector<double>> ps{
      {0.2, 0.2, 0.2, 0.2, 0.2}, {0.6, 0.1, 0.1, 0.1, 0.1}, {0.05, 0.1, 0.15, 0.3, 0.4}};
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const LabelDistribution p(ps[i]);
    Rng rng(100 + i);
    std::map<std::vector<int>, int> counts;
    for (int d = 0; d < draws; ++d) {
      const auto Y = sample_candidate_set(p, N, rng);
      ASSERT_EQ(Y.size(), N);
      ++counts[std::vector<int>(Y.begin(), Y.end())];
    }
    double stat = 0.0;
    for (const auto& sub : oracle::subsets(K, N)) {
      const double e = draws * oracle::set_probability(ps[i], sub);
      stat += (counts[sub] - e) * (counts[sub] - e) / e;
    }
    EXPECT_LT(stat, critical) << "distribution " << i;
  }
}

TEST(SampleCandidateSet, SingletonFollowsP) {
  const LabelDistribution p({0.1, 0.2, 0.7});
  Rng rng(2);
  std::vector<int> hits(3, 0);
  const int n = 60000;
  for (int i = 0; i < n; ++i) ++hits[*sample_candidate_set(p, 1, rng).begin()];
  const double stat = [&] {
    double s = 0.0;
    for (int y = 0; y < 3; ++y) s += (hits[y] - n * p[y]) * (hits[y] - n * p[y]) / (n * p[y]);
    return s;
  }();
  EXPECT_LT(stat, chi_square_critical(2, 0.001));
}

TEST(SampleCandidateSet, DegenerateDistributionAlwaysIncluded) {
  Rng rng(3);
  const auto p = LabelDistribution::one_hot(6, 0);
  for (int N = 1; N < 6; ++N)
    for (int i = 0; i < 500; ++i) EXPECT_TRUE(sample_candidate_set(p, N, rng).contains(0));
}

TEST(SampleCandidateSet, InvalidCount) {
  Rng rng(4);
  const auto p = LabelDistribution::uniform(4);
  EXPECT_THROW(sample_candidate_set(p, 0, rng), ValidationError);
  EXPECT_THROW(sample_candidate_set(p, 4, rng), ValidationError);
}

TEST(PrivacyMixture, WeightValues) {
  EXPECT_DOUBLE_EQ(mixture_weight(10, 9), 1.0 / 81.0);
  EXPECT_DOUBLE_EQ(mixture_weight(7, 1), 1.0);
  EXPECT_DOUBLE_EQ(mixture_weight(5, 2), 3.0 / 8.0);
  EXPECT_THROW(mixture_weight(5, 5), ValidationError);
}

TEST(PrivacyMixture, SingletonIsIdentity) {
  const LabelDistribution p({0.1, 0.3, 0.6});
  const auto m = posterior_mixture(p, 1);
  EXPECT_EQ(m.beta, 1.0);
  for (int y = 0; y < 3; ++y) EXPECT_NEAR(m.q[y], p[y], 1e-16);
}

TEST(PrivacyMixture, EnumerationMatches) {
  Rng rng(5);
  for (int K = 2; K <= 6; ++K)
    for (int N = 1; N < K; ++N)
      for (int t = 0; t < 20; ++t) {
        std::vector<double> w(static_cast<std::size_t>(K));
        for (auto& v : w) v = rng.uniform();
        const auto p = LabelDistribution::from_weights(w);
        const std::vector<double> pv(p.probs().begin(), p.probs().end());
        std::vector<double> q(static_cast<std::size_t>(K), 0.0);
        for (const auto& sub : oracle::subsets(K, N))
          for (int a : sub) q[a] += oracle::set_probability(pv, sub) / N;
        const auto m = posterior_mixture(p, N);
        double total = 0.0;
        for (int a = 0; a < K; ++a) {
          EXPECT_NEAR(m.q[a], q[a], 1e-12);
          EXPECT_NEAR(m.q[a], m.beta * pv[a] + (1 - m.beta) / K, 1e-15);
          total += m.q[a];
        }
        EXPECT_NEAR(total, 1.0, 1e-12);
      }
}

Annotator fixed(std::vector<double> p) {
  return [p](std::span<const double>) { return LabelDistribution(p); };
}

TEST(AnnotateDataset, DeterministicPerSeed) {
  std::vector<std::vector<double>> xs(50, std::vector<double>{0.0});
  const auto ann = fixed({0.1, 0.2, 0.3, 0.4});
  const auto a = annotate_dataset(xs, ann, 2, 9);
  const auto b = annotate_dataset(xs, ann, 2, 9);
  const auto c = annotate_dataset(xs, ann, 2, 10);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  for (const auto& e : a) {
    EXPECT_EQ(e.Y.size(), 2);
    ASSERT_TRUE(e.true_label.has_value());
  }
}

TEST(AnnotateDataset, PrefixStable) {
  // Example i depends only on (seed, i): annotating a prefix gives a prefix.
  std::vector<std::vector<double>> xs(40, std::vector<double>{1.0});
  const auto ann = fixed({0.25, 0.25, 0.5});
  const auto full = annotate_dataset(xs, ann, 1, 77);
  const std::vector<std::vector<double>> head(xs.begin(), xs.begin() + 10);
  const auto part = annotate_dataset(head, ann, 1, 77);
  EXPECT_TRUE(std::equal(part.begin(), part.end(), full.begin()));
}

TEST(AnnotateDataset, StochasticCount) {
  std::vector<std::vector<double>> xs(20000, std::vector<double>{0.0});
  AnnotateOptions opt;
  opt.count_weights = {0.5, 0.0, 0.5};
  opt.draw_true_label = false;
  const auto a = annotate_dataset(xs, fixed({0.25, 0.25, 0.25, 0.25}), opt, 3);
  int ones = 0;
  for (const auto& e : a) {
    EXPECT_TRUE(e.Y.size() == 1 || e.Y.size() == 3);
    EXPECT_FALSE(e.true_label.has_value());
    ones += e.Y.size() == 1;
  }
  EXPECT_NEAR(ones / 20000.0, 0.5, 0.02);
}

TEST(AnnotateDataset, Errors) {
  std::vector<std::vector<double>> xs(3, std::vector<double>{0.0});
  EXPECT_THROW(annotate_dataset(xs, fixed({0.5, 0.5}), 2, 0), ValidationError);
  EXPECT_THROW(annotate_dataset(xs, fixed({0.5, 0.5}), 0, 0), ValidationError);
  const Annotator bad = [](std::span<const double>) { return LabelDistribution({0.7, 0.7}); };
  EXPECT_THROW(annotate_dataset(xs, bad, 1, 0), ValidationError);
  AnnotateOptions opt;
  opt.count_weights = {1.0};
  EXPECT_THROW(annotate_dataset(xs, fixed({0.2, 0.3, 0.5}), opt, 0), ValidationError);
}

}  // namespace
