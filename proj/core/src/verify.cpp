#include "cll/verify.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <map>
#include <sstream>

#include "cll/bounds.hpp"
#include "cll/combinatorics.hpp"
#include "cll/error.hpp"
#include "cll/idx.hpp"
#include "cll/losses.hpp"
#include "cll/model.hpp"
#include "cll/risk.hpp"
#include "cll/rng.hpp"
#include "cll/sampling.hpp"

namespace cll {
namespace {

using Check = std::function<void(PropertyResult&, std::uint64_t)>;

void record(PropertyResult& r, double residual, double tol, const std::string& where) {
  ++r.checks;
  r.worst = std::max(r.worst, residual);
  if (!(residual <= tol)) {
    ++r.failures;
    if (r.first_failure.empty()) {
      std::ostringstream os;
      os << where << ": residual " << residual << " > " << tol;
      r.first_failure = os.str();
    }
  }
}

std::vector<double> random_scores(Rng& rng, int K, double scale) {
  std::vector<double> g(static_cast<std::size_t>(K));
  for (auto& v : g) v = rng.uniform(-scale, scale);
  return g;
}

LabelDistribution random_simplex(Rng& rng, int K) {
  std::vector<double> w(static_cast<std::size_t>(K));
  for (auto& v : w) v = -std::log(1.0 - rng.uniform());
  return LabelDistribution::from_weights(w);
}

std::string cell(Strategy s, int K, int N) {
  return std::string(to_string(s)) + " K=" + std::to_string(K) + " N=" + std::to_string(N);
}

constexpr SurrogateKind kSurrogates[] = {SurrogateKind::sigmoid_shifted, SurrogateKind::ramp_shifted,
                                         SurrogateKind::sigmoid, SurrogateKind::ramp};
constexpr Strategy kStrategies[] = {Strategy::ova, Strategy::pc};

void additivity(PropertyResult& r, std::uint64_t seed) {
  Rng rng(seed);
  for (auto s : kStrategies)
    for (auto kind : kSurrogates)
      for (int K = 3; K <= 6; ++K) {
        const LossScheme scheme(s, SurrogateLoss::make(kind), K);
        for (int t = 0; t < 100; ++t) {
          const auto g = random_scores(rng, K, 3.0);
          for (int N = 1; N < K; ++N)
            for_each_subset(K, N, [&](std::span<const int> sub) {
              const CandidateSet Y(K, {sub.begin(), sub.end()});
              double sum = 0.0;
              for (int y : Y) sum += ordinary_loss(scheme, g, y);
              const double closed = closed_form_candidate_loss(scheme, g, Y);
              const double offset = closed_form_offset(s, scheme.surrogate.a, K, N);
              record(r, std::abs(sum - closed - offset), 1e-12, cell(s, K, N));
            });
        }
      }
}

void duality(PropertyResult& r, std::uint64_t seed) {
  Rng rng(seed);
  for (auto s : kStrategies)
    for (auto kind : kSurrogates)
      for (int K = 3; K <= 6; ++K) {
        const double xi1 = rng.uniform(0.5, 2.0);
        const double xi2 = rng.uniform(-1.0, 1.0);
        const LossScheme scheme(s, SurrogateLoss::make(kind), K, xi1, xi2);
        for (int t = 0; t < 100; ++t) {
          const auto g = random_scores(rng, K, 3.0);
          for (int N = 1; N < K; ++N)
            for_each_subset(K, N, [&](std::span<const int> sub) {
              const CandidateSet Y(K, {sub.begin(), sub.end()});
              const double primal = candidate_loss(scheme, g, Y);
              const double dual = dual_candidate_loss(scheme, g, Y.complement());
              record(r, std::abs(primal - dual), 1e-12, cell(s, K, N));
            });
        }
      }
}

void unbiased_risk(PropertyResult& r, std::uint64_t seed) {
  Rng rng(seed);
  for (auto s : kStrategies)
    for (auto kind : {SurrogateKind::sigmoid_shifted, SurrogateKind::sigmoid})
      for (int K = 3; K <= 6; ++K) {
        const LossScheme scheme(s, SurrogateLoss::make(kind), K);
        for (int N = 1; N < K; ++N)
          for (int t = 0; t < 50; ++t) {
            const auto p = random_simplex(rng, K);
            const auto g = random_scores(rng, K, 3.0);
            const auto o = true_risk_oracle(scheme, g, p, N);
            record(r, std::abs(o.lhs - o.rhs), 1e-12, cell(s, K, N));
          }
      }
}

void privacy_mixture(PropertyResult& r, std::uint64_t seed) {
  Rng rng(seed);
  for (int K = 2; K <= 6; ++K)
    for (int N = 1; N < K; ++N) {
      const double beta = mixture_weight(K, N);
      record(r, std::abs(beta - static_cast<double>(K - N) / (N * (K - 1.0))), 1e-15, "beta K=" + std::to_string(K));
      for (int t = 0; t < 20; ++t) {
        const auto p = random_simplex(rng, K);
        const auto mix = posterior_mixture(p, N);
        std::vector<double> q(static_cast<std::size_t>(K), 0.0);
        for_each_subset(K, N, [&](std::span<const int> sub) {
          const CandidateSet Y(K, {sub.begin(), sub.end()});
          const double pY = candidate_probability(p, Y);
          for (int a : Y) q[static_cast<std::size_t>(a)] += pY / N;
        });
        for (int a = 0; a < K; ++a)
          record(r, std::abs(q[static_cast<std::size_t>(a)] - mix.q[a]), 1e-12,
                 "K=" + std::to_string(K) + " N=" + std::to_string(N));
      }
    }
}

void sampler_law(PropertyResult& r, std::uint64_t seed, int draws) {
  constexpr int K = 5;
  constexpr int N = 2;
  const std::vector<std::vector<double>> ps{
      {0.2, 0.2, 0.2, 0.2, 0.2}, {0.5, 0.25, 0.125, 0.0625, 0.0625}, {0.05, 0.1, 0.15, 0.3, 0.4}};
  const auto subsets = all_subsets(K, N);
  const double df = static_cast<double>(subsets.size() - 1);
  const double critical = boost::math::quantile(boost::math::complement(boost::math::chi_squared(df), 0.001));
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const LabelDistribution p(ps[i]);
    Rng rng(derive_seed(seed, i));
    std::map<std::vector<int>, long long> counts;
    for (int d = 0; d < draws; ++d) {
      const auto Y = sample_candidate_set(p, N, rng);
      ++counts[std::vector<int>(Y.begin(), Y.end())];
    }
    double stat = 0.0;
    for (const auto& sub : subsets) {
      const double expected = draws * candidate_probability(p, CandidateSet(K, sub));
      const double diff = static_cast<double>(counts[sub]) - expected;
      stat += diff * diff / expected;
    }
    record(r, stat, critical, "p#" + std::to_string(i));
  }
}

void sup_norm_search(PropertyResult& r, std::uint64_t seed) {
  SupNormSearchOptions opt;
  opt.random_trials = 500;
  opt.seed = seed;
  for (auto s : kStrategies)
    for (auto kind : {SurrogateKind::sigmoid_shifted, SurrogateKind::ramp_shifted})
      for (int K = 2; K <= 6; ++K)
        for (int N = 1; N < K; ++N) {
          const double analytic = sup_norm(s, K, N);
          const double found = empirical_sup_norm_search(s, K, N, SurrogateLoss::make(kind), opt);
          record(r, std::max(found - analytic - 1e-9, 0.0), 0.0, "exceeds " + cell(s, K, N));
          record(r, std::max(analytic - 1e-3 - found, 0.0), 0.0, "not attained " + cell(s, K, N));
        }
}

void bound_shape(PropertyResult& r, std::uint64_t) {
  for (auto s : kStrategies)
    for (int K : {5, 10}) {
      BoundInputs in;
      in.num_classes = K;
      for (int N = 1; N + 1 < K; ++N) {
        in.candidate_count = N;
        const double lo = error_bound(s, in);
        in.candidate_count = N + 1;
        const double hi = error_bound(s, in);
        record(r, hi > lo ? 0.0 : lo - hi + 1.0, 0.0, "monotone " + cell(s, K, N));
      }
    }
  for (int K = 2; K <= 12; ++K)
    for (int N = 1; N < K; ++N)
      record(r, std::abs(sup_norm(Strategy::ova, K, N) - sup_norm(Strategy::ova, K, K - N)), 1e-12,
             "symmetry " + cell(Strategy::ova, K, N));
  for (int K = 4; K <= 12; K += 2) {
    // Both OVA branch formulas evaluated at N = K/2.
    const int N = K / 2;
    const double R = 0.5, L = 1.0;
    const double lo_c = 4.0 * K * (K + N) / (K - N) * L * R;
    const double hi_c = 4.0 * K * (2.0 * K - N) / (K - N) * L * R;
    const double lo_d = static_cast<double>(K) * N / (K - N);
    const double hi_d = K;
    record(r, std::abs(lo_c - hi_c) + std::abs(lo_d - hi_d), 1e-9, "continuity K=" + std::to_string(K));
  }
}

void gradient_check(PropertyResult& r, std::uint64_t seed) {
  constexpr double h = 1e-5;
  for (auto s : kStrategies) {
    TrainConfig cfg;
    cfg.strategy = s;
    const LossScheme scheme = training_scheme(cfg, 3);
    for (int b = 0; b < 20; ++b) {
      const std::uint64_t bs = derive_seed(seed, static_cast<std::uint64_t>(b) + (s == Strategy::pc ? 1000 : 0));
      MlpScorer model({2, 8, 3}, MlpScorer::Init{bs, 2.0});
      Rng rng(derive_seed(bs, 1));
      std::vector<AnnotatedExample> batch;
      const int N = 1 + static_cast<int>(rng.below(2));
      for (int i = 0; i < 6; ++i) {
        std::vector<double> x{rng.normal(), rng.normal()};
        batch.push_back({x, sample_candidate_set(LabelDistribution::uniform(3), N, rng), std::nullopt});
      }
      const auto analytic = backward(model, batch, scheme, 1e-3);
      auto theta = model.parameters();
      double diff2 = 0.0;
      double norm2 = 0.0;
      for (std::size_t j = 0; j < theta.size(); ++j) {
        const double saved = theta[j];
        theta[j] = saved + h;
        model.set_parameters(theta);
        const double up = backward(model, batch, scheme, 1e-3).loss;
        theta[j] = saved - h;
        model.set_parameters(theta);
        const double down = backward(model, batch, scheme, 1e-3).loss;
        theta[j] = saved;
        const double fd = (up - down) / (2.0 * h);
        diff2 += (fd - analytic.gradient[j]) * (fd - analytic.gradient[j]);
        norm2 += fd * fd + analytic.gradient[j] * analytic.gradient[j];
      }
      model.set_parameters(theta);
      const double rel = std::sqrt(diff2) / std::max(std::sqrt(norm2), 1e-300);
      record(r, rel, 1e-5, std::string(to_string(s)) + " batch " + std::to_string(b));
    }
  }
}

void idx_fuzz(PropertyResult& r, std::uint64_t seed, int inputs) {
  Rng rng(seed);
  for (int i = 0; i < inputs; ++i) {
    std::vector<std::uint8_t> bytes;
    if (i % 3 == 2) {
      // Well-formed header, payload length exact or off by a little.
      const bool f32 = rng.below(2);
      const int rank = 1 + static_cast<int>(rng.below(3));
      bytes = {0, 0, static_cast<std::uint8_t>(f32 ? 0x0D : 0x08), static_cast<std::uint8_t>(rank)};
      std::size_t count = 1;
      for (int d = 0; d < rank; ++d) {
        const auto n = static_cast<std::uint8_t>(rng.below(4));
        bytes.insert(bytes.end(), {0, 0, 0, n});
        count *= n;
      }
      long long size = static_cast<long long>(count * (f32 ? 4 : 1));
      if (rng.below(2)) size += static_cast<long long>(rng.below(5)) - 2;
      for (long long k = 0; k < size; ++k) bytes.push_back(static_cast<std::uint8_t>(rng.below(256)));
    } else {
      bytes.resize(rng.below(64));
      for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.below(256));
      if (i % 3 == 1 && bytes.size() >= 4) {
        bytes[0] = 0;
        bytes[1] = 0;
        bytes[2] = rng.below(2) ? 0x08 : 0x0D;
        bytes[3] = static_cast<std::uint8_t>(rng.below(4));
      }
    }
    double bad = 0.0;
    try {
      const auto t = parse_idx(bytes);
      if (encode_idx(t) != bytes) bad = 1.0;
    } catch (const ParseError& e) {
      if (e.offset() > bytes.size()) bad = 1.0;
    } catch (...) {
      bad = 1.0;
    }
    record(r, bad, 0.0, "input " + std::to_string(i));
  }
}

struct Entry {
  const char* name;
  std::function<void(PropertyResult&, std::uint64_t, const VerifyOptions&)> run;
};

const std::vector<Entry>& entries() {
  static const std::vector<Entry> list{
      {"additivity", [](auto& r, auto s, auto&) { additivity(r, s); }},
      {"duality", [](auto& r, auto s, auto&) { duality(r, s); }},
      {"unbiased_risk", [](auto& r, auto s, auto&) { unbiased_risk(r, s); }},
      {"privacy_mixture", [](auto& r, auto s, auto&) { privacy_mixture(r, s); }},
      {"sampler_law", [](auto& r, auto s, auto& o) { sampler_law(r, s, o.sampler_draws); }},
      {"sup_norm_search", [](auto& r, auto s, auto&) { sup_norm_search(r, s); }},
      {"bound_shape", [](auto& r, auto s, auto&) { bound_shape(r, s); }},
      {"gradient_check", [](auto& r, auto s, auto&) { gradient_check(r, s); }},
      {"idx_fuzz", [](auto& r, auto s, auto& o) { idx_fuzz(r, s, o.fuzz_inputs); }},
  };
  return list;
}

}  // namespace

std::vector<std::string> property_names() {
  std::vector<std::string> names;
  for (const auto& e : entries()) names.emplace_back(e.name);
  return names;
}

std::vector<PropertyResult> run_property_suite(const VerifyOptions& options,
                                               const std::function<void(const PropertyResult&)>& progress) {
  std::vector<PropertyResult> results;
  std::uint64_t stream = 0;
  for (const auto& e : entries()) {
    PropertyResult r;
    r.name = e.name;
    try {
      e.run(r, derive_seed(options.seed, stream++), options);
    } catch (const std::exception& ex) {
      ++r.failures;
      if (r.first_failure.empty()) r.first_failure = std::string("exception: ") + ex.what();
    }
    if (progress) progress(r);
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace cll
