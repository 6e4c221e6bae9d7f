#include "cll/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "cll/combinatorics.hpp"
#include "cll/error.hpp"
#include "cll/rng.hpp"

namespace cll {
namespace {

void check_kn(int K, int N) {
  if (K < 2) throw ValidationError("bounds need K >= 2");
  if (N < 1 || N > K - 1) throw ValidationError("candidate count N=" + std::to_string(N) + " outside [1, K-1]");
}

constexpr int kMaxSearchClasses = 8;

}  // namespace

void BoundInputs::validate() const {
  check_kn(num_classes, candidate_count);
  if (sample_size <= 0) throw ValidationError("sample size n must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0, 1)");
  if (!(lipschitz > 0.0) || !std::isfinite(lipschitz)) throw ValidationError("Lipschitz constant must be positive");
  if (!(rademacher >= 0.0) || !std::isfinite(rademacher)) throw ValidationError("Rademacher complexity must be >= 0");
}

std::string_view to_string(BoundBranch b) { return b == BoundBranch::low_n ? "low_N" : "high_N"; }

BoundBranch bound_branch(int num_classes, int candidate_count) {
  check_kn(num_classes, candidate_count);
  // N <= K/2 without rounding K/2.
  return 2 * candidate_count <= num_classes ? BoundBranch::low_n : BoundBranch::high_n;
}

double sup_norm(Strategy strategy, int num_classes, int candidate_count) {
  const double K = num_classes;
  const double N = candidate_count;
  const auto branch = bound_branch(num_classes, candidate_count);
  if (strategy == Strategy::pc) return N * (K - N);
  return branch == BoundBranch::low_n ? K * N / (K - 1) : K * (K - N) / (K - 1);
}

double rademacher_bound(Strategy strategy, int num_classes, int candidate_count, double lipschitz, double rademacher) {
  const double K = num_classes;
  const double N = candidate_count;
  const auto branch = bound_branch(num_classes, candidate_count);
  const double lr = lipschitz * rademacher;
  if (strategy == Strategy::pc) return 2.0 * K * (K - 1) * lr;
  return branch == BoundBranch::low_n ? K * (K + N) / (K - 1) * lr : K * (2 * K - N) / (K - 1) * lr;
}

ErrorBoundTerms error_bound_terms(Strategy strategy, const BoundInputs& in) {
  in.validate();
  const double K = in.num_classes;
  const double N = in.candidate_count;
  const double lr = in.lipschitz * in.rademacher;
  const double spread = std::sqrt(2.0 * std::log(2.0 / in.delta) / static_cast<double>(in.sample_size));
  if (strategy == Strategy::pc)
    return {8.0 * K * (K - 1) * (K - 1) / (K - N) * lr, N * (K - 1) * spread};
  if (bound_branch(in.num_classes, in.candidate_count) == BoundBranch::low_n)
    return {4.0 * K * (K + N) / (K - N) * lr, K * N / (K - N) * spread};
  return {4.0 * K * (2 * K - N) / (K - N) * lr, K * spread};
}

double error_bound(Strategy strategy, const BoundInputs& inputs) {
  const auto t = error_bound_terms(strategy, inputs);
  return t.complexity + t.deviation;
}

BoundReport bound_report(const BoundInputs& in) {
  in.validate();
  const int K = in.num_classes;
  const int N = in.candidate_count;
  return {sup_norm(Strategy::ova, K, N),
          sup_norm(Strategy::pc, K, N),
          rademacher_bound(Strategy::ova, K, N, in.lipschitz, in.rademacher),
          rademacher_bound(Strategy::pc, K, N, in.lipschitz, in.rademacher),
          error_bound(Strategy::ova, in),
          error_bound(Strategy::pc, in),
          bound_branch(K, N)};
}

double empirical_sup_norm_search(Strategy strategy, int num_classes, int candidate_count,
                                 const SurrogateLoss& surrogate, const SupNormSearchOptions& options) {
  check_kn(num_classes, candidate_count);
  if (num_classes > kMaxSearchClasses)
    throw ValidationError("sup-norm search enumerates subset pairs only up to K=" + std::to_string(kMaxSearchClasses));
  if (!surrogate.shifted() || surrogate.lo != -0.5 || surrogate.hi != 0.5 || !surrogate.is_surrogate())
    throw ValidationError("sup-norm search needs a shifted surrogate with values in [-1/2, 1/2]");

  const LossScheme scheme(strategy, surrogate, num_classes);
  const auto subsets = all_subsets(num_classes, candidate_count);
  std::vector<CandidateSet> sets;
  sets.reserve(subsets.size());
  for (const auto& s : subsets) sets.emplace_back(num_classes, s);

  // For a fixed g the best pair is (argmax_Y, argmin_Y').
  double best = -std::numeric_limits<double>::infinity();
  auto consider = [&](const std::vector<double>& g) {
    double hi = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& Y : sets) {
      const double v = candidate_loss(scheme, g, Y);
      hi = std::max(hi, v);
      lo = std::min(lo, v);
    }
    best = std::max(best, hi - lo);
  };

  const auto K = static_cast<std::size_t>(num_classes);
  std::vector<double> g(K);
  const double M = options.saturation;
  std::size_t patterns = 1;
  for (std::size_t k = 0; k < K; ++k) patterns *= 3;
  for (std::size_t code = 0; code < patterns; ++code) {
    std::size_t c = code;
    for (std::size_t k = 0; k < K; ++k, c /= 3) g[k] = (static_cast<double>(c % 3) - 1.0) * M;
    consider(g);
  }

  Rng rng(options.seed);
  for (int t = 0; t < options.random_trials; ++t) {
    const double scale = M * std::pow(10.0, -3.0 * rng.uniform());
    for (auto& v : g) v = rng.uniform(-scale, scale);
    consider(g);
  }
  return best;
}

}  // namespace cll
