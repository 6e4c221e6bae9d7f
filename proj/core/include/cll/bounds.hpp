#pragma once

#include <cstdint>
#include <string_view>

#include "cll/losses.hpp"

namespace cll {

/// Inputs to the analytic generalization bounds. Defaults follow the
/// reference experiments: delta = 0.1, Lipschitz 1.0, Rademacher 0.5.
struct BoundInputs {
  int num_classes = 10;
  int candidate_count = 1;
  long long sample_size = 10000;
  double delta = 0.1;
  double lipschitz = 1.0;
  double rademacher = 0.5;

  /// Throws ValidationError unless K >= 2, 1 <= N <= K-1, n > 0,
  /// 0 < delta < 1, L > 0, R >= 0.
  void validate() const;
};

enum class BoundBranch { low_n, high_n };

std::string_view to_string(BoundBranch b);

/// low_n iff N <= K/2.
BoundBranch bound_branch(int num_classes, int candidate_count);

/// Supremum of the change in candidate loss between two candidate sets.
///   OVA: K*N/(K-1) if N <= K/2, else K(K-N)/(K-1)
///   PC:  N(K-N)
double sup_norm(Strategy strategy, int num_classes, int candidate_count);

/// Rademacher complexity of the candidate-loss class relative to R_n(G).
///   OVA: K(K+N)/(K-1) L R if N <= K/2, else K(2K-N)/(K-1) L R
///   PC:  2K(K-1) L R
double rademacher_bound(Strategy strategy, int num_classes, int candidate_count, double lipschitz,
                        double rademacher);

/// Excess-risk bound holding with probability >= 1 - delta.
///   OVA, N <= K/2: 4K(K+N)/(K-N) L R + KN/(K-N) sqrt(2 ln(2/delta) / n)
///   OVA, N >  K/2: 4K(2K-N)/(K-N) L R + K sqrt(2 ln(2/delta) / n)
///   PC:            8K(K-1)^2/(K-N) L R + N(K-1) sqrt(2 ln(2/delta) / n)
/// The OVA deviation constant is K*Ntilde/(K-N) with Ntilde = min(N, K-N);
/// on the high branch that collapses to K.
double error_bound(Strategy strategy, const BoundInputs& inputs);

/// Complexity and deviation parts of error_bound separately.
struct ErrorBoundTerms {
  double complexity;
  double deviation;
};
ErrorBoundTerms error_bound_terms(Strategy strategy, const BoundInputs& inputs);

struct BoundReport {
  double ova_sup;
  double pc_sup;
  double ova_rad;
  double pc_rad;
  double ova_err_bound;
  double pc_err_bound;
  BoundBranch branch;
};

BoundReport bound_report(const BoundInputs& inputs);

struct SupNormSearchOptions {
  int random_trials = 2000;
  /// Magnitude used for saturated score vectors.
  double saturation = 40.0;
  std::uint64_t seed = 0;
};

/// Empirical sup over score vectors g and pairs of N-subsets (Y, Y') of
/// candidate_loss(g, Y) - candidate_loss(g, Y') with xi1 = 1, xi2 = 0.
/// Searches random scores plus every ternary saturated pattern in
/// {-M, 0, +M}^K. Requires K <= 8 and a shifted surrogate with values in
/// [-1/2, 1/2]; throws ValidationError otherwise.
double empirical_sup_norm_search(Strategy strategy, int num_classes, int candidate_count,
                                 const SurrogateLoss& surrogate, const SupNormSearchOptions& options = {});

}  // namespace cll
