#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace cll {

/// Binomial coefficient C(n, k); zero when k < 0 or k > n.
std::uint64_t binomial(int n, int k);

/// C(n, k) as a double, same conventions as binomial().
double binomial_real(int n, int k);

/// Calls `visit` with every k-subset of {0..n-1} in lexicographic order.
/// The span is only valid for the duration of the call.
void for_each_subset(int n, int k, const std::function<void(std::span<const int>)>& visit);

/// All k-subsets of {0..n-1}, lexicographic.
std::vector<std::vector<int>> all_subsets(int n, int k);

/// Sum with a fixed pairwise-reduction topology (depends only on the
/// length), so results are bit-stable regardless of how callers batch work.
double pairwise_sum(std::span<const double> values);

}  // namespace cll
