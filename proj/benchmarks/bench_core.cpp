#include <benchmark/benchmark.h>

#include "cll/bounds.hpp"
#include "cll/idx.hpp"
#include "cll/losses.hpp"
#include "cll/model.hpp"
#include "cll/risk.hpp"
#include "cll/rng.hpp"
#include "cll/sampling.hpp"

namespace {

using namespace cll;

std::vector<double> scores(int K) {
  Rng rng(1);
  std::vector<double> g(static_cast<std::size_t>(K));
  for (auto& v : g) v = rng.uniform(-0.5, 0.5);
  return g;
}

std::vector<int> first_labels(int n) {
  std::vector<int> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i;
  return v;
}

void BM_CandidateLoss(benchmark::State& state) {
  const auto strategy = static_cast<Strategy>(state.range(0));
  const int K = static_cast<int>(state.range(1));
  const LossScheme scheme(strategy, SurrogateLoss::sigmoid_shifted(), K);
  const auto g = scores(K);
  const CandidateSet Y(K, first_labels(K / 2));
  for (auto _ : state) benchmark::DoNotOptimize(candidate_loss(scheme, g, Y));
}
BENCHMARK(BM_CandidateLoss)->ArgsProduct({{0, 1}, {5, 10, 100}});

void BM_ClosedFormCandidateLoss(benchmark::State& state) {
  const auto strategy = static_cast<Strategy>(state.range(0));
  const int K = static_cast<int>(state.range(1));
  const LossScheme scheme(strategy, SurrogateLoss::sigmoid_shifted(), K);
  const auto g = scores(K);
  const CandidateSet Y(K, first_labels(K / 2));
  for (auto _ : state) benchmark::DoNotOptimize(closed_form_candidate_loss(scheme, g, Y));
}
BENCHMARK(BM_ClosedFormCandidateLoss)->ArgsProduct({{0, 1}, {5, 10, 100}});

void BM_CandidateLossGrad(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  const LossScheme scheme(Strategy::pc, SurrogateLoss::sigmoid_shifted(), K);
  const auto g = scores(K);
  const CandidateSet Y(K, first_labels(K / 2));
  std::vector<double> grad(static_cast<std::size_t>(K));
  for (auto _ : state) {
    candidate_loss_grad(scheme, g, Y, grad);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_CandidateLossGrad)->Arg(5)->Arg(10)->Arg(100);

void BM_SampleCandidateSet(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  const int N = static_cast<int>(state.range(1));
  const auto p = LabelDistribution::uniform(K);
  Rng rng(2);
  for (auto _ : state) benchmark::DoNotOptimize(sample_candidate_set(p, N, rng));
}
BENCHMARK(BM_SampleCandidateSet)->Args({5, 2})->Args({10, 9})->Args({100, 50});

void BM_Backward(benchmark::State& state) {
  const auto strategy = static_cast<Strategy>(state.range(0));
  const int batch_size = static_cast<int>(state.range(1));
  const MlpScorer model({2, 16, 5}, {3});
  const LossScheme scheme(strategy, SurrogateLoss::sigmoid_shifted(), 5);
  Rng rng(4);
  std::vector<AnnotatedExample> batch;
  for (int i = 0; i < batch_size; ++i)
    batch.push_back({{rng.normal(), rng.normal()}, sample_candidate_set(LabelDistribution::uniform(5), 2, rng), 0});
  for (auto _ : state) benchmark::DoNotOptimize(backward(model, batch, scheme, 1e-4));
  state.SetItemsProcessed(state.iterations() * batch_size);
}
BENCHMARK(BM_Backward)->ArgsProduct({{0, 1}, {1, 64}});

void BM_Forward(benchmark::State& state) {
  const MlpScorer model({2, 16, 5}, {3});
  const std::vector<double> x{0.3, -0.2};
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(x));
}
BENCHMARK(BM_Forward);

void BM_SupNormSearch(benchmark::State& state) {
  const int K = static_cast<int>(state.range(0));
  SupNormSearchOptions opt;
  opt.random_trials = 200;
  for (auto _ : state)
    benchmark::DoNotOptimize(
        empirical_sup_norm_search(Strategy::ova, K, K / 2, SurrogateLoss::sigmoid_shifted(), opt));
}
BENCHMARK(BM_SupNormSearch)->Arg(4)->Arg(6);

void BM_ParseIdx(benchmark::State& state) {
  IdxTensor t;
  t.dims = {1000, 28, 28};
  t.payload.assign(1000u * 28 * 28, 7);
  const auto bytes = encode_idx(t);
  for (auto _ : state) benchmark::DoNotOptimize(parse_idx(bytes));
  state.SetBytesProcessed(state.iterations() * static_cast<long long>(bytes.size()));
}
BENCHMARK(BM_ParseIdx);

}  // namespace

BENCHMARK_MAIN();
