#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "cll/bounds.hpp"
#include "cll/losses.hpp"
#include "cll/model.hpp"

namespace cll {

/// Desk-scale version of the error-vs-N protocol: Gaussian blobs stand in
/// for the image datasets and the mixture's Bayes posterior stands in for
/// the pretrained annotator.
struct ExperimentConfig {
  int num_classes = 5;
  int dims = 2;
  int per_class_train = 100;
  int per_class_test = 100;
  double radius = 1.0;
  double class_stddev = 0.3;
  double annotator_temperature = 1.0;
  std::vector<int> candidate_counts;  // empty: 1..K-1
  int trials = 5;
  std::uint64_t seed = 0;
  std::vector<Strategy> strategies{Strategy::ova, Strategy::pc};
  std::vector<int> hidden{16};
  TrainConfig train{};  // strategy and seed are set per cell
  double delta = 0.1;
  double lipschitz = 1.0;
  double rademacher = 0.5;

  ExperimentConfig();
  void validate() const;
  std::vector<int> resolved_counts() const;
};

struct ExperimentRun {
  Strategy strategy;
  int candidate_count;
  int trial;
  std::uint64_t trial_seed;
  double accuracy;
  double err;
  double risk_fhat;
  double risk_fstar;
  double train_risk;  // final training risk of fhat
};

struct ExperimentSummary {
  Strategy strategy;
  int candidate_count;
  int trials;
  double accuracy_mean;
  double accuracy_std;  // sample standard deviation
  double err_mean;
  double err_std;
  double err_bound;     // analytic bound at n = training-set size
};

struct ExperimentResult {
  std::vector<ExperimentRun> runs;          // ordered by (strategy, N, trial)
  std::vector<ExperimentSummary> summary;   // ordered by (strategy, N)
};

/// Runs every (strategy, N, trial) cell. Each cell's data, annotations,
/// initialization and shuffling derive from (seed, trial, N) only, so the
/// result is independent of execution order.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// One (strategy, N, trial) cell.
ExperimentRun run_experiment_cell(const ExperimentConfig& config, Strategy strategy, int candidate_count, int trial);

void write_runs_csv(std::ostream& out, const std::vector<ExperimentRun>& runs);
void write_summary_csv(std::ostream& out, const std::vector<ExperimentSummary>& summary);

}  // namespace cll
