#include "cll/experiment.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "cll/csv.hpp"
#include "cll/data.hpp"
#include "cll/error.hpp"
#include "cll/risk.hpp"
#include "cll/rng.hpp"

namespace cll {
namespace {

// Sub-stream ids within a trial.
constexpr std::uint64_t kTrainFeatures = 1;
constexpr std::uint64_t kTestFeatures = 2;
constexpr std::uint64_t kModelInit = 3;
constexpr std::uint64_t kTrainLabels = 100;
constexpr std::uint64_t kTestLabels = 200;
constexpr std::uint64_t kShuffleHat = 300;
constexpr std::uint64_t kShuffleStar = 400;

std::uint64_t trial_seed(const ExperimentConfig& c, int trial) {
  return derive_seed(c.seed, static_cast<std::uint64_t>(trial));
}

SyntheticSpec split_spec(const ExperimentConfig& c, int per_class, std::uint64_t seed) {
  SyntheticSpec s;
  s.num_classes = c.num_classes;
  s.dims = c.dims;
  s.per_class = per_class;
  s.class_means = circle_means(c.num_classes, c.dims, c.radius);
  s.class_stddev = c.class_stddev;
  s.seed = seed;
  return s;
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

}  // namespace

ExperimentConfig::ExperimentConfig() {
  train.epochs = 200;
  train.batch_size = 64;
  train.learning_rate = 5e-3;
  train.weight_decay = 1e-4;
  train.optimizer = OptimizerKind::adam;
}

void ExperimentConfig::validate() const {
  if (num_classes < 2) throw ValidationError("experiment needs K >= 2");
  if (per_class_train <= 0 || per_class_test <= 0) throw ValidationError("per-class sizes must be positive");
  if (trials <= 0) throw ValidationError("trials must be positive");
  if (strategies.empty()) throw ValidationError("no strategies selected");
  if (!(annotator_temperature > 0.0)) throw ValidationError("annotator temperature must be positive");
  for (int h : hidden)
    if (h < 1) throw ValidationError("hidden widths must be positive");
  for (int n : resolved_counts())
    if (n < 1 || n > num_classes - 1) throw ValidationError("candidate count " + std::to_string(n) + " outside [1, K-1]");
  train.validate();
  BoundInputs{num_classes, 1, 1, delta, lipschitz, rademacher}.validate();
}

std::vector<int> ExperimentConfig::resolved_counts() const {
  if (!candidate_counts.empty()) return candidate_counts;
  std::vector<int> all;
  for (int n = 1; n < num_classes; ++n) all.push_back(n);
  return all;
}

ExperimentRun run_experiment_cell(const ExperimentConfig& c, Strategy strategy, int N, int trial) {
  const std::uint64_t ts = trial_seed(c, trial);
  const auto train_spec = split_spec(c, c.per_class_train, derive_seed(ts, kTrainFeatures));
  const auto test_spec = split_spec(c, c.per_class_test, derive_seed(ts, kTestFeatures));
  const auto train_data = generate_synthetic(train_spec);
  const auto test_data = generate_synthetic(test_spec);
  const Annotator annotator = gaussian_posterior(train_spec, c.annotator_temperature);

  const auto train_set = annotate_dataset(train_data.features, annotator, N, derive_seed(ts, kTrainLabels + N));
  const auto test_set = annotate_dataset(test_data.features, annotator, N, derive_seed(ts, kTestLabels + N));

  std::vector<int> dims{c.dims};
  dims.insert(dims.end(), c.hidden.begin(), c.hidden.end());
  dims.push_back(c.num_classes);
  const MlpScorer init(dims, MlpScorer::Init{derive_seed(ts, kModelInit)});

  TrainConfig tc = c.train;
  tc.strategy = strategy;
  tc.seed = derive_seed(ts, kShuffleHat + N);
  const auto fhat = train(init, train_set, tc);
  tc.seed = derive_seed(ts, kShuffleStar + N);
  const auto fstar = train(init, test_set, tc);

  const LossScheme scheme = training_scheme(tc, c.num_classes);
  const RiskReport report = zero_one_evaluate(scheme, fhat.model, test_set);
  const ErrorEstimate e = classification_error(scheme, fhat.model, fstar.model, test_set);
  return {strategy, N, trial, ts, report.accuracy, e.err, e.risk_fhat, e.risk_fstar, fhat.loss_curve.back()};
}

ExperimentResult run_experiment(const ExperimentConfig& c) {
  c.validate();
  ExperimentResult result;
  const auto counts = c.resolved_counts();
  const long long n_train = static_cast<long long>(c.per_class_train) * c.num_classes;
  for (Strategy s : c.strategies) {
    for (int N : counts) {
      std::vector<double> acc;
      std::vector<double> err;
      for (int t = 0; t < c.trials; ++t) {
        result.runs.push_back(run_experiment_cell(c, s, N, t));
        acc.push_back(result.runs.back().accuracy);
        err.push_back(result.runs.back().err);
      }
      const auto [am, as] = mean_std(acc);
      const auto [em, es] = mean_std(err);
      const BoundInputs bi{c.num_classes, N, n_train, c.delta, c.lipschitz, c.rademacher};
      result.summary.push_back({s, N, c.trials, am, as, em, es, error_bound(s, bi)});
    }
  }
  return result;
}

void write_runs_csv(std::ostream& out, const std::vector<ExperimentRun>& runs) {
  CsvWriter w(out);
  w.header({"strategy", "N", "trial", "trial_seed", "accuracy", "err", "risk_fhat", "risk_fstar", "train_risk"});
  for (const auto& r : runs)
    w.row({std::string(to_string(r.strategy)), std::to_string(r.candidate_count), std::to_string(r.trial),
           std::to_string(r.trial_seed), format_double(r.accuracy), format_double(r.err), format_double(r.risk_fhat),
           format_double(r.risk_fstar), format_double(r.train_risk)});
}

void write_summary_csv(std::ostream& out, const std::vector<ExperimentSummary>& summary) {
  CsvWriter w(out);
  w.header({"strategy", "N", "trials", "accuracy_mean", "accuracy_std", "err_mean", "err_std", "err_bound"});
  for (const auto& s : summary)
    w.row({std::string(to_string(s.strategy)), std::to_string(s.candidate_count), std::to_string(s.trials),
           format_double(s.accuracy_mean), format_double(s.accuracy_std), format_double(s.err_mean),
           format_double(s.err_std), format_double(s.err_bound)});
}

}  // namespace cll
