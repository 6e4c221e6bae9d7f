#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cll/error.hpp"
#include "cll/experiment.hpp"

namespace {

using namespace cll;

ExperimentConfig tiny() {
  ExperimentConfig c;
  c.num_classes = 3;
  c.per_class_train = 20;
  c.per_class_test = 20;
  c.trials = 3;
  c.hidden = {4};
  c.train.epochs = 5;
  c.seed = 17;
  return c;
}

TEST(Experiment, ShapeAndOrdering) {
  const auto r = run_experiment(tiny());
  ASSERT_EQ(r.runs.size(), 2u * 2 * 3);
  ASSERT_EQ(r.summary.size(), 4u);
  EXPECT_EQ(r.runs[0].strategy, Strategy::ova);
  EXPECT_EQ(r.runs[3].candidate_count, 2);
  EXPECT_EQ(r.runs[5].trial, 2);
  EXPECT_EQ(r.runs[6].strategy, Strategy::pc);
  for (const auto& run : r.runs) {
    EXPECT_GE(run.accuracy, 0.0);
    EXPECT_LE(run.accuracy, 1.0);
    EXPECT_DOUBLE_EQ(run.err, run.risk_fhat - run.risk_fstar);
  }
}

TEST(Experiment, SummaryIsMeanAndSampleStd) {
  const auto r = run_experiment(tiny());
  for (std::size_t s = 0; s < r.summary.size(); ++s) {
    double m = 0.0;
    for (int t = 0; t < 3; ++t) m += r.runs[s * 3 + t].accuracy / 3;
    double v = 0.0;
    for (int t = 0; t < 3; ++t) v += std::pow(r.runs[s * 3 + t].accuracy - m, 2) / 2;
    EXPECT_NEAR(r.summary[s].accuracy_mean, m, 1e-15);
    EXPECT_NEAR(r.summary[s].accuracy_std, std::sqrt(v), 1e-15);
    const BoundInputs in{3, r.summary[s].candidate_count, 60, 0.1, 1.0, 0.5};
    EXPECT_DOUBLE_EQ(r.summary[s].err_bound, error_bound(r.summary[s].strategy, in));
  }
}

TEST(Experiment, CellsIndependentOfExecutionOrder) {
  const auto c = tiny();
  const auto r = run_experiment(c);
  const auto cell = run_experiment_cell(c, Strategy::pc, 2, 1);
  const auto& ref = r.runs[6 + 3 + 1];
  EXPECT_EQ(cell.accuracy, ref.accuracy);
  EXPECT_EQ(cell.err, ref.err);
  EXPECT_EQ(cell.trial_seed, ref.trial_seed);
}

TEST(Experiment, CsvIsDeterministic) {
  std::ostringstream a, b, s;
  write_runs_csv(a, run_experiment(tiny()).runs);
  write_runs_csv(b, run_experiment(tiny()).runs);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')),
            "strategy,N,trial,trial_seed,accuracy,err,risk_fhat,risk_fstar,train_risk");
  write_summary_csv(s, run_experiment(tiny()).summary);
  const std::string text = s.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
}

TEST(Experiment, Validation) {
  auto c = tiny();
  c.candidate_counts = {3};
  EXPECT_THROW(run_experiment(c), ValidationError);
  c = tiny();
  c.trials = 0;
  EXPECT_THROW(run_experiment(c), ValidationError);
  c = tiny();
  c.strategies.clear();
  EXPECT_THROW(run_experiment(c), ValidationError);
  c = tiny();
  c.train.learning_rate = -1;
  EXPECT_THROW(run_experiment(c), ValidationError);
}

}  // namespace
