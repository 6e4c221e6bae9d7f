#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "cll/bounds.hpp"
#include "cll/cli.hpp"
#include "cll/csv.hpp"
#include "cll/data.hpp"
#include "cll/dataset_io.hpp"
#include "cll/error.hpp"
#include "cll/experiment.hpp"
#include "cll/idx.hpp"
#include "cll/model.hpp"
#include "cll/risk.hpp"
#include "cll/rng.hpp"
#include "cll/verify.hpp"

namespace cll::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kManifestFormat = "cll-manifest";

struct Run {
  const json& config;
  fs::path dir;
  std::ostream& out;
  std::vector<std::string> artifacts;

  std::uint64_t seed() const { return config.at("seed").get<std::uint64_t>(); }

  fs::path artifact(const std::string& name) {
    artifacts.push_back(name);
    return dir / name;
  }

  std::ofstream open(const std::string& name) {
    std::ofstream f(artifact(name), std::ios::binary | std::ios::trunc);
    if (!f) throw ValidationError("cannot write " + (dir / name).string());
    return f;
  }
};

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

TrainConfig train_config(const json& t, Strategy strategy, std::uint64_t seed) {
  TrainConfig c;
  c.epochs = t.at("epochs");
  c.batch_size = t.at("batch_size");
  c.learning_rate = t.at("learning_rate");
  c.weight_decay = t.at("weight_decay");
  c.optimizer = optimizer_from_string(t.at("optimizer").get<std::string>());
  c.momentum = t.at("momentum");
  c.halve_lr_every = t.at("halve_lr_every");
  c.surrogate = surrogate_kind_from_string(t.at("surrogate").get<std::string>());
  c.count_mode = t.at("count_mode") == "fixed" ? CountMode::fixed : CountMode::stochastic;
  c.strategy = strategy;
  c.seed = seed;
  return c;
}

/// Annotated view of any dataset file: labeled data become |Y| = 1 sets.
AnnotatedDataset load_training_data(const std::string& path) {
  if (sniff_dataset_kind(path) == "annotated") return load_annotated(path);
  return as_ordinary_labels(load_dataset(path));
}

std::string candidates_key(const CandidateSet& Y) {
  std::string s;
  for (int y : Y) {
    if (!s.empty()) s += ' ';
    s += std::to_string(y);
  }
  return s;
}

/// Value of `key=` in a checkpoint's canonical config string.
std::string canonical_field(const std::string& canonical, const std::string& key) {
  const std::string needle = key + "=";
  std::size_t pos = 0;
  while ((pos = canonical.find(needle, pos)) != std::string::npos) {
    if (pos == 0 || canonical[pos - 1] == ';') {
      const std::size_t start = pos + needle.size();
      return canonical.substr(start, canonical.find(';', start) - start);
    }
    pos += needle.size();
  }
  throw ValidationError("checkpoint config lacks '" + key + "'");
}

std::string checkpoint_canonical(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint " + path);
  try {
    return json::parse(in).at("config").get<std::string>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad checkpoint: ") + e.what());
  }
}

void cmd_gen(Run& r) {
  const json& c = r.config;
  LabeledDataset data;
  if (c.at("source") == "idx") {
    data = load_idx_dataset(c.at("images").get<std::string>(), c.at("labels").get<std::string>());
    data.seed = r.seed();
  } else {
    SyntheticSpec spec;
    spec.num_classes = c.at("num_classes");
    spec.dims = c.at("dims");
    spec.per_class = c.at("per_class");
    spec.class_stddev = c.at("class_stddev");
    spec.seed = r.seed();
    spec.class_means = circle_means(spec.num_classes, spec.dims, c.at("radius").get<double>());
    data = generate_synthetic(spec);
  }
  const auto classes = c.at("classes").get<std::vector<int>>();
  if (!classes.empty()) data = restrict_classes(data, classes);
  save_labeled(r.artifact("dataset.jsonl"), data);

  std::vector<long long> counts(static_cast<std::size_t>(data.num_classes), 0);
  for (int y : data.labels) ++counts[static_cast<std::size_t>(y)];
  auto f = r.open("class_counts.csv");
  CsvWriter w(f);
  w.header({"class", "count"});
  for (std::size_t y = 0; y < counts.size(); ++y) w.row({std::to_string(y), std::to_string(counts[y])});
  r.out << "gen: " << data.size() << " examples, K=" << data.num_classes << ", dims=" << data.dims << "\n";
}

void cmd_annotate(Run& r) {
  const json& c = r.config;
  const LabeledDataset data = load_dataset(c.at("data").get<std::string>());
  const double temperature = c.at("temperature");
  Annotator annotator;
  if (c.at("annotator") == "oracle") {
    if (!data.synthetic) throw ValidationError("oracle annotator needs a synthetic dataset");
    annotator = gaussian_posterior(*data.synthetic, temperature);
  } else {
    auto model = std::make_shared<MlpScorer>(load_checkpoint(c.at("checkpoint").get<std::string>()).model);
    if (model->num_classes() != data.num_classes || model->input_dim() != data.dims)
      throw ValidationError("checkpoint shape does not match the dataset");
    annotator = [model, temperature](std::span<const double> x) {
      const auto g = model->forward(x);
      const double top = *std::max_element(g.begin(), g.end());
      std::vector<double> w(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) w[i] = std::exp((g[i] - top) / temperature);
      return LabelDistribution::from_weights(w);
    };
  }
  AnnotateOptions opt;
  opt.candidate_count = c.at("candidate_count");
  if (c.contains("count_weights")) opt.count_weights = c.at("count_weights").get<std::vector<double>>();
  opt.draw_true_label = c.at("draw_true_label");

  AnnotatedDataset out;
  out.num_classes = data.num_classes;
  out.candidate_count = opt.candidate_count;
  out.seed = r.seed();
  out.generator = "annotate:" + c.at("annotator").get<std::string>();
  out.examples = annotate_dataset(data.features, annotator, opt, r.seed());
  save_annotated(r.artifact("annotated.jsonl"), out);

  std::map<std::pair<int, std::string>, long long> counts;
  for (const auto& e : out.examples) ++counts[{e.Y.size(), candidates_key(e.Y)}];
  auto f = r.open("subset_counts.csv");
  CsvWriter w(f);
  w.header({"N", "candidates", "count"});
  for (const auto& [key, n] : counts) w.row({std::to_string(key.first), key.second, std::to_string(n)});
  r.out << "annotate: " << out.examples.size() << " examples, K=" << out.num_classes
        << ", N=" << (out.candidate_count ? std::to_string(out.candidate_count) : "stochastic") << "\n";
}

void cmd_train(Run& r) {
  const json& c = r.config;
  const AnnotatedDataset data = load_training_data(c.at("data").get<std::string>());
  if (data.examples.empty()) throw ValidationError("empty training set");
  const TrainConfig tc = train_config(c.at("train"), strategy_from_string(c.at("strategy").get<std::string>()), r.seed());
  std::vector<int> dims{static_cast<int>(data.examples.front().x.size())};
  for (int h : c.at("train").at("hidden").get<std::vector<int>>()) dims.push_back(h);
  dims.push_back(data.num_classes);
  const MlpScorer init(dims, MlpScorer::Init{derive_seed(r.seed(), 1)});
  const TrainResult result = train(init, data.examples, tc);

  save_checkpoint(r.artifact("model.json"), result.model, tc);
  auto f = r.open("loss_curve.csv");
  CsvWriter w(f);
  w.header({"epoch", "risk"});
  for (std::size_t e = 0; e < result.loss_curve.size(); ++e)
    w.row({std::to_string(e), format_double(result.loss_curve[e])});
  r.out << "train: " << tc.epochs << " epochs, final risk " << format_double(result.loss_curve.back()) << "\n";
}

void cmd_eval(Run& r) {
  const json& c = r.config;
  const std::string model_path = c.at("model").get<std::string>();
  const AnnotatedDataset data = load_training_data(c.at("data").get<std::string>());
  const std::string canonical = checkpoint_canonical(model_path);
  TrainConfig tc;
  tc.strategy = strategy_from_string(c.at("strategy").is_null() ? canonical_field(canonical, "strategy")
                                                                 : c.at("strategy").get<std::string>());
  tc.surrogate = surrogate_kind_from_string(canonical_field(canonical, "surrogate"));
  const CountMode mode = c.at("count_mode") == "fixed" ? CountMode::fixed : CountMode::stochastic;
  const LossScheme scheme = training_scheme(tc, data.num_classes);
  const MlpScorer model = load_checkpoint(model_path).model;
  const RiskReport report = zero_one_evaluate(scheme, model, data.examples, mode);

  auto record = report.to_record();
  if (!c.at("reference").is_null()) {
    const MlpScorer ref = load_checkpoint(c.at("reference").get<std::string>()).model;
    const ErrorEstimate e = classification_error(scheme, model, ref, data.examples, mode);
    record.emplace_back("risk_reference", format_double(e.risk_fstar));
    record.emplace_back("err", format_double(e.err));
  }
  auto f = r.open("eval.csv");
  CsvWriter w(f);
  std::vector<std::string> names;
  std::vector<std::string> values;
  for (const auto& [k, v] : record) {
    names.push_back(k);
    values.push_back(v);
  }
  w.header(names);
  w.row(values);
  r.out << "eval: accuracy " << format_double(report.accuracy) << ", risk " << format_double(report.empirical_risk)
        << "\n";
}

void cmd_bounds(Run& r) {
  const json& c = r.config;
  const int K = c.at("num_classes");
  auto f = r.open("bounds.csv");
  CsvWriter w(f);
  w.header({"K", "N", "n", "delta", "strategy", "sup_norm", "rad_bound", "err_bound", "branch"});
  std::size_t rows = 0;
  for (const auto& s_name : c.at("strategies")) {
    const Strategy s = strategy_from_string(s_name.get<std::string>());
    for (long long n : c.at("sample_sizes").get<std::vector<long long>>())
      for (int N : c.at("candidate_counts").get<std::vector<int>>()) {
        BoundInputs in{K, N, n, c.at("delta"), c.at("lipschitz"), c.at("rademacher")};
        in.validate();
        w.row({std::to_string(K), std::to_string(N), std::to_string(n), format_double(in.delta),
               std::string(to_string(s)), format_double(sup_norm(s, K, N)),
               format_double(rademacher_bound(s, K, N, in.lipschitz, in.rademacher)),
               format_double(error_bound(s, in)), std::string(to_string(bound_branch(K, N)))});
        ++rows;
      }
  }
  r.out << "bounds: " << rows << " rows\n";
}

bool cmd_verify(Run& r) {
  const json& c = r.config;
  VerifyOptions opt;
  opt.seed = r.seed();
  opt.sampler_draws = c.at("sampler_draws");
  opt.fuzz_inputs = c.at("fuzz_inputs");
  if (opt.sampler_draws <= 0 || opt.fuzz_inputs < 0) throw ValidationError("draw counts must be positive");
  const auto results = run_property_suite(opt, [&](const PropertyResult& p) {
    r.out << (p.passed() ? "PASS " : "FAIL ") << p.name << " checks=" << p.checks << " failures=" << p.failures
          << " worst=" << format_double(p.worst);
    if (!p.first_failure.empty()) r.out << " first: " << p.first_failure;
    r.out << "\n";
  });
  auto f = r.open("verify.csv");
  CsvWriter w(f);
  w.header({"property", "checks", "failures", "worst", "status"});
  bool ok = true;
  for (const auto& p : results) {
    ok = ok && p.passed();
    w.row({p.name, std::to_string(p.checks), std::to_string(p.failures), format_double(p.worst),
           p.passed() ? "pass" : "fail"});
  }
  return ok;
}

void cmd_experiment(Run& r) {
  const json& c = r.config;
  ExperimentConfig e;
  e.num_classes = c.at("num_classes");
  e.dims = c.at("dims");
  e.candidate_counts = c.at("candidate_counts").get<std::vector<int>>();
  e.trials = c.at("trials");
  e.per_class_train = c.at("per_class_train");
  e.per_class_test = c.at("per_class_test");
  e.class_stddev = c.at("class_stddev");
  e.radius = c.at("radius");
  e.annotator_temperature = c.at("annotator_temperature");
  e.seed = r.seed();
  e.strategies.clear();
  for (const auto& s : c.at("strategies")) e.strategies.push_back(strategy_from_string(s.get<std::string>()));
  e.hidden = c.at("train").at("hidden").get<std::vector<int>>();
  e.train = train_config(c.at("train"), Strategy::ova, 0);
  e.delta = c.at("delta");
  e.lipschitz = c.at("lipschitz");
  e.rademacher = c.at("rademacher");
  const ExperimentResult result = run_experiment(e);
  {
    auto f = r.open("runs.csv");
    write_runs_csv(f, result.runs);
  }
  {
    auto f = r.open("summary.csv");
    write_summary_csv(f, result.summary);
  }
  r.out << "strategy  N  accuracy (mean +- std)   err (mean +- std)   bound\n";
  for (const auto& s : result.summary) {
    char line[160];
    std::snprintf(line, sizeof line, "%-8s %2d  %.4f +- %.4f        %+.4f +- %.4f   %.4g\n",
                  std::string(to_string(s.strategy)).c_str(), s.candidate_count, s.accuracy_mean, s.accuracy_std,
                  s.err_mean, s.err_std, s.err_bound);
    r.out << line;
  }
}

}  // namespace

int execute(const json& config, std::ostream& out, std::ostream& err) {
  const std::string started = utc_now();
  std::string command;
  fs::path dir;
  try {
    command = config.at("command").get<std::string>();
    dir = config.at("out").get<std::string>();
    fs::create_directories(dir);
  } catch (const std::exception& e) {
    err << "cll: " << e.what() << "\n";
    return kValidation;
  }

  Run run{config, dir, out, {}};
  int code = kSuccess;
  std::string error;
  try {
    if (command == "gen") cmd_gen(run);
    else if (command == "annotate") cmd_annotate(run);
    else if (command == "train") cmd_train(run);
    else if (command == "eval") cmd_eval(run);
    else if (command == "bounds") cmd_bounds(run);
    else if (command == "verify") code = cmd_verify(run) ? kSuccess : kVerificationFailed;
    else if (command == "experiment") cmd_experiment(run);
    else throw ValidationError("unknown command '" + command + "'");
  } catch (const TrainingDiverged& e) {
    code = kDiverged;
    error = e.what();
  } catch (const json::exception& e) {
    code = kValidation;
    error = std::string("malformed configuration: ") + e.what();
  } catch (const std::exception& e) {
    code = kValidation;
    error = e.what();
  }
  if (!error.empty()) err << "cll " << command << ": " << error << "\n";
  if (code == kVerificationFailed) err << "cll verify: property failures\n";

  json manifest{{"format", kManifestFormat},
                {"version", 1},
                {"command", command},
                {"seed", config.at("seed")},
                {"config", config},
                {"artifacts", run.artifacts},
                {"exit_code", code},
                {"started_at", started},
                {"finished_at", utc_now()}};
  if (!error.empty()) manifest["error"] = error;
  std::ofstream m(dir / "manifest.json", std::ios::binary | std::ios::trunc);
  if (!m) {
    err << "cll: cannot write manifest in " << dir.string() << "\n";
    return code == kSuccess ? kValidation : code;
  }
  m << manifest.dump(2) << "\n";
  return code;
}

}  // namespace cll::cli
