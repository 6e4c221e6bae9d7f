#include "cll/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "cll/dataset_io.hpp"
#include "cll/error.hpp"
#include "cll/losses.hpp"
#include "cll/model.hpp"

namespace cll::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct HelpRequested {
  std::string text;
};

int to_int(const std::string& s) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    throw ValidationError("not an integer: '" + s + "'");
  }
  if (used != s.size()) throw ValidationError("not an integer: '" + s + "'");
  return v;
}

int parse_count(const std::string& s, int K) {
  if (!s.empty() && (s[0] == 'K' || s[0] == 'k')) {
    if (s.size() == 1) return K;
    if (s[1] != '-' || s.size() < 3) throw ValidationError("bad count '" + s + "'");
    return K - to_int(s.substr(2));
  }
  return to_int(s);
}

struct Common {
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "csv";
};

void add_common(CLI::App* sc, Common& c) {
  sc->add_option("--seed", c.seed, "random seed (64-bit)");
  sc->add_option("--out", c.out, "output directory (default: $CLL_OUT_DIR or .)");
  sc->add_option("--format", c.format, "tabular output format")->check(CLI::IsMember({"csv"}));
}

std::string resolve_out(const std::string& given) {
  std::string dir = given;
  if (dir.empty()) {
    const char* env = std::getenv("CLL_OUT_DIR");
    dir = env && *env ? env : ".";
  }
  return fs::absolute(dir).lexically_normal().string();
}

std::string absolute_input(const std::string& p) {
  if (!fs::exists(p)) throw ValidationError("no such file: " + p);
  return fs::absolute(p).lexically_normal().string();
}

json base(const char* command, const Common& c) {
  return json{{"command", command}, {"seed", c.seed}, {"out", resolve_out(c.out)}, {"format", c.format}};
}

struct TrainFlags {
  std::vector<int> hidden{16};
  int epochs = 200;
  int batch_size = 64;
  double lr = 5e-3;
  double wd = 1e-4;
  std::string optimizer = "adam";
  double momentum = 0.9;
  int halve_lr_every = 0;
  std::string strategy = "ova";
  std::string surrogate = "sigmoid_shifted";
  std::string count_mode = "fixed";
};

void add_train_flags(CLI::App* sc, TrainFlags& t, bool with_strategy) {
  sc->add_option("--hidden", t.hidden, "hidden layer widths")->delimiter(',');
  sc->add_option("--epochs", t.epochs, "passes over the training set");
  sc->add_option("--batch-size", t.batch_size, "minibatch size");
  sc->add_option("--lr", t.lr, "learning rate");
  sc->add_option("--wd", t.wd, "weight decay");
  sc->add_option("--optimizer", t.optimizer, "optimizer")->check(CLI::IsMember({"adam", "sgd"}));
  sc->add_option("--momentum", t.momentum, "sgd momentum");
  sc->add_option("--halve-lr-every", t.halve_lr_every, "halve the learning rate every E epochs (0: never)");
  sc->add_option("--surrogate", t.surrogate, "binary surrogate loss")->check(CLI::IsMember({"sigmoid_shifted", "ramp_shifted"}));
  sc->add_option("--count-mode", t.count_mode, "fixed N or per-example candidate counts")->check(CLI::IsMember({"fixed", "stochastic"}));
  if (with_strategy) sc->add_option("--strategy", t.strategy, "multi-class loss strategy")->check(CLI::IsMember({"ova", "pc"}));
}

json train_json(const TrainFlags& t) {
  return json{{"hidden", t.hidden},         {"epochs", t.epochs},       {"batch_size", t.batch_size},
              {"learning_rate", t.lr},      {"weight_decay", t.wd},     {"optimizer", t.optimizer},
              {"momentum", t.momentum},     {"halve_lr_every", t.halve_lr_every},
              {"surrogate", t.surrogate},   {"count_mode", t.count_mode}};
}

std::vector<std::string> strategies_for(const std::string& s) {
  if (s == "both") return {"ova", "pc"};
  return {s};
}

json resolve_replay(const std::string& manifest_path, const std::string& out, std::optional<std::uint64_t> seed) {
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw ValidationError("cannot open manifest " + manifest_path);
  json m;
  try {
    m = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!m.is_object() || m.value("format", "") != "cll-manifest" || !m.contains("config"))
    throw ValidationError("not a run manifest: " + manifest_path);
  json config = m.at("config");
  if (config.value("command", "") == "replay") throw ValidationError("manifest records a replay");
  if (!out.empty()) config["out"] = resolve_out(out);
  if (seed) config["seed"] = *seed;
  return config;
}

}  // namespace

std::vector<int> parse_count_list(const std::string& text, int K) {
  std::vector<int> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const std::string item = text.substr(start, comma - start);
    if (item.empty()) throw ValidationError("empty item in list '" + text + "'");
    const std::size_t range = item.find("..");
    if (range != std::string::npos) {
      const int lo = parse_count(item.substr(0, range), K);
      const int hi = parse_count(item.substr(range + 2), K);
      if (hi < lo) throw ValidationError("empty range '" + item + "'");
      for (int v = lo; v <= hi; ++v) values.push_back(v);
    } else {
      values.push_back(parse_count(item, K));
    }
    start = comma + 1;
  }
  return values;
}

json resolve(const std::vector<std::string>& args) {
  CLI::App app{"Learning from candidate and complementary labels", "cll"};
  app.require_subcommand(1);
  Common common;

  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset or ingest IDX files");
  add_common(gen, common);
  int gen_k = 0;
  int gen_dims = 2;
  int gen_per_class = 0;
  double gen_stddev = 0.3;
  double gen_radius = 1.0;
  std::vector<std::string> gen_idx;
  std::vector<int> gen_classes;
  auto* k_opt = gen->add_option("--k", gen_k, "number of classes");
  gen->add_option("--dims", gen_dims, "feature dimension");
  auto* pc_opt = gen->add_option("--per-class", gen_per_class, "examples per class");
  gen->add_option("--stddev", gen_stddev, "per-axis class standard deviation");
  gen->add_option("--radius", gen_radius, "radius of the circle holding the class means");
  auto* idx_opt = gen->add_option("--from-idx", gen_idx, "IDX images and labels files")->expected(2);
  gen->add_option("--classes", gen_classes, "keep only these classes (relabelled densely)")->delimiter(',');
  k_opt->excludes(idx_opt);
  pc_opt->excludes(idx_opt);

  auto* ann = app.add_subcommand("annotate", "draw candidate sets for a labeled dataset");
  add_common(ann, common);
  std::string ann_data;
  std::string ann_n;
  std::string ann_annotator = "oracle";
  std::string ann_checkpoint;
  double ann_temperature = 1.0;
  std::vector<double> ann_weights;
  bool ann_no_true = false;
  ann->add_option("data", ann_data, "dataset or synthetic spec file")->required();
  auto* n_opt = ann->add_option("--n", ann_n, "candidate-set size: integer or K-j");
  ann->add_option("--annotator", ann_annotator, "label distribution used to draw candidates")->check(CLI::IsMember({"oracle", "checkpoint"}));
  ann->add_option("--checkpoint", ann_checkpoint, "model used by --annotator checkpoint");
  ann->add_option("--temperature", ann_temperature, "annotator softmax temperature");
  auto* w_opt = ann->add_option("--count-weights", ann_weights, "P(N = 1..K-1) for stochastic N")->delimiter(',');
  ann->add_flag("--no-true-label", ann_no_true, "do not record a true label");
  n_opt->excludes(w_opt);

  auto* tr = app.add_subcommand("train", "train an MLP scorer on candidate labels");
  add_common(tr, common);
  std::string tr_data;
  TrainFlags tf;
  tr->add_option("data", tr_data, "annotated or labeled dataset")->required();
  add_train_flags(tr, tf, true);

  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on an annotated dataset");
  add_common(ev, common);
  std::string ev_data;
  std::string ev_model;
  std::string ev_reference;
  std::string ev_strategy;
  std::string ev_count_mode = "fixed";
  ev->add_option("data", ev_data, "annotated or labeled dataset with true labels")->required();
  ev->add_option("--model", ev_model, "checkpoint to evaluate")->required();
  ev->add_option("--reference", ev_reference, "test-risk minimizer checkpoint for the error estimate");
  ev->add_option("--strategy", ev_strategy, "default: the checkpoint's strategy")
      ->check(CLI::IsMember({"ova", "pc"}));
  ev->add_option("--count-mode", ev_count_mode, "fixed N or per-example candidate counts")->check(CLI::IsMember({"fixed", "stochastic"}));

  auto* bd = app.add_subcommand("bounds", "sweep the analytic error bounds");
  add_common(bd, common);
  int bd_k = 10;
  std::string bd_n;
  std::string bd_strategy = "both";
  std::vector<long long> bd_sizes{10000};
  double bd_delta = 0.1;
  double bd_lipschitz = 1.0;
  double bd_rademacher = 0.5;
  bd->add_option("--k", bd_k, "number of classes");
  bd->add_option("--n", bd_n, "candidate counts, e.g. 1..9 (default: 1..K-1)");
  bd->add_option("--strategy", bd_strategy, "loss strategy")->check(CLI::IsMember({"ova", "pc", "both"}));
  bd->add_option("--sample-size", bd_sizes, "training-set sizes")->delimiter(',');
  bd->add_option("--delta", bd_delta, "confidence parameter of the bound");
  bd->add_option("--lipschitz", bd_lipschitz, "Lipschitz constant of the surrogate");
  bd->add_option("--rademacher", bd_rademacher, "Rademacher complexity of the scorer class");

  auto* vf = app.add_subcommand("verify", "run the property suite");
  add_common(vf, common);
  int vf_draws = 100000;
  int vf_fuzz = 10000;
  vf->add_option("--draws", vf_draws, "sampler draws per distribution");
  vf->add_option("--fuzz", vf_fuzz, "random IDX inputs");

  auto* ex = app.add_subcommand("experiment", "error-vs-N sweep over seeds");
  add_common(ex, common);
  int ex_k = 5;
  int ex_dims = 2;
  std::string ex_n;
  int ex_seeds = 5;
  int ex_train = 100;
  int ex_test = 100;
  double ex_stddev = 0.3;
  double ex_radius = 1.0;
  double ex_temperature = 1.0;
  std::string ex_strategy = "both";
  double ex_delta = 0.1;
  double ex_lipschitz = 1.0;
  double ex_rademacher = 0.5;
  TrainFlags xf;
  ex->add_option("--k", ex_k, "number of classes");
  ex->add_option("--dims", ex_dims, "feature dimension");
  ex->add_option("--n-values", ex_n, "candidate counts (default: 1..K-1)");
  ex->add_option("--seeds", ex_seeds, "trials per cell");
  ex->add_option("--per-class-train", ex_train, "training examples per class");
  ex->add_option("--per-class-test", ex_test, "test examples per class");
  ex->add_option("--stddev", ex_stddev, "per-axis class standard deviation");
  ex->add_option("--radius", ex_radius, "radius of the circle holding the class means");
  ex->add_option("--temperature", ex_temperature, "annotator temperature");
  ex->add_option("--strategy", ex_strategy, "loss strategy")->check(CLI::IsMember({"ova", "pc", "both"}));
  ex->add_option("--delta", ex_delta, "confidence parameter of the bound");
  ex->add_option("--lipschitz", ex_lipschitz, "Lipschitz constant of the surrogate");
  ex->add_option("--rademacher", ex_rademacher, "Rademacher complexity of the scorer class");
  add_train_flags(ex, xf, false);

  auto* rp = app.add_subcommand("replay", "re-run the configuration recorded in a manifest");
  std::string rp_manifest;
  std::string rp_out;
  std::uint64_t rp_seed = 0;
  std::string rp_format = "csv";
  rp->add_option("manifest", rp_manifest, "manifest.json of an earlier run")->required();
  rp->add_option("--out", rp_out, "output directory (default: the recorded one)");
  auto* rp_seed_opt = rp->add_option("--seed", rp_seed, "override the recorded seed");
  rp->add_option("--format", rp_format, "tabular output format")->check(CLI::IsMember({"csv"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto parsed = app.get_subcommands();
    throw HelpRequested{parsed.empty() ? app.help() : parsed.front()->help()};
  }

  if (*gen) {
    json c = base("gen", common);
    if (!gen_idx.empty()) {
      c["source"] = "idx";
      c["images"] = absolute_input(gen_idx[0]);
      c["labels"] = absolute_input(gen_idx[1]);
    } else {
      if (k_opt->count() == 0 || pc_opt->count() == 0)
        throw ValidationError("gen needs --k and --per-class, or --from-idx");
      c["source"] = "synthetic";
      c["num_classes"] = gen_k;
      c["dims"] = gen_dims;
      c["per_class"] = gen_per_class;
      c["class_stddev"] = gen_stddev;
      c["radius"] = gen_radius;
    }
    c["classes"] = gen_classes;
    return c;
  }
  if (*ann) {
    json c = base("annotate", common);
    c["data"] = absolute_input(ann_data);
    const int K = load_dataset(c["data"].get<std::string>()).num_classes;
    if (!ann_weights.empty()) {
      if (static_cast<int>(ann_weights.size()) != K - 1)
        throw ValidationError("--count-weights needs K-1 = " + std::to_string(K - 1) + " values");
      c["count_weights"] = ann_weights;
      c["candidate_count"] = 0;
    } else {
      if (ann_n.empty()) throw CLI::RequiredError("--n");
      const int N = parse_count(ann_n, K);
      if (N < 1 || N > K - 1)
        throw ValidationError("--n must resolve to 1..K-1 = 1.." + std::to_string(K - 1) + ", got " +
                              std::to_string(N));
      c["candidate_count"] = N;
    }
    c["annotator"] = ann_annotator;
    if (ann_annotator == "checkpoint") {
      if (ann_checkpoint.empty()) throw CLI::RequiredError("--checkpoint");
      c["checkpoint"] = absolute_input(ann_checkpoint);
    }
    if (!(ann_temperature > 0.0)) throw ValidationError("--temperature must be positive");
    c["temperature"] = ann_temperature;
    c["draw_true_label"] = !ann_no_true;
    return c;
  }
  if (*tr) {
    json c = base("train", common);
    c["data"] = absolute_input(tr_data);
    c["strategy"] = tf.strategy;
    c["train"] = train_json(tf);
    return c;
  }
  if (*ev) {
    json c = base("eval", common);
    c["data"] = absolute_input(ev_data);
    c["model"] = absolute_input(ev_model);
    c["reference"] = ev_reference.empty() ? json(nullptr) : json(absolute_input(ev_reference));
    c["strategy"] = ev_strategy.empty() ? json(nullptr) : json(ev_strategy);
    c["count_mode"] = ev_count_mode;
    return c;
  }
  if (*bd) {
    json c = base("bounds", common);
    c["num_classes"] = bd_k;
    c["candidate_counts"] = parse_count_list(bd_n.empty() ? "1..K-1" : bd_n, bd_k);
    c["strategies"] = strategies_for(bd_strategy);
    c["sample_sizes"] = bd_sizes;
    c["delta"] = bd_delta;
    c["lipschitz"] = bd_lipschitz;
    c["rademacher"] = bd_rademacher;
    return c;
  }
  if (*vf) {
    json c = base("verify", common);
    c["sampler_draws"] = vf_draws;
    c["fuzz_inputs"] = vf_fuzz;
    return c;
  }
  if (*ex) {
    json c = base("experiment", common);
    c["num_classes"] = ex_k;
    c["dims"] = ex_dims;
    c["candidate_counts"] = parse_count_list(ex_n.empty() ? "1..K-1" : ex_n, ex_k);
    c["trials"] = ex_seeds;
    c["per_class_train"] = ex_train;
    c["per_class_test"] = ex_test;
    c["class_stddev"] = ex_stddev;
    c["radius"] = ex_radius;
    c["annotator_temperature"] = ex_temperature;
    c["strategies"] = strategies_for(ex_strategy);
    c["delta"] = ex_delta;
    c["lipschitz"] = ex_lipschitz;
    c["rademacher"] = ex_rademacher;
    c["train"] = train_json(xf);
    return c;
  }
  return resolve_replay(rp_manifest, rp_out,
                        rp_seed_opt->count() ? std::optional<std::uint64_t>(rp_seed) : std::nullopt);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  json config;
  try {
    config = resolve(args);
  } catch (const HelpRequested& h) {
    out << h.text;
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "cll: " << e.what() << "\n";
    return kValidation;
  } catch (const Error& e) {
    err << "cll: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    err << "cll: " << e.what() << "\n";
    return kValidation;
  }
  return execute(config, out, err);
}

}  // namespace cll::cli
