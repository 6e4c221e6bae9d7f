#include "cll/model.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include <json.hpp>

#include "cll/combinatorics.hpp"
#include "cll/csv.hpp"
#include "cll/error.hpp"
#include "cll/rng.hpp"

namespace cll {

MlpScorer::MlpScorer(std::vector<int> layer_dims, const Init& init) : layer_dims_(std::move(layer_dims)) {
  if (layer_dims_.size() < 2) throw ValidationError("an MLP needs at least input and output dimensions");
  for (int d : layer_dims_)
    if (d < 1) throw ValidationError("layer dimensions must be positive");
  if (layer_dims_.back() < 2) throw ValidationError("the output layer needs K >= 2 classes");
  Rng rng(init.seed);
  for (std::size_t l = 0; l + 1 < layer_dims_.size(); ++l) {
    DenseLayer layer;
    layer.inputs = layer_dims_[l];
    layer.outputs = layer_dims_[l + 1];
    layer.weights.resize(static_cast<std::size_t>(layer.inputs) * static_cast<std::size_t>(layer.outputs));
    layer.biases.assign(static_cast<std::size_t>(layer.outputs), 0.0);
    const bool last = l + 2 == layer_dims_.size();
    if (!(last && init.zero_output_layer)) {
      const double limit = init.gain * std::sqrt(6.0 / (layer.inputs + layer.outputs));
      for (double& w : layer.weights) w = rng.uniform(-limit, limit);
    }
    layers_.push_back(std::move(layer));
  }
}

int MlpScorer::num_classes() const { return layer_dims_.empty() ? 0 : layer_dims_.back(); }
int MlpScorer::input_dim() const { return layer_dims_.empty() ? 0 : layer_dims_.front(); }

namespace {

// y = W x + b
void affine(const DenseLayer& layer, std::span<const double> x, std::vector<double>& out) {
  out.resize(static_cast<std::size_t>(layer.outputs));
  const auto in = static_cast<std::size_t>(layer.inputs);
  for (std::size_t o = 0; o < out.size(); ++o) {
    const double* row = layer.weights.data() + o * in;
    double s = layer.biases[o];
    for (std::size_t i = 0; i < in; ++i) s += row[i] * x[i];
    out[o] = s;
  }
}

}  // namespace

std::vector<double> MlpScorer::forward(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != input_dim())
    throw ValidationError("input has dimension " + std::to_string(x.size()) + ", model expects " +
                          std::to_string(input_dim()));
  std::vector<double> current(x.begin(), x.end());
  std::vector<double> next;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    affine(layers_[l], current, next);
    const bool last = l + 1 == layers_.size();
    for (double& v : next) v = last ? 0.5 * std::tanh(v) : std::tanh(v);
    current.swap(next);
  }
  return current;
}

std::size_t MlpScorer::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += layer.weights.size() + layer.biases.size();
  return n;
}

std::vector<double> MlpScorer::parameters() const {
  std::vector<double> theta;
  theta.reserve(parameter_count());
  for (const auto& layer : layers_) {
    theta.insert(theta.end(), layer.weights.begin(), layer.weights.end());
    theta.insert(theta.end(), layer.biases.begin(), layer.biases.end());
  }
  return theta;
}

void MlpScorer::set_parameters(std::span<const double> theta) {
  if (theta.size() != parameter_count()) throw ValidationError("parameter vector has the wrong length");
  std::size_t pos = 0;
  for (auto& layer : layers_) {
    std::copy_n(theta.begin() + static_cast<std::ptrdiff_t>(pos), layer.weights.size(), layer.weights.begin());
    pos += layer.weights.size();
    std::copy_n(theta.begin() + static_cast<std::ptrdiff_t>(pos), layer.biases.size(), layer.biases.begin());
    pos += layer.biases.size();
  }
}

bool MlpScorer::all_finite() const noexcept {
  for (const auto& layer : layers_) {
    for (double w : layer.weights)
      if (!std::isfinite(w)) return false;
    for (double b : layer.biases)
      if (!std::isfinite(b)) return false;
  }
  return true;
}

struct MlpBackprop {
  // Adds d(weight * rescaled candidate loss)/d theta for one example to
  // `grad` and returns the unweighted rescaled loss.
  static double accumulate(const MlpScorer& model, const AnnotatedExample& ex, const LossScheme& scheme,
                           double weight, std::span<double> grad,
                           std::vector<std::vector<double>>& activations, std::vector<double>& delta,
                           std::vector<double>& upstream) {
    const auto& layers = model.layers_;
    const std::size_t depth = layers.size();
    activations.resize(depth + 1);
    activations[0].assign(ex.x.begin(), ex.x.end());
    if (static_cast<int>(ex.x.size()) != model.input_dim())
      throw ValidationError("example has dimension " + std::to_string(ex.x.size()) + ", model expects " +
                            std::to_string(model.input_dim()));
    for (std::size_t l = 0; l < depth; ++l) {
      affine(layers[l], activations[l], activations[l + 1]);
      // Output layer keeps t = tanh(z); scores are t / 2.
      for (double& v : activations[l + 1]) v = std::tanh(v);
    }
    std::vector<double>& t = activations[depth];
    std::vector<double> scores(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) scores[k] = 0.5 * t[k];

    const double rescale = risk_rescale(scheme.num_classes, ex.Y.size());
    const double loss = rescale * candidate_loss(scheme, scores, ex.Y);
    delta.resize(t.size());
    candidate_loss_grad(scheme, scores, ex.Y, delta);
    for (std::size_t k = 0; k < t.size(); ++k) delta[k] *= weight * rescale * 0.5 * (1.0 - t[k] * t[k]);

    // Offsets of each layer's block in the flat gradient.
    std::vector<std::size_t> offset(depth);
    std::size_t pos = 0;
    for (std::size_t l = 0; l < depth; ++l) {
      offset[l] = pos;
      pos += layers[l].weights.size() + layers[l].biases.size();
    }

    for (std::size_t l = depth; l-- > 0;) {
      const DenseLayer& layer = layers[l];
      const auto in = static_cast<std::size_t>(layer.inputs);
      const auto out = static_cast<std::size_t>(layer.outputs);
      const std::vector<double>& a = activations[l];
      double* gw = grad.data() + offset[l];
      double* gb = gw + layer.weights.size();
      for (std::size_t o = 0; o < out; ++o) {
        const double d = delta[o];
        gb[o] += d;
        for (std::size_t i = 0; i < in; ++i) gw[o * in + i] += d * a[i];
      }
      if (l == 0) break;
      upstream.assign(in, 0.0);
      for (std::size_t o = 0; o < out; ++o) {
        const double* row = layer.weights.data() + o * in;
        for (std::size_t i = 0; i < in; ++i) upstream[i] += row[i] * delta[o];
      }
      delta.resize(in);
      for (std::size_t i = 0; i < in; ++i) delta[i] = upstream[i] * (1.0 - a[i] * a[i]);
    }
    return loss;
  }

  static LossAndGradient batch(const MlpScorer& model, std::span<const AnnotatedExample> data,
                               std::span<const std::size_t> indices, const LossScheme& scheme, double weight_decay) {
    if (!scheme.surrogate.differentiable()) throw UnsupportedGradient("cannot backpropagate through the 0-1 loss");
    if (model.num_classes() != scheme.num_classes) throw ValidationError("model and scheme disagree on K");
    LossAndGradient result;
    result.gradient.assign(model.parameter_count(), 0.0);
    std::vector<std::vector<double>> activations;
    std::vector<double> delta;
    std::vector<double> upstream;
    std::vector<double> losses;
    losses.reserve(indices.size());
    const double weight = indices.empty() ? 0.0 : 1.0 / static_cast<double>(indices.size());
    for (std::size_t idx : indices)
      losses.push_back(accumulate(model, data[idx], scheme, weight, result.gradient, activations, delta, upstream));
    result.loss = indices.empty() ? 0.0 : pairwise_sum(losses) / static_cast<double>(indices.size());
    if (weight_decay != 0.0) {
      const auto theta = model.parameters();
      double sq = 0.0;
      for (std::size_t i = 0; i < theta.size(); ++i) {
        sq += theta[i] * theta[i];
        result.gradient[i] += weight_decay * theta[i];
      }
      result.loss += 0.5 * weight_decay * sq;
    }
    return result;
  }
};

LossAndGradient backward(const MlpScorer& model, std::span<const AnnotatedExample> batch, const LossScheme& scheme,
                         double weight_decay) {
  std::vector<std::size_t> indices(batch.size());
  std::iota(indices.begin(), indices.end(), std::size_t{0});
  return MlpBackprop::batch(model, batch, indices, scheme, weight_decay);
}

std::string_view to_string(OptimizerKind k) { return k == OptimizerKind::sgd ? "sgd" : "adam"; }

OptimizerKind optimizer_from_string(std::string_view name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "adam") return OptimizerKind::adam;
  throw ValidationError("unknown optimizer '" + std::string(name) + "' (expected sgd or adam)");
}

void TrainConfig::validate() const {
  if (epochs <= 0) throw ValidationError("epochs must be positive");
  if (batch_size <= 0) throw ValidationError("batch size must be positive");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ValidationError("learning rate must be >= 0");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) throw ValidationError("weight decay must be >= 0");
  if (halve_lr_every < 0) throw ValidationError("halve_lr_every must be >= 0");
}

std::string TrainConfig::canonical() const {
  std::ostringstream s;
  s << "epochs=" << epochs << ";batch_size=" << batch_size << ";learning_rate=" << format_double(learning_rate)
    << ";weight_decay=" << format_double(weight_decay) << ";optimizer=" << to_string(optimizer) << ";seed=" << seed
    << ";strategy=" << to_string(strategy) << ";surrogate=" << to_string(surrogate)
    << ";momentum=" << format_double(momentum) << ";adam_beta1=" << format_double(adam_beta1)
    << ";adam_beta2=" << format_double(adam_beta2) << ";adam_epsilon=" << format_double(adam_epsilon)
    << ";halve_lr_every=" << halve_lr_every << ";count_mode=" << (count_mode == CountMode::fixed ? "fixed" : "stochastic");
  return s.str();
}

std::uint64_t TrainConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

LossScheme training_scheme(const TrainConfig& config, int num_classes) {
  const auto surrogate = SurrogateLoss::make(config.surrogate);
  if (!surrogate.differentiable()) throw UnsupportedGradient("cannot train with the 0-1 loss");
  if (!surrogate.shifted())
    throw ValidationError("training uses the rescaled candidate risk, which needs a shifted surrogate (a = 0)");
  return LossScheme(config.strategy, surrogate, num_classes);
}

TrainResult train(MlpScorer model, std::span<const AnnotatedExample> data, const TrainConfig& config) {
  config.validate();
  if (data.empty()) throw ValidationError("training set is empty");
  const LossScheme scheme = training_scheme(config, model.num_classes());
  for (const auto& ex : data)
    if (ex.Y.num_classes() != model.num_classes()) throw ValidationError("example K differs from the model's K");

  TrainResult result;
  result.loss_curve.reserve(static_cast<std::size_t>(config.epochs) + 1);
  result.loss_curve.push_back(empirical_risk(scheme, model, data, config.count_mode));

  const std::size_t P = model.parameter_count();
  std::vector<double> first(P, 0.0);   // sgd velocity / adam first moment
  std::vector<double> second(P, 0.0);  // adam second moment
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  long long step = 0;
  const auto batch = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(epoch) + 1));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    double lr = config.learning_rate;
    if (config.halve_lr_every > 0) lr *= std::pow(0.5, epoch / config.halve_lr_every);

    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t stop = std::min(order.size(), start + batch);
      const std::span<const std::size_t> idx(order.data() + start, stop - start);
      const auto lg = MlpBackprop::batch(model, data, idx, scheme, config.weight_decay);
      if (!std::isfinite(lg.loss)) throw TrainingDiverged("non-finite training loss", epoch);
      auto theta = model.parameters();
      ++step;
      if (config.optimizer == OptimizerKind::sgd) {
        for (std::size_t p = 0; p < P; ++p) {
          first[p] = config.momentum * first[p] + lg.gradient[p];
          theta[p] -= lr * first[p];
        }
      } else {
        const double c1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(step));
        for (std::size_t p = 0; p < P; ++p) {
          const double gp = lg.gradient[p];
          first[p] = config.adam_beta1 * first[p] + (1.0 - config.adam_beta1) * gp;
          second[p] = config.adam_beta2 * second[p] + (1.0 - config.adam_beta2) * gp * gp;
          theta[p] -= lr * (first[p] / c1) / (std::sqrt(second[p] / c2) + config.adam_epsilon);
        }
      }
      model.set_parameters(theta);
    }
    if (!model.all_finite()) throw TrainingDiverged("non-finite parameters", epoch);
    const double risk = empirical_risk(scheme, model, data, config.count_mode);
    if (!std::isfinite(risk)) throw TrainingDiverged("non-finite training risk", epoch);
    result.loss_curve.push_back(risk);
  }
  result.model = std::move(model);
  return result;
}

namespace {

constexpr const char* kCheckpointFormat = "cll-mlp";
constexpr int kCheckpointVersion = 1;

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string checkpoint_to_string(const MlpScorer& model, const TrainConfig& config) {
  nlohmann::json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["layer_dims"] = model.layer_dims();
  j["seed"] = config.seed;
  j["config_hash"] = hex64(config.hash());
  j["config"] = config.canonical();
  auto& layers = j["layers"] = nlohmann::json::array();
  for (const auto& layer : model.layers()) layers.push_back({{"weights", layer.weights}, {"biases", layer.biases}});
  return j.dump() + "\n";
}

void save_checkpoint(const std::filesystem::path& path, const MlpScorer& model, const TrainConfig& config) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write checkpoint " + path.string());
  out << checkpoint_to_string(model, config);
}

Checkpoint checkpoint_from_string(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format") != kCheckpointFormat) throw ValidationError("not a cll-mlp checkpoint");
    if (j.at("version") != kCheckpointVersion) throw ValidationError("unsupported checkpoint version");
    Checkpoint ck;
    ck.model = MlpScorer(j.at("layer_dims").get<std::vector<int>>(), MlpScorer::Init{});
    ck.seed = j.at("seed").get<std::uint64_t>();
    ck.config_hash = std::stoull(j.at("config_hash").get<std::string>(), nullptr, 16);
    const auto& layers = j.at("layers");
    if (layers.size() != ck.model.layers().size()) throw ValidationError("checkpoint layer count mismatch");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      auto& dst = ck.model.layers()[l];
      auto w = layers[l].at("weights").get<std::vector<double>>();
      auto b = layers[l].at("biases").get<std::vector<double>>();
      if (w.size() != dst.weights.size() || b.size() != dst.biases.size())
        throw ValidationError("checkpoint parameter shape mismatch");
      dst.weights = std::move(w);
      dst.biases = std::move(b);
    }
    return ck;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed checkpoint: ") + e.what());
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read checkpoint " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_string(buf.str());
}

}  // namespace cll
