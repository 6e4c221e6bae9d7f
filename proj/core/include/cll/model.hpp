#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cll/losses.hpp"
#include "cll/risk.hpp"
#include "cll/sampling.hpp"
#include "cll/scorer.hpp"

namespace cll {

struct DenseLayer {
  int inputs = 0;
  int outputs = 0;
  std::vector<double> weights;  // outputs x inputs, row-major
  std::vector<double> biases;   // outputs

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Fully connected network scoring K classes.
///
/// Hidden layers use tanh; the output layer maps pre-activations z to
/// g = tanh(z) / 2, so every score lies in [-1/2, 1/2]. Parameters are
/// flattened layer by layer as [weights (row-major), biases].
class MlpScorer final : public Scorer {
 public:
  struct Init {
    std::uint64_t seed = 0;
    /// Scale of the uniform Glorot range sqrt(6 / (fan_in + fan_out)).
    double gain = 1.0;
    bool zero_output_layer = false;
  };

  MlpScorer() = default;
  /// `layer_dims` = {input, hidden..., K}; at least two entries, K >= 2.
  MlpScorer(std::vector<int> layer_dims, const Init& init);
  MlpScorer(std::vector<int> layer_dims, std::uint64_t seed) : MlpScorer(std::move(layer_dims), Init{seed}) {}

  int num_classes() const override;
  int input_dim() const;
  std::vector<double> score(std::span<const double> x) const override { return forward(x); }

  /// Throws ValidationError when x has the wrong dimension.
  std::vector<double> forward(std::span<const double> x) const;

  const std::vector<int>& layer_dims() const noexcept { return layer_dims_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  std::vector<DenseLayer>& layers() noexcept { return layers_; }

  std::size_t parameter_count() const noexcept;
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> theta);
  bool all_finite() const noexcept;

  friend bool operator==(const MlpScorer& a, const MlpScorer& b) {
    return a.layer_dims_ == b.layer_dims_ && a.layers_ == b.layers_;
  }

 private:
  friend struct MlpBackprop;
  std::vector<int> layer_dims_;
  std::vector<DenseLayer> layers_;
};

struct LossAndGradient {
  double loss = 0.0;              // mean rescaled candidate loss + (wd/2)|theta|^2
  std::vector<double> gradient;   // same layout as MlpScorer::parameters()
};

/// Exact gradient of
///   (1/|B|) sum_{i in B} (K-1)/(K-N_i) * candidate_loss(g(x_i), Y_i) + (wd/2) |theta|^2.
/// An empty batch yields the weight-decay term alone. Throws
/// UnsupportedGradient for zero_one.
LossAndGradient backward(const MlpScorer& model, std::span<const AnnotatedExample> batch,
                         const LossScheme& scheme, double weight_decay);

enum class OptimizerKind { sgd, adam };

std::string_view to_string(OptimizerKind k);
OptimizerKind optimizer_from_string(std::string_view name);

struct TrainConfig {
  int epochs = 200;
  int batch_size = 64;
  double learning_rate = 5e-4;
  double weight_decay = 1e-4;
  OptimizerKind optimizer = OptimizerKind::adam;
  std::uint64_t seed = 0;
  Strategy strategy = Strategy::ova;
  SurrogateKind surrogate = SurrogateKind::sigmoid_shifted;
  double momentum = 0.9;         // sgd only
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int halve_lr_every = 0;        // 0 disables the step schedule
  CountMode count_mode = CountMode::fixed;

  /// Throws ValidationError for non-positive epochs/batch/lr or negative wd.
  void validate() const;
  /// 64-bit FNV-1a hash of the canonical text form; stored in checkpoints.
  std::uint64_t hash() const;
  std::string canonical() const;
};

struct TrainResult {
  MlpScorer model;
  /// loss_curve[0] is the training risk at initialization, loss_curve[e]
  /// the rescaled empirical risk after epoch e.
  std::vector<double> loss_curve;
};

/// Mini-batch training on the rescaled candidate risk. Shuffling uses
/// derive_seed(config.seed, epoch), so the result depends only on the
/// inputs. Throws TrainingDiverged on NaN/Inf.
TrainResult train(MlpScorer model, std::span<const AnnotatedExample> data, const TrainConfig& config);

LossScheme training_scheme(const TrainConfig& config, int num_classes);

/// Checkpoint: JSON text with layer dims, row-major parameters, seed and
/// config hash. Doubles round-trip exactly.
void save_checkpoint(const std::filesystem::path& path, const MlpScorer& model, const TrainConfig& config);
std::string checkpoint_to_string(const MlpScorer& model, const TrainConfig& config);

struct Checkpoint {
  MlpScorer model;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
};
Checkpoint load_checkpoint(const std::filesystem::path& path);
Checkpoint checkpoint_from_string(std::string_view text);

}  // namespace cll
