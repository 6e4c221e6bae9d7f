#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cll/sampling.hpp"

namespace cll {

/// Isotropic Gaussian blobs, one per class.
struct SyntheticSpec {
  int num_classes = 5;
  int dims = 2;
  int per_class = 100;
  std::vector<std::vector<double>> class_means;  // K x dims
  double class_stddev = 1.0;
  std::uint64_t seed = 0;

  /// Throws ValidationError: K >= 2, dims >= 1, per_class > 0, stddev > 0,
  /// means shaped K x dims, finite and pairwise distinct.
  void validate() const;

  friend bool operator==(const SyntheticSpec&, const SyntheticSpec&) = default;
};

/// K means evenly spaced on a circle of `radius` in the first two
/// coordinates (remaining coordinates zero). dims >= 2 unless K == 2, in
/// which case dims == 1 gives the means -radius, +radius.
std::vector<std::vector<double>> circle_means(int num_classes, int dims, double radius);

struct LabeledDataset {
  int num_classes = 0;
  int dims = 0;
  std::vector<std::vector<double>> features;
  std::vector<int> labels;
  std::uint64_t seed = 0;
  std::string generator;
  /// Present for synthetic data; enables the Bayes-posterior annotator.
  std::optional<SyntheticSpec> synthetic;

  std::size_t size() const noexcept { return features.size(); }
  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;
};

/// per_class points per class, class-major order, x = mean + stddev * N(0, I).
LabeledDataset generate_synthetic(const SyntheticSpec& spec);

/// Bayes posterior P(y|x) of the equal-prior Gaussian mixture in `spec`,
/// sharpened (T < 1) or flattened (T > 1) by `temperature`.
Annotator gaussian_posterior(const SyntheticSpec& spec, double temperature = 1.0);

/// Keeps examples whose label is in `keep`, preserving order, and relabels
/// keep[i] -> rank of keep[i] in sorted(keep). The synthetic spec, if any,
/// is restricted to the kept classes.
LabeledDataset restrict_classes(const LabeledDataset& data, std::vector<int> keep);

}  // namespace cll
