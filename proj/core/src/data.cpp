#include "cll/data.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cll/error.hpp"
#include "cll/rng.hpp"

namespace cll {

void SyntheticSpec::validate() const {
  if (num_classes < 2) throw ValidationError("synthetic data needs K >= 2");
  if (dims < 1) throw ValidationError("synthetic data needs dims >= 1");
  if (per_class <= 0) throw ValidationError("per_class must be positive");
  if (!(class_stddev > 0.0) || !std::isfinite(class_stddev)) throw ValidationError("class_stddev must be positive");
  if (static_cast<int>(class_means.size()) != num_classes) throw ValidationError("class_means must have K rows");
  for (const auto& m : class_means) {
    if (static_cast<int>(m.size()) != dims) throw ValidationError("every class mean must have `dims` entries");
    for (double v : m)
      if (!std::isfinite(v)) throw ValidationError("class means must be finite");
  }
  for (std::size_t a = 0; a < class_means.size(); ++a)
    for (std::size_t b = a + 1; b < class_means.size(); ++b)
      if (class_means[a] == class_means[b])
        throw ValidationError("class means " + std::to_string(a) + " and " + std::to_string(b) + " coincide");
}

std::vector<std::vector<double>> circle_means(int num_classes, int dims, double radius) {
  if (num_classes < 2) throw ValidationError("circle_means needs K >= 2");
  if (dims < 1 || (dims < 2 && num_classes > 2)) throw ValidationError("circle_means needs dims >= 2 for K > 2");
  std::vector<std::vector<double>> means(static_cast<std::size_t>(num_classes),
                                         std::vector<double>(static_cast<std::size_t>(dims), 0.0));
  if (dims == 1) {
    means[0][0] = -radius;
    means[1][0] = radius;
    return means;
  }
  for (int c = 0; c < num_classes; ++c) {
    const double angle = 2.0 * std::numbers::pi * c / num_classes;
    means[static_cast<std::size_t>(c)][0] = radius * std::cos(angle);
    means[static_cast<std::size_t>(c)][1] = radius * std::sin(angle);
  }
  return means;
}

LabeledDataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  LabeledDataset out;
  out.num_classes = spec.num_classes;
  out.dims = spec.dims;
  out.seed = spec.seed;
  out.generator = "gaussian-blobs";
  out.synthetic = spec;
  Rng rng(spec.seed);
  const auto total = static_cast<std::size_t>(spec.num_classes) * static_cast<std::size_t>(spec.per_class);
  out.features.reserve(total);
  out.labels.reserve(total);
  for (int c = 0; c < spec.num_classes; ++c) {
    const auto& mean = spec.class_means[static_cast<std::size_t>(c)];
    for (int i = 0; i < spec.per_class; ++i) {
      std::vector<double> x(mean);
      for (double& v : x) v += spec.class_stddev * rng.normal();
      out.features.push_back(std::move(x));
      out.labels.push_back(c);
    }
  }
  return out;
}

Annotator gaussian_posterior(const SyntheticSpec& spec, double temperature) {
  spec.validate();
  if (!(temperature > 0.0) || !std::isfinite(temperature)) throw ValidationError("temperature must be positive");
  const double scale = 1.0 / (2.0 * spec.class_stddev * spec.class_stddev * temperature);
  return [means = spec.class_means, scale](std::span<const double> x) {
    if (x.size() != means.front().size()) throw ValidationError("annotator input has the wrong dimension");
    std::vector<double> logits(means.size());
    for (std::size_t c = 0; c < means.size(); ++c) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < x.size(); ++j) d2 += (x[j] - means[c][j]) * (x[j] - means[c][j]);
      logits[c] = -d2 * scale;
    }
    const double top = *std::max_element(logits.begin(), logits.end());
    for (double& v : logits) v = std::exp(v - top);
    return LabelDistribution::from_weights(logits);
  };
}

LabeledDataset restrict_classes(const LabeledDataset& data, std::vector<int> keep) {
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  if (keep.size() < 2) throw ValidationError("restricting to fewer than two classes");
  for (int c : keep)
    if (c < 0 || c >= data.num_classes) throw ValidationError("kept class " + std::to_string(c) + " does not exist");
  std::vector<int> remap(static_cast<std::size_t>(data.num_classes), -1);
  for (std::size_t i = 0; i < keep.size(); ++i) remap[static_cast<std::size_t>(keep[i])] = static_cast<int>(i);

  LabeledDataset out;
  out.num_classes = static_cast<int>(keep.size());
  out.dims = data.dims;
  out.seed = data.seed;
  out.generator = data.generator;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int dense = remap[static_cast<std::size_t>(data.labels[i])];
    if (dense < 0) continue;
    out.features.push_back(data.features[i]);
    out.labels.push_back(dense);
  }
  if (data.synthetic) {
    SyntheticSpec spec = *data.synthetic;
    spec.num_classes = out.num_classes;
    spec.class_means.clear();
    for (int c : keep) spec.class_means.push_back(data.synthetic->class_means[static_cast<std::size_t>(c)]);
    out.synthetic = std::move(spec);
  }
  return out;
}

}  // namespace cll
