#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "cll/data.hpp"
#include "cll/sampling.hpp"

namespace cll {

/// A candidate-labeled dataset as persisted on disk.
struct AnnotatedDataset {
  int num_classes = 0;
  /// Fixed candidate-set size, or 0 when N varies per example.
  int candidate_count = 0;
  std::uint64_t seed = 0;
  std::string generator;
  std::vector<AnnotatedExample> examples;

  friend bool operator==(const AnnotatedDataset&, const AnnotatedDataset&) = default;
};

/// Line-delimited JSON, one header line then one record per example.
/// See docs/dataset_format.md. Doubles are written in shortest round-trip
/// form, so write -> read is bit-exact.
void write_labeled(std::ostream& out, const LabeledDataset& data);
void write_annotated(std::ostream& out, const AnnotatedDataset& data);
LabeledDataset read_labeled(std::istream& in);
AnnotatedDataset read_annotated(std::istream& in);

void save_labeled(const std::filesystem::path& path, const LabeledDataset& data);
void save_annotated(const std::filesystem::path& path, const AnnotatedDataset& data);
AnnotatedDataset load_annotated(const std::filesystem::path& path);

/// "labeled", "annotated" (dataset files) or "synthetic" (spec file).
std::string sniff_dataset_kind(const std::filesystem::path& path);

SyntheticSpec read_synthetic_spec(const std::filesystem::path& path);
void write_synthetic_spec(const std::filesystem::path& path, const SyntheticSpec& spec);

/// Labeled data from a synthetic spec file (generated), a labeled dataset
/// file, or an annotated file whose examples all carry true labels.
LabeledDataset load_dataset(const std::filesystem::path& path);

/// Annotated examples viewed as ordinary labels (|Y| = 1, Y = {y}).
AnnotatedDataset as_ordinary_labels(const LabeledDataset& data);

}  // namespace cll
