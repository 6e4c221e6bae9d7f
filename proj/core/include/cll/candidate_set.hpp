#pragma once

#include <initializer_list>
#include <span>
#include <vector>

namespace cll {

/// An N-element proper subset of the K labels {0..K-1}.
///
/// Labels are stored sorted strictly ascending and 1 <= N <= K-1 always
/// holds; construction throws InvalidCandidateSet otherwise. Unsorted input
/// is accepted and sorted, duplicates are rejected.
class CandidateSet {
 public:
  CandidateSet(int num_classes, std::vector<int> labels);
  CandidateSet(int num_classes, std::initializer_list<int> labels)
      : CandidateSet(num_classes, std::vector<int>(labels)) {}

  int num_classes() const noexcept { return num_classes_; }
  int size() const noexcept { return static_cast<int>(labels_.size()); }
  std::span<const int> labels() const noexcept { return labels_; }
  bool contains(int label) const noexcept;

  /// The K-N labels not in this set.
  CandidateSet complement() const;

  auto begin() const noexcept { return labels_.begin(); }
  auto end() const noexcept { return labels_.end(); }

  friend bool operator==(const CandidateSet&, const CandidateSet&) = default;

 private:
  int num_classes_;
  std::vector<int> labels_;
};

}  // namespace cll
