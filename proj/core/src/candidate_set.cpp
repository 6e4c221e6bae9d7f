#include "cll/candidate_set.hpp"

#include <algorithm>
#include <string>

#include "cll/error.hpp"

namespace cll {

CandidateSet::CandidateSet(int num_classes, std::vector<int> labels)
    : num_classes_(num_classes), labels_(std::move(labels)) {
  if (num_classes_ < 2) throw InvalidCandidateSet("candidate set needs K >= 2, got K=" + std::to_string(num_classes_));
  if (labels_.empty()) throw InvalidCandidateSet("candidate set is empty");
  if (static_cast<int>(labels_.size()) >= num_classes_)
    throw InvalidCandidateSet("candidate set must be a proper subset: |Y|=" + std::to_string(labels_.size()) +
                              " with K=" + std::to_string(num_classes_));
  std::sort(labels_.begin(), labels_.end());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] < 0 || labels_[i] >= num_classes_)
      throw InvalidCandidateSet("candidate label " + std::to_string(labels_[i]) + " outside [0, " +
                                std::to_string(num_classes_) + ")");
    if (i > 0 && labels_[i] == labels_[i - 1])
      throw InvalidCandidateSet("duplicate candidate label " + std::to_string(labels_[i]));
  }
}

bool CandidateSet::contains(int label) const noexcept {
  return std::binary_search(labels_.begin(), labels_.end(), label);
}

CandidateSet CandidateSet::complement() const {
  std::vector<int> rest;
  rest.reserve(static_cast<std::size_t>(num_classes_) - labels_.size());
  for (int y = 0; y < num_classes_; ++y)
    if (!contains(y)) rest.push_back(y);
  return CandidateSet(num_classes_, std::move(rest));
}

}  // namespace cll
