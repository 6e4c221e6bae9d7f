#pragma once

#include <functional>
#include <span>
#include <vector>

namespace cll {

/// Anything producing K discriminant scores g(x).
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual int num_classes() const = 0;
  virtual std::vector<double> score(std::span<const double> x) const = 0;
};

/// Adapts a callable to the Scorer interface.
class FunctionScorer final : public Scorer {
 public:
  using Fn = std::function<std::vector<double>(std::span<const double>)>;

  FunctionScorer(int num_classes, Fn fn) : num_classes_(num_classes), fn_(std::move(fn)) {}

  int num_classes() const override { return num_classes_; }
  std::vector<double> score(std::span<const double> x) const override { return fn_(x); }

 private:
  int num_classes_;
  Fn fn_;
};

/// argmax_y g_y, ties broken toward the smallest index.
int predict_label(std::span<const double> scores);

}  // namespace cll
