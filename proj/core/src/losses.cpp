#include "cll/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cll/combinatorics.hpp"
#include "cll/error.hpp"

namespace cll {
namespace {

void check_scores(const LossScheme& scheme, std::span<const double> g) {
  if (static_cast<int>(g.size()) != scheme.num_classes)
    throw ValidationError("score vector has " + std::to_string(g.size()) + " entries, expected K=" +
                          std::to_string(scheme.num_classes));
}

void check_label(const LossScheme& scheme, int y) {
  if (y < 0 || y >= scheme.num_classes)
    throw IndexError("label " + std::to_string(y) + " outside [0, " + std::to_string(scheme.num_classes) + ")");
}

void check_set(const LossScheme& scheme, const CandidateSet& Y) {
  if (Y.num_classes() != scheme.num_classes)
    throw InvalidCandidateSet("candidate set built for K=" + std::to_string(Y.num_classes()) +
                              " used with K=" + std::to_string(scheme.num_classes));
}

}  // namespace

SurrogateLoss SurrogateLoss::make(SurrogateKind kind) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (kind) {
    case SurrogateKind::zero_one:
      return {kind, 1.0, inf, 0.0, 1.0};
    case SurrogateKind::sigmoid_shifted:
      return {kind, 0.0, 1.0, -0.5, 0.5};
    case SurrogateKind::ramp_shifted:
      return {kind, 0.0, 0.5, -0.5, 0.5};
    case SurrogateKind::sigmoid:
      return {kind, 1.0, 1.0, 0.0, 1.0};
    case SurrogateKind::ramp:
      return {kind, 1.0, 0.5, 0.0, 1.0};
  }
  throw ValidationError("unknown surrogate kind");
}

std::string_view to_string(SurrogateKind kind) {
  switch (kind) {
    case SurrogateKind::zero_one: return "zero_one";
    case SurrogateKind::sigmoid_shifted: return "sigmoid_shifted";
    case SurrogateKind::ramp_shifted: return "ramp_shifted";
    case SurrogateKind::sigmoid: return "sigmoid";
    case SurrogateKind::ramp: return "ramp";
  }
  return "?";
}

SurrogateKind surrogate_kind_from_string(std::string_view name) {
  for (auto k : {SurrogateKind::zero_one, SurrogateKind::sigmoid_shifted, SurrogateKind::ramp_shifted,
                 SurrogateKind::sigmoid, SurrogateKind::ramp})
    if (to_string(k) == name) return k;
  throw ValidationError("unknown surrogate '" + std::string(name) + "'");
}

double eval_surrogate(const SurrogateLoss& loss, double z) {
  if (!std::isfinite(z)) throw DomainError("surrogate evaluated at non-finite z");
  switch (loss.kind) {
    case SurrogateKind::zero_one:
      return z <= 0.0 ? 1.0 : 0.0;
    case SurrogateKind::sigmoid_shifted:
      // 1/(1+e^z) - 1/2 == -tanh(z/2)/2, odd to the last bit.
      return -0.5 * std::tanh(0.5 * z);
    case SurrogateKind::ramp_shifted:
      return std::clamp(-0.5 * z, -0.5, 0.5);
    case SurrogateKind::sigmoid:
      return 0.5 - 0.5 * std::tanh(0.5 * z);
    case SurrogateKind::ramp:
      return std::clamp(0.5 * (1.0 - z), 0.0, 1.0);
  }
  throw ValidationError("unknown surrogate kind");
}

double surrogate_grad(const SurrogateLoss& loss, double z) {
  if (!std::isfinite(z)) throw DomainError("surrogate gradient at non-finite z");
  switch (loss.kind) {
    case SurrogateKind::zero_one:
      throw UnsupportedGradient("the 0-1 loss has no usable gradient");
    case SurrogateKind::sigmoid_shifted:
    case SurrogateKind::sigmoid: {
      // -e^z / (1+e^z)^2, symmetric in z; written with e^-|z| to avoid cancellation.
      const double e = std::exp(-std::abs(z));
      return -e / ((1.0 + e) * (1.0 + e));
    }
    case SurrogateKind::ramp_shifted:
    case SurrogateKind::ramp:
      return std::abs(z) <= 1.0 ? -0.5 : 0.0;
  }
  throw ValidationError("unknown surrogate kind");
}

std::string_view to_string(Strategy s) { return s == Strategy::ova ? "ova" : "pc"; }

Strategy strategy_from_string(std::string_view name) {
  if (name == "ova" || name == "OVA") return Strategy::ova;
  if (name == "pc" || name == "PC") return Strategy::pc;
  throw ValidationError("unknown strategy '" + std::string(name) + "' (expected ova or pc)");
}

LossScheme::LossScheme(Strategy strategy_, SurrogateLoss surrogate_, int num_classes_, double xi1_, double xi2_)
    : strategy(strategy_), surrogate(surrogate_), num_classes(num_classes_), xi1(xi1_), xi2(xi2_) {
  if (num_classes < 2) throw ValidationError("loss scheme needs K >= 2");
  if (!(xi1 > 0.0) || !std::isfinite(xi1)) throw ValidationError("xi1 must be a positive finite number");
  if (!std::isfinite(xi2)) throw ValidationError("xi2 must be finite");
}

double LossScheme::m1() const noexcept {
  return strategy == Strategy::ova ? surrogate.a * num_classes : surrogate.a * binomial_real(num_classes, 2);
}

double LossScheme::m2() const noexcept {
  return strategy == Strategy::ova ? 2.0 * surrogate.a : surrogate.a * (num_classes - 1);
}

double LossScheme::dual_xi2(int candidate_count) const {
  if (candidate_count < 1 || candidate_count > num_classes - 1)
    throw ValidationError("candidate count N=" + std::to_string(candidate_count) + " outside [1, K-1]");
  return xi1 * m1() + xi2 - xi1 * m2() * (num_classes - candidate_count);
}

LossScheme LossScheme::matching_closed_form(Strategy strategy, SurrogateLoss surrogate, int num_classes,
                                            int candidate_count) {
  return LossScheme(strategy, surrogate, num_classes, 1.0,
                    -closed_form_offset(strategy, surrogate.a, num_classes, candidate_count));
}

double closed_form_offset(Strategy strategy, double a, int num_classes, int candidate_count) {
  if (num_classes < 2 || candidate_count < 1 || candidate_count > num_classes - 1)
    throw ValidationError("closed-form offset needs 1 <= N <= K-1");
  const double n = candidate_count;
  if (strategy == Strategy::ova) return a * n * (n - 1.0) / (num_classes - 1);
  return a * binomial_real(candidate_count, 2);
}

double ordinary_loss(const LossScheme& scheme, std::span<const double> g, int y) {
  check_scores(scheme, g);
  check_label(scheme, y);
  const auto& l = scheme.surrogate;
  const int K = scheme.num_classes;
  const auto uy = static_cast<std::size_t>(y);
  double rest = 0.0;
  if (scheme.strategy == Strategy::ova) {
    for (int k = 0; k < K; ++k)
      if (k != y) rest += eval_surrogate(l, -g[static_cast<std::size_t>(k)]);
    return eval_surrogate(l, g[uy]) + rest / (K - 1);
  }
  for (int k = 0; k < K; ++k)
    if (k != y) rest += eval_surrogate(l, g[uy] - g[static_cast<std::size_t>(k)]);
  return rest;
}

double complementary_loss(const LossScheme& scheme, std::span<const double> g, int ybar) {
  check_scores(scheme, g);
  check_label(scheme, ybar);
  const auto& l = scheme.surrogate;
  const int K = scheme.num_classes;
  const auto ub = static_cast<std::size_t>(ybar);
  double rest = 0.0;
  if (scheme.strategy == Strategy::ova) {
    for (int k = 0; k < K; ++k)
      if (k != ybar) rest += eval_surrogate(l, g[static_cast<std::size_t>(k)]);
    return rest / (K - 1) + eval_surrogate(l, -g[ub]);
  }
  for (int k = 0; k < K; ++k)
    if (k != ybar) rest += eval_surrogate(l, g[static_cast<std::size_t>(k)] - g[ub]);
  return rest;
}

double general_complementary_loss(const LossScheme& scheme, std::span<const double> g, int ybar) {
  check_label(scheme, ybar);
  double total = 0.0;
  for (int y = 0; y < scheme.num_classes; ++y) total += ordinary_loss(scheme, g, y);
  return -(scheme.num_classes - 1) * ordinary_loss(scheme, g, ybar) + total;
}

double candidate_loss(const LossScheme& scheme, std::span<const double> g, const CandidateSet& Y) {
  check_set(scheme, Y);
  double sum = 0.0;
  for (int y : Y) sum += ordinary_loss(scheme, g, y);
  return scheme.xi1 * sum + scheme.xi2;
}

double closed_form_candidate_loss(const LossScheme& scheme, std::span<const double> g, const CandidateSet& Y) {
  check_scores(scheme, g);
  check_set(scheme, Y);
  const auto& l = scheme.surrogate;
  const int K = scheme.num_classes;
  const int N = Y.size();
  if (scheme.strategy == Strategy::ova) {
    double in = 0.0;
    double out = 0.0;
    for (int k = 0; k < K; ++k) {
      const double gk = g[static_cast<std::size_t>(k)];
      if (Y.contains(k))
        in += eval_surrogate(l, gk);
      else
        out += eval_surrogate(l, -gk);
    }
    return static_cast<double>(K - N) / (K - 1) * in + static_cast<double>(N) / (K - 1) * out;
  }
  double sum = 0.0;
  for (int y : Y)
    for (int k = 0; k < K; ++k)
      if (!Y.contains(k)) sum += eval_surrogate(l, g[static_cast<std::size_t>(y)] - g[static_cast<std::size_t>(k)]);
  return sum;
}

double dual_candidate_loss(const LossScheme& scheme, std::span<const double> g, const CandidateSet& complement) {
  check_set(scheme, complement);
  double sum = 0.0;
  for (int ybar : complement) sum += complementary_loss(scheme, g, ybar);
  return scheme.xi1 * sum + scheme.dual_xi2(scheme.num_classes - complement.size());
}

void candidate_loss_grad(const LossScheme& scheme, std::span<const double> g, const CandidateSet& Y,
                         std::span<double> grad) {
  check_scores(scheme, g);
  check_set(scheme, Y);
  if (grad.size() != g.size()) throw ValidationError("gradient buffer size mismatch");
  const auto& l = scheme.surrogate;
  const int K = scheme.num_classes;
  const int N = Y.size();
  for (int k = 0; k < K; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    const bool in = Y.contains(k);
    double d = 0.0;
    if (scheme.strategy == Strategy::ova) {
      // d/dg_k sum_{y in Y} [l(g_y) + 1/(K-1) sum_{y' != y} l(-g_y')]
      if (in) d += surrogate_grad(l, g[uk]);
      d -= static_cast<double>(N - (in ? 1 : 0)) / (K - 1) * surrogate_grad(l, -g[uk]);
    } else {
      // k as the first argument of l(g_y - g_y') when k in Y, as the second
      // argument for every other member of Y.
      if (in)
        for (int j = 0; j < K; ++j)
          if (j != k) d += surrogate_grad(l, g[uk] - g[static_cast<std::size_t>(j)]);
      for (int y : Y)
        if (y != k) d -= surrogate_grad(l, g[static_cast<std::size_t>(y)] - g[uk]);
    }
    grad[uk] = scheme.xi1 * d;
  }
}

std::vector<double> candidate_loss_grad(const LossScheme& scheme, std::span<const double> g, const CandidateSet& Y) {
  std::vector<double> grad(g.size());
  candidate_loss_grad(scheme, g, Y, grad);
  return grad;
}

}  // namespace cll
