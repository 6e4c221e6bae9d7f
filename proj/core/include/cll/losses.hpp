#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "cll/candidate_set.hpp"

namespace cll {

enum class SurrogateKind {
  zero_one,         // I(z <= 0); evaluation only
  sigmoid_shifted,  // 1/(1+e^z) - 1/2
  ramp_shifted,     // clamp(-z/2, -1/2, 1/2)
  sigmoid,          // 1/(1+e^z), unshifted (a = 1)
  ramp,             // clamp((1-z)/2, 0, 1), unshifted (a = 1)
};

/// A non-increasing scalar binary loss with l(z) + l(-z) = a.
///
/// `lo`/`hi` are the infimum/supremum of the values and `lipschitz` the
/// Lipschitz constant used by the analytic bounds. For sigmoid_shifted the
/// stored Lipschitz constant is 1.0, the value used in the reference
/// experiments (the tight constant is 1/4). zero_one is flagged as not a
/// surrogate: it has no gradient and no finite Lipschitz constant.
struct SurrogateLoss {
  SurrogateKind kind = SurrogateKind::sigmoid_shifted;
  double a = 0.0;
  double lipschitz = 1.0;
  double lo = -0.5;
  double hi = 0.5;

  static SurrogateLoss make(SurrogateKind kind);
  static SurrogateLoss zero_one() { return make(SurrogateKind::zero_one); }
  static SurrogateLoss sigmoid_shifted() { return make(SurrogateKind::sigmoid_shifted); }
  static SurrogateLoss ramp_shifted() { return make(SurrogateKind::ramp_shifted); }

  bool differentiable() const noexcept { return kind != SurrogateKind::zero_one; }
  bool is_surrogate() const noexcept { return kind != SurrogateKind::zero_one; }
  /// True when a == 0, the normalization assumed by the risk and bounds.
  bool shifted() const noexcept { return a == 0.0; }

  friend bool operator==(const SurrogateLoss&, const SurrogateLoss&) = default;
};

std::string_view to_string(SurrogateKind kind);
SurrogateKind surrogate_kind_from_string(std::string_view name);

/// l(z). Throws DomainError for non-finite z.
double eval_surrogate(const SurrogateLoss& loss, double z);

/// dl/dz. Throws UnsupportedGradient for zero_one and DomainError for
/// non-finite z. Ramp kinks use the one-sided slope from the interior.
double surrogate_grad(const SurrogateLoss& loss, double z);

enum class Strategy { ova, pc };

std::string_view to_string(Strategy s);
Strategy strategy_from_string(std::string_view name);

/// A multiclass loss family: the OVA or PC ordinary loss L over a
/// surrogate, plus the additive-form weights (xi1, xi2) of the candidate
/// loss  xi1 * sum_{y in Y} L(g, y) + xi2.
struct LossScheme {
  Strategy strategy = Strategy::ova;
  SurrogateLoss surrogate{};
  int num_classes = 2;
  double xi1 = 1.0;
  double xi2 = 0.0;

  LossScheme() = default;
  LossScheme(Strategy strategy, SurrogateLoss surrogate, int num_classes, double xi1 = 1.0,
             double xi2 = 0.0);

  /// sum_y L(g, y); a*K for OVA, a*C(K,2) for PC.
  double m1() const noexcept;
  /// L(g, y) + Lbar(g, y); 2a for OVA, a(K-1) for PC.
  double m2() const noexcept;
  /// Offset of the dual (complementary) form for candidate sets of size N:
  /// xi1*m1 + xi2 - xi1*m2*(K-N).
  double dual_xi2(int candidate_count) const;

  /// True for the (a = 0, xi1 = 1, xi2 = 0) normalization under which the
  /// rescaled candidate risk is unbiased without correction terms.
  bool is_simplified() const noexcept { return surrogate.shifted() && xi1 == 1.0 && xi2 == 0.0; }

  /// Scheme whose additive form reproduces the dedicated OVA/PC candidate
  /// loss for sets of size N (xi1 = 1, xi2 = -closed_form_offset).
  static LossScheme matching_closed_form(Strategy strategy, SurrogateLoss surrogate, int num_classes,
                                         int candidate_count);

  friend bool operator==(const LossScheme&, const LossScheme&) = default;
};

/// Constant c such that sum_{y in Y} L(g, y) = closed_form(g, Y) + c:
/// a*N(N-1)/(K-1) for OVA, a*C(N,2) for PC.
double closed_form_offset(Strategy strategy, double a, int num_classes, int candidate_count);

/// Ordinary loss L(g, y).
///   OVA: l(g_y) + 1/(K-1) sum_{y' != y} l(-g_y')
///   PC:  sum_{y' != y} l(g_y - g_y')
double ordinary_loss(const LossScheme& scheme, std::span<const double> g, int y);

/// Complementary loss Lbar(g, ybar).
///   OVA: 1/(K-1) sum_{y != ybar} l(g_y) + l(-g_ybar)
///   PC:  sum_{y != ybar} l(g_y - g_ybar)
double complementary_loss(const LossScheme& scheme, std::span<const double> g, int ybar);

/// -(K-1) L(g, ybar) + sum_y L(g, y), built from the ordinary loss.
double general_complementary_loss(const LossScheme& scheme, std::span<const double> g, int ybar);

/// Additive form xi1 * sum_{y in Y} L(g, y) + xi2.
double candidate_loss(const LossScheme& scheme, std::span<const double> g, const CandidateSet& Y);

/// Dedicated candidate losses, independent of xi1/xi2:
///   OVA: (K-N)/(K-1) sum_{y in Y} l(g_y) + N/(K-1) sum_{y not in Y} l(-g_y)
///   PC:  sum_{y in Y} sum_{y' not in Y} l(g_y - g_y')
double closed_form_candidate_loss(const LossScheme& scheme, std::span<const double> g,
                                  const CandidateSet& Y);

/// Dual form xi1 * sum_{ybar in Ybar} Lbar(g, ybar) + dual_xi2(K - |Ybar|),
/// where `complement` is the set of complementary labels. Equal to
/// candidate_loss(scheme, g, complement.complement()).
double dual_candidate_loss(const LossScheme& scheme, std::span<const double> g,
                           const CandidateSet& complement);

/// d candidate_loss / d g_k for every k, written to `grad` (size K).
void candidate_loss_grad(const LossScheme& scheme, std::span<const double> g, const CandidateSet& Y,
                         std::span<double> grad);

std::vector<double> candidate_loss_grad(const LossScheme& scheme, std::span<const double> g,
                                        const CandidateSet& Y);

}  // namespace cll
