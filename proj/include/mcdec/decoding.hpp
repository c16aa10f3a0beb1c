// Copyright 2026 The mcdec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mcdec/language_model.hpp"

namespace mcdec {

using ProbabilityVector = std::vector<double>;

/// Max-subtracted softmax.
ProbabilityVector softmax(std::span<const double> logits);

/// z + alpha * (z_plus - z_minus). Throws LengthMismatch.
LogitVector combine_contrastive(std::span<const double> z, std::span<const double> z_plus,
                                std::span<const double> z_minus, double alpha);

/// Context-aware decoding: z_plus + alpha * (z_plus - z). Throws LengthMismatch.
LogitVector combine_cad(std::span<const double> z, std::span<const double> z_plus, double alpha);

/// The contrastive distribution computed in probability space,
/// p(y) * (p_plus(y) / p_minus(y))^alpha renormalized. Used as an independent
/// route to check combine_contrastive.
ProbabilityVector ratio_form_probability(std::span<const double> z,
                                         std::span<const double> z_plus,
                                         std::span<const double> z_minus, double alpha);

/// With C = max(p_parametric) and C_R = max(p_relevant): 1 - C when C > C_R,
/// C_R otherwise (ties go to C_R).
double dynamic_alpha(std::span<const double> p_parametric, std::span<const double> p_relevant);

/// Index of the largest entry; the lowest index wins ties.
TokenId argmax(std::span<const double> values);

enum class StrategyKind {
  kRegularClosed,
  kRegularOpen,
  kCad,
  kContrastiveFixed,
  kContrastiveDynamic,
};

/// A decoding strategy. `alpha` is meaningful for kCad and kContrastiveFixed.
struct DecodeStrategy {
  StrategyKind kind = StrategyKind::kRegularClosed;
  double alpha = 0.0;

  static constexpr double kDefaultCadAlpha = 0.5;
  static constexpr double kDefaultFixedAlpha = 1.0;

  static DecodeStrategy regular_closed() { return {StrategyKind::kRegularClosed, 0.0}; }
  static DecodeStrategy regular_open() { return {StrategyKind::kRegularOpen, 0.0}; }
  static DecodeStrategy cad(double alpha = kDefaultCadAlpha) { return {StrategyKind::kCad, alpha}; }
  static DecodeStrategy contrastive_fixed(double alpha = kDefaultFixedAlpha) {
    return {StrategyKind::kContrastiveFixed, alpha};
  }
  static DecodeStrategy contrastive_dynamic() { return {StrategyKind::kContrastiveDynamic, 0.0}; }

  bool needs_parametric() const noexcept;
  bool needs_relevant() const noexcept;
  bool needs_irrelevant() const noexcept;

  /// "fixed", "dynamic", or "none".
  std::string_view alpha_mode() const noexcept;

  bool operator==(const DecodeStrategy&) const = default;
};

/// CLI names: reg-closed, reg-open, cad, ours-fixed, ours-dynamic.
std::string_view strategy_name(StrategyKind kind) noexcept;
/// Parses a CLI name; `alpha` overrides the default where the strategy has one.
DecodeStrategy parse_strategy(std::string_view name, std::optional<double> alpha = std::nullopt);

struct BranchPrompts {
  std::optional<TokenSequence> parametric;
  std::optional<TokenSequence> relevant;
  std::optional<TokenSequence> irrelevant;
};

/// One model per branch. All three usually point at the same backend.
struct BranchModels {
  const LanguageModel* parametric = nullptr;
  const LanguageModel* relevant = nullptr;
  const LanguageModel* irrelevant = nullptr;

  static BranchModels shared(const LanguageModel& model) { return {&model, &model, &model}; }
};

/// Sentinel stored in trace fields that were not computed for a strategy.
inline constexpr double kAbsent = -1.0;

struct StepTrace {
  int step_index = 0;
  double alpha_used = 0.0;
  double confidence_parametric = kAbsent;
  double confidence_relevant = kAbsent;
  TokenId chosen_token = 0;
  std::vector<std::pair<TokenId, double>> top5_combined;
};

enum class StopReason { kEos, kMaxTokens, kStopString };
std::string_view stop_reason_name(StopReason reason) noexcept;

struct DecodeResult {
  /// Detokenized continuation, cut before the first stop string.
  std::string text;
  /// Every chosen token, including a final EOS when one was chosen.
  TokenSequence tokens;
  std::vector<StepTrace> traces;
  StopReason stop_reason = StopReason::kMaxTokens;
};

struct DecodeLimits {
  static constexpr std::size_t kDefaultMaxNewTokens = 32;

  std::size_t max_new_tokens = kDefaultMaxNewTokens;
  std::vector<std::string> stop_strings = {"\n"};
  /// Query the active branches of a step concurrently.
  bool concurrent_branches = false;
};

/// Greedy generation over the strategy's branches. Every branch prefix is its
/// own prompt followed by the tokens chosen so far from the combined scores.
///
/// Throws StrategyBranchMissing when a needed prompt is absent, VocabMismatch
/// when branch models disagree on the vocabulary, and propagates backend
/// errors.
DecodeResult decode(const DecodeStrategy& strategy, const BranchPrompts& prompts,
                    const BranchModels& models, const DecodeLimits& limits = {});

DecodeResult decode(const DecodeStrategy& strategy, const BranchPrompts& prompts,
                    const LanguageModel& model, const DecodeLimits& limits = {});

}  // namespace mcdec
