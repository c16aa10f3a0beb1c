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

#include "mcdec/decoding.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>

#include "mcdec/error.hpp"

namespace mcdec {
namespace {

void require_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::kLengthMismatch, std::string(what) + ": logit vectors of length " +
                                                std::to_string(a) + " and " + std::to_string(b));
  }
}

void require_alpha(double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must be finite and >= 0");
  }
}

std::vector<std::pair<TokenId, double>> top_k(std::span<const double> probs, std::size_t k) {
  std::vector<TokenId> order(probs.size());
  std::iota(order.begin(), order.end(), 0);
  k = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](TokenId a, TokenId b) {
                      if (probs[a] != probs[b]) return probs[a] > probs[b];
                      return a < b;
                    });
  std::vector<std::pair<TokenId, double>> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.emplace_back(order[i], probs[order[i]]);
  return out;
}

double max_of(std::span<const double> v) { return *std::max_element(v.begin(), v.end()); }

}  // namespace

ProbabilityVector softmax(std::span<const double> logits) {
  if (logits.empty()) return {};
  const double peak = max_of(logits);
  ProbabilityVector out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    sum += out[i];
  }
  for (double& p : out) p /= sum;
  return out;
}

LogitVector combine_contrastive(std::span<const double> z, std::span<const double> z_plus,
                                std::span<const double> z_minus, double alpha) {
  require_lengths(z.size(), z_plus.size(), "combine_contrastive");
  require_lengths(z.size(), z_minus.size(), "combine_contrastive");
  require_alpha(alpha);
  LogitVector out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] + alpha * (z_plus[i] - z_minus[i]);
  return out;
}

LogitVector combine_cad(std::span<const double> z, std::span<const double> z_plus, double alpha) {
  require_lengths(z.size(), z_plus.size(), "combine_cad");
  require_alpha(alpha);
  LogitVector out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = z_plus[i] + alpha * (z_plus[i] - z[i]);
  return out;
}

ProbabilityVector ratio_form_probability(std::span<const double> z,
                                         std::span<const double> z_plus,
                                         std::span<const double> z_minus, double alpha) {
  require_lengths(z.size(), z_plus.size(), "ratio_form_probability");
  require_lengths(z.size(), z_minus.size(), "ratio_form_probability");
  require_alpha(alpha);
  const auto p = softmax(z);
  const auto p_plus = softmax(z_plus);
  const auto p_minus = softmax(z_minus);
  ProbabilityVector out(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = p[i] * std::pow(p_plus[i] / p_minus[i], alpha);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

double dynamic_alpha(std::span<const double> p_parametric, std::span<const double> p_relevant) {
  const double c = max_of(p_parametric);
  const double c_r = max_of(p_relevant);
  return c > c_r ? 1.0 - c : c_r;
}

TokenId argmax(std::span<const double> values) {
  return static_cast<TokenId>(std::max_element(values.begin(), values.end()) - values.begin());
}

bool DecodeStrategy::needs_parametric() const noexcept {
  return kind != StrategyKind::kRegularOpen;
}

bool DecodeStrategy::needs_relevant() const noexcept {
  return kind != StrategyKind::kRegularClosed;
}

bool DecodeStrategy::needs_irrelevant() const noexcept {
  return kind == StrategyKind::kContrastiveFixed || kind == StrategyKind::kContrastiveDynamic;
}

std::string_view DecodeStrategy::alpha_mode() const noexcept {
  switch (kind) {
    case StrategyKind::kCad:
    case StrategyKind::kContrastiveFixed: return "fixed";
    case StrategyKind::kContrastiveDynamic: return "dynamic";
    default: return "none";
  }
}

std::string_view strategy_name(StrategyKind kind) noexcept {
  switch (kind) {
    case StrategyKind::kRegularClosed: return "reg-closed";
    case StrategyKind::kRegularOpen: return "reg-open";
    case StrategyKind::kCad: return "cad";
    case StrategyKind::kContrastiveFixed: return "ours-fixed";
    case StrategyKind::kContrastiveDynamic: return "ours-dynamic";
  }
  return "unknown";
}

DecodeStrategy parse_strategy(std::string_view name, std::optional<double> alpha) {
  if (name == "reg-closed") return DecodeStrategy::regular_closed();
  if (name == "reg-open") return DecodeStrategy::regular_open();
  if (name == "cad") return DecodeStrategy::cad(alpha.value_or(DecodeStrategy::kDefaultCadAlpha));
  if (name == "ours-fixed") {
    return DecodeStrategy::contrastive_fixed(alpha.value_or(DecodeStrategy::kDefaultFixedAlpha));
  }
  if (name == "ours-dynamic") return DecodeStrategy::contrastive_dynamic();
  throw Error(ErrorCode::kInvalidArgument, "unknown strategy '" + std::string(name) + "'");
}

std::string_view stop_reason_name(StopReason reason) noexcept {
  switch (reason) {
    case StopReason::kEos: return "eos";
    case StopReason::kMaxTokens: return "max_tokens";
    case StopReason::kStopString: return "stop_string";
  }
  return "unknown";
}

DecodeResult decode(const DecodeStrategy& strategy, const BranchPrompts& prompts,
                    const LanguageModel& model, const DecodeLimits& limits) {
  return decode(strategy, prompts, BranchModels::shared(model), limits);
}

DecodeResult decode(const DecodeStrategy& strategy, const BranchPrompts& prompts,
                    const BranchModels& models, const DecodeLimits& limits) {
  struct Branch {
    const TokenSequence* prompt = nullptr;
    const LanguageModel* model = nullptr;
  };
  auto require = [](bool needed, const std::optional<TokenSequence>& prompt,
                    const LanguageModel* model, const char* name) -> Branch {
    if (!needed) return {};
    if (!prompt) {
      throw Error(ErrorCode::kStrategyBranchMissing,
                  std::string("strategy needs the ") + name + " branch prompt");
    }
    if (model == nullptr) {
      throw Error(ErrorCode::kStrategyBranchMissing, std::string("no model for the ") + name + " branch");
    }
    return {&*prompt, model};
  };
  const Branch parametric =
      require(strategy.needs_parametric(), prompts.parametric, models.parametric, "parametric");
  const Branch relevant =
      require(strategy.needs_relevant(), prompts.relevant, models.relevant, "relevant");
  const Branch irrelevant =
      require(strategy.needs_irrelevant(), prompts.irrelevant, models.irrelevant, "irrelevant");
  if (strategy.kind == StrategyKind::kCad || strategy.kind == StrategyKind::kContrastiveFixed) {
    require_alpha(strategy.alpha);
  }

  const LanguageModel* lead = nullptr;
  for (const Branch* b : {&parametric, &relevant, &irrelevant}) {
    if (b->model == nullptr) continue;
    if (lead == nullptr) {
      lead = b->model;
    } else {
      require_same_vocab(lead->vocab(), b->model->vocab());
    }
  }
  const TokenId eos = lead->vocab().eos_id;

  DecodeResult result;
  auto query = [&](const Branch& b) -> std::optional<LogitVector> {
    if (b.model == nullptr) return std::nullopt;
    return b.model->next_logits(*b.prompt, result.tokens);
  };

  for (std::size_t step = 0; step < limits.max_new_tokens; ++step) {
    std::optional<LogitVector> z;
    std::optional<LogitVector> z_plus;
    std::optional<LogitVector> z_minus;
    if (limits.concurrent_branches) {
      auto f_plus = std::async(std::launch::async, query, std::cref(relevant));
      auto f_minus = std::async(std::launch::async, query, std::cref(irrelevant));
      z = query(parametric);
      z_plus = f_plus.get();
      z_minus = f_minus.get();
    } else {
      z = query(parametric);
      z_plus = query(relevant);
      z_minus = query(irrelevant);
    }

    StepTrace trace;
    trace.step_index = static_cast<int>(step);
    std::optional<ProbabilityVector> p;
    std::optional<ProbabilityVector> p_plus;
    if (z) {
      p = softmax(*z);
      trace.confidence_parametric = max_of(*p);
    }
    if (z_plus) {
      p_plus = softmax(*z_plus);
      trace.confidence_relevant = max_of(*p_plus);
    }

    LogitVector combined;
    switch (strategy.kind) {
      case StrategyKind::kRegularClosed:
        combined = std::move(*z);
        break;
      case StrategyKind::kRegularOpen:
        combined = std::move(*z_plus);
        break;
      case StrategyKind::kCad:
        trace.alpha_used = strategy.alpha;
        combined = combine_cad(*z, *z_plus, strategy.alpha);
        break;
      case StrategyKind::kContrastiveFixed:
        trace.alpha_used = strategy.alpha;
        combined = combine_contrastive(*z, *z_plus, *z_minus, strategy.alpha);
        break;
      case StrategyKind::kContrastiveDynamic:
        trace.alpha_used = dynamic_alpha(*p, *p_plus);
        combined = combine_contrastive(*z, *z_plus, *z_minus, trace.alpha_used);
        break;
    }

    const TokenId chosen = argmax(combined);
    trace.chosen_token = chosen;
    trace.top5_combined = top_k(softmax(combined), 5);
    result.traces.push_back(std::move(trace));
    result.tokens.push_back(chosen);

    if (chosen == eos) {
      result.stop_reason = StopReason::kEos;
      break;
    }
    const std::string text = lead->detokenize(result.tokens);
    std::size_t cut = std::string::npos;
    for (const auto& stop : limits.stop_strings) {
      if (stop.empty()) continue;
      cut = std::min(cut, text.find(stop));
    }
    if (cut != std::string::npos) {
      result.text = text.substr(0, cut);
      result.stop_reason = StopReason::kStopString;
      return result;
    }
    result.text = text;
  }
  if (result.stop_reason == StopReason::kEos) {
    result.text = lead->detokenize(std::span(result.tokens).first(result.tokens.size() - 1));
  }
  return result;
}

}  // namespace mcdec
