#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wvcal {

/// Scores are clamped into [kScoreEpsilon, 1 - kScoreEpsilon] so the logit
/// stays bounded (|logit| <= ~13.8).
inline constexpr double kScoreEpsilon = 1e-6;

struct ScoredResponse {
  std::string answer;  // canonical token
  double score = 0.5;  // clamped PRM score
  std::optional<bool> label;
  std::optional<std::string> reasoning;  // carried, never interpreted
};

struct QuestionInstance {
  std::string question_id;
  std::vector<ScoredResponse> responses;
  std::optional<std::string> gold;
};

enum class Role { calibration, test };

struct Dataset {
  std::vector<QuestionInstance> instances;
  Role role = Role::test;
  std::map<std::string, std::string> metadata;
};

struct TallyEntry {
  std::size_t count = 0;
  double weight_sum = 0.0;
};

/// Per-answer vote counts and weight sums. Entries are keyed by canonical
/// token, so iteration order is lexicographic.
struct AnswerTally {
  std::map<std::string, TallyEntry> entries;

  /// Answer with the largest weight_sum; ties go to the lexicographically
  /// smallest token. Throws invalid_input on an empty tally.
  const std::string& argmax_weight() const;
  /// Same rule over counts.
  const std::string& argmax_count() const;
  std::size_t total_count() const;
};

/// Trims, collapses internal whitespace runs to one space. Throws
/// invalid_answer when nothing is left.
std::string canonicalize_answer(std::string_view raw);

/// Throws invalid_score for non-finite input.
double clamp_score(double p);

/// Builds a response with a canonical answer and clamped score.
ScoredResponse make_response(std::string_view answer, double score,
                             std::optional<bool> label = std::nullopt);

/// Unique answers in first-appearance order.
std::vector<std::string> unique_answers(const QuestionInstance& instance);

/// max(m, 2) where m is the number of unique answers.
std::size_t effective_answer_count(const QuestionInstance& instance);

/// Tally from explicit per-response weights (weights[i] belongs to
/// responses[i]). Responses are accumulated in (answer, score) order so the
/// sums do not depend on response order.
AnswerTally tally_weights(const QuestionInstance& instance,
                          std::span<const double> weights);

template <class WeightFn>
AnswerTally tally(const QuestionInstance& instance, const WeightFn& weight) {
  std::vector<double> weights;
  weights.reserve(instance.responses.size());
  for (const auto& r : instance.responses) weights.push_back(weight(r.score));
  return tally_weights(instance, weights);
}

/// Checks the Dataset invariants for the given role; returns one message per
/// violation (empty when valid). Messages name the offending question.
std::vector<std::string> check_dataset(const Dataset& dataset, Role role);

/// Throws invalid_input with the first violation, if any.
void require_valid(const Dataset& dataset, Role role);

}  // namespace wvcal
