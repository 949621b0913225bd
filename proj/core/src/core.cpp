#include "wvcal/core.hpp"

#include <cctype>
#include <cmath>
#include <set>

#include "wvcal/error.hpp"

namespace wvcal {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_answer: return "invalid-answer";
    case Errc::invalid_score: return "invalid-score";
    case Errc::invalid_input: return "invalid-input";
    case Errc::domain: return "domain";
    case Errc::missing_gold: return "missing-gold";
    case Errc::missing_label: return "missing-label";
    case Errc::invalid_parameter: return "invalid-parameter";
    case Errc::calibration_degenerate: return "calibration-degenerate";
    case Errc::parse: return "parse";
    case Errc::version: return "version";
    case Errc::insufficient_responses: return "insufficient-responses";
    case Errc::invalid_artifact: return "invalid-artifact";
    case Errc::io: return "io";
  }
  return "unknown";
}

namespace {

template <class Compare>
const std::string& argmax_by(const AnswerTally& t, Compare better) {
  if (t.entries.empty()) throw Error(Errc::invalid_input, "argmax over an empty tally");
  auto best = t.entries.begin();
  for (auto it = std::next(best); it != t.entries.end(); ++it) {
    // Strict comparison: the earlier (lexicographically smaller) key keeps ties.
    if (better(it->second, best->second)) best = it;
  }
  return best->first;
}

}  // namespace

const std::string& AnswerTally::argmax_weight() const {
  return argmax_by(*this, [](const TallyEntry& a, const TallyEntry& b) {
    return a.weight_sum > b.weight_sum;
  });
}

const std::string& AnswerTally::argmax_count() const {
  return argmax_by(*this, [](const TallyEntry& a, const TallyEntry& b) {
    return a.count > b.count;
  });
}

std::size_t AnswerTally::total_count() const {
  std::size_t total = 0;
  for (const auto& [_, e] : entries) total += e.count;
  return total;
}

std::string canonicalize_answer(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char ch : raw) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(ch);
  }
  if (out.empty()) throw Error(Errc::invalid_answer, "answer is empty after trimming");
  return out;
}

double clamp_score(double p) {
  if (!std::isfinite(p)) throw Error(Errc::invalid_score, "score is not finite");
  return std::clamp(p, kScoreEpsilon, 1.0 - kScoreEpsilon);
}

ScoredResponse make_response(std::string_view answer, double score,
                             std::optional<bool> label) {
  return ScoredResponse{canonicalize_answer(answer), clamp_score(score), label,
                        std::nullopt};
}

std::vector<std::string> unique_answers(const QuestionInstance& instance) {
  std::vector<std::string> out;
  std::set<std::string_view> seen;
  for (const auto& r : instance.responses) {
    if (seen.insert(r.answer).second) out.push_back(r.answer);
  }
  return out;
}

std::size_t effective_answer_count(const QuestionInstance& instance) {
  std::set<std::string_view> seen;
  for (const auto& r : instance.responses) seen.insert(r.answer);
  return std::max<std::size_t>(seen.size(), 2);
}

AnswerTally tally_weights(const QuestionInstance& instance,
                          std::span<const double> weights) {
  const auto& rs = instance.responses;
  if (weights.size() != rs.size()) {
    throw Error(Errc::invalid_input, "weight count does not match response count");
  }
  std::vector<std::size_t> order(rs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (rs[a].answer != rs[b].answer) return rs[a].answer < rs[b].answer;
    return rs[a].score < rs[b].score;
  });

  AnswerTally out;
  auto hint = out.entries.end();
  for (std::size_t i : order) {
    if (hint == out.entries.end() || hint->first != rs[i].answer) {
      hint = out.entries.emplace_hint(out.entries.end(), rs[i].answer, TallyEntry{});
    }
    hint->second.count += 1;
    hint->second.weight_sum += weights[i];
  }
  return out;
}

std::vector<std::string> check_dataset(const Dataset& dataset, Role role) {
  std::vector<std::string> problems;
  std::set<std::string_view> ids;
  for (const auto& q : dataset.instances) {
    const std::string where = "question '" + q.question_id + "': ";
    if (q.question_id.empty()) problems.push_back("question with empty question_id");
    if (!ids.insert(q.question_id).second) problems.push_back(where + "duplicate question_id");
    if (q.responses.empty()) problems.push_back(where + "no responses");
    if (role == Role::calibration && !q.gold) problems.push_back(where + "calibration question without gold");
    for (std::size_t i = 0; i < q.responses.size(); ++i) {
      const auto& r = q.responses[i];
      const std::string at = where + "response " + std::to_string(i) + ": ";
      if (r.answer.empty()) problems.push_back(at + "empty answer");
      if (!std::isfinite(r.score) || r.score < kScoreEpsilon || r.score > 1.0 - kScoreEpsilon) {
        problems.push_back(at + "score outside the clamped range");
      }
      if (role == Role::calibration && !r.label) problems.push_back(at + "missing label in calibration data");
      if (q.gold && r.label && *r.label != (r.answer == *q.gold)) {
        problems.push_back(at + "label disagrees with gold answer");
      }
    }
  }
  return problems;
}

void require_valid(const Dataset& dataset, Role role) {
  auto problems = check_dataset(dataset, role);
  if (!problems.empty()) throw Error(Errc::invalid_input, problems.front());
}

}  // namespace wvcal
