#include "wvcal/aggregators.hpp"

#include <cmath>
#include <set>

#include "wvcal/calibration.hpp"
#include "wvcal/error.hpp"

namespace wvcal {

AggregationResult majority_vote(const QuestionInstance& instance) {
  auto t = tally(instance, [](double) { return 1.0; });
  std::string chosen = t.argmax_count();
  return {std::move(chosen), std::move(t), "majority_vote"};
}

AggregationResult best_of_n(const QuestionInstance& instance) {
  const auto& rs = instance.responses;
  if (rs.empty()) throw Error(Errc::invalid_input, "best_of_n on an empty instance");
  std::size_t best = 0;
  for (std::size_t i = 1; i < rs.size(); ++i) {
    if (rs[i].score > rs[best].score) best = i;
  }
  return {rs[best].answer, tally(instance, [](double p) { return p; }), "best_of_n"};
}

AggregationResult vanilla_weighted_vote(const QuestionInstance& instance) {
  auto result = weighted_vote(instance, WeightFunction::raw_score());
  result.method = "vanilla_weighted_vote";
  return result;
}

AggregationResult weighted_vote(const QuestionInstance& instance, const WeightFunction& w) {
  auto t = tally(instance, w);
  std::string chosen = t.argmax_weight();
  return {std::move(chosen), std::move(t), "weighted_vote:" + std::string(to_string(w.kind()))};
}

AggregationResult weighted_vote(const QuestionInstance& instance, const ScoreFn& w,
                                std::string method) {
  auto t = tally(instance, w);
  std::string chosen = t.argmax_weight();
  return {std::move(chosen), std::move(t), std::move(method)};
}

AggregationResult weighted_vote_with_weights(const QuestionInstance& instance,
                                             std::span<const double> weights,
                                             std::string method) {
  auto t = tally_weights(instance, weights);
  std::string chosen = t.argmax_weight();
  return {std::move(chosen), std::move(t), std::move(method)};
}

bool pass_at_n(const QuestionInstance& instance) {
  if (!instance.gold) {
    throw Error(Errc::missing_gold, "question '" + instance.question_id + "' has no gold answer");
  }
  for (const auto& r : instance.responses) {
    if (r.answer == *instance.gold) return true;
  }
  return false;
}

AggregationResult optimal_aggregate(const QuestionInstance& instance) {
  if (instance.responses.empty()) throw Error(Errc::invalid_input, "optimal_aggregate on an empty instance");
  std::vector<double> correct, incorrect;
  for (const auto& r : instance.responses) {
    if (!r.label) {
      throw Error(Errc::missing_label,
                  "question '" + instance.question_id + "' has an unlabeled response");
    }
    (*r.label ? correct : incorrect).push_back(r.score);
  }
  const double n = static_cast<double>(instance.responses.size());
  const double q = std::clamp(static_cast<double>(correct.size()) / n, kOptimalQClamp,
                              1.0 - kOptimalQClamp);
  const double llm = llm_signal_term(q, effective_answer_count(instance));

  std::shared_ptr<const KdePair> densities;
  if (!correct.empty() && !incorrect.empty()) {
    densities = std::make_shared<const KdePair>(KdePair{fit_kde(correct), fit_kde(incorrect)});
  }
  auto result = weighted_vote(instance, WeightFunction::kde_ratio(std::move(densities), llm));
  result.method = "optimal";
  return result;
}

ScoreFn optimal_weight(ScoreFn log_density_correct, ScoreFn log_density_incorrect,
                       double q_m, std::size_t m_eff) {
  const double llm = llm_signal_term(q_m, m_eff);
  return [f1 = std::move(log_density_correct), f0 = std::move(log_density_incorrect),
          llm](double p) { return f1(p) - f0(p) + llm; };
}

std::string loglik_oracle(const QuestionInstance& instance, double q_m,
                          const ScoreFn& log_density_correct,
                          const ScoreFn& log_density_incorrect) {
  if (!(q_m > 0.0 && q_m < 1.0)) throw Error(Errc::invalid_parameter, "q_M must lie in (0, 1)");
  const auto answers = unique_answers(instance);
  if (answers.empty()) throw Error(Errc::invalid_input, "loglik_oracle on an empty instance");
  const double m_eff = static_cast<double>(std::max<std::size_t>(answers.size(), 2));
  const double total = static_cast<double>(instance.responses.size());
  const double log_correct_answer = std::log(q_m);
  const double log_other_answer = std::log((1.0 - q_m) / (m_eff - 1.0));

  // Candidates are visited in lexicographic order and only a strictly larger
  // likelihood replaces the incumbent.
  const std::set<std::string> ordered(answers.begin(), answers.end());
  const std::string* best = nullptr;
  double best_ll = -INFINITY;
  for (const auto& candidate : ordered) {
    double ll = 0.0;
    double votes = 0.0;
    for (const auto& r : instance.responses) {
      if (r.answer == candidate) {
        ll += log_density_correct(r.score);
        votes += 1.0;
      } else {
        ll += log_density_incorrect(r.score);
      }
    }
    ll += votes * log_correct_answer + (total - votes) * log_other_answer;
    if (best == nullptr || ll > best_ll) {
      best = &candidate;
      best_ll = ll;
    }
  }
  return *best;
}

}  // namespace wvcal
