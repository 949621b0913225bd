#pragma once

#include <functional>
#include <string>

#include "wvcal/core.hpp"
#include "wvcal/weight.hpp"

namespace wvcal {

/// Per-question answer selection. `chosen` is always a key of `tally`.
struct AggregationResult {
  std::string chosen;
  AnswerTally tally;
  std::string method;
};

using ScoreFn = std::function<double(double)>;

/// Clamp applied to per-question empirical accuracy in the optimal oracle.
inline constexpr double kOptimalQClamp = 1e-3;

AggregationResult majority_vote(const QuestionInstance& instance);

/// Answer of the highest-scoring response; the earliest index wins score ties.
AggregationResult best_of_n(const QuestionInstance& instance);

AggregationResult vanilla_weighted_vote(const QuestionInstance& instance);

/// argmax over answers of the summed weights. Negative sums compete as-is;
/// ties go to the lexicographically smallest answer.
AggregationResult weighted_vote(const QuestionInstance& instance, const WeightFunction& w);
AggregationResult weighted_vote(const QuestionInstance& instance, const ScoreFn& w,
                                std::string method = "weighted_vote");
AggregationResult weighted_vote_with_weights(const QuestionInstance& instance,
                                             std::span<const double> weights,
                                             std::string method);

/// Throws missing_gold when the instance has no gold answer.
bool pass_at_n(const QuestionInstance& instance);

/// Per-question oracle: KDEs and q_M fitted on this instance's own labels.
/// Throws missing_label if any response is unlabeled.
AggregationResult optimal_aggregate(const QuestionInstance& instance);

/// Optimal per-response weight: log f1(p) - log f0(p) + log(q (m_eff - 1) / (1 - q)).
ScoreFn optimal_weight(ScoreFn log_density_correct, ScoreFn log_density_incorrect,
                       double q_m, std::size_t m_eff);

/// Brute-force MAP selection: maximizes the full log-likelihood
///   sum_i log P(p_i | c_i(a)) + N_a log q + (L - N_a) log((1 - q) / (m_eff - 1))
/// over candidate answers a, without dropping answer-independent constants.
/// Throws invalid_parameter unless q_m lies in (0, 1).
std::string loglik_oracle(const QuestionInstance& instance, double q_m,
                          const ScoreFn& log_density_correct,
                          const ScoreFn& log_density_incorrect);

}  // namespace wvcal
