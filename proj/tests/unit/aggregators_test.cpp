#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support/oracles.hpp"
#include "wvcal/aggregators.hpp"
#include "wvcal/calibration.hpp"
#include "wvcal/error.hpp"

namespace wvcal {
namespace {

using testing::make_instance;

TEST(MajorityVote, Examples) {
  EXPECT_EQ(majority_vote(make_instance({{"A", .5}, {"A", .5}, {"B", .5}})).chosen, "A");
  EXPECT_EQ(majority_vote(make_instance({{"B", .5}, {"A", .5}})).chosen, "A");
  EXPECT_EQ(majority_vote(make_instance({{"B", .5}})).chosen, "B");
}

TEST(BestOfN, Examples) {
  EXPECT_EQ(best_of_n(make_instance({{"A", .2}, {"B", .9}, {"C", .5}})).chosen, "B");
  EXPECT_EQ(best_of_n(make_instance({{"A", .7}, {"B", .7}})).chosen, "A");
  EXPECT_EQ(best_of_n(make_instance({{"B", .7}, {"A", .7}})).chosen, "B");  // earliest index, not token
  EXPECT_EQ(best_of_n(make_instance({{"C", .1}})).chosen, "C");
}

TEST(VanillaWeightedVote, Examples) {
  EXPECT_EQ(vanilla_weighted_vote(make_instance({{"A", .4}, {"A", .4}, {"B", .9}})).chosen, "B");
  EXPECT_EQ(vanilla_weighted_vote(make_instance({{"A", .4}, {"A", .4}, {"B", .7}})).chosen, "A");
  EXPECT_EQ(vanilla_weighted_vote(make_instance({{"A", .5}})).chosen, "A");
}

TEST(WeightedVote, NegativeSumsCompete) {
  ScoreFn w = [](double p) { return p > 0.5 ? -0.1 : -1.0; };
  EXPECT_EQ(weighted_vote(make_instance({{"A", .9}, {"B", .1}}), w).chosen, "A");
  EXPECT_EQ(weighted_vote(make_instance({{"A", .1}, {"A", .1}, {"B", .9}}), w).chosen, "B");
  EXPECT_EQ(weighted_vote(make_instance({{"A", .4}, {"B", .1}}), WeightFunction::linear_offset(0.5)).chosen,
            "A");
  // All-zero weights tie; the smallest token wins.
  EXPECT_EQ(weighted_vote(make_instance({{"B", .5}, {"A", .5}, {"B", .5}}),
                          WeightFunction::linear_offset(0.5))
                .chosen,
            "A");
}

TEST(WeightedVote, ChosenIsAlwaysATallyKey) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    auto q = testing::random_instance(rng, 8, 4);
    auto r = weighted_vote(q, WeightFunction::logit_offset(0.6));
    EXPECT_TRUE(r.tally.entries.count(r.chosen));
    EXPECT_EQ(r.chosen, testing::brute_weighted_vote(q, WeightFunction::logit_offset(0.6)));
  }
}

TEST(WeightedVote, ConstantWeightsEqualMajority) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 300; ++i) {
    auto q = testing::random_instance(rng, 10, 4);
    EXPECT_EQ(weighted_vote(q, WeightFunction::constant_one()).chosen, majority_vote(q).chosen);
  }
}

TEST(PassAtN, Examples) {
  EXPECT_TRUE(pass_at_n(make_instance({{"B", .5}, {"A", .5}}, std::string("A"))));
  EXPECT_FALSE(pass_at_n(make_instance({{"B", .5}, {"C", .5}}, std::string("A"))));
  EXPECT_TRUE(pass_at_n(make_instance({{"A", .5}}, std::string("A"))));
  try {
    pass_at_n(make_instance({{"A", .5}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::missing_gold);
  }
}

TEST(PassAtN, MonotoneInPrefixLength) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    auto q = testing::random_instance(rng, 12, 5);
    bool prev = false;
    for (std::size_t n = 1; n <= q.responses.size(); ++n) {
      auto prefix = q;
      prefix.responses.resize(n);
      const bool cur = pass_at_n(prefix);
      EXPECT_TRUE(!prev || cur);
      prev = cur;
    }
  }
}

TEST(OptimalAggregate, AllCorrectSingleAnswer) {
  auto q = make_instance({{"A", .9}, {"A", .2}, {"A", .6}}, std::string("A"));
  EXPECT_EQ(optimal_aggregate(q).chosen, "A");
}

TEST(OptimalAggregate, SymmetricComplementaryLabelsTieLexicographically) {
  // Mirror-image scores and one correct/one incorrect vote per answer: the
  // per-question densities are reflections, so both answers score the same.
  QuestionInstance q;
  q.question_id = "sym";
  q.gold = std::nullopt;
  q.responses = {make_response("B", 0.8, true), make_response("B", 0.2, false),
                 make_response("A", 0.8, true), make_response("A", 0.2, false)};
  EXPECT_EQ(optimal_aggregate(q).chosen, "A");
}

TEST(OptimalAggregate, RequiresLabels) {
  auto q = make_instance({{"A", .9}, {"B", .2}});
  try {
    optimal_aggregate(q);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::missing_label);
  }
}

// Independent route to the per-question oracle: fit the same per-question
// densities, then maximize the full log-likelihood with constants kept.
TEST(OptimalAggregate, MatchesLogLikelihoodOracleOnRandomInstances) {
  std::mt19937_64 rng(20240601);
  for (int i = 0; i < 1000; ++i) {
    auto q = testing::random_instance(rng, 8, 4, "r" + std::to_string(i));
    std::vector<double> correct, incorrect;
    for (const auto& r : q.responses) (*r.label ? correct : incorrect).push_back(r.score);
    const double frac = static_cast<double>(correct.size()) / static_cast<double>(q.responses.size());
    const double qm = std::clamp(frac, 1e-3, 1.0 - 1e-3);
    ScoreFn f1 = [](double) { return 0.0; }, f0 = [](double) { return 0.0; };
    if (!correct.empty() && !incorrect.empty()) {
      auto k1 = std::make_shared<KdeModel>(fit_kde(correct));
      auto k0 = std::make_shared<KdeModel>(fit_kde(incorrect));
      f1 = [k1](double p) { return log_density(*k1, p); };
      f0 = [k0](double p) { return log_density(*k0, p); };
    }
    ASSERT_EQ(optimal_aggregate(q).chosen, loglik_oracle(q, qm, f1, f0)) << "instance " << i;
  }
}

TEST(LoglikOracle, UniformDensitiesReduceToMajority) {
  std::mt19937_64 rng(8);
  ScoreFn zero = [](double) { return 0.0; };
  for (int i = 0; i < 300; ++i) {
    auto q = testing::random_instance(rng, 8, 4);
    EXPECT_EQ(loglik_oracle(q, 0.9, zero, zero), majority_vote(q).chosen);
  }
}

TEST(LoglikOracle, HalfReliabilityWithTwoAnswersIsPureRatioVote) {
  std::mt19937_64 rng(9);
  ScoreFn f1 = [](double p) { return std::log(2.0 * p); };
  ScoreFn f0 = [](double p) { return std::log(2.0 * (1.0 - p)); };
  ScoreFn ratio = [](double p) { return std::log(p / (1.0 - p)); };
  for (int i = 0; i < 300; ++i) {
    auto q = testing::random_instance(rng, 8, 2);
    if (unique_answers(q).size() != 2) continue;
    EXPECT_NEAR(llm_signal_term(0.5, 2), 0.0, 0.0);
    EXPECT_EQ(loglik_oracle(q, 0.5, f1, f0), weighted_vote(q, ratio).chosen);
  }
}

TEST(LoglikOracle, RejectsBadReliability) {
  auto q = make_instance({{"A", .5}});
  ScoreFn zero = [](double) { return 0.0; };
  for (double bad : {0.0, 1.0, -0.5, 1.2}) {
    try {
      loglik_oracle(q, bad, zero, zero);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::invalid_parameter);
    }
  }
}

TEST(AggregationProperties, ScaleInvariance) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  const auto w = WeightFunction::logit_offset(0.35);
  for (int i = 0; i < 300; ++i) {
    auto q = testing::random_instance(rng, 8, 4);
    const double c = scale(rng);
    ScoreFn scaled = [&](double p) { return c * w(p); };
    EXPECT_EQ(weighted_vote(q, w).chosen, weighted_vote(q, scaled).chosen);
  }
}

TEST(AggregationProperties, ShiftByLlmTermEqualsFullWeights) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  for (int i = 0; i < 300; ++i) {
    auto q = testing::random_instance(rng, 8, 4);
    const double qm = unit(rng);
    const double delta = llm_signal_term(qm, effective_answer_count(q));
    ScoreFn prm = [](double p) { return 3.0 * logit(p) - 0.4; };
    auto base = tally(q, prm);
    auto shifted = tally(q, [&](double p) { return prm(p) + delta; });
    for (const auto& [a, e] : base.entries) {
      EXPECT_NEAR(shifted.entries.at(a).weight_sum, e.weight_sum + e.count * delta, 1e-9);
    }
    ScoreFn full = optimal_weight([](double p) { return 3.0 * logit(p) - 0.4; },
                                  [](double) { return 0.0; }, qm, effective_answer_count(q));
    EXPECT_EQ(weighted_vote(q, [&](double p) { return prm(p) + delta; }).chosen,
              weighted_vote(q, full).chosen);
  }
}

}  // namespace
}  // namespace wvcal
