#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "support/oracles.hpp"
#include "wvcal/core.hpp"
#include "wvcal/error.hpp"
#include "wvcal/weight.hpp"

namespace wvcal {
namespace {

using testing::make_instance;

TEST(CanonicalizeAnswer, TrimsAndCollapsesWhitespace) {
  EXPECT_EQ(canonicalize_answer(" 42 "), "42");
  EXPECT_EQ(canonicalize_answer("1/2"), "1/2");
  EXPECT_EQ(canonicalize_answer("a  b"), "a b");
  EXPECT_EQ(canonicalize_answer("\tx \n y\t"), "x y");
}

TEST(CanonicalizeAnswer, RejectsBlank) {
  try {
    canonicalize_answer("  \t ");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_answer);
  }
  EXPECT_THROW(canonicalize_answer(""), Error);
}

TEST(ClampScore, ClampsIntoOpenInterval) {
  EXPECT_EQ(clamp_score(0.5), 0.5);
  EXPECT_EQ(clamp_score(1.0), 1.0 - kScoreEpsilon);
  EXPECT_DOUBLE_EQ(clamp_score(1.0), 0.999999);
  EXPECT_EQ(clamp_score(-0.2), 1e-6);
}

TEST(ClampScore, RejectsNonFinite) {
  try {
    clamp_score(std::nan(""));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_score);
  }
  EXPECT_THROW(clamp_score(INFINITY), Error);
}

TEST(UniqueAnswers, FirstAppearanceOrder) {
  EXPECT_EQ(unique_answers(make_instance({{"A", .5}, {"B", .5}, {"A", .5}})),
            (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(unique_answers(make_instance({{"A", .5}, {"A", .5}, {"A", .5}})),
            (std::vector<std::string>{"A"}));
  EXPECT_EQ(unique_answers(make_instance({{"C", .5}, {"B", .5}, {"A", .5}})),
            (std::vector<std::string>{"C", "B", "A"}));
  EXPECT_EQ(effective_answer_count(make_instance({{"A", .5}})), 2u);
  EXPECT_EQ(effective_answer_count(make_instance({{"C", .5}, {"B", .5}, {"A", .5}})), 3u);
}

TEST(Tally, ConstantOne) {
  auto t = tally(make_instance({{"A", .9}, {"A", .1}, {"B", .5}}), WeightFunction::constant_one());
  EXPECT_EQ(t.entries.at("A").count, 2u);
  EXPECT_DOUBLE_EQ(t.entries.at("A").weight_sum, 2.0);
  EXPECT_EQ(t.entries.at("B").count, 1u);
  EXPECT_DOUBLE_EQ(t.entries.at("B").weight_sum, 1.0);
}

TEST(Tally, RawScore) {
  auto t = tally(make_instance({{"A", .9}, {"B", .5}}), WeightFunction::raw_score());
  EXPECT_DOUBLE_EQ(t.entries.at("A").weight_sum, 0.9);
  EXPECT_DOUBLE_EQ(t.entries.at("B").weight_sum, 0.5);
}

TEST(Tally, LinearOffset) {
  auto t = tally(make_instance({{"A", .5}, {"A", .5}, {"B", .9}}), WeightFunction::linear_offset(0.6));
  EXPECT_EQ(t.entries.at("A").count, 2u);
  EXPECT_NEAR(t.entries.at("A").weight_sum, -0.2, 1e-12);
  EXPECT_NEAR(t.entries.at("B").weight_sum, 0.3, 1e-12);
  EXPECT_EQ(t.total_count(), 3u);
}

TEST(Tally, WeightCountMismatchIsAnError) {
  auto q = make_instance({{"A", .5}});
  std::vector<double> w{1.0, 2.0};
  EXPECT_THROW(tally_weights(q, w), Error);
}

TEST(AnswerTally, ArgmaxTieGoesToSmallestToken) {
  auto t = tally(make_instance({{"B", .5}, {"A", .5}}), WeightFunction::constant_one());
  EXPECT_EQ(t.argmax_count(), "A");
  EXPECT_EQ(t.argmax_weight(), "A");
  EXPECT_THROW(AnswerTally{}.argmax_weight(), Error);
}

// Property checks over random instances.

TEST(TallyProperties, ConstantWeightsDegenerateToMajority) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    auto q = testing::random_instance(rng, 12, 5);
    auto t = tally(q, WeightFunction::constant_one());
    EXPECT_EQ(t.argmax_weight(), t.argmax_count());
    EXPECT_EQ(t.total_count(), q.responses.size());
  }
}

TEST(TallyProperties, PermutationInvariant) {
  std::mt19937_64 rng(12);
  const auto w = WeightFunction::logit_offset(0.4);
  for (int i = 0; i < 500; ++i) {
    auto q = testing::random_instance(rng, 12, 5);
    auto before = tally(q, w);
    std::shuffle(q.responses.begin(), q.responses.end(), rng);
    auto after = tally(q, w);
    ASSERT_EQ(before.entries.size(), after.entries.size());
    for (const auto& [answer, e] : before.entries) {
      EXPECT_EQ(e.count, after.entries.at(answer).count);
      // Summation order is canonical, so sums agree exactly.
      EXPECT_EQ(e.weight_sum, after.entries.at(answer).weight_sum);
    }
  }
}

TEST(TallyProperties, ZeroWeightResponseChangesNoSum) {
  std::mt19937_64 rng(13);
  const double b = 0.3;
  const auto w = WeightFunction::linear_offset(b);
  for (int i = 0; i < 300; ++i) {
    auto q = testing::random_instance(rng, 10, 4);
    auto before = tally(q, w);
    auto extended = q;
    extended.responses.push_back(make_response(q.responses.front().answer, b));
    ASSERT_EQ(w(b), 0.0);
    auto after = tally(extended, w);
    for (const auto& [answer, e] : before.entries) {
      EXPECT_NEAR(e.weight_sum, after.entries.at(answer).weight_sum, 1e-12);
    }
  }
}

TEST(CheckDataset, FlagsViolations) {
  Dataset d;
  auto q = make_instance({{"A", .5}, {"B", .5}}, std::string("A"), "q1");
  d.instances = {q, q};
  d.instances[1].responses[0].label = false;  // disagrees with gold
  d.instances[1].responses[1].label.reset();
  auto problems = check_dataset(d, Role::calibration);
  EXPECT_EQ(problems.size(), 3u);  // duplicate id, label mismatch, missing label
  EXPECT_THROW(require_valid(d, Role::calibration), Error);

  Dataset ok;
  ok.instances = {make_instance({{"A", .5}}, std::string("A"), "q1")};
  EXPECT_TRUE(check_dataset(ok, Role::calibration).empty());
}

}  // namespace
}  // namespace wvcal
