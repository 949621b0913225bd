#include "wvcal/synth.hpp"

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "wvcal/error.hpp"
#include "wvcal/rng.hpp"

namespace wvcal::synth {

using nlohmann::json;

namespace {

void check_law(const BetaLaw& law, const char* what) {
  if (!(law.alpha > 0.0) || !(law.beta > 0.0) || !std::isfinite(law.alpha) ||
      !std::isfinite(law.beta)) {
    throw Error(Errc::invalid_input, std::string(what) + ": Beta parameters must be positive");
  }
}

double draw_beta(std::mt19937_64& rng, const BetaLaw& law) {
  std::gamma_distribution<double> ga(law.alpha, 1.0), gb(law.beta, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  if (!(x + y > 0.0)) return 0.5;
  return x / (x + y);
}

std::string question_id(std::size_t index) {
  std::string digits = std::to_string(index);
  if (digits.size() < 6) digits.insert(0, 6 - digits.size(), '0');
  return "q" + digits;
}

json law_json(const BetaLaw& law) { return json{{"alpha", law.alpha}, {"beta", law.beta}}; }

BetaLaw law_from(const json& j) {
  if (j.is_array() && j.size() == 2) return {j[0].get<double>(), j[1].get<double>()};
  return {j.at("alpha").get<double>(), j.at("beta").get<double>()};
}

}  // namespace

void validate(const SynthConfig& config) {
  if (config.num_questions == 0) throw Error(Errc::invalid_input, "num_questions must be positive");
  if (config.responses_per_question == 0) {
    throw Error(Errc::invalid_input, "responses_per_question must be positive");
  }
  if (config.answer_universe < 2) throw Error(Errc::invalid_input, "answer_universe must be at least 2");
  if (const auto* q = std::get_if<double>(&config.difficulty)) {
    if (!(*q >= 0.0 && *q <= 1.0)) throw Error(Errc::invalid_input, "fixed q must lie in [0, 1]");
  } else {
    check_law(std::get<BetaLaw>(config.difficulty), "difficulty");
  }
  check_law(config.score_law_correct, "score_law_correct");
  check_law(config.score_law_incorrect, "score_law_incorrect");
}

SynthOutput generate(const SynthConfig& config) {
  validate(config);
  SynthOutput out;
  out.dataset.role = Role::calibration;
  out.dataset.instances.reserve(config.num_questions);
  out.true_q.reserve(config.num_questions);
  const auto universe = static_cast<int>(config.answer_universe);

  for (std::size_t i = 0; i < config.num_questions; ++i) {
    auto rng = derive_stream(config.seed, i);
    double q = 0.0;
    if (const auto* fixed = std::get_if<double>(&config.difficulty)) {
      q = *fixed;
    } else {
      q = draw_beta(rng, std::get<BetaLaw>(config.difficulty));
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> pick_gold(0, universe - 1);
    std::uniform_int_distribution<int> pick_offset(1, universe - 1);
    const int gold_token = pick_gold(rng);
    const std::string gold = std::to_string(gold_token);

    QuestionInstance inst;
    inst.question_id = question_id(i);
    inst.gold = gold;
    inst.responses.reserve(config.responses_per_question);
    for (std::size_t r = 0; r < config.responses_per_question; ++r) {
      const bool correct = unit(rng) < q;
      ScoredResponse resp;
      resp.answer = correct ? gold : std::to_string((gold_token + pick_offset(rng)) % universe);
      resp.score = clamp_score(
          draw_beta(rng, correct ? config.score_law_correct : config.score_law_incorrect));
      resp.label = correct;
      inst.responses.push_back(std::move(resp));
    }
    out.dataset.instances.push_back(std::move(inst));
    out.true_q.push_back(q);
  }
  out.dataset.metadata["source"] = "synth";
  out.dataset.metadata["synth_config"] = to_json(config).dump();
  return out;
}

Dataset generate_dataset(const SynthConfig& config) { return generate(config).dataset; }

double beta_log_pdf(double p, const BetaLaw& law) {
  const double log_beta_fn =
      std::lgamma(law.alpha) + std::lgamma(law.beta) - std::lgamma(law.alpha + law.beta);
  return (law.alpha - 1.0) * std::log(p) + (law.beta - 1.0) * std::log1p(-p) - log_beta_fn;
}

double analytic_prm_term(const SynthConfig& config, double p) {
  return beta_log_pdf(p, config.score_law_correct) - beta_log_pdf(p, config.score_law_incorrect);
}

double analytic_weight(const SynthConfig& config, double q, double p) {
  if (!(q > 0.0 && q < 1.0)) throw Error(Errc::invalid_parameter, "q must lie in (0, 1)");
  if (!(p > 0.0 && p < 1.0)) throw Error(Errc::domain, "p must lie in (0, 1)");
  const double m = static_cast<double>(config.answer_universe);
  return analytic_prm_term(config, p) + std::log(q * (m - 1.0) / (1.0 - q));
}

json to_json(const SynthConfig& c) {
  json difficulty;
  if (const auto* q = std::get_if<double>(&c.difficulty)) {
    difficulty = json{{"fixed", *q}};
  } else {
    difficulty = json{{"beta", law_json(std::get<BetaLaw>(c.difficulty))}};
  }
  return json{
      {"num_questions", c.num_questions},
      {"responses_per_question", c.responses_per_question},
      {"difficulty", difficulty},
      {"score_law_correct", law_json(c.score_law_correct)},
      {"score_law_incorrect", law_json(c.score_law_incorrect)},
      {"answer_universe", c.answer_universe},
      {"seed", c.seed},
  };
}

SynthConfig config_from_json(const json& j) {
  SynthConfig c;
  try {
    if (j.contains("num_questions")) c.num_questions = j.at("num_questions").get<std::size_t>();
    if (j.contains("responses_per_question")) {
      c.responses_per_question = j.at("responses_per_question").get<std::size_t>();
    }
    if (j.contains("difficulty")) {
      const auto& d = j.at("difficulty");
      if (d.is_number()) {
        c.difficulty = d.get<double>();
      } else if (d.contains("fixed")) {
        c.difficulty = d.at("fixed").get<double>();
      } else {
        c.difficulty = law_from(d.at("beta"));
      }
    }
    if (j.contains("score_law_correct")) c.score_law_correct = law_from(j.at("score_law_correct"));
    if (j.contains("score_law_incorrect")) c.score_law_incorrect = law_from(j.at("score_law_incorrect"));
    if (j.contains("answer_universe")) c.answer_universe = j.at("answer_universe").get<std::size_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_input, std::string("bad synth config: ") + e.what());
  }
  validate(c);
  return c;
}

}  // namespace wvcal::synth
