#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "wvcal/core.hpp"

namespace wvcal::synth {

struct BetaLaw {
  double alpha = 1.0;
  double beta = 1.0;

  friend bool operator==(const BetaLaw&, const BetaLaw&) = default;
};

/// Generator-verifier model over answer tokens "0".."m_true-1". Each question
/// draws its gold token uniformly; each response is correct with probability
/// q, otherwise a uniform pick among the m_true - 1 other tokens. The score is
/// drawn from the Beta law of the response's correctness class.
struct SynthConfig {
  std::size_t num_questions = 100;
  std::size_t responses_per_question = 8;
  /// Fixed q for every question, or a Beta law drawn per question.
  std::variant<double, BetaLaw> difficulty = 0.6;
  BetaLaw score_law_correct{2.0, 1.0};
  BetaLaw score_law_incorrect{1.0, 2.0};
  std::size_t answer_universe = 4;
  std::uint64_t seed = 0;

  friend bool operator==(const SynthConfig&, const SynthConfig&) = default;
};

/// Throws invalid_input. A fixed q may be 0 or 1 (degenerate generators).
void validate(const SynthConfig& config);

struct SynthOutput {
  Dataset dataset;
  std::vector<double> true_q;  // generator q per question, in dataset order
};

/// Deterministic given config.seed; question i uses its own stream.
SynthOutput generate(const SynthConfig& config);
Dataset generate_dataset(const SynthConfig& config);

double beta_log_pdf(double p, const BetaLaw& law);

/// Exact optimal weight for this generator:
///   ln Beta(p; correct) - ln Beta(p; incorrect) + ln(q (m_true - 1) / (1 - q)).
double analytic_weight(const SynthConfig& config, double q, double p);

/// Score-law log ratio alone (the LLM term omitted).
double analytic_prm_term(const SynthConfig& config, double p);

nlohmann::json to_json(const SynthConfig& config);
/// Missing keys keep their defaults.
SynthConfig config_from_json(const nlohmann::json& j);

}  // namespace wvcal::synth
