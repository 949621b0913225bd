#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wvcal/calibration.hpp"
#include "wvcal/core.hpp"
#include "wvcal/synth.hpp"

namespace wvcal::eval {

inline constexpr std::size_t kDefaultTrials = 50;

/// A selection strategy as seen by the harness. `prepare` runs once per
/// question on the full response pool (so per-response work can be cached);
/// the returned judge says whether a subsample, given as pool indices, is
/// solved.
class Method {
 public:
  using Judge =
      std::function<bool(const QuestionInstance& subsample, std::span<const std::size_t> pool_index)>;
  using Prepare = std::function<Judge(const QuestionInstance& pool)>;

  Method(std::string name, Prepare prepare) : name_(std::move(name)), prepare_(std::move(prepare)) {}

  const std::string& name() const noexcept { return name_; }
  Judge prepare(const QuestionInstance& pool) const { return prepare_(pool); }

 private:
  std::string name_;
  Prepare prepare_;
};

namespace methods {
Method majority_vote();
Method best_of_n();
Method vanilla_weighted_vote();
Method pass_at_n();
Method optimal();
Method calibrated(std::shared_ptr<const CalibrationArtifact> artifact, std::string name = {});
/// Weighted vote with the generator's exact weights; true_q maps question_id
/// to the generator q of that question.
Method analytic(const synth::SynthConfig& config, std::map<std::string, double> true_q);
}  // namespace methods

struct AccuracyEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t trials = 0;
};

struct ScalingRow {
  std::string method;
  std::size_t n = 0;
  double mean_accuracy = 0.0;
  double std_error = 0.0;
  std::size_t trials = 0;
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  std::map<std::string, std::string> metadata;

  std::vector<ScalingRow> rows_for(const std::string& method) const;
};

struct HarnessOptions {
  std::size_t trials = kDefaultTrials;
  std::uint64_t seed = 0;
  std::size_t threads = 1;  // 0 = hardware concurrency
};

/// Accuracy of one method on random size-n subsamples. Subsample t of
/// question Q is the first n entries of a permutation drawn from the stream
/// (seed, hash(question_id), t), kept in original response order; budgets are
/// therefore nested within a trial. When n equals every question's L only one
/// trial is run.
AccuracyEstimate subsample_accuracy(const Dataset& data, const Method& method, std::size_t n,
                                    const HarnessOptions& options);

/// Powers of two up to the smallest L, plus that L itself.
std::vector<std::size_t> default_budgets(const Dataset& data);

/// One row per (method, n). With `add_bounds`, pass@n is appended and, when
/// every response is labeled, the optimal oracle too (unless already present).
ScalingReport scaling_curve(const Dataset& data, std::vector<Method> methods,
                            const std::vector<std::size_t>& ns, const HarnessOptions& options,
                            bool add_bounds = true);

/// Smallest n at which method_a's mean accuracy reaches method_b's accuracy
/// at method_b's largest n; nullopt if never.
std::optional<std::size_t> matched_compute(const ScalingReport& report, const std::string& method_a,
                                           const std::string& method_b);

struct SweepRow {
  double b = 0.0;
  double accuracy = 0.0;
};

struct SweepReport {
  std::string family;
  std::vector<SweepRow> rows;
  double best_b = 0.0;
};

SweepReport offset_sweep(const Dataset& cal, OffsetFamily family);

struct QmMae {
  double mae_calibrated = 0.0;
  double mae_global = 0.0;
  std::size_t questions = 0;
};

QmMae qm_mae(const Dataset& data, const BinnedCalibrator& calibrator);

struct QuestionCurve {
  std::string question_id;
  std::vector<double> values;
};

struct WeightGapTable {
  std::vector<double> grid;
  std::vector<double> global_curve;
  std::vector<QuestionCurve> question_curves;
  std::size_t skipped_degenerate = 0;
};

/// Global PRM log-ratio vs per-question KDE log-ratios on a score grid.
/// Questions lacking either label class are skipped and counted.
WeightGapTable weight_gap_report(const Dataset& data, const CalibrationArtifact& artifact,
                                 std::span<const double> grid);

/// max_k |curve[k] - reference[k]|
double sup_gap(std::span<const double> curve, std::span<const double> reference);

}  // namespace wvcal::eval
