#include "wvcal/calibration.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "wvcal/aggregators.hpp"
#include "wvcal/error.hpp"
#include "wvcal/io.hpp"

namespace wvcal {

using nlohmann::json;

std::size_t BinnedCalibrator::bin_index(double p) const {
  const auto it = std::upper_bound(bin_edges.begin(), bin_edges.end(), p);
  const auto idx = std::distance(bin_edges.begin(), it) - 1;
  return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(idx, 0, kCalibratorBins - 1));
}

BinnedCalibrator fit_binned_calibrator(const Dataset& cal) {
  BinnedCalibrator out;
  for (std::size_t j = 0; j <= kCalibratorBins; ++j) {
    out.bin_edges[j] = static_cast<double>(j) / static_cast<double>(kCalibratorBins);
  }
  std::array<std::size_t, kCalibratorBins> seen{}, correct{};
  std::size_t total = 0, total_correct = 0;
  for (const auto& q : cal.instances) {
    for (const auto& r : q.responses) {
      if (!r.label) continue;
      const auto j = out.bin_index(r.score);
      ++seen[j];
      ++total;
      if (*r.label) {
        ++correct[j];
        ++total_correct;
      }
    }
  }
  if (total == 0) throw Error(Errc::invalid_input, "calibration set has no labeled responses");

  out.global_rate = (static_cast<double>(total_correct) + 1.0) / (static_cast<double>(total) + 2.0);
  for (std::size_t j = 0; j < kCalibratorBins; ++j) {
    out.bin_rates[j] = seen[j] == 0
                           ? out.global_rate
                           : (static_cast<double>(correct[j]) + 1.0) / (static_cast<double>(seen[j]) + 2.0);
  }
  return out;
}

double estimate_q_m(const BinnedCalibrator& calibrator, const QuestionInstance& instance) {
  if (instance.responses.empty()) throw Error(Errc::invalid_input, "q_M estimate needs responses");
  double sum = 0.0;
  for (const auto& r : instance.responses) sum += calibrator(r.score);
  const double mean = sum / static_cast<double>(instance.responses.size());
  return std::clamp(mean, kQmClamp, 1.0 - kQmClamp);
}

double llm_signal_term(double q_m, std::size_t m_eff) {
  if (!(q_m > 0.0 && q_m < 1.0)) throw Error(Errc::invalid_parameter, "q_M must lie in (0, 1)");
  if (m_eff < 2) throw Error(Errc::invalid_parameter, "m_eff must be at least 2");
  return std::log(q_m * static_cast<double>(m_eff - 1) / (1.0 - q_m));
}

std::string_view to_string(OffsetFamily family) noexcept {
  return family == OffsetFamily::logit ? "logit" : "linear";
}

OffsetFamily offset_family_from_string(std::string_view name) {
  if (name == "logit" || name == "logit_offset") return OffsetFamily::logit;
  if (name == "linear" || name == "linear_offset") return OffsetFamily::linear;
  throw Error(Errc::invalid_input, "unknown offset family '" + std::string(name) + "'");
}

WeightFunction offset_weight(OffsetFamily family, double b) {
  return family == OffsetFamily::logit ? WeightFunction::logit_offset(b)
                                       : WeightFunction::linear_offset(b);
}

std::vector<double> offset_grid(OffsetFamily family) {
  std::vector<double> grid;
  if (family == OffsetFamily::logit) {
    for (int k = 1; k <= 99; ++k) grid.push_back(static_cast<double>(k) / 100.0);
  } else {
    for (int k = -100; k <= 100; ++k) grid.push_back(static_cast<double>(k) / 100.0);
  }
  return grid;
}

namespace {

void require_gold(const Dataset& cal) {
  if (cal.instances.empty()) throw Error(Errc::invalid_input, "calibration set is empty");
  for (const auto& q : cal.instances) {
    if (!q.gold) {
      throw Error(Errc::missing_gold, "calibration question '" + q.question_id + "' has no gold");
    }
  }
}

}  // namespace

double offset_accuracy(const Dataset& cal, OffsetFamily family, double b) {
  require_gold(cal);
  const auto w = offset_weight(family, b);
  std::size_t hits = 0;
  for (const auto& q : cal.instances) {
    if (weighted_vote(q, w).chosen == *q.gold) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(cal.instances.size());
}

WeightFunction CalibrationArtifact::weight_for(const QuestionInstance& instance) const {
  switch (weight_kind) {
    case WeightKind::linear_offset: return WeightFunction::linear_offset(offset.value());
    case WeightKind::logit_offset: return WeightFunction::logit_offset(offset.value());
    case WeightKind::kde_ratio:
      return WeightFunction::kde_ratio(
          densities, llm_signal_term(estimate_q_m(calibrator, instance),
                                     effective_answer_count(instance)));
    default: break;
  }
  throw Error(Errc::invalid_artifact, "artifact has no usable weight kind");
}

std::string CalibrationArtifact::label() const {
  switch (weight_kind) {
    case WeightKind::kde_ratio: return "kde_wv";
    case WeightKind::logit_offset: return "logit_wv";
    case WeightKind::linear_offset: return "linear_wv";
    default: return std::string(to_string(weight_kind));
  }
}

bool operator==(const CalibrationArtifact& a, const CalibrationArtifact& b) {
  const bool same_densities =
      (a.densities == nullptr && b.densities == nullptr) ||
      (a.densities && b.densities && *a.densities == *b.densities);
  return a.weight_kind == b.weight_kind && a.offset == b.offset && same_densities &&
         a.calibrator == b.calibrator && a.metadata == b.metadata;
}

CalibrationArtifact fit_kde_weight(const Dataset& cal) {
  if (cal.instances.empty()) throw Error(Errc::invalid_input, "calibration set is empty");
  std::vector<double> correct, incorrect;
  for (const auto& q : cal.instances) {
    for (const auto& r : q.responses) {
      if (!r.label) {
        throw Error(Errc::missing_label, "calibration question '" + q.question_id +
                                             "' has an unlabeled response");
      }
      (*r.label ? correct : incorrect).push_back(r.score);
    }
  }
  if (correct.empty() || incorrect.empty()) {
    throw Error(Errc::calibration_degenerate,
                "KDE weighting needs both correct and incorrect responses; "
                "use a parametric family (logit or linear) instead");
  }
  CalibrationArtifact out;
  out.weight_kind = WeightKind::kde_ratio;
  out.densities = std::make_shared<const KdePair>(KdePair{fit_kde(correct), fit_kde(incorrect)});
  out.calibrator = fit_binned_calibrator(cal);
  out.metadata["kde_bandwidth_rule"] = "silverman";
  out.metadata["calibration_responses"] = std::to_string(correct.size() + incorrect.size());
  return out;
}

std::vector<double> offset_accuracy_curve(const Dataset& cal, OffsetFamily family) {
  require_gold(cal);
  std::vector<double> curve;
  for (double b : offset_grid(family)) curve.push_back(offset_accuracy(cal, family, b));
  return curve;
}

CalibrationArtifact grid_search_offset(const Dataset& cal, OffsetFamily family) {
  const auto grid = offset_grid(family);
  const auto curve = offset_accuracy_curve(cal, family);
  // First (smallest-b) maximizer.
  const auto best = std::max_element(curve.begin(), curve.end()) - curve.begin();
  const double best_b = grid[static_cast<std::size_t>(best)];
  const double best_acc = curve[static_cast<std::size_t>(best)];
  CalibrationArtifact out;
  out.weight_kind = family == OffsetFamily::logit ? WeightKind::logit_offset : WeightKind::linear_offset;
  out.offset = best_b;
  out.calibrator = fit_binned_calibrator(cal);
  out.metadata["grid_points"] = std::to_string(grid.size());
  out.metadata["grid_step"] = "0.01";
  out.metadata["calibration_accuracy"] = io::format_double(best_acc);
  return out;
}

namespace {

json kde_to_json(const KdeModel& m) {
  return json{{"bandwidth", m.bandwidth()}, {"centers", m.centers()}};
}

KdeModel kde_from_json(const json& j) {
  return KdeModel(j.at("centers").get<std::vector<double>>(), j.at("bandwidth").get<double>());
}

}  // namespace

std::string serialize_artifact(const CalibrationArtifact& a) {
  json params = json::object();
  if (a.weight_kind == WeightKind::kde_ratio) {
    if (!a.densities) throw Error(Errc::invalid_artifact, "KDE artifact without densities");
    params["kde_correct"] = kde_to_json(a.densities->correct);
    params["kde_incorrect"] = kde_to_json(a.densities->incorrect);
  } else {
    if (!a.offset) throw Error(Errc::invalid_artifact, "offset artifact without b");
    params["b"] = *a.offset;
  }
  json j{
      {"version", kArtifactVersion},
      {"weight_kind", to_string(a.weight_kind)},
      {"weight_params", params},
      {"calibrator",
       {{"bin_edges", a.calibrator.bin_edges},
        {"bin_rates", a.calibrator.bin_rates},
        {"global_rate", a.calibrator.global_rate}}},
      {"metadata", a.metadata},
  };
  return j.dump(2) + "\n";
}

CalibrationArtifact parse_artifact(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::parse, "artifact parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  try {
    if (!j.is_object()) throw Error(Errc::parse, "artifact is not a JSON object");
    const int version = j.at("version").get<int>();
    if (version != kArtifactVersion) {
      throw Error(Errc::version, "unsupported artifact version " + std::to_string(version));
    }
    CalibrationArtifact a;
    a.weight_kind = weight_kind_from_string(j.at("weight_kind").get<std::string>());
    const auto& params = j.at("weight_params");
    switch (a.weight_kind) {
      case WeightKind::kde_ratio:
        a.densities = std::make_shared<const KdePair>(
            KdePair{kde_from_json(params.at("kde_correct")), kde_from_json(params.at("kde_incorrect"))});
        break;
      case WeightKind::logit_offset:
      case WeightKind::linear_offset:
        a.offset = params.at("b").get<double>();
        offset_weight(a.weight_kind == WeightKind::logit_offset ? OffsetFamily::logit
                                                               : OffsetFamily::linear,
                      *a.offset);
        break;
      default:
        throw Error(Errc::version, "weight kind '" + std::string(to_string(a.weight_kind)) +
                                       "' is not a calibration artifact kind");
    }
    const auto& c = j.at("calibrator");
    a.calibrator.bin_edges = c.at("bin_edges").get<std::array<double, kCalibratorBins + 1>>();
    a.calibrator.bin_rates = c.at("bin_rates").get<std::array<double, kCalibratorBins>>();
    a.calibrator.global_rate = c.at("global_rate").get<double>();
    if (j.contains("metadata")) {
      a.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
    }
    return a;
  } catch (const json::exception& e) {
    throw Error(Errc::parse, std::string("malformed artifact: ") + e.what());
  }
}

void save_artifact(const CalibrationArtifact& artifact, const std::filesystem::path& path) {
  io::write_file_atomic(path, serialize_artifact(artifact));
}

CalibrationArtifact load_artifact(const std::filesystem::path& path) {
  return parse_artifact(io::read_file(path));
}

}  // namespace wvcal
