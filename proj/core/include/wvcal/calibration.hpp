#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wvcal/core.hpp"
#include "wvcal/weight.hpp"

namespace wvcal {

inline constexpr std::size_t kCalibratorBins = 10;
inline constexpr double kQmClamp = 1e-3;
inline constexpr int kArtifactVersion = 1;

/// g(p): Laplace-smoothed correctness rate of the equal-width bin holding p.
/// Edges are right-exclusive except the last bin, which includes 1.
struct BinnedCalibrator {
  std::array<double, kCalibratorBins + 1> bin_edges{};
  std::array<double, kCalibratorBins> bin_rates{};
  double global_rate = 0.5;

  std::size_t bin_index(double p) const;
  double operator()(double p) const { return bin_rates[bin_index(p)]; }

  friend bool operator==(const BinnedCalibrator&, const BinnedCalibrator&) = default;
};

BinnedCalibrator fit_binned_calibrator(const Dataset& cal);

/// Mean of g over the instance's scores, clamped to [1e-3, 1 - 1e-3].
double estimate_q_m(const BinnedCalibrator& calibrator, const QuestionInstance& instance);

/// ln(q (m_eff - 1) / (1 - q)).
double llm_signal_term(double q_m, std::size_t m_eff);

enum class OffsetFamily { logit, linear };

std::string_view to_string(OffsetFamily family) noexcept;
OffsetFamily offset_family_from_string(std::string_view name);
WeightFunction offset_weight(OffsetFamily family, double b);

/// Candidate offsets: 0.01..0.99 for logit, -1.00..1.00 for linear, step 0.01.
std::vector<double> offset_grid(OffsetFamily family);

/// Fraction of questions whose weighted vote under w_b equals gold.
double offset_accuracy(const Dataset& cal, OffsetFamily family, double b);

/// offset_accuracy at every point of offset_grid(family), in grid order.
std::vector<double> offset_accuracy_curve(const Dataset& cal, OffsetFamily family);

struct CalibrationArtifact {
  WeightKind weight_kind = WeightKind::logit_offset;
  std::optional<double> offset;                 // offset kinds
  std::shared_ptr<const KdePair> densities;     // kde_ratio
  BinnedCalibrator calibrator;
  std::map<std::string, std::string> metadata;

  /// Resolves the weight for one test question. For kde_ratio the LLM term
  /// is computed from this question's q_M estimate and answer count.
  WeightFunction weight_for(const QuestionInstance& instance) const;

  /// Short method label: kde_wv, logit_wv or linear_wv.
  std::string label() const;
};

bool operator==(const CalibrationArtifact& a, const CalibrationArtifact& b);

/// Pooled global KDEs of correct and incorrect scores plus the q_M
/// calibrator. Throws calibration_degenerate if either class is empty.
CalibrationArtifact fit_kde_weight(const Dataset& cal);

/// Grid search over b maximizing calibration accuracy; the smallest maximizer
/// wins.
CalibrationArtifact grid_search_offset(const Dataset& cal, OffsetFamily family);

/// Canonical JSON (sorted keys, shortest round-trip doubles, trailing newline).
std::string serialize_artifact(const CalibrationArtifact& artifact);
/// Throws parse (with byte position) or version errors.
CalibrationArtifact parse_artifact(std::string_view text);

void save_artifact(const CalibrationArtifact& artifact, const std::filesystem::path& path);
CalibrationArtifact load_artifact(const std::filesystem::path& path);

}  // namespace wvcal
