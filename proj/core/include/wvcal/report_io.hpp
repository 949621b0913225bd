#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

#include "wvcal/eval.hpp"

namespace wvcal::io {

using Metadata = std::map<std::string, std::string>;

// CSV outputs start with one "# metadata: {...}" comment line followed by a
// header row. JSON envelopes are {"kind": ..., "metadata": {...}, ...}.

std::string scaling_csv(const eval::ScalingReport& report);
std::string scaling_json(const eval::ScalingReport& report);
/// Reads the JSON envelope written by scaling_json.
eval::ScalingReport parse_scaling_json(std::string_view text);

std::string sweep_csv(const eval::SweepReport& report, const Metadata& metadata);
std::string sweep_json(const eval::SweepReport& report, const Metadata& metadata);

std::string weight_gap_csv(const eval::WeightGapTable& table, const Metadata& metadata);
std::string weight_gap_json(const eval::WeightGapTable& table, const Metadata& metadata);

std::string qm_mae_csv(const eval::QmMae& result, const Metadata& metadata);
std::string qm_mae_json(const eval::QmMae& result, const Metadata& metadata);

std::string matched_csv(const std::string& method_a, const std::string& method_b,
                        std::optional<std::size_t> n, const Metadata& metadata);
std::string matched_json(const std::string& method_a, const std::string& method_b,
                         std::optional<std::size_t> n, const Metadata& metadata);

/// Comment line that opens every CSV report.
std::string csv_metadata_line(const Metadata& metadata);

}  // namespace wvcal::io
