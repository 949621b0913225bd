#include "wvcal/report_io.hpp"

#include <nlohmann/json.hpp>

#include "wvcal/error.hpp"
#include "wvcal/io.hpp"

namespace wvcal::io {

using nlohmann::json;

namespace {

std::string envelope(const char* kind, const Metadata& metadata, json body) {
  body["kind"] = kind;
  body["metadata"] = metadata;
  return body.dump(2) + "\n";
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string csv_metadata_line(const Metadata& metadata) {
  return "# metadata: " + json(metadata).dump() + "\n";
}

std::string scaling_csv(const eval::ScalingReport& report) {
  std::string out = csv_metadata_line(report.metadata);
  out += "method,n,mean_accuracy,std_error,trials\n";
  for (const auto& r : report.rows) {
    out += csv_field(r.method) + "," + std::to_string(r.n) + "," + format_double(r.mean_accuracy) +
           "," + format_double(r.std_error) + "," + std::to_string(r.trials) + "\n";
  }
  return out;
}

std::string scaling_json(const eval::ScalingReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"method", r.method},
                    {"n", r.n},
                    {"mean_accuracy", r.mean_accuracy},
                    {"std_error", r.std_error},
                    {"trials", r.trials}});
  }
  return envelope("scaling", report.metadata, json{{"rows", rows}});
}

eval::ScalingReport parse_scaling_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::parse, "report parse error at byte " + std::to_string(e.byte));
  }
  try {
    if (j.at("kind").get<std::string>() != "scaling") {
      throw Error(Errc::invalid_input, "not a scaling report");
    }
    eval::ScalingReport report;
    report.metadata = j.at("metadata").get<Metadata>();
    for (const auto& r : j.at("rows")) {
      report.rows.push_back({r.at("method").get<std::string>(), r.at("n").get<std::size_t>(),
                             r.at("mean_accuracy").get<double>(), r.at("std_error").get<double>(),
                             r.at("trials").get<std::size_t>()});
    }
    return report;
  } catch (const json::exception& e) {
    throw Error(Errc::parse, std::string("malformed scaling report: ") + e.what());
  }
}

std::string sweep_csv(const eval::SweepReport& report, const Metadata& metadata) {
  std::string out = csv_metadata_line(metadata);
  out += "family,b,accuracy,best\n";
  for (const auto& r : report.rows) {
    out += report.family + "," + format_double(r.b) + "," + format_double(r.accuracy) + "," +
           (r.b == report.best_b ? "1" : "0") + "\n";
  }
  return out;
}

std::string sweep_json(const eval::SweepReport& report, const Metadata& metadata) {
  json rows = json::array();
  for (const auto& r : report.rows) rows.push_back({{"b", r.b}, {"accuracy", r.accuracy}});
  return envelope("sweep", metadata,
                  json{{"family", report.family}, {"best_b", report.best_b}, {"rows", rows}});
}

std::string weight_gap_csv(const eval::WeightGapTable& table, const Metadata& metadata) {
  std::string out = csv_metadata_line(metadata);
  out += "curve,p,log_ratio\n";
  for (std::size_t k = 0; k < table.grid.size(); ++k) {
    out += "global," + format_double(table.grid[k]) + "," + format_double(table.global_curve[k]) + "\n";
  }
  for (const auto& c : table.question_curves) {
    for (std::size_t k = 0; k < table.grid.size(); ++k) {
      out += csv_field(c.question_id) + "," + format_double(table.grid[k]) + "," +
             format_double(c.values[k]) + "\n";
    }
  }
  return out;
}

std::string weight_gap_json(const eval::WeightGapTable& table, const Metadata& metadata) {
  json curves = json::array();
  for (const auto& c : table.question_curves) {
    curves.push_back({{"question_id", c.question_id},
                      {"values", c.values},
                      {"sup_gap", eval::sup_gap(c.values, table.global_curve)}});
  }
  return envelope("weight_gap", metadata,
                  json{{"grid", table.grid},
                       {"global", table.global_curve},
                       {"questions", curves},
                       {"skipped_degenerate", table.skipped_degenerate}});
}

std::string qm_mae_csv(const eval::QmMae& r, const Metadata& metadata) {
  return csv_metadata_line(metadata) + "mae_calibrated,mae_global,questions\n" +
         format_double(r.mae_calibrated) + "," + format_double(r.mae_global) + "," +
         std::to_string(r.questions) + "\n";
}

std::string qm_mae_json(const eval::QmMae& r, const Metadata& metadata) {
  return envelope("qm_mae", metadata,
                  json{{"mae_calibrated", r.mae_calibrated},
                       {"mae_global", r.mae_global},
                       {"questions", r.questions}});
}

std::string matched_csv(const std::string& a, const std::string& b, std::optional<std::size_t> n,
                        const Metadata& metadata) {
  return csv_metadata_line(metadata) + "method_a,method_b,matched_n\n" + csv_field(a) + "," +
         csv_field(b) + "," + (n ? std::to_string(*n) : std::string()) + "\n";
}

std::string matched_json(const std::string& a, const std::string& b, std::optional<std::size_t> n,
                         const Metadata& metadata) {
  return envelope("matched_compute", metadata,
                  json{{"method_a", a}, {"method_b", b}, {"matched_n", n ? json(*n) : json(nullptr)}});
}

}  // namespace wvcal::io
