#include "cli.hpp"

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "wvcal/aggregators.hpp"
#include "wvcal/calibration.hpp"
#include "wvcal/dataset_io.hpp"
#include "wvcal/error.hpp"
#include "wvcal/eval.hpp"
#include "wvcal/io.hpp"
#include "wvcal/report_io.hpp"
#include "wvcal/synth.hpp"

namespace wvcal::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Resolved options shared by all subcommands. Paths and thread counts are
// deliberately absent from the echoed config: outputs must not depend on
// where files live or how many workers ran.
struct RunConfig {
  std::string command;
  std::string data;
  std::string calib;
  std::string out;
  std::string input;
  std::vector<std::string> methods;
  std::string family;
  std::string kind;
  std::string baseline;
  std::string role = "test";
  std::string format = "both";
  std::size_t n = 0;
  std::vector<std::size_t> ns;
  std::size_t trials = eval::kDefaultTrials;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  double grid_step = 0.01;

  // synth
  std::string synth_config;
  std::optional<std::size_t> questions;
  std::optional<std::size_t> responses;
  std::optional<double> fixed_q;
  std::vector<double> difficulty_beta;
  std::vector<double> correct_law;
  std::vector<double> incorrect_law;
  std::optional<std::size_t> universe;
  bool seed_given = false;
};

struct MethodSpec {
  std::string spec;   // echoed form (artifact paths replaced by content ids)
  std::string name;   // report label
  std::function<AggregationResult(const QuestionInstance&)> select;
  eval::Method method;
};

std::string artifact_id(const CalibrationArtifact& a) {
  return io::hex64(io::fnv1a64(serialize_artifact(a))).substr(0, 12);
}

std::string short_hash(const std::string& h) { return h.substr(0, 12); }

MethodSpec parse_method(const std::string& spec) {
  if (spec == "mv" || spec == "majority") {
    return {"mv", "majority_vote", [](const QuestionInstance& q) { return majority_vote(q); },
            eval::methods::majority_vote()};
  }
  if (spec == "bon") {
    return {"bon", "best_of_n", [](const QuestionInstance& q) { return best_of_n(q); },
            eval::methods::best_of_n()};
  }
  if (spec == "vanilla") {
    return {"vanilla", "vanilla_wv", [](const QuestionInstance& q) { return vanilla_weighted_vote(q); },
            eval::methods::vanilla_weighted_vote()};
  }
  if (spec == "optimal") {
    return {"optimal", "optimal", [](const QuestionInstance& q) { return optimal_aggregate(q); },
            eval::methods::optimal()};
  }
  if (spec == "pass") {
    return {"pass", "pass@n", nullptr, eval::methods::pass_at_n()};
  }
  if (spec.rfind("artifact:", 0) == 0) {
    const std::string path = spec.substr(9);
    auto artifact = std::make_shared<const CalibrationArtifact>(load_artifact(path));
    const std::string id = artifact_id(*artifact);
    return {"artifact:" + id, artifact->label(),
            [artifact](const QuestionInstance& q) {
              auto r = weighted_vote(q, artifact->weight_for(q));
              r.method = artifact->label();
              return r;
            },
            eval::methods::calibrated(artifact)};
  }
  throw Error(Errc::invalid_input, "unknown method '" + spec +
                                       "' (expected mv, bon, vanilla, optimal, pass or artifact:<path>)");
}

json echo(const RunConfig& c) {
  json j{{"command", c.command}, {"seed", c.seed}};
  return j;
}

io::Metadata base_metadata(const json& run_config) {
  return {{"run_config", run_config.dump()}, {"tool", "wvcal"}};
}

bool want_csv(const RunConfig& c) { return c.format == "csv" || c.format == "both"; }
bool want_json(const RunConfig& c) { return c.format == "json" || c.format == "both"; }

void ensure_dir(const std::string& dir) {
  if (dir.empty()) throw Error(Errc::invalid_input, "--out is required");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::io, "cannot create output directory '" + dir + "'");
}

void emit(const RunConfig& c, const std::string& stem, const std::string& csv, const std::string& js,
          std::ostream& out) {
  ensure_dir(c.out);
  if (want_csv(c)) {
    const auto path = fs::path(c.out) / (stem + ".csv");
    io::write_file_atomic(path, csv);
    out << "wrote " << path.string() << "\n";
  }
  if (want_json(c)) {
    const auto path = fs::path(c.out) / (stem + ".json");
    io::write_file_atomic(path, js);
    out << "wrote " << path.string() << "\n";
  }
}

std::string sanitize(std::string s) {
  for (char& ch : s) {
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_' && ch != '-') ch = '-';
  }
  return s;
}

Dataset load(const RunConfig& c, Role role) {
  if (c.data.empty()) throw Error(Errc::invalid_input, "--data is required");
  return io::load_dataset(c.data, role);
}

int cmd_validate(const RunConfig& c, std::ostream& out, std::ostream& err) {
  if (c.data.empty()) throw Error(Errc::invalid_input, "--data is required");
  const Role role = c.role == "calibration" ? Role::calibration : Role::test;
  auto parsed = io::parse_dataset(io::read_file(c.data), role);
  for (const auto& d : parsed.diagnostics) err << c.data << ":" << io::format_diagnostic(d) << "\n";
  std::size_t labeled = 0;
  for (const auto& q : parsed.dataset.instances) {
    for (const auto& r : q.responses) labeled += r.label.has_value();
  }
  out << (parsed.ok() ? "valid" : "invalid") << ": " << parsed.dataset.instances.size()
      << " questions, " << parsed.response_count << " responses, " << labeled << " labeled, "
      << parsed.diagnostics.size() << " problems\n";
  return parsed.ok() ? 0 : 1;
}

synth::BetaLaw law_from(const std::vector<double>& v, const char* flag) {
  if (v.size() != 2) throw Error(Errc::invalid_input, std::string(flag) + " expects two values a,b");
  return {v[0], v[1]};
}

int cmd_synth(const RunConfig& c, std::ostream& out) {
  if (c.out.empty()) throw Error(Errc::invalid_input, "--out is required");
  synth::SynthConfig cfg;
  if (!c.synth_config.empty()) cfg = synth::config_from_json(json::parse(io::read_file(c.synth_config)));
  if (c.questions) cfg.num_questions = *c.questions;
  if (c.responses) cfg.responses_per_question = *c.responses;
  if (c.fixed_q) cfg.difficulty = *c.fixed_q;
  if (!c.difficulty_beta.empty()) cfg.difficulty = law_from(c.difficulty_beta, "--difficulty-beta");
  if (!c.correct_law.empty()) cfg.score_law_correct = law_from(c.correct_law, "--correct");
  if (!c.incorrect_law.empty()) cfg.score_law_incorrect = law_from(c.incorrect_law, "--incorrect");
  if (c.universe) cfg.answer_universe = *c.universe;
  if (c.seed_given || c.synth_config.empty()) cfg.seed = c.seed;

  auto data = synth::generate_dataset(cfg);
  json rc = echo(c);
  rc["seed"] = cfg.seed;
  rc["synth_config"] = synth::to_json(cfg);
  data.metadata["run_config"] = rc.dump();
  io::save_dataset(data, c.out);
  out << "wrote " << c.out << " (" << data.instances.size() << " questions, dataset "
      << short_hash(io::dataset_hash(data)) << ")\n";
  return 0;
}

int cmd_calibrate(const RunConfig& c, std::ostream& out) {
  if (c.out.empty()) throw Error(Errc::invalid_input, "--out is required");
  const auto data = load(c, Role::calibration);
  CalibrationArtifact artifact;
  if (c.family == "kde") {
    artifact = fit_kde_weight(data);
  } else if (c.family == "logit" || c.family == "linear") {
    artifact = grid_search_offset(data, offset_family_from_string(c.family));
  } else {
    throw Error(Errc::invalid_input, "--family must be kde, logit or linear");
  }
  json rc = echo(c);
  rc["family"] = c.family;
  artifact.metadata["source_dataset_hash"] = io::dataset_hash(data);
  artifact.metadata["seed"] = std::to_string(c.seed);
  artifact.metadata["run_config"] = rc.dump();
  save_artifact(artifact, c.out);
  out << "wrote " << c.out << " (" << to_string(artifact.weight_kind);
  if (artifact.offset) out << ", b = " << io::format_double(*artifact.offset);
  out << ")\n";
  return 0;
}

int cmd_aggregate(const RunConfig& c, std::ostream& out) {
  if (c.out.empty()) throw Error(Errc::invalid_input, "--out is required");
  if (c.methods.size() != 1) throw Error(Errc::invalid_input, "aggregate takes exactly one --method");
  const auto data = load(c, Role::test);
  auto spec = parse_method(c.methods.front());
  if (!spec.select) throw Error(Errc::invalid_input, "method '" + spec.spec + "' does not select answers");
  if (spec.spec == "optimal") {
    for (const auto& q : data.instances) {
      for (const auto& r : q.responses) {
        if (!r.label) {
          throw Error(Errc::missing_label, "method 'optimal' needs labeled responses; question '" +
                                               q.question_id + "' has unlabeled ones");
        }
      }
    }
  }

  json rc = echo(c);
  rc["method"] = spec.spec;
  rc["dataset_hash"] = io::dataset_hash(data);
  const auto meta = base_metadata(rc);

  json rows = json::array();
  std::string csv = io::csv_metadata_line(meta) + "question_id,chosen,weight_sum,votes\n";
  for (const auto& q : data.instances) {
    const auto result = spec.select(q);
    const auto& entry = result.tally.entries.at(result.chosen);
    csv += q.question_id + "," + result.chosen + "," + io::format_double(entry.weight_sum) + "," +
           std::to_string(entry.count) + "\n";
    rows.push_back({{"question_id", q.question_id},
                    {"chosen", result.chosen},
                    {"weight_sum", entry.weight_sum},
                    {"votes", entry.count}});
  }
  if (c.format == "json") {
    io::write_file_atomic(c.out, json{{"kind", "aggregate"}, {"metadata", meta}, {"method", spec.name}, {"rows", rows}}.dump(2) + "\n");
  } else {
    io::write_file_atomic(c.out, csv);
  }
  out << "wrote " << c.out << " (" << data.instances.size() << " choices, " << spec.name << ")\n";
  return 0;
}

int cmd_evaluate(const RunConfig& c, std::ostream& out) {
  const auto data = load(c, Role::test);
  std::vector<std::string> requested = c.methods;
  if (requested.empty()) requested = {"mv", "bon", "vanilla"};
  std::vector<eval::Method> methods;
  std::vector<std::string> echoed;
  std::set<std::string> names;
  for (const auto& s : requested) {
    auto spec = parse_method(s);
    if (!names.insert(spec.name).second) {
      spec.method = eval::Method(spec.name + "@" + spec.spec.substr(spec.spec.find(':') + 1),
                                 [m = spec.method](const QuestionInstance& q) { return m.prepare(q); });
    }
    echoed.push_back(spec.spec);
    methods.push_back(std::move(spec.method));
  }
  const auto ns = c.ns.empty() ? eval::default_budgets(data) : c.ns;
  eval::HarnessOptions opts{c.trials, c.seed, c.threads};
  auto report = eval::scaling_curve(data, methods, ns, opts);

  json rc = echo(c);
  rc["methods"] = echoed;
  rc["ns"] = ns;
  rc["trials"] = c.trials;
  const std::string hash = io::dataset_hash(data);
  rc["dataset_hash"] = hash;
  for (const auto& [k, v] : base_metadata(rc)) report.metadata[k] = v;

  std::string stem = "scaling";
  for (const auto& m : methods) stem += "_" + sanitize(m.name());
  stem += "_" + short_hash(hash) + "_s" + std::to_string(c.seed);
  emit(c, stem, io::scaling_csv(report), io::scaling_json(report), out);
  return 0;
}

int cmd_sweep(const RunConfig& c, std::ostream& out) {
  const auto data = load(c, Role::calibration);
  const auto family = offset_family_from_string(c.family);
  const auto report = eval::offset_sweep(data, family);
  json rc = echo(c);
  rc["family"] = report.family;
  const std::string hash = io::dataset_hash(data);
  rc["dataset_hash"] = hash;
  auto meta = base_metadata(rc);
  meta["best_b"] = io::format_double(report.best_b);
  const std::string stem = "sweep_" + report.family + "_" + short_hash(hash) + "_s" + std::to_string(c.seed);
  emit(c, stem, io::sweep_csv(report, meta), io::sweep_json(report, meta), out);
  out << "best b = " << io::format_double(report.best_b) << "\n";
  return 0;
}

int cmd_report(const RunConfig& c, std::ostream& out) {
  json rc = echo(c);
  rc["kind"] = c.kind;
  if (c.kind == "matched") {
    if (c.input.empty()) throw Error(Errc::invalid_input, "--input (a scaling report .json) is required");
    if (c.methods.size() != 1 || c.baseline.empty()) {
      throw Error(Errc::invalid_input, "matched needs one --method and a --baseline");
    }
    const std::string text = io::read_file(c.input);
    const auto report = io::parse_scaling_json(text);
    const auto n = eval::matched_compute(report, c.methods.front(), c.baseline);
    rc["method"] = c.methods.front();
    rc["baseline"] = c.baseline;
    rc["input_hash"] = io::hex64(io::fnv1a64(text));
    const auto meta = base_metadata(rc);
    const std::string stem = "matched_" + sanitize(c.methods.front()) + "_vs_" + sanitize(c.baseline) + "_" +
                             short_hash(rc["input_hash"].get<std::string>()) + "_s" + std::to_string(c.seed);
    emit(c, stem, io::matched_csv(c.methods.front(), c.baseline, n, meta),
         io::matched_json(c.methods.front(), c.baseline, n, meta), out);
    out << "matched n = " << (n ? std::to_string(*n) : std::string("never")) << "\n";
    return 0;
  }
  if (c.kind == "qm_mae" || c.kind == "weight_gap") {
    if (c.calib.empty()) throw Error(Errc::invalid_input, "--calib (an artifact) is required");
    const auto data = load(c, Role::calibration);
    const auto artifact = load_artifact(c.calib);
    const std::string hash = io::dataset_hash(data);
    rc["dataset_hash"] = hash;
    rc["artifact_id"] = artifact_id(artifact);
    if (c.kind == "qm_mae") {
      const auto result = eval::qm_mae(data, artifact.calibrator);
      const auto meta = base_metadata(rc);
      const std::string stem = "qm_mae_" + short_hash(hash) + "_s" + std::to_string(c.seed);
      emit(c, stem, io::qm_mae_csv(result, meta), io::qm_mae_json(result, meta), out);
      out << "mae_calibrated = " << io::format_double(result.mae_calibrated)
          << ", mae_global = " << io::format_double(result.mae_global) << "\n";
      return 0;
    }
    if (!(c.grid_step > 0.0 && c.grid_step < 0.5)) throw Error(Errc::invalid_input, "--grid-step must lie in (0, 0.5)");
    std::vector<double> grid;
    const auto steps = static_cast<int>(std::floor(1.0 / c.grid_step + 1e-9));
    for (int k = 1; k < steps; ++k) grid.push_back(k * c.grid_step);
    rc["grid_step"] = c.grid_step;
    const auto table = eval::weight_gap_report(data, artifact, grid);
    auto meta = base_metadata(rc);
    meta["skipped_degenerate"] = std::to_string(table.skipped_degenerate);
    const std::string stem = "weight_gap_" + short_hash(hash) + "_s" + std::to_string(c.seed);
    emit(c, stem, io::weight_gap_csv(table, meta), io::weight_gap_json(table, meta), out);
    out << table.question_curves.size() << " per-question curves, " << table.skipped_degenerate
        << " skipped\n";
    return 0;
  }
  throw Error(Errc::invalid_input, "--kind must be matched, qm_mae or weight_gap");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"wvcal: calibrated weighted-vote aggregation for scored answer ensembles"};
  app.require_subcommand(1);
  RunConfig c;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", c.seed, "Random seed (default 0)");
    sub->add_option("--threads", c.threads, "Worker threads (0 = all cores)");
  };
  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", c.format, "Output format")
        ->check(CLI::IsMember({"csv", "json", "both"}));
  };

  auto* validate = app.add_subcommand("validate", "Check a JSONL dataset");
  validate->add_option("--data", c.data, "Dataset path")->required();
  validate->add_option("--role", c.role, "Dataset role")->check(CLI::IsMember({"calibration", "test"}));

  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset");
  synth->add_option("--out", c.out, "Output JSONL path")->required();
  synth->add_option("--config", c.synth_config, "SynthConfig JSON file");
  synth->add_option("--questions", c.questions, "Number of questions");
  synth->add_option("--responses", c.responses, "Responses per question (L)");
  synth->add_option("--q", c.fixed_q, "Fixed generator accuracy q");
  synth->add_option("--difficulty-beta", c.difficulty_beta, "Per-question q ~ Beta(a,b)")->delimiter(',');
  synth->add_option("--correct", c.correct_law, "Correct score law Beta(a,b)")->delimiter(',');
  synth->add_option("--incorrect", c.incorrect_law, "Incorrect score law Beta(a,b)")->delimiter(',');
  synth->add_option("--m", c.universe, "Answer universe size");
  synth->add_option("--seed", c.seed, "Random seed (default 0)");
  synth->add_option("--threads", c.threads, "Worker threads (unused)");

  auto* calibrate = app.add_subcommand("calibrate", "Fit a weighting artifact");
  calibrate->add_option("--data", c.data, "Calibration dataset")->required();
  calibrate->add_option("--family", c.family, "Weight family")
      ->required()
      ->check(CLI::IsMember({"kde", "logit", "linear"}));
  calibrate->add_option("--out", c.out, "Artifact path")->required();
  add_common(calibrate);

  auto* aggregate = app.add_subcommand("aggregate", "Select an answer per question");
  aggregate->add_option("--data", c.data, "Test dataset")->required();
  aggregate->add_option("--method", c.methods, "mv|bon|vanilla|optimal|artifact:<path>")->required();
  aggregate->add_option("--out", c.out, "Output path")->required();
  add_format(aggregate);
  add_common(aggregate);

  auto* evaluate = app.add_subcommand("evaluate", "Accuracy-vs-budget scaling report");
  evaluate->add_option("--data", c.data, "Labeled test dataset")->required();
  evaluate->add_option("--method", c.methods, "Methods (comma separated or repeated)")->delimiter(',');
  evaluate->add_option("--ns", c.ns, "Sample budgets, ascending")->delimiter(',');
  evaluate->add_option("--n", c.n, "Single sample budget");
  evaluate->add_option("--trials", c.trials, "Trials per (method, n)");
  evaluate->add_option("--out", c.out, "Output directory")->required();
  add_format(evaluate);
  add_common(evaluate);

  auto* sweep = app.add_subcommand("sweep", "Offset grid sweep");
  sweep->add_option("--data", c.data, "Calibration dataset")->required();
  sweep->add_option("--family", c.family, "logit|linear")->required()->check(CLI::IsMember({"logit", "linear"}));
  sweep->add_option("--out", c.out, "Output directory")->required();
  add_format(sweep);
  add_common(sweep);

  auto* report = app.add_subcommand("report", "matched-compute, q_M error or weight-gap analysis");
  report->add_option("--kind", c.kind, "matched|qm_mae|weight_gap")
      ->required()
      ->check(CLI::IsMember({"matched", "qm_mae", "weight_gap"}));
  report->add_option("--input", c.input, "Scaling report JSON (matched)");
  report->add_option("--method", c.methods, "Method to test (matched)");
  report->add_option("--baseline", c.baseline, "Reference method (matched)");
  report->add_option("--data", c.data, "Labeled dataset (qm_mae, weight_gap)");
  report->add_option("--calib", c.calib, "Calibration artifact (qm_mae, weight_gap)");
  report->add_option("--grid-step", c.grid_step, "Score grid step (weight_gap)");
  report->add_option("--out", c.out, "Output directory")->required();
  add_format(report);
  add_common(report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    c.seed_given = synth->count("--seed") > 0;
    if (evaluate->parsed() && c.n != 0) {
      if (!c.ns.empty()) throw Error(Errc::invalid_input, "give either --n or --ns, not both");
      c.ns = {c.n};
    }
    if (validate->parsed()) return c.command = "validate", cmd_validate(c, out, err);
    if (synth->parsed()) return c.command = "synth", cmd_synth(c, out);
    if (calibrate->parsed()) return c.command = "calibrate", cmd_calibrate(c, out);
    if (aggregate->parsed()) return c.command = "aggregate", cmd_aggregate(c, out);
    if (evaluate->parsed()) return c.command = "evaluate", cmd_evaluate(c, out);
    if (sweep->parsed()) return c.command = "sweep", cmd_sweep(c, out);
    if (report->parsed()) return c.command = "report", cmd_report(c, out);
  } catch (const Error& e) {
    err << "wvcal: " << to_string(e.code()) << " error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    err << "wvcal: parse error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "wvcal: internal error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace wvcal::cli
