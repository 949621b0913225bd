#include "wvcal/dataset_io.hpp"

#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "wvcal/error.hpp"
#include "wvcal/io.hpp"

namespace wvcal::io {

using nlohmann::json;

namespace {

struct LineError {
  std::string message;
};

std::optional<std::string> optional_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw LineError{std::string("'") + key + "' must be a string or null"};
  return it->get<std::string>();
}

QuestionInstance parse_question(const json& obj) {
  if (!obj.is_object()) throw LineError{"line is not a JSON object"};
  QuestionInstance q;
  auto id = obj.find("question_id");
  if (id == obj.end() || !id->is_string()) throw LineError{"'question_id' must be a string"};
  q.question_id = id->get<std::string>();
  if (q.question_id.empty()) throw LineError{"'question_id' is empty"};
  try {
    if (auto gold = optional_string(obj, "gold")) q.gold = canonicalize_answer(*gold);
  } catch (const Error& e) {
    throw LineError{std::string("gold: ") + e.what()};
  }

  auto rs = obj.find("responses");
  if (rs == obj.end() || !rs->is_array()) throw LineError{"'responses' must be an array"};
  if (rs->empty()) throw LineError{"'responses' is empty (L must be at least 1)"};
  for (std::size_t i = 0; i < rs->size(); ++i) {
    const auto& r = (*rs)[i];
    const std::string at = "response " + std::to_string(i) + ": ";
    if (!r.is_object()) throw LineError{at + "not a JSON object"};
    auto answer = r.find("answer");
    if (answer == r.end() || !answer->is_string()) throw LineError{at + "'answer' must be a string"};
    auto score = r.find("score");
    if (score == r.end() || !score->is_number()) throw LineError{at + "'score' must be a number"};
    ScoredResponse out;
    try {
      out.answer = canonicalize_answer(answer->get<std::string>());
      out.score = clamp_score(score->get<double>());
    } catch (const Error& e) {
      throw LineError{at + e.what()};
    }
    auto label = r.find("label");
    if (label != r.end() && !label->is_null()) {
      if (!label->is_boolean()) throw LineError{at + "'label' must be a boolean or null"};
      out.label = label->get<bool>();
    }
    try {
      out.reasoning = optional_string(r, "reasoning");
    } catch (const LineError& e) {
      throw LineError{at + e.message};
    }
    q.responses.push_back(std::move(out));
  }
  return q;
}

json question_to_json(const QuestionInstance& q) {
  json responses = json::array();
  for (const auto& r : q.responses) {
    responses.push_back({
        {"answer", r.answer},
        {"score", r.score},
        {"label", r.label ? json(*r.label) : json(nullptr)},
        {"reasoning", r.reasoning ? json(*r.reasoning) : json(nullptr)},
    });
  }
  return {
      {"question_id", q.question_id},
      {"gold", q.gold ? json(*q.gold) : json(nullptr)},
      {"responses", std::move(responses)},
  };
}

std::string question_lines(const Dataset& dataset) {
  std::string out;
  for (const auto& q : dataset.instances) {
    out += question_to_json(q).dump();
    out += '\n';
  }
  return out;
}

}  // namespace

ParsedDataset parse_dataset(std::string_view text, Role role) {
  ParsedDataset result;
  result.dataset.role = role;
  std::set<std::string> ids;
  std::size_t line_no = 0;
  bool seen_content = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      result.diagnostics.push_back({line_no, "invalid JSON at column " + std::to_string(e.byte)});
      seen_content = true;
      continue;
    }

    if (obj.is_object() && obj.size() == 1 && obj.contains("metadata")) {
      if (seen_content) {
        result.diagnostics.push_back({line_no, "metadata record must be the first line"});
      } else if (!obj["metadata"].is_object()) {
        result.diagnostics.push_back({line_no, "'metadata' must be an object"});
      } else {
        for (const auto& [k, v] : obj["metadata"].items()) {
          result.dataset.metadata[k] = v.is_string() ? v.get<std::string>() : v.dump();
        }
      }
      seen_content = true;
      continue;
    }
    seen_content = true;

    QuestionInstance q;
    try {
      q = parse_question(obj);
    } catch (const LineError& e) {
      result.diagnostics.push_back({line_no, e.message});
      continue;
    }
    if (!ids.insert(q.question_id).second) {
      result.diagnostics.push_back({line_no, "duplicate question_id '" + q.question_id + "'"});
    }
    if (role == Role::calibration && !q.gold) {
      result.diagnostics.push_back({line_no, "calibration question without gold answer"});
    }
    for (std::size_t i = 0; i < q.responses.size(); ++i) {
      const auto& r = q.responses[i];
      const std::string at = "response " + std::to_string(i) + ": ";
      if (role == Role::calibration && !r.label) {
        result.diagnostics.push_back({line_no, at + "missing label in calibration data"});
      }
      if (q.gold && r.label && *r.label != (r.answer == *q.gold)) {
        result.diagnostics.push_back({line_no, at + "label disagrees with gold answer"});
      }
    }
    result.response_count += q.responses.size();
    result.dataset.instances.push_back(std::move(q));
  }
  return result;
}

Dataset load_dataset(const std::filesystem::path& path, Role role) {
  auto parsed = parse_dataset(read_file(path), role);
  if (!parsed.ok()) {
    std::string msg = path.string() + ": " + std::to_string(parsed.diagnostics.size()) +
                      " problem(s)";
    for (std::size_t i = 0; i < std::min<std::size_t>(parsed.diagnostics.size(), 5); ++i) {
      msg += "\n  " + format_diagnostic(parsed.diagnostics[i]);
    }
    throw Error(Errc::invalid_input, msg);
  }
  if (parsed.dataset.instances.empty()) {
    throw Error(Errc::invalid_input, path.string() + ": dataset has no questions");
  }
  return std::move(parsed.dataset);
}

std::string serialize_dataset(const Dataset& dataset) {
  std::string out;
  if (!dataset.metadata.empty()) {
    out += json{{"metadata", dataset.metadata}}.dump();
    out += '\n';
  }
  out += question_lines(dataset);
  return out;
}

std::string dataset_hash(const Dataset& dataset) {
  return hex64(fnv1a64(question_lines(dataset)));
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_dataset(dataset));
}

std::string format_diagnostic(const Diagnostic& d) {
  return "line " + std::to_string(d.line) + ": " + d.message;
}

}  // namespace wvcal::io
