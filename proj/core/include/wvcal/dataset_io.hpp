#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "wvcal/core.hpp"

namespace wvcal::io {

// JSONL datasets hold one question per line:
//   {"question_id": str, "gold": str|null,
//    "responses": [{"answer": str, "score": float, "label": bool|null,
//                   "reasoning": str|null}, ...]}
// An optional first line {"metadata": {str: str, ...}} carries provenance.
// Answers and gold are canonicalized and scores clamped on load.

struct Diagnostic {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct ParsedDataset {
  Dataset dataset;
  std::vector<Diagnostic> diagnostics;
  std::size_t response_count = 0;

  bool ok() const noexcept { return diagnostics.empty(); }
};

/// Never throws on bad content; every violation becomes a diagnostic.
ParsedDataset parse_dataset(std::string_view text, Role role);

/// Throws Errc::invalid_input listing the first diagnostics when invalid.
Dataset load_dataset(const std::filesystem::path& path, Role role);

/// Deterministic JSONL text (sorted keys, shortest round-trip numbers).
std::string serialize_dataset(const Dataset& dataset);

/// Content identifier over the question lines only (metadata excluded).
std::string dataset_hash(const Dataset& dataset);

void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

std::string format_diagnostic(const Diagnostic& d);

}  // namespace wvcal::io
