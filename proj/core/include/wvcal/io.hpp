#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace wvcal::io {

/// Throws Errc::io when the file cannot be read.
std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// 64-bit FNV-1a; used for content identifiers and RNG stream keys.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// 16 lowercase hex digits.
std::string hex64(std::uint64_t value);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

}  // namespace wvcal::io
