#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace walkup::io {

/// Shortest decimal text that parses back to the same double. NaN/inf are
/// written as "nan", "inf", "-inf".
[[nodiscard]] std::string format_number(double v);

/// Strict full-token double parse; returns false on junk or empty input.
[[nodiscard]] bool parse_number(std::string_view text, double& out);

[[nodiscard]] std::vector<std::string_view> split(std::string_view line, char sep);

[[nodiscard]] std::string_view trim(std::string_view s);

/// Writes via a sibling temporary file and rename, creating parent
/// directories. Throws UnreadableInput (reused as the generic I/O failure)
/// when the file cannot be written.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

[[nodiscard]] std::string read_file(const std::filesystem::path& path);

/// 64-bit FNV-1a, lowercase hex.
[[nodiscard]] std::string fnv1a_hex(std::string_view data);

/// SHA-256, lowercase hex.
[[nodiscard]] std::string sha256_hex(std::string_view data);

}  // namespace walkup::io
