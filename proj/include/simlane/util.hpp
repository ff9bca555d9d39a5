#pragma once

#include <filesystem>
#include <string>

namespace simlane {

/// `%.9g`; the number format of every text export.
std::string format_number(double value);

std::string read_text_file(const std::filesystem::path& path);
/// Writes via a temporary sibling then renames.
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(const std::string& data);

}  // namespace simlane
