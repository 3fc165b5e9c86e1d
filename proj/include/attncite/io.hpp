#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace attncite::io {

// Throw Error(kMissingInput) when the file cannot be opened.
std::string read_text(const std::filesystem::path& path);
std::vector<unsigned char> read_bytes(const std::filesystem::path& path);

// Creates parent directories as needed.
void write_text(const std::filesystem::path& path, std::string_view text);
void write_bytes(const std::filesystem::path& path, std::span<const unsigned char> bytes);

// Non-blank lines of a newline-delimited file.
std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace attncite::io
