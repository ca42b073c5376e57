#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace seqa {

using json = nlohmann::json;

namespace text {

std::string to_lower(std::string_view s);
std::string_view trim(std::string_view s);

/// Alphanumeric runs, lowercased. Everything else separates words.
std::vector<std::string> word_tokens(std::string_view s);

/// Whitespace-separated fields, untouched.
std::vector<std::string> split_whitespace(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

/// 64-bit FNV-1a; stable across platforms, unlike std::hash.
std::uint64_t fnv1a64(std::string_view s);
std::string hex64(std::uint64_t v);

/// Shortest of "%.2f" with trailing zeros removed ("30", "33.33").
std::string format_number(double v);

/// Number of UTF-8 code points.
std::size_t utf8_length(std::string_view s);

}  // namespace text

namespace jsonl {

/// Parses one JSON document per non-blank line. SchemaError names path:line.
std::vector<json> read_file(const std::filesystem::path& path);
std::vector<json> parse(std::string_view content, const std::string& source = "<memory>");

void write_file(const std::filesystem::path& path, const std::vector<json>& rows);
std::string dump(const std::vector<json>& rows);

}  // namespace jsonl

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace seqa
