#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace stap {

// 64-bit FNV-1a. Stable across platforms; used for content hashes and the
// mock backend, never for anything security related.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string to_hex(std::uint64_t value, int width = 16);

// Random RFC 4122 version-4 UUID.
std::string make_uuid();

std::int64_t now_ms();

std::string_view trim_view(std::string_view s);
std::string trim(std::string_view s);
std::string rtrim(std::string_view s);
bool starts_with(std::string_view s, std::string_view prefix);

std::vector<std::string> split_lines(std::string_view text);
std::vector<std::string> split_whitespace(std::string_view text);

// Converts CRLF and lone CR to LF.
std::string normalize_newlines(std::string_view text);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// Value of an environment variable, or empty when unset.
std::string env_or(const char* name, std::string_view fallback = {});

} // namespace stap
