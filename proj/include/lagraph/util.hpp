#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace lagraph {

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view data);
/// FNV-1a as 16 lower-case hex digits.
std::string fnv1a_hex(std::string_view data);

/// Reads a whole file; throws lagraph::Error when it cannot be opened.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

std::string to_upper(std::string_view s);
std::string to_lower(std::string_view s);

} // namespace lagraph
