#pragma once

#include "patchlens/types.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace patchlens::io {

// Shortest decimal form that parses back to the identical double.
std::string format_double(double value);

// Parses a whole cell as a double. Throws ParseError tagged with `line`.
double parse_double(std::string_view cell, std::size_t line);
long long parse_integer(std::string_view cell, std::size_t line);

// Splits one CSV line on ','. No quoting support; none of our formats need it.
std::vector<std::string_view> split_csv(std::string_view line);

// Splits text into lines on '\n'. A trailing '\r' on a line is a parse error:
// every format here is LF-only. A final empty line (trailing newline) is dropped.
std::vector<std::string_view> split_lines(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path);

// Writes `contents` to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a64(std::string_view text);
std::string hex64(std::uint64_t value);

// Content hash of a file, as 16 hex digits.
std::string hash_file(const std::filesystem::path& path);

// Reads a CSV with a fixed header into columns of doubles.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};
CsvTable parse_numeric_csv(std::string_view text, std::span<const std::string_view> expected_header);

}  // namespace patchlens::io
