#include "patchlens/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

namespace patchlens::io {

std::string format_double(double value) {
    if (!std::isfinite(value)) throw NumericError("cannot format non-finite value");
    std::array<char, 64> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) throw Error("format_double: conversion failed");
    return std::string(buf.data(), end);
}

double parse_double(std::string_view cell, std::size_t line) {
    if (cell.empty()) throw ParseError("empty numeric cell", line);
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw ParseError("non-numeric cell '" + std::string(cell) + "'", line);
    if (!std::isfinite(value)) throw ParseError("non-finite value '" + std::string(cell) + "'", line);
    return value;
}

long long parse_integer(std::string_view cell, std::size_t line) {
    long long value = 0;
    const char* last = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(cell.data(), last, value);
    if (cell.empty() || ec != std::errc{} || ptr != last)
        throw ParseError("expected an integer, got '" + std::string(cell) + "'", line);
    return value;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return cells;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r')
            throw ParseError("CRLF line ending; files must use LF", lines.size() + 1);
        lines.push_back(line);
        start = nl + 1;
    }
    return lines;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "' for reading");
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) throw Error("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw Error("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
    }
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (std::uint8_t b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a64(std::string_view text) {
    return fnv1a64(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string hex64(std::uint64_t value) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xf];
        value >>= 4;
    }
    return out;
}

std::string hash_file(const std::filesystem::path& path) {
    const auto bytes = read_binary_file(path);
    return hex64(fnv1a64(bytes));
}

CsvTable parse_numeric_csv(std::string_view text, std::span<const std::string_view> expected_header) {
    const auto lines = split_lines(text);
    if (lines.empty()) throw ParseError("empty file", 1);
    const auto header = split_csv(lines[0]);
    bool matches = header.size() == expected_header.size();
    for (std::size_t i = 0; matches && i < header.size(); ++i) matches = header[i] == expected_header[i];
    if (!matches) {
        std::string want;
        for (std::size_t i = 0; i < expected_header.size(); ++i)
            want += (i ? "," : "") + std::string(expected_header[i]);
        throw ParseError("header mismatch, expected '" + want + "'", 1);
    }
    CsvTable table;
    for (auto h : header) table.header.emplace_back(h);
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto cells = split_csv(lines[li]);
        if (cells.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) + " cells, got " +
                                 std::to_string(cells.size()),
                             li + 1);
        std::vector<double> row;
        row.reserve(cells.size());
        for (auto c : cells) row.push_back(parse_double(c, li + 1));
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace patchlens::io
