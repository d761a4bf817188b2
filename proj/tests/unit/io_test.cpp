#include "patchlens/io.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <filesystem>
#include <limits>

namespace patchlens::io {
namespace {

TEST(FormatDouble, RoundTripsExactly) {
    const Vector v = testing::random_vector(2000, 3, 1e3);
    for (Index i = 0; i < v.size(); ++i) {
        const double x = v(i) * std::pow(10.0, static_cast<double>(i % 40) - 20.0);
        EXPECT_EQ(parse_double(format_double(x), 1), x);
    }
    EXPECT_EQ(parse_double(format_double(std::numeric_limits<double>::denorm_min()), 1),
              std::numeric_limits<double>::denorm_min());
    EXPECT_EQ(format_double(0.1), "0.1");
}

TEST(FormatDouble, RejectsNonFinite) {
    EXPECT_THROW(format_double(std::numeric_limits<double>::infinity()), NumericError);
}

TEST(ParseDouble, RejectsGarbageWithLineNumber) {
    try {
        parse_double("1.5x", 7);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 7u);
    }
    EXPECT_THROW(parse_double("", 1), ParseError);
    EXPECT_THROW(parse_double("nan", 1), ParseError);
    EXPECT_EQ(parse_double("+2", 1), 2.0);
}

TEST(SplitLines, RejectsCrlf) {
    EXPECT_EQ(split_lines("a\nb\n").size(), 2u);
    EXPECT_THROW(split_lines("a\r\nb\n"), ParseError);
}

TEST(NumericCsv, HeaderAndRaggedRows) {
    static constexpr std::array<std::string_view, 2> header = {"a", "b"};
    const auto t = parse_numeric_csv("a,b\n1,2\n3,4\n", header);
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_EQ(t.rows[1][0], 3.0);
    EXPECT_THROW(parse_numeric_csv("a,c\n1,2\n", header), ParseError);
    try {
        parse_numeric_csv("a,b\n1,2\n3\n", header);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}

TEST(AtomicWrite, ReplacesFileAndLeavesNoTemp) {
    const auto dir = std::filesystem::temp_directory_path() / "patchlens_io_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "out.txt";
    write_file_atomic(path, "first");
    write_file_atomic(path, "second");
    EXPECT_EQ(read_text_file(path), "second");
    EXPECT_FALSE(std::filesystem::exists(dir / "out.txt.tmp"));
    std::filesystem::remove_all(dir);
}

TEST(Hash, Fnv1aKnownVector) {
    // FNV-1a 64 of "a" is af63dc4c8601ec8c.
    EXPECT_EQ(hex64(fnv1a64(std::string_view("a"))), "af63dc4c8601ec8c");
}

}  // namespace
}  // namespace patchlens::io
