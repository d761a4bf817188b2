#include "patchlens/filter_bank.hpp"

#include "patchlens/io.hpp"

namespace patchlens {

namespace {
constexpr std::string_view kMagic = "patchlens-filters v1";
}

FilterBank subtract_banks(const FilterBank& trained, const FilterBank& init) {
    if (trained.size() != init.size() || trained.dim() != init.dim())
        throw DimensionError("subtract_banks: shapes differ (" + std::to_string(trained.size()) + "x" +
                             std::to_string(trained.dim()) + " vs " + std::to_string(init.size()) +
                             "x" + std::to_string(init.dim()) + ")");
    FilterBank out = trained;
    out.filters -= init.filters;
    out.sigma_init.reset();
    return out;
}

std::string format_filter_bank(const FilterBank& bank) {
    if (bank.size() == 0) throw InvalidArgument("empty filter bank");
    if (!bank.filters.allFinite()) throw NumericError("filter bank contains non-finite values");
    std::string out;
    out += kMagic;
    out += '\n';
    out += std::to_string(bank.size()) + "," + std::to_string(bank.dim()) + "," +
           std::to_string(bank.channels) + "," + std::to_string(bank.kernel) + "\n";
    for (Index i = 0; i < bank.size(); ++i) {
        for (Index j = 0; j < bank.dim(); ++j) {
            if (j) out += ',';
            out += io::format_double(bank.filters(i, j));
        }
        out += '\n';
    }
    return out;
}

FilterBank parse_filter_bank(const std::string& text) {
    const auto lines = io::split_lines(text);
    if (lines.empty() || lines[0] != kMagic)
        throw ParseError("missing '" + std::string(kMagic) + "' header", 1);
    if (lines.size() < 2) throw ParseError("missing M,d,c,k header", 2);
    const auto dims = io::split_csv(lines[1]);
    if (dims.size() != 4) throw ParseError("expected M,d,c,k", 2);
    const long long m = io::parse_integer(dims[0], 2);
    const long long d = io::parse_integer(dims[1], 2);
    const long long c = io::parse_integer(dims[2], 2);
    const long long k = io::parse_integer(dims[3], 2);
    if (m == 0) throw ParseError("empty filter bank", 2);
    if (m < 0 || d <= 0 || c < 0 || k < 0) throw ParseError("negative or zero dimension", 2);
    if (c > 0 && k > 0 && c * k * k != d)
        throw ParseError("d=" + std::to_string(d) + " does not equal c*k^2=" + std::to_string(c * k * k), 2);

    const auto data_rows = static_cast<long long>(lines.size()) - 2;
    if (data_rows != m)
        throw ParseError("header declares " + std::to_string(m) + " rows but file has " +
                             std::to_string(data_rows),
                         data_rows < m ? lines.size() + 1 : static_cast<std::size_t>(m) + 3);

    FilterBank bank;
    bank.channels = static_cast<int>(c);
    bank.kernel = static_cast<int>(k);
    bank.filters.resize(m, d);
    for (long long i = 0; i < m; ++i) {
        const std::size_t line_no = static_cast<std::size_t>(i) + 3;
        const auto cells = io::split_csv(lines[static_cast<std::size_t>(i) + 2]);
        if (static_cast<long long>(cells.size()) != d)
            throw ParseError("row has " + std::to_string(cells.size()) + " values, expected " +
                                 std::to_string(d),
                             line_no);
        for (long long j = 0; j < d; ++j)
            bank.filters(i, j) = io::parse_double(cells[static_cast<std::size_t>(j)], line_no);
    }
    return bank;
}

void export_filter_bank(const FilterBank& bank, const std::filesystem::path& path) {
    io::write_file_atomic(path, format_filter_bank(bank));
}

FilterBank import_filter_bank(const std::filesystem::path& path) {
    return parse_filter_bank(io::read_text_file(path));
}

}  // namespace patchlens
