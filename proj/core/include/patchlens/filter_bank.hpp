#pragma once

#include "patchlens/types.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace patchlens {

// First-layer filters as rows of an M x d matrix, flattened channel-major then
// row-major (index = ch * k^2 + row * k + col).
struct FilterBank {
    Matrix filters;
    std::optional<double> sigma_init;
    int channels = 0;
    int kernel = 0;

    Index size() const { return filters.rows(); }
    Index dim() const { return filters.cols(); }
};

// Element-wise difference of two banks of identical shape (used to remove the
// initialization from a trained bank before profiling).
FilterBank subtract_banks(const FilterBank& trained, const FilterBank& init);

// Filter-bank CSV:
//   patchlens-filters v1
//   M,d,c,k
//   M rows of d comma-separated decimals
// Values are written in shortest round-trip form, so import(export(b)) == b exactly.
std::string format_filter_bank(const FilterBank& bank);
FilterBank parse_filter_bank(const std::string& text);

void export_filter_bank(const FilterBank& bank, const std::filesystem::path& path);
FilterBank import_filter_bank(const std::filesystem::path& path);

}  // namespace patchlens
