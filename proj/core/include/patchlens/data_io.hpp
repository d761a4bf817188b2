#pragma once

#include "patchlens/filter_bank.hpp"
#include "patchlens/image.hpp"
#include "patchlens/patch_engine.hpp"
#include "patchlens/types.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace patchlens {

// ---------------------------------------------------------------------------
// CIFAR-10 binary batches.
//
// No header; a sequence of 3073-byte records:
//   byte 0         label (0-9)
//   bytes 1..3072  R plane, G plane, B plane, each 32x32 row-major
// Pixels are divided by 255 unless PixelScale::raw is requested.
// ---------------------------------------------------------------------------
inline constexpr std::size_t kCifarRecordBytes = 3073;
inline constexpr int kCifarSide = 32;
inline constexpr int kCifarChannels = 3;

enum class PixelScale { unit, raw };

const std::array<std::string, 10>& cifar10_class_names();

LabeledImageSet decode_cifar10(std::span<const std::uint8_t> bytes, PixelScale scale = PixelScale::unit);
std::vector<std::uint8_t> encode_cifar10(const LabeledImageSet& set, PixelScale scale = PixelScale::unit);

LabeledImageSet load_cifar10_batch(const std::filesystem::path& path, PixelScale scale = PixelScale::unit);
// Concatenates batches in the given order.
LabeledImageSet load_cifar10_batches(std::span<const std::filesystem::path> paths,
                                     PixelScale scale = PixelScale::unit);

// Two-class dataset. Either `images` holds raw images awaiting patching, or
// `patches` holds the average-patch matrix directly (synthetic data).
struct BinaryDataset {
    LabeledImageSet images;
    AvgPatchMatrix patches;
    Vector y;
    std::array<std::size_t, 2> class_counts{0, 0};

    bool has_patches() const { return patches.rows() > 0; }
    bool balanced() const {
        const auto a = class_counts[0], b = class_counts[1];
        return (a > b ? a - b : b - a) <= 1;
    }
};

// class_a -> y = 0 (first block), class_b -> y = 1 (second block); order kept within a class.
BinaryDataset make_binary_subset(const LabeledImageSet& set, int class_a, int class_b);

// Computes `patches` from `images` if not already present.
void ensure_avg_patches(BinaryDataset& dataset, int kernel, int stride = 1);

struct SharedMeanOptions {
    std::size_t n_per_class = 100;
    int dim = 27;
    double spread = 0.1;
    double base_mean = 0.5;
    std::uint64_t seed = 0;
    int channels = 3;
    int kernel = 3;
};

// Balanced synthetic average-patch matrix whose two class means coincide
// exactly: class-0 rows are N(base_mean, spread^2 I); class-1 rows are
// independent draws re-centred onto the class-0 empirical mean.
BinaryDataset gen_shared_mean_dataset(const SharedMeanOptions& options);

// 3-channel images that repeat a 3x3 tile whose 27 entries sum to zero (one
// N(0,1) tile per image, re-centred). Every 3x3 window then contains each tile
// entry once, so all 3x3 patches lie in the zero-sum subspace: their span has
// rank at most 26 and the all-ones direction is unreachable. Labels alternate 0, 1.
LabeledImageSet gen_zero_sum_periodic_images(int n_images, int side, std::uint64_t seed);

// Adds epsilon * U.col(dir_index) to every row with y == 1.
Matrix shift_class_mean(const Matrix& K, const Vector& y, const PcaBasis& basis, int dir_index,
                        double epsilon);

struct LabelSource {
    enum class Kind { true_labels, bernoulli, expectation };
    Kind kind = Kind::true_labels;
    std::uint64_t seed = 0;

    static LabelSource truth() { return {Kind::true_labels, 0}; }
    static LabelSource coin_flips(std::uint64_t seed) { return {Kind::bernoulli, seed}; }
    static LabelSource mean() { return {Kind::expectation, 0}; }
};

LabelSource parse_label_source(std::string_view text, std::uint64_t seed);

// true_labels copies `truth` (which must have n entries); bernoulli draws fair
// coins from the seeded stream; expectation returns the constant 0.5 vector.
Vector make_labels(const LabelSource& source, std::size_t n, const Vector& truth = {});

// Average-patch matrix CSV:
//   patchlens-avgpatch v1
//   N,d,c,k
//   N rows of: label,v_1,...,v_d
struct LabeledPatchMatrix {
    AvgPatchMatrix patches;
    Vector labels;
};
std::string format_avg_patch_matrix(const AvgPatchMatrix& patches, const Vector& labels);
LabeledPatchMatrix parse_avg_patch_matrix(const std::string& text);
void export_avg_patch_matrix(const AvgPatchMatrix& patches, const Vector& labels,
                             const std::filesystem::path& path);
LabeledPatchMatrix import_avg_patch_matrix(const std::filesystem::path& path);

}  // namespace patchlens
