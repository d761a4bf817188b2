#pragma once

#include "patchlens/image.hpp"
#include "patchlens/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace patchlens {

struct PatchGeometry {
    int channels = 1;
    int kernel = 3;
    int stride = 1;

    int dim() const { return channels * kernel * kernel; }
};

// Number of valid top-left corners for a k x k window moved by `stride`.
std::size_t patch_count(int height, int width, int kernel, int stride);

// n_patches x d, each row one flattened patch (channel-major, then row-major).
struct PatchMatrix {
    Matrix rows;
    PatchGeometry geometry;
};

// N x d; row i is the mean of all patches of image source_index[i].
struct AvgPatchMatrix {
    Matrix K;
    std::vector<std::size_t> source_index;
    PatchGeometry geometry;

    Index rows() const { return K.rows(); }
    Index dim() const { return K.cols(); }
};

enum class PcaPopulation { all_patches, avg_patch_rows };

std::string_view to_string(PcaPopulation population);
PcaPopulation parse_population(std::string_view text);

struct PcaBasis {
    Matrix U;            // d x d, eigenvectors as columns, descending eigenvalue
    Vector eigenvalues;  // length d, nonnegative, descending
    bool centered = true;
    Vector mean;         // removed before the eigendecomposition; zero if uncentered
    PcaPopulation population = PcaPopulation::all_patches;
    int channels = 0;
    int kernel = 0;

    Index dim() const { return U.rows(); }
    Vector component(Index i) const { return U.col(i); }
};

// Centered scatter statistics of a matrix expressed in PCA coordinates:
// K~^T K~ = diag(sigma_diag) + offdiag + mu_hat mu_hat^T, with
// mu_hat = sqrt(N) * column_mean(K~).
struct PatchStats {
    Vector sigma_diag;
    Vector mu_hat;
    Index count = 0;
    // max |off-diagonal| of the centered scatter, and its max |diagonal| for scale.
    double offdiag_residual = 0.0;
    double scatter_max = 0.0;
};

PatchMatrix extract_patches(const Image& image, int kernel, int stride = 1);

// Stacks the patches of every image in order. `max_images` limits the prefix used.
PatchMatrix extract_patches(const LabeledImageSet& set, int kernel, int stride = 1,
                            std::optional<std::size_t> max_images = std::nullopt);

Vector average_patch(const Image& image, int kernel, int stride = 1);
AvgPatchMatrix build_avg_patch_matrix(const LabeledImageSet& set, int kernel, int stride = 1);

// Running sums for the second moment of a stream of d-dimensional rows, so
// that all overlapping patches of a dataset can be fit without materializing
// the full patch matrix.
class MomentAccumulator {
public:
    explicit MomentAccumulator(Index dim);

    void add(const Vector& row);
    void add_rows(const Matrix& rows);
    void add_patches(const Image& image, int kernel, int stride = 1);

    Index dim() const { return sum_.size(); }
    std::uint64_t count() const { return count_; }
    Vector mean() const;
    // (1/n) X^T X, or the covariance (1/n) X^T X - m m^T when centered.
    Matrix second_moment(bool centered) const;

private:
    Matrix outer_;
    Vector sum_;
    std::uint64_t count_ = 0;
};

// PCA of (1/n) X^T X for X = rows (optionally centered). Requires >= 2 rows.
PcaBasis fit_pca(const Matrix& rows, bool centered,
                 PcaPopulation population = PcaPopulation::avg_patch_rows);
PcaBasis fit_pca(const MomentAccumulator& moments, bool centered,
                 PcaPopulation population = PcaPopulation::all_patches);

// Fits on all overlapping patches of `set`, or on `sample_count` patches drawn
// uniformly at random (seeded) when given.
PcaBasis fit_patch_pca(const LabeledImageSet& set, const PatchGeometry& geometry, bool centered,
                       std::optional<std::size_t> sample_count = std::nullopt,
                       std::uint64_t seed = 0);

// K~ = K U. K itself is not centered.
Matrix to_pca(const Matrix& K, const PcaBasis& basis);
Matrix from_pca(const Matrix& K_tilde, const PcaBasis& basis);

PatchStats second_moment_stats(const Matrix& K_tilde);

// Mean of the rows whose label equals `cls`.
Vector class_average_patch(const Matrix& K, const Vector& labels, int cls);

// Stable content hash of a basis (U, eigenvalues, mean, flags).
std::uint64_t fingerprint(const PcaBasis& basis);

// JSON: {version, c, k, centered, population, mean_vector, eigenvalues, U (row-major)}.
std::string basis_to_json(const PcaBasis& basis);
PcaBasis basis_from_json(std::string_view text);

}  // namespace patchlens
