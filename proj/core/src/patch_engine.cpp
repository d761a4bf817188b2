#include "patchlens/patch_engine.hpp"

#include "patchlens/io.hpp"
#include "patchlens/jacobi.hpp"
#include "patchlens/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace patchlens {

namespace {

void check_window(const Image& image, int kernel, int stride) {
    if (kernel < 1) throw InvalidArgument("patch size must be >= 1");
    if (stride < 1) throw InvalidArgument("stride must be >= 1");
    if (kernel > image.height || kernel > image.width)
        throw InvalidArgument("patch size " + std::to_string(kernel) + " exceeds image size " +
                              std::to_string(image.height) + "x" + std::to_string(image.width));
}

// Writes the patch with top-left corner (top, left) into `out` (length c*k*k).
template <typename Out>
void copy_patch(const Image& image, int kernel, int top, int left, Out&& out) {
    Index idx = 0;
    for (int ch = 0; ch < image.channels; ++ch)
        for (int r = 0; r < kernel; ++r)
            for (int c = 0; c < kernel; ++c) out(idx++) = image.at(ch, top + r, left + c);
}

}  // namespace

std::string_view to_string(PcaPopulation population) {
    return population == PcaPopulation::all_patches ? "all_patches" : "avg_patch_rows";
}

PcaPopulation parse_population(std::string_view text) {
    if (text == "all_patches") return PcaPopulation::all_patches;
    if (text == "avg_patch_rows") return PcaPopulation::avg_patch_rows;
    throw InvalidArgument("unknown PCA population '" + std::string(text) + "'");
}

std::size_t patch_count(int height, int width, int kernel, int stride) {
    if (kernel < 1 || stride < 1 || kernel > height || kernel > width) return 0;
    const auto per_col = static_cast<std::size_t>((height - kernel) / stride + 1);
    const auto per_row = static_cast<std::size_t>((width - kernel) / stride + 1);
    return per_col * per_row;
}

PatchMatrix extract_patches(const Image& image, int kernel, int stride) {
    check_window(image, kernel, stride);
    PatchMatrix out;
    out.geometry = {image.channels, kernel, stride};
    const auto n = static_cast<Index>(patch_count(image.height, image.width, kernel, stride));
    out.rows.resize(n, out.geometry.dim());
    Index row = 0;
    for (int top = 0; top + kernel <= image.height; top += stride)
        for (int left = 0; left + kernel <= image.width; left += stride) {
            auto dst = out.rows.row(row++);
            copy_patch(image, kernel, top, left, [&](Index i) -> double& { return dst(i); });
        }
    return out;
}

PatchMatrix extract_patches(const LabeledImageSet& set, int kernel, int stride,
                            std::optional<std::size_t> max_images) {
    if (set.empty()) throw InvalidArgument("extract_patches: empty image set");
    const std::size_t used = std::min(set.size(), max_images.value_or(set.size()));
    const Image& first = set.images.front();
    check_window(first, kernel, stride);
    const auto per_image = static_cast<Index>(patch_count(first.height, first.width, kernel, stride));

    PatchMatrix out;
    out.geometry = {first.channels, kernel, stride};
    out.rows.resize(per_image * static_cast<Index>(used), out.geometry.dim());
    for (std::size_t i = 0; i < used; ++i)
        out.rows.middleRows(static_cast<Index>(i) * per_image, per_image) =
            extract_patches(set.images[i], kernel, stride).rows;
    return out;
}

Vector average_patch(const Image& image, int kernel, int stride) {
    check_window(image, kernel, stride);
    const int d = image.channels * kernel * kernel;
    Vector sum = Vector::Zero(d);
    Vector patch(d);
    std::size_t n = 0;
    for (int top = 0; top + kernel <= image.height; top += stride)
        for (int left = 0; left + kernel <= image.width; left += stride) {
            copy_patch(image, kernel, top, left, [&](Index i) -> double& { return patch(i); });
            sum += patch;
            ++n;
        }
    return sum / static_cast<double>(n);
}

AvgPatchMatrix build_avg_patch_matrix(const LabeledImageSet& set, int kernel, int stride) {
    set.validate();
    if (set.empty()) throw InvalidArgument("build_avg_patch_matrix: empty image set");
    AvgPatchMatrix out;
    out.geometry = {set.images.front().channels, kernel, stride};
    out.K.resize(static_cast<Index>(set.size()), out.geometry.dim());
    out.source_index.resize(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        out.K.row(static_cast<Index>(i)) = average_patch(set.images[i], kernel, stride).transpose();
        out.source_index[i] = i;
    }
    return out;
}

MomentAccumulator::MomentAccumulator(Index dim)
    : outer_(Matrix::Zero(dim, dim)), sum_(Vector::Zero(dim)) {
    if (dim < 1) throw InvalidArgument("MomentAccumulator: dimension must be >= 1");
}

void MomentAccumulator::add(const Vector& row) {
    if (row.size() != dim()) throw DimensionError("MomentAccumulator: row dimension mismatch");
    outer_.selfadjointView<Eigen::Lower>().rankUpdate(row);
    sum_ += row;
    ++count_;
}

void MomentAccumulator::add_rows(const Matrix& rows) {
    if (rows.cols() != dim()) throw DimensionError("MomentAccumulator: row dimension mismatch");
    outer_.selfadjointView<Eigen::Lower>().rankUpdate(rows.transpose());
    sum_ += rows.colwise().sum().transpose();
    count_ += static_cast<std::uint64_t>(rows.rows());
}

void MomentAccumulator::add_patches(const Image& image, int kernel, int stride) {
    add_rows(extract_patches(image, kernel, stride).rows);
}

Vector MomentAccumulator::mean() const {
    if (count_ == 0) throw InvalidArgument("MomentAccumulator: no rows");
    return sum_ / static_cast<double>(count_);
}

Matrix MomentAccumulator::second_moment(bool centered) const {
    if (count_ == 0) throw InvalidArgument("MomentAccumulator: no rows");
    Matrix s = outer_.selfadjointView<Eigen::Lower>();
    s /= static_cast<double>(count_);
    if (centered) {
        const Vector m = mean();
        s -= m * m.transpose();
    }
    return s;
}

namespace {

PcaBasis basis_from_moment(const Matrix& moment, Vector mean, bool centered, PcaPopulation population) {
    SymmetricEigen eig = jacobi_eigen(moment);
    if (!eig.converged) throw NumericError("fit_pca: Jacobi iteration did not converge");
    const double scale = std::max(1.0, std::abs(eig.values(0)));
    for (Index i = 0; i < eig.values.size(); ++i)
        if (eig.values(i) < 0.0 && eig.values(i) >= -1e-12 * scale) eig.values(i) = 0.0;

    PcaBasis basis;
    basis.U = std::move(eig.vectors);
    basis.eigenvalues = std::move(eig.values);
    basis.centered = centered;
    basis.mean = std::move(mean);
    basis.population = population;
    return basis;
}

}  // namespace

PcaBasis fit_pca(const Matrix& rows, bool centered, PcaPopulation population) {
    if (rows.rows() < 2) throw InvalidArgument("fit_pca: need at least 2 rows");
    if (rows.cols() > 4096) throw InvalidArgument("fit_pca: dimension exceeds 4096");
    if (!rows.allFinite()) throw NumericError("fit_pca: non-finite input");
    const auto n = static_cast<double>(rows.rows());
    Vector mean = Vector::Zero(rows.cols());
    Matrix moment;
    if (centered) {
        mean = rows.colwise().mean().transpose();
        const Matrix x = rows.rowwise() - mean.transpose();
        moment = (x.transpose() * x) / n;
    } else {
        moment = (rows.transpose() * rows) / n;
    }
    return basis_from_moment(moment, std::move(mean), centered, population);
}

PcaBasis fit_pca(const MomentAccumulator& moments, bool centered, PcaPopulation population) {
    if (moments.count() < 2) throw InvalidArgument("fit_pca: need at least 2 rows");
    const Matrix moment = moments.second_moment(centered);
    if (!moment.allFinite()) throw NumericError("fit_pca: non-finite input");
    Vector mean = centered ? moments.mean() : Vector::Zero(moments.dim());
    return basis_from_moment(moment, std::move(mean), centered, population);
}

PcaBasis fit_patch_pca(const LabeledImageSet& set, const PatchGeometry& geometry, bool centered,
                       std::optional<std::size_t> sample_count, std::uint64_t seed) {
    set.validate();
    if (set.empty()) throw InvalidArgument("fit_patch_pca: empty image set");
    const Image& first = set.images.front();
    if (first.channels != geometry.channels)
        throw DimensionError("fit_patch_pca: geometry has " + std::to_string(geometry.channels) +
                             " channels, images have " + std::to_string(first.channels));
    check_window(first, geometry.kernel, geometry.stride);

    MomentAccumulator acc(geometry.dim());
    if (sample_count) {
        Rng rng(seed);
        const int tops = (first.height - geometry.kernel) / geometry.stride + 1;
        const int lefts = (first.width - geometry.kernel) / geometry.stride + 1;
        Vector patch(geometry.dim());
        for (std::size_t s = 0; s < *sample_count; ++s) {
            const Image& img = set.images[rng.index(set.size())];
            const int top = static_cast<int>(rng.index(static_cast<std::uint64_t>(tops))) * geometry.stride;
            const int left = static_cast<int>(rng.index(static_cast<std::uint64_t>(lefts))) * geometry.stride;
            copy_patch(img, geometry.kernel, top, left, [&](Index i) -> double& { return patch(i); });
            acc.add(patch);
        }
    } else {
        for (const Image& img : set.images) acc.add_patches(img, geometry.kernel, geometry.stride);
    }
    PcaBasis basis = fit_pca(acc, centered, PcaPopulation::all_patches);
    basis.channels = geometry.channels;
    basis.kernel = geometry.kernel;
    return basis;
}

Matrix to_pca(const Matrix& K, const PcaBasis& basis) {
    if (K.cols() != basis.dim())
        throw DimensionError("to_pca: matrix has " + std::to_string(K.cols()) + " columns, basis has d=" +
                             std::to_string(basis.dim()));
    return K * basis.U;
}

Matrix from_pca(const Matrix& K_tilde, const PcaBasis& basis) {
    if (K_tilde.cols() != basis.dim())
        throw DimensionError("from_pca: matrix has " + std::to_string(K_tilde.cols()) +
                             " columns, basis has d=" + std::to_string(basis.dim()));
    return K_tilde * basis.U.transpose();
}

PatchStats second_moment_stats(const Matrix& K_tilde) {
    PatchStats stats;
    stats.count = K_tilde.rows();
    const Index d = K_tilde.cols();
    if (stats.count == 0) {
        stats.sigma_diag = Vector::Zero(d);
        stats.mu_hat = Vector::Zero(d);
        return stats;
    }
    const Vector mean = K_tilde.colwise().mean().transpose();
    stats.mu_hat = std::sqrt(static_cast<double>(stats.count)) * mean;
    const Matrix centered = K_tilde.rowwise() - mean.transpose();
    const Matrix scatter = centered.transpose() * centered;
    stats.sigma_diag = scatter.diagonal();
    for (Index j = 0; j < d; ++j) {
        stats.scatter_max = std::max(stats.scatter_max, std::abs(scatter(j, j)));
        for (Index i = 0; i < d; ++i)
            if (i != j) stats.offdiag_residual = std::max(stats.offdiag_residual, std::abs(scatter(i, j)));
    }
    return stats;
}

Vector class_average_patch(const Matrix& K, const Vector& labels, int cls) {
    if (labels.size() != K.rows())
        throw DimensionError("class_average_patch: " + std::to_string(labels.size()) + " labels for " +
                             std::to_string(K.rows()) + " rows");
    Vector sum = Vector::Zero(K.cols());
    Index n = 0;
    for (Index i = 0; i < K.rows(); ++i)
        if (labels(i) == static_cast<double>(cls)) {
            sum += K.row(i).transpose();
            ++n;
        }
    if (n == 0) throw InvalidArgument("class " + std::to_string(cls) + " has no rows");
    return sum / static_cast<double>(n);
}

std::uint64_t fingerprint(const PcaBasis& basis) {
    auto feed = [](std::uint64_t h, const double* data, Index count) {
        return io::fnv1a64(std::span(reinterpret_cast<const std::uint8_t*>(data),
                                     static_cast<std::size_t>(count) * sizeof(double)),
                           h);
    };
    std::uint64_t h = io::fnv1a64(std::string_view(basis.centered ? "c1" : "c0"));
    h = io::fnv1a64(std::span(reinterpret_cast<const std::uint8_t*>(to_string(basis.population).data()),
                              to_string(basis.population).size()),
                    h);
    h = feed(h, basis.U.data(), basis.U.size());
    h = feed(h, basis.eigenvalues.data(), basis.eigenvalues.size());
    h = feed(h, basis.mean.data(), basis.mean.size());
    return h;
}

}  // namespace patchlens
