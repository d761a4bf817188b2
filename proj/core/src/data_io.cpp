#include "patchlens/data_io.hpp"

#include "patchlens/io.hpp"
#include "patchlens/rng.hpp"

#include <cmath>
#include <string>

namespace patchlens {

const std::array<std::string, 10>& cifar10_class_names() {
    static const std::array<std::string, 10> names = {"airplane", "automobile", "bird", "cat", "deer",
                                                      "dog",      "frog",       "horse", "ship", "truck"};
    return names;
}

LabeledImageSet decode_cifar10(std::span<const std::uint8_t> bytes, PixelScale scale) {
    if (bytes.size() % kCifarRecordBytes != 0) {
        const std::size_t last_record = bytes.size() - bytes.size() % kCifarRecordBytes;
        throw FormatError("truncated CIFAR-10 record: " + std::to_string(bytes.size() - last_record) +
                              " of " + std::to_string(kCifarRecordBytes) + " bytes",
                          last_record);
    }
    const std::size_t n = bytes.size() / kCifarRecordBytes;
    const double divisor = scale == PixelScale::unit ? 255.0 : 1.0;
    constexpr std::size_t plane = static_cast<std::size_t>(kCifarSide) * kCifarSide;

    LabeledImageSet set;
    set.images.reserve(n);
    set.labels.reserve(n);
    set.class_names.assign(cifar10_class_names().begin(), cifar10_class_names().end());
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t offset = r * kCifarRecordBytes;
        const std::uint8_t label = bytes[offset];
        if (label > 9)
            throw FormatError("label byte " + std::to_string(label) + " out of range 0-9", offset);
        Image img(kCifarChannels, kCifarSide, kCifarSide);
        const std::uint8_t* px = bytes.data() + offset + 1;
        for (std::size_t i = 0; i < kCifarChannels * plane; ++i) img.values[i] = px[i] / divisor;
        set.images.push_back(std::move(img));
        set.labels.push_back(label);
    }
    return set;
}

std::vector<std::uint8_t> encode_cifar10(const LabeledImageSet& set, PixelScale scale) {
    set.validate();
    const double factor = scale == PixelScale::unit ? 255.0 : 1.0;
    std::vector<std::uint8_t> out;
    out.reserve(set.size() * kCifarRecordBytes);
    for (std::size_t i = 0; i < set.size(); ++i) {
        const Image& img = set.images[i];
        if (img.channels != kCifarChannels || img.height != kCifarSide || img.width != kCifarSide)
            throw InvalidArgument("encode_cifar10: image " + std::to_string(i) + " is not 3x32x32");
        if (set.labels[i] < 0 || set.labels[i] > 9)
            throw InvalidArgument("encode_cifar10: label out of range 0-9");
        out.push_back(static_cast<std::uint8_t>(set.labels[i]));
        for (double v : img.values) {
            const double byte = std::round(v * factor);
            if (!(byte >= 0.0 && byte <= 255.0))
                throw InvalidArgument("encode_cifar10: pixel value out of range");
            out.push_back(static_cast<std::uint8_t>(byte));
        }
    }
    return out;
}

LabeledImageSet load_cifar10_batch(const std::filesystem::path& path, PixelScale scale) {
    return decode_cifar10(io::read_binary_file(path), scale);
}

LabeledImageSet load_cifar10_batches(std::span<const std::filesystem::path> paths, PixelScale scale) {
    LabeledImageSet all;
    for (const auto& p : paths) {
        LabeledImageSet part = load_cifar10_batch(p, scale);
        if (all.class_names.empty()) all.class_names = part.class_names;
        for (auto& img : part.images) all.images.push_back(std::move(img));
        all.labels.insert(all.labels.end(), part.labels.begin(), part.labels.end());
    }
    return all;
}

BinaryDataset make_binary_subset(const LabeledImageSet& set, int class_a, int class_b) {
    set.validate();
    auto class_label = [&](int cls) {
        if (cls >= 0 && static_cast<std::size_t>(cls) < set.class_names.size())
            return std::to_string(cls) + " (" + set.class_names[static_cast<std::size_t>(cls)] + ")";
        return std::to_string(cls);
    };
    if (class_a == class_b) throw InvalidArgument("make_binary_subset: both classes are " + class_label(class_a));

    BinaryDataset out;
    out.images.class_names = set.class_names;
    std::vector<double> y;
    for (int pass = 0; pass < 2; ++pass) {
        const int cls = pass == 0 ? class_a : class_b;
        for (std::size_t i = 0; i < set.size(); ++i) {
            if (set.labels[i] != cls) continue;
            out.images.images.push_back(set.images[i]);
            out.images.labels.push_back(set.labels[i]);
            y.push_back(pass);
            ++out.class_counts[static_cast<std::size_t>(pass)];
        }
        if (out.class_counts[static_cast<std::size_t>(pass)] == 0)
            throw InvalidArgument("make_binary_subset: class " + class_label(cls) + " has no images");
    }
    out.y = Eigen::Map<const Vector>(y.data(), static_cast<Index>(y.size()));
    return out;
}

void ensure_avg_patches(BinaryDataset& dataset, int kernel, int stride) {
    if (dataset.has_patches()) return;
    dataset.patches = build_avg_patch_matrix(dataset.images, kernel, stride);
}

BinaryDataset gen_shared_mean_dataset(const SharedMeanOptions& options) {
    if (options.n_per_class < 1) throw InvalidArgument("gen_shared_mean_dataset: n_per_class must be >= 1");
    if (options.dim < 1) throw InvalidArgument("gen_shared_mean_dataset: d must be >= 1");
    if (!(options.spread > 0.0)) throw InvalidArgument("gen_shared_mean_dataset: spread must be positive");

    const auto n = static_cast<Index>(options.n_per_class);
    const Index d = options.dim;
    Rng rng(options.seed);
    Matrix K(2 * n, d);
    for (Index i = 0; i < 2 * n; ++i)
        for (Index j = 0; j < d; ++j) K(i, j) = rng.normal(options.base_mean, options.spread);

    // Class-1 rows become mean0 + (row - mean1): exact for n == 1, and the
    // residual mean difference is pure round-off otherwise.
    const Vector mean0 = K.topRows(n).colwise().mean().transpose();
    const Vector mean1 = K.bottomRows(n).colwise().mean().transpose();
    for (Index i = n; i < 2 * n; ++i) K.row(i) = mean0.transpose() + (K.row(i) - mean1.transpose());

    BinaryDataset out;
    out.patches.K = std::move(K);
    out.patches.source_index.resize(static_cast<std::size_t>(2 * n));
    for (std::size_t i = 0; i < out.patches.source_index.size(); ++i) out.patches.source_index[i] = i;
    out.patches.geometry = {options.channels, options.kernel, 1};
    if (options.channels * options.kernel * options.kernel != options.dim)
        out.patches.geometry = {0, 0, 1};
    out.y = Vector::Zero(2 * n);
    out.y.tail(n).setOnes();
    out.class_counts = {options.n_per_class, options.n_per_class};
    return out;
}

LabeledImageSet gen_zero_sum_periodic_images(int n_images, int side, std::uint64_t seed) {
    if (n_images < 1) throw InvalidArgument("gen_zero_sum_periodic_images: need at least one image");
    if (side < 3) throw InvalidArgument("gen_zero_sum_periodic_images: side must be >= 3");
    Rng rng(seed);
    LabeledImageSet set;
    for (int n = 0; n < n_images; ++n) {
        std::array<double, 27> tile{};
        double sum = 0.0;
        for (double& v : tile) sum += (v = rng.normal());
        for (double& v : tile) v -= sum / 27.0;
        Image img(3, side, side);
        for (int c = 0; c < 3; ++c)
            for (int r = 0; r < side; ++r)
                for (int col = 0; col < side; ++col)
                    img.at(c, r, col) = tile[static_cast<std::size_t>(c * 9 + (r % 3) * 3 + col % 3)];
        set.images.push_back(std::move(img));
        set.labels.push_back(n % 2);
    }
    set.class_names = {"even", "odd"};
    return set;
}

Matrix shift_class_mean(const Matrix& K, const Vector& y, const PcaBasis& basis, int dir_index,
                        double epsilon) {
    if (y.size() != K.rows()) throw DimensionError("shift_class_mean: label count does not match rows");
    if (basis.dim() != K.cols()) throw DimensionError("shift_class_mean: basis dimension mismatch");
    if (dir_index < 0 || dir_index >= basis.dim())
        throw InvalidArgument("shift_class_mean: direction " + std::to_string(dir_index) +
                              " outside [0, " + std::to_string(basis.dim()) + ")");
    Matrix out = K;
    const Vector step = epsilon * basis.U.col(dir_index);
    for (Index i = 0; i < K.rows(); ++i)
        if (y(i) == 1.0) out.row(i) += step.transpose();
    return out;
}

LabelSource parse_label_source(std::string_view text, std::uint64_t seed) {
    if (text == "true") return LabelSource::truth();
    if (text == "bernoulli") return LabelSource::coin_flips(seed);
    if (text == "expectation") return LabelSource::mean();
    throw InvalidArgument("unknown label source '" + std::string(text) + "' (true|bernoulli|expectation)");
}

Vector make_labels(const LabelSource& source, std::size_t n, const Vector& truth) {
    if (n < 1) throw InvalidArgument("make_labels: n must be >= 1");
    const auto size = static_cast<Index>(n);
    switch (source.kind) {
        case LabelSource::Kind::true_labels:
            if (truth.size() != size)
                throw DimensionError("make_labels: expected " + std::to_string(n) + " true labels, got " +
                                     std::to_string(truth.size()));
            return truth;
        case LabelSource::Kind::bernoulli: {
            Rng rng(source.seed);
            Vector y(size);
            for (Index i = 0; i < size; ++i) y(i) = rng.coin() ? 1.0 : 0.0;
            return y;
        }
        case LabelSource::Kind::expectation:
            return Vector::Constant(size, 0.5);
    }
    throw InvalidArgument("make_labels: unknown source");
}

namespace {
constexpr std::string_view kAvgPatchMagic = "patchlens-avgpatch v1";
}

std::string format_avg_patch_matrix(const AvgPatchMatrix& patches, const Vector& labels) {
    if (labels.size() != patches.rows()) throw DimensionError("avg-patch CSV: label count does not match rows");
    std::string out;
    out += kAvgPatchMagic;
    out += '\n';
    out += std::to_string(patches.rows()) + "," + std::to_string(patches.dim()) + "," +
           std::to_string(patches.geometry.channels) + "," + std::to_string(patches.geometry.kernel) + "\n";
    for (Index i = 0; i < patches.rows(); ++i) {
        out += io::format_double(labels(i));
        for (Index j = 0; j < patches.dim(); ++j) {
            out += ',';
            out += io::format_double(patches.K(i, j));
        }
        out += '\n';
    }
    return out;
}

LabeledPatchMatrix parse_avg_patch_matrix(const std::string& text) {
    const auto lines = io::split_lines(text);
    if (lines.empty() || lines[0] != kAvgPatchMagic)
        throw ParseError("missing '" + std::string(kAvgPatchMagic) + "' header", 1);
    if (lines.size() < 2) throw ParseError("missing N,d,c,k header", 2);
    const auto dims = io::split_csv(lines[1]);
    if (dims.size() != 4) throw ParseError("expected N,d,c,k", 2);
    const long long n = io::parse_integer(dims[0], 2);
    const long long d = io::parse_integer(dims[1], 2);
    const long long c = io::parse_integer(dims[2], 2);
    const long long k = io::parse_integer(dims[3], 2);
    if (n <= 0 || d <= 0 || c < 0 || k < 0) throw ParseError("invalid dimensions", 2);
    if (static_cast<long long>(lines.size()) - 2 != n)
        throw ParseError("header declares " + std::to_string(n) + " rows but file has " +
                             std::to_string(lines.size() - 2),
                         lines.size());

    LabeledPatchMatrix out;
    out.patches.K.resize(n, d);
    out.patches.geometry = {static_cast<int>(c), static_cast<int>(k), 1};
    out.patches.source_index.resize(static_cast<std::size_t>(n));
    out.labels.resize(n);
    for (long long i = 0; i < n; ++i) {
        const std::size_t line_no = static_cast<std::size_t>(i) + 3;
        const auto cells = io::split_csv(lines[static_cast<std::size_t>(i) + 2]);
        if (static_cast<long long>(cells.size()) != d + 1)
            throw ParseError("row has " + std::to_string(cells.size()) + " cells, expected " +
                                 std::to_string(d + 1),
                             line_no);
        out.labels(i) = io::parse_double(cells[0], line_no);
        for (long long j = 0; j < d; ++j)
            out.patches.K(i, j) = io::parse_double(cells[static_cast<std::size_t>(j) + 1], line_no);
        out.patches.source_index[static_cast<std::size_t>(i)] = static_cast<std::size_t>(i);
    }
    return out;
}

void export_avg_patch_matrix(const AvgPatchMatrix& patches, const Vector& labels,
                             const std::filesystem::path& path) {
    io::write_file_atomic(path, format_avg_patch_matrix(patches, labels));
}

LabeledPatchMatrix import_avg_patch_matrix(const std::filesystem::path& path) {
    return parse_avg_patch_matrix(io::read_text_file(path));
}

}  // namespace patchlens
