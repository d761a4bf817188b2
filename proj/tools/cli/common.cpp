#include "common.hpp"

#include "patchlens/io.hpp"

#include <cstdlib>

namespace patchlens::cli {

namespace fs = std::filesystem;

std::vector<fs::path> resolve_batches(const DatasetOptions& options) {
    std::vector<fs::path> paths;
    for (const auto& p : options.cifar) paths.emplace_back(p);
    if (!paths.empty()) return paths;

    std::string dir = options.data_dir;
    if (dir.empty())
        if (const char* env = std::getenv("PATCHLENS_DATA")) dir = env;
    if (dir.empty()) throw UsageError("no dataset: pass --cifar FILE, --data DIR, or set PATCHLENS_DATA");

    for (const fs::path root : {fs::path(dir), fs::path(dir) / "cifar-10-batches-bin"}) {
        for (int i = 1; i <= 5; ++i) {
            const fs::path p = root / ("data_batch_" + std::to_string(i) + ".bin");
            if (fs::exists(p)) paths.push_back(p);
        }
        if (!paths.empty()) return paths;
    }
    throw UsageError("no data_batch_*.bin files under '" + dir + "'");
}

LabeledImageSet load_images(const DatasetOptions& options, const GlobalOptions& globals,
                            std::vector<fs::path>* used) {
    const auto paths = resolve_batches(options);
    for (const auto& p : paths)
        if (!fs::exists(p)) throw UsageError("input file does not exist: " + p.string());
    if (used) *used = paths;
    LabeledImageSet set = load_cifar10_batches(paths, globals.no_scale ? PixelScale::raw : PixelScale::unit);
    if (options.max_images > 0 && set.size() > options.max_images) {
        set.images.resize(options.max_images);
        set.labels.resize(options.max_images);
    }
    return set;
}

Manifest::Manifest(std::string command, const GlobalOptions& globals) : command_(std::move(command)) {
    config_["seed"] = globals.seed;
    config_["threads"] = globals.threads;
    config_["no_scale"] = globals.no_scale;
}

void Manifest::add_input(const fs::path& path) {
    inputs_.push_back({{"path", path.generic_string()}, {"fnv1a64", io::hash_file(path)}});
}

void Manifest::write_output(const fs::path& path, const std::string& content) {
    io::write_file_atomic(path, content);
    outputs_.push_back({{"path", path.generic_string()}, {"fnv1a64", io::hex64(io::fnv1a64(content))}});
}

void Manifest::finish(const fs::path& primary_output) const {
    nlohmann::json j;
    j["tool"] = "patchlens";
    j["format"] = 1;
    j["command"] = command_;
    j["config"] = config_;
    j["inputs"] = inputs_;
    j["outputs"] = outputs_;
    io::write_file_atomic(manifest_path(primary_output), j.dump(2) + "\n");
}

fs::path manifest_path(const fs::path& output) { return fs::path(output.string() + ".manifest.json"); }

std::optional<nlohmann::json> read_manifest(const fs::path& output) {
    const fs::path p = manifest_path(output);
    if (!fs::exists(p)) return std::nullopt;
    try {
        return nlohmann::json::parse(io::read_text_file(p));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("manifest " + p.string() + ": " + e.what(), 0);
    }
}

PcaBasis read_basis(const fs::path& path) { return basis_from_json(io::read_text_file(path)); }

LabeledPatchMatrix read_avg_patches(const fs::path& path) { return import_avg_patch_matrix(path); }

void require_binary_labels(const Vector& labels) {
    for (Index i = 0; i < labels.size(); ++i)
        if (labels(i) != 0.0 && labels(i) != 1.0)
            throw InvalidArgument("row " + std::to_string(i) + " has label " + io::format_double(labels(i)) +
                                  "; expected 0 or 1");
}

double effective_eta(double eta, LossScale scale, Index rows) { return eta * gradient_scale(scale, rows); }

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace patchlens::cli
