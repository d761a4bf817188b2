#pragma once

#include "patchlens/data_io.hpp"
#include "patchlens/linear_dynamics.hpp"
#include "patchlens/patch_engine.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace patchlens::cli {

// Bad flags or flag combinations detected after parsing; exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GlobalOptions {
    std::uint64_t seed = 0;
    int threads = 1;
    bool no_scale = false;
};

// Where images come from: explicit CIFAR batch files, else a directory
// (--data, falling back to $PATCHLENS_DATA) holding data_batch_*.bin.
struct DatasetOptions {
    std::vector<std::string> cifar;
    std::string data_dir;
    std::size_t max_images = 0;  // 0 = all
};

std::vector<std::filesystem::path> resolve_batches(const DatasetOptions& options);
LabeledImageSet load_images(const DatasetOptions& options, const GlobalOptions& globals,
                            std::vector<std::filesystem::path>* used = nullptr);

// Records the resolved configuration plus content hashes of every input and
// output, and writes it next to the primary output as <out>.manifest.json.
class Manifest {
public:
    Manifest(std::string command, const GlobalOptions& globals);

    nlohmann::json& config() { return config_; }
    void add_input(const std::filesystem::path& path);
    // Writes `content` atomically and records its hash.
    void write_output(const std::filesystem::path& path, const std::string& content);
    void finish(const std::filesystem::path& primary_output) const;

private:
    std::string command_;
    nlohmann::json config_;
    nlohmann::json inputs_ = nlohmann::json::array();
    nlohmann::json outputs_ = nlohmann::json::array();
};

std::filesystem::path manifest_path(const std::filesystem::path& output);
std::optional<nlohmann::json> read_manifest(const std::filesystem::path& output);

PcaBasis read_basis(const std::filesystem::path& path);
LabeledPatchMatrix read_avg_patches(const std::filesystem::path& path);

// Vector of 0/1 labels for a two-class patch matrix; rejects anything else.
void require_binary_labels(const Vector& labels);

// Effective step for closed forms evaluated with the unnormalized gradient.
double effective_eta(double eta, LossScale scale, Index rows);

std::vector<double> to_std(const Vector& v);

}  // namespace patchlens::cli
