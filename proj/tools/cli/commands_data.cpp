#include "commands.hpp"

#include "patchlens/filter_bank.hpp"
#include "patchlens/io.hpp"
#include "patchlens/profile.hpp"
#include "patchlens/svg.hpp"

#include <algorithm>
#include <memory>
#include <ostream>

namespace patchlens::cli {

namespace fs = std::filesystem;

void add_dataset_options(CLI::App& sub, DatasetOptions& options) {
    sub.add_option("--cifar", options.cifar, "CIFAR-10 binary batch file (repeatable)")
        ->check(CLI::ExistingFile)
        ->group("Dataset");
    sub.add_option("--data", options.data_dir, "Directory with data_batch_*.bin (default $PATCHLENS_DATA)")
        ->check(CLI::ExistingDirectory)
        ->group("Dataset");
    sub.add_option("--max-images", options.max_images, "Use only the first N images (0 = all)")->group("Dataset");
}

namespace {

bool has_dataset(const DatasetOptions& ds) { return !ds.cifar.empty() || !ds.data_dir.empty(); }

void add_batches_to_manifest(Manifest& manifest, const std::vector<fs::path>& batches) {
    for (const auto& p : batches) manifest.add_input(p);
}

// ---------------------------------------------------------------------------
struct PcaOptions {
    DatasetOptions dataset;
    std::string avg_patches;
    int kernel = 3;
    int stride = 1;
    std::string population;
    bool uncentered = false;
    std::size_t sample = 0;
    std::string out;
};

int run_pca(const PcaOptions& o, const GlobalOptions& g, std::ostream& out) {
    Manifest manifest("pca", g);
    PcaBasis basis;
    const bool centered = !o.uncentered;
    if (!o.avg_patches.empty()) {
        if (has_dataset(o.dataset)) throw UsageError("--avg-patches cannot be combined with --cifar/--data");
        if (!o.population.empty() && parse_population(o.population) != PcaPopulation::avg_patch_rows)
            throw UsageError("an average-patch matrix only supports --population avg_patch_rows");
        const auto K = read_avg_patches(o.avg_patches);
        manifest.add_input(o.avg_patches);
        basis = fit_pca(K.patches.K, centered, PcaPopulation::avg_patch_rows);
        basis.channels = K.patches.geometry.channels;
        basis.kernel = K.patches.geometry.kernel;
    } else {
        const auto population = o.population.empty() ? PcaPopulation::all_patches : parse_population(o.population);
        std::vector<fs::path> batches;
        const auto set = load_images(o.dataset, g, &batches);
        add_batches_to_manifest(manifest, batches);
        const PatchGeometry geometry{set.images.front().channels, o.kernel, o.stride};
        if (population == PcaPopulation::all_patches) {
            basis = fit_patch_pca(set, geometry, centered,
                                  o.sample > 0 ? std::optional<std::size_t>(o.sample) : std::nullopt, g.seed);
        } else {
            basis = fit_pca(build_avg_patch_matrix(set, o.kernel, o.stride).K, centered,
                            PcaPopulation::avg_patch_rows);
            basis.channels = geometry.channels;
            basis.kernel = geometry.kernel;
        }
    }
    auto& cfg = manifest.config();
    cfg["kernel"] = o.kernel;
    cfg["stride"] = o.stride;
    cfg["population"] = std::string(to_string(basis.population));
    cfg["centered"] = centered;
    cfg["sample"] = o.sample;
    cfg["max_images"] = o.dataset.max_images;
    cfg["basis_fingerprint"] = io::hex64(fingerprint(basis));
    manifest.write_output(o.out, basis_to_json(basis));
    manifest.finish(o.out);

    out << "d=" << basis.dim() << " population=" << to_string(basis.population) << " leading eigenvalues:";
    for (Index i = 0; i < std::min<Index>(5, basis.dim()); ++i) out << ' ' << io::format_double(basis.eigenvalues(i));
    out << "\nwrote " << o.out << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
struct ProfileOptions {
    std::string filters;
    std::string pca;
    std::string variant = "rms";
    std::string subtract_init;
    std::string out;
};

int run_profile(const ProfileOptions& o, const GlobalOptions& g, std::ostream& out) {
    const auto variant = parse_variant(o.variant);
    Manifest manifest("profile", g);
    FilterBank bank = import_filter_bank(o.filters);
    manifest.add_input(o.filters);
    if (!o.subtract_init.empty()) {
        bank = subtract_banks(bank, import_filter_bank(o.subtract_init));
        manifest.add_input(o.subtract_init);
    }
    const PcaBasis basis = read_basis(o.pca);
    manifest.add_input(o.pca);
    const EnergyProfile e = energy_profile(bank, basis, variant);

    auto& cfg = manifest.config();
    cfg["variant"] = std::string(to_string(variant));
    cfg["subtract_init"] = !o.subtract_init.empty();
    cfg["basis_fingerprint"] = io::hex64(e.basis_fingerprint);
    cfg["filters"] = bank.size();
    manifest.write_output(o.out, format_profile_csv(e, basis.eigenvalues));
    manifest.finish(o.out);
    out << "wrote " << e.size() << " components (" << to_string(variant) << ", M=" << bank.size() << ") to " << o.out
        << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
struct CompareOptions {
    std::vector<std::string> profiles;
    std::vector<std::string> filters;
    std::string pca;
    std::string variant;
    std::string out;
};

std::string profile_variant_of(const std::string& path, const std::string& fallback) {
    if (const auto m = read_manifest(path)) {
        const auto it = m->find("config");
        if (it != m->end() && it->contains("variant")) return it->at("variant").get<std::string>();
    }
    if (fallback.empty())
        throw UsageError("cannot tell the variant of '" + path + "' (no manifest); pass --variant to assert it");
    return fallback;
}

int run_compare(const CompareOptions& o, const GlobalOptions& g, std::ostream& out, std::ostream& err) {
    Manifest manifest("compare", g);
    EnergyProfile a, b;
    if (!o.profiles.empty()) {
        if (!o.filters.empty() || !o.pca.empty()) throw UsageError("use either --profiles or --filters/--pca");
        const std::string va = profile_variant_of(o.profiles[0], o.variant);
        const std::string vb = profile_variant_of(o.profiles[1], o.variant);
        if (va != vb)
            throw UsageError("refusing to correlate a " + va + " profile with a " + vb +
                             " profile (squaring changes the correlation)");
        a = {parse_profile_csv(io::read_text_file(o.profiles[0])).energy, parse_variant(va), 0};
        b = {parse_profile_csv(io::read_text_file(o.profiles[1])).energy, parse_variant(vb), 0};
        for (const auto& p : o.profiles) manifest.add_input(p);
        const auto ma = read_manifest(o.profiles[0]), mb = read_manifest(o.profiles[1]);
        if (ma && mb) {
            const auto fa = ma->at("config").value("basis_fingerprint", std::string());
            const auto fb = mb->at("config").value("basis_fingerprint", std::string());
            if (fa != fb) err << "warning: profiles were computed in different PCA bases\n";
        }
    } else {
        if (o.filters.size() != 2 || o.pca.empty())
            throw UsageError("compare needs --profiles A B, or --filters A B with --pca");
        const auto variant = parse_variant(o.variant.empty() ? "rms" : o.variant);
        const PcaBasis basis = read_basis(o.pca);
        a = energy_profile(import_filter_bank(o.filters[0]), basis, variant);
        b = energy_profile(import_filter_bank(o.filters[1]), basis, variant);
        for (const auto& p : o.filters) manifest.add_input(p);
        manifest.add_input(o.pca);
    }
    const double r = profile_correlation(a, b);
    out << "variant " << to_string(a.variant) << "\ncorrelation " << io::format_double(r) << "\n";
    if (!o.out.empty()) {
        manifest.config()["variant"] = std::string(to_string(a.variant));
        nlohmann::json j{{"variant", std::string(to_string(a.variant))}, {"correlation", r}};
        manifest.write_output(o.out, j.dump(2) + "\n");
        manifest.finish(o.out);
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
struct DistancesOptions {
    std::string filters;
    DatasetOptions dataset;
    std::string avg_patches;
    int kernel = 3;
    int stride = 1;
    std::size_t pairs = 1000;
    std::string out;
    std::string svg;
};

int run_distances(DistancesOptions o, const GlobalOptions& g, std::ostream& out) {
    Manifest manifest("distances", g);
    const FilterBank bank = import_filter_bank(o.filters);
    manifest.add_input(o.filters);
    PatchMatrix patches;
    if (!o.avg_patches.empty()) {
        if (has_dataset(o.dataset)) throw UsageError("--avg-patches cannot be combined with --cifar/--data");
        patches.rows = read_avg_patches(o.avg_patches).patches.K;
        manifest.add_input(o.avg_patches);
    } else {
        // All overlapping patches of every CIFAR image would not fit in memory.
        if (o.dataset.max_images == 0) o.dataset.max_images = 200;
        std::vector<fs::path> batches;
        const auto set = load_images(o.dataset, g, &batches);
        add_batches_to_manifest(manifest, batches);
        patches = extract_patches(set, o.kernel, o.stride);
    }
    const auto report = pair_distances(patches, bank, o.pairs, g.seed);

    auto& cfg = manifest.config();
    cfg["pairs"] = o.pairs;
    cfg["kernel"] = o.kernel;
    cfg["stride"] = o.stride;
    cfg["max_images"] = o.dataset.max_images;
    manifest.write_output(o.out, format_pair_csv(report));
    if (!o.svg.empty()) {
        svg::Series s{{}, {}, "patch pairs", svg::SeriesStyle::scatter};
        for (const auto& p : report.pairs) {
            s.x.push_back(p.input);
            s.y.push_back(p.mapped);
        }
        manifest.write_output(o.svg, svg::render({"Patch-pair distances", "input distance", "mapped distance"}, {s}));
    }
    manifest.finish(o.out);
    out << "pairs " << report.pairs.size() << "\ncorrelation "
        << (report.correlation ? io::format_double(*report.correlation) : std::string("undefined")) << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
struct AvgPatchOptions {
    DatasetOptions dataset;
    int kernel = 3;
    int stride = 1;
    int class_a = -1;
    int class_b = -1;
    bool per_class = false;
    std::string pca;
    std::string variant = "rms";
    std::string report;
    std::string out;
};

int run_avg_patch(const AvgPatchOptions& o, const GlobalOptions& g, std::ostream& out) {
    Manifest manifest("avg-patch", g);
    std::vector<fs::path> batches;
    const auto set = load_images(o.dataset, g, &batches);
    add_batches_to_manifest(manifest, batches);
    auto& cfg = manifest.config();
    cfg["kernel"] = o.kernel;
    cfg["stride"] = o.stride;
    cfg["max_images"] = o.dataset.max_images;

    if (!o.per_class) {
        if (o.class_a < 0 || o.class_b < 0) throw UsageError("give --class-a and --class-b, or --per-class");
        BinaryDataset ds = make_binary_subset(set, o.class_a, o.class_b);
        ensure_avg_patches(ds, o.kernel, o.stride);
        cfg["class_a"] = o.class_a;
        cfg["class_b"] = o.class_b;
        manifest.write_output(o.out, format_avg_patch_matrix(ds.patches, ds.y));
        manifest.finish(o.out);
        out << "rows " << ds.patches.rows() << " (class " << o.class_a << ": " << ds.class_counts[0] << ", class "
            << o.class_b << ": " << ds.class_counts[1] << ")\nwrote " << o.out << "\n";
        return kExitOk;
    }

    const AvgPatchMatrix all = build_avg_patch_matrix(set, o.kernel, o.stride);
    Vector labels(static_cast<Index>(set.size()));
    for (std::size_t i = 0; i < set.size(); ++i) labels(static_cast<Index>(i)) = set.labels[i];
    std::vector<int> classes(set.labels.begin(), set.labels.end());
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());

    AvgPatchMatrix means;
    means.geometry = all.geometry;
    means.K.resize(static_cast<Index>(classes.size()), all.dim());
    Vector class_labels(static_cast<Index>(classes.size()));
    for (std::size_t c = 0; c < classes.size(); ++c) {
        means.K.row(static_cast<Index>(c)) = class_average_patch(all.K, labels, classes[c]).transpose();
        class_labels(static_cast<Index>(c)) = classes[c];
        means.source_index.push_back(c);
    }
    cfg["per_class"] = true;
    manifest.write_output(o.out, format_avg_patch_matrix(means, class_labels));
    out << "classes " << classes.size() << "\nwrote " << o.out << "\n";

    if (!o.pca.empty()) {
        const auto variant = parse_variant(o.variant);
        const PcaBasis basis = read_basis(o.pca);
        manifest.add_input(o.pca);
        std::vector<EnergyProfile> profiles;
        for (Index c = 0; c < means.K.rows(); ++c) {
            FilterBank single;
            single.filters = means.K.row(c);
            profiles.push_back(energy_profile(single, basis, variant));
        }
        const auto n = profiles.size();
        nlohmann::json matrix = nlohmann::json::array();
        double min_off = 1.0;
        out << "profile correlations (" << to_string(variant) << ")\n";
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> row;
            for (std::size_t j = 0; j < n; ++j) {
                const double r = profile_correlation(profiles[i], profiles[j]);
                row.push_back(r);
                if (i != j) min_off = std::min(min_off, r);
                char buf[16];
                std::snprintf(buf, sizeof buf, "%7.4f", r);
                out << buf;
            }
            out << "\n";
            matrix.push_back(row);
        }
        out << "min off-diagonal " << io::format_double(min_off) << "\n";
        cfg["variant"] = std::string(to_string(variant));
        if (!o.report.empty())
            manifest.write_output(o.report, nlohmann::json{{"classes", classes},
                                                           {"variant", std::string(to_string(variant))},
                                                           {"correlation", matrix},
                                                           {"min_offdiagonal", min_off}}
                                                    .dump(2) +
                                                "\n");
    }
    manifest.finish(o.out);
    return kExitOk;
}

// ---------------------------------------------------------------------------
struct SynthOptions {
    std::size_t n_per_class = 100;
    int channels = 3;
    int kernel = 3;
    double spread = 0.1;
    double base_mean = 0.5;
    double shift_eps = 0.0;
    int shift_dir = 0;
    std::string out;
};

int run_synth(const SynthOptions& o, const GlobalOptions& g, std::ostream& out) {
    SharedMeanOptions opt;
    opt.n_per_class = o.n_per_class;
    opt.channels = o.channels;
    opt.kernel = o.kernel;
    opt.dim = o.channels * o.kernel * o.kernel;
    opt.spread = o.spread;
    opt.base_mean = o.base_mean;
    opt.seed = g.seed;
    BinaryDataset ds = gen_shared_mean_dataset(opt);
    if (o.shift_eps != 0.0) {
        const PcaBasis basis = fit_pca(ds.patches.K, true, PcaPopulation::avg_patch_rows);
        ds.patches.K = shift_class_mean(ds.patches.K, ds.y, basis, o.shift_dir, o.shift_eps);
    }
    Manifest manifest("synth", g);
    auto& cfg = manifest.config();
    cfg["n_per_class"] = o.n_per_class;
    cfg["channels"] = o.channels;
    cfg["kernel"] = o.kernel;
    cfg["spread"] = o.spread;
    cfg["base_mean"] = o.base_mean;
    cfg["shift_eps"] = o.shift_eps;
    cfg["shift_dir"] = o.shift_dir;
    manifest.write_output(o.out, format_avg_patch_matrix(ds.patches, ds.y));
    manifest.finish(o.out);
    out << "rows " << ds.patches.rows() << " d=" << ds.patches.dim() << "\nwrote " << o.out << "\n";
    return kExitOk;
}

}  // namespace

void add_data_commands(CLI::App& app, const GlobalOptions& g, std::vector<Command>& commands) {
    {
        auto o = std::make_shared<PcaOptions>();
        auto* sub = app.add_subcommand("pca", "Fit a patch PCA basis");
        add_dataset_options(*sub, o->dataset);
        sub->add_option("--avg-patches", o->avg_patches, "Fit on the rows of an average-patch CSV instead")
            ->check(CLI::ExistingFile);
        sub->add_option("--kernel", o->kernel, "Patch size k")->check(CLI::Range(1, 32))->capture_default_str();
        sub->add_option("--stride", o->stride, "Patch stride")->check(CLI::Range(1, 32))->capture_default_str();
        sub->add_option("--population", o->population, "all_patches | avg_patch_rows")
            ->check(CLI::IsMember({"all_patches", "avg_patch_rows"}));
        sub->add_flag("--uncentered", o->uncentered, "Use the raw second moment instead of the covariance");
        sub->add_option("--sample", o->sample, "Fit on N random patches instead of all (seeded)");
        sub->add_option("--out", o->out, "Basis JSON")->required();
        commands.push_back({sub, [o, &g](std::ostream& out, std::ostream&) { return run_pca(*o, g, out); }});
    }
    {
        auto o = std::make_shared<ProfileOptions>();
        auto* sub = app.add_subcommand("profile", "Energy profile of a filter bank");
        sub->add_option("--filters", o->filters, "Filter-bank CSV")->required()->check(CLI::ExistingFile);
        sub->add_option("--pca", o->pca, "Basis JSON")->required()->check(CLI::ExistingFile);
        sub->add_option("--variant", o->variant, "rms | mean_square")
            ->check(CLI::IsMember({"rms", "mean_square"}))
            ->capture_default_str();
        sub->add_option("--subtract-init", o->subtract_init, "Initial filter bank to subtract first")
            ->check(CLI::ExistingFile);
        sub->add_option("--out", o->out, "Profile CSV")->required();
        commands.push_back({sub, [o, &g](std::ostream& out, std::ostream&) { return run_profile(*o, g, out); }});
    }
    {
        auto o = std::make_shared<CompareOptions>();
        auto* sub = app.add_subcommand("compare", "Correlate two energy profiles of the same variant");
        sub->add_option("--profiles", o->profiles, "Two profile CSVs")->expected(2)->check(CLI::ExistingFile);
        sub->add_option("--filters", o->filters, "Two filter-bank CSVs")->expected(2)->check(CLI::ExistingFile);
        sub->add_option("--pca", o->pca, "Basis JSON (with --filters)")->check(CLI::ExistingFile);
        sub->add_option("--variant", o->variant, "Variant to use, or to assert for manifest-less profiles")
            ->check(CLI::IsMember({"rms", "mean_square"}));
        sub->add_option("--out", o->out, "Optional JSON result");
        commands.push_back(
            {sub, [o, &g](std::ostream& out, std::ostream& err) { return run_compare(*o, g, out, err); }});
    }
    {
        auto o = std::make_shared<DistancesOptions>();
        auto* sub = app.add_subcommand("distances", "Patch-pair distances before and after the filter bank");
        sub->add_option("--filters", o->filters, "Filter-bank CSV")->required()->check(CLI::ExistingFile);
        add_dataset_options(*sub, o->dataset);
        sub->add_option("--avg-patches", o->avg_patches, "Use the rows of an average-patch CSV as patches")
            ->check(CLI::ExistingFile);
        sub->add_option("--kernel", o->kernel, "Patch size k")->check(CLI::Range(1, 32))->capture_default_str();
        sub->add_option("--stride", o->stride, "Patch stride")->check(CLI::Range(1, 32))->capture_default_str();
        sub->add_option("--pairs", o->pairs, "Number of sampled pairs")->check(CLI::PositiveNumber)
            ->capture_default_str();
        sub->add_option("--out", o->out, "Pair CSV")->required();
        sub->add_option("--svg", o->svg, "Optional scatter plot");
        commands.push_back({sub, [o, &g](std::ostream& out, std::ostream&) { return run_distances(*o, g, out); }});
    }
    {
        auto o = std::make_shared<AvgPatchOptions>();
        auto* sub = app.add_subcommand("avg-patch", "Average-patch matrix of a CIFAR class pair, or class means");
        add_dataset_options(*sub, o->dataset);
        sub->add_option("--kernel", o->kernel, "Patch size k")->check(CLI::Range(1, 32))->capture_default_str();
        sub->add_option("--stride", o->stride, "Patch stride")->check(CLI::Range(1, 32))->capture_default_str();
        sub->add_option("--class-a", o->class_a, "Class mapped to label 0")->check(CLI::Range(0, 9));
        sub->add_option("--class-b", o->class_b, "Class mapped to label 1")->check(CLI::Range(0, 9));
        sub->add_flag("--per-class", o->per_class, "Write one average patch per class instead");
        sub->add_option("--pca", o->pca, "With --per-class: correlate the class profiles in this basis")
            ->check(CLI::ExistingFile);
        sub->add_option("--variant", o->variant, "rms | mean_square")
            ->check(CLI::IsMember({"rms", "mean_square"}))
            ->capture_default_str();
        sub->add_option("--report", o->report, "With --pca: JSON correlation matrix");
        sub->add_option("--out", o->out, "Average-patch CSV")->required();
        commands.push_back({sub, [o, &g](std::ostream& out, std::ostream&) { return run_avg_patch(*o, g, out); }});
    }
    {
        auto o = std::make_shared<SynthOptions>();
        auto* sub = app.add_subcommand("synth", "Synthetic two-class average-patch matrix with equal class means");
        sub->add_option("--n-per-class", o->n_per_class, "Rows per class")->check(CLI::PositiveNumber)
            ->capture_default_str();
        sub->add_option("--channels", o->channels, "Channels c")->check(CLI::Range(1, 16))->capture_default_str();
        sub->add_option("--kernel", o->kernel, "Patch size k")->check(CLI::Range(1, 32))->capture_default_str();
        sub->add_option("--spread", o->spread, "Per-coordinate standard deviation")->capture_default_str();
        sub->add_option("--base-mean", o->base_mean, "Shared mean of every coordinate")->capture_default_str();
        sub->add_option("--shift-eps", o->shift_eps, "Shift class 1 by eps along a PCA direction")
            ->capture_default_str();
        sub->add_option("--shift-dir", o->shift_dir, "PCA component index for the shift")->capture_default_str();
        sub->add_option("--out", o->out, "Average-patch CSV")->required();
        commands.push_back({sub, [o, &g](std::ostream& out, std::ostream&) { return run_synth(*o, g, out); }});
    }
}

}  // namespace patchlens::cli
