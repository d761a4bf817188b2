#include "commands.hpp"

#include "patchlens/analytic.hpp"
#include "patchlens/io.hpp"
#include "patchlens/svg.hpp"

#include <cmath>
#include <memory>
#include <ostream>

namespace patchlens::cli {

namespace {

// true | random | half, plus the library spellings. Random labels use seed + 1
// so they never share a stream with the filter initialization (seed).
Vector resolve_labels(const std::string& kind, const Vector& truth, std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(truth.size());
    if (kind == "true") return make_labels(LabelSource::truth(), n, truth);
    if (kind == "random" || kind == "bernoulli") return make_labels(LabelSource::coin_flips(seed + 1), n);
    if (kind == "half" || kind == "expectation") return make_labels(LabelSource::mean(), n);
    throw UsageError("unknown --labels '" + kind + "' (true|random|half)");
}

void add_label_option(CLI::App* sub, std::string& labels) {
    sub->add_option("--labels", labels, "true | random | half")
        ->check(CLI::IsMember({"true", "random", "half", "bernoulli", "expectation"}))
        ->capture_default_str();
}

struct Problem {
    LabeledPatchMatrix data;
    PcaBasis basis;
    Matrix K_tilde;
};

// Loads the average-patch matrix and rotates it into PCA coordinates, fitting
// a centered basis on its rows when none is supplied.
Problem load_problem(const std::string& avg_patches, const std::string& pca, Manifest& manifest) {
    Problem p;
    p.data = read_avg_patches(avg_patches);
    manifest.add_input(avg_patches);
    require_binary_labels(p.data.labels);
    if (!pca.empty()) {
        p.basis = read_basis(pca);
        manifest.add_input(pca);
    } else {
        p.basis = fit_pca(p.data.patches.K, true, PcaPopulation::avg_patch_rows);
    }
    p.K_tilde = to_pca(p.data.patches.K, p.basis);
    manifest.config()["basis_fingerprint"] = io::hex64(fingerprint(p.basis));
    return p;
}

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

// ---------------------------------------------------------------------------
struct SimulateOptions {
    std::string avg_patches;
    std::string labels = "true";
    double eta = 0.1;
    int steps = 100;
    int width = 1;
    double sigma = 0.0;
    std::string loss_scale = "one_over_n";
    int snapshot_every = 0;
    std::string out;
    std::string filters_out;
    std::string init_out;
};

int run_simulate(const SimulateOptions& o, const GlobalOptions& g, std::ostream& out, std::ostream& err) {
    Manifest manifest("simulate", g);
    const auto data = read_avg_patches(o.avg_patches);
    manifest.add_input(o.avg_patches);
    require_binary_labels(data.labels);
    const Vector y = resolve_labels(o.labels, data.labels, g.seed);

    GDConfig config;
    config.eta = o.eta;
    config.steps = o.steps;
    config.width = o.width;
    config.sigma_init = o.sigma;
    config.seed = g.seed;
    config.loss_scale = parse_loss_scale(o.loss_scale);
    std::vector<int> at;
    if (o.snapshot_every > 0)
        for (int t = 0; t <= o.steps; t += o.snapshot_every) at.push_back(t);
    const Trajectory traj = multi_filter_run(data.patches.K, y, config, at);
    if (traj.warning) err << "warning: " << *traj.warning << "\n";

    auto& cfg = manifest.config();
    cfg["labels"] = o.labels;
    cfg["eta"] = o.eta;
    cfg["steps"] = o.steps;
    cfg["width"] = o.width;
    cfg["sigma"] = o.sigma;
    cfg["loss_scale"] = std::string(to_string(config.loss_scale));
    cfg["snapshot_every"] = o.snapshot_every;
    manifest.write_output(o.out, format_trajectory_csv(traj));
    auto with_geometry = [&](FilterBank bank) {
        bank.channels = data.patches.geometry.channels;
        bank.kernel = data.patches.geometry.kernel;
        return bank;
    };
    if (!o.filters_out.empty())
        manifest.write_output(o.filters_out, format_filter_bank(with_geometry(traj.final().bank)));
    if (!o.init_out.empty())
        manifest.write_output(o.init_out, format_filter_bank(with_geometry(traj.snapshots.front().bank)));
    manifest.finish(o.out);

    const Snapshot& last = traj.final();
    const double loss = 0.5 * (data.patches.K * last.average_filter - y).squaredNorm() *
                        gradient_scale(config.loss_scale, data.patches.rows());
    out << "steps " << o.steps << " width " << o.width << " contraction " << io::format_double(traj.contraction)
        << "\nfinal loss " << io::format_double(loss) << "\nwrote " << o.out << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
struct PredictOptions {
    std::string avg_patches;
    std::string pca;
    std::string labels = "true";
    std::string method = "exact_eigen";
    double eta = 0.1;
    int steps = 100;
    double sigma = 0.0;
    std::string loss_scale = "one_over_n";
    std::string out;
};

int run_predict(const PredictOptions& o, const GlobalOptions& g, std::ostream& out) {
    Manifest manifest("predict", g);
    const Problem p = load_problem(o.avg_patches, o.pca, manifest);
    const Vector y = resolve_labels(o.labels, p.data.labels, g.seed);
    const LossScale scale = parse_loss_scale(o.loss_scale);
    const double eta = effective_eta(o.eta, scale, p.K_tilde.rows());
    const SolutionMethod method = parse_method(o.method);

    const PatchStats stats = second_moment_stats(p.K_tilde);
    AnalyticSolution solution;
    std::optional<double> cosine;
    switch (method) {
        case SolutionMethod::paper_closed_form: solution = closed_form_paper(p.K_tilde, y, eta, o.steps); break;
        case SolutionMethod::exact_eigen: solution = closed_form_exact(p.K_tilde, y, eta, o.steps); break;
        case SolutionMethod::ridge:
        case SolutionMethod::woodbury_expectation: {
            const auto ab = ab_diagonals(stats.sigma_diag, stats.mu_hat, eta, o.steps);
            const LambdaMatrix lambda = lambda_matrix(ab, stats.mu_hat, stats.sigma_diag);
            if (method == SolutionMethod::ridge) {
                solution = ridge_solution(p.K_tilde, y, lambda.value);
            } else {
                const WoodburyResult w = expected_random_weights(stats, lambda.value);
                solution = w.solution;
                cosine = w.cosine;
            }
            break;
        }
    }
    const EnergyProfile profile = predicted_profile(solution.w_tilde, o.sigma);

    nlohmann::json diagnostics{{"cond", number_or_null(solution.condition)},
                               {"commutation_gap", number_or_null(commutation_gap(p.K_tilde, y, eta, o.steps))},
                               {"offdiag_residual", stats.offdiag_residual},
                               {"mu_norm_sq", stats.mu_hat.squaredNorm()},
                               {"contraction", contraction_factor(p.K_tilde, eta)}};
    if (cosine) diagnostics["woodbury_cosine"] = *cosine;
    nlohmann::json j{{"method", std::string(to_string(method))},
                     {"eta", o.eta},
                     {"eta_effective", eta},
                     {"loss_scale", std::string(to_string(scale))},
                     {"t", o.steps},
                     {"sigma", o.sigma},
                     {"labels", o.labels},
                     {"w_tilde", to_std(solution.w_tilde)},
                     {"profile", to_std(profile.e)},
                     {"diagnostics", diagnostics}};

    auto& cfg = manifest.config();
    cfg["method"] = o.method;
    cfg["labels"] = o.labels;
    cfg["eta"] = o.eta;
    cfg["steps"] = o.steps;
    cfg["sigma"] = o.sigma;
    cfg["loss_scale"] = std::string(to_string(scale));
    manifest.write_output(o.out, j.dump(2) + "\n");
    manifest.finish(o.out);
    out << "method " << to_string(method) << " commutation_gap "
        << io::format_double(diagnostics["commutation_gap"].is_null() ? NAN
                                                                      : diagnostics["commutation_gap"].get<double>())
        << "\nwrote " << o.out << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
struct SensitivityOptions {
    std::string avg_patches;
    std::string pca;
    int direction = 0;
    double eps_max = 1.0;
    double eps_step = 0.1;
    double eta = 0.1;
    int steps = 100;
    double sigma = 0.0;
    std::string loss_scale = "one_over_n";
    std::string out;
    std::string svg;
};

int run_sensitivity(const SensitivityOptions& o, const GlobalOptions& g, std::ostream& out) {
    if (!(o.eps_step > 0.0)) throw UsageError("--eps-step must be positive");
    if (o.eps_max < 0.0) throw UsageError("--eps-max must be >= 0");
    Manifest manifest("sensitivity", g);
    const Problem p = load_problem(o.avg_patches, o.pca, manifest);
    const LossScale scale = parse_loss_scale(o.loss_scale);
    const double eta = effective_eta(o.eta, scale, p.K_tilde.rows());
    const Vector& y = p.data.labels;

    // Grid points are i * step so that 0.1, 0.2, ... carry no accumulated drift.
    const auto count = static_cast<int>(std::floor(o.eps_max / o.eps_step + 1e-9));
    std::vector<double> eps, corr;
    std::string csv = "epsilon,correlation\n";
    for (int i = 0; i <= count; ++i) {
        const double e = i * o.eps_step;
        const Matrix shifted = shift_class_mean(p.data.patches.K, y, p.basis, o.direction, e);
        const double r = predicted_label_sensitivity(to_pca(shifted, p.basis), y, eta, o.steps, o.sigma);
        eps.push_back(e);
        corr.push_back(r);
        csv += io::format_double(e) + "," + io::format_double(r) + "\n";
    }

    auto& cfg = manifest.config();
    cfg["direction"] = o.direction;
    cfg["eps_max"] = o.eps_max;
    cfg["eps_step"] = o.eps_step;
    cfg["eta"] = o.eta;
    cfg["steps"] = o.steps;
    cfg["sigma"] = o.sigma;
    cfg["loss_scale"] = std::string(to_string(scale));
    manifest.write_output(o.out, csv);
    if (!o.svg.empty())
        manifest.write_output(o.svg, svg::render({"Predicted true vs random label profile correlation", "epsilon",
                                                  "correlation"},
                                                 {{eps, corr, "direction " + std::to_string(o.direction)}}));
    manifest.finish(o.out);
    out << "epsilon correlation\n";
    for (std::size_t i = 0; i < eps.size(); ++i)
        out << io::format_double(eps[i]) << ' ' << io::format_double(corr[i]) << "\n";
    return kExitOk;
}

void add_training_options(CLI::App* sub, double& eta, int& steps, double& sigma, std::string& loss_scale) {
    sub->add_option("--eta", eta, "Learning rate")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--steps", steps, "GD iterations t")->check(CLI::NonNegativeNumber)->capture_default_str();
    sub->add_option("--sigma", sigma, "Initialization standard deviation")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub->add_option("--loss-scale", loss_scale, "one_over_n | unnormalized")
        ->check(CLI::IsMember({"one_over_n", "unnormalized"}))
        ->capture_default_str();
}

}  // namespace

void add_model_commands(CLI::App& app, const GlobalOptions& g, std::vector<Command>& commands) {
    {
        auto o = std::make_shared<SimulateOptions>();
        auto* sub = app.add_subcommand("simulate", "Gradient descent on M filters over an average-patch matrix");
        sub->add_option("--avg-patches", o->avg_patches, "Average-patch CSV")->required()->check(CLI::ExistingFile);
        add_label_option(sub, o->labels);
        add_training_options(sub, o->eta, o->steps, o->sigma, o->loss_scale);
        sub->add_option("--width", o->width, "Number of filters M")->check(CLI::Range(1, 1 << 20))
            ->capture_default_str();
        sub->add_option("--snapshot-every", o->snapshot_every, "Snapshot interval (0 = first and last only)")
            ->check(CLI::NonNegativeNumber);
        sub->add_option("--out", o->out, "Trajectory CSV")->required();
        sub->add_option("--filters-out", o->filters_out, "Final filter bank CSV");
        sub->add_option("--init-out", o->init_out, "Initial filter bank CSV");
        commands.push_back(
            {sub, [o, &g](std::ostream& out, std::ostream& err) { return run_simulate(*o, g, out, err); }});
    }
    {
        auto o = std::make_shared<PredictOptions>();
        auto* sub = app.add_subcommand("predict", "Closed-form weights and predicted profile");
        sub->add_option("--avg-patches", o->avg_patches, "Average-patch CSV")->required()->check(CLI::ExistingFile);
        sub->add_option("--pca", o->pca, "Basis JSON (default: centered fit on the rows)")->check(CLI::ExistingFile);
        add_label_option(sub, o->labels);
        sub->add_option("--method", o->method, "paper_closed_form | exact_eigen | ridge | woodbury_expectation")
            ->check(CLI::IsMember({"paper_closed_form", "exact_eigen", "ridge", "woodbury_expectation"}))
            ->capture_default_str();
        add_training_options(sub, o->eta, o->steps, o->sigma, o->loss_scale);
        sub->add_option("--out", o->out, "Prediction JSON")->required();
        commands.push_back({sub, [o, &g](std::ostream& out, std::ostream&) { return run_predict(*o, g, out); }});
    }
    {
        auto o = std::make_shared<SensitivityOptions>();
        auto* sub = app.add_subcommand("sensitivity", "Predicted label sensitivity as class means separate");
        sub->add_option("--avg-patches", o->avg_patches, "Average-patch CSV")->required()->check(CLI::ExistingFile);
        sub->add_option("--pca", o->pca, "Basis JSON (default: centered fit on the rows)")->check(CLI::ExistingFile);
        sub->add_option("--direction", o->direction, "PCA component index of the shift")->capture_default_str();
        sub->add_option("--eps-max", o->eps_max, "Largest shift")->capture_default_str();
        sub->add_option("--eps-step", o->eps_step, "Grid step")->capture_default_str();
        add_training_options(sub, o->eta, o->steps, o->sigma, o->loss_scale);
        sub->add_option("--out", o->out, "epsilon,correlation CSV")->required();
        sub->add_option("--svg", o->svg, "Optional line plot");
        commands.push_back({sub, [o, &g](std::ostream& out, std::ostream&) { return run_sensitivity(*o, g, out); }});
    }
}

}  // namespace patchlens::cli
