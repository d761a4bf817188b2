#include "patchlens/linear_dynamics.hpp"

#include "patchlens/io.hpp"
#include "patchlens/jacobi.hpp"
#include "patchlens/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <thread>

namespace patchlens {

std::string_view to_string(LossScale scale) {
    return scale == LossScale::unnormalized ? "unnormalized" : "one_over_n";
}

LossScale parse_loss_scale(std::string_view text) {
    if (text == "unnormalized") return LossScale::unnormalized;
    if (text == "one_over_n" || text == "one_over_N") return LossScale::one_over_n;
    throw InvalidArgument("unknown loss scale '" + std::string(text) + "' (unnormalized|one_over_n)");
}

double gradient_scale(LossScale scale, Index rows) {
    if (scale == LossScale::unnormalized) return 1.0;
    if (rows < 1) throw InvalidArgument("gradient_scale: empty matrix");
    return 1.0 / static_cast<double>(rows);
}

void GDConfig::validate() const {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw InvalidArgument("eta must be positive");
    if (steps < 0) throw InvalidArgument("steps must be >= 0");
    if (width < 1) throw InvalidArgument("width must be >= 1");
    if (!(sigma_init >= 0.0) || !std::isfinite(sigma_init)) throw InvalidArgument("sigma_init must be >= 0");
}

namespace {

void check_shapes(const Matrix& K, const Vector& y, Index w_dim) {
    if (y.size() != K.rows())
        throw DimensionError("labels have length " + std::to_string(y.size()) + ", K has " +
                             std::to_string(K.rows()) + " rows");
    if (w_dim != K.cols())
        throw DimensionError("weights have length " + std::to_string(w_dim) + ", K has " +
                             std::to_string(K.cols()) + " columns");
}

// eta * s * K^T (K w - y); shared by every simulator so their arithmetic matches.
Vector descent_increment(const Matrix& K, const Vector& y, const Vector& w, double eta_scaled) {
    const Vector residual = K * w - y;
    return eta_scaled * (K.transpose() * residual);
}

std::set<int> snapshot_schedule(int steps, std::span<const int> requested) {
    std::set<int> at{0, steps};
    for (int it : requested)
        if (it >= 0 && it <= steps) at.insert(it);
    return at;
}

std::optional<std::string> stability_warning(double contraction) {
    if (contraction < 1.0 + 1e-12) return std::nullopt;
    return "step size is unstable: max |1 - eta*lambda| = " + io::format_double(contraction) +
           " >= 1; iterates may diverge";
}

Snapshot make_snapshot(int iteration, const Matrix& filters, std::optional<double> sigma) {
    Snapshot s;
    s.iteration = iteration;
    s.bank.filters = filters;
    s.bank.sigma_init = sigma;
    const FilterMoments m = filter_moments(filters);
    s.average_filter = m.mean;
    s.dispersion = m.dispersion;
    return s;
}

}  // namespace

FilterMoments filter_moments(const Matrix& filters) {
    if (filters.rows() < 1) throw InvalidArgument("filter_moments: no filters");
    FilterMoments m;
    m.mean = filters.colwise().mean().transpose();
    const Matrix dev = filters.rowwise() - m.mean.transpose();
    m.dispersion = dev.array().square().colwise().sum().transpose() / static_cast<double>(filters.rows());
    return m;
}

double contraction_factor(const Matrix& K, double eta, LossScale scale) {
    const Matrix gram = gradient_scale(scale, K.rows()) * (K.transpose() * K);
    const SymmetricEigen eig = jacobi_eigen(gram);
    double worst = 0.0;
    for (Index i = 0; i < eig.values.size(); ++i) worst = std::max(worst, std::abs(1.0 - eta * eig.values(i)));
    return worst;
}

Vector gd_step(const Vector& w, const Matrix& K, const Vector& y, double eta, LossScale scale) {
    check_shapes(K, y, w.size());
    return w - descent_increment(K, y, w, eta * gradient_scale(scale, K.rows()));
}

Trajectory gd_run(const Matrix& K, const Vector& y, double eta, int steps, const Vector& w0,
                  std::span<const int> snapshot_at, LossScale scale) {
    check_shapes(K, y, w0.size());
    if (!(eta > 0.0)) throw InvalidArgument("gd_run: eta must be positive");
    if (steps < 0) throw InvalidArgument("gd_run: steps must be >= 0");

    Trajectory traj;
    traj.contraction = contraction_factor(K, eta, scale);
    traj.warning = stability_warning(traj.contraction);

    const auto schedule = snapshot_schedule(steps, snapshot_at);
    const double eta_scaled = eta * gradient_scale(scale, K.rows());
    Vector w = w0;
    for (int t = 0;; ++t) {
        if (schedule.count(t)) traj.snapshots.push_back(make_snapshot(t, w.transpose(), std::nullopt));
        if (t == steps) break;
        w -= descent_increment(K, y, w, eta_scaled);
        if (!w.allFinite()) throw NumericError("gd_run: non-finite weights at iteration " + std::to_string(t + 1));
    }
    return traj;
}

Trajectory multi_filter_run(const Matrix& K, const Vector& y, const GDConfig& config,
                            std::span<const int> snapshot_at) {
    config.validate();
    check_shapes(K, y, K.cols());

    Trajectory traj;
    traj.contraction = contraction_factor(K, config.eta, config.loss_scale);
    traj.warning = stability_warning(traj.contraction);

    Rng rng(config.seed);
    Matrix filters(config.width, K.cols());
    for (Index j = 0; j < filters.rows(); ++j)
        for (Index i = 0; i < filters.cols(); ++i) filters(j, i) = rng.normal(0.0, config.sigma_init);

    const auto schedule = snapshot_schedule(config.steps, snapshot_at);
    const double eta_scaled = config.eta * gradient_scale(config.loss_scale, K.rows());
    for (int t = 0;; ++t) {
        if (schedule.count(t)) traj.snapshots.push_back(make_snapshot(t, filters, config.sigma_init));
        if (t == config.steps) break;
        const Vector average = filters.colwise().mean().transpose();
        const Vector increment = descent_increment(K, y, average, eta_scaled);
        filters.rowwise() -= increment.transpose();
        if (!filters.allFinite())
            throw NumericError("multi_filter_run: non-finite weights at iteration " + std::to_string(t + 1));
    }
    return traj;
}

PatchSpan::PatchSpan(const Matrix& patches, double rank_cutoff) : patches_(patches) {
    if (patches.rows() < 1) throw InvalidArgument("PatchSpan: no patches");
    const SymmetricEigen eig = jacobi_eigen(patches.transpose() * patches);
    const double top = eig.values.size() ? eig.values(0) : 0.0;
    Index r = 0;
    if (top > 0.0)
        while (r < eig.values.size() && eig.values(r) > rank_cutoff * top) ++r;
    basis_ = eig.vectors.leftCols(r);
    values_ = eig.values.head(r);
}

Vector PatchSpan::project(const Vector& f) const {
    if (f.size() != patches_.cols())
        throw DimensionError("PatchSpan: vector has length " + std::to_string(f.size()) + ", patches have d=" +
                             std::to_string(patches_.cols()));
    return basis_ * (basis_.transpose() * f);
}

double PatchSpan::residual(const Vector& f) const { return (f - project(f)).norm(); }

PatchSpan::Decomposition PatchSpan::decompose(const Vector& f) const {
    if (f.size() != patches_.cols()) throw DimensionError("PatchSpan: dimension mismatch");
    const Vector coords = (basis_.transpose() * f).cwiseQuotient(values_);
    Decomposition out;
    out.delta = patches_ * (basis_ * coords);
    out.reconstruction_error = (patches_.transpose() * out.delta - f).norm();
    return out;
}

double patch_span_residual(const Vector& f, const Matrix& patches) { return PatchSpan(patches).residual(f); }

PatchSpan::Decomposition patch_weight_decomposition(const Vector& f, const Matrix& patches) {
    return PatchSpan(patches).decompose(f);
}

MonteCarloLabels monte_carlo_random_labels(const Matrix& K, double eta, int steps, int draws,
                                           std::uint64_t seed, LossScale scale, int threads) {
    if (draws < 2) throw InvalidArgument("monte_carlo_random_labels: need at least 2 draws");
    if (steps < 0) throw InvalidArgument("monte_carlo_random_labels: steps must be >= 0");
    constexpr int kChunk = 64;
    const Index n = K.rows();
    const Index d = K.cols();
    const double eta_scaled = eta * gradient_scale(scale, n);
    const Matrix Kt = K.transpose();

    // finals.col(r) = weights after `steps` iterations for draw r.
    Matrix finals(d, draws);
    const int chunks = (draws + kChunk - 1) / kChunk;
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int c = next++; c < chunks; c = next++) {
            const int first = c * kChunk;
            const int count = std::min(kChunk, draws - first);
            Matrix Y(n, count);
            for (int r = 0; r < count; ++r) {
                Rng rng(seed + static_cast<std::uint64_t>(first + r));
                for (Index i = 0; i < n; ++i) Y(i, r) = rng.coin() ? 1.0 : 0.0;
            }
            Matrix W = Matrix::Zero(d, count);
            for (int t = 0; t < steps; ++t) W -= eta_scaled * (Kt * (K * W - Y));
            finals.middleCols(first, count) = W;
        }
    };
    const int workers = std::clamp(threads, 1, chunks);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (!finals.allFinite()) throw NumericError("monte_carlo_random_labels: non-finite weights");

    MonteCarloLabels out;
    out.draws = draws;
    out.mean = Vector::Zero(d);
    for (int r = 0; r < draws; ++r) out.mean += finals.col(r);
    out.mean /= static_cast<double>(draws);
    Vector sq = Vector::Zero(d);
    for (int r = 0; r < draws; ++r) sq += (finals.col(r) - out.mean).cwiseAbs2();
    out.stddev = (sq / static_cast<double>(draws - 1)).cwiseSqrt();
    return out;
}

std::string format_trajectory_csv(const Trajectory& trajectory) {
    std::string out = "iter,coord,avg_filter_value,dispersion\n";
    for (const auto& s : trajectory.snapshots)
        for (Index i = 0; i < s.average_filter.size(); ++i)
            out += std::to_string(s.iteration) + "," + std::to_string(i) + "," +
                   io::format_double(s.average_filter(i)) + "," + io::format_double(s.dispersion(i)) + "\n";
    return out;
}

}  // namespace patchlens
