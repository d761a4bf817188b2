#pragma once

#include "patchlens/filter_bank.hpp"
#include "patchlens/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace patchlens {

// Loss convention of the regression on average patches:
//   unnormalized  L = 1/2 ||K w - y||^2            gradient K^T (K w - y)
//   one_over_n    L = 1/(2N) ||K w - y||^2         gradient K^T (K w - y) / N
enum class LossScale { unnormalized, one_over_n };

std::string_view to_string(LossScale scale);
LossScale parse_loss_scale(std::string_view text);

// Multiplier applied to K^T (K w - y) for a matrix with `rows` rows.
double gradient_scale(LossScale scale, Index rows);

struct GDConfig {
    double eta = 0.1;
    int steps = 0;
    int width = 1;
    double sigma_init = 0.0;
    std::uint64_t seed = 0;
    LossScale loss_scale = LossScale::unnormalized;

    void validate() const;
};

struct Snapshot {
    int iteration = 0;
    FilterBank bank;
    Vector average_filter;
    // Per-coordinate variance of the filters about their mean, 1/M normalized.
    Vector dispersion;
};

struct Trajectory {
    std::vector<Snapshot> snapshots;
    // Set when max |1 - eta * s * lambda| over eig(K^T K) exceeds 1.
    std::optional<std::string> warning;
    double contraction = 0.0;

    const Snapshot& final() const { return snapshots.back(); }
};

struct FilterMoments {
    Vector mean;
    Vector dispersion;
};

// Column mean and 1/M column variance of a filter matrix (rows = filters).
FilterMoments filter_moments(const Matrix& filters);

// max |1 - eta * s * lambda| over eigenvalues lambda of K^T K, s = gradient_scale.
double contraction_factor(const Matrix& K, double eta, LossScale scale = LossScale::unnormalized);

// w - eta * s * K^T (K w - y).
Vector gd_step(const Vector& w, const Matrix& K, const Vector& y, double eta,
               LossScale scale = LossScale::unnormalized);

// Full-batch GD on a single filter. Iteration 0 and `steps` are always
// snapshotted, plus every entry of `snapshot_at` in [0, steps].
Trajectory gd_run(const Matrix& K, const Vector& y, double eta, int steps, const Vector& w0,
                  std::span<const int> snapshot_at = {}, LossScale scale = LossScale::unnormalized);

// M filters drawn i.i.d. N(0, sigma_init^2) per coordinate; the loss sees the
// average filter, so every filter receives the gradient taken at the average.
Trajectory multi_filter_run(const Matrix& K, const Vector& y, const GDConfig& config,
                            std::span<const int> snapshot_at = {});

// Projection onto the row space of a patch matrix, built once from the
// eigendecomposition of P^T P. Eigenvalues below 1e-10 * lambda_max count as zero.
class PatchSpan {
public:
    explicit PatchSpan(const Matrix& patches, double rank_cutoff = 1e-10);

    Index rank() const { return basis_.cols(); }
    Index dim() const { return basis_.rows(); }

    // ||f - P_S f||
    double residual(const Vector& f) const;
    Vector project(const Vector& f) const;

    struct Decomposition {
        Vector delta;
        double reconstruction_error = 0.0;
    };
    // Minimum-norm delta minimizing ||P^T delta - f||.
    Decomposition decompose(const Vector& f) const;

private:
    Matrix patches_;
    Matrix basis_;   // d x r, orthonormal columns spanning the row space
    Vector values_;  // r positive eigenvalues of P^T P
};

double patch_span_residual(const Vector& f, const Matrix& patches);
PatchSpan::Decomposition patch_weight_decomposition(const Vector& f, const Matrix& patches);

struct MonteCarloLabels {
    Vector mean;
    Vector stddev;  // per-coordinate sample standard deviation
    int draws = 0;
};

// Runs gd_run from zero for `draws` independent fair-coin label vectors
// (draw r uses seed + r) and reports the per-coordinate mean and spread of
// the final weights. Draws may run on `threads` workers; the reduction is
// in draw order, so the result does not depend on the thread count.
MonteCarloLabels monte_carlo_random_labels(const Matrix& K, double eta, int steps, int draws,
                                           std::uint64_t seed, LossScale scale = LossScale::unnormalized,
                                           int threads = 1);

// Snapshot iterations as `iter,coord,avg_filter_value,dispersion` rows.
std::string format_trajectory_csv(const Trajectory& trajectory);

}  // namespace patchlens
