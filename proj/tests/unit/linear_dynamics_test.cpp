#include "patchlens/linear_dynamics.hpp"

#include "patchlens/data_io.hpp"
#include "patchlens/profile.hpp"
#include "patchlens/rng.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

namespace patchlens {
namespace {

using testing::loop_gd;
using testing::max_abs;
using testing::min_norm_solution;
using testing::random_matrix;
using testing::random_vector;
using testing::to_vector;

const Matrix kI2 = Matrix::Identity(2, 2);
const Vector kY10{{1.0, 0.0}};

TEST(GdStep, HandExamples) {
    const Vector w1 = gd_step(Vector::Zero(2), kI2, kY10, 0.1);
    EXPECT_NEAR(w1(0), 0.1, 1e-15);
    EXPECT_EQ(w1(1), 0.0);
    const Vector w2 = gd_step(w1, kI2, kY10, 0.1);
    EXPECT_NEAR(w2(0), 0.19, 1e-15);
    EXPECT_EQ(w2(1), 0.0);
    EXPECT_THROW(gd_step(Vector::Zero(3), kI2, kY10, 0.1), DimensionError);
}

TEST(GdStep, FixedPointAndScale) {
    const Matrix K = random_matrix(5, 5, 1);
    const Vector w = random_vector(5, 2);
    const Vector y = K * w;
    EXPECT_LE(max_abs(gd_step(w, K, y, 0.1) - w), 1e-14);

    const Matrix K2 = random_matrix(8, 3, 3);
    const Vector y2 = random_vector(8, 4);
    const Vector w0 = random_vector(3, 5);
    const Vector full = gd_step(w0, K2, y2, 0.05);
    const Vector scaled = gd_step(w0, K2, y2, 0.05 * 8.0, LossScale::one_over_n);
    EXPECT_LE(max_abs(full - scaled), 1e-14);
}

TEST(GdRun, HandExampleAndSnapshots) {
    const std::vector<int> at{1, 5, 7};
    const auto traj = gd_run(kI2, kY10, 0.1, 2, Vector::Zero(2), at);
    ASSERT_EQ(traj.snapshots.size(), 3u);
    EXPECT_EQ(traj.snapshots[0].iteration, 0);
    EXPECT_EQ(traj.snapshots[1].iteration, 1);
    EXPECT_NEAR(traj.final().average_filter(0), 0.19, 1e-15);
    EXPECT_EQ(traj.final().average_filter(1), 0.0);
    EXPECT_FALSE(traj.warning.has_value());
    EXPECT_NEAR(traj.contraction, 0.9, 1e-15);

    const Vector w0 = random_vector(2, 6);
    EXPECT_EQ(gd_run(kI2, kY10, 0.1, 0, w0).final().average_filter, w0);
}

TEST(GdRun, MatchesLoopOracle) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Matrix K = random_matrix(20, 6, seed, 0.3);
        const Vector y = random_vector(20, 100 + seed);
        const Vector w0 = random_vector(6, 200 + seed, 0.1);
        const auto traj = gd_run(K, y, 0.1, 40, w0);
        const Vector oracle = to_vector(loop_gd(K, y, 0.1, 40, std::vector<double>(w0.data(), w0.data() + 6)));
        EXPECT_LE(max_abs(traj.final().average_filter - oracle), 1e-12);
    }
}

TEST(GdRun, ConvergesToMinimumNormSolution) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        // Underdetermined, so the minimum-norm choice matters.
        const Matrix K = random_matrix(4, 9, seed, 0.4);
        const Vector y = random_vector(4, 50 + seed);
        const double lmax = testing::reference_eigenvalues_desc(K.transpose() * K)(0);
        const auto traj = gd_run(K, y, 1.0 / lmax, 20000, Vector::Zero(9));
        EXPECT_LE(max_abs(traj.final().average_filter - min_norm_solution(K, y)), 1e-6) << seed;
    }
}

TEST(GdRun, UnstableStepWarnsAndDivergenceNamesIteration) {
    const auto traj = gd_run(kI2, kY10, 2.5, 3, Vector::Zero(2));
    ASSERT_TRUE(traj.warning.has_value());
    EXPECT_NE(traj.warning->find("unstable"), std::string::npos);
    try {
        gd_run(kI2, kY10, 1e200, 10, Vector::Zero(2));
        FAIL();
    } catch (const NumericError& e) {
        EXPECT_NE(std::string(e.what()).find("iteration"), std::string::npos);
    }
    EXPECT_THROW(gd_run(kI2, kY10, 0.0, 1, Vector::Zero(2)), InvalidArgument);
    EXPECT_THROW(gd_run(kI2, kY10, 0.1, -1, Vector::Zero(2)), InvalidArgument);
}

TEST(GdRun, LinearInLabels) {
    const Matrix K = random_matrix(30, 8, 7, 0.2);
    const Vector y1 = random_vector(30, 8);
    const Vector y2 = random_vector(30, 9);
    const double a = 1.7, b = -0.6;
    const Vector w0 = Vector::Zero(8);
    const Vector combined = gd_run(K, a * y1 + b * y2, 0.1, 200, w0).final().average_filter;
    const Vector separate =
        a * gd_run(K, y1, 0.1, 200, w0).final().average_filter + b * gd_run(K, y2, 0.1, 200, w0).final().average_filter;
    EXPECT_LE(max_abs(combined - separate), 1e-10);
}

TEST(MultiFilterRun, SingleZeroFilterIsBitIdenticalToGdRun) {
    const Matrix K = random_matrix(25, 7, 10, 0.3);
    const Vector y = random_vector(25, 11);
    GDConfig cfg;
    cfg.steps = 60;
    const std::vector<int> at{10, 30};
    const auto multi = multi_filter_run(K, y, cfg, at);
    const auto single = gd_run(K, y, cfg.eta, cfg.steps, Vector::Zero(7), at);
    ASSERT_EQ(multi.snapshots.size(), single.snapshots.size());
    for (std::size_t s = 0; s < multi.snapshots.size(); ++s) {
        EXPECT_EQ(multi.snapshots[s].iteration, single.snapshots[s].iteration);
        EXPECT_EQ(multi.snapshots[s].average_filter, single.snapshots[s].average_filter);
    }
}

TEST(MultiFilterRun, DispersionConstantAndAverageFollowsGd) {
    const Matrix K = random_matrix(40, 9, 12, 0.25);
    const Vector y = random_vector(40, 13);
    for (int width : {1, 3, 16, 64})
        for (double sigma : {0.0, 0.01, 1.0}) {
            GDConfig cfg;
            cfg.steps = 50;
            cfg.width = width;
            cfg.sigma_init = sigma;
            cfg.seed = static_cast<std::uint64_t>(width);
            std::vector<int> every(51);
            std::iota(every.begin(), every.end(), 0);
            const auto traj = multi_filter_run(K, y, cfg, every);
            const Vector d0 = traj.snapshots.front().dispersion;
            const Vector avg0 = traj.snapshots.front().average_filter;
            const auto reference = gd_run(K, y, cfg.eta, cfg.steps, avg0, every);
            for (std::size_t s = 0; s < traj.snapshots.size(); ++s) {
                const auto& snap = traj.snapshots[s];
                // With sigma = 0 the only dispersion is round-off in the mean (~1e-34).
                ASSERT_LE(max_abs(snap.dispersion - d0), 1e-12 * d0.maxCoeff() + 1e-30);
                ASSERT_LE(max_abs(snap.average_filter - reference.snapshots[s].average_filter), 1e-12);
            }
        }
}

TEST(MultiFilterRun, InitializationStatistics) {
    GDConfig cfg;
    cfg.width = 4000;
    cfg.sigma_init = 0.5;
    cfg.seed = 3;
    const auto traj = multi_filter_run(Matrix::Ones(2, 5), Vector::Ones(2), cfg);
    const auto& init = traj.snapshots.front();
    EXPECT_LE(max_abs(init.average_filter), 5.0 * 0.5 / std::sqrt(4000.0));
    EXPECT_LE(max_abs(Vector(init.dispersion.array() - 0.25)), 5.0 * 0.25 * std::sqrt(2.0 / 4000.0));
    EXPECT_EQ(init.bank.sigma_init, 0.5);

    cfg.width = 0;
    EXPECT_THROW(multi_filter_run(Matrix::Ones(2, 5), Vector::Ones(2), cfg), InvalidArgument);
}

TEST(MultiFilterRun, MeanSquareProfileDecomposesExactly) {
    const Matrix K = random_matrix(30, 6, 14, 0.3, 0.2);
    const Vector y = random_vector(30, 15);
    const auto basis = fit_pca(K, true);
    GDConfig cfg;
    cfg.steps = 25;
    cfg.width = 32;
    cfg.sigma_init = 0.2;
    const auto traj = multi_filter_run(K, y, cfg, std::vector<int>{5});
    for (const auto& snap : traj.snapshots) {
        const auto e = energy_profile(snap.bank, basis, ProfileVariant::mean_square);
        const Vector w_tilde = basis.U.transpose() * snap.average_filter;
        const Vector disp_tilde = filter_moments(snap.bank.filters * basis.U).dispersion;
        const Vector model = w_tilde.array().square().matrix() + disp_tilde;
        EXPECT_LE(max_abs(e.e - model), 1e-12 * std::max(1.0, e.e.maxCoeff()));
    }
}

TEST(SharedClassMean, SharedClassMeanMakesLabelsIrrelevant) {
    SharedMeanOptions opt;
    opt.n_per_class = 50;
    opt.seed = 4;
    const auto ds = gen_shared_mean_dataset(opt);
    const Matrix& K = ds.patches.K;
    const Vector half = Vector::Constant(K.rows(), 0.5);
    std::vector<int> every(201);
    std::iota(every.begin(), every.end(), 0);
    const auto truth = gd_run(K, ds.y, 0.1, 200, Vector::Zero(K.cols()), every, LossScale::one_over_n);
    const auto expect = gd_run(K, half, 0.1, 200, Vector::Zero(K.cols()), every, LossScale::one_over_n);
    EXPECT_FALSE(truth.warning.has_value());
    for (std::size_t s = 0; s < truth.snapshots.size(); ++s)
        ASSERT_LE(max_abs(truth.snapshots[s].average_filter - expect.snapshots[s].average_filter), 1e-12) << s;
}

TEST(SharedClassMean, MonteCarloMatchesTrueLabels) {
    SharedMeanOptions opt;
    opt.n_per_class = 30;
    opt.seed = 5;
    const auto ds = gen_shared_mean_dataset(opt);
    const Matrix& K = ds.patches.K;
    const int draws = 2000;
    const auto mc = monte_carlo_random_labels(K, 0.1, 100, draws, 77, LossScale::one_over_n, 2);
    const Vector truth = gd_run(K, ds.y, 0.1, 100, Vector::Zero(K.cols()), {}, LossScale::one_over_n)
                             .final()
                             .average_filter;
    for (Index i = 0; i < K.cols(); ++i)
        EXPECT_LE(std::abs(mc.mean(i) - truth(i)), 4.0 * mc.stddev(i) / std::sqrt(double(draws))) << i;
}

TEST(MonteCarlo, IndependentOfThreadCountAndMatchesSingleRuns) {
    const Matrix K = random_matrix(12, 4, 16, 0.3);
    const auto one = monte_carlo_random_labels(K, 0.1, 30, 150, 9, LossScale::unnormalized, 1);
    const auto three = monte_carlo_random_labels(K, 0.1, 30, 150, 9, LossScale::unnormalized, 3);
    EXPECT_EQ(one.mean, three.mean);
    EXPECT_EQ(one.stddev, three.stddev);

    // Draw r is the coin sequence of Rng(seed + r).
    Vector sum = Vector::Zero(4);
    for (int r = 0; r < 150; ++r) {
        Rng rng(9 + static_cast<std::uint64_t>(r));
        Vector y(12);
        for (Index i = 0; i < 12; ++i) y(i) = rng.coin() ? 1.0 : 0.0;
        sum += to_vector(loop_gd(K, y, 0.1, 30, std::vector<double>(4, 0.0)));
    }
    EXPECT_LE(max_abs(one.mean - sum / 150.0), 1e-12);
    EXPECT_THROW(monte_carlo_random_labels(K, 0.1, 30, 1, 0), InvalidArgument);
}

TEST(PatchSpan, RowsOrthogonalAndRank) {
    const Matrix P = random_matrix(5, 12, 17);
    const PatchSpan span(P);
    EXPECT_EQ(span.rank(), 5);
    for (Index i = 0; i < 5; ++i) EXPECT_LE(span.residual(P.row(i).transpose()), 1e-10);
    Vector f = random_vector(12, 18);
    f -= span.project(f);
    EXPECT_NEAR(span.residual(f), f.norm(), 1e-10);
    EXPECT_THROW(span.residual(Vector::Zero(3)), DimensionError);
}

TEST(PatchSpan, GdFilterLiesInPatchSpan) {
    const auto set = testing::zero_sum_periodic_set(6, 9, 19);
    const auto patches = extract_patches(set, 3);
    const PatchSpan span(patches.rows);
    EXPECT_EQ(span.rank(), 26);
    const auto K = build_avg_patch_matrix(set, 3).K;
    Vector y(6);
    for (Index i = 0; i < 6; ++i) y(i) = set.labels[static_cast<std::size_t>(i)];

    GDConfig cfg;
    cfg.steps = 50;
    cfg.width = 4;
    const auto exact = multi_filter_run(K, y, cfg).final();
    for (Index j = 0; j < 4; ++j) {
        const Vector f = exact.bank.filters.row(j).transpose();
        EXPECT_GT(f.norm(), 0.0);
        EXPECT_LE(span.residual(f), 1e-9 * f.norm());
    }

    cfg.sigma_init = 1e-6;
    cfg.width = 16;
    const auto noisy = multi_filter_run(K, y, cfg).final();
    for (Index j = 0; j < 16; ++j)
        EXPECT_LE(span.residual(noisy.bank.filters.row(j).transpose()), 1e-6 * std::sqrt(27.0) + 1e-9);
    // The all-ones direction is orthogonal to every patch.
    EXPECT_NEAR(span.residual(Vector::Ones(27)), std::sqrt(27.0), 1e-10);
}

TEST(PatchDecomposition, Examples) {
    Matrix P = Matrix::Zero(3, 4);
    P(0, 0) = 1.0;
    P(1, 1) = 1.0;
    P(2, 2) = 1.0;
    const auto two = patch_weight_decomposition(2.0 * P.row(0).transpose(), P);
    EXPECT_LE(max_abs(two.delta - Vector{{2.0, 0.0, 0.0}}), 1e-12);
    EXPECT_LE(two.reconstruction_error, 1e-12);

    const auto zero = patch_weight_decomposition(Vector::Zero(4), P);
    EXPECT_EQ(zero.delta, Vector::Zero(3));

    const Matrix Q = random_matrix(10, 6, 20);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Vector f = Q.transpose() * random_vector(10, 30 + seed);
        const auto dec = patch_weight_decomposition(f, Q);
        EXPECT_LE((Q.transpose() * dec.delta - f).norm(), 1e-9 * std::max(1.0, f.norm()));
        EXPECT_LE(dec.reconstruction_error, 1e-9 * std::max(1.0, f.norm()));
        // Minimum norm: delta lies in the column space of Q.
        EXPECT_LE(max_abs(dec.delta - min_norm_solution(Q.transpose(), f)), 1e-9);
    }
    EXPECT_NEAR(patch_span_residual(Vector{{0, 0, 0, 3.0}}, P), 3.0, 1e-12);
}

TEST(TrajectoryCsv, Layout) {
    const auto traj = gd_run(kI2, kY10, 0.1, 2, Vector::Zero(2));
    EXPECT_EQ(format_trajectory_csv(traj),
              "iter,coord,avg_filter_value,dispersion\n"
              "0,0,0,0\n0,1,0,0\n2,0,0.19,0\n2,1,0,0\n");
}

TEST(LossScale, Parsing) {
    EXPECT_EQ(parse_loss_scale("one_over_n"), LossScale::one_over_n);
    EXPECT_EQ(parse_loss_scale(to_string(LossScale::unnormalized)), LossScale::unnormalized);
    EXPECT_THROW(parse_loss_scale("half"), InvalidArgument);
    EXPECT_EQ(gradient_scale(LossScale::one_over_n, 4), 0.25);
}

}  // namespace
}  // namespace patchlens
