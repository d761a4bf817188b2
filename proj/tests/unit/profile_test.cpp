#include "patchlens/profile.hpp"

#include "patchlens/rng.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace patchlens {
namespace {

using testing::max_abs;
using testing::random_matrix;
using testing::random_orthogonal;

PcaBasis random_basis(Index d, std::uint64_t seed) {
    return fit_pca(random_matrix(3 * d, d, seed, 1.0, 0.2), true);
}

FilterBank bank_of(Matrix f) {
    FilterBank b;
    b.filters = std::move(f);
    return b;
}

TEST(EnergyProfile, BasisVectorsGiveOnes) {
    const auto basis = random_basis(9, 1);
    const auto e = energy_profile(bank_of(basis.U.transpose()), basis, ProfileVariant::rms);
    EXPECT_LE(max_abs(e.e - Vector::Ones(9)), 1e-12);
    EXPECT_EQ(e.basis_fingerprint, fingerprint(basis));
}

TEST(EnergyProfile, FirstComponentIsOneHot) {
    const auto basis = random_basis(9, 2);
    const auto e = energy_profile(bank_of(basis.U.col(0).transpose()), basis, ProfileVariant::rms);
    Vector expected = Vector::Zero(9);
    expected(0) = 1.0;
    EXPECT_LE(max_abs(e.e - expected), 1e-12);
}

TEST(EnergyProfile, Homogeneity) {
    const auto basis = random_basis(12, 3);
    const Matrix f = random_matrix(7, 12, 4);
    for (double c : {0.5, 2.0, 13.0}) {
        const auto r1 = energy_profile(bank_of(f), basis, ProfileVariant::rms);
        const auto rc = energy_profile(bank_of(c * f), basis, ProfileVariant::rms);
        EXPECT_LE(max_abs(rc.e - c * r1.e), 1e-12 * c * r1.e.maxCoeff());
        const auto m1 = energy_profile(bank_of(f), basis, ProfileVariant::mean_square);
        const auto mc = energy_profile(bank_of(c * f), basis, ProfileVariant::mean_square);
        EXPECT_LE(max_abs(mc.e - c * c * m1.e), 1e-12 * c * c * m1.e.maxCoeff());
    }
}

TEST(EnergyProfile, AgainstLoopOracleAndNonnegative) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto basis = random_basis(6, 10 + seed);
        const Matrix f = random_matrix(5, 6, 40 + seed);
        const auto ms = energy_profile(bank_of(f), basis, ProfileVariant::mean_square);
        for (Index i = 0; i < 6; ++i) {
            double oracle = 0.0;
            for (Index j = 0; j < 5; ++j) oracle += std::pow(f.row(j).dot(basis.U.col(i)), 2);
            EXPECT_NEAR(ms.e(i), oracle / 5.0, 1e-13);
            EXPECT_GE(ms.e(i), 0.0);
        }
    }
}

TEST(EnergyProfile, PermutationInvarianceIsExact) {
    const auto basis = random_basis(27, 5);
    const Matrix f = random_matrix(64, 27, 6);
    std::vector<Index> order(64);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 gen(7);
    for (int trial = 0; trial < 10; ++trial) {
        std::shuffle(order.begin(), order.end(), gen);
        Matrix g(64, 27);
        for (Index j = 0; j < 64; ++j) g.row(j) = f.row(order[static_cast<std::size_t>(j)]);
        for (auto v : {ProfileVariant::rms, ProfileVariant::mean_square})
            EXPECT_EQ(energy_profile(bank_of(g), basis, v).e, energy_profile(bank_of(f), basis, v).e);
    }
}

TEST(EnergyProfile, OrthogonalMixingInvariance) {
    const auto basis = random_basis(27, 8);
    const Matrix f = random_matrix(16, 27, 9);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Matrix q = random_orthogonal(16, 100 + seed);
        for (auto v : {ProfileVariant::rms, ProfileVariant::mean_square})
            EXPECT_LE(max_abs(energy_profile(bank_of(q * f), basis, v).e - energy_profile(bank_of(f), basis, v).e),
                      1e-10);
    }
}

TEST(EnergyProfile, RmsSquaredIsMTimesMeanSquare) {
    const auto basis = random_basis(10, 11);
    const Matrix f = random_matrix(13, 10, 12, 0.3);
    const auto r = energy_profile(bank_of(f), basis, ProfileVariant::rms);
    const auto m = energy_profile(bank_of(f), basis, ProfileVariant::mean_square);
    EXPECT_LE(max_abs(Vector(r.e.array().square()) - 13.0 * m.e), 1e-12);
}

TEST(EnergyProfile, Errors) {
    const auto basis = random_basis(4, 13);
    EXPECT_THROW(energy_profile(bank_of(Matrix::Ones(2, 5)), basis, ProfileVariant::rms), DimensionError);
    EXPECT_THROW(energy_profile(bank_of(Matrix(0, 4)), basis, ProfileVariant::rms), InvalidArgument);
}

TEST(Correlation, Identities) {
    const Vector e = random_matrix(27, 1, 14).col(0).cwiseAbs();
    EXPECT_NEAR(pearson(e, e), 1.0, 1e-12);
    EXPECT_NEAR(pearson(e, Vector((3.5 * e).array() + 2.0)), 1.0, 1e-12);
    EXPECT_NEAR(pearson(e, -e), -1.0, 1e-12);
    EXPECT_NEAR(pearson(Vector{{1, 2, 3}}, Vector{{1, 0, 1}}), 0.0, 1e-15);
}

TEST(Correlation, Errors) {
    const Vector e{{1.0, 2.0, 3.0}};
    try {
        pearson(e, Vector::Constant(3, 2.0));
        FAIL();
    } catch (const InvalidArgument& err) {
        EXPECT_STREQ(err.what(), "zero variance profile");
    }
    EXPECT_THROW(pearson(e, Vector::Ones(4)), DimensionError);
    EXPECT_THROW(pearson(Vector::Ones(1), Vector::Ones(1)), DimensionError);

    EnergyProfile a{e, ProfileVariant::rms, 0};
    EnergyProfile b{e, ProfileVariant::mean_square, 0};
    EXPECT_THROW(profile_correlation(a, b), InvalidArgument);
    EXPECT_NEAR(profile_correlation(a, a), 1.0, 1e-12);
}

PatchMatrix random_patches(Index n, Index d, std::uint64_t seed) {
    PatchMatrix p;
    p.rows = random_matrix(n, d, seed);
    return p;
}

TEST(PairDistances, IdentityZeroAndIsometry) {
    const auto patches = random_patches(50, 9, 15);
    const auto id = pair_distances(patches, bank_of(Matrix::Identity(9, 9)), 200, 1);
    ASSERT_EQ(id.pairs.size(), 200u);
    for (const auto& p : id.pairs) EXPECT_NEAR(p.mapped, p.input, 1e-12);

    const auto zero = pair_distances(patches, bank_of(Matrix::Zero(4, 9)), 100, 1);
    for (const auto& p : zero.pairs) EXPECT_EQ(p.mapped, 0.0);
    EXPECT_FALSE(zero.correlation.has_value());

    const auto iso = pair_distances(patches, bank_of(random_orthogonal(9, 16)), 300, 2);
    ASSERT_TRUE(iso.correlation.has_value());
    EXPECT_NEAR(*iso.correlation, 1.0, 1e-12);
}

TEST(PairDistances, MatchesGramQuadraticForm) {
    const auto patches = random_patches(40, 6, 17);
    const Matrix f = random_matrix(3, 6, 18);
    const Matrix gram = f.transpose() * f;
    const auto report = pair_distances(patches, bank_of(f), 500, 3);
    // Replaying the documented index stream identifies each pair.
    Rng rng(3);
    for (const auto& p : report.pairs) {
        const auto i = static_cast<Index>(rng.index(40));
        auto j = static_cast<Index>(rng.index(39));
        if (j >= i) ++j;
        ASSERT_NE(i, j);
        const Vector diff = (patches.rows.row(i) - patches.rows.row(j)).transpose();
        EXPECT_NEAR(p.input, diff.norm(), 1e-12);
        EXPECT_NEAR(p.mapped * p.mapped, diff.dot(gram * diff), 1e-10);
    }
}

TEST(PairDistances, SeededAndErrors) {
    const auto patches = random_patches(10, 4, 19);
    const auto f = bank_of(random_matrix(2, 4, 20));
    const auto a = pair_distances(patches, f, 50, 9);
    const auto b = pair_distances(patches, f, 50, 9);
    EXPECT_EQ(format_pair_csv(a), format_pair_csv(b));
    EXPECT_NE(format_pair_csv(a), format_pair_csv(pair_distances(patches, f, 50, 10)));
    EXPECT_THROW(pair_distances(random_patches(1, 4, 1), f, 5, 0), InvalidArgument);
    EXPECT_THROW(pair_distances(patches, f, 0, 0), InvalidArgument);
    EXPECT_THROW(pair_distances(random_patches(5, 3, 1), f, 5, 0), DimensionError);
}

TEST(ProfileCsv, RoundTrip) {
    const auto basis = random_basis(5, 21);
    const auto e = energy_profile(bank_of(random_matrix(3, 5, 22)), basis, ProfileVariant::rms);
    const std::string text = format_profile_csv(e, basis.eigenvalues);
    EXPECT_EQ(text.substr(0, text.find('\n')), "component_index,eigenvalue,energy");
    const auto back = parse_profile_csv(text);
    EXPECT_EQ(back.energy, e.e);
    EXPECT_EQ(back.eigenvalues, basis.eigenvalues);
    EXPECT_THROW(parse_profile_csv("component_index,eigenvalue,energy\n1,2,3\n"), ParseError);

    const auto pairs = pair_distances(random_patches(6, 5, 23), bank_of(random_matrix(2, 5, 24)), 8, 0);
    const auto parsed = parse_pair_csv(format_pair_csv(pairs));
    ASSERT_EQ(parsed.size(), 8u);
    for (std::size_t i = 0; i < 8; ++i) {
        EXPECT_EQ(parsed[i].input, pairs.pairs[i].input);
        EXPECT_EQ(parsed[i].mapped, pairs.pairs[i].mapped);
    }
}

}  // namespace
}  // namespace patchlens
