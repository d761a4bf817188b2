#include "patchlens/jacobi.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

namespace patchlens {
namespace {

using testing::max_abs;
using testing::random_matrix;

TEST(Jacobi, DiagonalMatrixIsSortedDescending) {
    Matrix a = Vector{{1.0, 5.0, 3.0}}.asDiagonal();
    const auto eig = jacobi_eigen(a);
    EXPECT_TRUE(eig.converged);
    EXPECT_EQ(eig.values, (Vector{{5.0, 3.0, 1.0}}));
    EXPECT_EQ(eig.vectors.col(0), (Vector{{0.0, 1.0, 0.0}}));
}

TEST(Jacobi, TwoByTwoKnownSpectrum) {
    Matrix a{{2.0, 1.0}, {1.0, 2.0}};
    const auto eig = jacobi_eigen(a);
    EXPECT_NEAR(eig.values(0), 3.0, 1e-15);
    EXPECT_NEAR(eig.values(1), 1.0, 1e-15);
    const double h = 1.0 / std::sqrt(2.0);
    EXPECT_NEAR(eig.vectors(0, 0), h, 1e-15);
    EXPECT_NEAR(eig.vectors(1, 0), h, 1e-15);
}

TEST(Jacobi, SignConventionLargestEntryPositiveTiesToLowestIndex) {
    Matrix v{{-0.6, 0.5}, {0.8, -0.5}};
    normalize_eigenvector_signs(v);
    EXPECT_GT(v(1, 0), 0.0);  // |0.8| dominates
    EXPECT_GT(v(0, 1), 0.0);  // tie resolved toward row 0
    EXPECT_LT(v(1, 1), 0.0);
}

TEST(Jacobi, RandomSymmetricMatchesReferenceSolverAndReconstructs) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const Index n = 2 + static_cast<Index>(seed % 30);
        const Matrix x = random_matrix(n + 3, n, seed);
        const Matrix a = x.transpose() * x;
        const auto eig = jacobi_eigen(a);
        ASSERT_TRUE(eig.converged);
        const double scale = max_abs(a);
        EXPECT_LE(max_abs(eig.vectors.transpose() * eig.vectors - Matrix::Identity(n, n)), 1e-10) << seed;
        EXPECT_LE(max_abs(eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose() - a), 1e-9 * scale)
            << seed;
        EXPECT_LE(max_abs(eig.values - testing::reference_eigenvalues_desc(a)), 1e-10 * scale) << seed;
        for (Index i = 1; i < n; ++i) EXPECT_GE(eig.values(i - 1), eig.values(i));
    }
}

TEST(Jacobi, IndefiniteMatrix) {
    Matrix a{{0.0, 2.0}, {2.0, 0.0}};
    const auto eig = jacobi_eigen(a);
    EXPECT_NEAR(eig.values(0), 2.0, 1e-14);
    EXPECT_NEAR(eig.values(1), -2.0, 1e-14);
}

TEST(Jacobi, ZeroMatrixConvergesImmediately) {
    const auto eig = jacobi_eigen(Matrix::Zero(4, 4));
    EXPECT_TRUE(eig.converged);
    EXPECT_EQ(eig.sweeps, 0);
    EXPECT_EQ(eig.values, Vector::Zero(4));
}

TEST(Jacobi, RejectsBadInput) {
    EXPECT_THROW(jacobi_eigen(Matrix::Zero(2, 3)), DimensionError);
    Matrix a = Matrix::Identity(2, 2);
    a(0, 1) = a(1, 0) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(jacobi_eigen(a), NumericError);
}

}  // namespace
}  // namespace patchlens
