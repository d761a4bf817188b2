#pragma once

#include "patchlens/types.hpp"

namespace patchlens {

struct JacobiOptions {
    // Stop once ||off(A)||_F < relative_tolerance * ||A||_F.
    double relative_tolerance = 1e-12;
    int max_sweeps = 100;
};

// Eigenvectors are the columns of `vectors`, paired with `values` in
// descending order. Each column is sign-normalized so that its entry of
// largest magnitude is positive (ties resolved toward the lowest index).
struct SymmetricEigen {
    Vector values;
    Matrix vectors;
    int sweeps = 0;
    bool converged = false;
};

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Only the upper
// triangle is read. Throws DimensionError for non-square input and
// NumericError for non-finite entries.
SymmetricEigen jacobi_eigen(const Matrix& symmetric, const JacobiOptions& options = {});

// Flips columns of `vectors` in place to the sign convention above.
void normalize_eigenvector_signs(Matrix& vectors);

}  // namespace patchlens
