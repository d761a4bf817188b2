#pragma once

#include "patchlens/patch_engine.hpp"
#include "oracles.hpp"

namespace patchlens::testing {

// K~ for K = X0 + 1 (c u_k)^T, where X0 has zero column means and u_k is the
// k-th principal axis of X0. In the PCA basis fitted on K, the centered scatter
// is diagonal and mu_hat = sqrt(N) c e_k (up to sign); c = 0 gives mu_hat = 0.
inline Matrix commuting_instance(Index n, Index d, std::uint64_t seed, double c, Index k = 0) {
    Matrix x0 = random_matrix(n, d, seed);
    // Distinct, well separated variances keep the principal axes unambiguous.
    for (Index j = 0; j < d; ++j) x0.col(j) *= 1.0 + 0.15 * static_cast<double>(d - j);
    x0 = x0.rowwise() - x0.colwise().mean();
    const PcaBasis b0 = fit_pca(x0, true);
    const Matrix K = x0.rowwise() + c * b0.U.col(k).transpose();
    return to_pca(K, fit_pca(K, true, PcaPopulation::avg_patch_rows));
}

}  // namespace patchlens::testing
