#include "patchlens/jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace patchlens {

namespace {

double off_diagonal_norm(const Matrix& a) {
    double sum = 0.0;
    const Index n = a.rows();
    for (Index q = 1; q < n; ++q)
        for (Index p = 0; p < q; ++p) sum += 2.0 * a(p, q) * a(p, q);
    return std::sqrt(sum);
}

// Applies the rotation J(p, q, theta) that annihilates a(p, q):
// A <- J^T A J, V <- V J.
void rotate(Matrix& a, Matrix& v, Index p, Index q) {
    const double apq = a(p, q);
    if (apq == 0.0) return;
    const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
    const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                     (std::abs(theta) + std::sqrt(theta * theta + 1.0));
    const double c = 1.0 / std::sqrt(t * t + 1.0);
    const double s = t * c;
    const double tau = s / (1.0 + c);
    const Index n = a.rows();

    a(p, p) -= t * apq;
    a(q, q) += t * apq;
    a(p, q) = 0.0;
    a(q, p) = 0.0;
    for (Index r = 0; r < n; ++r) {
        if (r == p || r == q) continue;
        const double arp = a(r, p);
        const double arq = a(r, q);
        const double new_rp = arp - s * (arq + tau * arp);
        const double new_rq = arq + s * (arp - tau * arq);
        a(r, p) = a(p, r) = new_rp;
        a(r, q) = a(q, r) = new_rq;
    }
    for (Index r = 0; r < n; ++r) {
        const double vrp = v(r, p);
        const double vrq = v(r, q);
        v(r, p) = vrp - s * (vrq + tau * vrp);
        v(r, q) = vrq + s * (vrp - tau * vrq);
    }
}

}  // namespace

void normalize_eigenvector_signs(Matrix& vectors) {
    for (Index j = 0; j < vectors.cols(); ++j) {
        Index best = 0;
        double best_abs = -1.0;
        for (Index i = 0; i < vectors.rows(); ++i) {
            const double mag = std::abs(vectors(i, j));
            if (mag > best_abs) {
                best_abs = mag;
                best = i;
            }
        }
        if (vectors.rows() > 0 && vectors(best, j) < 0.0) vectors.col(j) *= -1.0;
    }
}

SymmetricEigen jacobi_eigen(const Matrix& symmetric, const JacobiOptions& options) {
    if (symmetric.rows() != symmetric.cols())
        throw DimensionError("jacobi_eigen: matrix is " + std::to_string(symmetric.rows()) +
                             "x" + std::to_string(symmetric.cols()) + ", expected square");
    if (!symmetric.allFinite()) throw NumericError("jacobi_eigen: non-finite matrix entry");

    const Index n = symmetric.rows();
    Matrix a = symmetric.triangularView<Eigen::Upper>();
    a.triangularView<Eigen::StrictlyLower>() = a.transpose().triangularView<Eigen::StrictlyLower>();
    Matrix v = Matrix::Identity(n, n);

    SymmetricEigen result;
    const double threshold = options.relative_tolerance * a.norm();
    for (int sweep = 0;; ++sweep) {
        if (off_diagonal_norm(a) <= threshold) {
            result.sweeps = sweep;
            result.converged = true;
            break;
        }
        if (sweep == options.max_sweeps) {
            result.sweeps = sweep;
            break;
        }
        for (Index p = 0; p + 1 < n; ++p)
            for (Index q = p + 1; q < n; ++q) rotate(a, v, p, q);
    }

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index i, Index j) { return a(i, i) > a(j, j); });

    result.values.resize(n);
    result.vectors.resize(n, n);
    for (Index k = 0; k < n; ++k) {
        const Index src = order[static_cast<std::size_t>(k)];
        result.values(k) = a(src, src);
        result.vectors.col(k) = v.col(src);
    }
    normalize_eigenvector_signs(result.vectors);
    return result;
}

}  // namespace patchlens
