#include "patchlens/analytic.hpp"

#include "patchlens/io.hpp"
#include "patchlens/jacobi.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>

namespace patchlens {

double one_minus_power(double x, int t) {
    if (t == 0) return 0.0;
    if (std::abs(x) < 0.5) return -std::expm1(static_cast<double>(t) * std::log1p(-x));
    return 1.0 - std::pow(1.0 - x, t);
}

double geometric_gain(double lambda, double eta, int t) {
    if (lambda == 0.0) return eta * static_cast<double>(t);
    return one_minus_power(eta * lambda, t) / lambda;
}

ABDiagonals ab_diagonals(const Vector& sigma_diag, const Vector& mu_hat, double eta, int steps) {
    if (steps < 0) throw InvalidArgument("ab_diagonals: t must be >= 0");
    if (!(eta > 0.0)) throw InvalidArgument("ab_diagonals: eta must be positive");
    if (sigma_diag.size() != mu_hat.size()) throw DimensionError("ab_diagonals: sigma/mu length mismatch");
    ABDiagonals ab;
    ab.eta = eta;
    ab.steps = steps;
    ab.mu_norm_sq = mu_hat.squaredNorm();
    const Index d = sigma_diag.size();
    ab.a.resize(d);
    ab.b.resize(d);
    const double m = ab.mu_norm_sq;
    for (Index i = 0; i < d; ++i) {
        const double lambda = sigma_diag(i);
        ab.a(i) = geometric_gain(lambda, eta, steps);
        ab.b(i) = m == 0.0 ? ab.a(i) : one_minus_power(eta * (lambda + m), steps) / (m * (lambda + m));
    }
    return ab;
}

std::string_view to_string(SolutionMethod method) {
    switch (method) {
        case SolutionMethod::paper_closed_form: return "paper_closed_form";
        case SolutionMethod::exact_eigen: return "exact_eigen";
        case SolutionMethod::ridge: return "ridge";
        case SolutionMethod::woodbury_expectation: return "woodbury_expectation";
    }
    return "unknown";
}

SolutionMethod parse_method(std::string_view text) {
    if (text == "paper_closed_form") return SolutionMethod::paper_closed_form;
    if (text == "exact_eigen") return SolutionMethod::exact_eigen;
    if (text == "ridge") return SolutionMethod::ridge;
    if (text == "woodbury_expectation") return SolutionMethod::woodbury_expectation;
    throw InvalidArgument("unknown method '" + std::string(text) +
                          "' (paper_closed_form|exact_eigen|ridge|woodbury_expectation)");
}

namespace {

void check_system(const Matrix& K_tilde, const Vector& y) {
    if (y.size() != K_tilde.rows())
        throw DimensionError("labels have length " + std::to_string(y.size()) + ", K~ has " +
                             std::to_string(K_tilde.rows()) + " rows");
}

double symmetric_condition(const Matrix& symmetric) {
    const SymmetricEigen eig = jacobi_eigen(symmetric);
    const Vector mags = eig.values.cwiseAbs();
    const double lo = mags.minCoeff();
    return lo == 0.0 ? std::numeric_limits<double>::infinity() : mags.maxCoeff() / lo;
}

// mu_hat as seen by the binomial expansion. Entries at round-off level relative
// to the largest are zeroed, as is a mean whose squared norm is negligible next
// to the scatter: leakage of ~1e-16 from the PCA rotation would otherwise be
// multiplied by B entries of modes with eta * (l_i + m) > 2, which grow like
// |1 - eta * (l_i + m)|^t although those modes do not exist in K~^T K~.
Vector expansion_mean(const Vector& mu_hat, const Vector& sigma_diag) {
    Vector mu = mu_hat;
    const double scale = sigma_diag.size() ? sigma_diag.cwiseAbs().maxCoeff() : 0.0;
    if (mu.squaredNorm() <= 1e-20 * scale) return Vector::Zero(mu.size());
    const double top = mu.cwiseAbs().maxCoeff();
    for (Index i = 0; i < mu.size(); ++i)
        if (std::abs(mu(i)) <= 1e-10 * top) mu(i) = 0.0;
    return mu;
}

// Diagonal of the rank-one coefficient: (g(l_i + m) - a_i) / m, zero when mu_hat = 0.
Vector rank_one_coefficient(const ABDiagonals& ab) {
    if (ab.mu_norm_sq == 0.0) return Vector::Zero(ab.a.size());
    return ab.b - ab.a / ab.mu_norm_sq;
}

AnalyticSolution evaluate_paper_form(const Matrix& K_tilde, const Vector& y, double eta, int steps, bool literal) {
    check_system(K_tilde, y);
    const PatchStats stats = second_moment_stats(K_tilde);
    const Vector mu = expansion_mean(stats.mu_hat, stats.sigma_diag);
    const ABDiagonals ab = ab_diagonals(stats.sigma_diag, mu, eta, steps);
    const Vector kty = K_tilde.transpose() * y;
    const Vector mu_part = mu * mu.dot(kty);
    const Vector coefficient = literal ? Vector(ab.b - ab.a) : rank_one_coefficient(ab);

    AnalyticSolution out;
    out.method = SolutionMethod::paper_closed_form;
    out.eta = eta;
    out.steps = steps;
    out.w_tilde = coefficient.cwiseProduct(mu_part) + ab.a.cwiseProduct(kty);
    return out;
}

}  // namespace

AnalyticSolution closed_form_paper(const Matrix& K_tilde, const Vector& y, double eta, int steps) {
    return evaluate_paper_form(K_tilde, y, eta, steps, false);
}

AnalyticSolution closed_form_paper_literal(const Matrix& K_tilde, const Vector& y, double eta, int steps) {
    return evaluate_paper_form(K_tilde, y, eta, steps, true);
}

AnalyticSolution closed_form_exact(const Matrix& K_tilde, const Vector& y, double eta, int steps) {
    check_system(K_tilde, y);
    if (steps < 0) throw InvalidArgument("closed_form_exact: t must be >= 0");
    if (!(eta > 0.0)) throw InvalidArgument("closed_form_exact: eta must be positive");
    const SymmetricEigen eig = jacobi_eigen(K_tilde.transpose() * K_tilde);
    Vector gain(eig.values.size());
    for (Index i = 0; i < gain.size(); ++i) gain(i) = geometric_gain(eig.values(i), eta, steps);

    AnalyticSolution out;
    out.method = SolutionMethod::exact_eigen;
    out.eta = eta;
    out.steps = steps;
    const Vector kty = K_tilde.transpose() * y;
    out.w_tilde = eig.vectors * gain.cwiseProduct(eig.vectors.transpose() * kty);
    return out;
}

double commutation_gap(const Matrix& K_tilde, const Vector& y, double eta, int steps) {
    const Vector binomial = closed_form_paper(K_tilde, y, eta, steps).w_tilde;
    const Vector exact = closed_form_exact(K_tilde, y, eta, steps).w_tilde;
    return (binomial - exact).cwiseAbs().maxCoeff();
}

LambdaMatrix lambda_matrix(const ABDiagonals& ab, const Vector& mu_hat, const Vector& sigma_diag) {
    const Index d = ab.a.size();
    if (mu_hat.size() != d || sigma_diag.size() != d) throw DimensionError("lambda_matrix: length mismatch");
    const Vector mu = expansion_mean(mu_hat, sigma_diag);
    const Matrix mu_outer = mu * mu.transpose();
    Matrix inner = rank_one_coefficient(ab).asDiagonal() * mu_outer;
    inner.diagonal() += ab.a;

    const Eigen::JacobiSVD<Matrix> svd(inner);
    const Vector sv = svd.singularValues();
    const double smallest = sv(sv.size() - 1);
    if (!(smallest > 0.0) || smallest <= 1e-15 * sv(0))
        throw NumericError("lambda_matrix: inner matrix is singular (smallest singular value " +
                           io::format_double(smallest) + ")");

    LambdaMatrix out;
    out.condition = sv(0) / smallest;
    Matrix lambda = inner.fullPivLu().inverse();
    lambda.diagonal() -= sigma_diag;
    lambda -= mu_hat * mu_hat.transpose();
    out.value = 0.5 * (lambda + lambda.transpose());
    return out;
}

AnalyticSolution ridge_solution(const Matrix& K_tilde, const Vector& y, const Matrix& Lambda) {
    check_system(K_tilde, y);
    if (Lambda.rows() != K_tilde.cols() || Lambda.cols() != K_tilde.cols())
        throw DimensionError("ridge_solution: Lambda must be d x d");
    const Matrix system = K_tilde.transpose() * K_tilde + Lambda;
    const Vector rhs = K_tilde.transpose() * y;

    AnalyticSolution out;
    out.method = SolutionMethod::ridge;
    out.condition = symmetric_condition(system);
    if (!std::isfinite(out.condition) || out.condition > 1e16)
        throw NumericError("ridge_solution: singular system (condition " +
                           (std::isfinite(out.condition) ? io::format_double(out.condition) : std::string("inf")) +
                           ")");
    const Eigen::LLT<Matrix> llt(system);
    if (llt.info() == Eigen::Success) {
        out.w_tilde = llt.solve(rhs);
    } else {
        const Eigen::LDLT<Matrix> ldlt(system);
        if (ldlt.info() != Eigen::Success) throw NumericError("ridge_solution: factorization failed");
        out.w_tilde = ldlt.solve(rhs);
    }
    return out;
}

WoodburyResult expected_random_solution(const Matrix& sigma_prime, const Vector& mu) {
    const Index d = mu.size();
    if (sigma_prime.rows() != d || sigma_prime.cols() != d)
        throw DimensionError("expected_random_solution: Sigma' must be d x d");

    WoodburyResult out;
    out.solution.method = SolutionMethod::woodbury_expectation;
    const Eigen::FullPivLU<Matrix> lu(sigma_prime);
    if (!lu.isInvertible()) throw NumericError("expected_random_solution: Sigma' is singular");
    out.solution.condition = symmetric_condition(0.5 * (sigma_prime + sigma_prime.transpose()));
    if (mu.isZero(0.0)) {
        out.solution.w_tilde = Vector::Zero(d);
        out.direct = Vector::Zero(d);
        out.cosine = 1.0;
        return out;
    }

    const Matrix inv = lu.inverse();
    const Vector inv_mu = inv * mu;
    const double denom = 1.0 + mu.dot(inv_mu);
    const Matrix correction = Matrix::Identity(d, d) - (inv_mu * mu.transpose()) / denom;
    out.solution.w_tilde = correction * inv_mu;

    const Matrix full = sigma_prime + mu * mu.transpose();
    out.direct = full.fullPivLu().solve(mu);
    const double norms = out.solution.w_tilde.norm() * out.direct.norm();
    out.cosine = norms == 0.0 ? 1.0 : out.solution.w_tilde.dot(out.direct) / norms;
    return out;
}

WoodburyResult expected_random_weights(const PatchStats& stats, const Matrix& Lambda) {
    Matrix sigma_prime = Lambda;
    sigma_prime.diagonal() += stats.sigma_diag;
    WoodburyResult out = expected_random_solution(sigma_prime, stats.mu_hat);
    const double scale = 0.5 * std::sqrt(static_cast<double>(stats.count));
    out.solution.w_tilde *= scale;
    out.direct *= scale;
    return out;
}

EnergyProfile predicted_profile(const Vector& w_tilde, double sigma_init) {
    EnergyProfile out;
    out.variant = ProfileVariant::mean_square;
    out.e = w_tilde.array().square() + sigma_init * sigma_init;
    return out;
}

double predicted_label_sensitivity(const Matrix& K_tilde, const Vector& y_true, double eta, int steps,
                                   double sigma_init) {
    const Vector half = Vector::Constant(K_tilde.rows(), 0.5);
    const Vector w_true = closed_form_exact(K_tilde, y_true, eta, steps).w_tilde;
    const Vector w_rand = closed_form_exact(K_tilde, half, eta, steps).w_tilde;
    return profile_correlation(predicted_profile(w_true, sigma_init), predicted_profile(w_rand, sigma_init));
}

}  // namespace patchlens
