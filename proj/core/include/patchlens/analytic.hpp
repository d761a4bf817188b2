#pragma once

#include "patchlens/patch_engine.hpp"
#include "patchlens/profile.hpp"
#include "patchlens/types.hpp"

#include <limits>
#include <optional>
#include <string_view>

namespace patchlens {

// 1 - (1 - x)^t. For |x| < 0.5 this goes through expm1/log1p so that small
// step-eigenvalue products keep full precision at large t.
double one_minus_power(double x, int t);

// Sum_{j<t} eta (1 - eta*lambda)^j = (1 - (1 - eta*lambda)^t) / lambda, and eta*t at lambda = 0.
double geometric_gain(double lambda, double eta, int t);

// Diagonals of the closed-form GD solution in PCA coordinates:
//   a_i = (1 - (1 - eta*l_i)^t) / l_i
//   b_i = (1 - (1 - eta*(l_i + m))^t) / (m * (l_i + m)),   m = ||mu_hat||^2
// with a_i = eta*t at l_i = 0 and b_i = a_i at m = 0.
struct ABDiagonals {
    Vector a;
    Vector b;
    double eta = 0.0;
    int steps = 0;
    double mu_norm_sq = 0.0;
};

ABDiagonals ab_diagonals(const Vector& sigma_diag, const Vector& mu_hat, double eta, int steps);

enum class SolutionMethod { paper_closed_form, exact_eigen, ridge, woodbury_expectation };
std::string_view to_string(SolutionMethod method);
SolutionMethod parse_method(std::string_view text);

struct AnalyticSolution {
    Vector w_tilde;
    SolutionMethod method = SolutionMethod::exact_eigen;
    double eta = 0.0;
    int steps = 0;
    std::optional<double> sigma;
    double condition = std::numeric_limits<double>::quiet_NaN();
};

// Binomial-expansion solution with statistics taken from K~:
//   w_t = (B - A / m) mu_hat mu_hat^T K~^T y + A K~^T y,   m = ||mu_hat||^2
// (the rank-one term is dropped when m = 0). Exact when mu_hat is zero or lies
// on a single PCA axis; otherwise see commutation_gap.
AnalyticSolution closed_form_paper(const Matrix& K_tilde, const Vector& y, double eta, int steps);
// The same expansion with coefficient (B - A) in place of (B - A / m). Agrees
// with GD in the commuting case only when m is 0 or 1; kept for comparison.
AnalyticSolution closed_form_paper_literal(const Matrix& K_tilde, const Vector& y, double eta, int steps);

// w_t = Q g(L) Q^T K~^T y for K~^T K~ = Q L Q^T and g = geometric_gain: the
// GD recursion from zero summed exactly.
AnalyticSolution closed_form_exact(const Matrix& K_tilde, const Vector& y, double eta, int steps);

// max |closed_form_paper - closed_form_exact|.
double commutation_gap(const Matrix& K_tilde, const Vector& y, double eta, int steps);

struct LambdaMatrix {
    Matrix value;
    double condition = 0.0;  // of the inner matrix A + (B - A / m) mu_hat mu_hat^T
};

// Lambda = (A + (B - A / m) mu_hat mu_hat^T)^{-1} - Sigma_hat - mu_hat mu_hat^T, symmetrized,
// so that ridge_solution with Lambda reproduces closed_form_paper.
// Throws NumericError naming the smallest singular value when the inner matrix is singular.
LambdaMatrix lambda_matrix(const ABDiagonals& ab, const Vector& mu_hat, const Vector& sigma_diag);

// Solves (K~^T K~ + Lambda) w = K~^T y by Cholesky, falling back to LDL^T.
AnalyticSolution ridge_solution(const Matrix& K_tilde, const Vector& y, const Matrix& Lambda);

struct WoodburyResult {
    AnalyticSolution solution;  // (I - S^-1 mu mu^T / (1 + mu^T S^-1 mu)) S^-1 mu
    Vector direct;              // (S + mu mu^T)^-1 mu by direct solve
    double cosine = 1.0;
};

// Direction of the expected random-label solution for S = Sigma_hat + Lambda.
WoodburyResult expected_random_solution(const Matrix& sigma_prime, const Vector& mu);

// Expected weights E[w~] = (sqrt(N)/2) * direction, using S = diag(sigma_diag) + Lambda and mu = mu_hat.
WoodburyResult expected_random_weights(const PatchStats& stats, const Matrix& Lambda);

// Mean-square profile predicted for M -> infinity: e_i = w~_i^2 + sigma^2.
EnergyProfile predicted_profile(const Vector& w_tilde, double sigma_init);

// Correlation between the predicted profiles of true-label and expected
// random-label (y = 1/2) training, both from closed_form_exact.
double predicted_label_sensitivity(const Matrix& K_tilde, const Vector& y_true, double eta, int steps,
                                   double sigma_init);

}  // namespace patchlens
