#include "commands.hpp"
#include "golden_values.hpp"

#include "patchlens/analytic.hpp"
#include "patchlens/io.hpp"
#include "patchlens/jacobi.hpp"
#include "patchlens/profile.hpp"
#include "patchlens/rng.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <ostream>

namespace patchlens::cli {

namespace {

struct Check {
    std::string name;
    // Returns an empty string on success, else a description of the failure.
    std::function<std::string(bool quick)> run;
};

Matrix normal_matrix(Index rows, Index cols, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
    return m;
}

double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

std::string expect_near(const std::string& what, double got, double want, double tol) {
    if (std::abs(got - want) <= tol) return {};
    return what + " = " + io::format_double(got) + ", expected " + io::format_double(want);
}

std::string first_failure(std::initializer_list<std::string> results) {
    for (const auto& r : results)
        if (!r.empty()) return r;
    return {};
}

double stable_eta(const Matrix& K, double fraction = 0.9) {
    return fraction * 2.0 / jacobi_eigen(K.transpose() * K).values(0);
}

// K~ whose centered scatter is diagonal, with mu_hat = 0 (c = 0) or along axis k.
Matrix commuting_k_tilde(Index n, Index d, std::uint64_t seed, double c, Index k) {
    Matrix x = normal_matrix(n, d, seed);
    for (Index j = 0; j < d; ++j) x.col(j) *= 1.0 + 0.15 * static_cast<double>(d - j);
    x = x.rowwise() - x.colwise().mean();
    Matrix kt = to_pca(x, fit_pca(x, true));
    kt.col(k).array() += c;
    return kt;
}

Vector coin_labels(Index n, std::uint64_t seed) {
    Rng rng(seed);
    Vector y(n);
    for (Index i = 0; i < n; ++i) y(i) = rng.coin() ? 1.0 : 0.0;
    return y;
}

std::vector<Check> golden_checks() {
    namespace gv = golden;
    std::vector<Check> c;
    c.push_back({"golden: hand-iterated GD on K = I", [](bool) {
                     const Matrix K = Matrix::Identity(2, 2);
                     const Vector y{{1.0, 0.0}};
                     const std::vector<int> at{1};
                     const auto traj = gd_run(K, y, 0.1, 2, Vector::Zero(2), at);
                     const Vector& w1 = traj.snapshots[1].average_filter;
                     const Vector& w2 = traj.snapshots[2].average_filter;
                     return first_failure({expect_near("w1[0]", w1(0), gv::kGdOneStep0, 1e-15),
                                           expect_near("w1[1]", w1(1), gv::kGdOneStep1, 1e-15),
                                           expect_near("w2[0]", w2(0), gv::kGdTwoSteps0, 1e-15),
                                           expect_near("w2[1]", w2(1), gv::kGdTwoSteps1, 1e-15)});
                 }});
    c.push_back({"golden: geometric series A and B", [](bool) {
                     const auto ab = ab_diagonals(Vector{{1.0, 0.0}}, Vector::Zero(2), 0.1, 2);
                     const auto ab9 = ab_diagonals(Vector{{1.0, 0.0}}, Vector::Zero(2), 0.1, 9);
                     const auto mu = ab_diagonals(Vector{{1.0}}, Vector{{1.0}}, 0.1, 1);
                     return first_failure(
                         {expect_near("a(l=1,t=2)", ab.a(0), gv::kAUnitLambdaTwoSteps, 1e-15),
                          expect_near("a(l=0,t=9)", ab9.a(1), gv::kAZeroLambdaNineSteps, 1e-15),
                          expect_near("a(l=1,m=1,t=1)", mu.a(0), gv::kAUnitMeanOneStep, 1e-15),
                          expect_near("b(l=1,m=1,t=1)", mu.b(0), gv::kBUnitMeanOneStep, 1e-15),
                          expect_near("gain(4,0.1,3)", geometric_gain(4.0, 0.1, 3), gv::kGainLambda4Eta01T3, 1e-15)});
                 }});
    c.push_back({"golden: regularizer diagonal at mu = 0", [](bool) {
                     const Vector sigma{{4.0}};
                     const auto lam = lambda_matrix(ab_diagonals(sigma, Vector::Zero(1), 0.1, 3), Vector::Zero(1), sigma);
                     return expect_near("Lambda(0,0)", lam.value(0, 0), gv::kLambdaDiagL4Eta01T3, 1e-13);
                 }});
    c.push_back({"golden: 2x2 Woodbury inverse", [](bool) {
                     const auto a = expected_random_solution(Matrix::Identity(2, 2), Vector{{1.0, 0.0}});
                     Matrix s(2, 2);
                     s << 2.0, 1.0, 1.0, 3.0;
                     const auto b = expected_random_solution(s, Vector{{1.0, 2.0}});
                     return first_failure(
                         {expect_near("identity[0]", a.solution.w_tilde(0), gv::kWoodburyIdentity0, 1e-15),
                          expect_near("identity[1]", a.solution.w_tilde(1), gv::kWoodburyIdentity1, 1e-15),
                          expect_near("general[0]", b.solution.w_tilde(0), gv::kWoodburyGeneral0, 1e-14),
                          expect_near("general[1]", b.solution.w_tilde(1), gv::kWoodburyGeneral1, 1e-14)});
                 }});
    c.push_back({"golden: Pearson correlation", [](bool) {
                     return expect_near("r", pearson(Vector{{1, 2, 3, 4}}, Vector{{1, 3, 2, 4}}),
                                        gv::kPearson1234vs1324, 1e-15);
                 }});
    c.push_back({"golden: FNV-1a content hash", [](bool) -> std::string {
                     if (io::fnv1a64("a") != gv::kFnv1aOfA || io::fnv1a64("patchlens") != gv::kFnv1aOfPatchlens)
                         return "hash mismatch";
                     return {};
                 }});
    return c;
}

std::vector<Check> invariant_checks(int threads) {
    std::vector<Check> c;
    c.push_back({"closed-form GD solution matches iterated GD", [](bool quick) -> std::string {
                     const int instances = quick ? 4 : 20;
                     double worst = 0.0;
                     for (int s = 0; s < instances; ++s) {
                         const Matrix K = normal_matrix(64, 16, 100 + s);
                         const Vector y = coin_labels(64, 500 + s);
                         const double eta = stable_eta(K);
                         const std::vector<int> at{1, 10};
                         const auto traj = gd_run(K, y, eta, 1000, Vector::Zero(16), at);
                         for (const auto& snap : traj.snapshots) {
                             if (snap.iteration == 0) continue;
                             const Vector exact = closed_form_exact(K, y, eta, snap.iteration).w_tilde;
                             worst = std::max(worst, max_abs(exact - snap.average_filter));
                         }
                     }
                     if (worst > 1e-9) return "max error " + io::format_double(worst);
                     return {};
                 }});
    c.push_back({"binomial closed form and ridge equivalence in the commuting case", [](bool quick) -> std::string {
                     const int t = quick ? 50 : 200;
                     double worst = 0.0;
                     for (double shift : {0.0, 1.5}) {
                         const Matrix kt = commuting_k_tilde(48, 12, 7, shift, 3);
                         const Vector y = coin_labels(48, 8);
                         const double eta = stable_eta(kt);
                         const Vector gd = gd_run(kt, y, eta, t, Vector::Zero(12)).final().average_filter;
                         const PatchStats stats = second_moment_stats(kt);
                         const auto ab = ab_diagonals(stats.sigma_diag, stats.mu_hat, eta, t);
                         const auto lam = lambda_matrix(ab, stats.mu_hat, stats.sigma_diag);
                         worst = std::max(worst, max_abs(closed_form_paper(kt, y, eta, t).w_tilde - gd));
                         worst = std::max(worst, max_abs(ridge_solution(kt, y, lam.value).w_tilde - gd));
                     }
                     if (worst > 1e-8) return "max error " + io::format_double(worst);
                     return {};
                 }});
    c.push_back({"equal class means make true and averaged labels identical", [threads](bool quick) -> std::string {
                     SharedMeanOptions opt;
                     opt.n_per_class = 100;
                     const auto ds = gen_shared_mean_dataset(opt);
                     const Matrix& K = ds.patches.K;
                     const int t = quick ? 100 : 500;
                     const Matrix gram = K.transpose() * K / static_cast<double>(K.rows());
                     const double step = 0.9 * 2.0 / jacobi_eigen(gram).values(0);
                     Vector a = Vector::Zero(K.cols()), b = a;
                     const Vector half = Vector::Constant(K.rows(), 0.5);
                     double worst = 0.0;
                     for (int i = 0; i < t; ++i) {
                         a = gd_step(a, K, ds.y, step, LossScale::one_over_n);
                         b = gd_step(b, K, half, step, LossScale::one_over_n);
                         worst = std::max(worst, max_abs(a - b));
                     }
                     if (worst > 1e-12) return "max difference " + io::format_double(worst);
                     const int draws = quick ? 200 : 2000;
                     const auto mc = monte_carlo_random_labels(K, step, quick ? 50 : t, draws, 11,
                                                               LossScale::one_over_n, threads);
                     const Vector expect = gd_run(K, half, step, quick ? 50 : t, Vector::Zero(K.cols()), {},
                                                  LossScale::one_over_n)
                                               .final()
                                               .average_filter;
                     for (Index i = 0; i < expect.size(); ++i) {
                         const double bound = 4.0 * mc.stddev(i) / std::sqrt(static_cast<double>(draws)) + 1e-15;
                         if (std::abs(mc.mean(i) - expect(i)) > bound)
                             return "Monte Carlo mean off at coordinate " + std::to_string(i);
                     }
                     return {};
                 }});
    c.push_back({"filter dispersion stays at its initial value", [](bool quick) -> std::string {
                     SharedMeanOptions opt;
                     opt.n_per_class = 50;
                     opt.seed = 3;
                     const auto ds = gen_shared_mean_dataset(opt);
                     GDConfig cfg;
                     cfg.width = 32;
                     cfg.sigma_init = 0.05;
                     cfg.steps = quick ? 50 : 200;
                     cfg.seed = 4;
                     cfg.loss_scale = LossScale::one_over_n;
                     std::vector<int> at;
                     for (int i = 0; i <= cfg.steps; i += 10) at.push_back(i);
                     const auto traj = multi_filter_run(ds.patches.K, ds.y, cfg, at);
                     const Vector& d0 = traj.snapshots.front().dispersion;
                     for (const auto& s : traj.snapshots) {
                         const double rel = max_abs(s.dispersion - d0) / (d0.cwiseAbs().maxCoeff() + 1e-300);
                         if (rel > 1e-12)
                             return "iteration " + std::to_string(s.iteration) + " drifts by " + io::format_double(rel);
                     }
                     return {};
                 }});
    c.push_back({"trained filters stay in the span of the patches", [](bool quick) -> std::string {
                     const auto images = gen_zero_sum_periodic_images(quick ? 40 : 120, 8, 5);
                     const Matrix K = build_avg_patch_matrix(images, 3).K;
                     const PatchSpan span(extract_patches(images, 3).rows);
                     const Vector y = coin_labels(K.rows(), 6);
                     for (double sigma : {0.0, 1e-6}) {
                         GDConfig cfg;
                         cfg.width = 4;
                         cfg.sigma_init = sigma;
                         cfg.steps = quick ? 40 : 200;
                         cfg.seed = 9;
                         cfg.eta = 0.9 * 2.0 / jacobi_eigen(K.transpose() * K).values(0);
                         std::vector<int> at;
                         for (int i = 0; i <= cfg.steps; i += 10) at.push_back(i);
                         const auto traj = multi_filter_run(K, y, cfg, at);
                         const double d = static_cast<double>(K.cols());
                         for (const auto& s : traj.snapshots)
                             for (Index j = 0; j < s.bank.size(); ++j) {
                                 const Vector f = s.bank.filters.row(j).transpose();
                                 const double bound = sigma == 0.0 ? 1e-9 * f.norm() : sigma * std::sqrt(d) + 1e-9;
                                 if (span.residual(f) > bound)
                                     return "residual " + io::format_double(span.residual(f)) + " at sigma " +
                                            io::format_double(sigma);
                             }
                     }
                     if (span.rank() != K.cols() - 1) return "patches should span all but one direction";
                     return {};
                 }});
    c.push_back({"mean-square profile splits into mean and dispersion", [](bool quick) -> std::string {
                     const Index d = 27;
                     const Matrix q = fit_pca(normal_matrix(200, d, 21), true).U;
                     PcaBasis basis;
                     basis.U = q;
                     basis.eigenvalues = Vector::Ones(d);
                     basis.mean = Vector::Zero(d);
                     const double sigma = 0.05;
                     const int runs = quick ? 10 : 50;
                     for (int M : {8, 64, 512}) {
                         for (int r = 0; r < runs; ++r) {
                             Rng rng(1000 * M + r);
                             FilterBank bank;
                             bank.filters.resize(M, d);
                             for (Index i = 0; i < M; ++i)
                                 for (Index j = 0; j < d; ++j) bank.filters(i, j) = 0.3 + rng.normal(0.0, sigma);
                             const auto e = energy_profile(bank, basis, ProfileVariant::mean_square);
                             const auto m = filter_moments(bank.filters * q);
                             const Vector split = m.mean.array().square().matrix() + m.dispersion;
                             if (max_abs(e.e - split) > 1e-12 * std::max(1.0, e.e.cwiseAbs().maxCoeff()))
                                 return "profile != mean^2 + dispersion at M=" + std::to_string(M);
                             const double dev = std::abs(m.dispersion.mean() - sigma * sigma);
                             if (dev > 5.0 * sigma * sigma / std::sqrt(static_cast<double>(M)))
                                 return "dispersion deviates by " + io::format_double(dev) + " at M=" +
                                        std::to_string(M);
                         }
                     }
                     return {};
                 }});
    c.push_back({"Woodbury direction matches a direct solve", [](bool quick) -> std::string {
                     for (Index d : {Index(2), Index(8), quick ? Index(16) : Index(64)}) {
                         const Matrix a = normal_matrix(d, d, 40 + d);
                         Matrix s = a * a.transpose();
                         s.diagonal().array() += 1.0;
                         const Vector mu = normal_matrix(d, 1, 80 + d).col(0);
                         const auto w = expected_random_solution(s, mu);
                         if (w.cosine < 1.0 - 1e-12) return "cosine " + io::format_double(w.cosine);
                     }
                     return {};
                 }});
    c.push_back({"predicted label sensitivity starts at 1 and does not increase", [](bool quick) -> std::string {
                     SharedMeanOptions opt;
                     opt.n_per_class = quick ? 60 : 100;
                     const auto ds = gen_shared_mean_dataset(opt);
                     const auto basis = fit_pca(ds.patches.K, true);
                     const double eta = 1.0 / jacobi_eigen(ds.patches.K.transpose() * ds.patches.K).values(0);
                     double previous = 0.0;
                     for (int i = 0; i <= 10; ++i) {
                         const Matrix shifted = shift_class_mean(ds.patches.K, ds.y, basis, 0, 0.1 * i);
                         const double r = predicted_label_sensitivity(to_pca(shifted, basis), ds.y, eta, 100, 0.05);
                         if (i == 0 && std::abs(r - 1.0) > 1e-9) return "correlation at 0 is " + io::format_double(r);
                         if (i > 0 && r > previous + 1e-12)
                             return "correlation rises to " + io::format_double(r) + " at epsilon " +
                                    io::format_double(0.1 * i);
                         previous = r;
                     }
                     return {};
                 }});
    return c;
}

int run_verify(bool quick, int threads, std::ostream& out) {
    auto checks = golden_checks();
    for (auto& c : invariant_checks(threads)) checks.push_back(std::move(c));
    int failed = 0;
    for (const auto& c : checks) {
        std::string failure;
        try {
            failure = c.run(quick);
        } catch (const std::exception& e) {
            failure = std::string("threw: ") + e.what();
        }
        if (failure.empty()) {
            out << "PASS  " << c.name << "\n";
        } else {
            ++failed;
            out << "FAIL  " << c.name << ": " << failure << "\n";
        }
    }
    out << (checks.size() - static_cast<std::size_t>(failed)) << "/" << checks.size() << " checks passed\n";
    return failed == 0 ? kExitOk : kExitVerifyFailed;
}

}  // namespace

void add_verify_command(CLI::App& app, const GlobalOptions& g, std::vector<Command>& commands) {
    auto quick = std::make_shared<bool>(false);
    auto* sub = app.add_subcommand("verify", "Run the golden-value and invariant checks");
    sub->add_flag("--quick", *quick, "Smaller instances and fewer iterations");
    commands.push_back({sub, [quick, &g](std::ostream& out, std::ostream&) { return run_verify(*quick, g.threads, out); }});
}

}  // namespace patchlens::cli
