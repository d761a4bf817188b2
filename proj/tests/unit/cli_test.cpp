#include "cli.hpp"

#include "patchlens/data_io.hpp"
#include "patchlens/filter_bank.hpp"
#include "patchlens/io.hpp"
#include "patchlens/profile.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <sstream>

namespace patchlens {
namespace {

namespace fs = std::filesystem;

struct Result {
    int code = -1;
    std::string out;
    std::string err;
};

Result run_cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    Result r;
    r.code = cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("patchlens_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    // synth -> avg.csv, pca -> basis.json, simulate -> filters.csv
    void make_pipeline(double shift = 0.0) {
        ASSERT_EQ(run_cli({"--seed", "3", "synth", "--n-per-class", "40", "--shift-eps", std::to_string(shift),
                           "--out", path("avg.csv")})
                      .code,
                  0);
        ASSERT_EQ(run_cli({"pca", "--avg-patches", path("avg.csv"), "--out", path("basis.json")}).code, 0);
        const auto r = run_cli({"--seed", "3", "simulate", "--avg-patches", path("avg.csv"), "--width", "16",
                                "--sigma", "0.05", "--steps", "50", "--snapshot-every", "10", "--out",
                                path("traj.csv"), "--filters-out", path("filters.csv"), "--init-out",
                                path("init.csv")});
        ASSERT_EQ(r.code, 0) << r.err;
    }

    fs::path dir_;
};

TEST_F(CliTest, HelpExitsZero) {
    const auto r = run_cli({"--help"});
    EXPECT_EQ(r.code, cli::kExitOk);
    EXPECT_NE(r.out.find("verify"), std::string::npos);
    EXPECT_EQ(run_cli({"profile", "--help"}).code, cli::kExitOk);
}

TEST_F(CliTest, UnknownFlagIsUsageError) {
    const auto r = run_cli({"verify", "--bogus"});
    EXPECT_EQ(r.code, cli::kExitUsage);
    EXPECT_NE(r.err.find("Usage"), std::string::npos);
}

TEST_F(CliTest, MissingSubcommandAndMissingInputAreUsageErrors) {
    EXPECT_EQ(run_cli({}).code, cli::kExitUsage);
    EXPECT_EQ(run_cli({"profile", "--filters", path("nope.csv"), "--pca", path("nope.json"), "--out", path("e.csv")})
                  .code,
              cli::kExitUsage);
    EXPECT_EQ(run_cli({"--threads", "0", "verify"}).code, cli::kExitUsage);
}

TEST_F(CliTest, MissingDatasetIsUsageError) {
    ::unsetenv("PATCHLENS_DATA");
    const auto r = run_cli({"pca", "--out", path("b.json")});
    EXPECT_EQ(r.code, cli::kExitUsage);
    EXPECT_NE(r.err.find("PATCHLENS_DATA"), std::string::npos);
}

TEST_F(CliTest, VerifyQuickPasses) {
    const auto r = run_cli({"verify", "--quick"});
    EXPECT_EQ(r.code, cli::kExitOk) << r.out;
    EXPECT_EQ(r.out.find("FAIL"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("PASS  golden: 2x2 Woodbury inverse"), std::string::npos);
    EXPECT_NE(r.out.find("PASS  filter dispersion stays at its initial value"), std::string::npos);
}

TEST_F(CliTest, ProfileContractAndRoundTrip) {
    make_pipeline();
    const auto r = run_cli({"profile", "--filters", path("filters.csv"), "--pca", path("basis.json"), "--variant",
                            "rms", "--out", path("e.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto csv = parse_profile_csv(io::read_text_file(path("e.csv")));
    EXPECT_EQ(csv.energy.size(), 27);

    // The file agrees with a direct library evaluation.
    const auto basis = basis_from_json(io::read_text_file(path("basis.json")));
    const auto bank = import_filter_bank(path("filters.csv"));
    EXPECT_EQ(bank.size(), 16);
    const auto e = energy_profile(bank, basis, ProfileVariant::rms);
    for (Index i = 0; i < e.size(); ++i) EXPECT_EQ(csv.energy(i), e.e(i));

    const auto manifest = nlohmann::json::parse(io::read_text_file(path("e.csv.manifest.json")));
    EXPECT_EQ(manifest.at("command"), "profile");
    EXPECT_EQ(manifest.at("config").at("variant"), "rms");
    EXPECT_EQ(manifest.at("inputs").size(), 2u);
    EXPECT_EQ(manifest.at("outputs").at(0).at("fnv1a64"), io::hash_file(path("e.csv")));
}

TEST_F(CliTest, CompareRefusesMixedVariants) {
    make_pipeline();
    ASSERT_EQ(run_cli({"profile", "--filters", path("filters.csv"), "--pca", path("basis.json"), "--out",
                       path("rms.csv")})
                  .code,
              0);
    ASSERT_EQ(run_cli({"profile", "--filters", path("filters.csv"), "--pca", path("basis.json"), "--variant",
                       "mean_square", "--out", path("ms.csv")})
                  .code,
              0);
    const auto same = run_cli({"compare", "--profiles", path("rms.csv"), path("rms.csv")});
    EXPECT_EQ(same.code, 0) << same.err;
    EXPECT_NE(same.out.find("correlation 1\n"), std::string::npos) << same.out;
    EXPECT_EQ(run_cli({"compare", "--profiles", path("rms.csv"), path("ms.csv")}).code, cli::kExitUsage);

    // Without manifests the variant must be asserted.
    fs::copy_file(path("rms.csv"), path("bare.csv"));
    EXPECT_EQ(run_cli({"compare", "--profiles", path("bare.csv"), path("rms.csv")}).code, cli::kExitUsage);
    EXPECT_EQ(run_cli({"compare", "--profiles", path("bare.csv"), path("rms.csv"), "--variant", "rms"}).code, 0);
}

TEST_F(CliTest, CompareFromFilterBanks) {
    make_pipeline();
    const auto r = run_cli({"compare", "--filters", path("filters.csv"), path("init.csv"), "--pca",
                            path("basis.json"), "--variant", "mean_square", "--out", path("c.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(io::read_text_file(path("c.json")));
    EXPECT_EQ(j.at("variant"), "mean_square");
    EXPECT_LE(std::abs(j.at("correlation").get<double>()), 1.0);
}

TEST_F(CliTest, SimulateOutputsParseBack) {
    make_pipeline();
    constexpr std::string_view header[] = {"iter", "coord", "avg_filter_value", "dispersion"};
    const auto table = io::parse_numeric_csv(io::read_text_file(path("traj.csv")), header);
    EXPECT_EQ(table.rows.size(), 6u * 27u);  // iterations 0, 10, ..., 50
    const auto init = import_filter_bank(path("init.csv"));
    EXPECT_EQ(init.size(), 16);
    const auto manifest = nlohmann::json::parse(io::read_text_file(path("traj.csv.manifest.json")));
    EXPECT_EQ(manifest.at("config").at("sigma"), 0.05);
    EXPECT_EQ(manifest.at("outputs").size(), 3u);
    // Every filter gets the same update, so trained minus initial is one repeated row.
    const FilterBank delta = subtract_banks(import_filter_bank(path("filters.csv")), init);
    for (Index j = 1; j < delta.size(); ++j)
        EXPECT_LT((delta.filters.row(j) - delta.filters.row(0)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST_F(CliTest, PredictJsonShape) {
    make_pipeline(0.3);
    for (const char* method : {"paper_closed_form", "exact_eigen", "ridge", "woodbury_expectation"}) {
        const auto r = run_cli({"predict", "--avg-patches", path("avg.csv"), "--pca", path("basis.json"), "--method",
                                method, "--steps", "20", "--sigma", "0.1", "--out", path("p.json")});
        ASSERT_EQ(r.code, 0) << method << ": " << r.err;
        const auto j = nlohmann::json::parse(io::read_text_file(path("p.json")));
        EXPECT_EQ(j.at("method"), method);
        EXPECT_EQ(j.at("t"), 20);
        EXPECT_EQ(j.at("w_tilde").size(), 27u);
        EXPECT_EQ(j.at("profile").size(), 27u);
        EXPECT_TRUE(j.at("diagnostics").contains("cond"));
        EXPECT_TRUE(j.at("diagnostics").at("commutation_gap").is_number());
    }
}

TEST_F(CliTest, PredictExactMatchesZeroInitSimulation) {
    make_pipeline();
    ASSERT_EQ(run_cli({"simulate", "--avg-patches", path("avg.csv"), "--steps", "50", "--out", path("t0.csv"),
                       "--filters-out", path("f0.csv")})
                  .code,
              0);
    ASSERT_EQ(run_cli({"predict", "--avg-patches", path("avg.csv"), "--pca", path("basis.json"), "--steps", "50",
                       "--out", path("p.json")})
                  .code,
              0);
    const auto j = nlohmann::json::parse(io::read_text_file(path("p.json")));
    const auto basis = basis_from_json(io::read_text_file(path("basis.json")));
    const Vector trained = basis.U.transpose() * import_filter_bank(path("f0.csv")).filters.row(0).transpose();
    const auto w = j.at("w_tilde").get<std::vector<double>>();
    ASSERT_EQ(w.size(), static_cast<std::size_t>(trained.size()));
    for (Index i = 0; i < trained.size(); ++i) EXPECT_NEAR(w[static_cast<std::size_t>(i)], trained(i), 1e-12);
}

TEST_F(CliTest, SensitivityRerunsAreByteIdentical) {
    make_pipeline();
    const std::vector<std::string> args{"sensitivity", "--avg-patches", path("avg.csv"), "--direction", "1",
                                        "--out",       path("s.csv"),   "--svg",         path("s.svg")};
    ASSERT_EQ(run_cli(args).code, 0);
    const auto csv = io::read_text_file(path("s.csv"));
    const auto svg = io::read_text_file(path("s.svg"));
    const auto manifest = io::read_text_file(path("s.csv.manifest.json"));
    ASSERT_EQ(run_cli(args).code, 0);
    EXPECT_EQ(io::read_text_file(path("s.csv")), csv);
    EXPECT_EQ(io::read_text_file(path("s.svg")), svg);
    EXPECT_EQ(io::read_text_file(path("s.csv.manifest.json")), manifest);

    constexpr std::string_view header[] = {"epsilon", "correlation"};
    const auto table = io::parse_numeric_csv(csv, header);
    ASSERT_EQ(table.rows.size(), 11u);
    EXPECT_NEAR(table.rows[0][1], 1.0, 1e-9);
    EXPECT_EQ(table.rows[10][0], 1.0);
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
}

TEST_F(CliTest, DistancesFromAveragePatches) {
    make_pipeline();
    const auto r = run_cli({"distances", "--filters", path("filters.csv"), "--avg-patches", path("avg.csv"),
                            "--pairs", "50", "--out", path("d.csv"), "--svg", path("d.svg")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(parse_pair_csv(io::read_text_file(path("d.csv"))).size(), 50u);
    EXPECT_NE(io::read_text_file(path("d.svg")).find("<circle"), std::string::npos);
}

TEST_F(CliTest, CifarCommands) {
    auto images = gen_zero_sum_periodic_images(12, 32, 4);
    for (auto& img : images.images)
        for (auto& v : img.values) v = std::clamp(0.5 + 0.1 * v, 0.0, 1.0);
    for (std::size_t i = 0; i < images.size(); ++i) images.labels[i] = static_cast<int>(i % 3);
    images.class_names.clear();
    const auto bytes = encode_cifar10(images);
    io::write_file_atomic(path("data_batch_1.bin"),
                          std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));

    auto r = run_cli({"pca", "--data", dir_.string(), "--out", path("basis.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(basis_from_json(io::read_text_file(path("basis.json"))).population, PcaPopulation::all_patches);
    r = run_cli({"pca", "--cifar", path("data_batch_1.bin"), "--sample", "500", "--out", path("sampled.json")});
    ASSERT_EQ(r.code, 0) << r.err;

    r = run_cli({"avg-patch", "--data", dir_.string(), "--class-a", "0", "--class-b", "2", "--out", path("ab.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto ab = import_avg_patch_matrix(path("ab.csv"));
    EXPECT_EQ(ab.patches.rows(), 8);

    r = run_cli({"avg-patch", "--data", dir_.string(), "--per-class", "--pca", path("basis.json"), "--report",
                 path("report.json"), "--out", path("classes.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto report = nlohmann::json::parse(io::read_text_file(path("report.json")));
    EXPECT_EQ(report.at("correlation").size(), 3u);
    EXPECT_NEAR(report.at("correlation")[1][1].get<double>(), 1.0, 1e-12);

    make_pipeline();
    r = run_cli({"distances", "--filters", path("filters.csv"), "--data", dir_.string(), "--pairs", "20", "--out",
                 path("d.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
}

}  // namespace
}  // namespace patchlens
