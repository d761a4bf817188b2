#include "patchlens/profile.hpp"

#include "patchlens/io.hpp"
#include "patchlens/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace patchlens {

std::string_view to_string(ProfileVariant variant) {
    return variant == ProfileVariant::rms ? "rms" : "mean_square";
}

ProfileVariant parse_variant(std::string_view text) {
    if (text == "rms") return ProfileVariant::rms;
    if (text == "mean_square") return ProfileVariant::mean_square;
    throw InvalidArgument("unknown profile variant '" + std::string(text) + "' (rms|mean_square)");
}

EnergyProfile energy_profile(const FilterBank& bank, const PcaBasis& basis, ProfileVariant variant) {
    if (bank.dim() != basis.dim())
        throw DimensionError("energy_profile: filters have d=" + std::to_string(bank.dim()) +
                             ", basis has d=" + std::to_string(basis.dim()));
    if (bank.size() < 1) throw InvalidArgument("empty filter bank");

    // projections(j, i) = <f_j, u_i>. Squares are summed in sorted order so the
    // result is bit-identical under any reordering of the filters.
    const Index d = basis.dim();
    Matrix projections(bank.size(), d);
    for (Index j = 0; j < bank.size(); ++j)
        for (Index i = 0; i < d; ++i) {
            double dot = 0.0;
            for (Index p = 0; p < d; ++p) dot += bank.filters(j, p) * basis.U(p, i);
            projections(j, i) = dot;
        }
    EnergyProfile out;
    out.variant = variant;
    out.basis_fingerprint = fingerprint(basis);
    out.e.resize(basis.dim());
    std::vector<double> squares(static_cast<std::size_t>(bank.size()));
    for (Index i = 0; i < basis.dim(); ++i) {
        for (Index j = 0; j < bank.size(); ++j)
            squares[static_cast<std::size_t>(j)] = projections(j, i) * projections(j, i);
        std::sort(squares.begin(), squares.end());
        double sum = 0.0;
        for (double v : squares) sum += v;
        out.e(i) = variant == ProfileVariant::rms ? std::sqrt(sum) : sum / static_cast<double>(bank.size());
    }
    return out;
}

double pearson(const Vector& a, const Vector& b) {
    if (a.size() != b.size())
        throw DimensionError("pearson: lengths differ (" + std::to_string(a.size()) + " vs " +
                             std::to_string(b.size()) + ")");
    if (a.size() < 2) throw DimensionError("pearson: need at least 2 entries");
    const Vector da = a.array() - a.mean();
    const Vector db = b.array() - b.mean();
    const double saa = da.squaredNorm();
    const double sbb = db.squaredNorm();
    // Spread at the round-off level of the mean carries no signal.
    auto flat = [](const Vector& v, double ss) {
        const double floor = 8.0 * std::numeric_limits<double>::epsilon() * v.cwiseAbs().maxCoeff();
        return ss <= floor * floor * static_cast<double>(v.size());
    };
    if (flat(a, saa) || flat(b, sbb)) throw InvalidArgument("zero variance profile");
    const double r = da.dot(db) / std::sqrt(saa * sbb);
    return std::clamp(r, -1.0, 1.0);
}

double profile_correlation(const EnergyProfile& a, const EnergyProfile& b) {
    if (a.variant != b.variant)
        throw InvalidArgument("refusing to correlate a " + std::string(to_string(a.variant)) +
                              " profile with a " + std::string(to_string(b.variant)) + " profile");
    return pearson(a.e, b.e);
}

PairDistanceReport pair_distances(const PatchMatrix& patches, const FilterBank& bank, std::size_t n_pairs,
                                  std::uint64_t seed) {
    const Index n = patches.rows.rows();
    if (n < 2) throw InvalidArgument("pair_distances: need at least 2 patches");
    if (n_pairs < 1) throw InvalidArgument("pair_distances: n_pairs must be >= 1");
    if (bank.dim() != patches.rows.cols())
        throw DimensionError("pair_distances: filters have d=" + std::to_string(bank.dim()) +
                             ", patches have d=" + std::to_string(patches.rows.cols()));

    Rng rng(seed);
    PairDistanceReport report;
    report.pairs.reserve(n_pairs);
    Vector input(n_pairs), mapped(n_pairs);
    for (std::size_t p = 0; p < n_pairs; ++p) {
        const auto i = static_cast<Index>(rng.index(static_cast<std::uint64_t>(n)));
        auto j = static_cast<Index>(rng.index(static_cast<std::uint64_t>(n - 1)));
        if (j >= i) ++j;
        const Vector diff = (patches.rows.row(i) - patches.rows.row(j)).transpose();
        const PairDistance pd{diff.norm(), (bank.filters * diff).norm()};
        report.pairs.push_back(pd);
        input(static_cast<Index>(p)) = pd.input;
        mapped(static_cast<Index>(p)) = pd.mapped;
    }
    if (n_pairs >= 2) {
        try {
            report.correlation = pearson(input, mapped);
        } catch (const InvalidArgument&) {
            report.correlation.reset();
        }
    }
    return report;
}

std::string format_profile_csv(const EnergyProfile& profile, const Vector& eigenvalues) {
    if (eigenvalues.size() != profile.size()) throw DimensionError("profile CSV: eigenvalue count mismatch");
    std::string out = "component_index,eigenvalue,energy\n";
    for (Index i = 0; i < profile.size(); ++i)
        out += std::to_string(i) + "," + io::format_double(eigenvalues(i)) + "," + io::format_double(profile.e(i)) +
               "\n";
    return out;
}

ProfileCsv parse_profile_csv(std::string_view text) {
    static constexpr std::array<std::string_view, 3> header = {"component_index", "eigenvalue", "energy"};
    const auto table = io::parse_numeric_csv(text, header);
    ProfileCsv out;
    const auto n = static_cast<Index>(table.rows.size());
    out.eigenvalues.resize(n);
    out.energy.resize(n);
    for (Index i = 0; i < n; ++i) {
        const auto& row = table.rows[static_cast<std::size_t>(i)];
        if (row[0] != static_cast<double>(i))
            throw ParseError("component_index out of sequence", static_cast<std::size_t>(i) + 2);
        out.eigenvalues(i) = row[1];
        out.energy(i) = row[2];
    }
    return out;
}

std::string format_pair_csv(const PairDistanceReport& report) {
    std::string out = "input_dist,mapped_dist\n";
    for (const auto& p : report.pairs) out += io::format_double(p.input) + "," + io::format_double(p.mapped) + "\n";
    return out;
}

std::vector<PairDistance> parse_pair_csv(std::string_view text) {
    static constexpr std::array<std::string_view, 2> header = {"input_dist", "mapped_dist"};
    const auto table = io::parse_numeric_csv(text, header);
    std::vector<PairDistance> out;
    out.reserve(table.rows.size());
    for (const auto& row : table.rows) out.push_back({row[0], row[1]});
    return out;
}

}  // namespace patchlens
