#include "patchlens/patch_engine.hpp"

#include <nlohmann/json.hpp>

namespace patchlens {

namespace {
constexpr int kBasisVersion = 1;
}

std::string basis_to_json(const PcaBasis& basis) {
    using nlohmann::json;
    const Index d = basis.dim();
    json j;
    j["version"] = kBasisVersion;
    j["c"] = basis.channels;
    j["k"] = basis.kernel;
    j["centered"] = basis.centered;
    j["population"] = std::string(to_string(basis.population));
    j["mean_vector"] = std::vector<double>(basis.mean.data(), basis.mean.data() + basis.mean.size());
    j["eigenvalues"] =
        std::vector<double>(basis.eigenvalues.data(), basis.eigenvalues.data() + basis.eigenvalues.size());
    std::vector<double> u;
    u.reserve(static_cast<std::size_t>(d * d));
    for (Index r = 0; r < d; ++r)
        for (Index c = 0; c < d; ++c) u.push_back(basis.U(r, c));
    j["U"] = std::move(u);
    return j.dump(2) + "\n";
}

PcaBasis basis_from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("PCA basis JSON: ") + e.what(), 0);
    }
    try {
        if (j.at("version").get<int>() != kBasisVersion)
            throw ParseError("PCA basis JSON: unsupported version", 0);
        PcaBasis basis;
        basis.channels = j.at("c").get<int>();
        basis.kernel = j.at("k").get<int>();
        basis.centered = j.at("centered").get<bool>();
        basis.population = parse_population(j.at("population").get<std::string>());
        const auto mean = j.at("mean_vector").get<std::vector<double>>();
        const auto eig = j.at("eigenvalues").get<std::vector<double>>();
        const auto u = j.at("U").get<std::vector<double>>();
        const auto d = static_cast<Index>(eig.size());
        if (static_cast<Index>(mean.size()) != d || static_cast<Index>(u.size()) != d * d)
            throw ParseError("PCA basis JSON: inconsistent dimensions", 0);
        basis.mean = Eigen::Map<const Vector>(mean.data(), d);
        basis.eigenvalues = Eigen::Map<const Vector>(eig.data(), d);
        basis.U.resize(d, d);
        for (Index r = 0; r < d; ++r)
            for (Index c = 0; c < d; ++c) basis.U(r, c) = u[static_cast<std::size_t>(r * d + c)];
        return basis;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("PCA basis JSON: ") + e.what(), 0);
    }
}

}  // namespace patchlens
