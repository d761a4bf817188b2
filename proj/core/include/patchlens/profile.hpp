#pragma once

#include "patchlens/filter_bank.hpp"
#include "patchlens/patch_engine.hpp"
#include "patchlens/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace patchlens {

// rms:          e_i = sqrt(sum_j <f_j, u_i>^2)
// mean_square:  e_i = (1/M) sum_j <f_j, u_i>^2
enum class ProfileVariant { rms, mean_square };

std::string_view to_string(ProfileVariant variant);
ProfileVariant parse_variant(std::string_view text);

struct EnergyProfile {
    Vector e;
    ProfileVariant variant = ProfileVariant::rms;
    std::uint64_t basis_fingerprint = 0;

    Index size() const { return e.size(); }
};

EnergyProfile energy_profile(const FilterBank& bank, const PcaBasis& basis, ProfileVariant variant);

// Pearson correlation. Throws InvalidArgument("zero variance profile") when
// either input is constant, DimensionError on length mismatch or length < 2.
double pearson(const Vector& a, const Vector& b);

// Pearson correlation of two profiles of the same variant. Profiles of
// different variants are refused (squaring changes the correlation).
double profile_correlation(const EnergyProfile& a, const EnergyProfile& b);

struct PairDistance {
    double input = 0.0;
    double mapped = 0.0;
};

struct PairDistanceReport {
    std::vector<PairDistance> pairs;
    // Empty when either distance column is constant (e.g. a zero filter bank).
    std::optional<double> correlation;
};

// Samples n_pairs index pairs (i != j, pairs may repeat) from the seeded
// stream and reports ||x_i - x_j|| against ||F x_i - F x_j||.
PairDistanceReport pair_distances(const PatchMatrix& patches, const FilterBank& bank, std::size_t n_pairs,
                                  std::uint64_t seed);

// Profile CSV: component_index,eigenvalue,energy
std::string format_profile_csv(const EnergyProfile& profile, const Vector& eigenvalues);
struct ProfileCsv {
    Vector eigenvalues;
    Vector energy;
};
ProfileCsv parse_profile_csv(std::string_view text);

// Pair-distance CSV: input_dist,mapped_dist
std::string format_pair_csv(const PairDistanceReport& report);
std::vector<PairDistance> parse_pair_csv(std::string_view text);

}  // namespace patchlens
