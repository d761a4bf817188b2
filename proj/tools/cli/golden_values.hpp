#pragma once

// Generated by tools/golden/compute_golden.py from exact rational arithmetic.
// Do not edit; rerun the script instead.

#include <cstdint>

namespace patchlens::cli::golden {

inline constexpr double kGdOneStep0 = 0.1;  // 1/10
inline constexpr double kGdOneStep1 = 0.0;  // 0
inline constexpr double kGdTwoSteps0 = 0.19;  // 19/100
inline constexpr double kGdTwoSteps1 = 0.0;  // 0
inline constexpr double kAUnitLambdaTwoSteps = 0.19;  // 19/100
inline constexpr double kAZeroLambdaNineSteps = 0.9;  // 9/10
inline constexpr double kAUnitMeanOneStep = 0.1;  // 1/10
inline constexpr double kBUnitMeanOneStep = 0.1;  // 1/10
inline constexpr double kGainLambda4Eta01T3 = 0.196;  // 49/250
inline constexpr double kLambdaDiagL4Eta01T3 = 1.1020408163265305;  // 54/49
inline constexpr double kWoodburyIdentity0 = 0.5;  // 1/2
inline constexpr double kWoodburyIdentity1 = 0.0;  // 0
inline constexpr double kWoodburyGeneral0 = 0.08333333333333333;  // 1/12
inline constexpr double kWoodburyGeneral1 = 0.25;  // 1/4
inline constexpr double kPearson1234vs1324 = 0.8;  // 4/5

inline constexpr std::uint64_t kFnv1aOfA = 0xaf63dc4c8601ec8cULL;
inline constexpr std::uint64_t kFnv1aOfPatchlens = 0x8a304e92b78dcb69ULL;

}  // namespace patchlens::cli::golden
