#pragma once

#include <numbers>

namespace scnet {

inline constexpr double kElementaryCharge = 1.602176634e-19;  // C
inline constexpr double kPlanck = 6.62607015e-34;             // J s
inline constexpr double kCooperPairCharge = 2.0 * kElementaryCharge;
inline constexpr double kFluxQuantum = kPlanck / kCooperPairCharge;  // Wb
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace scnet
