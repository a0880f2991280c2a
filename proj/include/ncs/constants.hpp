#pragma once

namespace ncs {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double pi_sq = pi * pi;

} // namespace ncs
