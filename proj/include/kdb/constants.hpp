#pragma once

namespace kdb::si {

inline constexpr double c = 299792458.0;
inline constexpr double hbar = 1.054571817e-34;
inline constexpr double e = 1.602176634e-19;
inline constexpr double epsilon0 = 8.8541878128e-12;
inline constexpr double mu0 = 1.25663706212e-6;
inline constexpr double electron_mass = 9.1093837015e-31;
inline constexpr double atomic_mass = 1.66053906660e-27;

}  // namespace kdb::si
