#pragma once

// Reference values computed outside this code base (30-digit arithmetic:
// adaptive quadrature for the integrals, numerical differentiation and root
// finding for the profile extrema) and frozen here.

namespace oracle {

inline constexpr double kMollifierA = 2.25228362104358101;
inline constexpr double kRhoHat1 = 0.923119010817905241;
inline constexpr double kRhoHat5 = -0.000478047005855518356;
inline constexpr double kRhoHat20 = -0.00126556481079511724;

inline constexpr double kEta03 = 0.129570469399705917;
inline constexpr double kX03 = 1.48330019179960449;
inline constexpr double kY03[] = {0.0, 0.0, 6.95946170015588330, 7.16265350725171953, 7.36584531434755576};
inline constexpr double kSupY[] = {0.0, 0.0, 9.94896876941547109, 10.0581774015179801, 10.1686811142946688};

inline constexpr double kErfc1 = 0.157299207050285131;
inline constexpr double kConst4 = 0.0253302959105844429;  // 1/(N(N-2) omega_N), N = 4
inline constexpr double kConst5 = 0.0126651479552922214;
inline constexpr double kStationaryR025T05 = 0.255471487596287422;  // erfc(R/2sqrt t)/(4 pi R)

}  // namespace oracle
