#pragma once

// Reference values from tests/oracles/gen_oracles.py (mpmath, 50 digits).

#include <array>
#include <complex>
#include <cstdint>

namespace oracle {

inline constexpr double kRPrmGolden = 0.38196601125010515179541316563436188227969082019424;
inline constexpr double kGoldenT = 2.6180339887498948482045868343656381177203091798058;
inline constexpr double kSilverT = 5.8284271247461900976033774484193961571393437507539;
inline constexpr int kSilverRPrmPeriod = 4;
inline constexpr double kGoldenCascade011 = -0.23606797749978969640917366873127623544061835961153;

struct CenterRef {
  std::int64_t q;
  double re, im;
};

// F_c^q(1) = 1 for the (3,2) family along the golden convergents.
inline constexpr std::array<CenterRef, 11> kCenters32{{
    {2, -1.3375714709511263, 0.0},
    {3, -0.79529338221688807, -1.1790848496774313},
    {5, -1.2089327741937075, -0.83848604237294083},
    {8, -1.1045350852565192, -0.99562806441784898},
    {13, -1.1527377511277361, -0.94934494750391974},
    {21, -1.1395550378564536, -0.96822976500333097},
    {34, -1.1452314954179713, -0.96266949059675968},
    {55, -1.143661123128602, -0.96490125747341103},
    {89, -1.1443294120729485, -0.96424390422738825},
    {144, -1.1441439622554598, -0.96450690958443913},
    {233, -1.1442226753869673, -0.96442937747852797},
}};

// (2,2) at c = i: F''(0) = -6i, F'''(1) = -3i, chart at infinity 3i w^2 + 8i w^3.
inline const std::complex<double> kD2FZero22{0.0, -6.0};
inline const std::complex<double> kD3FOne22{0.0, -3.0};
inline const std::complex<double> kPsi2{0.0, 3.0};
inline const std::complex<double> kPsi3{0.0, 8.0};

// Reference parameters.
inline const std::complex<double> kHerman22{-0.755700, -0.654917};
inline const std::complex<double> kHerman32{-1.144208, -0.964454};

} // namespace oracle
