#pragma once

namespace robustq::normal {

inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;
inline constexpr double kInvSqrt2 = 0.707106781186547524400844362105;

double pdf(double x);

// Standard normal CDF, Phi(x).
double cdf(double x);

// Phi^{-1}(p) for p in (0,1): Acklam's rational approximation followed by one
// Newton step on Phi. Accurate to ~1e-15 relative in the central region and
// ~1e-13 in the far tails. p = 0 and p = 1 return -inf / +inf.
double quantile(double p);

}  // namespace robustq::normal
