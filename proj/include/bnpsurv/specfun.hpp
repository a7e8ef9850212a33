#pragma once

namespace bnpsurv::specfun {

inline constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

/// Upper incomplete gamma Gamma(0, x) = E1(x) for x > 0. Power series below
/// x = 1, modified Lentz continued fraction above.
double expint_e1(double x);

/// E1(x) + log(x), finite at x = 0 where it equals -Euler's gamma.
double expint_e1_plus_log(double x);

/// Ein(x) = integral_0^x (1 - e^{-u}) / u du (entire; x >= 0).
double expint_ein(double x);

}  // namespace bnpsurv::specfun
