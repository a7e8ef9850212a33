#pragma once

#include <span>
#include <vector>

#include "bnpsurv/data.hpp"
#include "bnpsurv/stepfun.hpp"

namespace bnpsurv {

/// Nelson-Aalen cumulative hazard: jumps dN / Y at event times.
StepFunction nelson_aalen(const SurvivalSample& s);

/// Kaplan-Meier survival: product of (1 - dN / Y) over event times.
/// Beyond the largest observation the last value is carried; see
/// km_defined_up_to for where the estimate stops being identified.
StepFunction kaplan_meier(const SurvivalSample& s);

/// Largest time at which the Kaplan-Meier curve is identified: the largest
/// observation when it is censored, +inf when it is an event.
double km_defined_up_to(const SurvivalSample& s);

/// Pointwise normal-approximation intervals: Greenwood on the log scale for
/// Kaplan-Meier, plain scale for Nelson-Aalen. Bounds are clipped to [0, 1]
/// (survival) and [0, inf) (hazard).
struct GreenwoodBands {
  std::vector<double> grid;
  std::vector<double> km, km_lower, km_upper;
  std::vector<double> na, na_lower, na_upper;
  double level = 0.0;
};
GreenwoodBands greenwood_pointwise_ci(const SurvivalSample& s, double level,
                                      std::span<const double> grid);

/// Two-sided standard normal quantile z with P(|Z| <= z) = level.
double normal_two_sided_quantile(double level);

}  // namespace bnpsurv
