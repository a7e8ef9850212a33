#include "bnpsurv/classical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>

#include "bnpsurv/errors.hpp"

namespace bnpsurv {

namespace {

void require_nonempty(const SurvivalSample& s, const char* who) {
  if (s.empty()) throw UsageError(std::string(who) + ": empty sample");
}

}  // namespace

StepFunction nelson_aalen(const SurvivalSample& s) {
  require_nonempty(s, "nelson_aalen");
  const auto& tab = s.event_table();
  std::vector<double> times;
  std::vector<double> jumps;
  for (std::size_t i = 0; i < tab.times.size(); ++i) {
    if (tab.events[i] == 0.0) continue;
    times.push_back(tab.times[i]);
    jumps.push_back(tab.events[i] / tab.at_risk[i]);
  }
  return StepFunction::from_jumps(times, jumps);
}

StepFunction kaplan_meier(const SurvivalSample& s) {
  require_nonempty(s, "kaplan_meier");
  const auto& tab = s.event_table();
  std::vector<double> bps;
  std::vector<double> values{1.0};
  double surv = 1.0;
  for (std::size_t i = 0; i < tab.times.size(); ++i) {
    if (tab.events[i] == 0.0) continue;
    surv *= 1.0 - tab.events[i] / tab.at_risk[i];
    bps.push_back(tab.times[i]);
    values.push_back(surv);
  }
  return StepFunction(std::move(bps), std::move(values));
}

double km_defined_up_to(const SurvivalSample& s) {
  require_nonempty(s, "km_defined_up_to");
  return s.concomitant(s.size()) ? std::numeric_limits<double>::infinity() : s.max_time();
}

double normal_two_sided_quantile(double level) {
  if (!(level > 0.0 && level < 1.0)) throw UsageError("level must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), 0.5 + 0.5 * level);
}

GreenwoodBands greenwood_pointwise_ci(const SurvivalSample& s, double level,
                                      std::span<const double> grid) {
  require_nonempty(s, "greenwood_pointwise_ci");
  const double z = normal_two_sided_quantile(level);
  const auto& tab = s.event_table();
  constexpr double inf = std::numeric_limits<double>::infinity();

  // cumulative variance terms at event times
  std::vector<double> times;
  std::vector<double> log_var_jumps;
  std::vector<double> na_var_jumps;
  double var_infinite_from = inf;  // first event time with Y = d
  for (std::size_t i = 0; i < tab.times.size(); ++i) {
    const double d = tab.events[i];
    if (d == 0.0) continue;
    const double y = tab.at_risk[i];
    times.push_back(tab.times[i]);
    if (y > d) {
      log_var_jumps.push_back(d / (y * (y - d)));
    } else {
      log_var_jumps.push_back(0.0);
      var_infinite_from = std::min(var_infinite_from, tab.times[i]);
    }
    na_var_jumps.push_back(d / (y * y));
  }
  const auto km_var = StepFunction::from_jumps(times, log_var_jumps);
  const auto na_var = StepFunction::from_jumps(times, na_var_jumps);
  const auto km = kaplan_meier(s);
  const auto na = nelson_aalen(s);

  GreenwoodBands out;
  out.level = level;
  out.grid.assign(grid.begin(), grid.end());
  for (double t : grid) {
    const double sv = km(t);
    const double sd = t >= var_infinite_from ? inf : std::sqrt(km_var(t));
    double lo = 0.0;
    double hi = 1.0;
    if (std::isfinite(sd) && sv > 0.0) {
      lo = std::clamp(sv * std::exp(-z * sd), 0.0, 1.0);
      hi = std::clamp(sv * std::exp(z * sd), 0.0, 1.0);
    }
    out.km.push_back(sv);
    out.km_lower.push_back(lo);
    out.km_upper.push_back(hi);

    const double h = na(t);
    const double hs = std::sqrt(na_var(t));
    out.na.push_back(h);
    out.na_lower.push_back(std::max(h - z * hs, 0.0));
    out.na_upper.push_back(h + z * hs);
  }
  return out;
}

}  // namespace bnpsurv
