#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "bnpsurv/data.hpp"

namespace bnpsurv {

enum class TailKind { Pareto, Weibull };

/// Result of a tail fit on the top k order statistics.
///
/// Pareto fits set alpha_hat. Weibull fits set p_hat and l_hat, and
/// alpha_hat = p_hat * l_hat^{-p_hat} (the density coefficient in
/// alpha t^{p-1}). The cumulative coefficient l_hat^{-p_hat} is what
/// WeibullDensity::alpha expects.
struct TailFit {
  TailKind kind = TailKind::Pareto;
  double alpha_hat = 0.0;
  double p_hat = 0.0;
  double l_hat = 0.0;
  std::size_t k = 0;
  double threshold = 0.0;    // T_{n-k,n}
  std::size_t dropped = 0;   // regression points skipped (Weibull only)

  double weibull_coefficient() const;
};

/// Survival estimate used as 1 - F0 in QQ coordinates.
using SurvivalFn = std::function<double(double)>;
enum class F0Kind { KaplanMeier, NelsonAalen };
/// Kaplan-Meier curve, or exp(-Nelson-Aalen).
SurvivalFn survival_estimate(const SurvivalSample& s, F0Kind kind = F0Kind::KaplanMeier);

/// ceil(2 sqrt(n)).
std::size_t default_k(std::size_t n);

/// Censored Hill estimator: events among the top k over the summed
/// log-spacings relative to T_{n-k,n}.
TailFit hill_censored(const SurvivalSample& s, std::size_t k);

/// Weighted censored Hill estimator with weights
/// w_j = delta_j / j * prod_{l=j+1}^{k} ((l-1)/l)^{delta_l}.
TailFit hill_weighted(const SurvivalSample& s, std::size_t k);

/// Least-squares fit of the Weibull QQ plot on the top k points.
/// Points whose survival estimate is 0 or 1 are dropped and counted.
TailFit weibull_ls(const SurvivalSample& s, std::size_t k, const SurvivalFn& survival);
TailFit weibull_ls(const SurvivalSample& s, std::size_t k);

/// Closed-form slope/scale for explicit regression points (x_j, y_j).
struct LsLine {
  double p;
  double l;
};
LsLine weibull_ls_points(const std::vector<double>& x, const std::vector<double>& y);

/// QQ plot coordinates at every distinct observation time:
/// Pareto (log t, -log S(t)), Weibull (log t, log(-log S(t))).
struct QQData {
  std::vector<double> x;
  std::vector<double> y;
  std::size_t skipped = 0;
};
QQData qq_data(const SurvivalSample& s, TailKind kind, const SurvivalFn& survival);

}  // namespace bnpsurv
