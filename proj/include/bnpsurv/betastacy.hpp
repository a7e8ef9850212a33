#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "bnpsurv/data.hpp"
#include "bnpsurv/stepfun.hpp"
#include "bnpsurv/tails.hpp"

namespace bnpsurv {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Conditional Beta-Stacy prior with tuning function c and atomless
/// baseline hazard. On [exact_splice_from, inf) the tuning function is
/// infinite: the posterior there is frozen at the baseline.
struct BetaStacyPrior {
  StepFunction c;
  HazardMeasure baseline;
  double exact_splice_from = kInfinity;

  /// Throws UsageError unless c >= 0, the baseline has no atoms and
  /// exact_splice_from is positive.
  void validate() const;
  /// c(t) with the exact-splice region reported as +inf.
  double c_at(double t) const;
  bool exact_at(double t) const { return t >= exact_splice_from; }
};

/// Fixed jump of the posterior at an event time: mass dN / b.
struct PosteriorAtom {
  double time;
  double dN;
  double b;  // c(t) + Y(t); +inf inside the exact-splice region

  double mass() const { return std::isinf(b) ? 0.0 : dN / b; }
};

/// Interval (lo, hi] on which c and b are constant, with the baseline mass
/// it carries.
struct Segment {
  double lo;
  double hi;
  double c;     // +inf inside the exact-splice region
  double b;     // c + Y
  double mass;  // baseline continuous mass of (lo, hi]
};

/// Posterior of a conditional Beta-Stacy prior given right-censored data.
/// Tuning b = c + Y, continuous part c dLambda / b and atoms dN / b.
class BetaStacyPosterior {
 public:
  BetaStacyPosterior(BetaStacyPrior prior, StepFunction events, StepFunction risk, std::size_t n);

  const BetaStacyPrior& prior() const { return prior_; }
  const HazardMeasure& baseline() const { return prior_.baseline; }
  /// N(t), right-continuous.
  const StepFunction& events() const { return events_; }
  /// R(t) = #{T_i > t}; Y(t) = R(t-).
  const StepFunction& risk() const { return risk_; }
  std::size_t n() const { return n_; }
  double exact_splice_from() const { return prior_.exact_splice_from; }

  double c(double t) const { return prior_.c_at(t); }
  double at_risk(double t) const { return risk_.left_limit(t); }
  double b(double t) const { return c(t) + at_risk(t); }

  /// c + R on the merged breakpoints (values on open intervals equal b);
  /// the finite placeholder of c is used inside the exact-splice region.
  StepFunction b_function() const;
  /// c / (c + Y) on open intervals; 0/0 reads as 0, exact region as 1.
  StepFunction cont_scale() const;

  const std::vector<PosteriorAtom>& atoms() const { return atoms_; }

  /// Segments covering (0, t_max] split at every breakpoint of c and R, at
  /// the exact-splice switch and at every grid point.
  std::vector<Segment> segments(std::span<const double> grid) const;

 private:
  BetaStacyPrior prior_;
  StepFunction events_;
  StepFunction risk_;
  std::size_t n_;
  std::vector<PosteriorAtom> atoms_;
};

/// Conjugate update: b = c + Y, atoms dN / b at event times.
BetaStacyPosterior posterior_update(const BetaStacyPrior& prior, const SurvivalSample& s);

/// Posterior after additional data with the same tuning function.
BetaStacyPosterior extend(const BetaStacyPosterior& post, const SurvivalSample& more);

/// E[H(t)] = int_0^t (c dLambda + dN) / (c + Y).
double posterior_mean(const BetaStacyPosterior& post, double t);

/// var[H(t)] = int_0^t (1 - dN / b) (c dLambda + dN) / (b (b + 1)).
double posterior_variance(const BetaStacyPosterior& post, double t);

/// The posterior mean as a hazard measure: scaled density pieces on each
/// interval where c and Y are constant, plus the posterior atoms.
HazardMeasure posterior_mean_measure(const BetaStacyPosterior& post);

/// exp(-H^c(t)) prod_{s <= t} (1 - dH(s)).
double product_integral(const HazardMeasure& h, double t);
/// Product integral of a pure-jump cumulative hazard.
double product_integral(const StepFunction& jumps, double t);

/// Spliced prior: c = 2^{-n} below t0 and a_n from t0 on (a_n = inf selects
/// exact splicing); baseline q on [0, t0) plus the fitted tail from
/// tail_start (default t0 for Pareto tails and 1 for Weibull tails).
BetaStacyPrior make_spliced_prior(const TailFit& fit, double q, double t0, double a_n,
                                  std::size_t n, std::optional<double> tail_start = {});

/// Posterior mean of the survival function,
/// exp(-int c / (c + Y) dLambda) prod (1 - dN / (c + Y)).
double spliced_survival(const BetaStacyPosterior& post, double t);

}  // namespace bnpsurv
