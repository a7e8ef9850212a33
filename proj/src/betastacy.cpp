#include "bnpsurv/betastacy.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <sstream>
#include <type_traits>

#include "bnpsurv/errors.hpp"

namespace bnpsurv {

void BetaStacyPrior::validate() const {
  for (double v : c.values()) {
    if (!(v >= 0.0)) throw UsageError("prior: tuning function c must be non-negative");
  }
  if (baseline.has_atoms()) throw UsageError("prior: baseline hazard must be atomless");
  if (!(exact_splice_from > 0.0)) throw UsageError("prior: exact-splice threshold must be positive");
}

double BetaStacyPrior::c_at(double t) const { return exact_at(t) ? kInfinity : c(t); }

BetaStacyPosterior::BetaStacyPosterior(BetaStacyPrior prior, StepFunction events,
                                       StepFunction risk, std::size_t n)
    : prior_(std::move(prior)),
      events_(events.simplified()),
      risk_(risk.simplified()),
      n_(n) {
  prior_.validate();
  for (double x : events_.breakpoints()) {
    const double dN = events_.jump_at(x);
    if (dN <= 0.0) continue;
    const double bx = b(x);
    if (!(bx >= dN)) {
      std::ostringstream msg;
      msg << "posterior atom at " << x << " has b = " << bx << " < dN = " << dN;
      throw NumericError(msg.str());
    }
    atoms_.push_back({x, dN, bx});
  }
}

StepFunction BetaStacyPosterior::b_function() const { return prior_.c + risk_; }

StepFunction BetaStacyPosterior::cont_scale() const {
  auto scale = combine(prior_.c, risk_, [](double cv, double rv) {
    const double bv = cv + rv;
    return bv == 0.0 ? 0.0 : cv / bv;
  });
  if (std::isinf(prior_.exact_splice_from)) return scale;
  const StepFunction exact({prior_.exact_splice_from}, {0.0, 1.0});
  return combine(scale, exact, [](double s, double e) { return e == 1.0 ? 1.0 : s; });
}

std::vector<Segment> BetaStacyPosterior::segments(std::span<const double> grid) const {
  std::vector<Segment> out;
  if (grid.empty()) return out;
  const double tmax = *std::max_element(grid.begin(), grid.end());
  std::vector<double> xs(grid.begin(), grid.end());
  const auto cb = prior_.c.breakpoints();
  const auto rb = risk_.breakpoints();
  xs.insert(xs.end(), cb.begin(), cb.end());
  xs.insert(xs.end(), rb.begin(), rb.end());
  if (std::isfinite(prior_.exact_splice_from)) xs.push_back(prior_.exact_splice_from);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  double lo = 0.0;
  for (double x : xs) {
    if (x <= lo) continue;
    if (x > tmax) break;
    const double mid = 0.5 * (lo + x);
    const double cv = c(mid);
    out.push_back({lo, x, cv, cv + risk_(mid), prior_.baseline.continuous_mass(lo, x)});
    lo = x;
  }
  return out;
}

BetaStacyPosterior posterior_update(const BetaStacyPrior& prior, const SurvivalSample& s) {
  if (s.empty()) return BetaStacyPosterior(prior, StepFunction(0.0), StepFunction(0.0), 0);
  auto cp = counting_processes(s);
  return BetaStacyPosterior(prior, std::move(cp.events), std::move(cp.risk), s.size());
}

BetaStacyPosterior extend(const BetaStacyPosterior& post, const SurvivalSample& more) {
  if (more.empty()) return post;
  const auto cp = counting_processes(more);
  return BetaStacyPosterior(post.prior(), post.events() + cp.events, post.risk() + cp.risk,
                            post.n() + more.size());
}

namespace {

using Weight = std::function<double(double, double)>;

// Continuous part of int_0^t weight(c, Y) dLambda; inside the exact-splice
// region the weight is the limit `exact_weight`.
double continuous_part(const BetaStacyPosterior& post, double t, const Weight& weight,
                       double exact_weight) {
  const double t0 = post.exact_splice_from();
  double total =
      integrate_weighted(post.prior().c, post.risk(), post.baseline(), std::min(t, t0), weight);
  if (t > t0 && exact_weight != 0.0) {
    total += exact_weight * post.baseline().continuous_mass(t0, t);
  }
  return total;
}

double nan_if_empty(double num, double den) {
  if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return num / den;
}

void require_t(double t, const char* who) {
  if (!(t >= 0.0) || std::isinf(t)) {
    throw UsageError(std::string(who) + ": time must be finite and non-negative");
  }
}

}  // namespace

double posterior_mean(const BetaStacyPosterior& post, double t) {
  require_t(t, "posterior_mean");
  double total = continuous_part(
      post, t, [](double cv, double yv) { return nan_if_empty(cv, cv + yv); }, 1.0);
  for (const auto& a : post.atoms()) {
    if (a.time > t) break;
    total += a.mass();
  }
  return total;
}

double posterior_variance(const BetaStacyPosterior& post, double t) {
  require_t(t, "posterior_variance");
  double total = continuous_part(
      post, t,
      [](double cv, double yv) {
        const double bv = cv + yv;
        return nan_if_empty(cv, bv * (bv + 1.0));
      },
      0.0);
  for (const auto& a : post.atoms()) {
    if (a.time > t) break;
    if (std::isinf(a.b)) continue;
    const double m = a.mass();
    total += m * (1.0 - m) / (a.b + 1.0);
  }
  return total;
}

namespace {

DensityForm scaled(const DensityForm& form, double w) {
  return std::visit(
      [w](const auto& d) -> DensityForm {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, ConstantDensity>) {
          return ConstantDensity{d.rate * w};
        } else if constexpr (std::is_same_v<D, ParetoDensity>) {
          return ParetoDensity{d.alpha * w};
        } else {
          return WeibullDensity{d.alpha * w, d.p};
        }
      },
      form);
}

}  // namespace

HazardMeasure posterior_mean_measure(const BetaStacyPosterior& post) {
  std::vector<double> xs = merged_breakpoints(post.prior().c, post.risk());
  const double t0 = post.exact_splice_from();
  if (std::isfinite(t0)) {
    xs.push_back(t0);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  }
  xs.push_back(kInfinity);

  HazardMeasure out;
  double lo = 0.0;
  for (double hi : xs) {
    if (!(hi > lo)) continue;
    const double probe = std::isinf(hi) ? lo + 1.0 : 0.5 * (lo + hi);
    const double cv = post.c(probe);
    const double bv = cv + post.risk()(probe);
    const double w = std::isinf(cv) ? 1.0 : (bv == 0.0 ? std::nan("") : cv / bv);
    for (const auto& piece : post.baseline().pieces()) {
      const double a = std::max(lo, piece.start);
      const double b = std::min(hi, piece.end);
      if (!(b > a) || piece.mass(a, b) == 0.0) continue;
      if (std::isnan(w)) throw NumericError("posterior_mean_measure: degenerate weight");
      if (w > 0.0) out.add_piece(a, b, scaled(piece.form, w));
    }
    lo = hi;
  }
  for (const auto& a : post.atoms()) {
    if (a.mass() > 0.0) out.add_atom(a.time, a.mass());
  }
  return out;
}

double product_integral(const HazardMeasure& h, double t) {
  require_t(t, "product_integral");
  double surv = std::exp(-h.continuous_cumulative(t));
  for (const auto& a : h.atoms()) {
    if (a.time > t) break;
    if (a.mass > 1.0) throw NumericError("product_integral: jump exceeds one");
    surv *= 1.0 - a.mass;
  }
  return surv;
}

double product_integral(const StepFunction& jumps, double t) {
  require_t(t, "product_integral");
  double surv = 1.0;
  for (double x : jumps.breakpoints()) {
    if (x > t) break;
    const double dh = jumps.jump_at(x);
    if (dh > 1.0) throw NumericError("product_integral: jump exceeds one");
    if (dh < 0.0) throw UsageError("product_integral: cumulative hazard must be non-decreasing");
    surv *= 1.0 - dh;
  }
  return surv;
}

BetaStacyPrior make_spliced_prior(const TailFit& fit, double q, double t0, double a_n,
                                  std::size_t n, std::optional<double> tail_start) {
  if (!(t0 > 0.0) || std::isinf(t0)) throw UsageError("spliced prior: t0 must be positive");
  if (!(q >= 0.0) || std::isinf(q)) throw UsageError("spliced prior: q must be non-negative");
  if (!(a_n > 0.0)) throw UsageError("spliced prior: a_n must be positive");
  const bool exact = std::isinf(a_n);
  // 2^{-n} underflows to 0 for n above ~1074, which is the intended limit
  const double below = std::ldexp(1.0, -static_cast<int>(std::min<std::size_t>(n, 2000)));

  BetaStacyPrior prior;
  prior.c = StepFunction({t0}, {below, exact ? 0.0 : a_n});
  if (exact) prior.exact_splice_from = t0;
  if (q > 0.0) prior.baseline.add_piece(0.0, t0, ConstantDensity{q});
  if (fit.kind == TailKind::Pareto) {
    prior.baseline.add_piece(tail_start.value_or(t0), kInfinity, ParetoDensity{fit.alpha_hat});
  } else {
    prior.baseline.add_piece(tail_start.value_or(1.0), kInfinity,
                             WeibullDensity{fit.weibull_coefficient(), fit.p_hat});
  }
  prior.validate();
  return prior;
}

double spliced_survival(const BetaStacyPosterior& post, double t) {
  require_t(t, "spliced_survival");
  const double cont = continuous_part(
      post, t, [](double cv, double yv) { return nan_if_empty(cv, cv + yv); }, 1.0);
  double surv = std::exp(-cont);
  for (const auto& a : post.atoms()) {
    if (a.time > t) break;
    surv *= 1.0 - a.mass();
  }
  return surv;
}

}  // namespace bnpsurv
