#include "bnpsurv/stepfun.hpp"

#include <algorithm>
#include <iterator>
#include <type_traits>
#include <cmath>
#include <limits>
#include <sstream>

#include "bnpsurv/errors.hpp"

namespace bnpsurv {

namespace {

void require_time(double t, const char* what) {
  if (!(t >= 0.0) || std::isinf(t)) {
    std::ostringstream msg;
    msg << what << ": time must be finite and non-negative, got " << t;
    throw UsageError(msg.str());
  }
}

}  // namespace

StepFunction::StepFunction(double constant) : values_{constant} {
  if (!std::isfinite(constant)) throw UsageError("StepFunction: non-finite value");
}

StepFunction::StepFunction(std::vector<double> breakpoints, std::vector<double> values)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
  if (values_.size() != breakpoints_.size() + 1) {
    throw UsageError("StepFunction: need exactly one more value than breakpoints");
  }
  for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
    const double x = breakpoints_[i];
    if (!(x >= 0.0) || std::isinf(x)) {
      throw UsageError("StepFunction: breakpoints must be finite and non-negative");
    }
    if (i > 0 && !(breakpoints_[i - 1] < x)) {
      throw UsageError("StepFunction: breakpoints must be strictly increasing");
    }
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw UsageError("StepFunction: values must be finite");
  }
}

StepFunction StepFunction::from_pieces(double initial,
                                       std::vector<std::pair<double, double>> pieces) {
  std::stable_sort(pieces.begin(), pieces.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<double> xs;
  std::vector<double> vs{initial};
  for (const auto& [x, v] : pieces) {
    if (!xs.empty() && xs.back() == x) {
      vs.back() = v;
    } else {
      xs.push_back(x);
      vs.push_back(v);
    }
  }
  return StepFunction(std::move(xs), std::move(vs));
}

StepFunction StepFunction::from_jumps(std::span<const double> times,
                                      std::span<const double> sizes, double initial) {
  if (times.size() != sizes.size()) {
    throw UsageError("StepFunction::from_jumps: times and sizes differ in length");
  }
  std::vector<std::size_t> order(times.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
  std::vector<double> xs;
  std::vector<double> vs{initial};
  double level = initial;
  for (std::size_t i : order) {
    level += sizes[i];
    if (!xs.empty() && xs.back() == times[i]) {
      vs.back() = level;
    } else {
      xs.push_back(times[i]);
      vs.push_back(level);
    }
  }
  return StepFunction(std::move(xs), std::move(vs));
}

StepFunction StepFunction::project(const std::function<double(double)>& fn,
                                   std::span<const double> grid) {
  if (grid.empty()) throw UsageError("StepFunction::project: empty grid");
  std::vector<double> xs(grid.begin(), grid.end());
  std::vector<double> vs;
  vs.reserve(xs.size() + 1);
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) vs.push_back(fn(0.5 * (xs[i] + xs[i + 1])));
  vs.push_back(fn(xs.back()));
  vs.insert(vs.begin(), vs.front());
  return StepFunction(std::move(xs), std::move(vs));
}

double StepFunction::operator()(double t) const {
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  return values_[static_cast<std::size_t>(it - breakpoints_.begin())];
}

double StepFunction::left_limit(double t) const {
  auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), t);
  return values_[static_cast<std::size_t>(it - breakpoints_.begin())];
}

StepFunction StepFunction::simplified() const {
  std::vector<double> xs;
  std::vector<double> vs{values_.front()};
  for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
    if (values_[i + 1] != vs.back()) {
      xs.push_back(breakpoints_[i]);
      vs.push_back(values_[i + 1]);
    }
  }
  return StepFunction(std::move(xs), std::move(vs));
}

std::vector<double> merged_breakpoints(const StepFunction& f, const StepFunction& g) {
  std::vector<double> out;
  auto a = f.breakpoints();
  auto b = g.breakpoints();
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

StepFunction combine(const StepFunction& f, const StepFunction& g,
                     const std::function<double(double, double)>& op) {
  std::vector<double> xs = merged_breakpoints(f, g);
  std::vector<double> vs;
  vs.reserve(xs.size() + 1);
  vs.push_back(op(f.initial_value(), g.initial_value()));
  for (double x : xs) vs.push_back(op(f(x), g(x)));
  return StepFunction(std::move(xs), std::move(vs));
}

StepFunction operator+(const StepFunction& f, const StepFunction& g) {
  return combine(f, g, [](double a, double b) { return a + b; });
}

double DensityPiece::density(double t) const {
  if (t < start || t >= end) return 0.0;
  return std::visit(
      [t](const auto& d) -> double {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, ConstantDensity>) {
          return d.rate;
        } else if constexpr (std::is_same_v<D, ParetoDensity>) {
          return d.alpha / t;
        } else {
          return d.alpha * d.p * std::pow(t, d.p - 1.0);
        }
      },
      form);
}

double DensityPiece::mass(double a, double b) const {
  const double lo = std::max(a, start);
  const double hi = std::min(b, end);
  if (!(hi > lo)) return 0.0;
  return std::visit(
      [lo, hi](const auto& d) -> double {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, ConstantDensity>) {
          if (d.rate == 0.0) return 0.0;
          return d.rate * (hi - lo);
        } else if constexpr (std::is_same_v<D, ParetoDensity>) {
          if (d.alpha == 0.0) return 0.0;
          return d.alpha * std::log1p((hi - lo) / lo);
        } else {
          if (d.alpha == 0.0) return 0.0;
          if (lo == 0.0) return d.alpha * std::pow(hi, d.p);
          // lo^p * (exp(p log(hi/lo)) - 1) keeps short intervals accurate
          return d.alpha * std::pow(lo, d.p) * std::expm1(d.p * std::log(hi / lo));
        }
      },
      form);
}

HazardMeasure::HazardMeasure(std::vector<DensityPiece> pieces, std::vector<Atom> atoms) {
  for (auto& p : pieces) add_piece(p.start, p.end, p.form);
  for (auto& a : atoms) add_atom(a.time, a.mass);
}

HazardMeasure& HazardMeasure::add_piece(double start, double end, DensityForm form) {
  if (!(start >= 0.0) || std::isinf(start) || !(end > start)) {
    throw UsageError("HazardMeasure: piece needs 0 <= start < end");
  }
  const bool ok = std::visit(
      [start](const auto& d) -> bool {
        using D = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<D, ConstantDensity>) {
          return d.rate >= 0.0 && std::isfinite(d.rate);
        } else if constexpr (std::is_same_v<D, ParetoDensity>) {
          return d.alpha >= 0.0 && std::isfinite(d.alpha) && start > 0.0;
        } else {
          return d.alpha >= 0.0 && std::isfinite(d.alpha) && d.p > 0.0 && std::isfinite(d.p);
        }
      },
      form);
  if (!ok) {
    throw UsageError(
        "HazardMeasure: density coefficients must be non-negative and finite "
        "(Pareto pieces must start above zero, Weibull shape must be positive)");
  }
  pieces_.push_back({start, end, form});
  return *this;
}

HazardMeasure& HazardMeasure::add_atom(double time, double mass) {
  if (!(time > 0.0) || std::isinf(time)) throw UsageError("HazardMeasure: atom time must be positive");
  if (!(mass >= 0.0 && mass <= 1.0)) throw UsageError("HazardMeasure: atom mass must lie in [0, 1]");
  auto it = std::upper_bound(atoms_.begin(), atoms_.end(), time,
                             [](double t, const Atom& a) { return t < a.time; });
  atoms_.insert(it, Atom{time, mass});
  return *this;
}

double HazardMeasure::density(double t) const {
  double d = 0.0;
  for (const auto& p : pieces_) d += p.density(t);
  return d;
}

double HazardMeasure::continuous_mass(double a, double b) const {
  double m = 0.0;
  for (const auto& p : pieces_) m += p.mass(a, b);
  return m;
}

double HazardMeasure::atomic_cumulative(double t) const {
  double m = 0.0;
  for (const auto& a : atoms_) {
    if (a.time > t) break;
    m += a.mass;
  }
  return m;
}

double HazardMeasure::cumulative(double t) const {
  return continuous_cumulative(t) + atomic_cumulative(t);
}

std::vector<double> HazardMeasure::breakpoints() const {
  std::vector<double> xs;
  for (const auto& p : pieces_) {
    xs.push_back(p.start);
    if (std::isfinite(p.end)) xs.push_back(p.end);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

bool HazardMeasure::total_mass_diverges() const {
  return std::any_of(pieces_.begin(), pieces_.end(), [](const DensityPiece& p) {
    return std::isinf(p.end) && p.mass(p.start + 1.0, std::numeric_limits<double>::infinity()) > 0.0;
  });
}

double eval_cumulative(const HazardMeasure& h, double t) {
  require_time(t, "eval_cumulative");
  return h.cumulative(t);
}

double integrate_weighted(const StepFunction& c, const StepFunction& y,
                          const HazardMeasure& h, double t,
                          const std::function<double(double, double)>& weight) {
  require_time(t, "integrate_weighted");
  double total = 0.0;
  double u = 0.0;
  auto add_interval = [&](double lo, double hi) {
    const double m = h.continuous_mass(lo, hi);
    if (m == 0.0) return;
    const double mid = 0.5 * (lo + hi);
    const double w = weight(c(mid), y(mid));
    if (std::isnan(w)) {
      std::ostringstream msg;
      msg << "degenerate weight: c + Y vanishes on (" << lo << ", " << hi
          << "] which carries hazard mass " << m;
      throw NumericError(msg.str());
    }
    total += w * m;
  };
  for (double x : merged_breakpoints(c, y)) {
    if (x >= t) break;
    if (x > u) {
      add_interval(u, x);
      u = x;
    }
  }
  if (t > u) add_interval(u, t);

  for (const auto& a : h.atoms()) {
    if (a.time > t) break;
    if (a.mass == 0.0) continue;
    const double w = weight(c(a.time), y(a.time));
    if (std::isnan(w)) {
      std::ostringstream msg;
      msg << "degenerate weight: c + Y vanishes at atom " << a.time;
      throw NumericError(msg.str());
    }
    total += w * a.mass;
  }
  return total;
}

double integrate_ratio(const StepFunction& c, const StepFunction& y,
                       const HazardMeasure& h, double t) {
  return integrate_weighted(c, y, h, t, [](double cv, double yv) {
    if (cv < 0.0 || yv < 0.0) throw UsageError("integrate_ratio: c and Y must be non-negative");
    const double b = cv + yv;
    if (b == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return cv / b;
  });
}

}  // namespace bnpsurv
