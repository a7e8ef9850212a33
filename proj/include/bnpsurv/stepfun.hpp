#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

namespace bnpsurv {

/// Right-continuous piecewise-constant function on [0, inf).
///
/// With breakpoints x_1 < ... < x_K the function takes values[0] on
/// [0, x_1), values[i] on [x_i, x_{i+1}) and values[K] on [x_K, inf).
/// `left_limit` gives the value just before a point, which is how
/// left-continuous quantities such as the at-risk count are read.
class StepFunction {
 public:
  /// The zero function.
  StepFunction() : values_{0.0} {}
  explicit StepFunction(double constant);
  StepFunction(std::vector<double> breakpoints, std::vector<double> values);

  /// Builds a function from (time, value-from-time-on) pairs in any order.
  /// Pairs sharing a time collapse to the one appearing last.
  static StepFunction from_pieces(double initial,
                                  std::vector<std::pair<double, double>> pieces);

  /// Cumulative sum of jumps: initial + sum of sizes at times <= t.
  /// Jumps at identical times are added together.
  static StepFunction from_jumps(std::span<const double> times,
                                 std::span<const double> sizes,
                                 double initial = 0.0);

  /// Piecewise-constant projection of `fn` on `grid`: the cell [g_i, g_{i+1})
  /// takes fn at its midpoint and [g_K, inf) takes fn(g_K). Values before
  /// the first grid point equal the first cell.
  static StepFunction project(const std::function<double(double)>& fn,
                              std::span<const double> grid);

  double operator()(double t) const;
  double left_limit(double t) const;
  double jump_at(double t) const { return (*this)(t) - left_limit(t); }

  std::span<const double> breakpoints() const { return breakpoints_; }
  std::span<const double> values() const { return values_; }
  double initial_value() const { return values_.front(); }
  double tail_value() const { return values_.back(); }

  /// Drops breakpoints across which the value does not change.
  StepFunction simplified() const;

  template <class Fn>
  StepFunction map(Fn&& fn) const {
    std::vector<double> out;
    out.reserve(values_.size());
    for (double v : values_) out.push_back(fn(v));
    return StepFunction(breakpoints_, std::move(out));
  }

  bool operator==(const StepFunction&) const = default;

 private:
  std::vector<double> breakpoints_;
  std::vector<double> values_;
};

/// Pointwise combination over the merged breakpoint set.
StepFunction combine(const StepFunction& f, const StepFunction& g,
                     const std::function<double(double, double)>& op);
StepFunction operator+(const StepFunction& f, const StepFunction& g);

/// Sorted union of the breakpoints of both functions.
std::vector<double> merged_breakpoints(const StepFunction& f,
                                       const StepFunction& g);

/// Constant density q on its interval.
struct ConstantDensity {
  double rate;
};
/// Density alpha / t; the interval must start strictly above zero.
struct ParetoDensity {
  double alpha;
};
/// Density alpha * p * t^(p-1), cumulative alpha * t^p.
struct WeibullDensity {
  double alpha;
  double p;
};
using DensityForm = std::variant<ConstantDensity, ParetoDensity, WeibullDensity>;

struct DensityPiece {
  double start;
  double end;  // may be +inf
  DensityForm form;

  double density(double t) const;
  /// Integral of the density over [a, b] intersected with the piece.
  double mass(double a, double b) const;
};

struct Atom {
  double time;
  double mass;
};

/// Hazard measure made of closed-form density pieces (which may overlap and
/// then add up) plus point masses in [0, 1].
class HazardMeasure {
 public:
  HazardMeasure() = default;
  HazardMeasure(std::vector<DensityPiece> pieces, std::vector<Atom> atoms);

  HazardMeasure& add_piece(double start, double end, DensityForm form);
  HazardMeasure& add_atom(double time, double mass);

  std::span<const DensityPiece> pieces() const { return pieces_; }
  std::span<const Atom> atoms() const { return atoms_; }
  bool has_atoms() const { return !atoms_.empty(); }

  double density(double t) const;
  /// Continuous mass of (a, b].
  double continuous_mass(double a, double b) const;
  double continuous_cumulative(double t) const { return continuous_mass(0.0, t); }
  /// Sum of atom masses in (0, t].
  double atomic_cumulative(double t) const;
  double cumulative(double t) const;

  /// Finite piece boundaries, sorted and unique.
  std::vector<double> breakpoints() const;

  /// True when the total mass is infinite, i.e. the product integral tends
  /// to a proper distribution.
  bool total_mass_diverges() const;

 private:
  std::vector<DensityPiece> pieces_;
  std::vector<Atom> atoms_;  // sorted by time
};

/// Lambda(t) = continuous part on (0, t] plus atoms in (0, t].
double eval_cumulative(const HazardMeasure& h, double t);

/// Integral over (0, t] of c / (c + y) with respect to h, exact per interval
/// of joint constancy of c and y. Atoms are weighted with the right-continuous
/// values of c and y at the atom.
double integrate_ratio(const StepFunction& c, const StepFunction& y,
                       const HazardMeasure& h, double t);

/// Generic form behind integrate_ratio: integral over (0, t] of
/// weight(c(s), y(s)) dh(s). A NaN weight on a set carrying mass is reported
/// as a degenerate-weight error.
double integrate_weighted(const StepFunction& c, const StepFunction& y,
                          const HazardMeasure& h, double t,
                          const std::function<double(double, double)>& weight);

}  // namespace bnpsurv
