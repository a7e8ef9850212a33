#include "bnpsurv/specfun.hpp"

#include <cmath>
#include <limits>

#include "bnpsurv/errors.hpp"

namespace bnpsurv::specfun {

namespace {

constexpr double kEps = 1e-17;
constexpr int kMaxTerms = 1000;

// sum_{k>=1} (-1)^{k+1} x^k / (k k!), i.e. Ein(x), by direct summation.
// Alternating with shrinking terms for x <= 2, so the error is below the
// first omitted term.
double ein_series(double x) {
  if (x == 0.0) return 0.0;
  double term = x;  // x^k / k!
  double sum = x;
  for (int k = 2; k < kMaxTerms; ++k) {
    term *= -x / k;
    const double add = term / k;
    sum += add;
    if (std::fabs(add) <= kEps * std::fabs(sum)) return sum;
  }
  throw NumericError("expint: series failed to converge");
}

// E1(x) for x >= 1 via the continued fraction
// E1(x) = e^{-x} / (x + 1 - 1/(x + 3 - 4/(x + 5 - ...))).
double e1_continued_fraction(double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / kEps;
  double b = x + 1.0;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxTerms; ++i) {
    const double an = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (an * d + b);
    c = b + an / c;
    const double del = c * d;
    h *= del;
    if (std::fabs(del - 1.0) < 4e-16) return h * std::exp(-x);
  }
  throw NumericError("expint: continued fraction failed to converge");
}

}  // namespace

double expint_e1(double x) {
  if (!(x > 0.0)) throw UsageError("expint_e1: argument must be positive");
  if (std::isinf(x)) return 0.0;
  if (x < 1.0) return -kEulerGamma - std::log(x) + ein_series(x);
  return e1_continued_fraction(x);
}

double expint_e1_plus_log(double x) {
  if (!(x >= 0.0)) throw UsageError("expint_e1_plus_log: argument must be non-negative");
  if (x < 1.0) return -kEulerGamma + ein_series(x);
  return e1_continued_fraction(x) + std::log(x);
}

double expint_ein(double x) {
  if (!(x >= 0.0)) throw UsageError("expint_ein: argument must be non-negative");
  if (x <= 2.0) return ein_series(x);
  return expint_e1(x) + std::log(x) + kEulerGamma;
}

}  // namespace bnpsurv::specfun
