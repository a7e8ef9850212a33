#include "bnpsurv/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bnpsurv/errors.hpp"
#include "bnpsurv/specfun.hpp"

namespace bnpsurv {

namespace {

constexpr std::uint64_t kIterationCap = 1'000'000'000ULL;
constexpr double kLog2 = std::numbers::ln2;
constexpr double kRatioSlack = 1e-12;

[[noreturn]] void runaway(const char* where) {
  throw NumericError(std::string(where) + ": rejection loop exceeded the iteration cap");
}

}  // namespace

TruncatedGammaParams rule_of_thumb(double mu) {
  if (!(mu >= 0.0) || std::isinf(mu)) throw UsageError("rule_of_thumb: mu must be finite and >= 0");
  return {mu, 1.0 / (1.0 + mu), 1.0 - 1.0 / std::log(std::exp(2.0) + mu)};
}

double log_acceptance_constant(const TruncatedGammaParams& p) {
  if (!(p.mu >= 0.0) || !(p.vartheta > 0.0) || !(p.delta > 0.0 && p.delta < 1.0)) {
    throw UsageError("acceptance_constant: need mu >= 0, vartheta > 0, delta in (0, 1)");
  }
  const double zeta = specfun::expint_e1_plus_log(p.mu) + p.vartheta;
  const double ez = std::exp(zeta);
  return -p.mu - 1.0 + std::lgamma(p.delta) - std::log1p(-p.delta) + zeta * ez -
         std::log(p.vartheta) - std::lgamma(ez + p.delta);
}

double acceptance_constant(const TruncatedGammaParams& p) {
  const double lc = log_acceptance_constant(p);
  if (lc > 709.0) throw NumericError("acceptance_constant: overflow, use log_acceptance_constant");
  return std::exp(lc);
}

double sample_truncated_gamma(double t, double mu, RngStream& rng) {
  if (!(t >= 0.0) || std::isinf(t)) throw UsageError("sample_truncated_gamma: t must be finite and >= 0");
  if (!(mu >= 0.0) || std::isinf(mu)) throw UsageError("sample_truncated_gamma: mu must be finite and >= 0");
  if (t == 0.0) return 0.0;
  const double lambda = std::max(mu, 1.0);

  // jumps below 1 of a gamma process with rate lambda, in size-biased order
  double total = 0.0;
  double remaining = rng.gamma(t) / lambda;
  std::uint64_t iter = 0;
  while (remaining > 1.0) {
    if (++iter > kIterationCap) runaway("sample_truncated_gamma");
    const double jump = remaining * -std::expm1(std::log(rng.uniform()) / t);
    if (jump <= 1.0) total += jump;
    remaining -= jump;
  }
  total += remaining;

  if (lambda > mu) {
    const double gap = lambda - mu;
    const double rate = t * (specfun::expint_ein(lambda) - specfun::expint_ein(mu));
    const std::uint64_t count = rng.poisson(rate);
    const double span = -std::expm1(-mu);
    for (std::uint64_t i = 0; i < count; ++i) {
      for (std::uint64_t tries = 0;; ++tries) {
        if (tries > kIterationCap) runaway("sample_truncated_gamma");
        const double u = rng.uniform();
        const double x = mu == 0.0 ? u : -std::log1p(-u * span) / mu;
        if (rng.uniform() * gap * x < -std::expm1(-gap * x)) {
          total += x;
          break;
        }
      }
    }
  }
  return total;
}

double phi(double x) {
  if (!(x >= 0.0)) throw UsageError("phi: argument must be non-negative");
  if (x < 1e-2) {
    const double x2 = x * x;
    return 0.5 + x / 12.0 - x * x2 / 720.0 + x * x2 * x2 / 30240.0;
  }
  if (std::isinf(x)) return 1.0;
  const double em = std::expm1(-x);  // e^{-x} - 1
  return (em + x) / (-x * em);
}

bool thin_accept_phi(double x, RngStream& rng) { return rng.uniform() < phi(x); }

EStarRates e_star_rates(double b) {
  if (!(b > 0.0) || std::isinf(b)) throw UsageError("e_star_rates: b must be positive and finite");
  const double high = std::exp((1.0 - b) * kLog2) / b;
  double low = 0.0;
  if (b <= 1.0) {
    low = std::expm1((1.0 - b) * kLog2);
  } else {
    low = 2.0 * (kLog2 - 0.5) * (b - 1.0) * -std::expm1(-(b + 1.0) * kLog2) / (b + 1.0);
  }
  return {low, high};
}

double sample_e_star_low(double b, RngStream& rng) {
  const double u = rng.uniform();
  if (b <= 1.0) return 0.5 * u;
  const double span = -std::expm1(-(b + 1.0) * kLog2);  // 1 - 2^{-(b+1)}
  return -std::expm1(std::log1p(-span * u) / (b + 1.0));
}

double sample_e_star_high(double b, RngStream& rng) {
  return 1.0 - 0.5 * std::exp(std::log(rng.uniform()) / b);
}

double e_acceptance_ratio(double x, double b) {
  if (!(x > 0.0 && x < 1.0)) throw UsageError("e_acceptance_ratio: x must lie in (0, 1)");
  if (!(b > 0.0) || std::isinf(b)) throw UsageError("e_acceptance_ratio: b must be positive and finite");
  double r = 0.0;
  if (x > 0.5) {
    r = 0.5 / x;
  } else if (b < 1.0) {
    r = std::expm1((b - 1.0) * std::log1p(-x)) / (2.0 * x * std::expm1((1.0 - b) * kLog2));
  } else if (b > 1.0) {
    const double a = b - 1.0;
    const double h = std::log1p(-x) + 2.0 * kLog2 * x;
    r = -std::expm1(-a * h) / ((1.0 - x) * 2.0 * (kLog2 - 0.5) * a * x);
  }
  if (!(r >= -kRatioSlack && r <= 1.0 + kRatioSlack)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "E thinning ratio out of range at x=" << x << ", b=" << b << ": " << r;
    throw NumericError(msg.str());
  }
  return std::clamp(r, 0.0, 1.0);
}

bool thin_accept_E(double x, double b, RngStream& rng) {
  return rng.uniform() < e_acceptance_ratio(x, b);
}

std::vector<double> refine_grid(const BetaStacyPosterior& post, std::span<const double> grid) {
  std::vector<double> out(grid.begin(), grid.end());
  for (const auto& a : post.atoms()) out.push_back(a.time);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

void check_grid(std::span<const double> grid) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0) || std::isinf(grid[i])) {
      throw UsageError("sampler: grid times must be finite and non-negative");
    }
    if (i > 0 && grid[i] < grid[i - 1]) throw UsageError("sampler: grid must be non-decreasing");
  }
}

// Walks the segments in time order, adding segment increments and atom
// jumps, and records the running value at each grid time.
template <class SegmentDraw, class AtomDraw>
PathSample walk(const BetaStacyPosterior& post, std::span<const double> grid, RngStream& rng,
                SegmentDraw&& seg_draw, AtomDraw&& atom_draw) {
  check_grid(grid);
  PathSample out;
  out.grid.assign(grid.begin(), grid.end());
  out.values.assign(grid.size(), 0.0);
  const auto segments = post.segments(grid);
  const auto& atoms = post.atoms();
  std::size_t ai = 0;
  std::size_t gi = 0;
  double value = 0.0;
  while (gi < grid.size() && grid[gi] <= 0.0) ++gi;
  for (const auto& seg : segments) {
    value += seg_draw(seg, rng);
    for (; ai < atoms.size() && atoms[ai].time <= seg.hi; ++ai) {
      if (atoms[ai].mass() == 0.0) continue;
      value += atom_draw(atoms[ai], rng);
    }
    for (; gi < grid.size() && grid[gi] <= seg.hi; ++gi) out.values[gi] = value;
  }
  out.infinite = std::isinf(value);
  return out;
}

}  // namespace

PathSample sample_A_path(const BetaStacyPosterior& post, std::span<const double> grid,
                         RngStream& rng) {
  auto seg_draw = [](const Segment& s, RngStream& r) -> double {
    if (s.c == 0.0 || s.mass == 0.0) return 0.0;
    if (std::isinf(s.c)) return s.mass;
    const double shape = s.c * s.mass;
    // B: gamma increment scaled by 1/b
    double inc = r.gamma(shape) / s.b;
    // C: thinning of exponential(b) jumps arriving at rate shape / b
    const std::uint64_t count = r.poisson(shape / s.b);
    for (std::uint64_t i = 0; i < count; ++i) {
      const double jump = r.exponential() / s.b;
      if (thin_accept_phi(jump, r)) inc += jump;
    }
    return inc;
  };
  auto atom_draw = [](const PosteriorAtom& a, RngStream& r) -> double {
    return -sample_beta_logs(a.dN, a.b - a.dN, r).log_1mx;
  };
  return walk(post, grid, rng, seg_draw, atom_draw);
}

PathSample sample_H_path(const BetaStacyPosterior& post, std::span<const double> grid,
                         RngStream& rng) {
  auto seg_draw = [](const Segment& s, RngStream& r) -> double {
    if (s.c == 0.0 || s.mass == 0.0) return 0.0;
    if (std::isinf(s.c)) return s.mass;
    const double shape = s.c * s.mass;
    // D: halved truncated gamma with mu = log 2 (b - 1)^+
    double inc = 0.5 * sample_truncated_gamma(shape, kLog2 * std::max(s.b - 1.0, 0.0), r);
    // E: thinning of E*
    const auto rates = e_star_rates(s.b);
    const double total = rates.low + rates.high;
    const std::uint64_t count = r.poisson(shape * total);
    for (std::uint64_t i = 0; i < count; ++i) {
      const bool low = r.uniform() * total < rates.low;
      const double x = low ? sample_e_star_low(s.b, r) : sample_e_star_high(s.b, r);
      if (thin_accept_E(x, s.b, r)) inc += x;
    }
    return inc;
  };
  auto atom_draw = [](const PosteriorAtom& a, RngStream& r) -> double {
    return std::exp(sample_beta_logs(a.dN, a.b - a.dN, r).log_x);
  };
  return walk(post, grid, rng, seg_draw, atom_draw);
}

}  // namespace bnpsurv
