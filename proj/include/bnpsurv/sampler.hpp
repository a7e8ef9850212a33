#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bnpsurv/betastacy.hpp"
#include "bnpsurv/random.hpp"

namespace bnpsurv {

/// Hyperparameters of the double-rejection truncated-gamma scheme.
struct TruncatedGammaParams {
  double mu;
  double vartheta;
  double delta;
};

/// vartheta = 1 / (1 + mu), delta = 1 - 1 / log(e^2 + mu).
TruncatedGammaParams rule_of_thumb(double mu);

/// log C(vartheta, delta, mu) with zeta = Gamma(0, mu) + vartheta + log(mu)
/// (the mu = 0 limit uses zeta = vartheta - Euler's gamma).
double log_acceptance_constant(const TruncatedGammaParams& p);
/// C(vartheta, delta, mu); 1 / C is the acceptance probability.
double acceptance_constant(const TruncatedGammaParams& p);

/// Exact draw of L_t for the subordinator with Levy density
/// I(x <= 1) e^{-mu x} / x.
///
/// With lambda = max(mu, 1), L_t is the sum of the jumps below 1 of a
/// Gamma(t, lambda) process (size-biased stick breaking of the total) and an
/// independent compound Poisson part with Levy density
/// I(x <= 1)(e^{-mu x} - e^{-lambda x}) / x, drawn by rejection.
double sample_truncated_gamma(double t, double mu, RngStream& rng);

/// phi(x) = (e^{-x} - 1 + x) / (x (1 - e^{-x})), with phi(0) = 1/2.
double phi(double x);
bool thin_accept_phi(double x, RngStream& rng);

/// Mixing weights of the dominating measure E* per unit c dLambda:
/// `low` for jumps in (0, 1/2], `high` for jumps in (1/2, 1).
struct EStarRates {
  double low;
  double high;
};
EStarRates e_star_rates(double b);
/// Jump from the normalized low (x <= 1/2) and high (x > 1/2) parts of E*.
double sample_e_star_low(double b, RngStream& rng);
double sample_e_star_high(double b, RngStream& rng);

/// Density ratio nu_E / nu_E* at (x, b); throws NumericError if it falls
/// outside [0, 1].
double e_acceptance_ratio(double x, double b);
bool thin_accept_E(double x, double b, RngStream& rng);

/// Sampled process values at grid times.
struct PathSample {
  std::vector<double> grid;
  std::vector<double> values;
  /// True when some atom has b = dN, making A infinite from there on.
  bool infinite = false;
};

/// Log-survival A = A^d + B + C at the grid times.
PathSample sample_A_path(const BetaStacyPosterior& post, std::span<const double> grid,
                         RngStream& rng);
/// Hazard H = H^d + D + E at the grid times.
PathSample sample_H_path(const BetaStacyPosterior& post, std::span<const double> grid,
                         RngStream& rng);

/// Merges grid and posterior event times (sorted, unique).
std::vector<double> refine_grid(const BetaStacyPosterior& post, std::span<const double> grid);

}  // namespace bnpsurv
