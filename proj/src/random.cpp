#include "bnpsurv/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bnpsurv/errors.hpp"

namespace bnpsurv {

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32)};
  engine_.seed(seq);
}

double RngStream::uniform() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::exponential() { return -std::log(uniform()); }

double RngStream::gamma(double shape) {
  if (shape == 0.0) return 0.0;
  if (shape < 1.0) return std::exp(log_gamma(shape));
  return gamma_(engine_, std::gamma_distribution<double>::param_type(shape, 1.0));
}

double RngStream::log_gamma(double shape) {
  if (!(shape >= 0.0) || std::isinf(shape)) throw UsageError("gamma variate: bad shape");
  if (shape == 0.0) return -std::numeric_limits<double>::infinity();
  if (shape < 1.0) {
    // G(a) = G(a + 1) * U^{1/a}
    const double g = gamma_(engine_, std::gamma_distribution<double>::param_type(shape + 1.0, 1.0));
    return std::log(g) + std::log(uniform()) / shape;
  }
  return std::log(gamma_(engine_, std::gamma_distribution<double>::param_type(shape, 1.0)));
}

std::uint64_t RngStream::poisson(double mean) {
  if (!(mean >= 0.0) || std::isinf(mean)) throw UsageError("poisson variate: bad mean");
  if (mean == 0.0) return 0;
  std::poisson_distribution<std::uint64_t> dist(mean);
  return dist(engine_);
}

BetaLogs sample_beta_logs(double a, double b, RngStream& rng) {
  if (!(a >= 0.0) || !(b >= 0.0) || (a == 0.0 && b == 0.0)) {
    throw UsageError("beta variate: parameters must be non-negative and not both zero");
  }
  const double lx = rng.log_gamma(a);
  const double ly = rng.log_gamma(b);
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (ly == -inf) return {0.0, -inf};
  if (lx == -inf) return {-inf, 0.0};
  const double hi = std::max(lx, ly);
  const double lse = hi + std::log1p(std::exp(std::min(lx, ly) - hi));
  return {lx - lse, ly - lse};
}

}  // namespace bnpsurv
