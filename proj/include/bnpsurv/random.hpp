#pragma once

#include <cstdint>
#include <random>

namespace bnpsurv {

/// One independent, reproducible random stream.
///
/// The engine is a 64-bit Mersenne twister seeded through std::seed_seq from
/// the (seed, stream_id) pair, so one stream per path gives independent,
/// schedule-free ensembles. Identical pairs reproduce identical draws.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Uniform on the open interval (0, 1), 53 random bits.
  double uniform();
  /// Standard exponential.
  double exponential();
  /// Gamma(shape, 1); shape == 0 gives 0.
  double gamma(double shape);
  /// log of a Gamma(shape, 1) draw, accurate for vanishing shapes where the
  /// draw itself underflows.
  double log_gamma(double shape);
  std::uint64_t poisson(double mean);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::gamma_distribution<double> gamma_;
};

/// Draws Beta(a, b) through a pair of log-gamma variates and returns
/// {log x, log(1 - x)}. Either parameter may be zero, in which case the
/// draw sits at the corresponding endpoint.
struct BetaLogs {
  double log_x;
  double log_1mx;
};
BetaLogs sample_beta_logs(double a, double b, RngStream& rng);

}  // namespace bnpsurv
