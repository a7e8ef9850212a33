#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bnpsurv/betastacy.hpp"
#include "bnpsurv/data.hpp"
#include "bnpsurv/sampler.hpp"
#include "bnpsurv/tails.hpp"

namespace bnpsurv {

enum class ProcessKind { Hazard, LogSurvival, Survival };

/// n_paths x grid matrix of sampled process values, row-major.
struct PathEnsemble {
  std::vector<double> grid;
  std::vector<double> values;
  std::size_t n_paths = 0;
  ProcessKind kind = ProcessKind::Hazard;

  double at(std::size_t path, std::size_t j) const { return values[path * grid.size() + j]; }
  std::span<const double> row(std::size_t path) const {
    return std::span<const double>(values).subspan(path * grid.size(), grid.size());
  }
  /// Values of every path at grid index j.
  std::vector<double> column(std::size_t j) const;
};

/// Worker threads for ensembles: BNPSURV_THREADS if set and positive,
/// otherwise the hardware concurrency.
unsigned ensemble_threads();

/// Path i is drawn from RngStream(seed, i), so results do not depend on the
/// thread schedule. Survival rows are exp(-A).
PathEnsemble ensemble(const BetaStacyPosterior& post, std::span<const double> grid,
                      std::size_t n_paths, ProcessKind kind, std::uint64_t seed,
                      unsigned threads = 0);

struct CredibleBand {
  std::vector<double> grid;
  std::vector<double> lower;
  std::vector<double> upper;
  double level = 0.0;
};

/// Type-7 quantile of ascending data.
double quantile_type7(std::span<const double> sorted, double p);

/// Pointwise empirical quantiles at (1 - level)/2 and (1 + level)/2.
/// Needs at least 20 paths; level 0 gives the pointwise median.
CredibleBand credible_band(const PathEnsemble& e, double level);

std::vector<double> ensemble_mean(const PathEnsemble& e);
std::vector<double> ensemble_sd(const PathEnsemble& e);

/// 512 equally spaced points on [0, 1.5 max T] merged with the event times.
std::vector<double> default_grid(const SurvivalSample& s, std::size_t points = 512);

enum class AnRule { LogN, Const, Infinity };

/// Spliced-model recipe: tail fit on the top k, tuning 2^{-n} below the
/// threshold and a_n above, baseline q below the threshold plus the tail.
struct SpliceConfig {
  TailKind tail = TailKind::Pareto;
  std::optional<std::size_t> k;  // default ceil(2 sqrt n)
  double q = 1.0;
  AnRule an_rule = AnRule::LogN;
  double an_value = 1.0;  // used by AnRule::Const
  bool weighted_hill = false;
  F0Kind f0 = F0Kind::KaplanMeier;
  std::optional<double> tail_start;
};

double resolve_an(AnRule rule, std::size_t n, double value);

struct SplicedModel {
  TailFit fit;
  double t0 = 0.0;
  double a_n = 0.0;
  BetaStacyPrior prior;
  BetaStacyPosterior posterior;
};
SplicedModel fit_spliced_model(const SurvivalSample& s, const SpliceConfig& cfg);

/// Synthetic experiment: generator protocol plus splice recipe.
struct ExperimentConfig {
  TailKind protocol = TailKind::Pareto;
  double alpha = 1.8;
  double p = 0.5;  // Weibull protocol only
  SpliceConfig splice;
};

SurvivalSample generate(const ExperimentConfig& cfg, std::size_t n, std::uint64_t seed);
/// -log P(X > t) of the uncensored protocol law.
double true_cumulative_hazard(const ExperimentConfig& cfg, double t);

struct ExperimentRun {
  SurvivalSample sample;
  std::vector<double> grid;
  PathEnsemble paths;
  CredibleBand band;
  std::vector<double> mean;
  double max_time = 0.0;
  /// Fractions over grid points in (0, max T].
  double truth_coverage = 0.0;
  double mean_in_band = 0.0;
};
/// Generates data, fits the spliced model and draws hazard paths.
ExperimentRun run_experiment(const ExperimentConfig& cfg, std::size_t n, std::size_t n_paths,
                             double level, std::uint64_t seed);

/// Posterior standard deviation at fixed times for increasing sample sizes.
struct BvmReport {
  std::vector<double> times;
  std::vector<std::size_t> n_values;
  std::vector<std::vector<double>> sd;      // [n index][time index]
  std::vector<std::vector<double>> ratios;  // sd[i] / sd[i + 1]
  double median_ratio = 0.0;                // over all ratios
};
/// Evaluation times are the true-survival quantiles `levels` of the protocol.
BvmReport bvm_diagnostic(const ExperimentConfig& cfg, std::span<const std::size_t> n_values,
                         std::uint64_t seed,
                         std::span<const double> levels = std::span<const double>());

}  // namespace bnpsurv
