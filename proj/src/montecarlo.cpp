#include "bnpsurv/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "bnpsurv/errors.hpp"

namespace bnpsurv {

std::vector<double> PathEnsemble::column(std::size_t j) const {
  std::vector<double> out(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) out[i] = at(i, j);
  return out;
}

unsigned ensemble_threads() {
  if (const char* env = std::getenv("BNPSURV_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

struct PathFailure {
  std::size_t index;
  std::exception_ptr error;
};

[[noreturn]] void rethrow_with_index(const PathFailure& f) {
  const std::string prefix = "path " + std::to_string(f.index) + ": ";
  try {
    std::rethrow_exception(f.error);
  } catch (const UsageError& e) {
    throw UsageError(prefix + e.what());
  } catch (const DataError& e) {
    throw DataError(prefix + e.what());
  } catch (const NumericError& e) {
    throw NumericError(prefix + e.what());
  } catch (const std::exception& e) {
    throw NumericError(prefix + e.what());
  }
}

}  // namespace

PathEnsemble ensemble(const BetaStacyPosterior& post, std::span<const double> grid,
                      std::size_t n_paths, ProcessKind kind, std::uint64_t seed,
                      unsigned threads) {
  if (n_paths < 1) throw UsageError("ensemble: need at least one path");
  PathEnsemble out;
  out.grid.assign(grid.begin(), grid.end());
  out.n_paths = n_paths;
  out.kind = kind;
  out.values.assign(n_paths * grid.size(), 0.0);

  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::optional<PathFailure> failure;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n_paths) return;
      try {
        RngStream rng(seed, i);
        const auto path = kind == ProcessKind::Hazard ? sample_H_path(post, grid, rng)
                                                      : sample_A_path(post, grid, rng);
        double* row = out.values.data() + i * grid.size();
        for (std::size_t j = 0; j < grid.size(); ++j) {
          row[j] = kind == ProcessKind::Survival ? std::exp(-path.values[j]) : path.values[j];
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure || i < failure->index) failure = PathFailure{i, std::current_exception()};
      }
    }
  };

  if (threads == 0) threads = ensemble_threads();
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_paths));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  if (failure) rethrow_with_index(*failure);
  return out;
}

double quantile_type7(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw UsageError("quantile: empty data");
  if (!(p >= 0.0 && p <= 1.0)) throw UsageError("quantile: probability must lie in [0, 1]");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0 || lo + 1 >= sorted.size()) return sorted[lo];
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

CredibleBand credible_band(const PathEnsemble& e, double level) {
  if (!(level >= 0.0 && level < 1.0)) throw UsageError("credible_band: level must lie in [0, 1)");
  if (e.n_paths < 20) {
    throw UsageError("credible_band: need at least 20 paths, got " + std::to_string(e.n_paths));
  }
  CredibleBand band;
  band.grid = e.grid;
  band.level = level;
  for (std::size_t j = 0; j < e.grid.size(); ++j) {
    auto col = e.column(j);
    std::sort(col.begin(), col.end());
    band.lower.push_back(quantile_type7(col, 0.5 * (1.0 - level)));
    band.upper.push_back(quantile_type7(col, 0.5 * (1.0 + level)));
  }
  return band;
}

std::vector<double> ensemble_mean(const PathEnsemble& e) {
  std::vector<double> out(e.grid.size(), 0.0);
  for (std::size_t i = 0; i < e.n_paths; ++i) {
    for (std::size_t j = 0; j < e.grid.size(); ++j) out[j] += e.at(i, j);
  }
  for (double& v : out) v /= static_cast<double>(e.n_paths);
  return out;
}

std::vector<double> ensemble_sd(const PathEnsemble& e) {
  const auto mean = ensemble_mean(e);
  std::vector<double> out(e.grid.size(), 0.0);
  if (e.n_paths < 2) return out;
  for (std::size_t i = 0; i < e.n_paths; ++i) {
    for (std::size_t j = 0; j < e.grid.size(); ++j) {
      const double d = e.at(i, j) - mean[j];
      out[j] += d * d;
    }
  }
  for (double& v : out) v = std::sqrt(v / static_cast<double>(e.n_paths - 1));
  return out;
}

std::vector<double> default_grid(const SurvivalSample& s, std::size_t points) {
  if (s.empty()) throw UsageError("default_grid: empty sample");
  if (points < 2) throw UsageError("default_grid: need at least two points");
  const double hi = 1.5 * s.max_time();
  std::vector<double> grid;
  grid.reserve(points + s.event_count());
  for (std::size_t i = 0; i < points; ++i) {
    grid.push_back(hi * static_cast<double>(i) / static_cast<double>(points - 1));
  }
  const auto& tab = s.event_table();
  for (std::size_t i = 0; i < tab.times.size(); ++i) {
    if (tab.events[i] > 0.0) grid.push_back(tab.times[i]);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

double resolve_an(AnRule rule, std::size_t n, double value) {
  switch (rule) {
    case AnRule::LogN:
      if (n < 2) throw UsageError("a_n = log n needs n >= 2");
      return std::log(static_cast<double>(n));
    case AnRule::Const:
      if (!(value > 0.0) || std::isinf(value)) throw UsageError("a_n constant must be positive and finite");
      return value;
    case AnRule::Infinity:
      return kInfinity;
  }
  throw UsageError("unknown a_n rule");
}

SplicedModel fit_spliced_model(const SurvivalSample& s, const SpliceConfig& cfg) {
  const std::size_t k = cfg.k.value_or(default_k(s.size()));
  TailFit fit;
  if (cfg.tail == TailKind::Pareto) {
    fit = cfg.weighted_hill ? hill_weighted(s, k) : hill_censored(s, k);
  } else {
    fit = weibull_ls(s, k, survival_estimate(s, cfg.f0));
  }
  const double a_n = resolve_an(cfg.an_rule, s.size(), cfg.an_value);
  auto prior = make_spliced_prior(fit, cfg.q, fit.threshold, a_n, s.size(), cfg.tail_start);
  auto post = posterior_update(prior, s);
  return SplicedModel{fit, fit.threshold, a_n, std::move(prior), std::move(post)};
}

SurvivalSample generate(const ExperimentConfig& cfg, std::size_t n, std::uint64_t seed) {
  if (cfg.protocol == TailKind::Pareto) return gen_pareto_sample(n, cfg.alpha, seed);
  return gen_weibull_sample(n, cfg.alpha, cfg.p, seed);
}

double true_cumulative_hazard(const ExperimentConfig& cfg, double t) {
  const double surv = cfg.protocol == TailKind::Pareto
                          ? pareto_protocol_survival(t, cfg.alpha)
                          : weibull_protocol_survival(t, cfg.alpha, cfg.p);
  return -std::log(surv);
}

namespace {

// Sampling streams are keyed off a mixed seed so they never reuse the data
// stream of the same seed.
std::uint64_t sampling_seed(std::uint64_t seed) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

ExperimentRun run_experiment(const ExperimentConfig& cfg, std::size_t n, std::size_t n_paths,
                             double level, std::uint64_t seed) {
  ExperimentRun run;
  run.sample = generate(cfg, n, seed);
  const auto model = fit_spliced_model(run.sample, cfg.splice);
  run.grid = default_grid(run.sample);
  run.paths = ensemble(model.posterior, run.grid, n_paths, ProcessKind::Hazard,
                       sampling_seed(seed));
  run.band = credible_band(run.paths, level);
  run.mean = ensemble_mean(run.paths);
  run.max_time = run.sample.max_time();
  std::size_t inside = 0;
  std::size_t covered = 0;
  std::size_t mean_ok = 0;
  for (std::size_t j = 0; j < run.grid.size(); ++j) {
    const double t = run.grid[j];
    if (!(t > 0.0 && t <= run.max_time)) continue;
    ++inside;
    const double truth = true_cumulative_hazard(cfg, t);
    if (run.band.lower[j] <= truth && truth <= run.band.upper[j]) ++covered;
    if (run.band.lower[j] <= run.mean[j] && run.mean[j] <= run.band.upper[j]) ++mean_ok;
  }
  if (inside > 0) {
    run.truth_coverage = static_cast<double>(covered) / static_cast<double>(inside);
    run.mean_in_band = static_cast<double>(mean_ok) / static_cast<double>(inside);
  }
  return run;
}

namespace {

double survival_quantile(const ExperimentConfig& cfg, double level) {
  auto surv = [&](double t) { return std::exp(-true_cumulative_hazard(cfg, t)); };
  double lo = 0.0;
  double hi = 1.0;
  while (surv(hi) > level) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (surv(mid) > level ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

BvmReport bvm_diagnostic(const ExperimentConfig& cfg, std::span<const std::size_t> n_values,
                         std::uint64_t seed, std::span<const double> levels) {
  if (n_values.empty()) throw UsageError("bvm_diagnostic: need at least one sample size");
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    if (n_values[i] < 100) throw UsageError("bvm_diagnostic: sample sizes must be >= 100");
    if (i > 0 && n_values[i] <= n_values[i - 1]) {
      throw UsageError("bvm_diagnostic: sample sizes must be increasing");
    }
  }
  static constexpr double kDefaultLevels[] = {0.8, 0.65, 0.5, 0.4, 0.3};
  if (levels.empty()) levels = kDefaultLevels;

  BvmReport rep;
  rep.n_values.assign(n_values.begin(), n_values.end());
  for (double l : levels) rep.times.push_back(survival_quantile(cfg, l));
  for (std::size_t n : n_values) {
    const auto model = fit_spliced_model(generate(cfg, n, seed), cfg.splice);
    std::vector<double> sd;
    for (double t : rep.times) sd.push_back(std::sqrt(posterior_variance(model.posterior, t)));
    rep.sd.push_back(std::move(sd));
  }
  std::vector<double> all;
  for (std::size_t i = 0; i + 1 < rep.sd.size(); ++i) {
    std::vector<double> r;
    for (std::size_t j = 0; j < rep.times.size(); ++j) r.push_back(rep.sd[i][j] / rep.sd[i + 1][j]);
    all.insert(all.end(), r.begin(), r.end());
    rep.ratios.push_back(std::move(r));
  }
  if (!all.empty()) {
    std::sort(all.begin(), all.end());
    rep.median_ratio = quantile_type7(all, 0.5);
  }
  return rep;
}

}  // namespace bnpsurv
