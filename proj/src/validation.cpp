#include "bnpsurv/validation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bnpsurv/data.hpp"
#include "bnpsurv/errors.hpp"
#include "bnpsurv/montecarlo.hpp"
#include "bnpsurv/specfun.hpp"

namespace bnpsurv {

SamplerHooks faulty_hooks() {
  SamplerHooks hooks;
  hooks.h_path = [](const BetaStacyPosterior& p, std::span<const double> g, RngStream& r) {
    auto path = sample_H_path(p, g, r);
    for (double& v : path.values) v *= 1.05;
    return path;
  };
  hooks.truncated_gamma = [](double t, double mu, RngStream& r) {
    return 1.05 * sample_truncated_gamma(t, mu, r);
  };
  return hooks;
}

bool SuiteReport::passed() const {
  return !checks.empty() &&
         std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::vector<std::string> suite_names() { return {"moments", "laplace", "thinning", "bvm"}; }

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
  double m4 = 0.0;  // central fourth moment
  std::size_t n = 0;
};

Moments moments(std::span<const double> xs) {
  Moments m;
  m.n = xs.size();
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(m.n);
  for (double x : xs) {
    const double d = x - m.mean;
    m.var += d * d;
    m.m4 += d * d * d * d;
  }
  m.m4 /= static_cast<double>(m.n);
  m.var /= static_cast<double>(m.n - 1);
  return m;
}

std::string describe(const char* what, double got, double want, double se) {
  std::ostringstream os;
  os.precision(6);
  os << what << ": got " << got << ", expected " << want << " (" << std::fabs(got - want) / se
     << " standard errors)";
  return os.str();
}

CheckResult within(std::string name, const char* what, double got, double want, double se,
                   double z) {
  const bool ok = se > 0.0 ? std::fabs(got - want) <= z * se : got == want;
  return {std::move(name), ok, describe(what, got, want, se)};
}

void moments_suite(SuiteReport& rep, std::uint64_t seed, const SamplerHooks& hooks) {
  constexpr std::size_t kPaths = 4000;
  const auto sample = gen_pareto_sample(40, 1.8, seed);
  BetaStacyPrior prior{StepFunction(2.0), HazardMeasure().add_piece(0.0, kInfinity, ConstantDensity{0.5})};
  const auto post = posterior_update(prior, sample);
  std::vector<double> grid;
  const double hi = 1.2 * sample.max_time();
  for (int j = 1; j <= 8; ++j) grid.push_back(hi * j / 8.0);

  std::vector<std::vector<double>> cols(grid.size());
  for (std::size_t i = 0; i < kPaths; ++i) {
    RngStream rng(seed, i);
    const auto path = hooks.h_path(post, grid, rng);
    for (std::size_t j = 0; j < grid.size(); ++j) cols[j].push_back(path.values[j]);
  }
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const auto m = moments(cols[j]);
    const double n = static_cast<double>(m.n);
    std::ostringstream tag;
    tag.precision(4);
    tag << " at t=" << grid[j];
    rep.checks.push_back(within("posterior mean" + tag.str(), "mean", m.mean,
                                posterior_mean(post, grid[j]), std::sqrt(m.var / n), 4.0));
    const double var_se = std::sqrt(std::max(m.m4 - m.var * m.var, 0.0) / n);
    rep.checks.push_back(within("posterior variance" + tag.str(), "variance", m.var,
                                posterior_variance(post, grid[j]), var_se, 5.0));
  }
}

void laplace_suite(SuiteReport& rep, std::uint64_t seed, const SamplerHooks& hooks) {
  constexpr std::size_t kDraws = 20000;
  constexpr double t = 1.0;
  constexpr double theta = 1.0;
  std::uint64_t stream = 0;
  for (double mu : {0.0, 1.0, 10.0}) {
    RngStream rng(seed, stream++);
    std::vector<double> lt;
    std::vector<double> draws;
    for (std::size_t i = 0; i < kDraws; ++i) {
      const double x = hooks.truncated_gamma(t, mu, rng);
      draws.push_back(x);
      lt.push_back(std::exp(-theta * x));
    }
    const auto ml = moments(lt);
    const auto md = moments(draws);
    const double n = static_cast<double>(kDraws);
    const double want_lt =
        std::exp(-t * (specfun::expint_ein(theta + mu) - specfun::expint_ein(mu)));
    const double want_mean = mu == 0.0 ? t : t * -std::expm1(-mu) / mu;
    std::ostringstream tag;
    tag << " (mu=" << mu << ")";
    rep.checks.push_back(within("Laplace transform" + tag.str(), "E exp(-L)", ml.mean, want_lt,
                                std::sqrt(ml.var / n), 4.0));
    rep.checks.push_back(within("mean" + tag.str(), "E L", md.mean, want_mean,
                                std::sqrt(md.var / n), 4.0));
  }
}

double ks_distance(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

void thinning_suite(SuiteReport& rep, std::uint64_t seed, const SamplerHooks& hooks) {
  {
    bool ok = true;
    std::string detail = "phi in (1/2, 1) on 10^4 points over [1e-8, 1e3]";
    for (int i = 0; i < 10000; ++i) {
      const double x = std::pow(10.0, -8.0 + 11.0 * i / 9999.0);
      const double v = phi(x);
      if (!(v > 0.5 && v < 1.0)) {
        ok = false;
        std::ostringstream os;
        os << "phi(" << x << ") = " << v;
        detail = os.str();
        break;
      }
    }
    rep.checks.push_back({"phi range", ok, detail});
  }
  for (double b : {0.25, 0.5, 1.0, 1.5, 2.0, 5.0, 10.0}) {
    bool ok = true;
    std::ostringstream detail;
    detail << "ratio in [0, 1] for 999 x values";
    try {
      for (int i = 1; i < 1000; ++i) {
        const double x = i / 1000.0;
        const double r = hooks.e_ratio(x, b);
        if (!(r >= 0.0 && r <= 1.0)) {
          ok = false;
          detail.str("");
          detail << "ratio(" << x << ") = " << r;
          break;
        }
      }
    } catch (const NumericError& e) {
      ok = false;
      detail.str(e.what());
    }
    std::ostringstream name;
    name << "E acceptance ratio (b=" << b << ")";
    rep.checks.push_back({name.str(), ok, detail.str()});

    bool dom = true;
    for (int i = 1; i <= 5000; ++i) {
      const double x = 0.5 * i / 5000.0;
      const double lhs = (b - 1.0) * std::log1p(-x);
      const double rhs = -2.0 * std::numbers::ln2 * std::max(b - 1.0, 0.0) * x;
      if (lhs < rhs - 1e-15) dom = false;
      if (b > 1.0 && x < 0.5 && !(lhs > rhs)) dom = false;
    }
    std::ostringstream dname;
    dname << "dominance (b=" << b << ")";
    rep.checks.push_back({dname.str(), dom, "(1-x)^(b-1) >= exp(-2 log2 (b-1)^+ x) on (0, 1/2]"});
  }
  constexpr std::size_t kDraws = 20000;
  const double crit = 1.63 / std::sqrt(static_cast<double>(kDraws));
  std::uint64_t stream = 0;
  for (double b : {2.0, 5.0}) {
    RngStream rng(seed, stream++);
    std::vector<double> low;
    std::vector<double> high;
    for (std::size_t i = 0; i < kDraws; ++i) {
      low.push_back(sample_e_star_low(b, rng));
      high.push_back(sample_e_star_high(b, rng));
    }
    const double norm = 1.0 - std::pow(2.0, -(b + 1.0));
    const double d_low =
        ks_distance(low, [b, norm](double v) { return (1.0 - std::pow(1.0 - v, b + 1.0)) / norm; });
    const double d_high =
        ks_distance(high, [b](double v) { return 1.0 - std::pow(2.0 * (1.0 - v), b); });
    std::ostringstream tag;
    tag << " (b=" << b << ")";
    std::ostringstream dl;
    dl << "KS " << d_low << " vs critical " << crit;
    std::ostringstream dh;
    dh << "KS " << d_high << " vs critical " << crit;
    rep.checks.push_back({"E* low jump law" + tag.str(), d_low < crit, dl.str()});
    rep.checks.push_back({"E* high jump law" + tag.str(), d_high < crit, dh.str()});
  }
}

void bvm_suite(SuiteReport& rep, std::uint64_t seed) {
  ExperimentConfig cfg;
  const std::size_t ns[] = {500, 2000};
  const auto r = bvm_diagnostic(cfg, ns, seed);
  std::ostringstream os;
  os << "median sd ratio n=500 vs n=2000: " << r.median_ratio;
  rep.checks.push_back(
      {"BvM sd ratio in [1.5, 2.5]", r.median_ratio >= 1.5 && r.median_ratio <= 2.5, os.str()});
}

}  // namespace

SuiteReport run_suite(std::string_view name, std::uint64_t seed, const SamplerHooks& hooks) {
  SuiteReport rep;
  rep.suite = std::string(name);
  if (name == "moments") {
    moments_suite(rep, seed, hooks);
  } else if (name == "laplace") {
    laplace_suite(rep, seed, hooks);
  } else if (name == "thinning") {
    thinning_suite(rep, seed, hooks);
  } else if (name == "bvm") {
    bvm_suite(rep, seed);
  } else {
    throw UsageError("unknown validation suite '" + std::string(name) + "'");
  }
  return rep;
}

}  // namespace bnpsurv
