#include <doctest.h>

#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <vector>

#include "bnpsurv/data.hpp"
#include "bnpsurv/errors.hpp"
#include "bnpsurv/tails.hpp"

using namespace bnpsurv;

namespace {

const double e1 = std::exp(1.0);

SurvivalSample powers_of_e(bool last_event) {
  return SurvivalSample({{1.0, true}, {e1, true}, {e1 * e1, true}, {e1 * e1 * e1, last_event}});
}

// Direct evaluation of the weighted Hill formula, products written out.
double weighted_hill_brute(const SurvivalSample& s, std::size_t k) {
  const std::size_t n = s.size();
  auto delta = [&](std::size_t j) { return s.concomitant(n - j + 1) ? 1.0 : 0.0; };
  double num = 0.0, den = 0.0;
  for (std::size_t j = 1; j <= k; ++j) {
    double w = delta(j) / static_cast<double>(j);
    for (std::size_t l = j + 1; l <= k; ++l) {
      w *= std::pow((static_cast<double>(l) - 1.0) / static_cast<double>(l), delta(l));
    }
    num += w;
    den += w * std::log(s.order_statistic(n - j + 1) / s.order_statistic(n - k));
  }
  return num / den;
}

double ss_w(const std::vector<double>& x, const std::vector<double>& y, double p, double l) {
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - p * (x[i] - std::log(l));
    ss += r * r;
  }
  return ss;
}

}  // namespace

TEST_CASE("default k") {
  CHECK(default_k(1000) == 64);
  CHECK(default_k(100) == 20);
  CHECK(default_k(101) == 21);
  CHECK(default_k(100000) == 633);
  CHECK(default_k(1) == 2);
}

TEST_CASE("censored Hill hand values") {
  auto fit = hill_censored(powers_of_e(true), 3);
  CHECK(fit.alpha_hat == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(fit.threshold == 1.0);
  CHECK(fit.k == 3);
  CHECK(fit.kind == TailKind::Pareto);
  CHECK(hill_censored(powers_of_e(false), 3).alpha_hat == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK_THROWS_AS(hill_censored(powers_of_e(true), 0), UsageError);
  CHECK_THROWS_AS(hill_censored(powers_of_e(true), 4), UsageError);
  SurvivalSample tied({{1.0, true}, {2.0, true}, {2.0, true}, {2.0, true}});
  CHECK_THROWS_AS(hill_censored(tied, 2), NumericError);
  SurvivalSample cens({{1.0, true}, {2.0, true}, {3.0, false}, {4.0, false}});
  CHECK_THROWS_AS(hill_censored(cens, 2), NumericError);
}

TEST_CASE("weighted Hill") {
  auto s = powers_of_e(false);
  CHECK(hill_weighted(s, 3).alpha_hat == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(hill_weighted(s, 3).alpha_hat == doctest::Approx(weighted_hill_brute(s, 3)).epsilon(1e-14));
  SurvivalSample top({{1.0, true}, {2.0, true}, {5.0, true}});
  CHECK(hill_weighted(top, 1).alpha_hat == doctest::Approx(1.0 / std::log(2.5)).epsilon(1e-14));
  SurvivalSample cens({{1.0, true}, {2.0, true}, {3.0, false}, {4.0, false}});
  CHECK_THROWS_AS(hill_weighted(cens, 2), NumericError);

  auto cs = gen_pareto_sample(400, 1.8, 31);
  for (std::size_t k : {5, 20, 40}) {
    CHECK(hill_weighted(cs, k).alpha_hat == doctest::Approx(weighted_hill_brute(cs, k)).epsilon(1e-12));
  }
}

TEST_CASE("weighted and censored Hill agree on uncensored data") {
  auto raw = gen_pareto_sample(300, 1.5, 8);
  std::vector<Observation> rec;
  for (const auto& r : raw.records()) rec.push_back({r.time, true});
  SurvivalSample s(rec);
  for (std::size_t k = 1; k < 300; k += 7) {
    const double a = hill_censored(s, k).alpha_hat;
    const double b = hill_weighted(s, k).alpha_hat;
    CHECK(std::fabs(a - b) <= 1e-12 * a);
  }
}

TEST_CASE("censored Hill is scale invariant") {
  auto s = gen_pareto_sample(500, 1.8, 2);
  std::vector<Observation> scaled;
  for (const auto& r : s.records()) scaled.push_back({r.time * 3.7, r.event});
  const double a = hill_censored(s, 44).alpha_hat;
  const double b = hill_censored(SurvivalSample(scaled), 44).alpha_hat;
  CHECK(b == doctest::Approx(a).epsilon(1e-12));
}

TEST_CASE("weibull least squares on exact lines") {
  std::vector<double> x{0.0, 0.5, 1.0, 2.0};
  std::vector<double> y;
  for (double v : x) y.push_back(-0.3 + 1.7 * v);
  auto line = weibull_ls_points(x, y);
  CHECK(line.p == doctest::Approx(1.7).epsilon(1e-14));
  CHECK(std::log(line.l) * -line.p == doctest::Approx(-0.3).epsilon(1e-13));
  CHECK_THROWS_AS(weibull_ls_points({1.0, 1.0}, {0.0, 1.0}), NumericError);
  CHECK_THROWS_AS(weibull_ls_points({0.0, 1.0}, {2.0, 2.0}), NumericError);
  CHECK_THROWS_AS(weibull_ls_points({0.0}, {2.0}), NumericError);
}

TEST_CASE("closed-form scale equals the direct minimizer of the squared error") {
  auto s = gen_weibull_sample(1000, 2.0, 0.5, 17);
  const std::size_t k = 64;
  auto fit = weibull_ls(s, k);
  const auto surv = survival_estimate(s);
  std::vector<double> x, y;
  for (std::size_t j = 1; j <= k; ++j) {
    const double t = s.order_statistic(s.size() - j + 1);
    const double sv = surv(t);
    if (!(sv > 0.0 && sv < 1.0)) continue;
    x.push_back(std::log(t / fit.threshold));
    y.push_back(std::log(-std::log(sv)));
  }
  // nested one-dimensional minimization: profile log l out for each p
  auto best_logl = [&](double pp) {
    return boost::math::tools::brent_find_minima(
               [&](double ll) { return ss_w(x, y, pp, std::exp(ll)); }, -30.0, 30.0, 52)
        .first;
  };
  const double p = boost::math::tools::brent_find_minima(
                       [&](double pp) { return ss_w(x, y, pp, std::exp(best_logl(pp))); }, 1e-3, 20.0,
                       52)
                       .first;
  const double logl = best_logl(p);
  CHECK(p == doctest::Approx(fit.p_hat).epsilon(1e-6));
  CHECK(logl == doctest::Approx(std::log(fit.l_hat)).epsilon(1e-6));
  CHECK(fit.alpha_hat == doctest::Approx(fit.p_hat * std::pow(fit.l_hat, -fit.p_hat)));
  CHECK(fit.weibull_coefficient() == doctest::Approx(std::pow(fit.l_hat, -fit.p_hat)));
}

TEST_CASE("weibull fit recovers the law from noise-free quantile points above one") {
  const double alpha = 2.0, p = 0.5;
  const std::size_t n = 100000;
  std::vector<Observation> rec;
  for (std::size_t i = 1; i <= n; ++i) {
    const double u = (static_cast<double>(i) - 0.5) / static_cast<double>(n);
    rec.push_back({std::pow(-std::log1p(-u) / alpha, 1.0 / p), true});
  }
  SurvivalSample s(rec);
  std::size_t above = 0;
  for (double t : s.order_statistics()) above += t >= 1.0 ? 1 : 0;
  const std::size_t k = above - 1;
  auto exact = [&](double t) { return std::exp(-alpha * std::pow(t, p)); };
  auto fit = weibull_ls(s, k, exact);
  CHECK(fit.dropped == 0);
  CHECK(std::fabs(fit.p_hat - p) < 0.05 * p);
  // l is in units of the threshold: the raw-time cumulative coefficient is (l T0)^{-p}
  const double raw_alpha = std::pow(fit.l_hat * fit.threshold, -fit.p_hat);
  CHECK(std::fabs(raw_alpha - alpha) < 0.05 * alpha);
}

TEST_CASE("weibull fit drops points where the survival estimate is 0 or 1") {
  SurvivalSample s({{1.0, true}, {2.0, true}, {3.0, true}, {4.0, true}, {5.0, true}});
  auto fit = weibull_ls(s, 4);
  CHECK(fit.dropped == 1);
  CHECK(fit.p_hat > 0.0);
  CHECK(fit.kind == TailKind::Weibull);
  auto na = weibull_ls(s, 4, survival_estimate(s, F0Kind::NelsonAalen));
  CHECK(na.dropped == 0);
}

TEST_CASE("QQ coordinates") {
  auto s = gen_pareto_sample(200, 1.8, 4);
  auto par = qq_data(s, TailKind::Pareto, [](double t) { return std::pow(t, -1.8); });
  REQUIRE(par.x.size() >= 2);
  for (std::size_t i = 1; i < par.x.size(); ++i) {
    if (par.x[i] == par.x[0]) continue;
    CHECK((par.y[i] - par.y[0]) / (par.x[i] - par.x[0]) == doctest::Approx(1.8).epsilon(1e-10));
  }
  auto wei = qq_data(s, TailKind::Weibull, [](double t) { return std::exp(-2.0 * std::pow(t, 0.5)); });
  for (std::size_t i = 1; i < wei.x.size(); ++i) {
    CHECK((wei.y[i] - wei.y[0]) / (wei.x[i] - wei.x[0]) == doctest::Approx(0.5).epsilon(1e-10));
  }
  SurvivalSample three({{1.0, true}, {2.0, false}, {3.0, true}});
  auto km = qq_data(three, TailKind::Pareto, survival_estimate(three));
  CHECK(km.x.size() == 2);
  CHECK(km.skipped == 1);
  CHECK(km.y[0] == doctest::Approx(std::log(1.5)));
}
