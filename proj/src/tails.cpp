#include "bnpsurv/tails.hpp"

#include <cmath>
#include <string>

#include "bnpsurv/classical.hpp"
#include "bnpsurv/errors.hpp"

namespace bnpsurv {

double TailFit::weibull_coefficient() const { return std::pow(l_hat, -p_hat); }

SurvivalFn survival_estimate(const SurvivalSample& s, F0Kind kind) {
  if (kind == F0Kind::KaplanMeier) {
    return [km = kaplan_meier(s)](double t) { return km(t); };
  }
  return [na = nelson_aalen(s)](double t) { return std::exp(-na(t)); };
}

std::size_t default_k(std::size_t n) {
  auto k = static_cast<std::size_t>(std::ceil(2.0 * std::sqrt(static_cast<double>(n))));
  while (k > 0 && (k - 1) * (k - 1) >= 4 * n) --k;
  while (k * k < 4 * n) ++k;
  return k;
}

namespace {

void check_k(const SurvivalSample& s, std::size_t k) {
  if (k < 1 || k >= s.size()) {
    throw UsageError("tail fit: k must satisfy 1 <= k < n (k=" + std::to_string(k) +
                     ", n=" + std::to_string(s.size()) + ")");
  }
}

// log(T_{n-j+1,n} / T_{n-k,n})
double log_spacing(const SurvivalSample& s, std::size_t j, std::size_t k) {
  const std::size_t n = s.size();
  return std::log(s.order_statistic(n - j + 1) / s.order_statistic(n - k));
}

TailFit pareto_fit(const SurvivalSample& s, std::size_t k, double num, double den) {
  if (num == 0.0) throw NumericError("tail fit: no events among the top k observations");
  if (den == 0.0) throw NumericError("tail fit: top k observations tied with the threshold");
  TailFit fit;
  fit.kind = TailKind::Pareto;
  fit.alpha_hat = num / den;
  fit.k = k;
  fit.threshold = s.order_statistic(s.size() - k);
  return fit;
}

}  // namespace

TailFit hill_censored(const SurvivalSample& s, std::size_t k) {
  check_k(s, k);
  const std::size_t n = s.size();
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 1; j <= k; ++j) {
    num += s.concomitant(n - j + 1) ? 1.0 : 0.0;
    den += log_spacing(s, j, k);
  }
  return pareto_fit(s, k, num, den);
}

TailFit hill_weighted(const SurvivalSample& s, std::size_t k) {
  check_k(s, k);
  const std::size_t n = s.size();
  double num = 0.0;
  double den = 0.0;
  double prod = 1.0;  // prod_{l=j+1}^{k} ((l-1)/l)^{delta_l}
  for (std::size_t j = k; j >= 1; --j) {
    const bool dj = s.concomitant(n - j + 1);
    const double w = dj ? prod / static_cast<double>(j) : 0.0;
    num += w;
    den += w * log_spacing(s, j, k);
    if (dj) prod *= static_cast<double>(j - 1) / static_cast<double>(j);
  }
  if (num == 0.0) throw NumericError("weighted Hill: all weights are zero");
  return pareto_fit(s, k, num, den);
}

LsLine weibull_ls_points(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t m = x.size();
  if (m < 2 || y.size() != m) throw NumericError("Weibull fit: fewer than two usable points");
  double xbar = 0.0;
  double ybar = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    xbar += x[i];
    ybar += y[i];
  }
  xbar /= static_cast<double>(m);
  ybar /= static_cast<double>(m);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - xbar) * (x[i] - xbar);
    sxy += (x[i] - xbar) * (y[i] - ybar);
  }
  if (sxx == 0.0) throw NumericError("Weibull fit: degenerate regression, var(x) = 0");
  if (sxy == 0.0) throw NumericError("Weibull fit: degenerate regression, cov(x, y) = 0");
  const double p = sxy / sxx;
  return {p, std::exp(xbar - ybar / p)};
}

TailFit weibull_ls(const SurvivalSample& s, std::size_t k, const SurvivalFn& survival) {
  check_k(s, k);
  const std::size_t n = s.size();
  const double threshold = s.order_statistic(n - k);
  std::vector<double> x;
  std::vector<double> y;
  std::size_t dropped = 0;
  for (std::size_t j = 1; j <= k; ++j) {
    const double t = s.order_statistic(n - j + 1);
    const double sv = survival(t);
    if (!(sv > 0.0 && sv < 1.0)) {
      ++dropped;
      continue;
    }
    x.push_back(std::log(t / threshold));
    y.push_back(std::log(-std::log(sv)));
  }
  const auto line = weibull_ls_points(x, y);
  if (!(line.p > 0.0)) throw NumericError("Weibull fit: non-positive slope");
  TailFit fit;
  fit.kind = TailKind::Weibull;
  fit.p_hat = line.p;
  fit.l_hat = line.l;
  fit.alpha_hat = line.p * std::pow(line.l, -line.p);
  fit.k = k;
  fit.threshold = threshold;
  fit.dropped = dropped;
  return fit;
}

TailFit weibull_ls(const SurvivalSample& s, std::size_t k) {
  return weibull_ls(s, k, survival_estimate(s));
}

QQData qq_data(const SurvivalSample& s, TailKind kind, const SurvivalFn& survival) {
  QQData out;
  for (double t : s.event_table().times) {
    const double sv = survival(t);
    if (!(sv > 0.0 && sv < 1.0)) {
      ++out.skipped;
      continue;
    }
    out.x.push_back(std::log(t));
    const double h = -std::log(sv);
    out.y.push_back(kind == TailKind::Pareto ? h : std::log(h));
  }
  return out;
}

}  // namespace bnpsurv
