#include "commands.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bnpsurv/betastacy.hpp"
#include "bnpsurv/classical.hpp"
#include "bnpsurv/errors.hpp"
#include "bnpsurv/montecarlo.hpp"
#include "bnpsurv/tails.hpp"
#include "bnpsurv/validation.hpp"

namespace bnpsurv::cli {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

double parse_number(std::string_view s, const char* what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw UsageError(std::string("cannot parse ") + what + " '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::vector<double> parse_grid(std::string_view spec, const SurvivalSample& sample) {
  std::vector<double> grid;
  if (spec == "auto") return default_grid(sample);
  if (spec.find(':') != std::string_view::npos) {
    const auto a = spec.find(':');
    const auto b = spec.find(':', a + 1);
    if (b == std::string_view::npos) throw UsageError("grid spec must be N:lo:hi");
    const double n = parse_number(spec.substr(0, a), "grid size");
    const double lo = parse_number(spec.substr(a + 1, b - a - 1), "grid start");
    const double hi = parse_number(spec.substr(b + 1), "grid end");
    if (!(n >= 2.0) || n != std::floor(n) || !(lo >= 0.0) || !(hi > lo) || std::isinf(hi)) {
      throw UsageError("grid spec N:lo:hi needs integer N >= 2 and 0 <= lo < hi");
    }
    const auto count = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i < count; ++i) {
      grid.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
    return grid;
  }
  std::size_t start = 0;
  while (start <= spec.size()) {
    const auto pos = spec.find(',', start);
    const auto item = spec.substr(start, pos == std::string_view::npos ? pos : pos - start);
    grid.push_back(parse_number(item, "grid point"));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0) || std::isinf(grid[i]) || (i > 0 && !(grid[i] > grid[i - 1]))) {
      throw UsageError("grid points must be finite, non-negative and strictly increasing");
    }
  }
  return grid;
}

namespace {

struct RunConfig {
  std::uint64_t seed = 1;
  std::string output = "-";
  // simulate
  std::string kind = "pareto";
  std::size_t n = 1000;
  double alpha = 1.8;
  double p = 0.5;
  // fit, splice, sample
  std::string input;
  std::string tail = "pareto";
  std::size_t k = 0;  // 0 selects ceil(2 sqrt n)
  bool weighted = false;
  std::string f0 = "km";
  std::string qq;
  std::string fit;
  double q = 1.0;
  std::string an_rule = "log_n";
  double an_value = 1.0;
  bool exact_splice = false;
  double tail_start = 0.0;  // 0 selects the tail default
  std::string grid = "auto";
  // sample
  std::size_t paths = 200;
  double level = 0.95;
  std::string process = "hazard";
  std::string paths_output;
  // validate
  std::string suite = "all";
  bool inject_fault = false;
};

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      stream_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
      if (!*file_) throw DataError("cannot open '" + path + "' for writing");
      stream_ = file_.get();
      path_ = path;
    }
  }
  std::ostream& operator*() { return *stream_; }
  void close() {
    stream_->flush();
    if (!*stream_) throw DataError("write failed for '" + path_ + "'");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
  std::string path_ = "<stdout>";
};

std::string header_line(const std::string& cmd, const std::string& hash, std::uint64_t seed) {
  return "bnpsurv " + cmd + " config_hash=" + hash + " seed=" + std::to_string(seed);
}

TailKind parse_tail(const std::string& s) {
  if (s == "pareto") return TailKind::Pareto;
  if (s == "weibull") return TailKind::Weibull;
  throw UsageError("tail must be pareto or weibull, got '" + s + "'");
}

F0Kind parse_f0(const std::string& s) {
  if (s == "km") return F0Kind::KaplanMeier;
  if (s == "na") return F0Kind::NelsonAalen;
  throw UsageError("f0 must be km or na, got '" + s + "'");
}

AnRule parse_an_rule(const RunConfig& cfg) {
  if (cfg.exact_splice || cfg.an_rule == "infinity") return AnRule::Infinity;
  if (cfg.an_rule == "log_n") return AnRule::LogN;
  if (cfg.an_rule == "const") return AnRule::Const;
  throw UsageError("an-rule must be log_n, const or infinity, got '" + cfg.an_rule + "'");
}

SurvivalSample load_input(const RunConfig& cfg) {
  if (cfg.input.empty()) throw UsageError("--input is required");
  return load_csv(cfg.input);
}

TailFit fit_tail(const SurvivalSample& s, const RunConfig& cfg) {
  const std::size_t k = cfg.k == 0 ? default_k(s.size()) : cfg.k;
  if (k >= s.size()) {
    throw UsageError("k must be smaller than the sample size (k=" + std::to_string(k) +
                     ", n=" + std::to_string(s.size()) + ")");
  }
  if (parse_tail(cfg.tail) == TailKind::Pareto) {
    return cfg.weighted ? hill_weighted(s, k) : hill_censored(s, k);
  }
  return weibull_ls(s, k, survival_estimate(s, parse_f0(cfg.f0)));
}

nlohmann::ordered_json fit_to_json(const TailFit& fit) {
  nlohmann::ordered_json j;
  j["tail"] = fit.kind == TailKind::Pareto ? "pareto" : "weibull";
  j["k"] = fit.k;
  j["threshold"] = fit.threshold;
  j["alpha_hat"] = fit.alpha_hat;
  if (fit.kind == TailKind::Weibull) {
    j["p_hat"] = fit.p_hat;
    j["l_hat"] = fit.l_hat;
    j["weibull_coefficient"] = fit.weibull_coefficient();
    j["dropped"] = fit.dropped;
  }
  return j;
}

TailFit fit_from_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open fit report '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
    TailFit fit;
    fit.kind = parse_tail(j.at("tail").get<std::string>());
    fit.k = j.at("k").get<std::size_t>();
    fit.threshold = j.at("threshold").get<double>();
    fit.alpha_hat = j.at("alpha_hat").get<double>();
    if (fit.kind == TailKind::Weibull) {
      fit.p_hat = j.at("p_hat").get<double>();
      fit.l_hat = j.at("l_hat").get<double>();
    }
    return fit;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed fit report '" + path + "': " + e.what());
  }
}

SplicedModel build_model(const SurvivalSample& s, const RunConfig& cfg) {
  const TailFit fit = cfg.fit.empty() ? fit_tail(s, cfg) : fit_from_json(cfg.fit);
  const AnRule rule = parse_an_rule(cfg);
  const double a_n = resolve_an(rule, s.size(), cfg.an_value);
  std::optional<double> tail_start;
  if (cfg.tail_start > 0.0) tail_start = cfg.tail_start;
  auto prior = make_spliced_prior(fit, cfg.q, fit.threshold, a_n, s.size(), tail_start);
  auto post = posterior_update(prior, s);
  return SplicedModel{fit, fit.threshold, a_n, std::move(prior), std::move(post)};
}

void write_row(std::ostream& os, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) os << ',';
    os << format_double(v);
    first = false;
  }
  os << '\n';
}

int cmd_simulate(const RunConfig& cfg, const std::string& hash, std::ostream& out) {
  if (cfg.n < 1) throw UsageError("n must be at least 1");
  const TailKind kind = parse_tail(cfg.kind);
  const auto sample = kind == TailKind::Pareto ? gen_pareto_sample(cfg.n, cfg.alpha, cfg.seed)
                                               : gen_weibull_sample(cfg.n, cfg.alpha, cfg.p, cfg.seed);
  Output o(cfg.output, out);
  write_csv(sample, *o, header_line("simulate", hash, cfg.seed));
  o.close();
  return kOk;
}

int cmd_fit(const RunConfig& cfg, const std::string& hash, std::ostream& out) {
  const auto sample = load_input(cfg);
  const auto fit = fit_tail(sample, cfg);
  auto j = fit_to_json(fit);
  j["n"] = sample.size();
  j["events"] = sample.event_count();
  j["config_hash"] = hash;
  j["seed"] = cfg.seed;
  {
    Output o(cfg.output, out);
    *o << j.dump(2) << '\n';
    o.close();
  }
  if (!cfg.qq.empty()) {
    const auto qq = qq_data(sample, fit.kind, survival_estimate(sample, parse_f0(cfg.f0)));
    Output o(cfg.qq, out);
    *o << "# " << header_line("fit", hash, cfg.seed) << " skipped=" << qq.skipped << '\n';
    *o << "x,y\n";
    for (std::size_t i = 0; i < qq.x.size(); ++i) write_row(*o, {qq.x[i], qq.y[i]});
    o.close();
  }
  return kOk;
}

int cmd_splice(const RunConfig& cfg, const std::string& hash, std::ostream& out) {
  const auto sample = load_input(cfg);
  const auto model = build_model(sample, cfg);
  const auto grid = parse_grid(cfg.grid, sample);
  const auto km = kaplan_meier(sample);
  const auto na = nelson_aalen(sample);
  Output o(cfg.output, out);
  *o << "# " << header_line("splice", hash, cfg.seed) << " t0=" << format_double(model.t0)
     << " a_n=" << format_double(model.a_n) << '\n';
  *o << "t,posterior_mean,posterior_variance,spliced_survival,kaplan_meier,nelson_aalen,"
        "prior_cumulative\n";
  for (double t : grid) {
    write_row(*o, {t, posterior_mean(model.posterior, t), posterior_variance(model.posterior, t),
                   spliced_survival(model.posterior, t), km(t), na(t),
                   eval_cumulative(model.prior.baseline, t)});
  }
  o.close();
  return kOk;
}

ProcessKind parse_process(const std::string& s) {
  if (s == "hazard") return ProcessKind::Hazard;
  if (s == "logsurv") return ProcessKind::LogSurvival;
  if (s == "survival") return ProcessKind::Survival;
  throw UsageError("process must be hazard, logsurv or survival, got '" + s + "'");
}

int cmd_sample(const RunConfig& cfg, const std::string& hash, std::ostream& out) {
  if (cfg.paths < 1) throw UsageError("--paths must be at least 1");
  if (!(cfg.level >= 0.0 && cfg.level < 1.0)) throw UsageError("--level must lie in [0, 1)");
  const auto sample = load_input(cfg);
  const auto model = build_model(sample, cfg);
  const auto grid = parse_grid(cfg.grid, sample);
  const auto e = ensemble(model.posterior, grid, cfg.paths, parse_process(cfg.process), cfg.seed);
  const auto mean = ensemble_mean(e);
  const auto sd = ensemble_sd(e);
  const bool with_band = e.n_paths >= 20;
  CredibleBand band;
  if (with_band) band = credible_band(e, cfg.level);
  {
    Output o(cfg.output, out);
    *o << "# " << header_line("sample", hash, cfg.seed) << " paths=" << cfg.paths
       << " process=" << cfg.process << '\n';
    *o << (with_band ? "t,mean,sd,lower,upper\n" : "t,mean,sd\n");
    for (std::size_t j = 0; j < grid.size(); ++j) {
      if (with_band) {
        write_row(*o, {grid[j], mean[j], sd[j], band.lower[j], band.upper[j]});
      } else {
        write_row(*o, {grid[j], mean[j], sd[j]});
      }
    }
    o.close();
  }
  if (!cfg.paths_output.empty()) {
    Output o(cfg.paths_output, out);
    *o << "# " << header_line("sample", hash, cfg.seed) << '\n';
    *o << 't';
    for (std::size_t i = 0; i < e.n_paths; ++i) *o << ",path" << i;
    *o << '\n';
    for (std::size_t j = 0; j < grid.size(); ++j) {
      *o << format_double(grid[j]);
      for (std::size_t i = 0; i < e.n_paths; ++i) *o << ',' << format_double(e.at(i, j));
      *o << '\n';
    }
    o.close();
  }
  return kOk;
}

int cmd_validate(const RunConfig& cfg, const std::string& hash, std::ostream& out) {
  std::vector<std::string> suites;
  if (cfg.suite == "all") {
    suites = suite_names();
  } else {
    suites.push_back(cfg.suite);
  }
  const SamplerHooks hooks = cfg.inject_fault ? faulty_hooks() : SamplerHooks{};
  bool all_ok = true;
  Output o(cfg.output, out);
  *o << "# " << header_line("validate", hash, cfg.seed) << (cfg.inject_fault ? " fault=1" : "")
     << '\n';
  for (const auto& name : suites) {
    const auto rep = run_suite(name, cfg.seed, hooks);
    for (const auto& c : rep.checks) {
      *o << (c.passed ? "PASS" : "FAIL") << ' ' << rep.suite << ": " << c.name << " -- "
         << c.detail << '\n';
    }
    *o << "suite " << rep.suite << ": " << (rep.passed() ? "PASS" : "FAIL") << '\n';
    all_ok = all_ok && rep.passed();
  }
  o.close();
  return all_ok ? kOk : kNumeric;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Bayesian non-parametric survival estimation with spliced Beta-Stacy priors",
               "bnpsurv"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a config file");
  std::string save_config;
  app.add_option("--save-config", save_config, "Write the effective configuration to a file");

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", cfg.seed, "Random seed");
    sub->add_option("--output,-o", cfg.output, "Output file ('-' for stdout)");
  };
  auto add_model = [&](CLI::App* sub) {
    sub->add_option("--input,-i", cfg.input, "Input CSV with time,event columns")->required();
    sub->add_option("--tail", cfg.tail, "Tail model: pareto or weibull");
    sub->add_option("--k", cfg.k, "Number of upper order statistics (0: ceil(2 sqrt n))");
    sub->add_flag("--weighted", cfg.weighted, "Use the weighted censored Hill estimator");
    sub->add_option("--f0", cfg.f0, "Survival estimate for the Weibull QQ plot: km or na");
  };
  auto add_prior = [&](CLI::App* sub) {
    sub->add_option("--fit", cfg.fit, "Tail-fit JSON report (fits on the fly when absent)");
    sub->add_option("--q", cfg.q, "Constant baseline hazard below the threshold");
    sub->add_option("--an-rule", cfg.an_rule, "a_n rule: log_n, const or infinity");
    sub->add_option("--an-value", cfg.an_value, "a_n for --an-rule const");
    sub->add_flag("--exact-splice", cfg.exact_splice, "Exact splicing (a_n = infinity)");
    sub->add_option("--tail-start", cfg.tail_start,
                    "Start of the tail density (0: threshold for pareto, 1 for weibull)");
    sub->add_option("--grid", cfg.grid, "Grid: auto, N:lo:hi or a comma-separated list");
  };

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic censored sample");
  add_common(simulate);
  simulate->add_option("--kind", cfg.kind, "Protocol: pareto or weibull");
  simulate->add_option("--n", cfg.n, "Sample size");
  simulate->add_option("--alpha", cfg.alpha, "Tail parameter alpha");
  simulate->add_option("--p", cfg.p, "Weibull shape p");

  auto* fit = app.add_subcommand("fit", "Fit the tail and write a JSON report");
  add_common(fit);
  add_model(fit);
  fit->add_option("--qq", cfg.qq, "Also write QQ-plot coordinates to this CSV");

  auto* splice = app.add_subcommand("splice", "Closed-form spliced estimators on a grid");
  add_common(splice);
  add_model(splice);
  add_prior(splice);

  auto* sample = app.add_subcommand("sample", "Sample posterior paths and credible bands");
  add_common(sample);
  add_model(sample);
  add_prior(sample);
  sample->add_option("--paths", cfg.paths, "Number of sampled paths");
  sample->add_option("--level", cfg.level, "Credible level of the pointwise band");
  sample->add_option("--process", cfg.process, "hazard, logsurv or survival");
  sample->add_option("--paths-output", cfg.paths_output, "Also write raw paths to this CSV");

  auto* validate = app.add_subcommand("validate", "Run the sampler validation suites");
  add_common(validate);
  validate->add_option("--suite", cfg.suite, "moments, laplace, thinning, bvm or all");
  validate->add_flag("--inject-fault", cfg.inject_fault, "Use a deliberately biased sampler");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  CLI::App* active = app.get_subcommands().front();
  const std::string cmd = active->get_name();
  const std::string config_text = "[" + cmd + "]\n" + active->config_to_str(true, false);
  // output destinations do not affect results and stay out of the hash
  std::string hashed;
  {
    std::istringstream lines(config_text);
    for (std::string line; std::getline(lines, line);) {
      if (line.rfind("output=", 0) == 0 || line.rfind("paths-output=", 0) == 0 ||
          line.rfind("qq=", 0) == 0) {
        continue;
      }
      hashed += line + '\n';
    }
  }
  char hash_buf[17];
  std::snprintf(hash_buf, sizeof hash_buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(hashed)));
  const std::string hash(hash_buf);

  try {
    if (!save_config.empty()) {
      std::ofstream cf(save_config, std::ios::binary | std::ios::trunc);
      if (!cf) throw DataError("cannot open '" + save_config + "' for writing");
      cf << config_text;
      if (!cf) throw DataError("write failed for '" + save_config + "'");
    }
    if (cmd == "simulate") return cmd_simulate(cfg, hash, out);
    if (cmd == "fit") return cmd_fit(cfg, hash, out);
    if (cmd == "splice") return cmd_splice(cfg, hash, out);
    if (cmd == "sample") return cmd_sample(cfg, hash, out);
    return cmd_validate(cfg, hash, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumeric;
  }
}

}  // namespace bnpsurv::cli
