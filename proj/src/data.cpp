#include "bnpsurv/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string_view>

#include "bnpsurv/errors.hpp"
#include "bnpsurv/random.hpp"

namespace bnpsurv {

SurvivalSample::SurvivalSample(std::vector<Observation> records) : records_(std::move(records)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const double t = records_[i].time;
    if (!(t > 0.0) || std::isinf(t)) {
      std::ostringstream msg;
      msg << "record " << i + 1 << ": time must be positive and finite, got " << t;
      throw DataError(msg.str());
    }
  }
  std::vector<std::size_t> order(records_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) {
    const auto& ra = records_[a];
    const auto& rb = records_[b];
    if (ra.time != rb.time) return ra.time < rb.time;
    return ra.event && !rb.event;
  });
  sorted_times_.reserve(order.size());
  sorted_events_.reserve(order.size());
  for (std::size_t i : order) {
    sorted_times_.push_back(records_[i].time);
    sorted_events_.push_back(records_[i].event ? 1 : 0);
    event_count_ += records_[i].event ? 1 : 0;
  }

  const double n = static_cast<double>(sorted_times_.size());
  double before = 0.0;
  for (std::size_t j = 0; j < sorted_times_.size();) {
    const double t = sorted_times_[j];
    double d = 0.0;
    double c = 0.0;
    for (; j < sorted_times_.size() && sorted_times_[j] == t; ++j) {
      (sorted_events_[j] ? d : c) += 1.0;
    }
    table_.times.push_back(t);
    table_.events.push_back(d);
    table_.censored.push_back(c);
    table_.at_risk.push_back(n - before);
    before += d + c;
  }
}

double SurvivalSample::order_statistic(std::size_t j) const {
  if (j < 1 || j > sorted_times_.size()) throw UsageError("order_statistic: index out of range");
  return sorted_times_[j - 1];
}

bool SurvivalSample::concomitant(std::size_t j) const {
  if (j < 1 || j > sorted_events_.size()) throw UsageError("concomitant: index out of range");
  return sorted_events_[j - 1] != 0;
}

double SurvivalSample::max_time() const {
  if (sorted_times_.empty()) throw UsageError("max_time: empty sample");
  return sorted_times_.back();
}

SurvivalSample SurvivalSample::pooled_with(const SurvivalSample& other) const {
  std::vector<Observation> all(records_.begin(), records_.end());
  all.insert(all.end(), other.records_.begin(), other.records_.end());
  return SurvivalSample(std::move(all));
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void fail_row(std::size_t row, std::size_t line, const std::string& what) {
  std::ostringstream msg;
  msg << "row " << row << " (line " << line << "): " << what;
  throw DataError(msg.str());
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

SurvivalSample read_csv(std::istream& in, const std::string& time_column,
                        const std::string& event_column) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t time_idx = 0;
  std::size_t event_idx = 0;
  bool have_header = false;
  std::size_t row = 0;
  std::vector<Observation> records;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto fields = split(view);
    if (!have_header) {
      auto find = [&](const std::string& name) {
        auto it = std::find(fields.begin(), fields.end(), std::string_view(name));
        if (it == fields.end()) throw DataError("unknown column '" + name + "' in header");
        return static_cast<std::size_t>(it - fields.begin());
      };
      time_idx = find(time_column);
      event_idx = find(event_column);
      have_header = true;
      continue;
    }
    ++row;
    if (fields.size() <= std::max(time_idx, event_idx)) fail_row(row, line_no, "too few fields");
    const auto tf = fields[time_idx];
    double t = 0.0;
    auto [ptr, ec] = std::from_chars(tf.data(), tf.data() + tf.size(), t);
    if (ec != std::errc() || ptr != tf.data() + tf.size()) {
      fail_row(row, line_no, "cannot parse time '" + std::string(tf) + "'");
    }
    if (!(t > 0.0) || std::isinf(t)) {
      fail_row(row, line_no, "time must be positive and finite, got " + std::string(tf));
    }
    const auto ef = fields[event_idx];
    bool event = false;
    if (ef == "1") {
      event = true;
    } else if (ef != "0") {
      fail_row(row, line_no, "event indicator must be 0 or 1, got '" + std::string(ef) + "'");
    }
    records.push_back({t, event});
  }
  if (!have_header) throw DataError("missing header row");
  return SurvivalSample(std::move(records));
}

SurvivalSample load_csv(const std::string& path, const std::string& time_column,
                        const std::string& event_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_csv(in, time_column, event_column);
}

void write_csv(const SurvivalSample& sample, std::ostream& out, const std::string& comment) {
  if (!comment.empty()) out << "# " << comment << '\n';
  out << "time,event\n";
  for (const auto& r : sample.records()) out << format_double(r.time) << ',' << (r.event ? 1 : 0) << '\n';
}

CountingProcesses counting_processes(const SurvivalSample& s) {
  if (s.empty()) throw UsageError("counting_processes: empty sample");
  const auto& tab = s.event_table();
  std::vector<double> removed(tab.times.size());
  for (std::size_t i = 0; i < removed.size(); ++i) removed[i] = -(tab.events[i] + tab.censored[i]);
  return {StepFunction::from_jumps(tab.times, tab.events),
          StepFunction::from_jumps(tab.times, removed, static_cast<double>(s.size()))};
}

namespace {

double pareto_draw(double alpha, RngStream& rng) { return std::pow(rng.uniform(), -1.0 / alpha); }

double protocol_censoring(double alpha, RngStream& rng) {
  const double x = pareto_draw(0.7 * alpha, rng);
  return 1.4 * x - rng.uniform();
}

void check_generator_args(std::size_t n, double alpha) {
  if (n < 1) throw UsageError("generator: n must be at least 1");
  if (!(alpha > 0.0) || std::isinf(alpha)) throw UsageError("generator: alpha must be positive");
}

}  // namespace

SurvivalSample gen_pareto_sample(std::size_t n, double alpha, std::uint64_t seed) {
  check_generator_args(n, alpha);
  RngStream rng(seed, 0);
  std::vector<Observation> out;
  out.reserve(n);
  // X >= 1 so X - U > 0, and 1.4 X' - U' >= 0.4: no clamping needed.
  for (std::size_t i = 0; i < n; ++i) {
    const double x = pareto_draw(alpha, rng) - rng.uniform();
    const double c = protocol_censoring(alpha, rng);
    out.push_back({std::min(x, c), x <= c});
  }
  return SurvivalSample(std::move(out));
}

double weibull_protocol_transform(double e, double alpha, double p) {
  const double r = e / alpha;
  return std::pow(r, 1.0 / (p + std::max(1.0 - r, 0.0)));
}

SurvivalSample gen_weibull_sample(std::size_t n, double alpha, double p, std::uint64_t seed) {
  check_generator_args(n, alpha);
  if (!(p > 0.0) || std::isinf(p)) throw UsageError("generator: p must be positive");
  RngStream rng(seed, 0);
  std::vector<Observation> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = weibull_protocol_transform(rng.exponential(), alpha, p);
    const double c = protocol_censoring(alpha, rng);
    out.push_back({std::min(x, c), x <= c});
  }
  return SurvivalSample(std::move(out));
}

double pareto_protocol_survival(double t, double alpha) {
  if (t <= 0.0) return 1.0;
  // integral over u in (0,1) of P(X > t + u) = min(1, (t + u)^-alpha)
  auto tail = [alpha](double lo, double hi) {
    if (alpha == 1.0) return std::log(hi / lo);
    return (std::pow(lo, 1.0 - alpha) - std::pow(hi, 1.0 - alpha)) / (alpha - 1.0);
  };
  if (t >= 1.0) return tail(t, t + 1.0);
  return (1.0 - t) + tail(1.0, 1.0 + t);
}

double weibull_protocol_survival(double t, double alpha, double p) {
  if (t <= 0.0) return 1.0;
  if (t >= 1.0) return std::exp(-alpha * std::pow(t, p));
  // below 1 the transform is increasing in r = E/alpha on (0, 1)
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (weibull_protocol_transform(mid * alpha, alpha, p) < t ? lo : hi) = mid;
  }
  return std::exp(-alpha * 0.5 * (lo + hi));
}

}  // namespace bnpsurv
