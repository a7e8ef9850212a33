#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bnpsurv/stepfun.hpp"

namespace bnpsurv {

struct Observation {
  double time;  // observed min(X, C), strictly positive
  bool event;   // true when X <= C
};

/// Distinct observation times with their event/censoring counts and the
/// number at risk Y(t) = #{T_i >= t}.
struct EventTable {
  std::vector<double> times;
  std::vector<double> events;
  std::vector<double> censored;
  std::vector<double> at_risk;
};

/// Right-censored sample. Records keep input order; order statistics are
/// sorted ascending with events placed before censorings at tied times, and
/// concomitants follow the same permutation.
class SurvivalSample {
 public:
  SurvivalSample() = default;
  explicit SurvivalSample(std::vector<Observation> records);

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  std::span<const Observation> records() const { return records_; }

  /// T_{1,n} <= ... <= T_{n,n}.
  std::span<const double> order_statistics() const { return sorted_times_; }
  /// delta_{[j,n]} paired with T_{j,n}.
  std::span<const unsigned char> concomitants() const { return sorted_events_; }
  /// T_{j,n} with j 1-based.
  double order_statistic(std::size_t j) const;
  bool concomitant(std::size_t j) const;

  std::size_t event_count() const { return event_count_; }
  double max_time() const;
  const EventTable& event_table() const { return table_; }

  /// Pools two samples, records of `other` appended after this one.
  SurvivalSample pooled_with(const SurvivalSample& other) const;

 private:
  std::vector<Observation> records_;
  std::vector<double> sorted_times_;
  std::vector<unsigned char> sorted_events_;
  std::size_t event_count_ = 0;
  EventTable table_;
};

/// Reads a comma-separated file with a header row. Lines starting with '#'
/// are skipped. Times must be positive reals, events 0 or 1.
SurvivalSample load_csv(const std::string& path, const std::string& time_column = "time",
                        const std::string& event_column = "event");
SurvivalSample read_csv(std::istream& in, const std::string& time_column = "time",
                        const std::string& event_column = "event");
/// Writes `time,event` rows; `comment` (if non-empty) becomes a leading
/// '# ' line.
void write_csv(const SurvivalSample& sample, std::ostream& out, const std::string& comment = {});

/// N(t) = #{T_i <= t, event} and the at-risk count. `risk` holds the
/// right-continuous modification R(t) = #{T_i > t}; Y(t) = R(t-).
struct CountingProcesses {
  StepFunction events;
  StepFunction risk;

  double at_risk(double t) const { return risk.left_limit(t); }
};
CountingProcesses counting_processes(const SurvivalSample& s);

/// Pareto-type protocol: X - U with X ~ Pareto(alpha, 1), U ~ U(0, 1),
/// censored by 1.4 X' - U' with X' ~ Pareto(0.7 alpha, 1).
SurvivalSample gen_pareto_sample(std::size_t n, double alpha, std::uint64_t seed);

/// Weibull-type protocol: X = (E/alpha)^{1/(p + max(1 - E/alpha, 0))} with E
/// standard exponential, censored as in the Pareto protocol.
SurvivalSample gen_weibull_sample(std::size_t n, double alpha, double p, std::uint64_t seed);

/// Maps a standard exponential draw to the Weibull-protocol variable.
double weibull_protocol_transform(double e, double alpha, double p);

/// P(X - U > t) for the uncensored Pareto-protocol law.
double pareto_protocol_survival(double t, double alpha);
/// P(X > t) for the uncensored Weibull-protocol law (exp(-alpha t^p) for t >= 1).
double weibull_protocol_survival(double t, double alpha, double p);

}  // namespace bnpsurv
