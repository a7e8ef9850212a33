#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bnpsurv/betastacy.hpp"
#include "bnpsurv/random.hpp"
#include "bnpsurv/sampler.hpp"

namespace bnpsurv {

/// Sampler entry points exercised by the validation suites. Replacing one
/// of them (for instance with a deliberately biased version) lets the suites
/// act as a negative control.
struct SamplerHooks {
  std::function<PathSample(const BetaStacyPosterior&, std::span<const double>, RngStream&)>
      h_path = [](const BetaStacyPosterior& p, std::span<const double> g, RngStream& r) {
        return sample_H_path(p, g, r);
      };
  std::function<double(double, double, RngStream&)> truncated_gamma =
      [](double t, double mu, RngStream& r) { return sample_truncated_gamma(t, mu, r); };
  std::function<double(double, double)> e_ratio = [](double x, double b) {
    return e_acceptance_ratio(x, b);
  };
};

/// Hooks whose hazard paths and truncated-gamma draws are inflated by 5%.
SamplerHooks faulty_hooks();

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckResult> checks;
  bool passed() const;
};

/// Names accepted by run_suite.
std::vector<std::string> suite_names();

/// Runs one of: moments, laplace, thinning, bvm.
SuiteReport run_suite(std::string_view name, std::uint64_t seed,
                      const SamplerHooks& hooks = SamplerHooks{});

}  // namespace bnpsurv
