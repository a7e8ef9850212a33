#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <vector>

#include "bnpsurv/betastacy.hpp"
#include "bnpsurv/classical.hpp"
#include "bnpsurv/data.hpp"
#include "bnpsurv/errors.hpp"
#include "bnpsurv/montecarlo.hpp"
#include "bnpsurv/sampler.hpp"
#include "bnpsurv/tails.hpp"
#include "bnpsurv/validation.hpp"

namespace py = pybind11;
using namespace bnpsurv;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw UsageError("expected a 1-d array");
  return std::vector<double>(a.data(), a.data() + a.size());
}

py::array_t<double> to_array(const std::vector<double>& v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

template <class Fn>
py::array_t<double> vectorize(const Array& ts, Fn&& fn) {
  const auto grid = to_vector(ts);
  std::vector<double> out;
  out.reserve(grid.size());
  for (double t : grid) out.push_back(fn(t));
  return to_array(out);
}

SurvivalSample make_sample(const Array& times, const py::array_t<bool>& events) {
  const auto t = to_vector(times);
  auto e = events.unchecked<1>();
  if (static_cast<std::size_t>(e.shape(0)) != t.size()) {
    throw UsageError("times and events must have the same length");
  }
  std::vector<Observation> recs;
  for (std::size_t i = 0; i < t.size(); ++i) recs.push_back({t[i], e(static_cast<py::ssize_t>(i))});
  return SurvivalSample(std::move(recs));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Beta-Stacy survival posteriors, spliced estimators and exact path samplers";
  m.attr("__version__") = "0.1.0";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<UsageError>(m, "UsageError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());

  py::class_<SurvivalSample>(m, "SurvivalSample")
      .def(py::init(&make_sample), py::arg("times"), py::arg("events"))
      .def("__len__", &SurvivalSample::size)
      .def_property_readonly("times", [](const SurvivalSample& s) {
        std::vector<double> v;
        for (const auto& r : s.records()) v.push_back(r.time);
        return to_array(v);
      })
      .def_property_readonly("events", [](const SurvivalSample& s) {
        std::vector<bool> v;
        for (const auto& r : s.records()) v.push_back(r.event);
        return v;
      })
      .def_property_readonly("order_statistics", [](const SurvivalSample& s) {
        auto o = s.order_statistics();
        return to_array(std::vector<double>(o.begin(), o.end()));
      })
      .def_property_readonly("event_count", &SurvivalSample::event_count)
      .def_property_readonly("max_time", &SurvivalSample::max_time)
      .def("pooled_with", &SurvivalSample::pooled_with);

  m.def("load_csv", &load_csv, py::arg("path"), py::arg("time_column") = "time",
        py::arg("event_column") = "event");
  m.def("gen_pareto_sample", &gen_pareto_sample, py::arg("n"), py::arg("alpha"), py::arg("seed"));
  m.def("gen_weibull_sample", &gen_weibull_sample, py::arg("n"), py::arg("alpha"), py::arg("p"),
        py::arg("seed"));

  m.def("nelson_aalen", [](const SurvivalSample& s, const Array& t) {
    const auto na = nelson_aalen(s);
    return vectorize(t, [&](double x) { return na(x); });
  }, py::arg("sample"), py::arg("t"), "Nelson-Aalen cumulative hazard at times t");
  m.def("kaplan_meier", [](const SurvivalSample& s, const Array& t) {
    const auto km = kaplan_meier(s);
    return vectorize(t, [&](double x) { return km(x); });
  }, py::arg("sample"), py::arg("t"), "Kaplan-Meier survival at times t");

  py::enum_<TailKind>(m, "TailKind")
      .value("Pareto", TailKind::Pareto)
      .value("Weibull", TailKind::Weibull);
  py::class_<TailFit>(m, "TailFit")
      .def_readonly("kind", &TailFit::kind)
      .def_readonly("alpha_hat", &TailFit::alpha_hat)
      .def_readonly("p_hat", &TailFit::p_hat)
      .def_readonly("l_hat", &TailFit::l_hat)
      .def_readonly("k", &TailFit::k)
      .def_readonly("threshold", &TailFit::threshold)
      .def_readonly("dropped", &TailFit::dropped)
      .def_property_readonly("weibull_coefficient", &TailFit::weibull_coefficient);
  m.def("default_k", &default_k);
  m.def("hill_censored", &hill_censored, py::arg("sample"), py::arg("k"));
  m.def("hill_weighted", &hill_weighted, py::arg("sample"), py::arg("k"));
  m.def("weibull_ls", py::overload_cast<const SurvivalSample&, std::size_t>(&weibull_ls),
        py::arg("sample"), py::arg("k"));

  py::class_<BetaStacyPrior>(m, "BetaStacyPrior")
      .def_readonly("exact_splice_from", &BetaStacyPrior::exact_splice_from)
      .def("baseline_cumulative", [](const BetaStacyPrior& p, const Array& t) {
        return vectorize(t, [&](double x) { return eval_cumulative(p.baseline, x); });
      });
  m.def("constant_prior", [](double c, double rate) {
    BetaStacyPrior p{StepFunction(c), HazardMeasure().add_piece(0.0, kInfinity, ConstantDensity{rate})};
    p.validate();
    return p;
  }, py::arg("c"), py::arg("rate"), "Prior with constant tuning c and constant baseline hazard");
  m.def("make_spliced_prior", &make_spliced_prior, py::arg("fit"), py::arg("q"), py::arg("t0"),
        py::arg("a_n"), py::arg("n"), py::arg("tail_start") = py::none());

  py::class_<BetaStacyPosterior>(m, "BetaStacyPosterior")
      .def_property_readonly("n", &BetaStacyPosterior::n)
      .def("mean", [](const BetaStacyPosterior& p, const Array& t) {
        return vectorize(t, [&](double x) { return posterior_mean(p, x); });
      })
      .def("variance", [](const BetaStacyPosterior& p, const Array& t) {
        return vectorize(t, [&](double x) { return posterior_variance(p, x); });
      })
      .def("spliced_survival", [](const BetaStacyPosterior& p, const Array& t) {
        return vectorize(t, [&](double x) { return spliced_survival(p, x); });
      });
  m.def("posterior_update", &posterior_update, py::arg("prior"), py::arg("sample"));
  m.def("extend", &extend, py::arg("posterior"), py::arg("sample"));

  m.def("phi", &phi);
  m.def("e_acceptance_ratio", &e_acceptance_ratio, py::arg("x"), py::arg("b"));
  py::class_<TruncatedGammaParams>(m, "TruncatedGammaParams")
      .def_readonly("mu", &TruncatedGammaParams::mu)
      .def_readonly("vartheta", &TruncatedGammaParams::vartheta)
      .def_readonly("delta", &TruncatedGammaParams::delta);
  m.def("rule_of_thumb", &rule_of_thumb, py::arg("mu"));
  m.def("acceptance_constant", &acceptance_constant, py::arg("params"));
  m.def("sample_truncated_gamma", [](double t, double mu, std::uint64_t seed, std::size_t size) {
    RngStream rng(seed, 0);
    std::vector<double> out;
    for (std::size_t i = 0; i < size; ++i) out.push_back(sample_truncated_gamma(t, mu, rng));
    return to_array(out);
  }, py::arg("t"), py::arg("mu"), py::arg("seed"), py::arg("size") = 1);

  py::enum_<ProcessKind>(m, "ProcessKind")
      .value("Hazard", ProcessKind::Hazard)
      .value("LogSurvival", ProcessKind::LogSurvival)
      .value("Survival", ProcessKind::Survival);
  m.def("ensemble", [](const BetaStacyPosterior& post, const Array& grid, std::size_t n_paths,
                       ProcessKind kind, std::uint64_t seed) {
    const auto g = to_vector(grid);
    PathEnsemble e;
    {
      py::gil_scoped_release release;
      e = ensemble(post, g, n_paths, kind, seed);
    }
    py::array_t<double> out({static_cast<py::ssize_t>(e.n_paths), static_cast<py::ssize_t>(g.size())});
    std::copy(e.values.begin(), e.values.end(), out.mutable_data());
    return out;
  }, py::arg("posterior"), py::arg("grid"), py::arg("n_paths"),
     py::arg("kind") = ProcessKind::Hazard, py::arg("seed") = 1,
     "Matrix of sampled paths (n_paths x len(grid))");
  m.def("credible_band", [](const py::array_t<double, py::array::c_style | py::array::forcecast>& paths,
                            double level) {
    if (paths.ndim() != 2) throw UsageError("paths must be a 2-d array");
    PathEnsemble e;
    e.n_paths = static_cast<std::size_t>(paths.shape(0));
    e.grid.assign(static_cast<std::size_t>(paths.shape(1)), 0.0);
    e.values.assign(paths.data(), paths.data() + paths.size());
    const auto band = credible_band(e, level);
    return py::make_tuple(to_array(band.lower), to_array(band.upper));
  }, py::arg("paths"), py::arg("level"));

  m.def("validate", [](const std::string& suite, std::uint64_t seed) {
    const auto rep = run_suite(suite, seed);
    return rep.passed();
  }, py::arg("suite"), py::arg("seed") = 1, "Runs a validation suite; True when every check passes");
}
