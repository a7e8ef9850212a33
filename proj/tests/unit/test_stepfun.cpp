#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <algorithm>
#include <cmath>
#include <limits>
#include <functional>
#include <random>
#include <vector>

#include "bnpsurv/errors.hpp"
#include "bnpsurv/stepfun.hpp"

using namespace bnpsurv;

namespace {

double quad(const std::function<double(double)>& f, double a, double b) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14);
}

}  // namespace

TEST_CASE("step function evaluation is right-continuous") {
  StepFunction f({1.0, 2.0}, {0.0, 5.0, 7.0});
  CHECK(f(0.0) == 0.0);
  CHECK(f(0.999) == 0.0);
  CHECK(f(1.0) == 5.0);
  CHECK(f(1.5) == 5.0);
  CHECK(f(2.0) == 7.0);
  CHECK(f(100.0) == 7.0);
  CHECK(f.left_limit(1.0) == 0.0);
  CHECK(f.left_limit(2.0) == 5.0);
  CHECK(f.jump_at(2.0) == 2.0);
  CHECK(f.jump_at(1.5) == 0.0);
  CHECK(f.initial_value() == 0.0);
  CHECK(f.tail_value() == 7.0);
}

TEST_CASE("step function constructor rejects invalid input") {
  CHECK_THROWS_AS(StepFunction({1.0}, {0.0}), UsageError);
  CHECK_THROWS_AS(StepFunction({2.0, 1.0}, {0.0, 1.0, 2.0}), UsageError);
  CHECK_THROWS_AS(StepFunction({1.0, 1.0}, {0.0, 1.0, 2.0}), UsageError);
  CHECK_THROWS_AS(StepFunction({-1.0}, {0.0, 1.0}), UsageError);
  CHECK_THROWS_AS(StepFunction({1.0}, {0.0, NAN}), UsageError);
  CHECK_THROWS_AS(StepFunction(std::numeric_limits<double>::infinity()), UsageError);
}

TEST_CASE("from_pieces collapses ties to the later value") {
  auto f = StepFunction::from_pieces(1.0, {{3.0, 4.0}, {1.0, 2.0}, {3.0, 9.0}});
  CHECK(f(0.5) == 1.0);
  CHECK(f(1.0) == 2.0);
  CHECK(f(3.0) == 9.0);
  CHECK(f.breakpoints().size() == 2);
}

TEST_CASE("from_jumps accumulates and merges tied jumps") {
  std::vector<double> t{2.0, 1.0, 2.0};
  std::vector<double> s{1.0, 0.5, 3.0};
  auto f = StepFunction::from_jumps(t, s, 10.0);
  CHECK(f(0.5) == 10.0);
  CHECK(f(1.0) == 10.5);
  CHECK(f(2.0) == 14.5);
  CHECK(f.breakpoints().size() == 2);
  std::vector<double> bad{1.0};
  CHECK_THROWS_AS(StepFunction::from_jumps(bad, s), UsageError);
}

TEST_CASE("project takes midpoint values") {
  std::vector<double> grid{1.0, 2.0, 4.0};
  auto f = StepFunction::project([](double t) { return 10.0 / (t * t); }, grid);
  CHECK(f(1.0) == doctest::Approx(10.0 / 2.25));
  CHECK(f(0.2) == doctest::Approx(10.0 / 2.25));
  CHECK(f(3.0) == doctest::Approx(10.0 / 9.0));
  CHECK(f(10.0) == doctest::Approx(10.0 / 16.0));
}

TEST_CASE("combine, sum, simplify and map") {
  StepFunction f({1.0}, {1.0, 2.0});
  StepFunction g({1.0, 3.0}, {1.0, 0.0, 5.0});
  auto h = f + g;
  CHECK(h(0.5) == 2.0);
  CHECK(h(1.0) == 2.0);
  CHECK(h(3.0) == 7.0);
  auto s = h.simplified();
  CHECK(s.breakpoints().size() == 1);
  CHECK(s(3.0) == 7.0);
  auto m = f.map([](double v) { return 2.0 * v; });
  CHECK(m(2.0) == 4.0);
  CHECK(merged_breakpoints(f, g) == std::vector<double>{1.0, 3.0});
  auto prod = combine(f, g, [](double a, double b) { return a * b; });
  CHECK(prod(3.5) == 10.0);
}

TEST_CASE("eval_cumulative closed forms") {
  HazardMeasure unit;
  unit.add_piece(0.0, INFINITY, ConstantDensity{1.0});
  CHECK(eval_cumulative(unit, 2.0) == doctest::Approx(2.0).epsilon(1e-15));

  HazardMeasure pareto;
  pareto.add_piece(1.0, INFINITY, ParetoDensity{1.8});
  const double e = std::exp(1.0);
  CHECK(eval_cumulative(pareto, e) == doctest::Approx(1.8).epsilon(1e-14));
  CHECK(eval_cumulative(pareto, 0.5) == 0.0);
  const double oracle = quad([](double t) { return 1.8 / t; }, 1.0, e);
  CHECK(std::fabs(eval_cumulative(pareto, e) - oracle) < 1e-12);

  HazardMeasure atoms;
  atoms.add_atom(1.0, 0.5);
  CHECK(eval_cumulative(atoms, 1.0) == 0.5);
  CHECK(eval_cumulative(atoms, 0.9) == 0.0);

  HazardMeasure weib;
  weib.add_piece(1.0, INFINITY, WeibullDensity{2.0, 0.5});
  CHECK(eval_cumulative(weib, 4.0) == doctest::Approx(2.0 * (2.0 - 1.0)));
  CHECK(weib.density(4.0) == doctest::Approx(2.0 * 0.5 / 2.0));
  CHECK_THROWS_AS(eval_cumulative(weib, -1.0), UsageError);
}

TEST_CASE("hazard measure validation") {
  HazardMeasure h;
  CHECK_THROWS_AS(h.add_piece(0.0, INFINITY, ParetoDensity{1.0}), UsageError);
  CHECK_THROWS_AS(h.add_piece(2.0, 1.0, ConstantDensity{1.0}), UsageError);
  CHECK_THROWS_AS(h.add_piece(0.0, 1.0, ConstantDensity{-1.0}), UsageError);
  CHECK_THROWS_AS(h.add_piece(0.0, 1.0, WeibullDensity{1.0, 0.0}), UsageError);
  CHECK_THROWS_AS(h.add_atom(1.0, 1.5), UsageError);
  CHECK_THROWS_AS(h.add_atom(0.0, 0.5), UsageError);
  CHECK_FALSE(h.total_mass_diverges());
  h.add_piece(0.0, 1.0, ConstantDensity{1.0});
  CHECK_FALSE(h.total_mass_diverges());
  h.add_piece(1.0, INFINITY, ParetoDensity{0.3});
  CHECK(h.total_mass_diverges());
  CHECK(h.breakpoints() == std::vector<double>{0.0, 1.0});
}

TEST_CASE("overlapping pieces add up") {
  HazardMeasure h;
  h.add_piece(0.0, 2.0, ConstantDensity{1.0});
  h.add_piece(1.0, 3.0, ConstantDensity{2.0});
  CHECK(h.density(1.5) == 3.0);
  CHECK(h.cumulative(3.0) == doctest::Approx(2.0 + 4.0));
  CHECK(h.continuous_mass(0.5, 1.5) == doctest::Approx(0.5 + 0.5 + 1.0));
}

TEST_CASE("cumulative is non-decreasing and right-continuous on random grids") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    HazardMeasure h;
    h.add_piece(0.0, 1.0 + 3.0 * u(gen), ConstantDensity{2.0 * u(gen)});
    h.add_piece(0.5 + u(gen), INFINITY, ParetoDensity{3.0 * u(gen)});
    h.add_piece(u(gen), INFINITY, WeibullDensity{u(gen), 0.2 + 2.0 * u(gen)});
    for (int a = 0; a < 4; ++a) h.add_atom(0.1 + 5.0 * u(gen), u(gen));
    double prev = 0.0;
    for (int i = 0; i <= 400; ++i) {
      const double t = 6.0 * i / 400.0;
      const double v = eval_cumulative(h, t);
      CHECK(v >= prev - 1e-15);
      prev = v;
    }
    for (const auto& a : h.atoms()) {
      CHECK(eval_cumulative(h, a.time) - eval_cumulative(h, std::nextafter(a.time, 0.0)) >=
            a.mass - 1e-12);
    }
  }
}

TEST_CASE("integrate_ratio examples") {
  HazardMeasure pareto2;
  pareto2.add_piece(1.0, INFINITY, ParetoDensity{2.0});
  const double e = std::exp(1.0);
  StepFunction one(1.0), zero(0.0);
  CHECK(integrate_ratio(one, one, pareto2, e) == doctest::Approx(1.0).epsilon(1e-14));
  const double oracle = quad([](double t) { return 0.5 * 2.0 / t; }, 1.0, e);
  CHECK(std::fabs(integrate_ratio(one, one, pareto2, e) - oracle) < 1e-12);

  HazardMeasure mixed;
  mixed.add_piece(0.0, 2.0, ConstantDensity{1.5});
  mixed.add_piece(1.0, INFINITY, ParetoDensity{0.7});
  mixed.add_atom(1.3, 0.25);
  for (double t : {0.3, 1.0, 1.3, 2.5, 10.0}) {
    CHECK(integrate_ratio(StepFunction(3.0), zero, mixed, t) ==
          doctest::Approx(eval_cumulative(mixed, t)).epsilon(1e-14));
  }
  StepFunction c_switch({5.0}, {0.0, 1.0});
  StepFunction y(2.0);
  CHECK(integrate_ratio(c_switch, y, mixed, 4.9) == 0.0);

  CHECK_THROWS_AS(integrate_ratio(zero, zero, mixed, 1.0), NumericError);
  CHECK_THROWS_AS(integrate_ratio(StepFunction(-1.0), y, mixed, 1.0), UsageError);
}

TEST_CASE("closed-form integrals agree with adaptive quadrature on random inputs") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 30; ++rep) {
    HazardMeasure h;
    const double s1 = 0.2 + u(gen);
    h.add_piece(0.0, 1.0 + 2.0 * u(gen), ConstantDensity{u(gen)});
    h.add_piece(s1, INFINITY, ParetoDensity{2.0 * u(gen)});
    h.add_piece(0.0, INFINITY, WeibullDensity{u(gen), 0.5 + 1.5 * u(gen)});
    std::vector<double> bc, vc{u(gen)}, by, vy{5.0 * u(gen) + 0.1};
    double x = 0.0, z = 0.0;
    for (int i = 0; i < 5; ++i) {
      x += 0.1 + u(gen);
      bc.push_back(x);
      vc.push_back(3.0 * u(gen));
      z += 0.1 + u(gen);
      by.push_back(z);
      vy.push_back(5.0 * u(gen) + 0.1);
    }
    StepFunction c(bc, vc), y(by, vy);
    const double t = 0.5 + 5.0 * u(gen);
    auto ratio = [&](double s) { return c(s) / (c(s) + y(s)) * h.density(s); };
    std::vector<double> cuts{0.0};
    for (double b : merged_breakpoints(c, y)) {
      if (b < t) cuts.push_back(b);
    }
    for (double b : h.breakpoints()) {
      if (b > 0.0 && b < t) cuts.push_back(b);
    }
    cuts.push_back(t);
    std::sort(cuts.begin(), cuts.end());
    double oracle = 0.0;
    boost::math::quadrature::tanh_sinh<double> ts;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      if (cuts[i + 1] > cuts[i]) oracle += ts.integrate(ratio, cuts[i], cuts[i + 1]);
    }
    const double closed = integrate_ratio(c, y, h, t);
    CHECK(std::fabs(closed - oracle) <= 1e-10 * std::max(1.0, std::fabs(oracle)));
  }
}
