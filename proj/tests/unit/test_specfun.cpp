#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>

#include "bnpsurv/errors.hpp"
#include "bnpsurv/specfun.hpp"

using namespace bnpsurv;
using boost::multiprecision::cpp_bin_float_50;

namespace {

double rel(double a, double b) { return std::fabs(a - b) / std::fabs(b); }

}  // namespace

TEST_CASE("E1 matches the multiprecision oracle to 1e-12") {
  for (double x : {1e-8, 1e-3, 0.1, 0.5, 0.999, 1.0, 1.001, 2.0, 5.0, 20.0, 100.0, 600.0}) {
    const cpp_bin_float_50 oracle = -boost::math::expint(-cpp_bin_float_50(x));
    CHECK(rel(specfun::expint_e1(x), static_cast<double>(oracle)) < 1e-12);
  }
  CHECK_THROWS_AS(specfun::expint_e1(0.0), UsageError);
}

TEST_CASE("E1 + log x is finite at zero") {
  CHECK(specfun::expint_e1_plus_log(0.0) == doctest::Approx(-specfun::kEulerGamma).epsilon(1e-15));
  for (double x : {1e-12, 1e-4, 0.3, 3.0}) {
    const cpp_bin_float_50 xm(x);
    const cpp_bin_float_50 oracle = -boost::math::expint(-xm) + log(xm);
    CHECK(std::fabs(specfun::expint_e1_plus_log(x) - static_cast<double>(oracle)) < 1e-13);
  }
}

TEST_CASE("Ein matches quadrature of its definition") {
  for (double x : {0.0, 1e-6, 0.2, 1.0, 4.0, 30.0}) {
    const double q = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [](double u) { return u == 0.0 ? 1.0 : -std::expm1(-u) / u; }, 0.0, x, 15, 1e-15);
    CHECK(std::fabs(specfun::expint_ein(x) - q) <= 1e-13 * std::max(1.0, q));
  }
  CHECK(specfun::expint_ein(0.0) == 0.0);
  CHECK_THROWS_AS(specfun::expint_ein(-1.0), UsageError);
}
