#include <doctest.h>

#include <cmath>
#include <vector>

#include "shocklab/core/error.hpp"
#include "shocklab/core/numerics.hpp"

using namespace shocklab;

TEST_CASE("exact power law gives its exponent") {
  std::vector<double> t, v;
  for (double x : geometric_times(1, 256, 2)) {
    t.push_back(x);
    v.push_back(3 * std::pow(x, -0.75));
  }
  auto f = fit_power_law(t, v);
  CHECK(f.exponent == doctest::Approx(-0.75).epsilon(1e-12));
  auto g = fit_power_law(t, v, 16.0, 5);
  CHECK(g.count == 5);
  CHECK(g.exponent == doctest::Approx(-0.75).epsilon(1e-12));
}

TEST_CASE("power law fit rejects nonpositive data and short windows") {
  std::vector<double> t{1, 2, 4, 8}, v{1, 0.5, 0.0, 0.1};
  CHECK_THROWS_AS(fit_power_law(t, v), Error);
  std::vector<double> w{1, 0.5, 0.25, 0.125};
  CHECK_THROWS_AS(fit_power_law(t, w, 4.0, 5), Error);
}

TEST_CASE("exponential fit recovers the rate") {
  std::vector<double> t = linspace(0, 10, 11), v;
  for (double x : t) v.push_back(2 * std::exp(-0.3 * x));
  CHECK(fit_exponential(t, v).exponent == doctest::Approx(0.3).epsilon(1e-10));
}

TEST_CASE("discrete norms on a uniform grid") {
  std::vector<double> f{1, -2, 2, 0};
  // trapezoid weights: halves at both ends
  CHECK(lp_norm(f, 0.5, 1) == doctest::Approx(2.25));
  CHECK(lp_norm(f, 0.5, 2) == doctest::Approx(std::sqrt(4.25)));
  CHECK(lp_norm(f, 0.5, kInf) == 2);
  std::vector<double> field{3, 4, 0, 0};
  CHECK(lp_norm_field(field, 2, 1.0, kInf) == doctest::Approx(5));
}

TEST_CASE("Gauss-Legendre panels integrate a Gaussian") {
  double v = integrate_panels([](double x) { return std::exp(-x * x); }, -10, 10, 20);
  CHECK(v == doctest::Approx(std::sqrt(kPi)).epsilon(1e-13));
}

TEST_CASE("errfn limits") {
  CHECK(errfn(0) == doctest::Approx(0.5));
  CHECK(errfn(40) == 1.0);
  CHECK(errfn(-40) == doctest::Approx(0.0));
}
