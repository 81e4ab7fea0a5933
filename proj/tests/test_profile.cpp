#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "shocklab/core/error.hpp"
#include "shocklab/core/numerics.hpp"
#include "shocklab/core/profile.hpp"

using namespace shocklab;
using namespace shocklab::models;
using namespace shocklab::profile;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

ModelPtr framed(const std::string& name, const Vec& um, const Vec& up) {
  auto m = make_model(name, {});
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", shock_speed(*m, um, up));
  return make_model(name, {{"frame_speed", buf}});
}

}  // namespace

TEST_CASE("Burgers profile equals -tanh(x/2)") {
  auto m = make_model("burgers", {});
  auto p = solve_profile(*m, v1(1), v1(-1));
  double err = 0, ode = 0;
  for (int i = 0; i < p.count; ++i) {
    const double x = p.x(i), u = p.values[i];
    err = std::max(err, std::abs(u + std::tanh(x / 2)));
    const double du = -0.5 / std::pow(std::cosh(x / 2), 2);
    ode = std::max(ode, std::abs(du - (u * u - 1) / 2));
  }
  CHECK(err < 1e-9);
  CHECK(ode < 1e-9);
  CHECK(std::abs(p.eval(-40)[0] - 1) < 1e-6);
  CHECK(std::abs(p.eval(40)[0] + 1) < 1e-6);
  auto tail = tail_fit(p);
  CHECK(tail.ok);
  CHECK(tail.alpha_minus == doctest::Approx(1.0).epsilon(0.02));
  CHECK(tail.alpha_plus == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("linear ramp has no exponential tail") {
  std::vector<double> x = linspace(-20, 20, 401), v;
  for (double s : x) v.push_back(std::clamp(-s / 20, -1.0, 1.0));
  auto t = tail_fit(x, v, 1, v1(1), v1(-1));
  CHECK_FALSE(t.ok);
  CHECK_FALSE(t.warning.empty());
}

TEST_CASE("Burgers family: translation direction with mass -2") {
  auto m = make_model("burgers", {});
  auto p = solve_profile(*m, v1(1), v1(-1));
  auto fam = profile_family(m, p);
  CHECK(fam.ell() == 1);
  CHECK(fam.mass(0)[0] == doctest::Approx(-2.0).epsilon(1e-6));
  CHECK(fam.direction_tail_rate(0) == doctest::Approx(1.0).epsilon(0.02));
  // The direction is the profile derivative.
  const auto& d = fam.direction(0);
  double err = 0;
  for (int i = 0; i < p.count; i += 16) err = std::max(err, std::abs(d[i] - p.derivs[i]));
  CHECK(err < 1e-6);
}

TEST_CASE("Lax 2x2 profile and translation family") {
  auto m = framed("quadratic2x2", v2(1, 0.2), v2(1.0 / 15, -11.0 / 15));
  auto p = solve_profile(*m, v2(1, 0.2), v2(1.0 / 15, -11.0 / 15));
  CHECK(profile_residual(*m, p) < 1e-8);
  auto fam = profile_family(m, p);
  CHECK(fam.ell() == 1);
  Vec jump = p.u_plus - p.u_minus;
  CHECK((fam.mass(0) - jump).norm() < 1e-6);
  // u^delta(x) = u(x + delta)
  std::vector<double> xs = linspace(-10, 10, 41), out;
  Vec delta = Vec::Constant(1, 0.3);
  fam.evaluate(delta, xs, &out);
  for (size_t i = 0; i < xs.size(); ++i) {
    Vec ref = p.eval(xs[i] + 0.3);
    CHECK(std::abs(out[2 * i] - ref[0]) < 1e-8);
    CHECK(std::abs(out[2 * i + 1] - ref[1]) < 1e-8);
  }
}

TEST_CASE("cubic overcompressive family has two directions with positive tails") {
  auto m = framed("cubic", v2(1, 0), v2(-1.0 / 3, 0));
  auto p = solve_profile(*m, v2(1, 0), v2(-1.0 / 3, 0));
  CHECK(profile_residual(*m, p) < 1e-8);
  auto fam = profile_family(m, p);
  CHECK(fam.ell() == 2);
  CHECK(fam.direction_tail_rate(0) > 0);
  CHECK(fam.direction_tail_rate(1) > 0);
  auto cls = classify_shock(endstate_spectrum(*m, v2(1, 0)), endstate_spectrum(*m, v2(-1.0 / 3, 0)));
  CHECK(cls.ell == fam.ell());
}

TEST_CASE("isentropic gas profile satisfies the reduced ODE") {
  const double s = std::sqrt((1 - std::pow(1.5, -5.0 / 3.0)) / 0.5);
  Vec um = v2(1, 0), up = v2(1.5, -0.5 * s);
  auto m = framed("isentropic_ns", um, up);
  auto p = solve_profile(*m, um, up);
  CHECK(profile_residual(*m, p) < 1e-8);
  auto t = tail_fit(p);
  CHECK(t.alpha_minus > 0);
  CHECK(t.alpha_plus > 0);
  CHECK(profile_family(m, p).ell() == 1);
}

TEST_CASE("profile CSV round trip") {
  auto m = make_model("burgers", {});
  auto p = solve_profile(*m, v1(1), v1(-1));
  const std::string path = "profile_roundtrip.csv";
  write_profile_csv(p, path, "# test\n");
  auto q = read_profile_csv(path);
  CHECK(q.count == p.count);
  // nodes round-trip exactly; between nodes the derivatives are rebuilt by finite differences
  const double node = p.x(p.count / 2 + 7);
  CHECK(q.eval(node)[0] == p.eval(node)[0]);
  CHECK(std::abs(q.eval(0.37)[0] - p.eval(0.37)[0]) < 1e-10);
  std::remove(path.c_str());
}

TEST_CASE("mismatched endstates have no connection") {
  auto m = make_model("burgers", {});
  CHECK_THROWS_AS(solve_profile(*m, v1(-1), v1(1)), Error);
}
