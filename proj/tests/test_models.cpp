#include <doctest.h>

#include <cmath>

#include "shocklab/core/error.hpp"
#include "shocklab/core/models.hpp"

using namespace shocklab;
using namespace shocklab::models;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("registry builds every model and rejects unknown names and keys") {
  for (const auto& name : model_names()) {
    if (name == "linear") continue;
    auto m = make_model(name, {{"frame_speed", "0.25"}});
    CHECK(m->name() == name);
    CHECK(m->frame_speed() == 0.25);
  }
  CHECK_THROWS_AS(make_model("euler", {}), Error);
  CHECK_THROWS_AS(make_model("burgers", {{"nu", "1"}}), Error);
  CHECK_THROWS_AS(make_model("linear", {{"A", "1,0;0,1"}}), Error);
}

TEST_CASE("Burgers spectrum at u = 1") {
  auto m = make_model("burgers", {{"viscosity", "0.7"}});
  auto s = endstate_spectrum(*m, v1(1.0));
  CHECK(s.speeds[0] == doctest::Approx(1.0));
  CHECK(std::abs(s.left(0, 0) * s.right(0, 0) - 1) < 1e-14);
  CHECK(std::abs(s.right(0, 0)) == doctest::Approx(1.0));
  CHECK(s.beta[0] == doctest::Approx(0.7));
  auto c = coupling_coefficients(s, *m);
  CHECK(c.Gamma(0, 0, 0) == doctest::Approx(0.5));
  CHECK(s.gamma[0] == doctest::Approx(0.5));
}

TEST_CASE("symmetric linear flux: speeds -1, 1 and biorthogonal eigenvectors") {
  auto m = make_model("linear", {{"A", "0,1;1,0"}, {"B", "1,0;0,1"}});
  auto s = endstate_spectrum(*m, v2(0, 0));
  CHECK(s.speeds[0] == doctest::Approx(-1.0));
  CHECK(s.speeds[1] == doctest::Approx(1.0));
  Mat lr = s.left * s.right;
  CHECK((lr - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  auto c = coupling_coefficients(s, *m);
  CHECK((c.b - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(s.beta[0] == doctest::Approx(1.0));
  auto st = stability_checks(*m, v2(0, 0), v2(0, 0));
  CHECK(st.majda_pego);
  CHECK(st.genuine_coupling);
}

TEST_CASE("isentropic gas at (1, 0): speeds +-sqrt(gamma), genuine coupling") {
  auto m = make_model("isentropic_ns", {});
  auto s = endstate_spectrum(*m, v2(1, 0));
  // lambda^2 = -p'(v) = gamma v^{-gamma-1}
  CHECK(s.speeds[0] == doctest::Approx(-std::sqrt(5.0 / 3.0)).epsilon(1e-12));
  CHECK(s.speeds[1] == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-12));
  auto st = stability_checks(*m, v2(1, 0), v2(1.5, -0.5));
  CHECK_FALSE(st.strictly_parabolic);
  CHECK(st.genuine_coupling);
  CHECK(st.k2);
}

TEST_CASE("eigen-residuals are small for every built-in model") {
  for (auto [name, u] : {std::pair{"quadratic2x2", v2(1, 0.2)}, std::pair{"cubic", v2(1, 0)},
                         std::pair{"isentropic_ns", v2(1.5, -0.4)}}) {
    auto m = make_model(name, {});
    auto s = endstate_spectrum(*m, u);
    Mat a = m->jacobian(u);
    for (int i = 0; i < 2; ++i)
      CHECK((a * s.right.col(i) - s.speeds[i] * s.right.col(i)).norm() < 1e-10 * a.norm());
  }
}

TEST_CASE("block-decoupled system has no mixed coupling") {
  auto m = make_model("quadratic2x2", {});
  auto s = endstate_spectrum(*m, v2(1, 0.2));
  auto c = coupling_coefficients(s, *m);
  // The flux decouples in its characteristic variables: Gamma^i_jk = 0 unless i = j = k.
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        if (!(i == j && j == k)) CHECK(std::abs(c.Gamma(i, j, k)) < 1e-12);
  CHECK(c.max_residual < 1e-12);
}

TEST_CASE("scalar stability: Majda-Pego constant equals -b") {
  auto m = make_model("burgers", {{"viscosity", "2"}});
  auto st = stability_checks(*m, v1(1), v1(-1));
  CHECK(st.majda_pego);
  CHECK(st.majda_pego_value == doctest::Approx(-2.0).epsilon(1e-9));
}

TEST_CASE("shock classification") {
  auto b = make_model("burgers", {});
  auto c = classify_shock(endstate_spectrum(*b, v1(1)), endstate_spectrum(*b, v1(-1)));
  CHECK(c.type == ShockType::kLax);
  CHECK(c.ell == 1);
  CHECK(c.incoming_minus + c.incoming_plus == 2);

  auto cubic = make_model("cubic", {{"frame_speed", "0.7777777777777778"}});
  auto oc = classify_shock(endstate_spectrum(*cubic, v2(1, 0)), endstate_spectrum(*cubic, v2(-1.0 / 3, 0)));
  CHECK(oc.type == ShockType::kOvercompressive);
  CHECK(oc.ell == 2);

  // Synthetic n = 3 spectra with two incoming characteristics per side.
  EndstateSpectrum sm, sp;
  sm.speeds = Vec(3);
  sm.speeds << -1, 0.5, 2;
  sp.speeds = Vec(3);
  sp.speeds << -2, -0.5, 1;
  auto lax = classify_shock(sm, sp);
  CHECK(lax.ell == 1);
  CHECK(lax.type == ShockType::kLax);

  auto under = make_model("cubic", {});
  CHECK_THROWS_AS(classify_shock(endstate_spectrum(*under, v2(1, 0)), endstate_spectrum(*under, v2(2, 0))), Error);
}

TEST_CASE("Rankine-Hugoniot speed of the cubic overcompressive pair") {
  auto m = make_model("cubic", {});
  CHECK(shock_speed(*m, v2(1, 0), v2(-1.0 / 3, 0)) == doctest::Approx(7.0 / 9.0).epsilon(1e-14));
  CHECK(rankine_hugoniot_residual(*m, v2(1, 0), v2(-1.0 / 3, 0)) > 0.1);
  // the residual is measured in the model's frame
  auto moving = make_model("cubic", {{"frame_speed", "0.77777777777777779"}});
  CHECK(rankine_hugoniot_residual(*moving, v2(1, 0), v2(-1.0 / 3, 0)) < 1e-14);
}
