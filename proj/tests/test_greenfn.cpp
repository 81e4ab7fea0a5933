#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "shocklab/core/error.hpp"
#include "shocklab/core/greenfn.hpp"
#include "shocklab/core/numerics.hpp"
#include "shocklab/core/profile.hpp"

using namespace shocklab;
using namespace shocklab::greenfn;
using models::Mat;
using models::Vec;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

EKernelSpec lax_spec() {
  auto m = models::make_model("quadratic2x2", {});
  Vec um = v2(1, 0.2), up = v2(1.0 / 15, -11.0 / 15);
  auto p = profile::solve_profile(*m, um, up);
  auto fam = profile::profile_family(m, p);
  return make_kernel_spec(models::endstate_spectrum(*m, um), models::endstate_spectrum(*m, up), {fam.mass(0)});
}

}  // namespace

TEST_CASE("scalar Burgers scattering: c = 1/(u+ - u-) = -1/2") {
  auto m = models::make_model("burgers", {});
  Vec um = Vec::Constant(1, 1.0), up = Vec::Constant(1, -1.0);
  auto spec = make_kernel_spec(models::endstate_spectrum(*m, um), models::endstate_spectrum(*m, up),
                               {Vec::Constant(1, -2.0)});
  CHECK(spec.scattering.out_minus.empty());
  CHECK(spec.scattering.out_plus.empty());
  CHECK(spec.scattering.c_stationary(Side::kMinus, 0, 0) == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(spec.scattering.c_stationary(Side::kPlus, 0, 0) == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(spec.scattering.max_residual < 1e-14);
}

TEST_CASE("identity basis returns the incoming vector") {
  Vec e1 = v2(1, 0), e2 = v2(0, 1);
  double res = 1;
  Vec c = solve_scattering({e1}, {}, {e2}, e2, &res);
  CHECK(c[0] == 0.0);
  CHECK(c[1] == 1.0);
  CHECK(res == 0.0);
}

TEST_CASE("random well-conditioned 3x3 basis reconstructs to 1e-10") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  Mat b = Mat::Identity(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) b(i, j) += 0.3 * u(rng);
  Vec in(3);
  in << u(rng), u(rng), u(rng);
  double res = 1;
  Vec c = solve_scattering({b.col(0)}, {b.col(1)}, {Vec(b.col(2))}, in, &res);
  CHECK(res < 1e-10);
  CHECK((b * c - in).norm() < 1e-10);
  CHECK(basis_condition(b) < 10);
}

TEST_CASE("degenerate basis violates the scattering condition") {
  Vec a = v2(1, 1);
  CHECK_THROWS_AS(solve_scattering({a}, {}, {a}, v2(1, 0)), Error);
  CHECK_THROWS_AS(solve_scattering({a}, {}, {}, v2(1, 0)), Error);
}

TEST_CASE("e_i limits and continuity") {
  auto spec = lax_spec();
  CHECK(spec.scattering.max_residual < 1e-10);
  CHECK(spec.scattering.pi_mismatch < 1e-10);
  // t -> infinity at fixed y < 0: errfn difference -> 1.
  RowVec lim = RowVec::Zero(2);
  for (size_t q = 0; q < spec.scattering.in_minus.size(); ++q) {
    const int k = spec.scattering.in_minus[q];
    lim += spec.scattering.c_stationary(Side::kMinus, static_cast<int>(q), 0) * spec.minus[k].l;
  }
  CHECK((eval_e(spec, 0, -1.0, 1e4) - lim).norm() < 1e-6);
  CHECK(eval_e(spec, 0, -1.0, 1e-4).norm() < 1e-12);
  auto em = eval_e_side(spec, 0, 0.0, 1.0, Side::kMinus);
  auto ep = eval_e_side(spec, 0, 0.0, 1.0, Side::kPlus);
  CHECK((em - ep).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("S kernel: vanishes before t = 1, pure Gaussian far from the shock") {
  auto spec = lax_spec();
  CHECK(eval_S(spec, 0.0, 0.5, -1.0).norm() == 0.0);
  // Source at y = -50, t = 2: no incoming wave has reached the shock; x far left.
  Mat s = eval_S(spec, -48.0, 2.0, -50.0);
  Mat g = Mat::Zero(2, 2);
  for (const auto& f : spec.minus) {
    const double z = -48.0 - (-50.0) - f.speed * 2.0;
    g += std::exp(-z * z / (4 * f.beta * 2.0)) / std::sqrt(4 * kPi * f.beta * 2.0) * f.r * f.l;
  }
  const double wl = 1 / (1 + std::exp(-96.0));
  CHECK((s - wl * g).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("transmission geometry") {
  // z_jk = 0 once the incoming wave reaches the shock.
  CHECK(z_jk(-3.0, 3.0, 0.5, 1.0) == doctest::Approx(0.0).epsilon(1e-14));
  // At y = 0, beta_bar = (x / (a_j t)) beta_j.
  const double x = 2.0, t = 4.0, aj = 0.8, bj = 1.3;
  CHECK(beta_bar(x, t, 0.0, aj, bj, 1.0, 1.0, Side::kPlus) == doctest::Approx(x / (aj * t) * bj).epsilon(1e-12));
}

TEST_CASE("kernel decay slopes") {
  auto spec = lax_spec();
  auto inf = verify_kernel_decay(spec, 0, kInf, 16, 256);
  CHECK(std::abs(inf.slope_ey + 0.5) <= 0.08);
  auto one = verify_kernel_decay(spec, 0, 1, 16, 256);
  CHECK(std::abs(one.slope_ey) <= 0.08);
  auto two = verify_kernel_decay(spec, 0, 2, 16, 256);
  CHECK(std::abs(two.slope_ety + 0.75) <= 0.08);
  CHECK(two.richardson_ok);
}

TEST_CASE("S applied to a bump decays at least like the heat kernel") {
  auto spec = lax_spec();
  auto d = verify_s_bump_decay(spec, 2, 4, 64, 5);
  CHECK(d.pass);
  CHECK(d.slope <= d.target + 0.08);
}
