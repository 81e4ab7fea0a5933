#include <doctest.h>

#include <cmath>
#include <vector>

#include "shocklab/core/error.hpp"
#include "shocklab/core/kernels.hpp"

using namespace shocklab;
using namespace shocklab::kernels;

namespace {

double trapz_fn(double (*f)(double, double), double t, double a, double b, int n) {
  std::vector<double> v;
  for (double x : linspace(a, b, n)) v.push_back(f(x, t));
  return trapezoid(v, (b - a) / (n - 1));
}

}  // namespace

TEST_CASE("heat kernel values and mass") {
  CHECK(heat_kernel(0, 1 / (4 * kPi)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(trapz_fn(heat_kernel, 1.0, -40, 40, 8001) == doctest::Approx(1.0).epsilon(1e-10));
  for (double t : {0.1, 1.0, 10.0, 100.0}) {
    const double w = 40 * std::sqrt(t);
    double m = integrate_panels([&](double x) { return heat_kernel(x, t); }, -w, w, 100);
    CHECK(std::abs(m - 1) < 1e-8);
  }
  CHECK_THROWS_AS(heat_kernel(0, 0), Error);
}

TEST_CASE("heat kernel semigroup against quadrature") {
  for (double x : {0.0, 1.0, 3.0}) {
    double conv = integrate_panels([&](double y) { return heat_kernel(x - y, 1) * heat_kernel(y, 1); }, -40, 40, 200);
    CHECK(std::abs(conv - heat_kernel(x, 2)) < 1e-8);
  }
}

TEST_CASE("heat kernel derivatives match finite differences") {
  const double h = 1e-4, t = 2.0;
  for (double x : {-2.0, 0.3, 1.7}) {
    CHECK(heat_kernel_dx(x, t) == doctest::Approx((heat_kernel(x + h, t) - heat_kernel(x - h, t)) / (2 * h)).epsilon(1e-7));
    CHECK(heat_kernel_dxx(x, t) == doctest::Approx((heat_kernel_dx(x + h, t) - heat_kernel_dx(x - h, t)) / (2 * h)).epsilon(1e-6));
    CHECK(heat_kernel_dxxx(x, t) == doctest::Approx((heat_kernel_dxx(x + h, t) - heat_kernel_dxx(x - h, t)) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("diffusion wave: zero mass, mass conservation, PDE residual order") {
  DiffusionWaveParams zero{0.0, 1.0, 0.0, 1.0};
  CHECK(diffusion_wave(zero, 0.7, 3.0) == 0.0);
  DiffusionWaveParams p{0.1, 1.0, 0.0, 1.0};
  for (double t : {0.0, 1.0, 10.0}) {
    const double w = 40 * std::sqrt(t + 1);
    CHECK(std::abs(integrate_panels([&](double x) { return diffusion_wave(p, x, t); }, -w, w, 400) - 0.1) < 1e-7);
  }
  auto residual = [&](double h) {
    double worst = 0;
    const double t = 2.0;
    for (double x : linspace(-10, 10, 101)) {
      auto f = [&](double xx, double tt) { return diffusion_wave(p, xx, tt); };
      double ft = (f(x, t + h) - f(x, t - h)) / (2 * h);
      double fxx = (f(x + h, t) - 2 * f(x, t) + f(x - h, t)) / (h * h);
      double f2x = (f(x + h, t) * f(x + h, t) - f(x - h, t) * f(x - h, t)) / (2 * h);
      worst = std::max(worst, std::abs(ft - fxx + f2x));
    }
    return worst;
  };
  double order = std::log2(residual(0.2) / residual(0.1));
  CHECK(std::abs(order - 2) <= 0.3);
}

TEST_CASE("diffusion waves with and without nonlinearity carry the same mass") {
  DiffusionWaveParams lin{0.2, 1.0, 0.5, 0.0}, nl{0.2, 1.0, 0.5, 0.5};
  for (double t : {0.0, 4.0, 32.0}) {
    const double c = 0.5 * (t + 1), w = 40 * std::sqrt(t + 1);
    double a = integrate_panels([&](double x) { return diffusion_wave(lin, x, t); }, c - w, c + w, 400);
    double b = integrate_panels([&](double x) { return diffusion_wave(nl, x, t); }, c - w, c + w, 400);
    CHECK(a == doctest::Approx(b).epsilon(1e-9));
  }
}

TEST_CASE("Duhamel convolution of a zero-mass source vanishes") {
  Source src;
  src.kind = SourceKind::kDiffusionWaveSquared;
  src.wave = DiffusionWaveParams{0.0, 1.0, 0.0, 1.0};
  QuadratureGrid g;
  g.nx = 41;
  auto u = duhamel_convolve(GaussianSignal{0, 1, 0}, src, g, 4.0);
  for (double v : u.values) CHECK(v == 0.0);
}

TEST_CASE("interaction problem: bounded stable ratio and decay slopes") {
  QuadratureGrid g;
  std::vector<double> ts{1, 4, 16, 32, 64, 128, 256};
  auto rep = verify_prop21(g, ts, SourceKind::kHeatSquared);
  CHECK(rep.pass);
  CHECK(rep.max_dyadic_factor < 2);
  CHECK(std::isfinite(rep.sup_ratio.front()));
  // Ratios at the sampled middle-zone and left-Gaussian points stay below the fitted C.
  bool mid = false, left = false;
  for (const auto& row : rep.table)
    if (row.t == 64) {
      if (std::abs(row.x - 32) < 2) mid = true;
      if (std::abs(row.x + 10) < 2) left = true;
      CHECK(row.ratio <= rep.fitted_c * (1 + 1e-12));
    }
  CHECK(mid);
  CHECK(left);
  std::vector<double> tt(ts.begin() + 2, ts.end());
  std::vector<SampledFunction> ss(rep.snapshots.begin() + 2, rep.snapshots.end());
  CHECK(std::abs(lp_norm_rates(tt, ss, kInf).exponent + 0.75) <= 0.08);
}

TEST_CASE("L2 norm of the heat kernel decays like t^-1/4") {
  std::vector<double> ts{1, 2, 4, 8, 16};
  std::vector<SampledFunction> snaps;
  for (double t : ts) {
    SampledFunction f;
    f.x = linspace(-40 * std::sqrt(t), 40 * std::sqrt(t), 4001);
    for (double x : f.x) f.values.push_back(heat_kernel(x, t));
    CHECK(lp_norm(f.values, f.dx(), 2) == doctest::Approx(std::pow(8 * kPi * t, -0.25)).epsilon(1e-8));
    snaps.push_back(std::move(f));
  }
  CHECK(std::abs(lp_norm_rates(ts, snaps, 2).exponent + 0.25) < 0.01);
}

TEST_CASE("Howard lemma checks") {
  SampledFunction one;
  one.x = linspace(0, 40, 401);
  one.values.assign(401, 1.0);
  auto r = howard_bound_check(one, 1.0, 0.0, 2.0);
  CHECK(r.lhs == doctest::Approx(std::sqrt(kPi) / 2).epsilon(1e-8));

  // f = exp(-s^2/8), a = 1: completing the square gives an erfc closed form for lhs.
  SampledFunction g, g2;
  g.x = linspace(0, 40, 4001);
  g2.x = linspace(0, 40, 8001);
  for (double s : g.x) g.values.push_back(std::exp(-s * s / 8));
  for (double s : g2.x) g2.values.push_back(std::exp(-s * s / 8));
  for (double z : {1.0, 2.0, 4.0, 8.0}) {
    auto h = howard_bound_check(g, 1.0, z, 2.0);
    auto h2 = howard_bound_check(g2, 1.0, z, 2.0);
    const double c = 8 * z / 9;
    const double exact = std::exp(-z * z / 9) * 0.5 * std::sqrt(8 * kPi / 9) * std::erfc(-c * std::sqrt(9.0 / 8));
    // linear interpolation of the sample: second order in the spacing
    const double e1 = std::abs(h.lhs / exact - 1), e2 = std::abs(h2.lhs / exact - 1);
    CHECK(e1 < 1e-4);
    CHECK(e2 < e1 / 3.5);
    CHECK(h.pass);
    CHECK(h.ratio <= h.c_omega);
    CHECK(std::abs(h2.ratio / h.ratio - 1) < 1e-4);
  }

  SampledFunction s;
  s.x = linspace(0, 40, 4001);
  for (double x : s.x) s.values.push_back(1 / std::sqrt(1 + x));
  CHECK(howard_bound_check(s, 4.0, 16.0, 2.0).pass);

  SampledFunction up = s;
  up.values[10] = 2;
  CHECK_THROWS_AS(howard_bound_check(up, 1.0, 1.0, 2.0), Error);
}

TEST_CASE("interaction lemmas") {
  InteractionParams cross;
  cross.a = 1;
  cross.b = -1;
  auto c = interaction_lemma_check(InteractionMode::kCross, cross, 4, 256, 7);
  CHECK_FALSE(c.exponential);
  CHECK(std::abs(c.rate + 0.5) <= 0.05);

  InteractionParams same;
  same.a = 1;
  same.b = 1;
  auto s = interaction_lemma_check(InteractionMode::kCross, same, 2, 12, 6);
  CHECK(s.exponential);
  CHECK(s.rate > 0);

  InteractionParams prod;
  prod.a1 = 1;
  prod.a2 = -1;
  auto p = interaction_lemma_check(InteractionMode::kProduct, prod, 1, 20, 9);
  CHECK(p.rate > 0);
  // max_x K(x-t,t) K(x+t,t) = (4 pi t)^-1 e^{-t/2}: rate 1/2.
  CHECK(p.rate == doctest::Approx(0.5).epsilon(0.2));

  InteractionParams ex;
  ex.a = 1;
  auto e = interaction_lemma_check(InteractionMode::kExponential, ex, 1, 20, 9);
  CHECK(e.rate > 0);
  for (size_t i = 0; i < e.times.size(); ++i) {
    double scaled = e.values[i] * std::sqrt(e.times[i]) * std::exp(e.rate * e.times[i]);
    CHECK(scaled < 10 * e.values[0] * std::exp(e.rate * e.times[0]) * std::sqrt(e.times[0]));
  }

  InteractionParams bad;
  bad.a1 = bad.a2 = 1;
  CHECK_THROWS_AS(interaction_lemma_check(InteractionMode::kProduct, bad, 1, 4, 4), Error);
  InteractionParams wrong;
  wrong.a = 1;
  wrong.decay_side = -1;
  CHECK_THROWS_AS(interaction_lemma_check(InteractionMode::kWeighted, wrong, 1, 4, 4), Error);
}

TEST_CASE("global constants of the Gaussian lemmas are scale invariant") {
  for (int k = 1; k <= 3; ++k)
    CHECK(derivative_bound_ratio(k, 1.0) == doctest::Approx(derivative_bound_ratio(k, 256.0)).epsilon(1e-6));
  CHECK(shifted_gaussian_ratio(1.0) == doctest::Approx(shifted_gaussian_ratio(64.0)).epsilon(1e-6));
}
