#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>

#include "shocklab/shocklab.h"

TEST_CASE("status names and version") {
  CHECK(std::string(shocklab_status_name(SHOCKLAB_OK)).size() > 0);
  CHECK(std::string(shocklab_status_name(SHOCKLAB_E_CONFIG)) != std::string(shocklab_status_name(SHOCKLAB_OK)));
  CHECK(std::string(shocklab_status_name(99)) == "unknown");
  CHECK(std::strlen(shocklab_version()) > 0);
}

TEST_CASE("model handles") {
  char names[256];
  CHECK(shocklab_model_names(names, sizeof names) == SHOCKLAB_OK);
  CHECK(std::string(names).find("isentropic_ns") != std::string::npos);

  shocklab_model* bad = reinterpret_cast<shocklab_model*>(1);
  CHECK(shocklab_model_create("nope", nullptr, nullptr, 0, &bad) == SHOCKLAB_E_CONFIG);
  CHECK(bad == nullptr);
  CHECK(std::strlen(shocklab_last_error()) > 0);

  const char* keys[] = {"frame_speed"};
  const char* vals[] = {"0.7777777777777778"};
  shocklab_model* m = nullptr;
  REQUIRE(shocklab_model_create("cubic", keys, vals, 1, &m) == SHOCKLAB_OK);
  int n = 0;
  CHECK(shocklab_model_dim(m, &n) == SHOCKLAB_OK);
  CHECK(n == 2);
  double um[2] = {1, 0}, up[2] = {-1.0 / 3, 0};
  double s = 0;
  CHECK(shocklab_shock_speed(m, um, up, &s) == SHOCKLAB_OK);
  CHECK(s == doctest::Approx(7.0 / 9.0));
  shocklab_shock_class cls{};
  CHECK(shocklab_classify_shock(m, um, up, &cls) == SHOCKLAB_OK);
  CHECK(cls.ell == 2);
  CHECK(cls.overcompressive == 1);
  double speeds[2], beta[2];
  CHECK(shocklab_spectrum(m, um, speeds, beta) == SHOCKLAB_OK);
  CHECK(speeds[0] == doctest::Approx(1 - 7.0 / 9.0));
  CHECK(speeds[1] == doctest::Approx(3 - 7.0 / 9.0));
  shocklab_stability st{};
  CHECK(shocklab_stability_checks(m, um, up, &st) == SHOCKLAB_OK);
  CHECK(st.majda_pego == 1);
  CHECK(shocklab_model_dim(nullptr, &n) == SHOCKLAB_E_INPUT);
  shocklab_model_destroy(m);
}

TEST_CASE("profile through the C API") {
  shocklab_model* m = nullptr;
  REQUIRE(shocklab_model_create("burgers", nullptr, nullptr, 0, &m) == SHOCKLAB_OK);
  double um = 1, up = -1;
  shocklab_profile* p = nullptr;
  REQUIRE(shocklab_profile_solve(m, &um, &up, &p) == SHOCKLAB_OK);
  double u = 0;
  CHECK(shocklab_profile_eval(p, 1.3, &u) == SHOCKLAB_OK);
  CHECK(u == doctest::Approx(-std::tanh(0.65)).epsilon(1e-9));
  double res = 1, am = 0, ap = 0;
  CHECK(shocklab_profile_residual(p, &res) == SHOCKLAB_OK);
  CHECK(res < 1e-8);
  CHECK(shocklab_profile_tail_rates(p, &am, &ap) == SHOCKLAB_OK);
  CHECK(am == doctest::Approx(1.0).epsilon(0.02));
  int ell = 0;
  CHECK(shocklab_profile_family_dim(p, &ell) == SHOCKLAB_OK);
  CHECK(ell == 1);
  shocklab_profile_destroy(p);
  double wrong_um = -1, wrong_up = 1;
  CHECK(shocklab_profile_solve(m, &wrong_um, &wrong_up, &p) != SHOCKLAB_OK);
  shocklab_model_destroy(m);
}

TEST_CASE("kernels through the C API") {
  double v = 0;
  CHECK(shocklab_heat_kernel(0, 1 / (4 * M_PI), &v) == SHOCKLAB_OK);
  CHECK(v == doctest::Approx(1.0));
  CHECK(shocklab_heat_kernel(0, -1, &v) == SHOCKLAB_E_DOMAIN);
  CHECK(shocklab_diffusion_wave(0, 1, 0, 1, 0.5, 2, &v) == SHOCKLAB_OK);
  CHECK(v == 0.0);
}

TEST_CASE("configs, dry runs and reports") {
  shocklab_config* cfg = nullptr;
  CHECK(shocklab_config_parse("[experiment]\nname = x\nbogus = 1\n", &cfg) == SHOCKLAB_E_CONFIG);
  CHECK(cfg == nullptr);
  REQUIRE(shocklab_config_load(SHOCKLAB_CONFIGS_DIR "/quadratic_lax.cfg", &cfg) == SHOCKLAB_OK);
  CHECK(std::string(shocklab_config_name(cfg)) == "quadratic_lax");
  char hash[65];
  CHECK(shocklab_config_hash(cfg, hash, sizeof hash) == SHOCKLAB_OK);
  CHECK(std::strlen(hash) == 64);
  shocklab_run_options opt = shocklab_run_options_default();
  opt.dry_run = 1;
  shocklab_run* run = nullptr;
  CHECK(shocklab_run_experiment(cfg, "capi_runs", &opt, &run) == SHOCKLAB_OK);
  CHECK(std::string(shocklab_run_hash(run)) == hash);
  double n = 0;
  CHECK(shocklab_run_metric(run, "n", &n) == SHOCKLAB_OK);
  CHECK(n == 2);
  CHECK(shocklab_run_rate_count(run) == 0);
  shocklab_run_destroy(run);
  shocklab_config_destroy(cfg);

  REQUIRE(shocklab_config_load(SHOCKLAB_CONFIGS_DIR "/undercompressive.cfg", &cfg) == SHOCKLAB_OK);
  CHECK(shocklab_run_experiment(cfg, "capi_runs", nullptr, &run) == SHOCKLAB_E_UNSUPPORTED);
  CHECK(std::string(shocklab_run_stage(run)) == "classify_shock");
  shocklab_run_destroy(run);
  shocklab_config_destroy(cfg);

  size_t need = 0;
  CHECK(shocklab_emit_report("capi_runs/does_not_exist", nullptr, 0, &need) == SHOCKLAB_E_INCOMPLETE_RUN);
}
