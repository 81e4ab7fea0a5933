#include "shocklab/shocklab.h"

#include <cstring>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "shocklab/core/acceptance.hpp"
#include "shocklab/core/error.hpp"
#include "shocklab/core/experiment.hpp"
#include "shocklab/core/kernels.hpp"
#include "shocklab/core/models.hpp"
#include "shocklab/core/profile.hpp"

using namespace shocklab;

struct shocklab_model {
  models::ModelPtr model;
};

struct shocklab_profile {
  models::ModelPtr model;
  profile::ShockProfile profile;
};

struct shocklab_config {
  experiment::ExperimentConfig config;
};

struct shocklab_run {
  experiment::RunResult result;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::string> series_names;
  std::vector<std::vector<double>> series;  // [column][row]
};

struct shocklab_acceptance {
  std::vector<acceptance::CriterionResult> results;
  std::vector<std::string> lines, details;
};

namespace {

thread_local std::string last_error;

template <class F>
int guarded(F&& f) {
  try {
    last_error.clear();
    f();
    return SHOCKLAB_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    last_error = e.what();
    return SHOCKLAB_E_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) fail(ErrorCode::kInput, std::string(what) + " is null");
}

models::Vec state(const shocklab_model* m, const double* u) {
  need(u, "state");
  const int n = m->model->dim();
  return Eigen::Map<const models::Vec>(u, n);
}

int copy_out(const std::string& s, char* buf, size_t len, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (buf && len > 0) {
    size_t k = std::min(len - 1, s.size());
    std::memcpy(buf, s.data(), k);
    buf[k] = '\0';
  }
  return SHOCKLAB_OK;
}

}  // namespace

extern "C" {

const char* shocklab_version(void) { return "1.0.0"; }

const char* shocklab_status_name(int status) {
  if (status < 0 || status > static_cast<int>(ErrorCode::kInternal)) return "unknown";
  return error_name(static_cast<ErrorCode>(status));
}

const char* shocklab_last_error(void) { return last_error.c_str(); }

int shocklab_model_names(char* buf, size_t len) {
  std::string s;
  for (const auto& n : models::model_names()) s += (s.empty() ? "" : ",") + n;
  return copy_out(s, buf, len, nullptr);
}

int shocklab_model_create(const char* name, const char* const* keys, const char* const* values,
                          size_t count, shocklab_model** out) {
  return guarded([&] {
    need(name, "name");
    need(out, "out");
    *out = nullptr;
    std::map<std::string, std::string> params;
    for (size_t i = 0; i < count; ++i) {
      need(keys[i], "parameter key");
      need(values[i], "parameter value");
      params[keys[i]] = values[i];
    }
    *out = new shocklab_model{models::make_model(name, params)};
  });
}

void shocklab_model_destroy(shocklab_model* model) { delete model; }

int shocklab_model_dim(const shocklab_model* model, int* n) {
  return guarded([&] {
    need(model, "model");
    need(n, "n");
    *n = model->model->dim();
  });
}

int shocklab_model_flux(const shocklab_model* model, const double* u, double* f) {
  return guarded([&] {
    need(model, "model");
    need(u, "u");
    need(f, "f");
    model->model->flux(u, f);
  });
}

int shocklab_shock_speed(const shocklab_model* model, const double* um, const double* up, double* speed) {
  return guarded([&] {
    need(model, "model");
    need(speed, "speed");
    *speed = models::shock_speed(*model->model, state(model, um), state(model, up));
  });
}

int shocklab_spectrum(const shocklab_model* model, const double* u, double* speeds, double* beta) {
  return guarded([&] {
    need(model, "model");
    auto s = models::endstate_spectrum(*model->model, state(model, u));
    for (int k = 0; k < s.n(); ++k) {
      if (speeds) speeds[k] = s.speeds[k];
      if (beta) beta[k] = s.beta[k];
    }
  });
}

int shocklab_classify_shock(const shocklab_model* model, const double* um, const double* up,
                            shocklab_shock_class* out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    auto c = models::classify_shock(models::endstate_spectrum(*model->model, state(model, um)),
                                    models::endstate_spectrum(*model->model, state(model, up)));
    out->ell = c.ell;
    out->overcompressive = c.type == models::ShockType::kOvercompressive;
    out->incoming_minus = c.incoming_minus;
    out->incoming_plus = c.incoming_plus;
  });
}

int shocklab_stability_checks(const shocklab_model* model, const double* um, const double* up,
                              shocklab_stability* out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    auto s = models::stability_checks(*model->model, state(model, um), state(model, up));
    out->majda_pego_value = s.majda_pego_value;
    out->majda_pego = s.majda_pego;
    out->coupling_margin = s.coupling_margin;
    out->genuine_coupling = s.genuine_coupling;
    out->k2_value = s.k2_value;
    out->k2 = s.k2;
    out->strictly_parabolic = s.strictly_parabolic;
  });
}

int shocklab_profile_solve(const shocklab_model* model, const double* um, const double* up,
                           shocklab_profile** out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    *out = nullptr;
    auto p = profile::solve_profile(*model->model, state(model, um), state(model, up));
    *out = new shocklab_profile{model->model, std::move(p)};
  });
}

void shocklab_profile_destroy(shocklab_profile* profile) { delete profile; }

int shocklab_profile_eval(const shocklab_profile* p, double x, double* u) {
  return guarded([&] {
    need(p, "profile");
    need(u, "u");
    p->profile.eval(x, u);
  });
}

int shocklab_profile_residual(const shocklab_profile* p, double* residual) {
  return guarded([&] {
    need(p, "profile");
    need(residual, "residual");
    *residual = profile::profile_residual(*p->model, p->profile);
  });
}

int shocklab_profile_tail_rates(const shocklab_profile* p, double* alpha_minus, double* alpha_plus) {
  return guarded([&] {
    need(p, "profile");
    auto t = profile::tail_fit(p->profile);
    if (alpha_minus) *alpha_minus = t.alpha_minus;
    if (alpha_plus) *alpha_plus = t.alpha_plus;
  });
}

int shocklab_profile_family_dim(const shocklab_profile* p, int* ell) {
  return guarded([&] {
    need(p, "profile");
    need(ell, "ell");
    *ell = profile::profile_family(p->model, p->profile).ell();
  });
}

int shocklab_profile_write_csv(const shocklab_profile* p, const char* path) {
  return guarded([&] {
    need(p, "profile");
    need(path, "path");
    profile::write_profile_csv(p->profile, path, "");
  });
}

int shocklab_heat_kernel(double x, double t, double* value) {
  return guarded([&] {
    need(value, "value");
    *value = kernels::heat_kernel(x, t);
  });
}

int shocklab_diffusion_wave(double mass, double beta, double speed, double gamma, double x, double t,
                            double* value) {
  return guarded([&] {
    need(value, "value");
    *value = kernels::diffusion_wave(kernels::DiffusionWaveParams{mass, beta, speed, gamma}, x, t);
  });
}

int shocklab_config_load(const char* path, shocklab_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    *out = new shocklab_config{experiment::load_config(path)};
  });
}

int shocklab_config_parse(const char* text, shocklab_config** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    *out = nullptr;
    *out = new shocklab_config{experiment::parse_config(text)};
  });
}

void shocklab_config_destroy(shocklab_config* config) { delete config; }

int shocklab_config_hash(const shocklab_config* config, char* buf, size_t len) {
  return guarded([&] {
    need(config, "config");
    need(buf, "buf");
    if (len < 65) fail(ErrorCode::kInput, "hash buffer needs 65 bytes");
    copy_out(experiment::config_hash(config->config), buf, len, nullptr);
  });
}

const char* shocklab_config_name(const shocklab_config* config) {
  return config ? config->config.name.c_str() : "";
}

shocklab_run_options shocklab_run_options_default(void) { return shocklab_run_options{0, 1u, 1}; }

int shocklab_run_experiment(const shocklab_config* config, const char* out_dir,
                            const shocklab_run_options* options, shocklab_run** out) {
  int rc = guarded([&] {
    need(config, "config");
    need(out, "out");
    *out = nullptr;
    experiment::RunOptions ro;
    if (options) {
      ro.dry_run = options->dry_run != 0;
      ro.seed = options->seed;
      ro.write_files = options->write_files != 0;
    }
    auto run = std::make_unique<shocklab_run>();
    run->result = experiment::run_experiment(config->config, out_dir ? out_dir : ".", ro);
    for (const auto& kv : run->result.metrics) run->metrics.push_back(kv);
    const auto& ts = run->result.series;
    if (!ts.times.empty()) {
      run->series_names.push_back("t");
      run->series.push_back(ts.times);
      for (const auto& r : ts.rows) {
        std::string name = r.quantity;
        if (r.p == kInf) name += "_Linf";
        else if (r.p > 0) name += "_L" + std::to_string(static_cast<int>(r.p));
        run->series_names.push_back(name);
        run->series.push_back(r.values);
      }
    }
    if (run->result.status != 0) last_error = run->result.message;
    *out = run.release();
  });
  if (rc != SHOCKLAB_OK) return rc;
  return (*out)->result.status;
}

void shocklab_run_destroy(shocklab_run* run) { delete run; }
int shocklab_run_status(const shocklab_run* run) { return run ? run->result.status : SHOCKLAB_E_INPUT; }
const char* shocklab_run_stage(const shocklab_run* run) { return run ? run->result.stage.c_str() : ""; }
const char* shocklab_run_message(const shocklab_run* run) { return run ? run->result.message.c_str() : ""; }
const char* shocklab_run_dir(const shocklab_run* run) { return run ? run->result.run_dir.c_str() : ""; }
const char* shocklab_run_hash(const shocklab_run* run) { return run ? run->result.hash.c_str() : ""; }
size_t shocklab_run_metric_count(const shocklab_run* run) { return run ? run->metrics.size() : 0; }

int shocklab_run_metric_at(const shocklab_run* run, size_t i, const char** key, double* value) {
  return guarded([&] {
    need(run, "run");
    if (i >= run->metrics.size()) fail(ErrorCode::kInput, "metric index out of range");
    if (key) *key = run->metrics[i].first.c_str();
    if (value) *value = run->metrics[i].second;
  });
}

int shocklab_run_metric(const shocklab_run* run, const char* key, double* value) {
  return guarded([&] {
    need(run, "run");
    need(key, "key");
    auto it = run->result.metrics.find(key);
    if (it == run->result.metrics.end()) fail(ErrorCode::kInput, std::string("no metric ") + key);
    if (value) *value = it->second;
  });
}

size_t shocklab_run_rate_count(const shocklab_run* run) { return run ? run->result.report.rows.size() : 0; }

int shocklab_run_rate_at(const shocklab_run* run, size_t i, shocklab_rate* out) {
  return guarded([&] {
    need(run, "run");
    need(out, "out");
    const auto& rows = run->result.report.rows;
    if (i >= rows.size()) fail(ErrorCode::kInput, "rate index out of range");
    const auto& r = rows[i];
    *out = shocklab_rate{r.quantity.c_str(), r.p,         r.available,  r.exponent,
                         r.stderr_,          r.predicted, r.rule.c_str(), r.threshold,
                         r.tolerance,        r.pass,      r.note.c_str()};
  });
}

size_t shocklab_run_series_length(const shocklab_run* run) {
  return run && !run->series.empty() ? run->series[0].size() : 0;
}

size_t shocklab_run_series_columns(const shocklab_run* run) { return run ? run->series.size() : 0; }

const char* shocklab_run_series_name(const shocklab_run* run, size_t column) {
  return run && column < run->series_names.size() ? run->series_names[column].c_str() : "";
}

int shocklab_run_series_value(const shocklab_run* run, size_t row, size_t column, double* value) {
  return guarded([&] {
    need(run, "run");
    need(value, "value");
    if (column >= run->series.size() || row >= run->series[column].size())
      fail(ErrorCode::kInput, "series index out of range");
    *value = run->series[column][row];
  });
}

int shocklab_emit_report(const char* run_dir, char* buf, size_t len, size_t* needed) {
  return guarded([&] {
    need(run_dir, "run_dir");
    copy_out(experiment::format_report(experiment::emit_report(run_dir)), buf, len, needed);
  });
}

int shocklab_acceptance_run(const int* ids, size_t count, const char* configs_dir, const char* out_dir,
                            int jobs, unsigned seed, shocklab_acceptance** out) {
  return guarded([&] {
    need(configs_dir, "configs_dir");
    need(out_dir, "out_dir");
    need(out, "out");
    *out = nullptr;
    std::vector<int> list;
    if (ids && count) list.assign(ids, ids + count);
    else
      for (int i = 1; i <= acceptance::kCriterionCount; ++i) list.push_back(i);
    acceptance::Options opt{configs_dir, out_dir, jobs, seed};
    auto acc = std::make_unique<shocklab_acceptance>();
    acc->results = acceptance::run_criteria(list, opt);
    for (const auto& r : acc->results) {
      acc->lines.push_back(acceptance::format_line(r));
      acc->details.push_back(acceptance::format_details(r));
    }
    *out = acc.release();
  });
}

void shocklab_acceptance_destroy(shocklab_acceptance* acc) { delete acc; }
size_t shocklab_acceptance_count(const shocklab_acceptance* acc) { return acc ? acc->results.size() : 0; }

int shocklab_acceptance_result(const shocklab_acceptance* acc, size_t i, int* id, int* pass,
                               const char** line, const char** details) {
  return guarded([&] {
    need(acc, "acceptance");
    if (i >= acc->results.size()) fail(ErrorCode::kInput, "result index out of range");
    if (id) *id = acc->results[i].id;
    if (pass) *pass = acc->results[i].pass;
    if (line) *line = acc->lines[i].c_str();
    if (details) *details = acc->details[i].c_str();
  });
}

}  // extern "C"
