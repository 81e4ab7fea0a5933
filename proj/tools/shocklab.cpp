#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "shocklab/shocklab.h"

#ifndef SHOCKLAB_CONFIGS_DIR
#define SHOCKLAB_CONFIGS_DIR "configs"
#endif

namespace {

std::vector<double> parse_state(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::strtod(item.c_str(), nullptr));
  return out;
}

int report_error(int rc, const char* what) {
  std::fprintf(stderr, "error: %s: %s (%s)\n", what, shocklab_last_error(), shocklab_status_name(rc));
  return rc;
}

std::string p_label(double p) {
  if (std::isinf(p)) return "inf";
  if (p == 0) return "-";
  char buf[16];
  std::snprintf(buf, sizeof buf, "%g", p);
  return buf;
}

struct ModelArgs {
  std::string name;
  std::vector<std::string> params;
  std::string u_minus, u_plus;
  std::string frame_speed = "auto";
};

void add_model_options(CLI::App* app, ModelArgs& a) {
  app->add_option("--model", a.name, "model name")->required();
  app->add_option("--param", a.params, "model parameter key=value (repeatable)");
  app->add_option("--u-minus", a.u_minus, "left endstate, comma separated")->required();
  app->add_option("--u-plus", a.u_plus, "right endstate, comma separated")->required();
  app->add_option("--frame-speed", a.frame_speed, "shock frame speed or 'auto' (Rankine-Hugoniot)");
}

// Builds the model in the shock frame.
int make_model(const ModelArgs& a, shocklab_model** out, std::vector<double>* um, std::vector<double>* up) {
  std::vector<std::string> keys, values;
  for (const auto& p : a.params) {
    auto eq = p.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --param expects key=value, got '%s'\n", p.c_str());
      return SHOCKLAB_E_INPUT;
    }
    keys.push_back(p.substr(0, eq));
    values.push_back(p.substr(eq + 1));
  }
  *um = parse_state(a.u_minus);
  *up = parse_state(a.u_plus);
  std::string speed = a.frame_speed;
  auto build = [&](shocklab_model** m) {
    std::vector<const char*> k, v;
    for (size_t i = 0; i < keys.size(); ++i) {
      k.push_back(keys[i].c_str());
      v.push_back(values[i].c_str());
    }
    if (speed != "auto") {
      k.push_back("frame_speed");
      v.push_back(speed.c_str());
    }
    return shocklab_model_create(a.name.c_str(), k.data(), v.data(), k.size(), m);
  };
  shocklab_model* m = nullptr;
  int rc = build(&m);
  if (rc) return report_error(rc, "model");
  int n = 0;
  shocklab_model_dim(m, &n);
  if (static_cast<int>(um->size()) != n || static_cast<int>(up->size()) != n) {
    shocklab_model_destroy(m);
    std::fprintf(stderr, "error: endstates must have %d components\n", n);
    return SHOCKLAB_E_INPUT;
  }
  if (speed == "auto") {
    double s = 0;
    rc = shocklab_shock_speed(m, um->data(), up->data(), &s);
    shocklab_model_destroy(m);
    if (rc) return report_error(rc, "shock speed");
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", s);
    speed = buf;
    rc = build(&m);
    if (rc) return report_error(rc, "model");
  }
  *out = m;
  return SHOCKLAB_OK;
}

int check_model(const ModelArgs& a) {
  shocklab_model* m = nullptr;
  std::vector<double> um, up;
  if (int rc = make_model(a, &m, &um, &up)) return rc;
  int n = 0;
  shocklab_model_dim(m, &n);
  double speed = 0;
  shocklab_shock_speed(m, um.data(), up.data(), &speed);
  std::printf("model %s, n = %d, residual frame speed %.3g\n", a.name.c_str(), n, speed);
  std::vector<double> sp(n), beta(n);
  for (int side = 0; side < 2; ++side) {
    int rc = shocklab_spectrum(m, side ? up.data() : um.data(), sp.data(), beta.data());
    if (rc) {
      shocklab_model_destroy(m);
      return report_error(rc, "spectrum");
    }
    std::printf("%s speeds:", side ? "u+" : "u-");
    for (int k = 0; k < n; ++k) std::printf(" %.6g", sp[k]);
    std::printf("   beta:");
    for (int k = 0; k < n; ++k) std::printf(" %.6g", beta[k]);
    std::printf("\n");
  }
  shocklab_stability st{};
  int rc = shocklab_stability_checks(m, um.data(), up.data(), &st);
  if (rc) {
    shocklab_model_destroy(m);
    return report_error(rc, "stability");
  }
  std::printf("Majda-Pego %s (%.4g), genuine coupling %s (%.4g), K2 %s (%.4g), %s\n",
              st.majda_pego ? "pass" : "fail", st.majda_pego_value,
              st.genuine_coupling ? "pass" : "fail", st.coupling_margin, st.k2 ? "pass" : "fail",
              st.k2_value, st.strictly_parabolic ? "strictly parabolic" : "real viscosity");
  shocklab_shock_class cls{};
  rc = shocklab_classify_shock(m, um.data(), up.data(), &cls);
  shocklab_model_destroy(m);
  if (rc) return report_error(rc, "classify_shock");
  std::printf("shock: %s, ell = %d (incoming %d minus, %d plus)\n",
              cls.overcompressive ? "overcompressive" : "Lax", cls.ell, cls.incoming_minus,
              cls.incoming_plus);
  return 0;
}

int profile_cmd(const ModelArgs& a, const std::string& out) {
  shocklab_model* m = nullptr;
  std::vector<double> um, up;
  if (int rc = make_model(a, &m, &um, &up)) return rc;
  shocklab_profile* p = nullptr;
  int rc = shocklab_profile_solve(m, um.data(), up.data(), &p);
  shocklab_model_destroy(m);
  if (rc) return report_error(rc, "profile");
  double res = 0, am = 0, ap = 0;
  int ell = 0;
  shocklab_profile_residual(p, &res);
  shocklab_profile_tail_rates(p, &am, &ap);
  rc = shocklab_profile_family_dim(p, &ell);
  std::printf("profile residual %.3g, tail rates %.6g (minus) %.6g (plus)\n", res, am, ap);
  if (rc == 0) std::printf("family dimension %d\n", ell);
  else report_error(rc, "profile family");
  if (!out.empty()) {
    int wr = shocklab_profile_write_csv(p, out.c_str());
    if (wr) rc = report_error(wr, "write");
    else std::printf("wrote %s\n", out.c_str());
  }
  shocklab_profile_destroy(p);
  return rc;
}

enum class View { kEvolve, kDecompose, kRates, kRun };

struct RunArgs {
  std::vector<std::string> configs;
  std::string out = "runs";
  int jobs = 1;
  bool dry_run = false;
  unsigned seed = 1;
};

void add_run_options(CLI::App* app, RunArgs& a, bool many) {
  if (many) app->add_option("--config", a.configs, "experiment config (repeatable)")->required();
  else app->add_option("--config", a.configs, "experiment config")->required()->expected(1);
  app->add_option("--out", a.out, "output directory");
  app->add_option("--jobs", a.jobs, "concurrent runs")->check(CLI::PositiveNumber);
  app->add_flag("--dry-run", a.dry_run, "validate and classify only; write nothing");
  app->add_option("--seed", a.seed, "seed for perturbation placement jitter");
}

std::string describe(shocklab_run* run, const std::string& config, View view) {
  std::string s;
  char buf[512];
  const int status = shocklab_run_status(run);
  if (status != 0) {
    std::snprintf(buf, sizeof buf, "%s: FAILED at stage %s: %s (%s)\n", config.c_str(),
                  shocklab_run_stage(run), shocklab_run_message(run), shocklab_status_name(status));
    return buf;
  }
  std::snprintf(buf, sizeof buf, "%s: ok, config sha256 %s%s%s\n", config.c_str(), shocklab_run_hash(run),
                *shocklab_run_dir(run) ? ", artifacts in " : "", shocklab_run_dir(run));
  s += buf;
  if (std::string(shocklab_run_stage(run)) == "dry-run") return s + "  dry run: validation passed\n";
  auto metric = [&](const char* k) {
    double v = NAN;
    shocklab_run_metric(run, k, &v);
    return v;
  };
  if (view == View::kEvolve) {
    std::snprintf(buf, sizeof buf, "  dt %.6g, steps %.0f, mass defect %.3g, boundary signal %.3g\n",
                  metric("dt"), metric("steps"), metric("mass_defect"), metric("boundary_signal"));
    s += buf;
  }
  if (view == View::kDecompose) {
    const size_t cols = shocklab_run_series_columns(run), rows = shocklab_run_series_length(run);
    for (size_t c = 0; c < cols; ++c) {
      std::snprintf(buf, sizeof buf, "%14s", shocklab_run_series_name(run, c));
      s += buf;
    }
    s += "\n";
    for (size_t r = 0; r < rows; ++r) {
      for (size_t c = 0; c < cols; ++c) {
        double v = 0;
        shocklab_run_series_value(run, r, c, &v);
        std::snprintf(buf, sizeof buf, "%14.6g", v);
        s += buf;
      }
      s += "\n";
    }
  }
  if (view == View::kRates || view == View::kRun) {
    std::snprintf(buf, sizeof buf, "  %-12s %-4s %-10s %-10s %-10s %s\n", "quantity", "p", "exponent",
                  "predicted", "threshold", "verdict");
    s += buf;
    for (size_t i = 0; i < shocklab_run_rate_count(run); ++i) {
      shocklab_rate r{};
      shocklab_run_rate_at(run, i, &r);
      std::snprintf(buf, sizeof buf, "  %-12s %-4s %-10.4g %-10.4g %-2s %-7.4g %s %s\n", r.quantity,
                    p_label(r.p).c_str(), r.exponent, r.predicted, r.rule, r.threshold,
                    r.available ? (r.pass ? "PASS" : "FAIL") : "N/A", r.note);
      s += buf;
    }
  }
  if (view == View::kRun && *shocklab_run_dir(run)) {
    size_t need = 0;
    shocklab_emit_report(shocklab_run_dir(run), nullptr, 0, &need);
    std::string table(need, '\0');
    if (shocklab_emit_report(shocklab_run_dir(run), table.data(), need, &need) == 0) {
      table.resize(need - 1);
      s += table;
    }
  }
  return s;
}

int run_configs(const RunArgs& a, View view) {
  std::vector<std::string> outputs(a.configs.size());
  std::vector<int> codes(a.configs.size(), 0);
  auto one = [&](size_t i) {
    shocklab_config* cfg = nullptr;
    int rc = shocklab_config_load(a.configs[i].c_str(), &cfg);
    if (rc) {
      outputs[i] = a.configs[i] + ": " + shocklab_last_error() + "\n";
      codes[i] = rc;
      return;
    }
    shocklab_run_options opt = shocklab_run_options_default();
    opt.dry_run = a.dry_run;
    opt.seed = a.seed;
    shocklab_run* run = nullptr;
    codes[i] = shocklab_run_experiment(cfg, a.out.c_str(), &opt, &run);
    outputs[i] = run ? describe(run, a.configs[i], view) : a.configs[i] + ": " + shocklab_last_error() + "\n";
    shocklab_run_destroy(run);
    shocklab_config_destroy(cfg);
  };
  std::mutex mu;
  size_t next = 0;
  auto worker = [&] {
    for (;;) {
      size_t i;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next >= a.configs.size()) return;
        i = next++;
      }
      one(i);
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < std::min<int>(a.jobs, static_cast<int>(a.configs.size())); ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  int rc = 0;
  for (size_t i = 0; i < outputs.size(); ++i) {
    std::fputs(outputs[i].c_str(), stdout);
    if (codes[i] && !rc) rc = codes[i];
  }
  return rc;
}

int acceptance_cmd(const std::vector<int>& ids, const std::string& configs, const std::string& out,
                   int jobs, unsigned seed, bool verbose) {
  shocklab_acceptance* acc = nullptr;
  int rc = shocklab_acceptance_run(ids.data(), ids.size(), configs.c_str(), out.c_str(), jobs, seed, &acc);
  if (rc) return report_error(rc, "acceptance");
  int failed = 0;
  for (size_t i = 0; i < shocklab_acceptance_count(acc); ++i) {
    int id = 0, pass = 0;
    const char *line = nullptr, *details = nullptr;
    shocklab_acceptance_result(acc, i, &id, &pass, &line, &details);
    std::printf("%s\n", line);
    if (verbose || !pass) std::fputs(details, stdout);
    failed += !pass;
  }
  shocklab_acceptance_destroy(acc);
  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shocklab: long-time behaviour of perturbed viscous shocks"};
  app.require_subcommand(1);

  std::vector<int> kernel_ids{1, 2, 3, 4};
  bool verbose = false;
  auto* vk = app.add_subcommand("verify-kernels", "kernel, interaction and Green-kernel suites");
  vk->add_option("--criteria", kernel_ids, "criterion numbers to run")->delimiter(',');
  vk->add_flag("-v,--verbose", verbose, "print every check");

  ModelArgs model_args;
  auto* cm = app.add_subcommand("check-model", "spectra, stability conditions and shock type");
  add_model_options(cm, model_args);

  std::string profile_out;
  auto* pf = app.add_subcommand("profile", "solve the stationary profile and its family");
  add_model_options(pf, model_args);
  pf->add_option("--out", profile_out, "CSV file for the sampled profile");

  RunArgs run_args;
  auto* ev = app.add_subcommand("evolve", "run the pipeline and summarise the time integration");
  add_run_options(ev, run_args, false);
  auto* dc = app.add_subcommand("decompose", "run the pipeline and print the decomposition series");
  add_run_options(dc, run_args, false);
  auto* rt = app.add_subcommand("rates", "run the pipeline and print fitted decay rates");
  add_run_options(rt, run_args, false);
  auto* rn = app.add_subcommand("run", "run experiments and print their acceptance tables");
  add_run_options(rn, run_args, true);

  std::string run_dir;
  auto* rp = app.add_subcommand("report", "acceptance table of a finished run directory");
  rp->add_option("--run-dir", run_dir, "run directory")->required();

  std::vector<int> ids;
  std::string configs_dir = SHOCKLAB_CONFIGS_DIR, acc_out = "acceptance_runs";
  int acc_jobs = 1;
  unsigned acc_seed = 1;
  auto* ac = app.add_subcommand("acceptance", "run the acceptance criteria table");
  ac->add_option("--criteria", ids, "criterion numbers (default all)")->delimiter(',');
  ac->add_option("--configs", configs_dir, "directory of bundled configs");
  ac->add_option("--out", acc_out, "output directory for experiment runs");
  ac->add_option("--jobs", acc_jobs, "concurrent experiment runs")->check(CLI::PositiveNumber);
  ac->add_option("--seed", acc_seed, "seed for perturbation placement jitter");
  ac->add_flag("-v,--verbose", verbose, "print every check");

  CLI11_PARSE(app, argc, argv);

  if (*vk) return acceptance_cmd(kernel_ids, configs_dir, acc_out, 1, acc_seed, verbose);
  if (*cm) return check_model(model_args);
  if (*pf) return profile_cmd(model_args, profile_out);
  if (*ev) return run_configs(run_args, View::kEvolve);
  if (*dc) return run_configs(run_args, View::kDecompose);
  if (*rt) return run_configs(run_args, View::kRates);
  if (*rn) return run_configs(run_args, View::kRun);
  if (*rp) {
    size_t need = 0;
    int rc = shocklab_emit_report(run_dir.c_str(), nullptr, 0, &need);
    if (rc) return report_error(rc, "report");
    std::string table(need, '\0');
    shocklab_emit_report(run_dir.c_str(), table.data(), need, &need);
    std::fputs(table.c_str(), stdout);
    return 0;
  }
  if (*ac) return acceptance_cmd(ids, configs_dir, acc_out, acc_jobs, acc_seed, verbose);
  return 0;
}
