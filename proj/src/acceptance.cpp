#include "shocklab/core/acceptance.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <regex>
#include <sstream>
#include <thread>

#include "shocklab/core/error.hpp"
#include "shocklab/core/evolution.hpp"
#include "shocklab/core/experiment.hpp"
#include "shocklab/core/greenfn.hpp"
#include "shocklab/core/kernels.hpp"
#include "shocklab/core/models.hpp"
#include "shocklab/core/numerics.hpp"
#include "shocklab/core/profile.hpp"

namespace shocklab::acceptance {

namespace fs = std::filesystem;
using models::Vec;

namespace {

std::string num(double v) {
  if (v == 0) v = 0;  // no "-0"
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

void add(CriterionResult& r, const std::string& name, double measured, const std::string& target,
         bool pass) {
  r.checks.push_back({name, measured, target, pass});
}

double spread(const std::vector<double>& v) {
  auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo;
}

// Built-in shocks used by the profile, kernel and solver criteria.
struct ShockCase {
  std::string model;
  Vec um, up;
};

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

std::vector<ShockCase> shock_cases() {
  const double s_ns = std::sqrt((1 - std::pow(1.5, -5.0 / 3.0)) / 0.5);
  return {
      {"burgers", vec({1.0}), vec({-1.0})},
      {"quadratic2x2", vec({1.0, 0.2}), vec({1.0 / 15, -11.0 / 15})},
      {"cubic", vec({1.0, 0.0}), vec({-1.0 / 3, 0.0})},
      {"isentropic_ns", vec({1.0, 0.0}), vec({1.5, -0.5 * s_ns})},
  };
}

models::ModelPtr framed_model(const ShockCase& c) {
  auto m = models::make_model(c.model, {});
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", models::shock_speed(*m, c.um, c.up));
  return models::make_model(c.model, {{"frame_speed", buf}});
}

// ---- 1: kernel suite -------------------------------------------------------

void kernel_suite(CriterionResult& r) {
  using namespace kernels;
  double mass_err = 0, semi_err = 0;
  for (double t : {0.25, 1.0, 4.0, 16.0, 64.0}) {
    const double w = 40 * std::sqrt(t);
    mass_err = std::max(mass_err, std::abs(integrate_panels([&](double x) { return heat_kernel(x, t); }, -w, w, 200) - 1));
  }
  for (double x : {0.0, 1.0, 3.0, -5.0}) {
    const double t = 1.0, s = 2.0;
    double conv = integrate_panels([&](double y) { return heat_kernel(x - y, t) * heat_kernel(y, s); }, -60, 60, 400);
    semi_err = std::max(semi_err, std::abs(conv - heat_kernel(x, t + s)));
  }
  add(r, "heat kernel mass error", mass_err, "< 1e-7", mass_err < 1e-7);
  add(r, "heat semigroup error", semi_err, "< 1e-7", semi_err < 1e-7);

  const DiffusionWaveParams dw{0.3, 1.0, 0.5, 0.7};
  double dw_err = 0;
  for (double t : {0.0, 4.0, 16.0, 64.0}) {
    const double c = dw.speed * (t + 1), w = 40 * std::sqrt(dw.beta * (t + 1));
    double m = integrate_panels([&](double x) { return diffusion_wave(dw, x, t); }, c - w, c + w, 400);
    dw_err = std::max(dw_err, std::abs(m - dw.mass));
  }
  add(r, "diffusion wave mass error", dw_err, "< 1e-7", dw_err < 1e-7);
  auto residual = [&](double h) {
    const double t = 3.0;
    double worst = 0;
    for (double x : linspace(-8, 12, 201)) {
      auto f = [&](double xx, double tt) { return diffusion_wave(dw, xx, tt); };
      double ft = (f(x, t + h) - f(x, t - h)) / (2 * h);
      double fx = (f(x + h, t) - f(x - h, t)) / (2 * h);
      double fxx = (f(x + h, t) - 2 * f(x, t) + f(x - h, t)) / (h * h);
      double f2x = (f(x + h, t) * f(x + h, t) - f(x - h, t) * f(x - h, t)) / (2 * h);
      worst = std::max(worst, std::abs(ft + dw.speed * fx - dw.beta * fxx + dw.gamma * f2x));
    }
    return worst;
  };
  const double order = std::log2(residual(0.2) / residual(0.1));
  add(r, "diffusion wave residual order", order, "2 +- 0.3", std::abs(order - 2) <= 0.3);

  const std::vector<double> ts{1, 4, 16, 64, 256};
  for (int k = 1; k <= 3; ++k) {
    std::vector<double> v;
    for (double t : ts) v.push_back(derivative_bound_ratio(k, t));
    add(r, "derivative bound C spread (order " + std::to_string(k) + ")", spread(v), "<= 1.01",
        spread(v) <= 1.01);
  }
  {
    std::vector<double> v;
    for (double t : ts) v.push_back(shifted_gaussian_ratio(t));
    add(r, "shifted Gaussian C spread", spread(v), "<= 1.01", spread(v) <= 1.01);
  }
  const double c0 = howard_constant(2.0, 0), c1 = howard_constant(2.0, 1);
  add(r, "Howard constant refinement change", std::abs(c1 / c0 - 1), "< 1e-3", std::abs(c1 / c0 - 1) < 1e-3);
  SampledFunction f;
  f.x = linspace(0, 40, 4001);
  for (double s : f.x) f.values.push_back(1 / (1 + s));
  bool all = true;
  double worst = 0;
  for (double z : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0}) {
    auto h = howard_bound_check(f, 1.0, z, 2.0);
    all = all && h.pass;
    worst = std::max(worst, h.ratio / h.c_omega);
  }
  add(r, "Howard ratio / C over dyadic z", worst, "<= 1", all);
}

// ---- 2: interaction problem ------------------------------------------------

void prop21_suite(CriterionResult& r) {
  using namespace kernels;
  QuadratureGrid grid;
  grid.nx = 401;
  const std::vector<double> ts{1, 4, 16, 32, 64, 128, 256};
  const double targets[3] = {-0.25, -0.5, -0.75};
  const double ps[3] = {1, 2, kInf};
  for (auto kind : {SourceKind::kHeatSquared, SourceKind::kHeatDx}) {
    const std::string tag = kind == SourceKind::kHeatSquared ? "K^2" : "K_x";
    auto rep = verify_prop21(grid, ts, kind);
    add(r, tag + " sup-ratio dyadic factor", rep.max_dyadic_factor, "< 2", rep.pass);
    add(r, tag + " refinement change", rep.refinement_change, "<= 0.05", rep.refinement_change <= 0.05);
    std::vector<double> tt(ts.begin() + 2, ts.end());
    std::vector<SampledFunction> ss(rep.snapshots.begin() + 2, rep.snapshots.end());
    for (int q = 0; q < 3; ++q) {
      const double slope = lp_norm_rates(tt, ss, ps[q]).exponent;
      const std::string name = tag + " L" + (q == 2 ? std::string("inf") : num(ps[q])) + " slope";
      if (kind == SourceKind::kHeatSquared)
        add(r, name, slope, num(targets[q]) + " +- 0.08", std::abs(slope - targets[q]) <= 0.08);
      else
        add(r, name, slope, "<= " + num(targets[q] + 0.08), slope <= targets[q] + 0.08);
    }
  }
}

// ---- 3: interaction lemmas -------------------------------------------------

void interaction_suite(CriterionResult& r) {
  using namespace kernels;
  InteractionParams opp;
  opp.a = 1.0;
  opp.b = -1.0;
  auto cross = interaction_lemma_check(InteractionMode::kCross, opp, 4, 256, 7);
  add(r, "opposite-speed cross power", cross.rate, "-0.5 +- 0.05", std::abs(cross.rate + 0.5) <= 0.05);
  InteractionParams prod;
  prod.a1 = 1.0;
  prod.a2 = -1.0;
  auto pr = interaction_lemma_check(InteractionMode::kProduct, prod, 1, 20, 9);
  add(r, "product exponential rate", pr.rate, "> 0", pr.rate > 0);
  InteractionParams wt;
  wt.a = 1.0;
  wt.decay_side = +1;
  auto we = interaction_lemma_check(InteractionMode::kWeighted, wt, 1, 20, 9);
  add(r, "weighted exponential rate", we.rate, "> 0", we.rate > 0);
  InteractionParams ex;
  ex.a = 1.0;
  auto ee = interaction_lemma_check(InteractionMode::kExponential, ex, 1, 20, 9);
  add(r, "exponential-weight rate", ee.rate, "> 0", ee.rate > 0);
}

// ---- 4: Green kernels ------------------------------------------------------

void green_suite(CriterionResult& r) {
  const ShockCase c = shock_cases()[1];
  auto model = framed_model(c);
  auto base = profile::solve_profile(*model, c.um, c.up);
  auto fam = profile::profile_family(model, base);
  std::vector<Vec> masses;
  for (int i = 0; i < fam.ell(); ++i) masses.push_back(fam.mass(i));
  auto spec = greenfn::make_kernel_spec(models::endstate_spectrum(*model, c.um),
                                        models::endstate_spectrum(*model, c.up), masses);
  add(r, "scattering residual", spec.scattering.max_residual, "< 1e-10",
      spec.scattering.max_residual < 1e-10);
  double jump = 0;
  for (int i = 0; i < spec.ell; ++i) {
    auto em = greenfn::eval_e_side(spec, i, 0.0, 1.0, greenfn::Side::kMinus);
    auto ep = greenfn::eval_e_side(spec, i, 0.0, 1.0, greenfn::Side::kPlus);
    jump = std::max(jump, (em - ep).cwiseAbs().maxCoeff());
  }
  add(r, "e_i jump at y = 0", jump, "< 1e-8", jump < 1e-8);
  for (double p : {1.0, 2.0, kInf}) {
    auto d = greenfn::verify_kernel_decay(spec, 0, p, 16, 256);
    const std::string pl = p == kInf ? "inf" : num(p);
    add(r, "e_y L" + pl + " slope", d.slope_ey, num(d.target_first) + " +- 0.08",
        std::abs(d.slope_ey - d.target_first) <= 0.08);
    add(r, "e_t L" + pl + " slope", d.slope_et, num(d.target_first) + " +- 0.08",
        std::abs(d.slope_et - d.target_first) <= 0.08);
    add(r, "e_ty L" + pl + " slope", d.slope_ety, num(d.target_mixed) + " +- 0.08",
        std::abs(d.slope_ety - d.target_mixed) <= 0.08);
  }
}

// ---- 5: profiles -----------------------------------------------------------

void profile_suite(CriterionResult& r) {
  for (const auto& c : shock_cases()) {
    auto model = framed_model(c);
    auto base = profile::solve_profile(*model, c.um, c.up);
    if (c.model == "burgers") {
      double err = 0;
      for (int i = 0; i < base.count; ++i)
        err = std::max(err, std::abs(base.values[i] + std::tanh(base.x(i) / 2)));
      add(r, "burgers tanh error", err, "< 1e-9", err < 1e-9);
    }
    auto tail = profile::tail_fit(base);
    const double rate = std::min(tail.alpha_minus, tail.alpha_plus);
    add(r, c.model + " profile tail rate", rate, "> 0", tail.ok && rate > 0);
    auto fam = profile::profile_family(model, base);
    double dir = kInf;
    for (int i = 0; i < fam.ell(); ++i) dir = std::min(dir, fam.direction_tail_rate(i));
    add(r, c.model + " direction tail rate", dir, "> 0", dir > 0);
    auto cls = models::classify_shock(models::endstate_spectrum(*model, c.um),
                                      models::endstate_spectrum(*model, c.up));
    add(r, c.model + " family ell (classified " + std::to_string(cls.ell) + ")", fam.ell(),
        "= " + std::to_string(cls.ell), fam.ell() == cls.ell);
  }
}

// ---- 6: solver -------------------------------------------------------------

void solver_suite(CriterionResult& r) {
  using namespace evolution;
  const Grid1D grid{-60, 60, 2401};
  for (const auto& c : shock_cases()) {
    auto model = framed_model(c);
    auto base = profile::solve_profile(*model, c.um, c.up);
    SchemeConfig sc;
    Solver solver(model, grid, sc, c.um, c.up);
    auto s0 = sample_state(grid, model->dim(), [&](double x) { return base.eval(x); });
    auto run = evolve(solver, s0, {10.0});
    double drift = 0;
    for (size_t j = 0; j < s0.u.size(); ++j)
      drift = std::max(drift, std::abs(run.snapshots[0].u[j] - s0.u[j]));
    add(r, c.model + " stationary drift (T = 10)", drift, "< 5e-5", drift < 5e-5);
    if (c.model == "quadratic2x2") {
      auto pert = sample_state(grid, 2, [&](double x) {
        Vec u = base.eval(x);
        double b = std::exp(-(x + 8) * (x + 8) / 4);
        u[0] += 0.02 * b;
        u[1] -= 0.01 * b;
        return u;
      });
      auto pr = evolve(solver, pert, {10.0});
      add(r, "perturbed shock mass defect", pr.mass_defect, "< 1e-10", pr.mass_defect < 1e-10);
    }
  }
  auto burgers = models::make_model("burgers", {});
  auto g0 = [](double x) { return vec({0.5 * std::exp(-x * x)}); };
  for (int order : {2, 4}) {
    SchemeConfig sc;
    sc.order = order;
    auto cr = refine_convergence(burgers, Grid1D{-20, 20, 257}, sc, g0, 1.0, 4);
    add(r, "refinement order (order-" + std::to_string(order) + " scheme)", cr.order[0], ">= 1.8",
        cr.order[0] >= 1.8);
  }
}

// ---- 7-11: experiments -----------------------------------------------------

struct Job {
  std::string key;     // unique run key
  std::string config;  // config file stem
  double t_final = 0;  // override when > 0
  std::string out;     // output root
};

std::string override_t_final(const std::string& text, double t) {
  static const std::regex line(R"((^|\n)(\s*t_final\s*=)[^\n]*)");
  char buf[40];
  std::snprintf(buf, sizeof buf, " %.17g", t);
  return std::regex_replace(text, line, std::string("$1$2") + buf);
}

std::vector<Job> jobs_for(int id, const Options& opt) {
  const std::string out = opt.out_dir;
  switch (id) {
    case 7: return {{"quadratic_constant", "quadratic_constant", 0, out}, {"burgers_constant", "burgers_constant", 0, out}};
    case 8: return {{"quadratic_lax", "quadratic_lax", 0, out}};
    case 9: return {{"cubic_overcompressive", "cubic_overcompressive", 0, out}};
    case 10: return {{"ns_real_viscosity", "ns_real_viscosity", 0, out}};
    case 11:
      return {{"determinism_a", "quadratic_lax", 16, out + "/determinism_a"},
              {"determinism_b", "quadratic_lax", 16, out + "/determinism_b"}};
    default: return {};
  }
}

experiment::RunResult run_job(const Job& job, const Options& opt) {
  const std::string path = opt.configs_dir + "/" + job.config + ".cfg";
  auto cfg = experiment::load_config(path);
  if (job.t_final > 0) cfg = experiment::parse_config(override_t_final(cfg.source_text, job.t_final));
  experiment::RunOptions ro;
  ro.seed = opt.seed;
  return experiment::run_experiment(cfg, job.out, ro);
}

void from_report(CriterionResult& r, const experiment::RunResult& run, const std::string& label) {
  if (run.status != 0) {
    add(r, label + " run failed at stage " + run.stage + ": " + run.message, run.status, "status 0", false);
    return;
  }
  for (const auto& row : experiment::emit_report(run.run_dir)) {
    double m = std::nan("");
    try {
      m = std::stod(row.measured);
    } catch (const std::exception&) {
      if (row.measured == "yes") m = 1;
      else if (row.measured == "no") m = 0;
    }
    add(r, row.criterion.substr(row.criterion.find(' ') + 1), m, row.target, row.verdict == "PASS");
  }
}

bool same_bytes(const fs::path& a, const fs::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  if (!fa || !fb) return false;
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  return sa.str() == sb.str();
}

void evaluate_experiment(int id, CriterionResult& r, const std::map<std::string, experiment::RunResult>& runs,
                         const Options& opt) {
  auto get = [&](const std::string& k) -> const experiment::RunResult& { return runs.at(k); };
  switch (id) {
    case 7:
      from_report(r, get("quadratic_constant"), "2x2 constant state");
      from_report(r, get("burgers_constant"), "scalar constant state");
      break;
    case 8: from_report(r, get("quadratic_lax"), "Lax"); break;
    case 9: from_report(r, get("cubic_overcompressive"), "overcompressive"); break;
    case 10: from_report(r, get("ns_real_viscosity"), "real viscosity"); break;
    case 11: {
      const auto& a = get("determinism_a");
      const auto& b = get("determinism_b");
      if (a.status != 0 || b.status != 0) {
        add(r, "determinism runs completed", 0, "both status 0", false);
        break;
      }
      int files = 0, equal = 0;
      for (const auto& e : fs::directory_iterator(a.run_dir)) {
        ++files;
        equal += same_bytes(e.path(), fs::path(b.run_dir) / e.path().filename());
      }
      int other = 0;
      for (const auto& e : fs::directory_iterator(b.run_dir)) other += e.is_regular_file();
      add(r, "byte-identical artifacts", equal, std::to_string(files) + " of " + std::to_string(files),
          files > 0 && equal == files && other == files);
      break;
    }
    default: break;
  }
  (void)opt;
}

}  // namespace

std::string criterion_title(int id) {
  switch (id) {
    case 1: return "kernel suite";
    case 2: return "interaction problem bounds and rates";
    case 3: return "interaction lemmas";
    case 4: return "Green kernels";
    case 5: return "profiles and families";
    case 6: return "solver conservation, drift and order";
    case 7: return "constant-state experiments";
    case 8: return "Lax shock experiment";
    case 9: return "overcompressive experiment";
    case 10: return "real-viscosity experiment";
    case 11: return "determinism";
    default: return "unknown";
  }
}

std::vector<CriterionResult> run_criteria(const std::vector<int>& ids, const Options& opt) {
  for (int id : ids)
    if (id < 1 || id > kCriterionCount) fail(ErrorCode::kInput, "unknown criterion " + std::to_string(id));
  // Experiment runs first, on a worker pool.
  std::vector<Job> jobs;
  for (int id : ids)
    for (auto& j : jobs_for(id, opt)) jobs.push_back(j);
  std::map<std::string, experiment::RunResult> runs;
  std::map<std::string, double> run_seconds;
  std::mutex mu;
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t k; (k = next++) < jobs.size();) {
      auto t0 = std::chrono::steady_clock::now();
      experiment::RunResult res;
      try {
        res = run_job(jobs[k], opt);
      } catch (const Error& e) {
        res.status = static_cast<int>(e.code());
        res.stage = "config";
        res.message = e.what();
      }
      double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::lock_guard<std::mutex> lock(mu);
      runs[jobs[k].key] = std::move(res);
      run_seconds[jobs[k].key] = sec;
    }
  };
  const int workers = std::max(1, std::min<int>(opt.jobs, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<CriterionResult> out;
  for (int id : ids) {
    CriterionResult r;
    r.id = id;
    r.title = criterion_title(id);
    auto t0 = std::chrono::steady_clock::now();
    try {
      switch (id) {
        case 1: kernel_suite(r); break;
        case 2: prop21_suite(r); break;
        case 3: interaction_suite(r); break;
        case 4: green_suite(r); break;
        case 5: profile_suite(r); break;
        case 6: solver_suite(r); break;
        default: evaluate_experiment(id, r, runs, opt); break;
      }
      r.pass = !r.checks.empty() &&
               std::all_of(r.checks.begin(), r.checks.end(), [](const Check& c) { return c.pass; });
    } catch (const Error& e) {
      r.error = std::string(error_name(e.code())) + ": " + e.what();
      r.pass = false;
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (const auto& j : jobs_for(id, opt)) r.seconds += run_seconds[j.key];
    out.push_back(std::move(r));
  }
  return out;
}

CriterionResult run_criterion(int id, const Options& opt) { return run_criteria({id}, opt).front(); }

std::string format_line(const CriterionResult& r) {
  char buf[256];
  int failed = 0;
  for (const auto& c : r.checks) failed += !c.pass;
  std::snprintf(buf, sizeof buf, "criterion %2d: %s  %s (%zu checks, %d failed, %.1fs)%s%s", r.id,
                r.pass ? "PASS" : "FAIL", r.title.c_str(), r.checks.size(), failed, r.seconds,
                r.error.empty() ? "" : "  error: ", r.error.c_str());
  return buf;
}

std::string format_details(const CriterionResult& r) {
  std::string out;
  char buf[512];
  for (const auto& c : r.checks) {
    std::snprintf(buf, sizeof buf, "    %-4s %-48s %-12s %s\n", c.pass ? "ok" : "FAIL", c.name.c_str(),
                  num(c.measured).c_str(), c.target.c_str());
    out += buf;
  }
  return out;
}

}  // namespace shocklab::acceptance
