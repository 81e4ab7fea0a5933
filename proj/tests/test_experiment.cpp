#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "shocklab/core/error.hpp"
#include "shocklab/core/experiment.hpp"

using namespace shocklab;
using namespace shocklab::experiment;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"(
[experiment]
name = small_burgers
kind = shock
t_final = 32
per_octave = 2
t_fit_min = 4
reference_run = true

[model]
name = burgers
frame_speed = auto

[endstates]
u_minus = 1
u_plus = -1

[perturbation]
center = -5
half_width = 3
masses = 0.02

[grid]
x_min = -40
x_max = 40
nx = 801
)";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string bundled(const std::string& name) { return std::string(SHOCKLAB_CONFIGS_DIR) + "/" + name + ".cfg"; }

int code_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return static_cast<int>(e.code());
  }
  return 0;
}

}  // namespace

TEST_CASE("config parsing and validation") {
  auto c = parse_config(kSmall);
  CHECK(c.name == "small_burgers");
  CHECK(c.kind == Kind::kShock);
  CHECK(c.grid.nx == 801);
  CHECK(c.model_params.at("frame_speed") == "auto");
  const int cfg = static_cast<int>(ErrorCode::kConfig);
  CHECK(code_of(std::string(kSmall) + "\n[extra]\na = 1\n") == cfg);
  CHECK(code_of(std::regex_replace(std::string(kSmall), std::regex("per_octave"), "octaves")) == cfg);
  CHECK(code_of(std::regex_replace(std::string(kSmall), std::regex("nx = 801"), "nx = many")) == cfg);
  CHECK(code_of(std::regex_replace(std::string(kSmall), std::regex("center = -5"), "center = -39")) == cfg);
  CHECK(code_of(std::regex_replace(std::string(kSmall), std::regex("kind = shock"), "kind = constant")) == cfg);
  CHECK(code_of(std::regex_replace(std::string(kSmall), std::regex("masses = 0.02"), "masses = 0.02, 0.1")) == cfg);
}

TEST_CASE("every bundled config parses") {
  for (const char* n : {"burgers_lax", "quadratic_constant", "burgers_constant", "quadratic_lax",
                        "cubic_overcompressive", "ns_real_viscosity", "undercompressive"})
    CHECK_NOTHROW(load_config(bundled(n)));
}

TEST_CASE("sha256 and checkpoint schedule") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  auto c = parse_config(kSmall);
  auto ts = checkpoints(c);
  CHECK(ts.size() == 11);
  CHECK(ts.front() == 1.0);
  CHECK(ts.back() == 32.0);
  c.t_final = 256;
  c.per_octave = 4;
  CHECK(checkpoints(c).size() == 33);
}

TEST_CASE("dry run writes nothing; undercompressive endstates fail at classification") {
  const fs::path out = "exp_dry";
  fs::remove_all(out);
  RunOptions opt;
  opt.dry_run = true;
  auto r = run_experiment(parse_config(kSmall), out.string(), opt);
  CHECK(r.status == 0);
  CHECK_FALSE(fs::exists(out));
  auto u = run_experiment(load_config(bundled("undercompressive")), out.string(), {});
  CHECK(u.status == static_cast<int>(ErrorCode::kUnsupported));
  CHECK(u.stage == "classify_shock");
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("runs are deterministic and every artifact carries the config hash") {
  const fs::path a = "exp_a", b = "exp_b";
  fs::remove_all(a);
  fs::remove_all(b);
  auto cfg = parse_config(kSmall);
  auto ra = run_experiment(cfg, a.string(), {});
  auto rb = run_experiment(cfg, b.string(), {});
  REQUIRE(ra.status == 0);
  REQUIRE(rb.status == 0);
  int files = 0;
  for (const auto& e : fs::directory_iterator(ra.run_dir)) {
    ++files;
    const std::string text = slurp(e.path());
    CHECK(text == slurp(fs::path(rb.run_dir) / e.path().filename()));
    CHECK(text.find(ra.hash) != std::string::npos);
  }
  CHECK(files == 7);
  CHECK(ra.metrics.at("initial_v_mass_ratio") < 1e-7);
  CHECK(ra.metrics.at("delta0_1") == doctest::Approx(-0.01).epsilon(1e-4));
  auto rows = emit_report(ra.run_dir);
  CHECK(rows.size() == 8);
  for (const auto& row : rows) CHECK(row.verdict != "N/A");
  CHECK(format_report(rows) == format_report(emit_report(rb.run_dir)));
}

TEST_CASE("missing artifacts make an incomplete run") {
  fs::create_directories("exp_empty");
  try {
    emit_report("exp_empty");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIncompleteRun);
  }
}

TEST_CASE("tracking loss marks the shift rows unavailable") {
  asymptotics::Timeseries ts;
  ts.times = {0, 1, 2, 4, 8, 16, 32, 64};
  for (double p : {1.0, 2.0, kInf}) {
    asymptotics::NormRow v{"v", p, ts.times, {}}, f{"phi", p, ts.times, {}};
    for (double t : ts.times) {
      v.values.push_back(std::pow(t + 1, -1.0));
      f.values.push_back(std::pow(t + 1, -0.5 * (1 - 1 / p)));
    }
    ts.rows.push_back(v);
    ts.rows.push_back(f);
  }
  ts.tracking_lost = true;
  ts.tracking_message = "least-squares shift diverged";
  auto rep = build_decay_report(ts, Kind::kShock, 2, 1, false, true, 2);
  const auto* d = rep.find("delta", 0);
  REQUIRE(d != nullptr);
  CHECK_FALSE(d->available);
  CHECK(d->note.find("N/A") == 0);
  CHECK(rep.find("v", 2)->available);
}

TEST_CASE("bundled Burgers shock run populates shift and residual rates") {
  auto base = load_config(bundled("burgers_lax"));
  auto text = std::regex_replace(base.source_text, std::regex("t_final = 256"), "t_final = 32");
  auto r = run_experiment(parse_config(text), "exp_bundled", {});
  REQUIRE(r.status == 0);
  for (const char* q : {"delta", "v"}) {
    bool found = false;
    for (const auto& row : r.report.rows)
      if (row.quantity == q) {
        found = true;
        CHECK(row.available);
        CHECK(row.exponent < 0);
      }
    CHECK(found);
  }
}
