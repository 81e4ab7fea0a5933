#pragma once

#include <map>
#include <string>
#include <vector>

#include "shocklab/core/asymptotics.hpp"
#include "shocklab/core/evolution.hpp"
#include "shocklab/core/models.hpp"

namespace shocklab::experiment {

using models::Vec;

enum class Kind { kConstant, kShock };

struct ExperimentConfig {
  std::string name;
  Kind kind = Kind::kShock;
  std::string model;
  std::map<std::string, std::string> model_params;  // frame_speed "auto" -> Rankine-Hugoniot
  Vec u_minus, u_plus;                               // equal for a constant state
  // perturbation: smooth bump with componentwise masses
  double bump_center = 0.0;
  double bump_half_width = 4.0;
  Vec bump_masses;
  double jitter = 0.0;  // placement jitter amplitude, scaled by a seeded uniform draw
  evolution::Grid1D grid;
  evolution::SchemeConfig scheme;
  bool reference_run = true;
  double t_final = 256.0;
  int per_octave = 4;  // geometric checkpoints between 1 and t_final
  double t_fit_min = 16.0;
  bool h3 = false;
  std::string source_text;  // canonical text the hash is taken over

  void validate() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string sha256_hex(const std::string& data);
std::string config_hash(const ExperimentConfig& c);

std::vector<double> checkpoints(const ExperimentConfig& c);

struct RateRow {
  std::string quantity;
  double p = 0.0;
  bool available = false;
  double exponent = 0.0, stderr_ = 0.0;
  double predicted = 0.0;
  std::string rule;  // "<=", "==", "<0"
  double threshold = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;
};

struct DecayReport {
  std::vector<RateRow> rows;
  const RateRow* find(const std::string& q, double p) const;
};

struct RunOptions {
  bool dry_run = false;
  unsigned long long seed = 1;
  bool write_files = true;
};

struct RunResult {
  int status = 0;
  std::string stage;  // failing stage when status != 0
  std::string message;
  std::string hash;
  std::string run_dir;
  std::map<std::string, double> metrics;
  asymptotics::Timeseries series;
  DecayReport report;
};

// Pipeline: model -> classify_shock -> profile -> family -> delta0 -> evolve -> decompose -> fit.
RunResult run_experiment(const ExperimentConfig& config, const std::string& out_dir,
                         const RunOptions& opt = {});

struct ReportRow {
  std::string criterion, measured, target, tolerance, verdict;
};

// Reads a completed run directory and rebuilds the acceptance table rows.
std::vector<ReportRow> emit_report(const std::string& run_dir);
std::string format_report(const std::vector<ReportRow>& rows);

// Predicted exponents and acceptance slack for a run of the given shape.
DecayReport build_decay_report(const asymptotics::Timeseries& ts, Kind kind, int n, int ell,
                               bool real_viscosity, bool has_phi, double t_fit_min);

}  // namespace shocklab::experiment
