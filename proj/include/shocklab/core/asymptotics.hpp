#pragma once

#include <memory>
#include <string>
#include <vector>

#include "shocklab/core/evolution.hpp"
#include "shocklab/core/greenfn.hpp"
#include "shocklab/core/kernels.hpp"
#include "shocklab/core/models.hpp"
#include "shocklab/core/profile.hpp"

namespace shocklab::asymptotics {

using models::Mat;
using models::Vec;
using greenfn::Side;

// Background state: a constant state (no family) or a stationary shock with its family.
struct Setting {
  models::ModelPtr model;
  models::EndstateSpectrum minus, plus;
  models::CouplingTensors coupling_minus, coupling_plus;
  std::shared_ptr<const profile::ProfileFamily> family;  // null for a constant state

  bool shock() const { return family != nullptr; }
  int dim() const { return model->dim(); }
  int ell() const { return family ? family->ell() : 0; }
};

Setting constant_setting(models::ModelPtr model, const Vec& u);
Setting shock_setting(models::ModelPtr model, std::shared_ptr<const profile::ProfileFamily> family);

// Background ū^delta sampled at xs (constant state ignores delta).
std::vector<double> background(const Setting& s, const Vec& delta, const std::vector<double>& xs);

struct OutgoingMode {
  Side side = Side::kMinus;
  int k = 0;
  double speed = 0.0, beta = 1.0, gamma = 0.0;
  Vec r;
  Eigen::RowVectorXd l;
};

// Shock: a_k^- < 0 and a_k^+ > 0. Constant state: every field.
std::vector<OutgoingMode> outgoing_modes(const Setting& s);

struct MassDecomposition {
  std::vector<OutgoingMode> modes;
  std::vector<double> m_out;      // masses before the delta0 shift
  Vec c_delta;                    // coefficients on the family masses
  Vec delta0;
  std::vector<double> m_shifted;  // m'_j after the shift
  double residual_c = 0.0;        // |c| after the shift
  double condition = 1.0;
  int newton_iterations = 0;
};

// Expresses `integral` = ∫(u0 - ū) dx in the basis {outgoing r} ∪ {∫∂ū/∂δ_i}.
MassDecomposition project_mass(const Setting& s, const Vec& integral);

// ∫(ū^delta - ū) dx on the grid xs (trapezoid).
Vec family_mass_shift(const Setting& s, const Vec& delta, const std::vector<double>& xs);

// Newton iteration for delta0 so that ∫(u0 - ū^{delta0}) has no family component.
// `xs`/`u0` are the computational grid and the initial data (n values per node).
MassDecomposition compute_delta0(const Setting& s, const std::vector<double>& xs,
                                 const std::vector<double>& u0, double tol = 1e-8);

struct DiffusionWaveSet {
  std::vector<kernels::DiffusionWaveParams> waves;
  std::vector<Vec> carriers;

  int n() const { return carriers.empty() ? 0 : static_cast<int>(carriers[0].size()); }
  // φ(·, t) at xs, n values per point.
  std::vector<double> sample(const std::vector<double>& xs, double t, int n) const;
  std::vector<double> sample_mode(size_t j, const std::vector<double>& xs, double t) const;
};

// Linearly degenerate modes (gamma = 0) reduce to m K(x - a(t+1), beta (t+1)).
DiffusionWaveSet build_phi(const MassDecomposition& d);

struct DeltaFit {
  Vec delta;
  int iterations = 0;
  double objective = 0.0;
};

// argmin_delta |w - ū^{delta0+delta} - φ|_{L2} by Gauss-Newton seeded at `seed`.
DeltaFit extract_delta(const Setting& s, const std::vector<double>& xs,
                       const std::vector<double>& w, const std::vector<double>& phi,
                       const Vec& delta0, const Vec& seed, int max_iterations = 50);

struct NormRow {
  std::string quantity;  // "v", "phi", "delta", "delta_dot", "h3", "mass"
  double p = 0.0;        // 1, 2, inf; 0 when not a norm
  std::vector<double> times, values;
};

struct Timeseries {
  std::vector<double> times;
  std::vector<Vec> delta;
  std::vector<Vec> delta_dot;
  std::vector<NormRow> rows;
  double initial_v_mass = 0.0;   // max_k |∫v(·,0) dx|
  double initial_l1 = 0.0;       // |u0 - ū|_{L1}
  std::vector<std::vector<double>> mode_masses;  // [mode][checkpoint] windowed masses
  std::vector<double> h3;        // discrete H3 of v per checkpoint (when requested)
  double h3_richardson = 0.0;    // max relative change of H3 under a 2h stencil
  bool tracking_lost = false;
  std::string tracking_message;
  std::vector<std::vector<double>> v_final;  // v at the last checkpoint, for reporting

  const NormRow* row(const std::string& q, double p) const;
};

struct DecomposeOptions {
  bool h3 = false;
  const std::vector<evolution::FieldState>* reference = nullptr;  // evolved ū^{delta0}
};

// snapshots[0] must be the initial state at t = 0.
Timeseries decompose_timeseries(const Setting& s, const std::vector<double>& xs,
                                const std::vector<evolution::FieldState>& snapshots,
                                const MassDecomposition& d, const DiffusionWaveSet& phi,
                                const DecomposeOptions& opt = {});

// Power law over t >= t_fit_min; at least 5 points.
RateFit fit_rate(const std::vector<double>& t, const std::vector<double>& v, double t_fit_min);

// sqrt(sum_{r<=order} |D^r v|_{L2}^2) with centered differences at spacing `stride*dx`.
double sobolev_norm(const std::vector<double>& v, int n, double dx, int order, int stride = 1);

struct SobolevDiagnostic {
  std::vector<double> times, norms;
  bool non_increasing = false;
  double richardson = 0.0;
};

// Envelope test: for every t_i >= t_min, later values stay below (1 + tol) times H3(t_i).
SobolevDiagnostic sobolev_diagnostic(const std::vector<double>& times,
                                     const std::vector<double>& norms, double t_min = 10.0,
                                     double tol = 0.05);

struct AntiderivativeCheck {
  double v_mass = 0.0, V_l1 = 0.0, xv_l1 = 0.0;
  bool pass = false;
};

AntiderivativeCheck antiderivative_bound(const std::vector<double>& xs, const std::vector<double>& v);

// A smooth compactly supported bump with the given componentwise masses.
std::vector<double> bump(const std::vector<double>& xs, double center, double half_width,
                         const Vec& masses);

}  // namespace shocklab::asymptotics
