#pragma once

#include <vector>

#include "shocklab/core/models.hpp"

namespace shocklab::greenfn {

using models::Mat;
using models::Vec;
using RowVec = Eigen::RowVectorXd;

enum class Side { kMinus, kPlus };

struct CharacteristicField {
  Side side = Side::kMinus;
  int k = 0;
  double speed = 0.0;
  double beta = 1.0;
  RowVec l;
  Vec r;
};

std::vector<CharacteristicField> fields_of(const models::EndstateSpectrum& s, Side side);

// Coefficients of `incoming` in the basis {outgoing minus} U {outgoing plus} U {masses},
// in that order. Throws kD2Violation when the basis condition number exceeds max_condition.
Vec solve_scattering(const std::vector<Vec>& outgoing_minus, const std::vector<Vec>& outgoing_plus,
                     const std::vector<Vec>& delta_masses, const Vec& incoming,
                     double* residual = nullptr, double max_condition = 1e12);

double basis_condition(const Mat& basis);

struct ScatteringSolution {
  int n = 0;
  int ell = 0;
  std::vector<int> out_minus;  // field indices k with a_k^- < 0
  std::vector<int> out_plus;   // a_k^+ > 0
  std::vector<int> in_minus;   // a_k^- > 0
  std::vector<int> in_plus;    // a_k^+ < 0
  Mat basis;
  // Row q holds the coefficient vector for in_minus[q] / in_plus[q].
  std::vector<Vec> coeff_minus;
  std::vector<Vec> coeff_plus;
  std::vector<RowVec> pi;      // rows of basis^{-1} belonging to the mass columns
  double max_residual = 0.0;   // reconstruction residual over all incoming modes
  double pi_mismatch = 0.0;    // max |sum c l (minus) - sum c l (plus)|
  double condition = 0.0;

  // c^{0,i}_{k,side} and c^{j,out_side}_{k,side}
  double c_stationary(Side side, int q, int i) const;
  double c_out(Side side, int q, Side out_side, int j) const;
};

struct EKernelSpec {
  int n = 0;
  int ell = 0;
  std::vector<CharacteristicField> minus, plus;
  std::vector<Vec> delta_masses;
  ScatteringSolution scattering;
};

EKernelSpec make_kernel_spec(const models::EndstateSpectrum& minus,
                             const models::EndstateSpectrum& plus,
                             const std::vector<Vec>& delta_masses);

// e_i(y,t), a covector; i is 0-based.
RowVec eval_e(const EKernelSpec& spec, int i, double y, double t);
// The half-line formula for `side`, evaluated at any y (used for one-sided differences).
RowVec eval_e_side(const EKernelSpec& spec, int i, double y, double t, Side side);

// S(x,t;y); zero for t < 1.
Mat eval_S(const EKernelSpec& spec, double x, double t, double y);

// Effective diffusion and centre of a transmitted/reflected Gaussian (source side
// minus, y <= 0).
double beta_bar(double x, double t, double y, double a_j, double beta_j, double a_k, double beta_k,
                Side out_side);
double z_jk(double y, double t, double a_j, double a_k);

struct KernelDecay {
  double p = 1.0;
  double slope_ey = 0.0, slope_et = 0.0, slope_ety = 0.0;
  double target_first = 0.0, target_mixed = 0.0;
  bool richardson_ok = true;
  bool pass = false;
};

KernelDecay verify_kernel_decay(const EKernelSpec& spec, int i, double p, double t_start,
                                double t_end, int count = 6);

// |int S(.,t;y) f(y) dy|_{L^p} for a unit-mass Gaussian bump f centred at y0 < 0.
double s_bump_norm(const EKernelSpec& spec, double t, double p, double y0 = -5.0,
                   double width = 1.0);

struct BumpDecay {
  std::vector<double> times, norms;
  double slope = 0.0;
  double target = 0.0;
  double fitted_c = 0.0;  // max of norm * t^{-target}
  double c_growth = 0.0;  // late-half max over early-half max
  bool pass = false;
};

BumpDecay verify_s_bump_decay(const EKernelSpec& spec, double p, double t_start, double t_end,
                              int count = 6);

}  // namespace shocklab::greenfn
