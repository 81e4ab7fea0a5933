#pragma once

#include <span>
#include <string>
#include <vector>

#include "shocklab/core/numerics.hpp"

namespace shocklab::kernels {

// A Gaussian packet K(x - a(t+t0), beta (t+t0)).
struct GaussianSignal {
  double speed = 0.0;
  double beta = 1.0;
  double start_time_shift = 0.0;
};

struct DiffusionWaveParams {
  double mass = 0.0;
  double beta = 1.0;
  double speed = 0.0;
  double gamma = 0.0;
};

struct QuadratureGrid {
  double x_min = -1.0;
  double x_max = 1.0;
  int nx = 201;
  std::vector<double> times;
  int substeps = 64;             // uniform cells of [0, t] between the graded ends
  double points_per_width = 8;   // inner y nodes per Gaussian standard deviation
  bool auto_widen = true;
  double tail_tol = 1e-12;
};

// One refinement level: doubles the time cells and the inner y density.
QuadratureGrid refined(const QuadratureGrid& grid);

struct SampledFunction {
  std::vector<double> x;
  std::vector<double> values;
  double dx() const { return x.size() > 1 ? x[1] - x[0] : 0.0; }
};

double heat_kernel(double x, double t);
double heat_kernel_dx(double x, double t);
double heat_kernel_dxx(double x, double t);
double heat_kernel_dxxx(double x, double t);
double gaussian_signal(const GaussianSignal& g, double x, double t);

// Self-similar viscous Burgers wave with shifted time t+1 and frame x - a(t+1):
// phi_t + a phi_x - beta phi_xx = -gamma (phi^2)_x, mass m.
double diffusion_wave(const DiffusionWaveParams& p, double x, double t);
double diffusion_wave_dx(const DiffusionWaveParams& p, double x, double t);

enum class SourceKind { kDiffusionWaveSquared, kDiffusionWaveDx, kHeatSquared, kHeatDx };

struct Source {
  SourceKind kind = SourceKind::kHeatSquared;
  double speed = 0.0;          // heat sources: K(y - speed*s, s)
  DiffusionWaveParams wave{};  // diffusion-wave sources
  double value(double y, double s) const;
  double center(double s) const;
  double width(double s) const;  // standard deviation scale
  bool identically_zero() const;
};

enum class KernelForm { kValue, kDerivative };

// u(x,t) = int_0^t int k(x - y - a(t-s), beta(t-s)) S(y,s) dy ds where k is the
// Gaussian (kValue) or its derivative in the first argument (kDerivative).
double duhamel_point(const GaussianSignal& kernel, const Source& source,
                     const QuadratureGrid& grid, double x, double t,
                     KernelForm form = KernelForm::kDerivative);

// x grid covering the solution at time t to tail_tol; throws kConfig when the
// grid is fixed and too narrow.
std::vector<double> solution_grid(const GaussianSignal& kernel, const Source& source,
                                  const QuadratureGrid& grid, double t);

SampledFunction duhamel_convolve(const GaussianSignal& kernel, const Source& source,
                                 const QuadratureGrid& grid, double t,
                                 KernelForm form = KernelForm::kDerivative);

// Pointwise envelope with unit constant for the canonical interaction problem.
double prop21_bound(double x, double t);

struct Prop21Row {
  double t, x, u, bound, ratio;
};

struct Prop21Report {
  SourceKind source = SourceKind::kHeatSquared;
  std::vector<double> times;
  std::vector<double> sup_ratio;          // coarse level, per time
  std::vector<double> sup_ratio_refined;  // one refinement, per time
  double fitted_c = 0.0;
  double max_dyadic_factor = 0.0;   // largest sup-ratio change between neighbouring times
  double refinement_change = 0.0;   // max relative change of sup ratio under refinement
  std::vector<Prop21Row> table;
  std::vector<SampledFunction> snapshots;
  bool pass = false;
};

Prop21Report verify_prop21(const QuadratureGrid& grid, std::span<const double> t_list,
                           SourceKind source = SourceKind::kHeatSquared);

// Slope of log |u(.,t)|_p against log t.
RateFit lp_norm_rates(std::span<const double> times,
                      std::span<const SampledFunction> snapshots, double p);

struct HowardResult {
  double lhs = 0, rhs = 0, ratio = 0, c_omega = 0;
  bool pass = false;
};

// f sampled on a uniform grid starting at sigma = 0.
HowardResult howard_bound_check(const SampledFunction& f, double a, double z, double omega);
double howard_lhs(const SampledFunction& f, double a, double z, int panels = 400);
// Max ratio over the module calibration set; `level` doubles the quadrature panels.
double howard_constant(double omega, int level = 0);

// max over sampled x and 0 <= s <= sqrt(t) of exp(-(x +- s)^2/4t) / exp(-x^2/8t).
double shifted_gaussian_ratio(double t, int nx = 801, int ns = 41);

// max over x of t^{k/2} |d^k_x g(x,t)| / g(x,2t), k in {1,2,3}.
double derivative_bound_ratio(int order, double t, int nx = 2001);

enum class InteractionMode { kProduct, kWeighted, kCross, kExponential };

struct InteractionParams {
  double a1 = 1.0, a2 = -1.0, beta1 = 1.0, beta2 = 1.0;  // product
  double p = kInf;                                         // product / weighted
  double a = 1.0, b = -1.0;                                // weighted, cross, exponential
  int decay_side = +1;  // weighted: side on which the weight decays exponentially
  int substeps = 64;
  double points_per_width = 8;
};

struct InteractionResult {
  InteractionMode mode = InteractionMode::kProduct;
  std::vector<double> times;
  std::vector<double> values;
  bool exponential = true;
  double rate = 0.0;         // eta for exponential laws, power otherwise
  double rate_stderr = 0.0;
  bool pass = false;
};

InteractionResult interaction_lemma_check(InteractionMode mode, const InteractionParams& params,
                                          double t_start, double t_end, int count = 9);

std::string to_string(SourceKind kind);
std::string to_string(InteractionMode mode);

}  // namespace shocklab::kernels
