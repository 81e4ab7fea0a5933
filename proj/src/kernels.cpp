#include "shocklab/core/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <boost/math/special_functions/erf.hpp>

#include "shocklab/core/error.hpp"

namespace shocklab::kernels {

namespace {

constexpr double kWidthCut = 12.0;  // inner integrals cut at 12 standard deviations

void require_positive_time(double t, const char* who) {
  if (!(t > 0)) fail(ErrorCode::kDomain, std::string(who) + ": time must be positive");
}

// Gaussian K(z, beta*tau) and its derivative in z.
inline double gauss(double z, double bt) {
  return std::exp(-z * z / (4 * bt)) / std::sqrt(4 * kPi * bt);
}
inline double gauss_dz(double z, double bt) { return -z / (2 * bt) * gauss(z, bt); }

double tail_sigmas(double tail_tol) {
  return std::sqrt(2.0) * boost::math::erfc_inv(tail_tol);
}

// Time nodes on [0, t]: geometric grading from 1e-3 t near both ends, uniform inside.
std::vector<double> time_nodes(double t, int substeps) {
  const double h = t / substeps;
  const double h_min = 1e-3 * t;
  std::vector<double> head{0.0};
  for (double s = h_min; s < h * (1 - 1e-12); s *= 2) head.push_back(s);
  std::vector<double> nodes = head;
  for (int k = 1; k < substeps; ++k) nodes.push_back(k * h);
  for (auto it = head.rbegin(); it != head.rend(); ++it) nodes.push_back(t - *it);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end(),
                          [&](double a, double b) { return std::abs(a - b) < 1e-14 * t; }),
              nodes.end());
  return nodes;
}

}  // namespace

QuadratureGrid refined(const QuadratureGrid& grid) {
  QuadratureGrid out = grid;
  out.substeps *= 2;
  out.points_per_width *= 2;
  return out;
}

double heat_kernel(double x, double t) {
  require_positive_time(t, "heat_kernel");
  return gauss(x, t);
}

double heat_kernel_dx(double x, double t) {
  require_positive_time(t, "heat_kernel_dx");
  return gauss_dz(x, t);
}

double heat_kernel_dxx(double x, double t) {
  require_positive_time(t, "heat_kernel_dxx");
  return (x * x / (4 * t * t) - 1 / (2 * t)) * gauss(x, t);
}

double heat_kernel_dxxx(double x, double t) {
  require_positive_time(t, "heat_kernel_dxxx");
  return (-x * x * x / (8 * t * t * t) + 3 * x / (4 * t * t)) * gauss(x, t);
}

double gaussian_signal(const GaussianSignal& g, double x, double t) {
  double tau = t + g.start_time_shift;
  if (!(tau > 0)) fail(ErrorCode::kDomain, "gaussian_signal: shifted time must be positive");
  if (!(g.beta > 0)) fail(ErrorCode::kDomain, "gaussian_signal: beta must be positive");
  return gauss(x - g.speed * tau, g.beta * tau);
}

double diffusion_wave(const DiffusionWaveParams& p, double x, double t) {
  if (!(t > -1)) fail(ErrorCode::kDomain, "diffusion_wave: requires t > -1");
  if (!(p.beta > 0)) fail(ErrorCode::kDomain, "diffusion_wave: beta must be positive");
  if (p.mass == 0) return 0.0;
  const double tau = t + 1;
  const double z = x - p.speed * tau;
  const double q = p.gamma * p.mass / p.beta;
  if (q == 0) return p.mass * gauss(z, p.beta * tau);
  const double xi = z / std::sqrt(4 * p.beta * tau);
  const double big_n = std::expm1(q);
  const double m_eff = p.beta * big_n / p.gamma;
  return m_eff * std::exp(-xi * xi) / std::sqrt(4 * kPi * p.beta * tau) /
         (1 + 0.5 * big_n * std::erfc(xi));
}

double diffusion_wave_dx(const DiffusionWaveParams& p, double x, double t) {
  if (!(t > -1)) fail(ErrorCode::kDomain, "diffusion_wave_dx: requires t > -1");
  if (p.mass == 0) return 0.0;
  const double tau = t + 1;
  const double kappa = 1 / std::sqrt(4 * p.beta * tau);
  const double xi = (x - p.speed * tau) * kappa;
  const double q = p.gamma * p.mass / p.beta;
  const double phi = diffusion_wave(p, x, t);
  if (q == 0) return phi * kappa * (-2 * xi);
  const double big_n = std::expm1(q);
  const double denom = 1 + 0.5 * big_n * std::erfc(xi);
  return phi * kappa * (-2 * xi + big_n * std::exp(-xi * xi) / (std::sqrt(kPi) * denom));
}

double Source::value(double y, double s) const {
  switch (kind) {
    case SourceKind::kHeatSquared: {
      double k = gauss(y - speed * s, s);
      return k * k;
    }
    case SourceKind::kHeatDx:
      return gauss_dz(y - speed * s, s);
    case SourceKind::kDiffusionWaveSquared: {
      double phi = diffusion_wave(wave, y, s);
      return phi * phi;
    }
    case SourceKind::kDiffusionWaveDx:
      return diffusion_wave_dx(wave, y, s);
  }
  return 0.0;
}

double Source::center(double s) const {
  switch (kind) {
    case SourceKind::kHeatSquared:
    case SourceKind::kHeatDx:
      return speed * s;
    default:
      return wave.speed * (s + 1);
  }
}

double Source::width(double s) const {
  switch (kind) {
    case SourceKind::kHeatSquared:
      return std::sqrt(s);
    case SourceKind::kHeatDx:
      return std::sqrt(2 * s);
    default:
      return std::sqrt(2 * wave.beta * (s + 1));
  }
}

bool Source::identically_zero() const {
  return (kind == SourceKind::kDiffusionWaveSquared || kind == SourceKind::kDiffusionWaveDx) &&
         wave.mass == 0;
}

namespace {

// Inner integral over y at fixed s, kernel age tau > 0.
double inner_integral(const GaussianSignal& kernel, const Source& source, double ppw,
                      double x, double s, double tau, KernelForm form) {
  const double bt = kernel.beta * tau;
  const double sig_k = std::sqrt(2 * bt);
  const double yc = x - kernel.speed * tau;
  const double sig_s = source.width(s);
  const double cs = source.center(s);
  const double lo = std::max(cs - kWidthCut * sig_s, yc - kWidthCut * sig_k);
  const double hi = std::min(cs + kWidthCut * sig_s, yc + kWidthCut * sig_k);
  if (!(hi > lo)) return 0.0;
  const double h_target = std::min(sig_s, sig_k) / ppw;
  const int n = std::max(8, static_cast<int>(std::ceil((hi - lo) / h_target)));
  const double h = (hi - lo) / n;
  double sum = 0.0;
  for (int j = 0; j <= n; ++j) {
    double y = lo + j * h;
    double z = x - y - kernel.speed * tau;
    double k = form == KernelForm::kValue ? gauss(z, bt) : gauss_dz(z, bt);
    double w = (j == 0 || j == n) ? 0.5 : 1.0;
    sum += w * k * source.value(y, s);
  }
  return sum * h;
}

}  // namespace

double duhamel_point(const GaussianSignal& kernel, const Source& source,
                     const QuadratureGrid& grid, double x, double t, KernelForm form) {
  require_positive_time(t, "duhamel_point");
  if (!(kernel.beta > 0)) fail(ErrorCode::kDomain, "duhamel_point: kernel beta must be positive");
  if (source.identically_zero()) return 0.0;
  const std::vector<double> s = time_nodes(t, grid.substeps);
  const size_t m = s.size();
  // J(s) = sqrt(s) I(s) is smooth for the singular heat sources; product rule with
  // weight s^{-1/2} and J linear on each cell.
  std::vector<double> jv(m);
  for (size_t k = 1; k < m; ++k) {
    double tau = std::max(t - s[k], 1e-9 * t);
    jv[k] = std::sqrt(s[k]) *
            inner_integral(kernel, source, grid.points_per_width, x, s[k], tau, form);
  }
  jv[0] = 2 * jv[1] - jv[2];
  double total = 0.0;
  for (size_t k = 0; k + 1 < m; ++k) {
    double a = s[k], b = s[k + 1];
    double w0 = 2 * (std::sqrt(b) - std::sqrt(a));
    double w1 = (2.0 / 3.0) * (b * std::sqrt(b) - a * std::sqrt(a));
    double wa = (b * w0 - w1) / (b - a);
    double wb = (w1 - a * w0) / (b - a);
    total += wa * jv[k] + wb * jv[k + 1];
  }
  return total;
}

std::vector<double> solution_grid(const GaussianSignal& kernel, const Source& source,
                                  const QuadratureGrid& grid, double t) {
  if (grid.nx < 2) fail(ErrorCode::kConfig, "quadrature grid needs nx >= 2");
  if (!(grid.x_max > grid.x_min)) fail(ErrorCode::kConfig, "quadrature grid needs x_max > x_min");
  const double z = tail_sigmas(grid.tail_tol);
  const double sig = std::sqrt(source.width(t) * source.width(t) + 2 * kernel.beta * t);
  const double half = std::max(z * sig, 8 * std::sqrt(std::max(kernel.beta, 1.0) * t));
  const double c0 = source.center(0) + kernel.speed * t;
  const double c1 = source.center(t);
  const double lo = std::min(c0, c1) - half;
  const double hi = std::max(c0, c1) + half;
  if (grid.auto_widen)
    return linspace(std::min(lo, grid.x_min), std::max(hi, grid.x_max), grid.nx);
  if (grid.x_min > lo || grid.x_max < hi)
    fail(ErrorCode::kConfig, "quadrature grid too narrow: Gaussian tail mass exceeds tail_tol");
  return linspace(grid.x_min, grid.x_max, grid.nx);
}

SampledFunction duhamel_convolve(const GaussianSignal& kernel, const Source& source,
                                 const QuadratureGrid& grid, double t, KernelForm form) {
  if (!grid.times.empty() && t < grid.times.front() * (1 - 1e-12))
    fail(ErrorCode::kDomain, "duhamel_convolve: t below the smallest time node");
  SampledFunction out;
  out.x = solution_grid(kernel, source, grid, t);
  out.values.resize(out.x.size());
  for (size_t i = 0; i < out.x.size(); ++i)
    out.values[i] = duhamel_point(kernel, source, grid, out.x[i], t, form);
  return out;
}

double prop21_bound(double x, double t) {
  require_positive_time(t, "prop21_bound");
  const double rt = std::sqrt(t);
  double b = std::pow(t, -0.25) * (gauss(x, 4 * t) + gauss(x - t, 4 * t));
  if (x >= rt && x <= t - rt) b += 1 / (t * std::sqrt(x)) + 1 / (rt * (t - x));
  return b;
}

namespace {

double sup_ratio(const SampledFunction& u, double t, std::vector<Prop21Row>* rows) {
  double bmax = 0;
  for (double x : u.x) bmax = std::max(bmax, prop21_bound(x, t));
  double best = 0;
  for (size_t i = 0; i < u.x.size(); ++i) {
    double b = prop21_bound(u.x[i], t);
    if (b < 1e-10 * bmax) continue;
    double r = std::abs(u.values[i]) / b;
    best = std::max(best, r);
    if (rows) rows->push_back({t, u.x[i], u.values[i], b, r});
  }
  return best;
}

}  // namespace

Prop21Report verify_prop21(const QuadratureGrid& grid, std::span<const double> t_list,
                           SourceKind source_kind) {
  if (t_list.empty()) fail(ErrorCode::kInput, "verify_prop21: empty time list");
  for (double t : t_list)
    if (t < 1) fail(ErrorCode::kPrecondition, "verify_prop21: all times must be >= 1");
  if (source_kind != SourceKind::kHeatSquared && source_kind != SourceKind::kHeatDx)
    fail(ErrorCode::kInput, "verify_prop21: source must be K^2 or K_x");
  Prop21Report rep;
  rep.source = source_kind;
  GaussianSignal kernel{0.0, 1.0, 0.0};
  Source src;
  src.kind = source_kind;
  src.speed = 1.0;
  QuadratureGrid fine = refined(grid);
  for (double t : t_list) {
    SampledFunction u = duhamel_convolve(kernel, src, grid, t);
    double r0 = sup_ratio(u, t, &rep.table);
    SampledFunction uf = duhamel_convolve(kernel, src, fine, t);
    double r1 = sup_ratio(uf, t, nullptr);
    rep.times.push_back(t);
    rep.sup_ratio.push_back(r0);
    rep.sup_ratio_refined.push_back(r1);
    rep.snapshots.push_back(std::move(u));
    rep.refinement_change = std::max(rep.refinement_change, std::abs(r1 / r0 - 1));
  }
  rep.fitted_c = *std::max_element(rep.sup_ratio.begin(), rep.sup_ratio.end());
  for (size_t i = 1; i < rep.sup_ratio.size(); ++i) {
    double f = rep.sup_ratio[i] / rep.sup_ratio[i - 1];
    rep.max_dyadic_factor = std::max(rep.max_dyadic_factor, std::max(f, 1 / f));
  }
  if (rep.sup_ratio.size() == 1) rep.max_dyadic_factor = 1.0;
  if (rep.refinement_change > 0.05)
    fail(ErrorCode::kResolution, "verify_prop21: sup ratio changed by more than 5% under refinement");
  rep.pass = rep.max_dyadic_factor < 2.0 && std::isfinite(rep.fitted_c);
  return rep;
}

RateFit lp_norm_rates(std::span<const double> times, std::span<const SampledFunction> snapshots,
                      double p) {
  if (times.size() != snapshots.size()) fail(ErrorCode::kInput, "lp_norm_rates: size mismatch");
  if (times.size() < 4) fail(ErrorCode::kInput, "lp_norm_rates: need at least 4 snapshots");
  std::vector<double> norms;
  for (const auto& s : snapshots) norms.push_back(lp_norm(s.values, s.dx(), p));
  return fit_power_law(times, norms, 0.0, 4);
}

namespace {

using Fn = std::function<double(double)>;

double howard_lhs_fn(const Fn& f, double a, double z, int panels) {
  const double end = z + kWidthCut / std::sqrt(a);
  return integrate_panels([&](double s) { return std::exp(-a * (z - s) * (z - s)) * f(s); }, 0.0,
                          end, panels);
}

Fn interpolant(const SampledFunction& f) {
  return [&f](double s) {
    const auto& x = f.x;
    if (s <= x.front()) return f.values.front();
    if (s >= x.back()) return f.values.back();
    size_t i = std::upper_bound(x.begin(), x.end(), s) - x.begin() - 1;
    double w = (s - x[i]) / (x[i + 1] - x[i]);
    return (1 - w) * f.values[i] + w * f.values[i + 1];
  };
}

}  // namespace

double howard_lhs(const SampledFunction& f, double a, double z, int panels) {
  return howard_lhs_fn(interpolant(f), a, z, panels);
}

double howard_constant(double omega, int level) {
  if (!(omega > 1)) fail(ErrorCode::kDomain, "howard_constant: omega must exceed 1");
  const Fn fs[] = {
      [](double) { return 1.0; },
      [](double s) { return std::exp(-s * s / 8); },
      [](double s) { return 1 / std::sqrt(1 + s); },
      [](double s) { return std::exp(-s); },
  };
  const int panels = 200 << level;
  double best = 0;
  for (const auto& f : fs)
    for (double a : {1.0, 4.0})
      for (double z : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0}) {
        double lhs = howard_lhs_fn(f, a, z, panels);
        double rhs = f(z / omega) / std::sqrt(a);
        best = std::max(best, lhs / rhs);
      }
  return best;
}

HowardResult howard_bound_check(const SampledFunction& f, double a, double z, double omega) {
  if (!(a > 0)) fail(ErrorCode::kDomain, "howard_bound_check: a must be positive");
  if (!(z >= 0)) fail(ErrorCode::kDomain, "howard_bound_check: z must be nonnegative");
  if (!(omega > 1)) fail(ErrorCode::kDomain, "howard_bound_check: omega must exceed 1");
  if (f.x.size() < 2 || f.x.front() != 0.0)
    fail(ErrorCode::kInput, "howard_bound_check: f must be sampled from sigma = 0");
  for (size_t i = 0; i < f.values.size(); ++i) {
    if (!(f.values[i] > 0) || !std::isfinite(f.values[i]))
      fail(ErrorCode::kPrecondition, "howard_bound_check: f must be positive and finite");
    if (i > 0 && f.values[i] > f.values[i - 1] * (1 + 1e-14))
      fail(ErrorCode::kPrecondition, "howard_bound_check: f increases on the sample");
  }
  if (z / omega > f.x.back())
    fail(ErrorCode::kPrecondition, "howard_bound_check: z/omega outside the sample");
  HowardResult r;
  Fn fi = interpolant(f);
  r.lhs = howard_lhs_fn(fi, a, z, 400);
  r.rhs = fi(z / omega) / std::sqrt(a);
  r.ratio = r.lhs / r.rhs;
  r.c_omega = howard_constant(omega);
  r.pass = r.ratio <= r.c_omega * (1 + 1e-9);
  return r;
}

double shifted_gaussian_ratio(double t, int nx, int ns) {
  require_positive_time(t, "shifted_gaussian_ratio");
  const double rt = std::sqrt(t);
  double best = 0;
  for (double x : linspace(-20 * rt, 20 * rt, nx))
    for (double s : linspace(0, rt, ns))
      for (double sg : {-1.0, 1.0}) {
        double e = -(x + sg * s) * (x + sg * s) / (4 * t) + x * x / (8 * t);
        best = std::max(best, std::exp(e));
      }
  return best;
}

double derivative_bound_ratio(int order, double t, int nx) {
  require_positive_time(t, "derivative_bound_ratio");
  double best = 0;
  for (double x : linspace(-30 * std::sqrt(t), 30 * std::sqrt(t), nx)) {
    double d = order == 1   ? heat_kernel_dx(x, t)
               : order == 2 ? heat_kernel_dxx(x, t)
                            : heat_kernel_dxxx(x, t);
    double g2 = heat_kernel(x, 2 * t);
    if (g2 < 1e-300) continue;
    best = std::max(best, std::pow(t, 0.5 * order) * std::abs(d) / g2);
  }
  return best;
}

namespace {

double weight_profile(double x, int side) { return 1 / (1 + std::exp(side * x)); }

double product_norm(const InteractionParams& p, double t) {
  double s1 = std::sqrt(2 * p.beta1 * t), s2 = std::sqrt(2 * p.beta2 * t);
  double lo = std::min(p.a1 * t - 14 * s1, p.a2 * t - 14 * s2);
  double hi = std::max(p.a1 * t + 14 * s1, p.a2 * t + 14 * s2);
  int n = 8001;
  std::vector<double> xs = linspace(lo, hi, n), v(n);
  for (int i = 0; i < n; ++i)
    v[i] = gauss(xs[i] - p.a1 * t, p.beta1 * t) * gauss(xs[i] - p.a2 * t, p.beta2 * t);
  return lp_norm(v, xs[1] - xs[0], p.p);
}

double weighted_norm(const InteractionParams& p, double t) {
  double sig = std::sqrt(2 * t);
  double lo = std::min(0.0, p.a * t) - 14 * sig - 40, hi = std::max(0.0, p.a * t) + 14 * sig + 40;
  int n = 16001;
  std::vector<double> xs = linspace(lo, hi, n), v(n);
  for (int i = 0; i < n; ++i) v[i] = weight_profile(xs[i], p.decay_side) * gauss(xs[i] - p.a * t, t);
  return lp_norm(v, xs[1] - xs[0], p.p);
}

double exp_weight_integral(const InteractionParams& p, double t) {
  double sig = std::sqrt(2 * t);
  double lo = std::min(0.0, -p.a * t) - 14 * sig - 40, hi = std::max(0.0, -p.a * t) + 14 * sig + 40;
  auto f = [&](double y) { return gauss(y + p.a * t, t) * std::exp(-std::abs(y)); };
  // split at the kink of |y|
  int panels = 400;
  if (lo < 0 && hi > 0) return integrate_panels(f, lo, 0.0, panels) + integrate_panels(f, 0.0, hi, panels);
  return integrate_panels(f, lo, hi, 2 * panels);
}

}  // namespace

InteractionResult interaction_lemma_check(InteractionMode mode, const InteractionParams& p,
                                          double t_start, double t_end, int count) {
  if (!(t_start > 0) || !(t_end > t_start) || count < 4)
    fail(ErrorCode::kInput, "interaction_lemma_check: need 0 < t_start < t_end and >= 4 times");
  InteractionResult r;
  r.mode = mode;
  switch (mode) {
    case InteractionMode::kProduct:
      if (p.a1 == p.a2) fail(ErrorCode::kPrecondition, "product interaction requires a1 != a2");
      if (!(p.beta1 > 0 && p.beta2 > 0))
        fail(ErrorCode::kPrecondition, "product interaction requires positive betas");
      break;
    case InteractionMode::kWeighted:
      if (p.a == 0 || (p.a > 0) != (p.decay_side > 0))
        fail(ErrorCode::kPrecondition,
             "weighted interaction requires sign(a) to match the decay side of the weight");
      break;
    case InteractionMode::kCross:
      if (p.a == 0 || p.b == 0) fail(ErrorCode::kPrecondition, "cross interaction requires nonzero speeds");
      r.exponential = p.a * p.b > 0;
      break;
    case InteractionMode::kExponential:
      if (p.a == 0) fail(ErrorCode::kPrecondition, "exponential-weight integral requires a != 0");
      break;
  }
  const double ratio = std::pow(t_end / t_start, 1.0 / (count - 1));
  for (int k = 0; k < count; ++k) {
    double t = k + 1 == count ? t_end : t_start * std::pow(ratio, k);
    if (r.exponential) t = t_start + (t_end - t_start) * k / (count - 1);
    double v = 0;
    switch (mode) {
      case InteractionMode::kProduct: v = product_norm(p, t); break;
      case InteractionMode::kWeighted: v = weighted_norm(p, t); break;
      case InteractionMode::kExponential: v = exp_weight_integral(p, t); break;
      case InteractionMode::kCross: {
        QuadratureGrid g;
        g.substeps = p.substeps;
        g.points_per_width = p.points_per_width;
        Source src;
        src.kind = SourceKind::kHeatSquared;
        src.speed = p.b;
        v = duhamel_point(GaussianSignal{p.a, 1.0, 0.0}, src, g, 0.0, t, KernelForm::kValue);
        break;
      }
    }
    r.times.push_back(t);
    r.values.push_back(std::abs(v));
  }
  if (r.exponential) {
    RateFit f = fit_exponential(r.times, r.values);
    r.rate = f.exponent;
    r.rate_stderr = f.stderr;
    r.pass = r.rate > 0;
  } else {
    RateFit f = fit_power_law(r.times, r.values);
    r.rate = f.exponent;
    r.rate_stderr = f.stderr;
    r.pass = std::abs(r.rate + 0.5) <= 0.05;
  }
  return r;
}

std::string to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::kDiffusionWaveSquared: return "wave-squared";
    case SourceKind::kDiffusionWaveDx: return "wave-dx";
    case SourceKind::kHeatSquared: return "heat-squared";
    case SourceKind::kHeatDx: return "heat-dx";
  }
  return "?";
}

std::string to_string(InteractionMode mode) {
  switch (mode) {
    case InteractionMode::kProduct: return "product";
    case InteractionMode::kWeighted: return "weighted";
    case InteractionMode::kCross: return "cross";
    case InteractionMode::kExponential: return "exponential";
  }
  return "?";
}

}  // namespace shocklab::kernels
