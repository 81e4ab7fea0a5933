#include "shocklab/core/numerics.hpp"

#include <algorithm>

#include "shocklab/core/error.hpp"

namespace shocklab {

LineFit fit_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> w) {
  const size_t n = x.size();
  if (n != y.size() || (!w.empty() && w.size() != n))
    fail(ErrorCode::kInput, "fit_line: size mismatch");
  if (n < 2) fail(ErrorCode::kInput, "fit_line: need at least two points");
  double sw = 0, sx = 0, sy = 0;
  for (size_t i = 0; i < n; ++i) {
    double wi = w.empty() ? 1.0 : w[i];
    sw += wi;
    sx += wi * x[i];
    sy += wi * y[i];
  }
  double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    double wi = w.empty() ? 1.0 : w[i];
    sxx += wi * (x[i] - mx) * (x[i] - mx);
    sxy += wi * (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0) fail(ErrorCode::kInput, "fit_line: degenerate abscissae");
  LineFit out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  out.count = static_cast<int>(n);
  if (n > 2) {
    double ssr = 0;
    for (size_t i = 0; i < n; ++i) {
      double wi = w.empty() ? 1.0 : w[i];
      double r = y[i] - out.intercept - out.slope * x[i];
      ssr += wi * r * r;
    }
    out.slope_stderr = std::sqrt(ssr / (n - 2) / sxx);
  }
  return out;
}

RateFit fit_power_law(std::span<const double> t, std::span<const double> v,
                      double t_min, int min_points) {
  if (t.size() != v.size()) fail(ErrorCode::kInput, "fit_power_law: size mismatch");
  std::vector<double> lx, ly;
  for (size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_min) continue;
    if (!(t[i] > 0) || !(v[i] > 0))
      fail(ErrorCode::kInput, "fit_power_law: nonpositive value in series");
    lx.push_back(std::log(t[i]));
    ly.push_back(std::log(v[i]));
  }
  if (static_cast<int>(lx.size()) < std::max(min_points, 2))
    fail(ErrorCode::kInput, "fit_power_law: too few points in fit window");
  LineFit f = fit_line(lx, ly);
  return {f.slope, f.slope_stderr, f.count};
}

RateFit fit_exponential(std::span<const double> t, std::span<const double> v) {
  if (t.size() != v.size() || t.size() < 2)
    fail(ErrorCode::kInput, "fit_exponential: need matching series");
  double mid = 0.5 * (t.front() + t.back());
  std::vector<double> lx, ly;
  for (size_t i = 0; i < t.size(); ++i) {
    if (t[i] < mid) continue;
    if (!(v[i] > 0)) fail(ErrorCode::kInput, "fit_exponential: nonpositive value");
    lx.push_back(t[i]);
    ly.push_back(std::log(v[i]));
  }
  if (lx.size() < 2) fail(ErrorCode::kInput, "fit_exponential: too few points");
  LineFit f = fit_line(lx, ly);
  return {-f.slope, f.slope_stderr, f.count};
}

double trapezoid(std::span<const double> f, double dx) {
  if (f.empty()) return 0.0;
  double s = 0.5 * (f.front() + f.back());
  for (size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
  return s * dx;
}

double lp_norm(std::span<const double> f, double dx, double p) {
  return lp_norm_field(f, 1, dx, p);
}

double lp_norm_field(std::span<const double> f, int n, double dx, double p) {
  const size_t m = f.size() / n;
  if (p == kInf) {
    double best = 0;
    for (size_t i = 0; i < m; ++i) {
      double s = 0;
      for (int k = 0; k < n; ++k) s += f[i * n + k] * f[i * n + k];
      best = std::max(best, std::sqrt(s));
    }
    return best;
  }
  double sum = 0;
  for (size_t i = 0; i < m; ++i) {
    double s = 0;
    for (int k = 0; k < n; ++k) s += f[i * n + k] * f[i * n + k];
    double mag = std::sqrt(s);
    double w = (i == 0 || i + 1 == m) ? 0.5 : 1.0;
    sum += w * (p == 1.0 ? mag : p == 2.0 ? mag * mag : std::pow(mag, p));
  }
  sum *= dx;
  return p == 1.0 ? sum : p == 2.0 ? std::sqrt(sum) : std::pow(sum, 1.0 / p);
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = a;
    return out;
  }
  double h = (b - a) / (n - 1);
  for (int i = 0; i < n; ++i) out[i] = a + i * h;
  out[n - 1] = b;
  return out;
}

std::vector<double> geometric_times(double t0, double t1, double ratio) {
  if (!(t0 > 0) || !(t1 >= t0) || !(ratio > 1))
    fail(ErrorCode::kInput, "geometric_times: need 0 < t0 <= t1 and ratio > 1");
  std::vector<double> out;
  for (int k = 0;; ++k) {
    double t = t0 * std::pow(ratio, k);
    if (t > t1 * (1 + 1e-12)) break;
    out.push_back(t);
  }
  if (std::abs(out.back() - t1) > 1e-9 * t1) out.push_back(t1);
  return out;
}

double errfn(double z) { return 0.5 * std::erfc(-z); }

}  // namespace shocklab
