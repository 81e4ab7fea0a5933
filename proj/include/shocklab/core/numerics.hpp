#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace shocklab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846;

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  int count = 0;
};

// Weighted least squares y ~ intercept + slope*x. Empty weights means unit weights.
LineFit fit_line(std::span<const double> x, std::span<const double> y,
                 std::span<const double> w = {});

struct RateFit {
  double exponent = 0.0;
  double stderr = 0.0;
  int count = 0;
};

// Slope of log|v| against log t over t >= t_min. Throws on nonpositive values.
RateFit fit_power_law(std::span<const double> t, std::span<const double> v,
                      double t_min = 0.0, int min_points = 2);

// Rate eta of v ~ C exp(-eta t), fitted on the last half of the t range.
RateFit fit_exponential(std::span<const double> t, std::span<const double> v);

double trapezoid(std::span<const double> f, double dx);

// Discrete L^p norm on a uniform grid; p = kInf gives the max norm.
double lp_norm(std::span<const double> f, double dx, double p);

// Same for an interleaved n-component field, pointwise Euclidean magnitude.
double lp_norm_field(std::span<const double> f, int n, double dx, double p);

std::vector<double> linspace(double a, double b, int n);

// t0, t0*r, t0*r^2, ... up to and including t1 (t1 appended if not hit).
std::vector<double> geometric_times(double t0, double t1, double ratio);

// Fixed-order Gauss-Legendre on equal panels.
template <class F>
double integrate_panels(F&& f, double a, double b, int panels);

double errfn(double z);  // (1 + erf z)/2

}  // namespace shocklab

#include <boost/math/quadrature/gauss.hpp>

namespace shocklab {

template <class F>
double integrate_panels(F&& f, double a, double b, int panels) {
  double h = (b - a) / panels;
  double sum = 0.0;
  for (int k = 0; k < panels; ++k) {
    double lo = a + k * h;
    sum += boost::math::quadrature::gauss<double, 20>::integrate(f, lo, lo + h);
  }
  return sum;
}

}  // namespace shocklab
