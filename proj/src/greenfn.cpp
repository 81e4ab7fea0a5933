#include "shocklab/core/greenfn.hpp"

#include <algorithm>
#include <cmath>
#include <span>

#include "shocklab/core/error.hpp"
#include "shocklab/core/numerics.hpp"

namespace shocklab::greenfn {

std::vector<CharacteristicField> fields_of(const models::EndstateSpectrum& s, Side side) {
  std::vector<CharacteristicField> out;
  for (int k = 0; k < s.n(); ++k) {
    CharacteristicField f;
    f.side = side;
    f.k = k;
    f.speed = s.speeds[k];
    f.beta = s.beta[k];
    f.l = s.left.row(k);
    f.r = s.right.col(k);
    out.push_back(f);
  }
  return out;
}

double basis_condition(const Mat& basis) {
  Eigen::JacobiSVD<Mat> svd(basis);
  const auto& sv = svd.singularValues();
  if (sv[sv.size() - 1] == 0) return kInf;
  return sv[0] / sv[sv.size() - 1];
}

namespace {

Mat assemble_basis(const std::vector<Vec>& om, const std::vector<Vec>& op,
                   const std::vector<Vec>& masses) {
  const size_t cols = om.size() + op.size() + masses.size();
  if (cols == 0) fail(ErrorCode::kInput, "scattering basis is empty");
  const int n = static_cast<int>((om.empty() ? (op.empty() ? masses[0] : op[0]) : om[0]).size());
  if (static_cast<int>(cols) != n)
    fail(ErrorCode::kD2Violation, "scattering basis has " + std::to_string(cols) +
                                      " columns for dimension " + std::to_string(n));
  Mat m(n, n);
  int c = 0;
  for (const auto* set : {&om, &op, &masses})
    for (const Vec& v : *set) m.col(c++) = v;
  return m;
}

}  // namespace

Vec solve_scattering(const std::vector<Vec>& outgoing_minus, const std::vector<Vec>& outgoing_plus,
                     const std::vector<Vec>& delta_masses, const Vec& incoming, double* residual,
                     double max_condition) {
  Mat m = assemble_basis(outgoing_minus, outgoing_plus, delta_masses);
  if (basis_condition(m) > max_condition)
    fail(ErrorCode::kD2Violation, "scattering basis is singular or ill-conditioned");
  Vec c = m.fullPivLu().solve(incoming);
  if (residual) *residual = (m * c - incoming).norm();
  return c;
}

double ScatteringSolution::c_stationary(Side side, int q, int i) const {
  const auto& rows = side == Side::kMinus ? coeff_minus : coeff_plus;
  return rows[q][out_minus.size() + out_plus.size() + i];
}

double ScatteringSolution::c_out(Side side, int q, Side out_side, int j) const {
  const auto& rows = side == Side::kMinus ? coeff_minus : coeff_plus;
  return rows[q][(out_side == Side::kMinus ? 0 : out_minus.size()) + j];
}

EKernelSpec make_kernel_spec(const models::EndstateSpectrum& minus,
                             const models::EndstateSpectrum& plus,
                             const std::vector<Vec>& delta_masses) {
  EKernelSpec spec;
  spec.n = minus.n();
  spec.ell = static_cast<int>(delta_masses.size());
  spec.minus = fields_of(minus, Side::kMinus);
  spec.plus = fields_of(plus, Side::kPlus);
  spec.delta_masses = delta_masses;
  ScatteringSolution& s = spec.scattering;
  s.n = spec.n;
  s.ell = spec.ell;
  std::vector<Vec> om, op;
  for (int k = 0; k < spec.n; ++k) {
    if (spec.minus[k].speed < 0) {
      s.out_minus.push_back(k);
      om.push_back(spec.minus[k].r);
    } else {
      s.in_minus.push_back(k);
    }
    if (spec.plus[k].speed > 0) {
      s.out_plus.push_back(k);
      op.push_back(spec.plus[k].r);
    } else {
      s.in_plus.push_back(k);
    }
  }
  s.basis = assemble_basis(om, op, delta_masses);
  s.condition = basis_condition(s.basis);
  for (int k : s.in_minus) {
    double res = 0;
    s.coeff_minus.push_back(solve_scattering(om, op, delta_masses, spec.minus[k].r, &res));
    s.max_residual = std::max(s.max_residual, res);
  }
  for (int k : s.in_plus) {
    double res = 0;
    s.coeff_plus.push_back(solve_scattering(om, op, delta_masses, spec.plus[k].r, &res));
    s.max_residual = std::max(s.max_residual, res);
  }
  Mat inv = s.basis.inverse();
  const int first = static_cast<int>(om.size() + op.size());
  for (int i = 0; i < spec.ell; ++i) {
    s.pi.push_back(inv.row(first + i));
    RowVec lm = RowVec::Zero(spec.n), lp = RowVec::Zero(spec.n);
    for (size_t q = 0; q < s.in_minus.size(); ++q)
      lm += s.c_stationary(Side::kMinus, static_cast<int>(q), i) * spec.minus[s.in_minus[q]].l;
    for (size_t q = 0; q < s.in_plus.size(); ++q)
      lp += s.c_stationary(Side::kPlus, static_cast<int>(q), i) * spec.plus[s.in_plus[q]].l;
    s.pi_mismatch = std::max({s.pi_mismatch, (lm - lp).norm(), (lm - s.pi.back()).norm()});
  }
  return spec;
}

RowVec eval_e(const EKernelSpec& spec, int i, double y, double t) {
  return eval_e_side(spec, i, y, t, y <= 0 ? Side::kMinus : Side::kPlus);
}

RowVec eval_e_side(const EKernelSpec& spec, int i, double y, double t, Side side) {
  if (!(t > 0)) fail(ErrorCode::kDomain, "eval_e: t must be positive");
  if (i < 0 || i >= spec.ell) fail(ErrorCode::kInput, "eval_e: index out of range");
  const auto& sc = spec.scattering;
  RowVec e = RowVec::Zero(spec.n);
  const bool left = side == Side::kMinus;
  const auto& fields = left ? spec.minus : spec.plus;
  const auto& incoming = left ? sc.in_minus : sc.in_plus;
  const double ym = left ? y : -y;  // mirrored source position
  for (size_t q = 0; q < incoming.size(); ++q) {
    const auto& f = fields[incoming[q]];
    const double a = std::abs(f.speed);
    const double w = std::sqrt(4 * f.beta * t);
    const double c = sc.c_stationary(left ? Side::kMinus : Side::kPlus, static_cast<int>(q), i);
    e += c * (errfn((ym + a * t) / w) - errfn((ym - a * t) / w)) * f.l;
  }
  return e;
}

double z_jk(double y, double t, double a_j, double a_k) {
  return a_j * (t - std::abs(y) / std::abs(a_k));
}

double beta_bar(double x, double t, double y, double a_j, double beta_j, double a_k, double beta_k,
                Side out_side) {
  const double xpart = out_side == Side::kPlus ? std::max(x, 0.0) : std::min(x, 0.0);
  return xpart / (a_j * t) * beta_j +
         std::abs(y) / std::abs(a_k * t) * (a_j / a_k) * (a_j / a_k) * beta_k;
}

namespace {

inline double gauss(double z, double bt) {
  return std::exp(-z * z / (4 * bt)) / std::sqrt(4 * kPi * bt);
}

// S for a source at y <= 0. `near` is the source side, `far` the opposite side, with
// coefficient rows for the near-side incoming modes.
Mat s_near_side(const std::vector<CharacteristicField>& near,
                const std::vector<CharacteristicField>& far, const std::vector<int>& in_near,
                const std::vector<Vec>& coeff, const std::vector<int>& out_near,
                const std::vector<int>& out_far, double x, double t, double y) {
  const int n = static_cast<int>(near.size());
  Mat s = Mat::Zero(n, n);
  const double wl = 1 / (1 + std::exp(2 * x));   // e^{-x}/(e^x + e^{-x})
  const double wr = 1 / (1 + std::exp(-2 * x));  // e^{x}/(e^x + e^{-x})
  for (const auto& f : near) {
    double g = gauss(x - y - f.speed * t, f.beta * t);
    s += (f.speed < 0 ? 1.0 : wl) * g * f.r * f.l;
  }
  for (size_t q = 0; q < in_near.size(); ++q) {
    const auto& fk = near[in_near[q]];
    if (std::abs(fk.speed * t) < std::abs(y)) continue;  // not yet reached the shock
    const int nom = static_cast<int>(out_near.size());
    for (size_t jj = 0; jj < out_near.size(); ++jj) {
      const auto& fj = near[out_near[jj]];
      double bb = beta_bar(x, t, y, fj.speed, fj.beta, fk.speed, fk.beta, Side::kMinus);
      if (!(bb > 1e-300)) continue;
      double z = z_jk(y, t, fj.speed, fk.speed);
      s += coeff[q][jj] * gauss(x - z, bb * t) * wl * fj.r * fk.l;
    }
    for (size_t jj = 0; jj < out_far.size(); ++jj) {
      const auto& fj = far[out_far[jj]];
      double bb = beta_bar(x, t, y, fj.speed, fj.beta, fk.speed, fk.beta, Side::kPlus);
      if (!(bb > 1e-300)) continue;
      double z = z_jk(y, t, fj.speed, fk.speed);
      s += coeff[q][nom + jj] * gauss(x - z, bb * t) * wr * fj.r * fk.l;
    }
  }
  return s;
}

std::vector<CharacteristicField> mirrored(const std::vector<CharacteristicField>& fs) {
  std::vector<CharacteristicField> out = fs;
  for (auto& f : out) {
    f.speed = -f.speed;
    f.side = f.side == Side::kMinus ? Side::kPlus : Side::kMinus;
  }
  return out;
}

}  // namespace

Mat eval_S(const EKernelSpec& spec, double x, double t, double y) {
  if (!(t > 0)) fail(ErrorCode::kDomain, "eval_S: t must be positive");
  if (t < 1) return Mat::Zero(spec.n, spec.n);
  const auto& sc = spec.scattering;
  if (y <= 0)
    return s_near_side(spec.minus, spec.plus, sc.in_minus, sc.coeff_minus, sc.out_minus,
                       sc.out_plus, x, t, y);
  // Mirror image: x -> -x, speeds negated, sides exchanged. Coefficient rows for the
  // plus-side incoming modes list minus-outgoing first, so swap the blocks.
  std::vector<Vec> coeff;
  const int nom = static_cast<int>(sc.out_minus.size());
  const int nop = static_cast<int>(sc.out_plus.size());
  for (const Vec& c : sc.coeff_plus) {
    Vec d(c.size());
    d.head(nop) = c.segment(nom, nop);
    d.segment(nop, nom) = c.head(nom);
    d.tail(c.size() - nom - nop) = c.tail(c.size() - nom - nop);
    coeff.push_back(d);
  }
  return s_near_side(mirrored(spec.plus), mirrored(spec.minus), sc.in_plus, coeff, sc.out_plus,
                     sc.out_minus, -x, t, -y);
}

namespace {

struct Norms {
  double ey, et, ety;
};

Norms derivative_norms(const EKernelSpec& spec, int i, double t, double p, double h_scale) {
  double amax = 0, bmax = 0;
  for (const auto* fs : {&spec.minus, &spec.plus})
    for (const auto& f : *fs) {
      amax = std::max(amax, std::abs(f.speed));
      bmax = std::max(bmax, f.beta);
    }
  const double half = amax * t + 14 * std::sqrt(4 * bmax * t) + 5;
  const int m = 2001;
  const double hy = 1e-3 * std::max(1.0, t) * h_scale;
  const double ht = hy;
  // Each half-line uses its own formula so the differences never straddle y = 0.
  std::vector<double> ey, et, ety;
  for (Side side : {Side::kMinus, Side::kPlus}) {
    const double sgn = side == Side::kMinus ? -1.0 : 1.0;
    for (int q = 0; q < m; ++q) {
      const double y = sgn * half * q / (m - 1);
      auto e = [&](double yy, double tt) { return eval_e_side(spec, i, yy, tt, side); };
      ey.push_back(((e(y + hy, t) - e(y - hy, t)) / (2 * hy)).norm());
      et.push_back(((e(y, t + ht) - e(y, t - ht)) / (2 * ht)).norm());
      ety.push_back(
          ((e(y + hy, t + ht) - e(y + hy, t - ht) - e(y - hy, t + ht) + e(y - hy, t - ht)) /
           (4 * hy * ht))
              .norm());
    }
  }
  const double dy = half / (m - 1);
  auto norm = [&](const std::vector<double>& v) {
    std::span<const double> all(v);
    double a = lp_norm(all.subspan(0, m), dy, p), b = lp_norm(all.subspan(m), dy, p);
    if (p == kInf) return std::max(a, b);
    return std::pow(std::pow(a, p) + std::pow(b, p), 1 / p);
  };
  return {norm(ey), norm(et), norm(ety)};
}

}  // namespace

KernelDecay verify_kernel_decay(const EKernelSpec& spec, int i, double p, double t_start,
                                double t_end, int count) {
  if (count < 4) fail(ErrorCode::kInput, "verify_kernel_decay: need at least 4 times");
  KernelDecay out;
  out.p = p;
  const double base = p == kInf ? 1.0 : 1.0 - 1.0 / p;
  out.target_first = -0.5 * base;
  out.target_mixed = -0.5 * base - 0.5;
  std::vector<double> ts, ny, nt, nty;
  for (int k = 0; k < count; ++k) {
    double t = t_start * std::pow(t_end / t_start, static_cast<double>(k) / (count - 1));
    Norms a = derivative_norms(spec, i, t, p, 1.0);
    Norms b = derivative_norms(spec, i, t, p, 0.5);
    auto close = [](double u, double v) { return std::abs(u - v) <= 1e-3 * std::abs(v) + 1e-14; };
    if (!close(a.ey, b.ey) || !close(a.et, b.et) || !close(a.ety, b.ety)) {
      out.richardson_ok = false;
    }
    ts.push_back(t);
    ny.push_back(b.ey);
    nt.push_back(b.et);
    nty.push_back(b.ety);
  }
  if (!out.richardson_ok)
    fail(ErrorCode::kResolution, "verify_kernel_decay: derivative step failed the Richardson check");
  out.slope_ey = fit_power_law(ts, ny).exponent;
  out.slope_et = fit_power_law(ts, nt).exponent;
  out.slope_ety = fit_power_law(ts, nty).exponent;
  out.pass = std::abs(out.slope_ey - out.target_first) <= 0.08 &&
             std::abs(out.slope_et - out.target_first) <= 0.08 &&
             std::abs(out.slope_ety - out.target_mixed) <= 0.08;
  return out;
}

double s_bump_norm(const EKernelSpec& spec, double t, double p, double y0, double width) {
  double amax = 0, bmax = 0;
  for (const auto* fs : {&spec.minus, &spec.plus})
    for (const auto& f : *fs) {
      amax = std::max(amax, std::abs(f.speed));
      bmax = std::max(bmax, f.beta);
    }
  const double half = amax * t + std::abs(y0) + 14 * std::sqrt(4 * bmax * t + 2 * width * width);
  const int mx = 1601, my = 161;
  std::vector<double> xs = linspace(-half, half, mx);
  std::vector<double> ys = linspace(y0 - 10 * width, y0 + 10 * width, my);
  const double dyy = ys[1] - ys[0];
  std::vector<double> mag(mx);
  for (int q = 0; q < mx; ++q) {
    Mat acc = Mat::Zero(spec.n, spec.n);
    for (int j = 0; j < my; ++j) {
      double f = std::exp(-(ys[j] - y0) * (ys[j] - y0) / (2 * width * width)) /
                 std::sqrt(2 * kPi * width * width);
      double w = (j == 0 || j == my - 1) ? 0.5 : 1.0;
      acc += w * f * eval_S(spec, xs[q], t, ys[j]);
    }
    mag[q] = (acc * dyy).norm();
  }
  return lp_norm(mag, xs[1] - xs[0], p);
}

BumpDecay verify_s_bump_decay(const EKernelSpec& spec, double p, double t_start, double t_end,
                              int count) {
  BumpDecay out;
  out.target = p == kInf ? -0.5 : -0.5 * (1 - 1 / p);
  for (int k = 0; k < count; ++k) {
    double t = t_start * std::pow(t_end / t_start, static_cast<double>(k) / (count - 1));
    out.times.push_back(t);
    out.norms.push_back(s_bump_norm(spec, t, p));
  }
  out.slope = fit_power_law(out.times, out.norms).exponent;
  // Upper bound with a fitted constant: the scaled norm may shrink but must not grow.
  const size_t half = out.times.size() / 2;
  double early = 0, late = 0;
  for (size_t k = 0; k < out.times.size(); ++k) {
    double c = out.norms[k] * std::pow(out.times[k], -out.target);
    (k < half ? early : late) = std::max(k < half ? early : late, c);
  }
  out.fitted_c = std::max(early, late);
  out.c_growth = late / early;
  out.pass = out.slope <= out.target + 0.08 && out.c_growth < 2.0;
  return out;
}

}  // namespace shocklab::greenfn
