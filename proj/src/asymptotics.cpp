#include "shocklab/core/asymptotics.hpp"

#include <algorithm>
#include <cmath>

#include "shocklab/core/error.hpp"
#include "shocklab/core/numerics.hpp"

namespace shocklab::asymptotics {

namespace {

double grid_dx(const std::vector<double>& xs) {
  if (xs.size() < 2) fail(ErrorCode::kInput, "grid needs at least two points");
  return xs[1] - xs[0];
}

// Trapezoid integral of each component of interleaved data.
Vec integrate(const std::vector<double>& f, int n, double dx) {
  const size_t m = f.size() / n;
  Vec out = Vec::Zero(n);
  for (size_t i = 0; i < m; ++i) {
    const double w = (i == 0 || i + 1 == m) ? 0.5 : 1.0;
    for (int k = 0; k < n; ++k) out[k] += w * f[i * n + k];
  }
  return out * dx;
}

}  // namespace

Setting constant_setting(models::ModelPtr model, const Vec& u) {
  Setting s;
  s.model = model;
  s.minus = models::endstate_spectrum(*model, u);
  s.plus = s.minus;
  s.coupling_minus = models::coupling_coefficients(s.minus, *model);
  s.coupling_plus = s.coupling_minus;
  return s;
}

Setting shock_setting(models::ModelPtr model, std::shared_ptr<const profile::ProfileFamily> family) {
  Setting s;
  s.model = model;
  s.minus = models::endstate_spectrum(*model, family->base().u_minus);
  s.plus = models::endstate_spectrum(*model, family->base().u_plus);
  s.coupling_minus = models::coupling_coefficients(s.minus, *model);
  s.coupling_plus = models::coupling_coefficients(s.plus, *model);
  s.family = std::move(family);
  return s;
}

std::vector<double> background(const Setting& s, const Vec& delta, const std::vector<double>& xs) {
  const int n = s.dim();
  std::vector<double> out(xs.size() * n);
  if (!s.shock()) {
    for (size_t i = 0; i < xs.size(); ++i)
      for (int k = 0; k < n; ++k) out[i * n + k] = s.minus.u[k];
    return out;
  }
  s.family->evaluate(delta, xs, &out);
  return out;
}

std::vector<OutgoingMode> outgoing_modes(const Setting& s) {
  std::vector<OutgoingMode> out;
  auto add = [&](const models::EndstateSpectrum& sp, Side side, int k) {
    OutgoingMode m;
    m.side = side;
    m.k = k;
    m.speed = sp.speeds[k];
    m.beta = sp.beta[k];
    m.gamma = sp.gamma[k];
    m.r = sp.right.col(k);
    m.l = sp.left.row(k);
    out.push_back(m);
  };
  for (int k = 0; k < s.minus.n(); ++k)
    if (!s.shock() || s.minus.speeds[k] < 0) add(s.minus, Side::kMinus, k);
  if (s.shock())
    for (int k = 0; k < s.plus.n(); ++k)
      if (s.plus.speeds[k] > 0) add(s.plus, Side::kPlus, k);
  return out;
}

MassDecomposition project_mass(const Setting& s, const Vec& integral) {
  MassDecomposition d;
  d.modes = outgoing_modes(s);
  const int n = s.dim(), ell = s.ell();
  const int cols = static_cast<int>(d.modes.size()) + ell;
  if (cols != n)
    fail(ErrorCode::kD2Violation, "mass basis has " + std::to_string(cols) + " columns for n = " +
                                      std::to_string(n));
  Mat basis(n, n);
  int c = 0;
  for (const auto& m : d.modes) basis.col(c++) = m.r;
  for (int i = 0; i < ell; ++i) basis.col(c++) = s.family->mass(i);
  d.condition = greenfn::basis_condition(basis);
  if (!(d.condition < 1e8)) fail(ErrorCode::kD2Violation, "mass basis is ill-conditioned");
  Vec coef = basis.fullPivLu().solve(integral);
  for (size_t j = 0; j < d.modes.size(); ++j) d.m_out.push_back(coef[j]);
  d.c_delta = coef.tail(ell);
  d.delta0 = Vec::Zero(ell);
  d.m_shifted = d.m_out;
  d.residual_c = d.c_delta.size() ? d.c_delta.norm() : 0.0;
  return d;
}

Vec family_mass_shift(const Setting& s, const Vec& delta, const std::vector<double>& xs) {
  const int n = s.dim();
  if (!s.shock()) return Vec::Zero(n);
  std::vector<double> a = background(s, delta, xs), b = background(s, Vec::Zero(s.ell()), xs);
  for (size_t j = 0; j < a.size(); ++j) a[j] -= b[j];
  return integrate(a, n, grid_dx(xs));
}

MassDecomposition compute_delta0(const Setting& s, const std::vector<double>& xs,
                                 const std::vector<double>& u0, double tol) {
  const int n = s.dim(), ell = s.ell();
  const double dx = grid_dx(xs);
  std::vector<double> diff = u0;
  std::vector<double> base = background(s, Vec::Zero(ell), xs);
  for (size_t j = 0; j < diff.size(); ++j) diff[j] -= base[j];
  const Vec total = integrate(diff, n, dx);
  MassDecomposition d = project_mass(s, total);
  if (ell == 0) return d;
  auto coeffs = [&](const Vec& delta) {
    try {
      return project_mass(s, total - family_mass_shift(s, delta, xs));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kNoConnection || e.code() == ErrorCode::kUnsupported)
        fail(ErrorCode::kPerturbationTooLarge, "delta0 left the profile family: " + std::string(e.what()));
      throw;
    }
  };
  Vec delta = Vec::Zero(ell);
  MassDecomposition cur = d;
  const double h = 1e-5;
  int it = 0;
  for (; it < 30 && cur.c_delta.norm() >= tol; ++it) {
    Mat jac(ell, ell);
    for (int i = 0; i < ell; ++i) {
      Vec dp = delta;
      dp[i] += h;
      Vec dm = delta;
      dm[i] -= h;
      jac.col(i) = (coeffs(dp).c_delta - coeffs(dm).c_delta) / (2 * h);
    }
    Vec step = jac.fullPivLu().solve(-cur.c_delta);
    delta += step;
    if (!delta.allFinite() || delta.norm() > 10.0)
      fail(ErrorCode::kPerturbationTooLarge, "delta0 Newton iteration diverged");
    cur = coeffs(delta);
  }
  if (cur.c_delta.norm() >= tol)
    fail(ErrorCode::kPerturbationTooLarge, "delta0 Newton iteration did not converge");
  d.delta0 = delta;
  d.m_shifted = cur.m_out;
  d.residual_c = cur.c_delta.norm();
  d.newton_iterations = it;
  return d;
}

std::vector<double> DiffusionWaveSet::sample_mode(size_t j, const std::vector<double>& xs,
                                                  double t) const {
  std::vector<double> out(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) out[i] = kernels::diffusion_wave(waves[j], xs[i], t);
  return out;
}

std::vector<double> DiffusionWaveSet::sample(const std::vector<double>& xs, double t, int n) const {
  std::vector<double> out(xs.size() * n, 0.0);
  for (size_t j = 0; j < waves.size(); ++j) {
    if (waves[j].mass == 0.0) continue;
    std::vector<double> w = sample_mode(j, xs, t);
    for (size_t i = 0; i < xs.size(); ++i)
      for (int k = 0; k < n; ++k) out[i * n + k] += w[i] * carriers[j][k];
  }
  return out;
}

DiffusionWaveSet build_phi(const MassDecomposition& d) {
  DiffusionWaveSet set;
  for (size_t j = 0; j < d.modes.size(); ++j) {
    kernels::DiffusionWaveParams p;
    p.mass = d.m_shifted[j];
    p.beta = d.modes[j].beta;
    p.speed = d.modes[j].speed;
    p.gamma = d.modes[j].gamma;
    set.waves.push_back(p);
    set.carriers.push_back(d.modes[j].r);
  }
  return set;
}

DeltaFit extract_delta(const Setting& s, const std::vector<double>& xs,
                       const std::vector<double>& w, const std::vector<double>& phi,
                       const Vec& delta0, const Vec& seed, int max_iterations) {
  const int ell = s.ell();
  DeltaFit fit;
  fit.delta = seed;
  if (ell == 0) return fit;
  const double dx = grid_dx(xs);
  auto residual = [&](const Vec& delta, std::vector<double>* r) {
    *r = background(s, delta0 + delta, xs);
    double sum = 0;
    for (size_t j = 0; j < r->size(); ++j) {
      (*r)[j] = w[j] - (*r)[j] - phi[j];
      sum += (*r)[j] * (*r)[j];
    }
    return sum * dx;
  };
  std::vector<double> r;
  double obj = residual(fit.delta, &r);
  for (int it = 1; it <= max_iterations; ++it) {
    std::vector<std::vector<double>> cols;
    s.family->jacobian(delta0 + fit.delta, xs, &cols);
    Mat jtj = Mat::Zero(ell, ell);
    Vec jtr = Vec::Zero(ell);
    for (int a = 0; a < ell; ++a) {
      for (int b = 0; b < ell; ++b) {
        double acc = 0;
        for (size_t j = 0; j < r.size(); ++j) acc += cols[a][j] * cols[b][j];
        jtj(a, b) = acc;
      }
      double acc = 0;
      for (size_t j = 0; j < r.size(); ++j) acc += cols[a][j] * r[j];
      jtr[a] = acc;
    }
    Vec step = jtj.ldlt().solve(jtr);
    // Damped update: halve until the objective does not increase.
    double lambda = 1.0;
    std::vector<double> rt;
    double trial = 0;
    for (int h = 0; h < 30; ++h) {
      trial = residual(fit.delta + lambda * step, &rt);
      if (trial <= obj) break;
      lambda *= 0.5;
    }
    const double moved = lambda * step.norm();
    if (trial <= obj) {
      fit.delta += lambda * step;
      obj = trial;
      r.swap(rt);
    }
    fit.iterations = it;
    if (moved <= 1e-13 + 1e-9 * fit.delta.norm() || trial > obj) {
      fit.objective = obj;
      return fit;
    }
  }
  fail(ErrorCode::kTrackingLoss, "Gauss-Newton shift extraction did not converge in " +
                                     std::to_string(max_iterations) + " iterations");
}

const NormRow* Timeseries::row(const std::string& q, double p) const {
  for (const auto& r : rows)
    if (r.quantity == q && r.p == p) return &r;
  return nullptr;
}

double sobolev_norm(const std::vector<double>& v, int n, double dx, int order, int stride) {
  if (order < 0 || order > 3) fail(ErrorCode::kInput, "sobolev_norm: order must be 0..3");
  const int m = static_cast<int>(v.size()) / n;
  const double h = stride * dx;
  auto at = [&](int i, int k) { return v[static_cast<size_t>(i) * n + k]; };
  double total = 0;
  for (int r = 0; r <= order; ++r) {
    const int reach = (r == 3 ? 2 : (r == 0 ? 0 : 1)) * stride;
    double sum = 0;
    for (int i = reach; i < m - reach; i += stride)
      for (int k = 0; k < n; ++k) {
        double d;
        const int s1 = stride, s2 = 2 * stride;
        switch (r) {
          case 0: d = at(i, k); break;
          case 1: d = (at(i + s1, k) - at(i - s1, k)) / (2 * h); break;
          case 2: d = (at(i + s1, k) - 2 * at(i, k) + at(i - s1, k)) / (h * h); break;
          default:
            d = (at(i + s2, k) - 2 * at(i + s1, k) + 2 * at(i - s1, k) - at(i - s2, k)) / (2 * h * h * h);
        }
        sum += d * d;
      }
    total += sum * h;
  }
  return std::sqrt(total);
}

SobolevDiagnostic sobolev_diagnostic(const std::vector<double>& times,
                                     const std::vector<double>& norms, double t_min, double tol) {
  SobolevDiagnostic out;
  out.times = times;
  out.norms = norms;
  out.non_increasing = true;
  for (size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t_min) continue;
    for (size_t j = i + 1; j < times.size(); ++j)
      if (norms[j] > (1 + tol) * norms[i]) out.non_increasing = false;
  }
  return out;
}

Timeseries decompose_timeseries(const Setting& s, const std::vector<double>& xs,
                                const std::vector<evolution::FieldState>& snapshots,
                                const MassDecomposition& d, const DiffusionWaveSet& phi,
                                const DecomposeOptions& opt) {
  const int n = s.dim(), ell = s.ell();
  const double dx = grid_dx(xs);
  if (snapshots.empty() || snapshots[0].t != 0.0)
    fail(ErrorCode::kInput, "decompose_timeseries: the first snapshot must be at t = 0");
  if (opt.reference && opt.reference->size() != snapshots.size())
    fail(ErrorCode::kInput, "decompose_timeseries: reference run does not match the snapshots");
  Timeseries ts;
  const std::vector<double> ubar0 = background(s, d.delta0, xs);
  const std::vector<double> ubase = background(s, Vec::Zero(ell), xs);
  NormRow vr[3] = {{"v", 1, {}, {}}, {"v", 2, {}, {}}, {"v", kInf, {}, {}}};
  NormRow pr[3] = {{"phi", 1, {}, {}}, {"phi", 2, {}, {}}, {"phi", kInf, {}, {}}};
  NormRow dr{"delta", 0, {}, {}}, h3r{"h3", 0, {}, {}};
  ts.mode_masses.assign(d.modes.size(), {});
  Vec delta = Vec::Zero(ell);
  for (size_t q = 0; q < snapshots.size(); ++q) {
    const auto& snap = snapshots[q];
    const double t = snap.t;
    std::vector<double> w = snap.u;
    if (opt.reference) {
      const auto& ref = (*opt.reference)[q];
      for (size_t j = 0; j < w.size(); ++j) w[j] -= ref.u[j] - ubar0[j];
    }
    std::vector<double> ph = phi.sample(xs, t, n);
    if (q > 0 && ell > 0 && !ts.tracking_lost) {
      try {
        delta = extract_delta(s, xs, w, ph, d.delta0, delta).delta;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kTrackingLoss) throw;
        ts.tracking_lost = true;
        ts.tracking_message = e.what();
      }
    }
    std::vector<double> v = background(s, d.delta0 + delta, xs);
    for (size_t j = 0; j < v.size(); ++j) v[j] = w[j] - v[j] - ph[j];
    if (q == 0) {
      Vec mass = integrate(v, n, dx);
      ts.initial_v_mass = mass.cwiseAbs().maxCoeff();
      std::vector<double> pert = snap.u;
      for (size_t j = 0; j < pert.size(); ++j) pert[j] -= ubase[j];
      ts.initial_l1 = lp_norm_field(pert, n, dx, 1);
    }
    ts.times.push_back(t);
    ts.delta.push_back(delta);
    const double ps[3] = {1, 2, kInf};
    for (int k = 0; k < 3; ++k) {
      vr[k].times.push_back(t);
      vr[k].values.push_back(lp_norm_field(v, n, dx, ps[k]));
      pr[k].times.push_back(t);
      pr[k].values.push_back(lp_norm_field(ph, n, dx, ps[k]));
    }
    if (ell > 0) {
      dr.times.push_back(t);
      dr.values.push_back(delta.norm());
    }
    // Outgoing masses of w - ū^{delta0} in windows moving with each mode.
    for (size_t j = 0; j < d.modes.size(); ++j) {
      const auto& m = d.modes[j];
      const double c = m.speed * (t + 1), hw = 6 * std::sqrt(m.beta * (t + 1)) + 2;
      double acc = 0;
      for (size_t i = 0; i < xs.size(); ++i) {
        if (std::abs(xs[i] - c) > hw) continue;
        double proj = 0;
        for (int k = 0; k < n; ++k) proj += m.l[k] * (w[i * n + k] - ubar0[i * n + k]);
        acc += proj * dx;
      }
      ts.mode_masses[j].push_back(acc);
    }
    if (opt.h3) {
      double a = sobolev_norm(v, n, dx, 3, 1);
      double b = sobolev_norm(v, n, dx, 3, 2);
      h3r.times.push_back(t);
      h3r.values.push_back(a);
      ts.h3.push_back(a);
      if (t >= 1 && a > 0) ts.h3_richardson = std::max(ts.h3_richardson, std::abs(a - b) / a);
    }
    if (q + 1 == snapshots.size()) {
      ts.v_final.assign(n, std::vector<double>(xs.size()));
      for (size_t i = 0; i < xs.size(); ++i)
        for (int k = 0; k < n; ++k) ts.v_final[k][i] = v[i * n + k];
    }
  }
  // Centred differences of delta over the (nonuniform) checkpoints.
  NormRow ddr{"delta_dot", 0, {}, {}};
  const size_t m = ts.times.size();
  for (size_t q = 0; q < m && ell > 0; ++q) {
    const size_t a = q == 0 ? 0 : q - 1, b = q + 1 == m ? q : q + 1;
    Vec dd = (b == a) ? Vec::Zero(ell) : Vec((ts.delta[b] - ts.delta[a]) / (ts.times[b] - ts.times[a]));
    ts.delta_dot.push_back(dd);
    ddr.times.push_back(ts.times[q]);
    ddr.values.push_back(dd.norm());
  }
  for (auto& r : vr) ts.rows.push_back(r);
  for (auto& r : pr) ts.rows.push_back(r);
  if (ell > 0) {
    ts.rows.push_back(dr);
    ts.rows.push_back(ddr);
  }
  if (opt.h3) ts.rows.push_back(h3r);
  return ts;
}

RateFit fit_rate(const std::vector<double>& t, const std::vector<double>& v, double t_fit_min) {
  return fit_power_law(t, v, t_fit_min, 5);
}

AntiderivativeCheck antiderivative_bound(const std::vector<double>& xs, const std::vector<double>& v) {
  AntiderivativeCheck out;
  const double dx = grid_dx(xs);
  double V = 0, prev = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i > 0) V += 0.5 * (prev + v[i]) * dx;
    prev = v[i];
    const double w = (i == 0 || i + 1 == xs.size()) ? 0.5 : 1.0;
    out.V_l1 += w * std::abs(V) * dx;
    out.xv_l1 += w * std::abs(xs[i] * v[i]) * dx;
  }
  out.v_mass = V;
  out.pass = out.V_l1 <= out.xv_l1 * (1 + 1e-12) + 1e-15;
  return out;
}

std::vector<double> bump(const std::vector<double>& xs, double center, double half_width,
                         const Vec& masses) {
  if (!(half_width > 0)) fail(ErrorCode::kConfig, "bump half-width must be positive");
  const int n = static_cast<int>(masses.size());
  std::vector<double> shape(xs.size(), 0.0);
  double total = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double s = (xs[i] - center) / half_width;
    if (std::abs(s) < 1) shape[i] = std::exp(-1 / (1 - s * s));
    total += shape[i];
  }
  if (!(total > 0)) fail(ErrorCode::kConfig, "bump is not resolved by the grid");
  total *= grid_dx(xs);
  // Normalised on the grid itself so the discrete mass is exact.
  std::vector<double> out(xs.size() * n);
  for (size_t i = 0; i < xs.size(); ++i)
    for (int k = 0; k < n; ++k) out[i * n + k] = masses[k] * shape[i] / total;
  return out;
}

}  // namespace shocklab::asymptotics
