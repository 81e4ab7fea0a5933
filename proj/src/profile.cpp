#include "shocklab/core/profile.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "shocklab/core/error.hpp"
#include "shocklab/core/numerics.hpp"

namespace shocklab::profile {

namespace odeint = boost::numeric::odeint;
using State = std::vector<double>;

ProfileOde::ProfileOde(const ModelSystem& model, const Vec& u_minus)
    : model_(model), um_(u_minus), n_(model.dim()), r_(model.parabolic_rank()) {
  fm_ = model.flux(u_minus);
}

void ProfileOde::rhs(const double* u, double* du) const {
  const int n = n_;
  const int m = n - r_;
  Vec uu = Eigen::Map<const Vec>(u, n);
  Vec g = model_.flux(uu) - fm_;
  Mat b = model_.viscosity(uu);
  if (m == 0) {
    Eigen::Map<Vec>(du, n) = b.partialPivLu().solve(g);
    return;
  }
  Mat a = model_.jacobian(uu);
  Mat j = -a.topLeftCorner(m, m).partialPivLu().solve(a.topRightCorner(m, r_));
  Mat lhs = b.bottomLeftCorner(r_, m) * j + b.bottomRightCorner(r_, r_);
  Vec w = lhs.partialPivLu().solve(g.tail(r_));
  Vec v = j * w;
  for (int i = 0; i < m; ++i) du[i] = v[i];
  for (int i = 0; i < r_; ++i) du[m + i] = w[i];
}

Vec ProfileOde::rhs(const Vec& u) const {
  Vec du(n_);
  rhs(u.data(), du.data());
  return du;
}

void ProfileOde::linearize(const Vec& u, std::vector<double>* eig, std::vector<Vec>* vecs) const {
  Mat d(n_, n_);
  for (int k = 0; k < n_; ++k) {
    double h = 1e-6 * std::max(1.0, std::abs(u[k]));
    Vec up = u, dn = u;
    up[k] += h;
    dn[k] -= h;
    d.col(k) = (rhs(up) - rhs(dn)) / (2 * h);
  }
  Eigen::EigenSolver<Mat> es(d);
  std::vector<int> idx(n_);
  for (int i = 0; i < n_; ++i) idx[i] = i;
  // drop the n - r directions transverse to the constraint (zero eigenvalues)
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    return std::abs(es.eigenvalues()[a]) > std::abs(es.eigenvalues()[b]);
  });
  idx.resize(r_);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    return es.eigenvalues()[a].real() < es.eigenvalues()[b].real();
  });
  eig->clear();
  vecs->clear();
  for (int i : idx) {
    eig->push_back(es.eigenvalues()[i].real());
    Vec v = es.eigenvectors().col(i).real();
    if (v.norm() < 1e-12) v = es.eigenvectors().col(i).imag();
    vecs->push_back(v.normalized());
  }
}

Vec ProfileOde::residual(const Vec& u, const Vec& du) const {
  return model_.viscosity(u) * du - (model_.flux(u) - fm_);
}

Vec ProfileOde::complete_section_point(double u0, const Vec& guess) const {
  Vec u = guess;
  u[0] = u0;
  const int m = n_ - r_;
  if (m == 0) return u;
  if (n_ != 2 || m != 1)
    fail(ErrorCode::kUnsupported, "profile: block-degenerate models need n = 2, r = 1");
  for (int it = 0; it < 60; ++it) {
    double g = model_.flux(u)[0] - fm_[0];
    double dg = model_.jacobian(u)(0, 1);
    if (dg == 0) fail(ErrorCode::kPrecondition, "profile: algebraic constraint is singular");
    double step = g / dg;
    u[1] -= step;
    if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(u[1]))) break;
  }
  return u;
}

namespace {

struct Sampled {
  std::vector<State> states;  // one per requested distance, possibly fewer
  bool diverged = false;
};

// Integrates from u0 in direction dir and samples at the given ascending distances.
Sampled sample_trajectory(const ProfileOde& ode, const State& u0, double dir,
                          const std::vector<double>& dist, const ProfileOptions& opt,
                          double bound) {
  auto sys = [&](const State& u, State& du, double) {
    du.resize(u.size());
    ode.rhs(u.data(), du.data());
  };
  Sampled out;
  if (dist.empty()) return out;
  auto stepper = odeint::make_dense_output(opt.abs_tol, opt.rel_tol, odeint::runge_kutta_dopri5<State>());
  stepper.initialize(u0, 0.0, dir * std::min(0.01, std::max(dist.back(), 1e-3)));
  size_t next = 0;
  State tmp(u0.size());
  while (next < dist.size() && dist[next] == 0.0) {
    out.states.push_back(u0);
    ++next;
  }
  int guard = 0;
  while (next < dist.size()) {
    auto span = stepper.do_step(sys);
    const double reach = std::max(dir * span.first, dir * span.second);
    while (next < dist.size() && dist[next] <= reach) {
      stepper.calc_state(dir * dist[next], tmp);
      out.states.push_back(tmp);
      ++next;
    }
    const State& cur = stepper.current_state();
    double mag = 0;
    for (double v : cur) mag = std::max(mag, std::abs(v));
    if (!std::isfinite(mag) || mag > bound) {
      out.diverged = true;
      break;
    }
    if (++guard > 5000000) fail(ErrorCode::kResolution, "profile integration: step budget exhausted");
  }
  return out;
}

State advance(const ProfileOde& ode, State u, double dir, double dist, const ProfileOptions& opt) {
  if (dist == 0) return u;
  auto sys = [&](const State& s, State& ds, double) {
    ds.resize(s.size());
    ode.rhs(s.data(), ds.data());
  };
  odeint::integrate_adaptive(odeint::make_controlled(opt.abs_tol, opt.rel_tol,
                                                     odeint::runge_kutta_dopri5<State>()),
                             sys, u, 0.0, dir * dist, dir * std::min(dist, 0.01));
  return u;
}

double scale_of(const Vec& um, const Vec& up) {
  return std::max({1.0, um.cwiseAbs().maxCoeff(), up.cwiseAbs().maxCoeff()});
}

enum class Strategy { kSection, kBackwardFromPlus, kForwardFromMinus };

ShockProfile assemble(const ProfileOde& ode, const ModelSystem& model, const Vec& um,
                      const Vec& up, double h, int half, const std::vector<State>& vals) {
  ShockProfile p;
  p.n = model.dim();
  p.h = h;
  p.count = 2 * half + 1;
  p.x0 = -half * h;
  p.u_minus = um;
  p.u_plus = up;
  p.speed = model.frame_speed();
  p.values.resize(p.count * p.n);
  p.derivs.resize(p.count * p.n);
  for (int i = 0; i < p.count; ++i) {
    ode.rhs(vals[i].data(), &p.derivs[i * p.n]);
    for (int k = 0; k < p.n; ++k) p.values[i * p.n + k] = vals[i][k];
  }
  if (p.n > 1) p.section_value = vals[half][1];
  return p;
}

double dist(const State& a, const Vec& b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

void set_tail_rates(ShockProfile* p, const RestPointInfo& info) {
  double am = kInf, ap = kInf;
  for (double e : info.eig_minus)
    if (e > 0) am = std::min(am, e);
  for (double e : info.eig_plus)
    if (e < 0) ap = std::min(ap, -e);
  p->tail_rate_minus = std::isfinite(am) ? am : 0.0;
  p->tail_rate_plus = std::isfinite(ap) ? ap : 0.0;
}

}  // namespace

RestPointInfo rest_point_info(const ModelSystem& model, const Vec& um, const Vec& up) {
  ProfileOde ode(model, um);
  RestPointInfo info;
  info.reduced_dim = ode.reduced_dim();
  std::vector<Vec> vecs;
  ode.linearize(um, &info.eig_minus, &vecs);
  ode.linearize(up, &info.eig_plus, &vecs);
  for (double e : info.eig_minus)
    if (e > 0) ++info.unstable_minus;
  for (double e : info.eig_plus)
    if (e < 0) ++info.stable_plus;
  for (double e : info.eig_minus)
    if (std::abs(e) < 1e-10) fail(ErrorCode::kPrecondition, "profile: u- is not a hyperbolic rest point");
  for (double e : info.eig_plus)
    if (std::abs(e) < 1e-10) fail(ErrorCode::kPrecondition, "profile: u+ is not a hyperbolic rest point");
  return info;
}

ShockProfile solve_profile(const ModelSystem& model, const Vec& um, const Vec& up,
                           const ProfileOptions& opt) {
  const int n = model.dim();
  if (um.size() != n || up.size() != n) fail(ErrorCode::kInput, "solve_profile: endstate dimension");
  const double scale = scale_of(um, up);
  if (rankine_hugoniot_residual(model, um, up) > 1e-8 * scale)
    fail(ErrorCode::kPrecondition, "solve_profile: Rankine-Hugoniot condition fails in the model frame");
  ProfileOde ode(model, um);
  RestPointInfo info = rest_point_info(model, um, up);
  const int big_n = info.reduced_dim;
  Strategy strategy;
  if (info.unstable_minus == big_n && info.stable_plus == big_n)
    strategy = Strategy::kSection;
  else if (info.unstable_minus == big_n && info.stable_plus == 1)
    strategy = Strategy::kBackwardFromPlus;
  else if (info.unstable_minus == 1 && info.stable_plus == big_n)
    strategy = Strategy::kForwardFromMinus;
  else
    fail(ErrorCode::kUnsupported, "solve_profile: saddle-to-saddle connections are not supported");

  const double h = opt.spacing;
  const double mid0 = 0.5 * (um[0] + up[0]);
  const double bound = 1e3 * scale;
  const double tol = opt.endstate_tol * std::max(1.0, (up - um).norm());

  for (double half_width = opt.half_width; half_width <= opt.max_half_width * (1 + 1e-12);
       half_width *= 2) {
    const int half = static_cast<int>(std::ceil(half_width / h));
    std::vector<State> vals(2 * half + 1);
    if (strategy == Strategy::kSection) {
      Vec guess = 0.5 * (um + up);
      if (n > 1) guess[1] += opt.section_offset;
      Vec p0 = ode.complete_section_point(mid0, guess);
      State s0(p0.data(), p0.data() + n);
      std::vector<double> d(half + 1);
      for (int k = 0; k <= half; ++k) d[k] = k * h;
      Sampled fwd = sample_trajectory(ode, s0, +1, d, opt, bound);
      Sampled bwd = sample_trajectory(ode, s0, -1, d, opt, bound);
      if (fwd.diverged || bwd.diverged || static_cast<int>(fwd.states.size()) != half + 1 ||
          static_cast<int>(bwd.states.size()) != half + 1)
        fail(ErrorCode::kNoConnection, "solve_profile: trajectory from the section point diverged");
      for (int k = 0; k <= half; ++k) {
        vals[half + k] = fwd.states[k];
        vals[half - k] = bwd.states[k];
      }
    } else {
      // Shoot along the one-dimensional manifold of the saddle endstate.
      const bool from_plus = strategy == Strategy::kBackwardFromPlus;
      const Vec& saddle = from_plus ? up : um;
      const Vec& target = from_plus ? um : up;
      const double dir = from_plus ? -1.0 : 1.0;
      std::vector<double> eig;
      std::vector<Vec> vecs;
      ode.linearize(saddle, &eig, &vecs);
      int pick = -1;
      for (size_t i = 0; i < eig.size(); ++i)
        if (from_plus ? eig[i] < 0 : eig[i] > 0) pick = static_cast<int>(i);
      const double lambda = eig[pick];
      const Vec rvec = vecs[pick];
      const double eps = opt.manifold_offset * scale;
      const double reach = 2 * half_width + 20 * std::log(1 / opt.manifold_offset) / std::abs(lambda);
      const int probe = static_cast<int>(std::ceil(reach / h));
      std::vector<double> dprobe(probe + 1);
      for (int k = 0; k <= probe; ++k) dprobe[k] = k * h;
      double sign_used = 0, x_cross = 0;
      for (double sign : {1.0, -1.0}) {
        Vec p0 = saddle + sign * eps * rvec;
        State s0(p0.data(), p0.data() + n);
        Sampled tr = sample_trajectory(ode, s0, dir, dprobe, opt, bound);
        if (tr.diverged || tr.states.empty()) continue;
        if (dist(tr.states.back(), target) > tol) continue;
        int k = -1;
        for (size_t i = 0; i + 1 < tr.states.size(); ++i)
          if ((tr.states[i][0] - mid0) * (tr.states[i + 1][0] - mid0) <= 0) {
            k = static_cast<int>(i);
            break;
          }
        if (k < 0) continue;
        // Newton on the distance past sample k where component 0 equals the midpoint.
        double delta = 0.5 * h;
        for (int it = 0; it < 40; ++it) {
          State s = advance(ode, tr.states[k], dir, delta, opt);
          State ds(n);
          ode.rhs(s.data(), ds.data());
          double step = (s[0] - mid0) / (dir * ds[0]);
          delta -= step;
          if (std::abs(step) < 1e-14) break;
        }
        sign_used = sign;
        x_cross = dir * (k * h + delta);
        break;
      }
      if (sign_used == 0)
        fail(ErrorCode::kNoConnection, "solve_profile: shooting along the saddle manifold missed the other endstate");
      Vec p0 = saddle + sign_used * eps * rvec;
      State s0(p0.data(), p0.data() + n);
      // Node j sits at shooting coordinate x_cross + j h.
      std::vector<double> d;
      std::vector<int> nodes;
      for (int jj = 0; jj <= 2 * half; ++jj) {
        int j = from_plus ? half - jj : jj - half;
        double xs = x_cross + j * h;
        if (dir * xs >= 0) {
          d.push_back(dir * xs);
          nodes.push_back(j);
        } else {
          Vec v = saddle + sign_used * eps * rvec * std::exp(lambda * xs);
          vals[j + half] = State(v.data(), v.data() + n);
        }
      }
      std::vector<int> order(d.size());
      for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
      std::sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });
      std::vector<double> ds;
      for (int i : order) ds.push_back(d[i]);
      Sampled tr = sample_trajectory(ode, s0, dir, ds, opt, bound);
      if (tr.states.size() != ds.size())
        fail(ErrorCode::kNoConnection, "solve_profile: connecting orbit lost during sampling");
      for (size_t i = 0; i < order.size(); ++i) vals[nodes[order[i]] + half] = tr.states[i];
    }
    double em = dist(vals.front(), um), ep = dist(vals.back(), up);
    if (em < tol && ep < tol) {
      ShockProfile p = assemble(ode, model, um, up, h, half, vals);
      set_tail_rates(&p, info);
      return p;
    }
  }
  fail(ErrorCode::kNoConnection, "solve_profile: endstates not reached within the maximum half-width");
}

void ShockProfile::eval(double xq, double* u) const {
  const double x = xq;
  const double xe = x_end();
  auto node_x = [this](int i) { return x0 + i * h; };
  if (x <= x0 || x >= xe) {
    const bool left = x <= x0;
    const int i = left ? 0 : count - 1;
    const Vec& lim = left ? u_minus : u_plus;
    const double rate = left ? tail_rate_minus : tail_rate_plus;
    const double f = std::exp(-rate * std::abs(x - node_x(i)));
    for (int k = 0; k < n; ++k) u[k] = lim[k] + (values[i * n + k] - lim[k]) * f;
    return;
  }
  int i = std::min(count - 2, static_cast<int>((x - x0) / h));
  double s = (x - node_x(i)) / h;
  double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
  double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
  for (int k = 0; k < n; ++k)
    u[k] = h00 * values[i * n + k] + h10 * h * derivs[i * n + k] +
           h01 * values[(i + 1) * n + k] + h11 * h * derivs[(i + 1) * n + k];
}

void ShockProfile::eval_dx(double xq, double* du) const {
  const double x = xq;
  const double xe = x_end();
  auto node_x = [this](int i) { return x0 + i * h; };
  if (x <= x0 || x >= xe) {
    const bool left = x <= x0;
    const int i = left ? 0 : count - 1;
    const Vec& lim = left ? u_minus : u_plus;
    const double rate = left ? tail_rate_minus : tail_rate_plus;
    const double f = std::exp(-rate * std::abs(x - node_x(i)));
    const double sgn = left ? 1.0 : -1.0;
    for (int k = 0; k < n; ++k) du[k] = sgn * rate * (values[i * n + k] - lim[k]) * f;
    return;
  }
  int i = std::min(count - 2, static_cast<int>((x - x0) / h));
  double s = (x - node_x(i)) / h;
  double d00 = 6 * s * s - 6 * s, d10 = 3 * s * s - 4 * s + 1;
  double d01 = -6 * s * s + 6 * s, d11 = 3 * s * s - 2 * s;
  for (int k = 0; k < n; ++k)
    du[k] = (d00 * values[i * n + k] + d01 * values[(i + 1) * n + k]) / h +
            d10 * derivs[i * n + k] + d11 * derivs[(i + 1) * n + k];
}

Vec ShockProfile::eval(double x) const {
  Vec u(n);
  eval(x, u.data());
  return u;
}

Vec ShockProfile::eval_dx(double x) const {
  Vec u(n);
  eval_dx(x, u.data());
  return u;
}

double profile_residual(const ModelSystem& model, const ShockProfile& p) {
  ProfileOde ode(model, p.u_minus);
  static const double c[7] = {-1, 9, -45, 0, 45, -9, 1};
  double worst = 0;
  for (int i = 3; i + 3 < p.count; ++i) {
    Vec u(p.n), du = Vec::Zero(p.n);
    for (int k = 0; k < p.n; ++k) {
      u[k] = p.values[i * p.n + k];
      for (int q = 0; q < 7; ++q) du[k] += c[q] * p.values[(i + q - 3) * p.n + k];
      du[k] /= 60 * p.h;
    }
    worst = std::max(worst, ode.residual(u, du).cwiseAbs().maxCoeff());
  }
  return worst;
}

namespace {

// Returns the fitted rate for one side or a negative value when no tail is found.
double fit_side(const std::vector<double>& xs, const std::vector<double>& d, double floor,
                bool* oscillatory) {
  std::vector<double> fx, fy;
  for (size_t i = 0; i < xs.size(); ++i)
    if (d[i] >= floor && d[i] <= 1e-3) {
      fx.push_back(xs[i]);
      fy.push_back(d[i]);
    }
  if (fx.size() < 5) return -1.0;
  // xs are ordered by increasing distance from the shock; d should decrease.
  bool monotone = true;
  for (size_t i = 1; i < fy.size(); ++i)
    if (fy[i] > fy[i - 1] * (1 + 1e-9)) monotone = false;
  std::vector<double> lx, ly;
  if (monotone) {
    for (size_t i = 0; i < fx.size(); ++i) {
      lx.push_back(fx[i]);
      ly.push_back(std::log(fy[i]));
    }
  } else {
    *oscillatory = true;
    for (size_t i = 1; i + 1 < fx.size(); ++i)
      if (fy[i] >= fy[i - 1] && fy[i] >= fy[i + 1]) {
        lx.push_back(fx[i]);
        ly.push_back(std::log(fy[i]));
      }
    if (lx.size() < 3) return -1.0;
  }
  LineFit f = fit_line(lx, ly);
  return -f.slope;
}

}  // namespace

TailFit tail_fit(const std::vector<double>& x, const std::vector<double>& values, int n,
                 const Vec& left_limit, const Vec& right_limit, double floor) {
  const size_t m = x.size();
  if (values.size() != m * n || m < 10) fail(ErrorCode::kInput, "tail_fit: bad sample");
  const double centre = 0.5 * (x.front() + x.back());
  std::vector<double> lx, ld, rx, rd;
  for (size_t i = 0; i < m; ++i) {
    const Vec& lim = x[i] < centre ? left_limit : right_limit;
    double s = 0;
    for (int k = 0; k < n; ++k) s += std::pow(values[i * n + k] - lim[k], 2);
    if (x[i] < centre) {
      lx.push_back(-x[i]);
      ld.push_back(std::sqrt(s));
    } else {
      rx.push_back(x[i]);
      rd.push_back(std::sqrt(s));
    }
  }
  std::reverse(lx.begin(), lx.end());
  std::reverse(ld.begin(), ld.end());
  TailFit t;
  t.alpha_minus = fit_side(lx, ld, floor, &t.oscillatory);
  t.alpha_plus = fit_side(rx, rd, floor, &t.oscillatory);
  t.ok = t.alpha_minus > 0 && t.alpha_plus > 0;
  if (!t.ok) t.warning = "no exponential tail found on at least one side";
  else if (t.oscillatory) t.warning = "oscillatory tail; rate from envelope";
  return t;
}

TailFit tail_fit(const ShockProfile& p) {
  std::vector<double> xs(p.count);
  for (int i = 0; i < p.count; ++i) xs[i] = p.x(i);
  return tail_fit(xs, p.values, p.n, p.u_minus, p.u_plus);
}

int count_family_directions(const ModelSystem& model, const ShockProfile& base,
                            const ProfileOptions& opt, double eta) {
  ProfileOde ode(model, base.u_minus);
  if (ode.reduced_dim() < model.dim()) return 0;
  const int n = model.dim();
  const double width = std::max(base.x_end(), 40.0);
  const double tol = 1e-2 * std::max(1.0, (base.u_plus - base.u_minus).norm());
  const double bound = 1e3 * scale_of(base.u_minus, base.u_plus);
  Vec p0 = base.eval(0.0);
  int count = 0;
  for (int k = 1; k < n; ++k) {
    bool all = true;
    for (double sg : {1.0, -1.0}) {
      Vec p = p0;
      p[k] += sg * eta;
      State s(p.data(), p.data() + n);
      Sampled f = sample_trajectory(ode, s, +1, {width}, opt, bound);
      Sampled b = sample_trajectory(ode, s, -1, {width}, opt, bound);
      bool ok = !f.diverged && !b.diverged && f.states.size() == 1 && b.states.size() == 1 &&
                dist(f.states[0], base.u_plus) < tol && dist(b.states[0], base.u_minus) < tol;
      all = all && ok;
    }
    if (all) ++count;
  }
  return count;
}

ProfileFamily::ProfileFamily(models::ModelPtr model, ShockProfile base, const ProfileOptions& opt)
    : model_(std::move(model)), base_(std::move(base)), opt_(opt) {
  const double scale = std::max(1.0, (base_.u_plus - base_.u_minus).norm());
  const double eta = 1e-3 * scale;
  int c1 = count_family_directions(*model_, base_, opt_, eta);
  int c2 = count_family_directions(*model_, base_, opt_, 0.5 * eta);
  if (c1 != c2)
    fail(ErrorCode::kManifoldDimension, "profile_family: family dimension changes under tolerance halving");
  ell_ = 1 + c1;
  if (ell_ > 2) fail(ErrorCode::kUnsupported, "profile_family: more than one internal parameter");
  const int n = base_.n;
  std::vector<double> xs(base_.count);
  for (int i = 0; i < base_.count; ++i) xs[i] = base_.x(i);
  directions_.push_back(base_.derivs);
  masses_.push_back(base_.u_plus - base_.u_minus);
  Vec zero = Vec::Zero(n);
  auto rate_of = [&](const std::vector<double>& d) {
    TailFit t = tail_fit(xs, d, n, zero, zero, 1e-9 * scale);
    return t.ok ? std::min(t.alpha_minus, t.alpha_plus) : 0.0;
  };
  direction_tail_.push_back(rate_of(directions_[0]));
  if (ell_ == 2) {
    const double d_eta = 1e-4 * scale;
    const double eta0 = base_.section_value;
    ShockProfile pp = member_profile(eta0 + d_eta);
    ShockProfile pm = member_profile(eta0 - d_eta);
    std::vector<double> d(base_.count * n);
    for (int i = 0; i < base_.count; ++i) {
      Vec a = pp.eval(xs[i]), b = pm.eval(xs[i]);
      for (int k = 0; k < n; ++k) d[i * n + k] = (a[k] - b[k]) / (2 * d_eta);
    }
    double dot = 0, nn = 0;
    for (size_t q = 0; q < d.size(); ++q) {
      dot += d[q] * base_.derivs[q];
      nn += base_.derivs[q] * base_.derivs[q];
    }
    const double kappa = -dot / nn;
    double norm2 = 0;
    for (size_t q = 0; q < d.size(); ++q) {
      d[q] += kappa * base_.derivs[q];
      norm2 += d[q] * d[q];
    }
    const double norm = std::sqrt(norm2 * base_.h);
    for (double& v : d) v /= norm;
    internal_scale_ = 1 / norm;
    internal_shift_ = kappa / norm;
    Vec mass = Vec::Zero(n);
    for (int k = 0; k < n; ++k) {
      std::vector<double> comp(base_.count);
      for (int i = 0; i < base_.count; ++i) comp[i] = d[i * n + k];
      mass[k] = trapezoid(comp, base_.h);
    }
    directions_.push_back(std::move(d));
    masses_.push_back(mass);
    direction_tail_.push_back(rate_of(directions_[1]));
  }
}

ShockProfile ProfileFamily::member_profile(double eta) const {
  for (const auto& [key, prof] : cache_)
    if (key == eta) return prof;
  ProfileOptions o = opt_;
  o.half_width = base_.x_end();
  o.section_offset = eta - 0.5 * (base_.u_minus[1] + base_.u_plus[1]);
  ShockProfile p = solve_profile(*model_, base_.u_minus, base_.u_plus, o);
  if (cache_.size() >= 8) cache_.erase(cache_.begin());
  cache_.emplace_back(eta, p);
  return p;
}

void ProfileFamily::evaluate(const Vec& delta, const std::vector<double>& xs,
                             std::vector<double>* out) const {
  const int n = base_.n;
  out->resize(xs.size() * n);
  double shift = delta[0];
  const ShockProfile* prof = &base_;
  ShockProfile member;
  if (ell_ == 2 && delta.size() > 1 && delta[1] != 0.0) {
    member = member_profile(base_.section_value + internal_scale_ * delta[1]);
    prof = &member;
    shift += internal_shift_ * delta[1];
  }
  for (size_t i = 0; i < xs.size(); ++i) prof->eval(xs[i] + shift, &(*out)[i * n]);
}

void ProfileFamily::jacobian(const Vec& delta, const std::vector<double>& xs,
                             std::vector<std::vector<double>>* cols) const {
  const int n = base_.n;
  cols->assign(ell_, std::vector<double>(xs.size() * n));
  double shift = delta[0];
  const ShockProfile* prof = &base_;
  ShockProfile member;
  if (ell_ == 2 && delta[1] != 0.0) {
    member = member_profile(base_.section_value + internal_scale_ * delta[1]);
    prof = &member;
    shift += internal_shift_ * delta[1];
  }
  for (size_t i = 0; i < xs.size(); ++i) prof->eval_dx(xs[i] + shift, &(*cols)[0][i * n]);
  if (ell_ == 2) {
    const double step = 1e-4;
    std::vector<double> up, dn;
    Vec d1 = delta, d2 = delta;
    d1[1] += step;
    d2[1] -= step;
    evaluate(d1, xs, &up);
    evaluate(d2, xs, &dn);
    for (size_t q = 0; q < up.size(); ++q) (*cols)[1][q] = (up[q] - dn[q]) / (2 * step);
  }
}

ProfileFamily profile_family(models::ModelPtr model, const ShockProfile& base,
                             const ProfileOptions& opt) {
  return ProfileFamily(std::move(model), base, opt);
}

void write_profile_csv(const ShockProfile& p, const std::string& path, const std::string& header) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path);
  if (!header.empty()) out << header;
  out << "x";
  for (int k = 0; k < p.n; ++k) out << ",u" << k + 1;
  out << "\n";
  char buf[64];
  for (int i = 0; i < p.count; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", p.x(i));
    out << buf;
    for (int k = 0; k < p.n; ++k) {
      std::snprintf(buf, sizeof buf, ",%.17g", p.values[i * p.n + k]);
      out << buf;
    }
    out << "\n";
  }
  if (!out) fail(ErrorCode::kIo, "write failed: " + path);
}

ShockProfile read_profile_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot read " + path);
  std::string line;
  std::vector<double> xs;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'x') continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> r;
    while (std::getline(ss, cell, ',')) r.push_back(std::stod(cell));
    if (r.size() < 2) fail(ErrorCode::kIo, "malformed profile row in " + path);
    xs.push_back(r[0]);
    rows.emplace_back(r.begin() + 1, r.end());
  }
  if (rows.size() < 8) fail(ErrorCode::kIo, "profile file too short: " + path);
  ShockProfile p;
  p.n = static_cast<int>(rows[0].size());
  p.count = static_cast<int>(rows.size());
  p.x0 = xs[0];
  p.h = (xs.back() - xs.front()) / (p.count - 1);
  p.values.resize(p.count * p.n);
  p.derivs.resize(p.count * p.n);
  for (int i = 0; i < p.count; ++i)
    for (int k = 0; k < p.n; ++k) p.values[i * p.n + k] = rows[i][k];
  auto val = [&](int i, int k) { return p.values[std::clamp(i, 0, p.count - 1) * p.n + k]; };
  for (int i = 0; i < p.count; ++i)
    for (int k = 0; k < p.n; ++k)
      p.derivs[i * p.n + k] = (val(i - 2, k) - 8 * val(i - 1, k) + 8 * val(i + 1, k) - val(i + 2, k)) / (12 * p.h);
  p.u_minus = Eigen::Map<const Vec>(rows.front().data(), p.n);
  p.u_plus = Eigen::Map<const Vec>(rows.back().data(), p.n);
  return p;
}

}  // namespace shocklab::profile
