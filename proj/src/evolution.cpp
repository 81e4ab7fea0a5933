#include "shocklab/core/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "shocklab/core/error.hpp"
#include "shocklab/core/numerics.hpp"

namespace shocklab::evolution {

using models::Mat;

std::vector<double> Grid1D::nodes() const {
  std::vector<double> xs(nx);
  for (int i = 0; i < nx; ++i) xs[i] = x(i);
  return xs;
}

void Grid1D::validate() const {
  if (!(x_max > x_min)) fail(ErrorCode::kConfig, "grid: x_max must exceed x_min");
  if (nx < 256) fail(ErrorCode::kConfig, "grid: nx must be at least 256");
}

std::vector<double> FieldState::component(int k) const {
  std::vector<double> c(u.size() / n);
  for (size_t i = 0; i < c.size(); ++i) c[i] = u[i * n + k];
  return c;
}

void SchemeConfig::validate() const {
  if (!(cfl > 0 && cfl < 1)) fail(ErrorCode::kConfig, "scheme: cfl must lie in (0,1)");
  if (!(diffusion_number_max > 0)) fail(ErrorCode::kConfig, "scheme: diffusion number must be positive");
  if (order != 2 && order != 4) fail(ErrorCode::kConfig, "scheme: order must be 2 or 4");
  if (flux == FluxScheme::kLocalLaxFriedrichs && order != 2)
    fail(ErrorCode::kConfig, "scheme: local Lax-Friedrichs flux requires order 2");
  if (ko_sigma < 0) fail(ErrorCode::kConfig, "scheme: dissipation coefficient must be nonnegative");
  if (dt < 0) fail(ErrorCode::kConfig, "scheme: dt must be nonnegative");
}

std::string to_string(FluxScheme f) {
  return f == FluxScheme::kCentralKO ? "central-ko" : "local-lax-friedrichs";
}
std::string to_string(TimeScheme t) { return t == TimeScheme::kRK2 ? "rk2" : "imex"; }
std::string to_string(Dissipation d) {
  switch (d) {
    case Dissipation::kAuto: return "auto";
    case Dissipation::kOff: return "off";
    case Dissipation::kAll: return "all";
  }
  return "?";
}

namespace {

double matrix_spectral_radius(const Mat& a) {
  if (a.rows() == 1) return std::abs(a(0, 0));
  return Eigen::EigenSolver<Mat>(a, false).eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

Solver::Solver(models::ModelPtr model, Grid1D grid, SchemeConfig scheme, Vec left, Vec right)
    : model_(std::move(model)), grid_(grid), scheme_(scheme), left_(std::move(left)),
      right_(std::move(right)) {
  grid_.validate();
  scheme_.validate();
  n_ = model_->dim();
  if (left_.size() != n_ || right_.size() != n_)
    fail(ErrorCode::kInput, "solver: boundary states have the wrong dimension");
  lambda_ = std::max(matrix_spectral_radius(model_->jacobian(left_)),
                     matrix_spectral_radius(model_->jacobian(right_)));
  damp_row_.assign(n_, false);
  if (scheme_.dissipation == Dissipation::kAll) {
    damp_row_.assign(n_, true);
  } else if (scheme_.dissipation == Dissipation::kAuto) {
    for (int k = 0; k < n_ - model_->parabolic_rank(); ++k) damp_row_[k] = true;
  }
  const size_t padded = static_cast<size_t>(grid_.nx + 2 * kGhost) * n_;
  pad_.resize(padded);
  fnode_.resize(padded);
  iflux_.resize(static_cast<size_t>(grid_.nx - 1) * n_);
}

double Solver::spectral_radius(const FieldState& s) const {
  double r = 0;
  for (int i = 0; i < grid_.nx; ++i) r = std::max(r, matrix_spectral_radius(model_->jacobian(s.at(i))));
  return r;
}

double Solver::stable_dt(const FieldState& s) const {
  const double dx = grid_.dx();
  const double lam = std::max({spectral_radius(s), lambda_, 1e-12});
  double dt = scheme_.cfl * dx / lam;
  if (scheme_.time == TimeScheme::kRK2) {
    double bmax = 0;
    for (int i = 0; i < grid_.nx; ++i)
      bmax = std::max(bmax, matrix_spectral_radius(model_->viscosity(s.at(i))));
    // The fourth-order diffusion stencil has a 4/3 larger spectral radius.
    const double widen = scheme_.order == 4 ? 0.75 : 1.0;
    if (bmax > 0) dt = std::min(dt, widen * scheme_.diffusion_number_max * dx * dx / bmax);
  }
  return dt;
}

FieldState Solver::pinned(FieldState s) const {
  for (int k = 0; k < n_; ++k) {
    s.u[k] = left_[k];
    s.u[static_cast<size_t>(grid_.nx - 1) * n_ + k] = right_[k];
  }
  return s;
}

std::vector<double> Solver::interior_mass(const FieldState& s) const {
  std::vector<double> m(n_, 0.0);
  for (int i = 1; i < grid_.nx - 1; ++i)
    for (int k = 0; k < n_; ++k) m[k] += s.u[static_cast<size_t>(i) * n_ + k];
  for (double& v : m) v *= grid_.dx();
  return m;
}

void Solver::fill_padded(const std::vector<double>& u) const {
  const int nx = grid_.nx;
  for (int p = 0; p < nx + 2 * kGhost; ++p) {
    const double* src;
    if (p < kGhost) src = left_.data();
    else if (p >= nx + kGhost) src = right_.data();
    else src = u.data() + static_cast<size_t>(p - kGhost) * n_;
    std::copy(src, src + n_, pad_.data() + static_cast<size_t>(p) * n_);
    model_->flux(pad_.data() + static_cast<size_t>(p) * n_, fnode_.data() + static_cast<size_t>(p) * n_);
  }
}

void Solver::rhs(const std::vector<double>& u, std::vector<double>& dudt, double* flux_left,
                 double* flux_right, bool with_diffusion) const {
  const int nx = grid_.nx, n = n_;
  const double dx = grid_.dx();
  fill_padded(u);
  std::vector<double> ui(n), du(n), b(static_cast<size_t>(n) * n);
  auto U = [&](int i, int k) { return pad_[static_cast<size_t>(i + kGhost) * n + k]; };
  auto F = [&](int i, int k) { return fnode_[static_cast<size_t>(i + kGhost) * n + k]; };
  const double sig = scheme_.ko_sigma * lambda_;
  const bool llf = scheme_.flux == FluxScheme::kLocalLaxFriedrichs;
  for (int i = 0; i < nx - 1; ++i) {
    double* h = iflux_.data() + static_cast<size_t>(i) * n;
    for (int k = 0; k < n; ++k) {
      if (scheme_.order == 4) {
        h[k] = (-F(i - 1, k) + 7 * F(i, k) + 7 * F(i + 1, k) - F(i + 2, k)) / 12;
        ui[k] = (-U(i - 1, k) + 9 * U(i, k) + 9 * U(i + 1, k) - U(i + 2, k)) / 16;
        du[k] = (U(i - 1, k) - 15 * U(i, k) + 15 * U(i + 1, k) - U(i + 2, k)) / (12 * dx);
        if (damp_row_[k])
          h[k] -= sig / 64 *
                  (U(i + 3, k) - 5 * U(i + 2, k) + 10 * U(i + 1, k) - 10 * U(i, k) +
                   5 * U(i - 1, k) - U(i - 2, k));
      } else {
        h[k] = 0.5 * (F(i, k) + F(i + 1, k));
        ui[k] = 0.5 * (U(i, k) + U(i + 1, k));
        du[k] = (U(i + 1, k) - U(i, k)) / dx;
        if (llf) h[k] -= 0.5 * lambda_ * (U(i + 1, k) - U(i, k));
        else if (damp_row_[k])
          h[k] += sig / 16 * (U(i + 2, k) - 3 * U(i + 1, k) + 3 * U(i, k) - U(i - 1, k));
      }
    }
    if (with_diffusion) {
      model_->viscosity(ui.data(), b.data());
      for (int k = 0; k < n; ++k) {
        double v = 0;
        for (int j = 0; j < n; ++j) v += b[k * n + j] * du[j];
        h[k] -= v;
      }
    }
  }
  dudt.assign(u.size(), 0.0);
  for (int i = 1; i < nx - 1; ++i)
    for (int k = 0; k < n; ++k)
      dudt[static_cast<size_t>(i) * n + k] =
          -(iflux_[static_cast<size_t>(i) * n + k] - iflux_[static_cast<size_t>(i - 1) * n + k]) / dx;
  if (flux_left) std::copy(iflux_.begin(), iflux_.begin() + n, flux_left);
  if (flux_right)
    std::copy(iflux_.begin() + static_cast<size_t>(nx - 2) * n,
              iflux_.begin() + static_cast<size_t>(nx - 1) * n, flux_right);
}

void Solver::diffuse_implicit(FieldState& s, double dt, std::vector<double>* boundary_flux) const {
  // Crank-Nicolson on (B u_x)_x with B frozen at the current state, second-order stencil.
  const int nx = grid_.nx, n = n_;
  const double dx = grid_.dx();
  std::vector<Mat> bf(nx - 1);
  Vec mid(n);
  for (int i = 0; i < nx - 1; ++i) {
    for (int k = 0; k < n; ++k)
      mid[k] = 0.5 * (s.u[static_cast<size_t>(i) * n + k] + s.u[static_cast<size_t>(i + 1) * n + k]);
    bf[i] = model_->viscosity(mid);
  }
  auto node = [&](const std::vector<double>& u, int i) {
    return Eigen::Map<const Vec>(u.data() + static_cast<size_t>(i) * n, n);
  };
  auto face = [&](const std::vector<double>& u, int i) {  // h_{i+1/2}
    return Vec(bf[i] * (node(u, i + 1) - node(u, i)) / dx);
  };
  const double c = dt / (2 * dx * dx);
  const int m = nx - 2;
  std::vector<Mat> diag(m), lower(m), upper(m);
  std::vector<Vec> rhs(m);
  const Mat eye = Mat::Identity(n, n);
  for (int q = 0; q < m; ++q) {
    const int i = q + 1;
    lower[q] = -c * bf[i - 1];
    upper[q] = -c * bf[i];
    diag[q] = eye + c * (bf[i - 1] + bf[i]);
    rhs[q] = node(s.u, i) + dt / (2 * dx) * (face(s.u, i) - face(s.u, i - 1));
  }
  rhs[0] -= lower[0] * node(s.u, 0);
  rhs[m - 1] -= upper[m - 1] * node(s.u, nx - 1);
  for (int q = 1; q < m; ++q) {
    Mat w = lower[q] * diag[q - 1].inverse();
    diag[q] -= w * upper[q - 1];
    rhs[q] -= w * rhs[q - 1];
  }
  std::vector<double> out = s.u;
  Vec next = diag[m - 1].lu().solve(rhs[m - 1]);
  Eigen::Map<Vec>(out.data() + static_cast<size_t>(m) * n, n) = next;
  for (int q = m - 2; q >= 0; --q) {
    next = diag[q].lu().solve(rhs[q] - upper[q] * next);
    Eigen::Map<Vec>(out.data() + static_cast<size_t>(q + 1) * n, n) = next;
  }
  if (boundary_flux) {
    // Interface flux of the conservative form is -h.
    Vec fl = -0.5 * (face(s.u, 0) + face(out, 0));
    Vec fr = -0.5 * (face(s.u, nx - 2) + face(out, nx - 2));
    for (int k = 0; k < n; ++k) (*boundary_flux)[k] += dt * (fr[k] - fl[k]);
  }
  s.u = std::move(out);
}

void Solver::step(FieldState& s, double dt, std::vector<double>* boundary_flux) const {
  const int n = n_;
  const bool imex = scheme_.time == TimeScheme::kIMEX;
  std::vector<double> fl0(n), fr0(n), fl1(n), fr1(n);
  if (imex) diffuse_implicit(s, 0.5 * dt, boundary_flux);
  std::vector<double> k1, k2;
  rhs(s.u, k1, fl0.data(), fr0.data(), !imex);
  tmp_.resize(s.u.size());
  for (size_t j = 0; j < s.u.size(); ++j) tmp_[j] = s.u[j] + dt * k1[j];
  rhs(tmp_, k2, fl1.data(), fr1.data(), !imex);
  bool finite = true;
  for (size_t j = 0; j < s.u.size(); ++j) {
    double v = s.u[j] + 0.5 * dt * (k1[j] + k2[j]);
    finite = finite && std::isfinite(v);
    tmp_[j] = v;
  }
  if (!finite) {
    char msg[128];
    std::snprintf(msg, sizeof msg, "non-finite state; last valid time t = %.9g", s.t);
    fail(ErrorCode::kBlowUp, msg);
  }
  s.u.swap(tmp_);
  if (boundary_flux)
    for (int k = 0; k < n; ++k) (*boundary_flux)[k] += 0.5 * dt * ((fr0[k] - fl0[k]) + (fr1[k] - fl1[k]));
  if (imex) diffuse_implicit(s, 0.5 * dt, boundary_flux);
  s.t += dt;
}

void step(const Solver& solver, FieldState& state, double dt) { solver.step(state, dt); }

EvolveResult evolve(const Solver& solver, const FieldState& initial,
                    const std::vector<double>& checkpoints, double boundary_tol) {
  const Grid1D& g = solver.grid();
  const int n = solver.dim();
  if (initial.n != n || initial.u.size() != static_cast<size_t>(g.nx) * n)
    fail(ErrorCode::kInput, "evolve: initial state does not match the grid");
  double prev = initial.t;
  for (double c : checkpoints) {
    if (!(c > prev)) fail(ErrorCode::kInput, "evolve: checkpoints must increase and exceed the start time");
    prev = c;
  }
  EvolveResult res;
  FieldState s = solver.pinned(initial);
  res.dt = solver.scheme().dt > 0 ? solver.scheme().dt : solver.stable_dt(s);
  res.mass_initial = solver.interior_mass(s);
  res.boundary_flux.assign(n, 0.0);
  const Vec left = s.at(0), right = s.at(g.nx - 1);
  const double jump = std::max(1.0, (right - left).norm());
  const int edge = std::min(10, g.nx / 2);
  for (double target : checkpoints) {
    const double interval = target - s.t;
    const long count = static_cast<long>(std::ceil(interval / res.dt * (1 - 1e-12)));
    const double dt = interval / static_cast<double>(count);
    const double start = s.t;
    for (long q = 1; q <= count; ++q) {
      solver.step(s, dt, &res.boundary_flux);
      s.t = start + q * dt;
    }
    s.t = target;
    res.steps += count;
    for (int i = 1; i <= edge; ++i) {
      res.boundary_signal = std::max(res.boundary_signal, (s.at(i) - left).norm());
      res.boundary_signal = std::max(res.boundary_signal, (s.at(g.nx - 1 - i) - right).norm());
    }
    res.snapshots.push_back(s);
  }
  res.mass_final = solver.interior_mass(s);
  for (int k = 0; k < n; ++k)
    res.mass_defect = std::max(res.mass_defect, std::abs(res.mass_final[k] - res.mass_initial[k] +
                                                         res.boundary_flux[k]));
  res.boundary_ok = res.boundary_signal <= boundary_tol * jump;
  return res;
}

FieldState sample_state(const Grid1D& grid, int n, const InitialData& u0, double t) {
  FieldState s;
  s.t = t;
  s.n = n;
  s.u.resize(static_cast<size_t>(grid.nx) * n);
  for (int i = 0; i < grid.nx; ++i) {
    Vec v = u0(grid.x(i));
    if (v.size() != n) fail(ErrorCode::kInput, "initial data has the wrong dimension");
    for (int k = 0; k < n; ++k) s.u[static_cast<size_t>(i) * n + k] = v[k];
  }
  return s;
}

ConvergenceResult refine_convergence(models::ModelPtr model, const Grid1D& coarse,
                                     const SchemeConfig& scheme, const InitialData& u0,
                                     double T, int levels, const ExactSolution& exact) {
  if (levels < 3) fail(ErrorCode::kInput, "refine_convergence: need at least 3 levels");
  const int n = model->dim();
  ConvergenceResult out;
  std::vector<FieldState> finals;
  std::vector<Grid1D> grids;
  for (int l = 0; l < levels; ++l) {
    Grid1D g = coarse;
    g.nx = (coarse.nx - 1) * (1 << l) + 1;
    Solver solver(model, g, scheme, u0(g.x_min), u0(g.x_max));
    EvolveResult r = evolve(solver, sample_state(g, n, u0), {T}, kInf);
    finals.push_back(r.snapshots.back());
    grids.push_back(g);
    out.nx.push_back(g.nx);
  }
  const int pairs = exact ? levels : levels - 1;
  for (int l = 0; l < pairs; ++l) {
    std::vector<double> err(n, 0.0);
    const Grid1D& g = grids[0];
    for (int i = 0; i < g.nx; ++i) {
      Vec a = finals[l].at(i * (1 << l));
      Vec b = exact ? exact(g.x(i), T) : finals[l + 1].at(i * (1 << (l + 1)));
      for (int k = 0; k < n; ++k) err[k] += (a[k] - b[k]) * (a[k] - b[k]) * g.dx();
    }
    for (double& e : err) e = std::sqrt(e);
    out.errors.push_back(err);
  }
  out.order.assign(n, 0.0);
  const size_t last = out.errors.size() - 1;
  for (int k = 0; k < n; ++k) {
    out.order[k] = std::log2(out.errors[last - 1][k] / out.errors[last][k]);
    for (size_t l = 1; l < out.errors.size(); ++l)
      if (!(out.errors[l][k] < out.errors[l - 1][k])) out.monotone = false;
  }
  if (!out.monotone) out.warning = "errors are not monotone under refinement";
  return out;
}

void write_snapshots_csv(const Grid1D& grid, const std::vector<FieldState>& snaps,
                         const std::string& path, const std::string& header) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) fail(ErrorCode::kIo, "cannot write " + path);
  if (!header.empty()) std::fputs(header.c_str(), f);
  const int n = snaps.empty() ? 1 : snaps[0].n;
  std::fputs("t,x", f);
  for (int k = 0; k < n; ++k) std::fprintf(f, ",u%d", k + 1);
  std::fputc('\n', f);
  for (const auto& s : snaps)
    for (int i = 0; i < grid.nx; ++i) {
      std::fprintf(f, "%.17g,%.17g", s.t, grid.x(i));
      for (int k = 0; k < n; ++k) std::fprintf(f, ",%.17g", s.u[static_cast<size_t>(i) * n + k]);
      std::fputc('\n', f);
    }
  if (std::fclose(f) != 0) fail(ErrorCode::kIo, "error closing " + path);
}

}  // namespace shocklab::evolution
