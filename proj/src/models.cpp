#include "shocklab/core/models.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include "shocklab/core/error.hpp"
#include "shocklab/core/numerics.hpp"

namespace shocklab::models {

void ModelSystem::flux(const double* u, double* f) const {
  physical_flux(u, f);
  const int n = dim();
  for (int i = 0; i < n; ++i) f[i] -= frame_speed_ * u[i];
}

void ModelSystem::jacobian(const double* u, double* a) const {
  physical_jacobian(u, a);
  const int n = dim();
  for (int i = 0; i < n; ++i) a[i * n + i] -= frame_speed_;
}

Vec ModelSystem::flux(const Vec& u) const {
  Vec f(dim());
  flux(u.data(), f.data());
  return f;
}

Mat ModelSystem::jacobian(const Vec& u) const {
  const int n = dim();
  std::vector<double> a(n * n);
  jacobian(u.data(), a.data());
  Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = a[i * n + j];
  return m;
}

Mat ModelSystem::viscosity(const Vec& u) const {
  const int n = dim();
  std::vector<double> b(n * n);
  viscosity(u.data(), b.data());
  Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = b[i * n + j];
  return m;
}

Vec ModelSystem::half_hessian_apply(const Vec& u, const Vec& p, const Vec& q) const {
  const int n = dim();
  std::vector<double> h(n * n * n);
  hessian(u.data(), h.data());
  Vec out = Vec::Zero(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out[k] += 0.5 * h[(k * n + i) * n + j] * p[i] * q[j];
  return out;
}

std::map<std::string, double> BurgersModel::parameters() const {
  return {{"viscosity", nu_}, {"frame_speed", frame_speed()}};
}

std::map<std::string, double> QuadraticModel::parameters() const {
  return {{"b12", b12_}, {"frame_speed", frame_speed()}};
}

void QuadraticModel::physical_flux(const double* u, double* f) const {
  f[0] = 0.5 * u[0] * u[0] + u[1] * u[1];
  f[1] = 0.5 * u[1] * u[1] + u[0] * u[1];
}

void QuadraticModel::physical_jacobian(const double* u, double* a) const {
  a[0] = u[0];
  a[1] = 2 * u[1];
  a[2] = u[1];
  a[3] = u[1] + u[0];
}

void QuadraticModel::hessian(const double*, double* h) const {
  // f_0: d11 = 1, d22 = 2; f_1: d12 = d21 = 1, d22 = 1
  h[0] = 1; h[1] = 0; h[2] = 0; h[3] = 2;
  h[4] = 0; h[5] = 1; h[6] = 1; h[7] = 1;
}

void QuadraticModel::viscosity(const double*, double* b) const {
  b[0] = 1; b[1] = b12_; b[2] = 0; b[3] = 1;
}

void QuadraticModel::viscosity_derivative(const double*, double* db) const {
  std::fill(db, db + 8, 0.0);
}

std::map<std::string, double> CubicModel::parameters() const {
  return {{"viscosity", nu_}, {"frame_speed", frame_speed()}};
}

void CubicModel::physical_flux(const double* u, double* f) const {
  double q = u[0] * u[0] + u[1] * u[1];
  f[0] = q * u[0];
  f[1] = q * u[1];
}

void CubicModel::physical_jacobian(const double* u, double* a) const {
  double q = u[0] * u[0] + u[1] * u[1];
  a[0] = q + 2 * u[0] * u[0];
  a[1] = 2 * u[0] * u[1];
  a[2] = 2 * u[1] * u[0];
  a[3] = q + 2 * u[1] * u[1];
}

void CubicModel::hessian(const double* u, double* h) const {
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        h[(k * 2 + i) * 2 + j] = 2 * ((i == j) * u[k] + (k == j) * u[i] + (k == i) * u[j]);
}

void CubicModel::viscosity(const double*, double* b) const {
  b[0] = nu_; b[1] = 0; b[2] = 0; b[3] = nu_;
}

void CubicModel::viscosity_derivative(const double*, double* db) const {
  std::fill(db, db + 8, 0.0);
}

std::map<std::string, double> IsentropicNSModel::parameters() const {
  return {{"gamma", gamma_}, {"mu", mu_}, {"frame_speed", frame_speed()}};
}

double IsentropicNSModel::pressure(double v) const { return std::pow(v, -gamma_); }

void IsentropicNSModel::physical_flux(const double* u, double* f) const {
  f[0] = -u[1];
  f[1] = pressure(u[0]);
}

void IsentropicNSModel::physical_jacobian(const double* u, double* a) const {
  a[0] = 0;
  a[1] = -1;
  a[2] = -gamma_ * std::pow(u[0], -gamma_ - 1);
  a[3] = 0;
}

void IsentropicNSModel::hessian(const double* u, double* h) const {
  std::fill(h, h + 8, 0.0);
  h[4] = gamma_ * (gamma_ + 1) * std::pow(u[0], -gamma_ - 2);
}

void IsentropicNSModel::viscosity(const double* u, double* b) const {
  b[0] = 0; b[1] = 0; b[2] = 0; b[3] = mu_ / u[0];
}

void IsentropicNSModel::viscosity_derivative(const double* u, double* db) const {
  std::fill(db, db + 8, 0.0);
  db[3] = -mu_ / (u[0] * u[0]);  // d B_11 / d v
}

LinearModel::LinearModel(Mat a, Mat b) : a_(std::move(a)), b_(std::move(b)) {
  if (a_.rows() != a_.cols() || b_.rows() != a_.rows() || b_.cols() != a_.cols() || a_.rows() < 1)
    fail(ErrorCode::kConfig, "linear model: A and B must be square of equal size");
  const int n = static_cast<int>(a_.rows());
  int zero_rows = 0;
  while (zero_rows < n && b_.row(zero_rows).norm() == 0.0) ++zero_rows;
  for (int i = zero_rows; i < n; ++i)
    if (b_.row(i).norm() == 0.0)
      fail(ErrorCode::kConfig, "linear model: degenerate rows of B must come first");
  rank_ = n - zero_rows;
}

std::map<std::string, double> LinearModel::parameters() const {
  std::map<std::string, double> p{{"frame_speed", frame_speed()}};
  for (int i = 0; i < a_.rows(); ++i)
    for (int j = 0; j < a_.cols(); ++j) {
      p["A" + std::to_string(i) + std::to_string(j)] = a_(i, j);
      p["B" + std::to_string(i) + std::to_string(j)] = b_(i, j);
    }
  return p;
}

void LinearModel::physical_flux(const double* u, double* f) const {
  const int n = dim();
  for (int i = 0; i < n; ++i) {
    f[i] = 0;
    for (int j = 0; j < n; ++j) f[i] += a_(i, j) * u[j];
  }
}

void LinearModel::physical_jacobian(const double*, double* a) const {
  const int n = dim();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a[i * n + j] = a_(i, j);
}

void LinearModel::hessian(const double*, double* h) const {
  const int n = dim();
  std::fill(h, h + n * n * n, 0.0);
}

void LinearModel::viscosity(const double*, double* b) const {
  const int n = dim();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b[i * n + j] = b_(i, j);
}

void LinearModel::viscosity_derivative(const double*, double* db) const {
  const int n = dim();
  std::fill(db, db + n * n * n, 0.0);
}

namespace {

double number(const std::map<std::string, std::string>& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  if (it == p.end()) return fallback;
  try {
    size_t used = 0;
    double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::kConfig, "model parameter '" + key + "' is not a number: " + it->second);
  }
}

// "a,b;c,d" -> 2x2
Mat matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::stringstream rs(text);
  std::string row;
  while (std::getline(rs, row, ';')) {
    std::vector<double> r;
    std::stringstream cs(row);
    std::string cell;
    while (std::getline(cs, cell, ',')) r.push_back(std::stod(cell));
    rows.push_back(r);
  }
  if (rows.empty()) fail(ErrorCode::kConfig, "empty matrix parameter");
  Mat m(rows.size(), rows[0].size());
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) fail(ErrorCode::kConfig, "ragged matrix parameter");
    for (size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

void check_keys(const std::map<std::string, std::string>& p, std::initializer_list<const char*> ok,
                const std::string& model) {
  for (const auto& [k, v] : p) {
    bool known = k == "frame_speed";
    for (const char* o : ok) known = known || k == o;
    if (!known) fail(ErrorCode::kConfig, "unknown parameter '" + k + "' for model " + model);
  }
}

}  // namespace

ModelPtr make_model(const std::string& name, const std::map<std::string, std::string>& params) {
  std::shared_ptr<ModelSystem> m;
  if (name == "burgers") {
    check_keys(params, {"viscosity"}, name);
    double nu = number(params, "viscosity", 1.0);
    if (!(nu > 0)) fail(ErrorCode::kConfig, "burgers: viscosity must be positive");
    m = std::make_shared<BurgersModel>(nu);
  } else if (name == "quadratic2x2") {
    check_keys(params, {"b12"}, name);
    m = std::make_shared<QuadraticModel>(number(params, "b12", 0.0));
  } else if (name == "cubic") {
    check_keys(params, {"viscosity"}, name);
    double nu = number(params, "viscosity", 1.0);
    if (!(nu > 0)) fail(ErrorCode::kConfig, "cubic: viscosity must be positive");
    m = std::make_shared<CubicModel>(nu);
  } else if (name == "isentropic_ns") {
    check_keys(params, {"gamma", "mu"}, name);
    double g = number(params, "gamma", 5.0 / 3.0), mu = number(params, "mu", 1.0);
    if (!(g >= 1) || !(mu > 0)) fail(ErrorCode::kConfig, "isentropic_ns: need gamma >= 1, mu > 0");
    m = std::make_shared<IsentropicNSModel>(g, mu);
  } else if (name == "linear") {
    check_keys(params, {"A", "B"}, name);
    auto a = params.find("A"), b = params.find("B");
    if (a == params.end() || b == params.end()) fail(ErrorCode::kConfig, "linear: A and B required");
    m = std::make_shared<LinearModel>(matrix(a->second), matrix(b->second));
  } else {
    fail(ErrorCode::kConfig, "unknown model '" + name + "'");
  }
  m->set_frame_speed(number(params, "frame_speed", 0.0));
  return m;
}

std::vector<std::string> model_names() {
  return {"burgers", "quadratic2x2", "cubic", "isentropic_ns", "linear"};
}

double shock_speed(const ModelSystem& model, const Vec& um, const Vec& up) {
  const int n = model.dim();
  Vec fm(n), fp(n);
  model.physical_flux(um.data(), fm.data());
  model.physical_flux(up.data(), fp.data());
  Vec du = up - um;
  if (du.norm() == 0) fail(ErrorCode::kConfig, "shock_speed: endstates coincide");
  return (fp - fm).dot(du) / du.squaredNorm();
}

double rankine_hugoniot_residual(const ModelSystem& model, const Vec& um, const Vec& up) {
  return (model.flux(up) - model.flux(um)).norm();
}

EndstateSpectrum endstate_spectrum(const ModelSystem& model, const Vec& u) {
  const int n = model.dim();
  if (u.size() != n) fail(ErrorCode::kInput, "endstate_spectrum: state has wrong dimension");
  Mat a = model.jacobian(u);
  Eigen::EigenSolver<Mat> es(a);
  if (es.info() != Eigen::Success) fail(ErrorCode::kH2Violation, "eigen-decomposition failed");
  const double rho = std::max(1.0, a.cwiseAbs().maxCoeff());
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) {
    order[i] = i;
    if (std::abs(es.eigenvalues()[i].imag()) > 1e-10 * rho)
      fail(ErrorCode::kH2Violation, "complex characteristic speeds");
  }
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    return es.eigenvalues()[i].real() < es.eigenvalues()[j].real();
  });
  EndstateSpectrum s;
  s.u = u;
  s.speeds.resize(n);
  s.right.resize(n, n);
  for (int k = 0; k < n; ++k) {
    s.speeds[k] = es.eigenvalues()[order[k]].real();
    Vec r = es.eigenvectors().col(order[k]).real();
    r.normalize();
    for (int c = 0; c < n; ++c)
      if (std::abs(r[c]) > 1e-12) {
        if (r[c] < 0) r = -r;
        break;
      }
    s.right.col(k) = r;
  }
  for (int k = 1; k < n; ++k)
    if (s.speeds[k] - s.speeds[k - 1] < 1e-8 * rho)
      fail(ErrorCode::kH2Violation, "repeated characteristic speeds");
  s.left = s.right.inverse();
  Mat b = model.viscosity(u);
  s.beta.resize(n);
  s.gamma.resize(n);
  for (int i = 0; i < n; ++i) {
    s.beta[i] = s.left.row(i).dot(b * s.right.col(i));
    s.gamma[i] = s.left.row(i).dot(model.half_hessian_apply(u, s.right.col(i), s.right.col(i)));
  }
  return s;
}

CouplingTensors coupling_coefficients(const EndstateSpectrum& spec, const ModelSystem& model) {
  const int n = spec.n();
  CouplingTensors c;
  c.n = n;
  c.gamma.assign(n * n * n, 0.0);
  Mat b = model.viscosity(spec.u);
  c.b = spec.left * b * spec.right;
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      Vec g = model.half_hessian_apply(spec.u, spec.right.col(j), spec.right.col(k));
      Vec coef = spec.left * g;
      c.max_residual = std::max(c.max_residual, (spec.right * coef - g).norm());
      for (int i = 0; i < n; ++i) c.gamma[(i * n + j) * n + k] = coef[i];
    }
  for (int j = 0; j < n; ++j)
    c.max_residual = std::max(c.max_residual, (spec.right * c.b.col(j) - b * spec.right.col(j)).norm());
  return c;
}

std::vector<double> default_frequency_grid() {
  std::vector<double> k(400);
  for (int i = 0; i < 400; ++i) k[i] = std::pow(10.0, -3.0 + 6.0 * i / 399.0);
  return k;
}

namespace {

double max_real_eig(const Eigen::MatrixXcd& m) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(m, false);
  double best = -kInf;
  for (int i = 0; i < m.rows(); ++i) best = std::max(best, es.eigenvalues()[i].real());
  return best;
}

}  // namespace

StabilityReport stability_checks(const ModelSystem& model, const Vec& um, const Vec& up,
                                 const std::vector<double>& k_grid,
                                 const std::vector<double>& xi_grid) {
  const int n = model.dim();
  const std::complex<double> iu(0, 1);
  StabilityReport rep;
  rep.strictly_parabolic = model.strictly_parabolic();
  rep.majda_pego_value = -kInf;
  rep.k2_value = -kInf;
  rep.coupling_margin = kInf;
  rep.good_b_value = kInf;
  for (const Vec* u : {&um, &up}) {
    Mat a = model.jacobian(*u);
    Mat b = model.viscosity(*u);
    for (double k : k_grid) {
      Eigen::MatrixXcd sym = -iu * k * a.cast<std::complex<double>>() -
                             k * k * b.cast<std::complex<double>>();
      double m = max_real_eig(sym);
      rep.majda_pego_value = std::max(rep.majda_pego_value, m / (k * k));
    }
    for (double xi : xi_grid) {
      Eigen::MatrixXcd sym = -iu * xi * a.cast<std::complex<double>>() -
                             xi * xi * b.cast<std::complex<double>>();
      double m = max_real_eig(sym);
      rep.k2_value = std::max(rep.k2_value, m * (1 + xi * xi) / (xi * xi));
    }
    EndstateSpectrum s = endstate_spectrum(model, *u);
    for (int i = 0; i < n; ++i)
      rep.coupling_margin = std::min(rep.coupling_margin, (b * s.right.col(i)).norm());
    const int r = model.parabolic_rank();
    Mat b2 = b.bottomRightCorner(r, r);
    Eigen::EigenSolver<Mat> es(b2, false);
    for (int i = 0; i < r; ++i) rep.good_b_value = std::min(rep.good_b_value, es.eigenvalues()[i].real());
  }
  rep.genuine_coupling = rep.coupling_margin > 1e-8;
  rep.k2 = rep.k2_value < 0;
  rep.good_b = rep.good_b_value > 0;
  // With rank-deficient B the symbol cannot be uniformly ~ -k^2; the block
  // structure (positive b2) together with K2 plays that role.
  rep.majda_pego = rep.strictly_parabolic ? rep.majda_pego_value < 0 : (rep.good_b && rep.k2);
  return rep;
}

ShockClass classify_shock(const EndstateSpectrum& minus, const EndstateSpectrum& plus) {
  const int n = minus.n();
  if (plus.n() != n) fail(ErrorCode::kInput, "classify_shock: dimension mismatch");
  ShockClass c;
  for (int i = 0; i < n; ++i) {
    if (minus.speeds[i] == 0 || plus.speeds[i] == 0)
      fail(ErrorCode::kH2Violation, "classify_shock: zero characteristic speed");
    if (minus.speeds[i] > 0) ++c.incoming_minus;
    if (plus.speeds[i] < 0) ++c.incoming_plus;
  }
  c.ell = c.incoming_minus + c.incoming_plus - n;
  if (c.ell <= 0) fail(ErrorCode::kUnsupported, "classify_shock: undercompressive shock (too few incoming characteristics)");
  c.type = c.ell == 1 ? ShockType::kLax : ShockType::kOvercompressive;
  return c;
}

std::string to_string(ShockType type) {
  return type == ShockType::kLax ? "lax" : "overcompressive";
}

}  // namespace shocklab::models
