#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace shocklab::models {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// u_t + f(u)_x = (B(u) u_x)_x in a frame moving with speed s, i.e. f -> f - s u.
// Raw-pointer kernels are used by the solver; Eigen wrappers by everything else.
class ModelSystem {
 public:
  virtual ~ModelSystem() = default;

  virtual std::string name() const = 0;
  virtual int dim() const = 0;
  // Number of parabolic components; rows [0, n-r) of B vanish identically.
  virtual int parabolic_rank() const { return dim(); }
  virtual std::map<std::string, double> parameters() const = 0;

  virtual void physical_flux(const double* u, double* f) const = 0;
  virtual void physical_jacobian(const double* u, double* a) const = 0;  // row-major n x n
  // h[(k*n + i)*n + j] = d^2 f_k / du_i du_j
  virtual void hessian(const double* u, double* h) const = 0;
  virtual void viscosity(const double* u, double* b) const = 0;
  // db[(k*n + i)*n + j] = d B_ij / du_k
  virtual void viscosity_derivative(const double* u, double* db) const = 0;

  double frame_speed() const { return frame_speed_; }
  void set_frame_speed(double s) { frame_speed_ = s; }
  bool strictly_parabolic() const { return parabolic_rank() == dim(); }

  void flux(const double* u, double* f) const;
  void jacobian(const double* u, double* a) const;

  Vec flux(const Vec& u) const;
  Mat jacobian(const Vec& u) const;
  Mat viscosity(const Vec& u) const;
  // 0.5 d^2 f(u)(p, q)
  Vec half_hessian_apply(const Vec& u, const Vec& p, const Vec& q) const;

 private:
  double frame_speed_ = 0.0;
};

using ModelPtr = std::shared_ptr<const ModelSystem>;

class BurgersModel final : public ModelSystem {
 public:
  explicit BurgersModel(double nu = 1.0) : nu_(nu) {}
  std::string name() const override { return "burgers"; }
  int dim() const override { return 1; }
  std::map<std::string, double> parameters() const override;
  void physical_flux(const double* u, double* f) const override { f[0] = 0.5 * u[0] * u[0]; }
  void physical_jacobian(const double* u, double* a) const override { a[0] = u[0]; }
  void hessian(const double*, double* h) const override { h[0] = 1.0; }
  void viscosity(const double*, double* b) const override { b[0] = nu_; }
  void viscosity_derivative(const double*, double* db) const override { db[0] = 0.0; }

 private:
  double nu_;
};

// f = (u1^2/2 + u2^2, u2^2/2 + u1 u2), B = [[1, b12], [0, 1]]
class QuadraticModel final : public ModelSystem {
 public:
  explicit QuadraticModel(double b12 = 0.0) : b12_(b12) {}
  std::string name() const override { return "quadratic2x2"; }
  int dim() const override { return 2; }
  std::map<std::string, double> parameters() const override;
  void physical_flux(const double* u, double* f) const override;
  void physical_jacobian(const double* u, double* a) const override;
  void hessian(const double* u, double* h) const override;
  void viscosity(const double* u, double* b) const override;
  void viscosity_derivative(const double* u, double* db) const override;

 private:
  double b12_;
};

// f = |u|^2 u, B = nu I
class CubicModel final : public ModelSystem {
 public:
  explicit CubicModel(double nu = 1.0) : nu_(nu) {}
  std::string name() const override { return "cubic"; }
  int dim() const override { return 2; }
  std::map<std::string, double> parameters() const override;
  void physical_flux(const double* u, double* f) const override;
  void physical_jacobian(const double* u, double* a) const override;
  void hessian(const double* u, double* h) const override;
  void viscosity(const double* u, double* b) const override;
  void viscosity_derivative(const double* u, double* db) const override;

 private:
  double nu_;
};

// Lagrangian isentropic gas, state (v, w): f = (-w, v^-gamma), B = diag(0, mu/v).
class IsentropicNSModel final : public ModelSystem {
 public:
  IsentropicNSModel(double gamma = 5.0 / 3.0, double mu = 1.0) : gamma_(gamma), mu_(mu) {}
  std::string name() const override { return "isentropic_ns"; }
  int dim() const override { return 2; }
  int parabolic_rank() const override { return 1; }
  std::map<std::string, double> parameters() const override;
  void physical_flux(const double* u, double* f) const override;
  void physical_jacobian(const double* u, double* a) const override;
  void hessian(const double* u, double* h) const override;
  void viscosity(const double* u, double* b) const override;
  void viscosity_derivative(const double* u, double* db) const override;
  double pressure(double v) const;

 private:
  double gamma_, mu_;
};

// f = A u, constant B.
class LinearModel final : public ModelSystem {
 public:
  LinearModel(Mat a, Mat b);
  std::string name() const override { return "linear"; }
  int dim() const override { return static_cast<int>(a_.rows()); }
  int parabolic_rank() const override { return rank_; }
  std::map<std::string, double> parameters() const override;
  void physical_flux(const double* u, double* f) const override;
  void physical_jacobian(const double* u, double* a) const override;
  void hessian(const double* u, double* h) const override;
  void viscosity(const double* u, double* b) const override;
  void viscosity_derivative(const double* u, double* db) const override;

 private:
  Mat a_, b_;
  int rank_;
};

// Builds a model from its registry name and string parameters. frame_speed is
// accepted by every model.
ModelPtr make_model(const std::string& name, const std::map<std::string, std::string>& params);
std::vector<std::string> model_names();

// Least-squares Rankine-Hugoniot speed (f(u+) - f(u-)) . (u+ - u-) / |u+ - u-|^2 in the
// model's physical frame.
double shock_speed(const ModelSystem& model, const Vec& um, const Vec& up);
double rankine_hugoniot_residual(const ModelSystem& model, const Vec& um, const Vec& up);

struct EndstateSpectrum {
  Vec u;
  Vec speeds;   // ascending
  Mat left;     // rows l_i
  Mat right;    // columns r_i, unit length, first nonzero entry positive
  Vec beta;     // l_i B r_i
  Vec gamma;    // l_i . 0.5 d^2 f(r_i, r_i)
  int n() const { return static_cast<int>(speeds.size()); }
};

EndstateSpectrum endstate_spectrum(const ModelSystem& model, const Vec& u);

struct CouplingTensors {
  int n = 0;
  std::vector<double> gamma;  // Gamma^i_jk at (i*n + j)*n + k
  Mat b;                      // b^i_j at (i, j)
  double Gamma(int i, int j, int k) const { return gamma[(i * n + j) * n + k]; }
  double max_residual = 0.0;  // of the defining linear systems
};

CouplingTensors coupling_coefficients(const EndstateSpectrum& spectrum, const ModelSystem& model);

struct StabilityReport {
  double majda_pego_value = 0.0;  // max_k max Re sigma(-ik A - k^2 B)/k^2 over both endstates
  bool majda_pego = false;
  double coupling_margin = 0.0;   // min over eigenvectors r of |B r| / |r|
  bool genuine_coupling = false;
  double k2_value = 0.0;          // max_xi max Re sigma(...) (1 + xi^2)/xi^2
  bool k2 = false;
  double good_b_value = 0.0;      // min Re sigma(b2) on the parabolic block
  bool good_b = false;
  bool strictly_parabolic = true;
};

std::vector<double> default_frequency_grid();  // 400 log-spaced points in [1e-3, 1e3]

StabilityReport stability_checks(const ModelSystem& model, const Vec& um, const Vec& up,
                                 const std::vector<double>& k_grid = default_frequency_grid(),
                                 const std::vector<double>& xi_grid = default_frequency_grid());

enum class ShockType { kLax, kOvercompressive };

struct ShockClass {
  ShockType type = ShockType::kLax;
  int ell = 1;
  int incoming_minus = 0;  // a_i^- > 0
  int incoming_plus = 0;   // a_i^+ < 0
};

ShockClass classify_shock(const EndstateSpectrum& minus, const EndstateSpectrum& plus);
std::string to_string(ShockType type);

}  // namespace shocklab::models
