#pragma once

#include <string>
#include <vector>

#include "shocklab/core/models.hpp"

namespace shocklab::profile {

using models::Mat;
using models::ModelSystem;
using models::Vec;

struct ProfileOptions {
  double half_width = 40.0;       // initial sampling half-width, auto-extended
  double max_half_width = 4000.0;
  double spacing = 1.0 / 64.0;    // sampling step of the stored profile
  double endstate_tol = 1e-6;
  double manifold_offset = 1e-6;  // start offset along the saddle eigenvector
  double abs_tol = 1e-13;
  double rel_tol = 1e-12;
  double section_offset = 0.0;    // extra section coordinate (internal family parameter)
};

// Right-hand side of the stationary profile equation B(u) u' = f(u) - f(u_-), written
// as an explicit ODE. For block-degenerate B the algebraic rows are differentiated
// along the constraint so the full state is integrated.
class ProfileOde {
 public:
  ProfileOde(const ModelSystem& model, const Vec& u_minus);
  void rhs(const double* u, double* du) const;
  Vec rhs(const Vec& u) const;
  int dim() const { return n_; }
  int reduced_dim() const { return r_; }
  // Eigenvalues (real parts) and eigenvectors of the linearization at a rest point,
  // restricted to the r nontrivial directions; ascending.
  void linearize(const Vec& u, std::vector<double>* eig, std::vector<Vec>* vecs) const;
  // Residual of B(u) u' - (f(u) - f(u_-)).
  Vec residual(const Vec& u, const Vec& du) const;
  // Solves the algebraic rows for components [1, n) given component 0.
  Vec complete_section_point(double u0, const Vec& guess) const;

 private:
  const ModelSystem& model_;
  Vec um_, fm_;
  int n_, r_;
};

// Uniformly sampled profile, phase fixed so component 0 equals the endstate midpoint
// at x = 0. Values and exact ODE derivatives are stored; evaluation is cubic Hermite.
struct ShockProfile {
  int n = 0;
  double x0 = 0.0;
  double h = 0.0;
  int count = 0;
  std::vector<double> values;
  std::vector<double> derivs;
  Vec u_minus, u_plus;
  double speed = 0.0;            // frame speed of the model used
  double tail_rate_minus = 0.0;  // slowest decay rate of the linearization, per side
  double tail_rate_plus = 0.0;
  double section_value = 0.0;    // component-1 value at x = 0 when relevant

  double x(int i) const { return x0 + i * h; }
  double x_end() const { return x0 + (count - 1) * h; }
  void eval(double x, double* u) const;
  void eval_dx(double x, double* du) const;
  Vec eval(double x) const;
  Vec eval_dx(double x) const;
};

ShockProfile solve_profile(const ModelSystem& model, const Vec& um, const Vec& up,
                           const ProfileOptions& opt = {});

// max over nodes of |B(u) u' - (f(u) - f(u_-))| with sixth-order differences.
double profile_residual(const ModelSystem& model, const ShockProfile& p);

struct TailFit {
  double alpha_minus = 0.0;
  double alpha_plus = 0.0;
  bool ok = false;
  bool oscillatory = false;
  std::string warning;
};

// Fits |g - g_{+-}| ~ exp(-alpha |x|) on each side over the window where the distance
// lies in [floor, 1e-3].
TailFit tail_fit(const std::vector<double>& x, const std::vector<double>& values, int n,
                 const Vec& left_limit, const Vec& right_limit, double floor = 1e-10);
TailFit tail_fit(const ShockProfile& p);

// Stable/unstable counts used to pick the integration strategy.
struct RestPointInfo {
  int unstable_minus = 0;
  int stable_plus = 0;
  int reduced_dim = 0;
  std::vector<double> eig_minus, eig_plus;
};

RestPointInfo rest_point_info(const ModelSystem& model, const Vec& um, const Vec& up);

class ProfileFamily {
 public:
  ProfileFamily(models::ModelPtr model, ShockProfile base, const ProfileOptions& opt);

  int ell() const { return ell_; }
  const ShockProfile& base() const { return base_; }
  const models::ModelSystem& model() const { return *model_; }
  // Direction i sampled on the base grid (count * n values).
  const std::vector<double>& direction(int i) const { return directions_[i]; }
  const Vec& mass(int i) const { return masses_[i]; }
  double direction_tail_rate(int i) const { return direction_tail_[i]; }

  // Member u^delta evaluated at the given points (interleaved n values per point).
  void evaluate(const Vec& delta, const std::vector<double>& xs, std::vector<double>* out) const;
  // Finite-difference derivatives of evaluate with respect to delta.
  void jacobian(const Vec& delta, const std::vector<double>& xs,
                std::vector<std::vector<double>>* cols) const;

  double internal_scale() const { return internal_scale_; }
  double internal_shift() const { return internal_shift_; }
  int detected_extra() const { return ell_ - 1; }

 private:
  ShockProfile member_profile(double eta) const;

  models::ModelPtr model_;
  ShockProfile base_;
  ProfileOptions opt_;
  int ell_ = 1;
  std::vector<std::vector<double>> directions_;
  std::vector<Vec> masses_;
  std::vector<double> direction_tail_;
  double internal_scale_ = 0.0;  // d eta / d delta_2
  double internal_shift_ = 0.0;  // translation mixed into delta_2 for L2 orthogonality
  mutable std::vector<std::pair<double, ShockProfile>> cache_;
};

// Counts independent non-translation connecting directions by perturbed shooting from
// the section point; `eta` is the perturbation size.
int count_family_directions(const ModelSystem& model, const ShockProfile& base,
                            const ProfileOptions& opt, double eta);

ProfileFamily profile_family(models::ModelPtr model, const ShockProfile& base,
                             const ProfileOptions& opt = {});

// CSV with columns x, u1..un.
void write_profile_csv(const ShockProfile& p, const std::string& path, const std::string& header);
ShockProfile read_profile_csv(const std::string& path);

}  // namespace shocklab::profile
