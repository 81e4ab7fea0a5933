#pragma once

#include <functional>
#include <string>
#include <vector>

#include "shocklab/core/models.hpp"

namespace shocklab::evolution {

using models::Vec;

struct Grid1D {
  double x_min = -1.0;
  double x_max = 1.0;
  int nx = 256;

  double dx() const { return (x_max - x_min) / (nx - 1); }
  double x(int i) const { return x_min + i * dx(); }
  std::vector<double> nodes() const;
  void validate() const;
};

// Node-major storage: u[i*n + k] is component k at node i.
struct FieldState {
  double t = 0.0;
  int n = 1;
  std::vector<double> u;

  Vec at(int i) const { return Eigen::Map<const Vec>(u.data() + static_cast<size_t>(i) * n, n); }
  std::vector<double> component(int k) const;
};

enum class FluxScheme { kCentralKO, kLocalLaxFriedrichs };
enum class TimeScheme { kRK2, kIMEX };
// kAuto damps only the rows of B that vanish (hyperbolic components).
enum class Dissipation { kAuto, kOff, kAll };

struct SchemeConfig {
  double cfl = 0.4;
  double diffusion_number_max = 0.4;
  FluxScheme flux = FluxScheme::kCentralKO;
  TimeScheme time = TimeScheme::kRK2;
  int order = 4;  // 2 or 4
  Dissipation dissipation = Dissipation::kAuto;
  double ko_sigma = 0.3;
  double dt = 0.0;  // fixed base step; 0 selects it from the stability limits

  void validate() const;
};

std::string to_string(FluxScheme f);
std::string to_string(TimeScheme t);
std::string to_string(Dissipation d);

// Conservative method-of-lines solver with the two boundary nodes pinned to fixed states.
class Solver {
 public:
  Solver(models::ModelPtr model, Grid1D grid, SchemeConfig scheme, Vec left, Vec right);

  const Grid1D& grid() const { return grid_; }
  const SchemeConfig& scheme() const { return scheme_; }
  const models::ModelSystem& model() const { return *model_; }
  int dim() const { return n_; }

  // Largest admissible step for the state under the configured scheme.
  double stable_dt(const FieldState& s) const;
  // Global wave-speed bound used by the dissipation terms (fixed at construction
  // from the pinned states, refreshed by set_speed_bound).
  double speed_bound() const { return lambda_; }
  void set_speed_bound(double lambda) { lambda_ = lambda; }
  double spectral_radius(const FieldState& s) const;

  // One step; adds the time-integrated boundary flux (right minus left, per component)
  // to *boundary_flux when given.
  void step(FieldState& s, double dt, std::vector<double>* boundary_flux = nullptr) const;

  // Interior mass sum_{i=1}^{nx-2} u_i dx per component.
  std::vector<double> interior_mass(const FieldState& s) const;
  FieldState pinned(FieldState s) const;

  // du/dt for the interior nodes and the interface fluxes at the two boundary faces.
  void rhs(const std::vector<double>& u, std::vector<double>& dudt, double* flux_left,
           double* flux_right, bool with_diffusion = true) const;

 private:
  void fill_padded(const std::vector<double>& u) const;
  void diffuse_implicit(FieldState& s, double dt, std::vector<double>* boundary_flux) const;

  models::ModelPtr model_;
  Grid1D grid_;
  SchemeConfig scheme_;
  Vec left_, right_;
  int n_;
  double lambda_ = 0.0;
  std::vector<bool> damp_row_;
  static constexpr int kGhost = 3;
  mutable std::vector<double> pad_, fnode_, iflux_, tmp_;
};

void step(const Solver& solver, FieldState& state, double dt);

struct EvolveResult {
  std::vector<FieldState> snapshots;  // one per checkpoint
  double dt = 0.0;                    // base step
  long steps = 0;
  std::vector<double> mass_initial, mass_final, boundary_flux;
  double mass_defect = 0.0;           // max_k |M(T) - M(0) + int F dt|
  double boundary_signal = 0.0;       // max deviation from the pinned states within 10 cells
  bool boundary_ok = true;
};

// Integrates to each checkpoint exactly. Each interval uses ceil(interval / dt) equal
// steps, so two runs with the same dt and checkpoints take identical step sequences.
EvolveResult evolve(const Solver& solver, const FieldState& initial,
                    const std::vector<double>& checkpoints, double boundary_tol = 1e-6);

struct ConvergenceResult {
  std::vector<int> nx;
  std::vector<std::vector<double>> errors;  // [level][component], L2
  std::vector<double> order;                // per component, from the two finest pairs
  bool monotone = true;
  std::string warning;
};

using InitialData = std::function<Vec(double x)>;
using ExactSolution = std::function<Vec(double x, double t)>;

// Runs the same problem on nx, 2nx-1, 4nx-3, ... nodes. With an exact solution the
// errors are measured against it; otherwise successive differences on common nodes.
ConvergenceResult refine_convergence(models::ModelPtr model, const Grid1D& coarse,
                                     const SchemeConfig& scheme, const InitialData& u0,
                                     double T, int levels, const ExactSolution& exact = nullptr);

FieldState sample_state(const Grid1D& grid, int n, const InitialData& u0, double t = 0.0);

void write_snapshots_csv(const Grid1D& grid, const std::vector<FieldState>& snaps,
                         const std::string& path, const std::string& header = "");

}  // namespace shocklab::evolution
