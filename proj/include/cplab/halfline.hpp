#pragma once

#include <vector>

#include "cplab/density.hpp"
#include "cplab/halfline_solver.hpp"
#include "cplab/rate_history.hpp"
#include "cplab/trajectory.hpp"

namespace cp::halfline {

struct GridSpec {
  double layer_spacing = 0.0;  // 0: eps/15 (contract: at most eps/10)
  double layer_width = 0.0;    // 0: 8*eps
  double growth = 1.05;
  double cap_fraction = 0.02;  // far-field spacing cap as a fraction of Lambda
  double x_max = 0.0;          // 0: sized from the initial data
  double tail_mass_tol = 1e-10;
};

struct Options {
  double dt0 = 1e-4;
  double dt_over_lambda = 2e-3;
  double dt_max = 0.5;
  double theta = 0.5;
  int rannacher_steps = 4;
  int max_fixed_point = 30;
  double fp_tol = 1e-12;       // on the first-moment drift, relative
  double mass_tol = 1e-3;      // run aborts beyond this conservation defect
  double negativity_tol = 1e-8;
  double sample_factor = 1.04;
  double sample_min = 0.05;
};

// Self-consistent wall evolver. The drift parameter is chosen each step so
// the discrete first moment is conserved exactly (the conservation law is
// the model's defining constraint); the reported Lambda is the measured
// moment ratio, and the drift history is what downstream Green's-function
// solves must be fed.
class Evolver {
 public:
  Evolver(const GridDensity& init, double eps, GridSpec gspec = {},
          Options opt = {});

  void advance_to(double t_end);
  Trajectory take_trajectory();

  double time() const { return drift_history_.t_back(); }
  double lambda() const;  // first moment / mass = 1/mass (normalized)
  double eps() const { return eps_; }
  const RateHistory& drift_history() const { return drift_history_; }
  double mass_error() const;  // |J - 1|
  double coarsening_rate() const;  // wall-gradient rate via the face flux
  double wall_gradient_rate() const;  // same from a one-sided quadratic fit
  double wall_flux() const { return last_wall_flux_; }

  GridDensity state() const;
  double ks_exponential() const;
  double beta_at0() const;
  // sup |beta - 1| over (window_from, resolvable end)
  double beta_window_deviation(double window_from) const;
  double beta_max() const;  // sup of beta over the resolvable range

 private:
  void maybe_extend_grid();
  void record_row();
  void step(double dt);
  std::vector<double> beta_profile(std::vector<double>* wout = nullptr) const;

  Grid grid_;
  std::vector<double> c_;
  double eps_;
  GridSpec gspec_;
  Options opt_;
  StepWorkspace work_;
  RateHistory drift_history_;
  double j0_ = 0.0;  // conserved first moment (normalized to 1)
  long steps_ = 0;
  double last_wall_flux_ = 0.0;
  // moment accumulators of the drift history
  double e_int_ = 0.0, p1_ = 0.0, p2_ = 0.0;
  double next_sample_ = 0.0;
  Trajectory traj_;
};

// Numerical Dirichlet fundamental solution: evolve a mollified point source
// at y under the frozen drift history out to time T. The source width is
// mollify_cells local grid spacings.
GridDensity dirichlet_green(const RateHistory& drift_history, double eps,
                            double y, double T, GridSpec gspec = {},
                            double mollify_cells = 3.0,
                            double dt_scale = 1.0);

// Whole-line kernel values for the same mollified source (closed form: the
// Gaussian picks up the mollifier variance), on the given x nodes.
std::vector<double> whole_line_green_mollified(const RateHistory& history,
                                               double eps, double y, double T,
                                               double mollify_width,
                                               const std::vector<double>& x);

struct ExitCostCurve {
  double y = 0.0, T = 0.0, eps = 0.0;
  std::vector<double> x, K, q;
  std::size_t masked_from = 0;  // entries beyond are unresolvable
};

// K = G_D/G clamped to [0, 1-1e-15]; q = -eps log(1-K). Samples where the
// free kernel is unresolvable are masked.
ExitCostCurve exit_ratio(const std::vector<double>& x,
                         const std::vector<double>& g_dirichlet,
                         const std::vector<double>& g_free, double eps,
                         double y, double T);

struct QLimitHorizon {
  double T = 0.0;
  std::vector<double> x, q_over_2x, lower_over_2x, upper_over_2x;
};

struct QLimitReport {
  bool doubling_ok = false;   // Lambda(T + Lambda(T)) >= (1+delta) Lambda(T)
  double doubling_delta = 0.0;
  std::vector<QLimitHorizon> horizons;
};

QLimitReport q_limit_check(const Trajectory& traj, double eps, double y,
                           const std::vector<double>& x_window,
                           const std::vector<double>& horizons,
                           GridSpec gspec = {});

// Survival probability u(y, 0, T) by an independent fitted-operator solve of
// the terminal-value problem (not the adjoint of the forward matrix, so the
// duality test against the Green's function mass is a two-route check).
double survival_weight(const RateHistory& drift_history, double eps, double y,
                       double T, GridSpec gspec = {});

std::vector<double> survival_weight_profile(const RateHistory& drift_history,
                                            double eps,
                                            const std::vector<double>& ys,
                                            double T, GridSpec gspec = {});

struct BoundsReport {
  double beta_ceiling = 0.0;
  double rate_ceiling = 0.0;
  double min_doubling_ratio = 0.0;  // over T with T + Lambda(T) <= t_end
  double t0 = 0.0;
};

// Scans a finished trajectory for the ceiling/doubling witnesses past the
// transient t0.
BoundsReport coarsening_bounds_check(const Trajectory& traj, double t0);

}  // namespace cp::halfline
