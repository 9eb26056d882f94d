#pragma once

#include <vector>

#include "cplab/density.hpp"
#include "cplab/rate_history.hpp"
#include "cplab/trajectory.hpp"

namespace cp::wholeline {

// Positive-part mass and first moment of the evolved law, by quadrature of
// the Gaussian closed forms over the initial support.
struct MassIntegrals {
  double mass = 0.0;          // integral over x > 0 of c(x, T)
  double first_moment = 0.0;  // integral over x > 0 of x c(x, T)
};

MassIntegrals mass_integrals(const RateHistory& A, double eps,
                             const GridDensity& init, double T);

struct Options {
  double dt0 = 1e-3;             // floor step
  double dt_over_lambda = 2e-3;  // step grows with the coarsening scale
  double dt_max = 1.0;
  int max_fixed_point = 30;
  double fp_tol = 1e-10;
  double sample_factor = 1.04;   // geometric recording cadence
  double sample_min = 0.05;
};

// No-boundary evolver: the solution is the exact Gaussian mixture over the
// initial data given the history, so each step only re-solves the
// self-consistency Lambda = J/I at the new time by fixed point. Moment
// integrals are accumulated incrementally; kernels::moments is the
// from-scratch reference used in tests.
class Evolver {
 public:
  Evolver(GridDensity init, double eps, Options opt = {});

  void advance_to(double t_end);
  Trajectory take_trajectory();

  double time() const { return history_.t_back(); }
  double lambda() const { return history_.lambda_back(); }
  const RateHistory& history() const { return history_; }
  double eps() const { return eps_; }

  double coarsening_rate() const;  // from the boundary-value rate formula
  double ks_exponential() const;
  // sup of |beta - 1| over x in [0, window_mult * Lambda] where the tail is
  // resolvable
  double beta_sup_deviation(double window_mult = 5.0) const;
  double fixed_point_residual() const;

  // current-law evaluations (log scale where noted)
  double log_tail_at(double x) const;     // log integral_x^inf c
  double log_density_at(double x) const;  // log c(x)
  double log_excess_at(double x) const;   // log integral (x'-x)+ c dx'
  double beta_at(double x) const;

  // kernel moments of the self-consistent history, accumulated incrementally
  double m1() const;
  double m2() const;
  double sigma2() const;

 private:
  void record_row();
  void step(double dt);

  std::vector<double> y_, cw_;  // support nodes and Simpson-weighted data
  double eps_;
  Options opt_;
  RateHistory history_;
  double e_int_ = 0.0;  // integral of A
  double p1_ = 0.0;     // integral of 1/m1
  double p2_ = 0.0;     // integral of 1/m1^2
  double residual_ = 0.0;
  double next_sample_ = 0.0;
  Trajectory traj_;
};

// Rate evaluated from a frozen history at T (independent of the evolver's
// accumulators; used for cross-checks).
double coarsening_rate(const RateHistory& A, double eps, const GridDensity& init,
                       double T);

// Trend verdicts for the five monitored history functionals.
struct ConditionReport {
  bool a_decreasing = false;
  bool m1_growing = false;
  bool alpha_growing = false;         // m2/m1
  bool s2_over_m2_growing = false;
  bool s2_over_m1sq_bounded = false;  // grows but flattens
  double a_first = 0.0, a_last = 0.0;
  double m1_last = 0.0;
  double alpha_last = 0.0;
  double s2_over_m2_last = 0.0;
  double s2_over_m1sq_last = 0.0;
  double plateau_rel_change = 0.0;  // relative change over the last decade
};

ConditionReport asymptotic_conditions(const Trajectory& traj);

// Deviation series Lambda(t)/t - (1 - 1/(2 log t)), masked where log t <= 1,
// plus the drift-dispersion ratio Lambda*m2/(eps*sigma2) that should drift
// toward one. Heuristic report, no pass/fail.
struct LogRateRow {
  double t = 0.0;
  double deviation = 0.0;
  bool masked = true;
  double balance_ratio = 0.0;
};

std::vector<LogRateRow> log_rate_report(const Trajectory& traj, double eps);

}  // namespace cp::wholeline
