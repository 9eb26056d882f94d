#pragma once

#include <functional>

#include "cplab/density.hpp"
#include "cplab/measures.hpp"
#include "cplab/rate_history.hpp"
#include "cplab/trajectory.hpp"

namespace cp::classical {

// Characteristic relabeling of the zero-diffusion transport: the point that
// flows to x at time t started at (x + m2(t))/m1(t).
double transport_map(const RateHistory& A, double x, double t);

struct Options {
  double dt = 0.0;               // 0: defaults to 1e-3 * Lambda(0)
  double sample_interval = 0.0;  // 0: defaults to 25 * dt
  int max_fixed_point = 20;
  double fp_tol = 1e-10;
  int max_halvings = 10;
  bool record_snapshots = false;
};

// Zero-diffusion evolver by exact tail transport: the tail of the current law
// is the initial tail read at transported positions, and Lambda solves the
// self-consistency per step by damped fixed point.
class Evolver {
 public:
  Evolver(const GridDensity& init, Options opt = {});
  Evolver(const SelfSimilarFamily& family, Options opt = {});

  void advance_to(double t_end);
  Trajectory take_trajectory();

  double time() const { return history_.t_back(); }
  double lambda() const { return history_.lambda_back(); }
  const RateHistory& history() const { return history_; }

  // Coarsening rate of the current state: the beta value of the law at the
  // origin, which equals the initial beta at the transported origin.
  double coarsening_rate() const;

  double tail_at(double x) const;      // w(x, t)
  double beta_at(double x) const;      // beta of the current law at x
  double ks_exponential() const;       // distance of X_t/<X_t> to Exp(1)
  GridDensity snapshot(const std::vector<double>& grid) const;

  double self_consistency_residual() const;

 private:
  void init_common();
  void record_row();
  double lambda_candidate(double alpha, double m1) const;
  void step(double dt);

  std::function<double(double)> w0_, h0_, c0_;
  double support_end_ = 0.0;  // beyond: tail identically zero
  Options opt_;
  RateHistory history_;
  // running accumulators measured from t = 0
  double exp_int_ = 0.0;  // integral of A
  double alpha_ = 0.0;    // integral of 1/m1
  double dt_ = 0.0;
  double next_sample_ = 0.0;
  double residual_ = 0.0;
  Trajectory traj_;
};

Trajectory evolve(const GridDensity& init, double t_end, double dt);
Trajectory evolve(const SelfSimilarFamily& family, double t_end, double dt);

}  // namespace cp::classical
