#pragma once

#include <functional>
#include <vector>

#include "cplab/rate_history.hpp"

namespace cp::exitcost {

// Dirichlet fundamental solution of the constant-drift problem (drift -k
// toward the wall), by the image formula: free Gaussian times the
// reflection factor.
double const_drift_green(double k, double eps, double x, double xp, double t);

// Probability that the constant-drift diffusion started at x has hit the
// wall by time T (+inf allowed), as the time integral of the boundary flux.
// At T = +inf this is exactly exp(-2 k x / eps).
double exit_time_mass(double k, double eps, double x, double T);

// Upper bound on the remainder of the exit-time integral beyond T.
double exit_time_tail_bound(double k, double eps, double x, double T);

// Dual exit-cost solve: v with dv/dT = -lambda(x,T) dv/dx + (eps/2) v_xx on
// x > 0, v(0, T) = 1, v(x_far, T) = 0, from v(., t0) = v0. The exit cost is
// q = -eps log v, masked (NaN) where v underflows.
struct DualCostResult {
  std::vector<double> x;
  std::vector<double> v;
  std::vector<double> q;
};

struct DualCostOptions {
  double h = 0.0;        // 0: eps/40
  double dt0 = 1e-4;
  double dt_growth = 5e-3;  // dt = max(dt0, dt_growth * t)
  double theta = 1.0;    // the dual solve favors the monotone scheme
  double v_floor = 1e-300;
};

DualCostResult dual_cost_solve(
    const std::function<double(double, double)>& lambda_drift, double eps,
    double t0, double T, double x_far,
    const std::function<double(double)>& v0, DualCostOptions opt = {});

// Constant-drift cost: solves the dual problem with lambda = -k and initial
// cost profile q0 (v0 = exp(-q0/eps)), returning q on [0, x_far].
DualCostResult const_drift_cost(double k, double eps, double T, double x_far,
                                const std::function<double(double)>& q0,
                                DualCostOptions opt = {});

// Piecewise-linear exit path: starts at (tau, 0), ends at (T, x); interior
// knots at uniform times must stay positive.
struct Path {
  double tau = 0.0;
  double t_end = 0.0;
  double x_end = 0.0;
  std::vector<double> interior;  // values at the uniform interior times

  std::vector<double> times() const;
  std::vector<double> knots() const;  // 0, interior..., x_end
};

// Action of a path against a drift field: (1/2) integral (dx/ds - drift)^2,
// trapezoid over the knots.
double action(const Path& path,
              const std::function<double(double, double)>& drift);
double action(const Path& path, const RateHistory& A, double y);

// Restricted minimum of the action over discretized paths: scan of exit
// times (with golden-section refinement around the best) times a projected
// descent in the interior knots, warm-started from the straight path and
// from the zero-noise path clipped at the wall. An upper bound on the true
// cost that tightens under knot refinement.
struct BruteForceResult {
  double cost = 0.0;
  double tau = 0.0;
  bool converged = true;
};

BruteForceResult bruteforce_cost(
    double x, double T, const std::function<double(double, double)>& drift,
    const std::function<double(double)>& classical_guess, int knots,
    int tau_grid);

BruteForceResult bruteforce_cost(double x, double y, double T,
                                 const RateHistory& A, int knots = 32,
                                 int tau_grid = 48);

// Cost through the characteristic field: shoots wall-leaving characteristics
// to hit (x, T), then integrates the gradient formula along x. Throws
// std::domain_error when (x, T) is outside the covered patch.
double characteristics_cost(double x, double y, double T, const RateHistory& A);

// Gradient of the characteristic cost at (x, T).
double characteristics_gradient(double x, double y, double T,
                                const RateHistory& A);

}  // namespace cp::exitcost
