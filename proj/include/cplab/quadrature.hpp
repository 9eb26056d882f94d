#pragma once

#include <functional>
#include <span>
#include <vector>

namespace cp {

// Adaptive Simpson with Richardson extrapolation on each split.
// Terminates a branch once the local error estimate is below
// rel_tol * |whole| + abs_tol.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-10, double abs_tol = 0.0);

// Composite Simpson for sampled data on a (possibly nonuniform) strictly
// increasing grid; exact for quadratics on each point triple. Falls back to
// the trapezoid rule when fewer than three points are given.
double integrate_samples(std::span<const double> x, std::span<const double> f);

// Trapezoid rule on sampled data.
double trapezoid_samples(std::span<const double> x, std::span<const double> f);

// Weights w with sum_i w[i] f[i] == integrate_samples(x, f).
std::vector<double> simpson_weights(std::span<const double> x);

// Right-to-left cumulative trapezoid: out[i] = integral_{x[i]}^{x[n-1]} f.
// Exactly nonincreasing for f >= 0.
std::vector<double> cumulative_tail_trapezoid(std::span<const double> x,
                                              std::span<const double> f);

// Piecewise-linear interpolant on a strictly increasing grid.
// Evaluation outside the grid clamps to the end values by default.
class PiecewiseLinear {
 public:
  PiecewiseLinear() = default;
  PiecewiseLinear(std::vector<double> xs, std::vector<double> ys);
  double operator()(double x) const;
  double x_front() const { return xs_.front(); }
  double x_back() const { return xs_.back(); }

 private:
  std::vector<double> xs_, ys_;
};

}  // namespace cp
