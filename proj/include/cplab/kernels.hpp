#pragma once

#include "cplab/rate_history.hpp"

namespace cp::kernels {

// Interval moments of the evolution kernel over [s, t]:
//   m1 = exp(integral of A), the growth factor,
//   m2 = integral of the growth factor from interior times,
//   sigma2 = same with the growth factor squared.
// All three are zero-interval-degenerate: (1, 0, 0) at s == t.
struct KernelMoments {
  double m1 = 1.0;
  double m2 = 0.0;
  double sigma2 = 0.0;
  double s = 0.0;
  double t = 0.0;
};

// Computed from scratch per call by adaptive quadrature on the history's own
// segments (relative tolerance 1e-11); callers that need incremental updates
// keep their own accumulators.
KernelMoments moments(const RateHistory& A, double s, double t);

// Gaussian evolution kernel on the whole line: mean m1*y - m2, variance
// eps*sigma2, measured from the history's first sample time to T.
double whole_line_green(const RateHistory& A, double eps, double x, double y,
                        double T);

struct StandardizedOffset {
  double z = 0.0;  // (m2 - m1*y)/sigma
  double a = 0.0;  // m2/sigma
  double b = 0.0;  // m1/sigma
};

StandardizedOffset standardized_offset(const RateHistory& A, double y, double T);

// Drift field of the exit-cost problem; singular at s == history start
// (sigma2 = 0) which is reported as a domain error.
double drift(const RateHistory& A, double x, double y, double s);

// Zero-noise path of the drift field through (T, x); tends to y at the
// history start and to x at s -> T.
double classical_path(const RateHistory& A, double x, double y, double s,
                      double T);

// (sigma2(s) - m2(s))/m1(s): accumulated dispersion in excess of drift.
// Nonnegative and nondecreasing for A >= 0.
double dispersion_gap(const RateHistory& A, double s);

// Dense table of the interval moments from the history start, built in one
// sweep; evaluation interpolates the accumulated integrals. For hot loops
// (path costs, characteristic shooting) that would otherwise recompute
// moments from scratch at every time query.
class MomentTable {
 public:
  MomentTable(const RateHistory& A, std::size_t n = 4000);

  double m1(double s) const;
  double m2(double s) const;
  double sigma2(double s) const;
  double inv_lambda(double s) const;
  double dispersion_gap(double s) const;          // (sigma2 - m2)/m1
  double drift(double x, double y, double s) const;  // the exit-cost field
  double t_front() const { return s_.front(); }
  double t_back() const { return s_.back(); }

 private:
  std::vector<double> s_, e_, p1_, p2_, inv_lam_;
  double interp(const std::vector<double>& v, double s) const;
};

}  // namespace cp::kernels
