#pragma once

#include <cstddef>
#include <vector>

namespace cp {

// Sampled coarsening scale Lambda(t) on a strictly increasing time grid,
// interpolated piecewise linearly in Lambda. The drift coefficient of the
// transport term is A(t) = 1/Lambda(t).
//
// Evaluation outside the sampled range throws: histories are never
// extrapolated, callers extend them explicitly via extend().
class RateHistory {
 public:
  RateHistory() = default;
  RateHistory(std::vector<double> times, std::vector<double> lambdas);

  static RateHistory constant(double lambda, double t_begin, double t_end);

  // Appends a sample; t must exceed t_back(), lambda must be positive.
  void extend(double t, double lambda);

  bool empty() const { return t_.empty(); }
  std::size_t size() const { return t_.size(); }
  double t_front() const;
  double t_back() const;
  double lambda_front() const;
  double lambda_back() const;

  double lambda(double t) const;
  double inv_lambda(double t) const { return 1.0 / lambda(t); }

  // Exact integral_s^t of 1/Lambda over the piecewise-linear interpolant.
  double inv_lambda_integral(double s, double t) const;

  const std::vector<double>& times() const { return t_; }
  const std::vector<double>& lambdas() const { return lam_; }

  // Exact integral of 1/(l0 + slope*(u - t0)) over [a, b] within one segment.
  static double segment_inv_integral(double t0, double l0, double t1, double l1,
                                     double a, double b);

  // Index i with t in [t_[i], t_[i+1]].
  std::size_t segment_index(double t) const;

 private:
  void check_range(double t) const;
  std::vector<double> t_, lam_;
};

}  // namespace cp
