#pragma once

#include <vector>

#include "cplab/density.hpp"

namespace cp {

// The one-parameter self-similar family, normalized to unit mean. Closed
// forms for the survival function, its density, and the integrated tail;
// beta < 1 has compact support with endpoint 1/(1-beta), beta = 1 is the
// unit exponential, beta > 1 has a power-law tail.
struct SelfSimilarFamily {
  double beta = 1.0;

  explicit SelfSimilarFamily(double b);
  double support_end() const;  // +inf for beta >= 1
  double survival(double x) const;
  double density(double x) const;
  double tail_integral(double x) const;  // integral of the survival beyond x
};

// Tail diagnostics of a density: w = integrated density beyond x,
// h = integrated w beyond x, beta = value * h / w^2 where w is resolvable.
// Masked beta entries are NaN.
struct TailProfile {
  std::vector<double> x;
  std::vector<double> w;
  std::vector<double> h;
  std::vector<double> beta;

  static constexpr double kWeightGuard = 1e-12;  // relative floor on w
};

}  // namespace cp

namespace cp::measures {

TailProfile tail_functions(const GridDensity& d);

// E[X - x | X > x] = h(x)/w(x); throws once the tail is exhausted at x.
double residual_mean(const GridDensity& d, double x);

// Samples the self-similar density with parameter beta on the given grid and
// records the analytic beyond-grid mass.
GridDensity selfsimilar_init(double beta, const std::vector<double>& grid);

// Grid builder for the family: clusters points at the support edge for
// beta < 1 (the density is unbounded there once beta < 1/2) and extends
// geometrically into the tail for beta >= 1.
std::vector<double> selfsimilar_grid(double beta, std::size_t n);

// Kolmogorov distance between the law of X/<X> and the unit exponential.
double ks_exponential(const GridDensity& d);

// <X> = first moment over total mass.
double mean(const GridDensity& d);

}  // namespace cp::measures
