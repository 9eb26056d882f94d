#pragma once

#include <functional>

namespace cp::tails {

// Mean of the standard normal beyond threshold z, shifted to the origin:
// m(z) = E[Z - z | Z > z]. Positive and strictly decreasing.
double conditional_mean(double z);

// Right-hand side of the defining first-order ODE dm/dz = m^2 + z m - 1.
double riccati_rhs(double z, double m);

// One-step 4th-order integration of the ODE from (z0, m0) to z1 with fixed
// step size. Throws on blow-up, detected as m leaving (0, 10 (1 + |z|)).
double riccati_integrate(double z0, double m0, double z1, double step = 1e-3);

// pdf of X_z = (Z - z | Z > z) at x >= 0, normalized over the half line.
double conditional_pdf(double z, double x);

// P(X_z <= x).
double conditional_cdf(double z, double x);

// <X_z^2> + z <X_z> - 1 computed by quadrature; vanishes identically.
double second_moment_identity(double z);

// Kolmogorov distance between the law of X_z / m(z) and the unit exponential.
double scaled_ks_to_exponential(double z);

// E[X_z f(X_z)] / E[f(X_z)] by quadrature over the truncation window.
// Throws when the weight has no mass on the window.
double monotone_weight_ratio(double z, const std::function<double(double)>& f);

// Quadrature window end for the conditional laws: max(-z, 0) + 12.
double quadrature_window(double z);

}  // namespace cp::tails
