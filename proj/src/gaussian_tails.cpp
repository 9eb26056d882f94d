#include "cplab/gaussian_tails.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cplab/normal.hpp"
#include "cplab/quadrature.hpp"

namespace cp::tails {

double conditional_mean(double z) {
  if (!std::isfinite(z)) throw std::invalid_argument("conditional_mean: non-finite z");
  if (z >= 0.0) {
    // 1/R(z) - z with the scaled tail; no cancellation in R itself
    return 1.0 / mills_ratio(z) - z;
  }
  // below zero the ratio phi/Q is small and the subtraction is benign
  return normal_pdf(z) / normal_upper_tail(z) - z;
}

double riccati_rhs(double z, double m) { return m * m + z * m - 1.0; }

double riccati_integrate(double z0, double m0, double z1, double step) {
  if (step <= 0.0) throw std::invalid_argument("riccati_integrate: step must be > 0");
  if (m0 <= 0.0) throw std::invalid_argument("riccati_integrate: m0 must be > 0");
  double z = z0;
  double m = m0;
  const double dir = (z1 >= z0) ? 1.0 : -1.0;
  while (dir * (z1 - z) > 0.0) {
    const double h = dir * std::min(step, dir * (z1 - z));
    const double k1 = riccati_rhs(z, m);
    const double k2 = riccati_rhs(z + 0.5 * h, m + 0.5 * h * k1);
    const double k3 = riccati_rhs(z + 0.5 * h, m + 0.5 * h * k2);
    const double k4 = riccati_rhs(z + h, m + h * k3);
    m += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    z += h;
    if (!(m > 0.0) || m > 10.0 * (1.0 + std::fabs(z))) {
      throw std::runtime_error("riccati_integrate: solution left the admissible band");
    }
  }
  return m;
}

double quadrature_window(double z) { return std::max(-z, 0.0) + 12.0; }

double conditional_pdf(double z, double x) {
  if (!std::isfinite(z) || !std::isfinite(x)) {
    throw std::invalid_argument("conditional_pdf: non-finite input");
  }
  if (x < 0.0) return 0.0;
  // exp(-x^2/2 - z x) / R(z); stable for all z of interest
  if (z >= -25.0) {
    return std::exp(-0.5 * x * x - z * x) / mills_ratio(z);
  }
  // far-negative z: N(|z|, 1) shape, evaluate via pdf/Q directly
  return normal_pdf(x + z) / normal_upper_tail(z);
}

double conditional_cdf(double z, double x) {
  if (x <= 0.0) return 0.0;
  // 1 - Q(z + x)/Q(z) via the scaled ratio
  if (z >= -25.0) {
    const double ratio = std::exp(-z * x - 0.5 * x * x) * mills_ratio(z + x) / mills_ratio(z);
    return 1.0 - ratio;
  }
  return 1.0 - normal_upper_tail(z + x) / normal_upper_tail(z);
}

double second_moment_identity(double z) {
  const double end = quadrature_window(z);
  const double second =
      integrate([&](double x) { return x * x * conditional_pdf(z, x); }, 0.0, end,
                1e-12);
  const double mean =
      integrate([&](double x) { return x * conditional_pdf(z, x); }, 0.0, end, 1e-12);
  return second + z * mean - 1.0;
}

double scaled_ks_to_exponential(double z) {
  const double m = conditional_mean(z);
  // CDF comparison on a dense grid of the scaled variable
  double sup = 0.0;
  const int n = 4000;
  const double t_end = 20.0;
  for (int i = 1; i <= n; ++i) {
    const double t = t_end * i / n;
    const double d = std::fabs(conditional_cdf(z, t * m) - (1.0 - std::exp(-t)));
    sup = std::max(sup, d);
  }
  return sup;
}

double monotone_weight_ratio(double z, const std::function<double(double)>& f) {
  const double end = quadrature_window(z);
  const double den =
      integrate([&](double x) { return f(x) * conditional_pdf(z, x); }, 0.0, end, 1e-11);
  if (!(den > 0.0)) {
    throw std::domain_error("monotone_weight_ratio: weight vanishes on the window");
  }
  const double num = integrate(
      [&](double x) { return x * f(x) * conditional_pdf(z, x); }, 0.0, end, 1e-11);
  return num / den;
}

}  // namespace cp::tails
