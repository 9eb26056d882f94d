#include "cplab/normal.hpp"

#include <cmath>

namespace cp {

namespace {
constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;
constexpr double kSqrtPi = 1.7724538509055160273;
constexpr double kSqrtPiOver2 = 1.2533141373155002512;
}  // namespace

double erfcx(double x) {
  if (x < 0.0) {
    // erfcx(x) = 2 exp(x^2) - erfcx(-x); exp overflows past x ~ -26.6
    return 2.0 * std::exp(x * x) - erfcx(-x);
  }
  if (x < 25.0) {
    return std::exp(x * x) * std::erfc(x);
  }
  // asymptotic series, alternating; terms fall below machine eps quickly
  const double inv2x2 = 1.0 / (2.0 * x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int n = 1; n <= 12; ++n) {
    term *= -static_cast<double>(2 * n - 1) * inv2x2;
    sum += term;
    if (std::fabs(term) < 1e-18 * sum) break;
  }
  return sum / (x * kSqrtPi);
}

double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double normal_upper_tail(double z) { return 0.5 * std::erfc(z * kInvSqrt2); }

double mills_ratio(double z) { return kSqrtPiOver2 * erfcx(z * kInvSqrt2); }

double log_normal_upper_tail(double z) {
  if (z < 20.0) return std::log(normal_upper_tail(z));
  // Q(z) = phi(z) * mills(z) / exp(z^2/2) ... = phi(z) * R(z)
  return -0.5 * z * z - std::log(z) - 0.5 * std::log(2.0 * M_PI) +
         std::log(z * mills_ratio(z));
}

}  // namespace cp
