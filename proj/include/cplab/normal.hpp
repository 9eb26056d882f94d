#pragma once

namespace cp {

// Scaled complementary error function exp(x^2) * erfc(x).
// Stable for large positive x where erfc underflows; for x < -26 the
// result overflows to +inf (callers must branch before that regime).
double erfcx(double x);

// Standard normal pdf phi(z).
double normal_pdf(double z);

// Upper tail Q(z) = P(Z > z) for the standard normal.
double normal_upper_tail(double z);

// Mills ratio exp(z^2/2) * integral_z^inf exp(-t^2/2) dt.
// Evaluates without subtracting near-equal numbers for any z >= -26.
double mills_ratio(double z);

// log of the upper tail, usable far beyond the underflow point of Q.
double log_normal_upper_tail(double z);

}  // namespace cp
